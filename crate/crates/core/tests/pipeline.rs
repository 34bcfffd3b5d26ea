mod common;

use nsvalue_core::lp::{parse_lp, write_lp};
use nsvalue_core::mpc::{solve_mpc, OutcomeKind};
use nsvalue_core::pipeline::{all_stages, build_mpc_instance, check_complemented, repair_approx_solution, DualLayout};
use nsvalue_core::rational::{int, rat};
use nsvalue_core::simplex::solve;
use nsvalue_core::value::exact_value;
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, ..ProptestConfig::default() })]

    #[test]
    fn every_stage_has_the_game_value(seed in any::<u64>()) {
        let game = common::random_game(seed, 3);
        let (w, _) = exact_value(&game).unwrap();
        for lp in all_stages(&game).unwrap() {
            prop_assert_eq!(solve(&lp).value().cloned(), Some(w.clone()));
            let reread = parse_lp(&write_lp(&lp)).unwrap();
            prop_assert_eq!(solve(&reread).value().cloned(), Some(w.clone()));
        }
    }

    #[test]
    fn mpc_instance_is_well_formed(seed in any::<u64>(), s_num in 0i64..10) {
        let game = common::random_game(seed, 3);
        let s = rat(s_num, 10);
        let inst = build_mpc_instance(&game, &s);
        prop_assert_eq!(inst.num_vars(), DualLayout(game.dims()).len());
        prop_assert_eq!(&inst.b()[0], &s);
        // Payoff budgets 2 - R lie in [1, 2].
        for (i, b) in inst.b().iter().enumerate().skip(1).take(game.dims().size()) {
            prop_assert!(*b >= int(1) && *b <= int(2), "row {}", i);
        }
        let rows = inst.packing().iter().chain(inst.covering());
        for row in rows {
            prop_assert!(row.iter().all(|(_, a)| *a >= int(0)));
        }
        prop_assert!(inst.d().iter().all(|d| *d >= int(0)));
    }

    #[test]
    fn solver_output_repairs_to_a_feasible_point(seed in any::<u64>()) {
        let game = common::random_game(seed, 3);
        let (w, _) = exact_value(&game).unwrap();
        let eps = rat(1, 20);
        let s = if w >= rat(1, 10) { &w - rat(1, 10) } else { w.clone() };
        let s = if s < int(1) { s } else { rat(9, 10) };
        let inst = build_mpc_instance(&game, &s);
        let out = solve_mpc(&inst, &eps).unwrap();
        if out.kind == OutcomeKind::Approx {
            let rep = repair_approx_solution(&game, out.x.as_ref().unwrap(), &eps, &s).unwrap();
            prop_assert!(rep.objective <= &s + int(3) * &eps);
            prop_assert_eq!(check_complemented(&game, &rep.assignment).unwrap(), rep.objective.clone());
            // A feasible dual point bounds the value from above.
            prop_assert!(w <= rep.objective);
        }
    }
}
