mod common;

use nsvalue_core::games;
use nsvalue_core::mpc::{
    certifies_infeasible, exact_feasible_point, parse_mpc, solve_mpc, solve_mpc_with, verify_approx_solution,
    write_mpc, OutcomeKind, SolveMethod, SolverConfig,
};
use nsvalue_core::pipeline::{build_mpc_instance, check_complemented, repair_approx_solution};
use nsvalue_core::rational::{int, rat};
use proptest::prelude::*;

proptest! {
    #![proptest_config(ProptestConfig { cases: 96, ..ProptestConfig::default() })]

    #[test]
    fn solver_is_sound(seed in any::<u64>(), eps_ix in 0usize..3) {
        let eps = [rat(1, 5), rat(1, 20), rat(1, 100)][eps_ix].clone();
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 24);
        let feasible = exact_feasible_point(&inst).is_some();
        let out = solve_mpc(&inst, &eps).unwrap();
        match out.kind {
            OutcomeKind::Approx => {
                prop_assert!(verify_approx_solution(&inst, out.x.as_ref().unwrap(), &(int(1) + &eps)).unwrap());
            }
            OutcomeKind::Infeasible => {
                prop_assert!(!feasible);
                prop_assert!(certifies_infeasible(&inst, out.certificate.as_ref().unwrap()));
            }
        }
    }

    #[test]
    fn text_format_round_trips(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let inst = common::random_instance(&mut rng, 10);
        let back = parse_mpc(&write_mpc(&inst)).unwrap();
        prop_assert_eq!(write_mpc(&back), write_mpc(&inst));
    }
}

#[test]
fn named_instance_examples() {
    let guess = build_mpc_instance(&games::guess(), &rat(3, 5));
    let out = solve_mpc(&guess, &rat(1, 20)).unwrap();
    assert_eq!(out.kind, OutcomeKind::Approx);
    let x = out.x.unwrap();
    assert!(verify_approx_solution(&guess, &x, &rat(21, 20)).unwrap());
    let rep = repair_approx_solution(&games::guess(), &x, &rat(1, 20), &rat(3, 5)).unwrap();
    assert!(rep.objective <= rat(3, 4));
    assert!(check_complemented(&games::guess(), &rep.assignment).is_ok());

    let triv = build_mpc_instance(&games::trivial(), &int(0));
    assert_eq!(solve_mpc(&triv, &rat(1, 10)).unwrap().kind, OutcomeKind::Infeasible);
    assert!(exact_feasible_point(&triv).is_none());

    // CHSH has value 1, so nothing is (1 + eps)-feasible at s = 1/2 with eps = 1/10.
    let chsh = build_mpc_instance(&games::chsh(), &rat(1, 2));
    assert_eq!(solve_mpc(&chsh, &rat(1, 10)).unwrap().kind, OutcomeKind::Infeasible);
}

#[test]
fn results_do_not_depend_on_thread_count() {
    let mut rng = common::rng(11);
    let game = common::random_full_game(&mut rng, nsvalue_core::Dims::new(8, 8, 8, 8));
    let inst = build_mpc_instance(&game, &rat(1, 2));
    let mut inputs = vec![inst];
    for _ in 0..4 {
        inputs.push(common::random_instance(&mut rng, 40));
    }
    for inst in &inputs {
        let runs: Vec<_> = [1, 3, 8]
            .iter()
            .map(|&t| {
                let pool = rayon::ThreadPoolBuilder::new().num_threads(t).build().unwrap();
                pool.install(|| solve_mpc(inst, &rat(1, 20)).unwrap())
            })
            .collect();
        assert!(runs.windows(2).all(|w| w[0] == w[1]));
    }
}

/// Halving `b` on an instance with no slack makes it infeasible or harder to solve.
#[test]
fn shrinking_budgets_on_tight_instances() {
    let eps = rat(1, 20);
    let mut checked = 0;
    for seed in 0..40 {
        let mut rng = common::rng(1000 + seed);
        let inst = common::random_instance(&mut rng, 20);
        let Some(t) = common::packing_threshold(&inst) else { continue };
        let tight = inst.scale_b(&t);
        let before = solve_mpc(&tight, &eps).unwrap();
        let after = solve_mpc(&tight.scale_b(&rat(1, 2)), &eps).unwrap();
        assert_eq!(before.kind, OutcomeKind::Approx);
        assert!(after.kind == OutcomeKind::Infeasible || after.rounds > before.rounds, "seed {seed}");
        checked += 1;
    }
    assert!(checked >= 10);
}

#[test]
fn exact_fallback_is_used_only_when_enabled() {
    // A one-round budget cannot settle this feasible instance iteratively.
    let inst = build_mpc_instance(&games::guess(), &rat(3, 5));
    let config = SolverConfig { round_safety_factor: 1e-9, retries: 0, exact_fallback_vars: 100, ..SolverConfig::default() };
    let out = solve_mpc_with(&inst, &rat(1, 20), &config).unwrap();
    assert_eq!((out.kind, out.method), (OutcomeKind::Approx, SolveMethod::Exact));
    assert!(verify_approx_solution(&inst, out.x.as_ref().unwrap(), &int(1)).unwrap());
    let without = SolverConfig { exact_fallback_vars: 0, ..config };
    assert!(matches!(
        solve_mpc_with(&inst, &rat(1, 20), &without),
        Err(nsvalue_core::mpc::MpcError::Inconclusive { rounds: 1 })
    ));
}
