mod common;

use nsvalue_core::game::{acceptance_probability, check_no_signaling, parse_game, validate_game, write_game, RawGame, Strategy};
use nsvalue_core::pipeline::build_primal;
use nsvalue_core::rational::{int, rat};
use nsvalue_core::simplex::solve;
use nsvalue_core::value::{classical_value, exact_value};
use proptest::prelude::*;
use rand::seq::SliceRandom;

fn config(cases: u32) -> ProptestConfig {
    ProptestConfig { cases, ..ProptestConfig::default() }
}

proptest! {
    #![proptest_config(config(64))]

    #[test]
    fn acceptance_is_a_probability(seed in any::<u64>()) {
        let game = common::random_game(seed, 3);
        let mut rng = common::rng(seed ^ 1);
        let p = common::random_strategy(&mut rng, game.dims());
        let a = acceptance_probability(&game, &p).unwrap();
        prop_assert!(a >= int(0) && a <= int(1));
    }

    #[test]
    fn acceptance_is_linear_in_the_strategy(seed in any::<u64>(), k in 0i64..=8) {
        let game = common::random_game(seed, 3);
        let d = game.dims();
        let mut rng = common::rng(seed ^ 2);
        let p = common::random_strategy(&mut rng, d);
        let q = common::random_strategy(&mut rng, d);
        let l = rat(k, 8);
        let mix = Strategy::from_fn(d, |a, b, c, e| &l * p.p(a, b, c, e) + (int(1) - &l) * q.p(a, b, c, e)).unwrap();
        let lhs = acceptance_probability(&game, &mix).unwrap();
        let rhs = &l * acceptance_probability(&game, &p).unwrap() + (int(1) - &l) * acceptance_probability(&game, &q).unwrap();
        prop_assert_eq!(lhs, rhs);
    }

    #[test]
    fn relabeling_preserves_acceptance_and_value(seed in any::<u64>()) {
        let game = common::random_game(seed, 3);
        let d = game.dims();
        let mut rng = common::rng(seed ^ 3);
        let mut perm = |n: usize| { let mut v: Vec<usize> = (0..n).collect(); v.shuffle(&mut rng); v };
        let (pq1, pq2, pa1, pa2) = (perm(d.q1), perm(d.q2), perm(d.a1), perm(d.a2));
        let relabeled = game.relabel(&pq1, &pq2, &pa1, &pa2).unwrap();
        let p = common::random_strategy(&mut rng, d);
        let mut moved = vec![int(0); d.size()];
        for q1 in 0..d.q1 { for q2 in 0..d.q2 { for a1 in 0..d.a1 { for a2 in 0..d.a2 {
            moved[d.index(pq1[q1], pq2[q2], pa1[a1], pa2[a2])] = p.p(q1, q2, a1, a2).clone();
        }}}}
        let moved = Strategy::new(d, moved).unwrap();
        prop_assert_eq!(acceptance_probability(&game, &p).unwrap(), acceptance_probability(&relabeled, &moved).unwrap());
        prop_assert_eq!(exact_value(&game).unwrap().0, exact_value(&relabeled).unwrap().0);
    }

    #[test]
    fn product_strategies_are_no_signaling(seed in any::<u64>()) {
        let mut rng = common::rng(seed);
        let d = common::random_dims(&mut rng, 4);
        let p1: Vec<_> = (0..d.q1).map(|_| common::random_distribution(&mut rng, d.a1)).collect();
        let p2: Vec<_> = (0..d.q2).map(|_| common::random_distribution(&mut rng, d.a2)).collect();
        let p = Strategy::product(d, &p1, &p2).unwrap();
        let report = check_no_signaling(&p, &int(0));
        prop_assert!(report.is_no_signaling);
        prop_assert_eq!(report.worst_violation, int(0));
    }

    #[test]
    fn scaling_payoffs_scales_the_value(seed in any::<u64>(), num in 1i64..=6) {
        let game = common::random_game(seed, 2);
        let alpha = rat(num, 6);
        let scaled = game.scale_payoff(&alpha).unwrap();
        let (w, p) = exact_value(&game).unwrap();
        let (ws, _) = exact_value(&scaled).unwrap();
        prop_assert_eq!(&ws, &(&w * &alpha));
        // The original optimizer stays optimal.
        prop_assert_eq!(acceptance_probability(&scaled, &p).unwrap(), ws);
    }

    #[test]
    fn classical_below_no_signaling_below_one(seed in any::<u64>()) {
        let game = common::random_game(seed, 3);
        let (w, p) = exact_value(&game).unwrap();
        let classical = classical_value(&game).unwrap();
        prop_assert!(classical <= w && w <= int(1));
        prop_assert!(check_no_signaling(&p, &int(0)).is_no_signaling);
        prop_assert_eq!(acceptance_probability(&game, &p).unwrap(), w.clone());
        prop_assert_eq!(solve(&build_primal(&game)).value().cloned(), Some(w));
    }

    #[test]
    fn game_text_round_trips(seed in any::<u64>()) {
        let game = common::random_game(seed, 3);
        let text = write_game(&game);
        let back = validate_game(&parse_game(&text).unwrap()).unwrap();
        prop_assert!(back.pruning.is_identity());
        prop_assert_eq!(back.game, game.clone());
        prop_assert_eq!(parse_game(&text).unwrap(), RawGame::from_game(&game));
    }
}
