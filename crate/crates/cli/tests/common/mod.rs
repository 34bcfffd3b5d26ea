#![allow(dead_code)]

use std::collections::BTreeMap;

use nsvalue_core::game::{validate_game, Dims, RawGame, Validated};
use nsvalue_core::mpc::MpcInstance;
use nsvalue_core::rational::{int, rat};
use nsvalue_core::Rational;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub fn random_payoff(rng: &mut ChaCha8Rng) -> Rational {
    match rng.gen_range(0..10) {
        0..=3 => int(0),
        4..=6 => int(1),
        _ => {
            let den = rng.gen_range(2..=5);
            rat(rng.gen_range(1..den), den)
        }
    }
}

/// A random game with the given dimensions. Question weights are small
/// integers (some zero), so pruning is exercised too.
pub fn random_game_with(rng: &mut ChaCha8Rng, dims: Dims) -> Validated {
    let mut weights = BTreeMap::new();
    let mut total = 0i64;
    for q1 in 0..dims.q1 {
        for q2 in 0..dims.q2 {
            let w = rng.gen_range(0..=4i64);
            total += w;
            weights.insert((q1, q2), w);
        }
    }
    if total == 0 {
        weights.insert((0, 0), 1);
        total = 1;
    }
    let mut raw = RawGame::new(dims);
    for (k, w) in weights {
        if w > 0 {
            raw.pi.insert(k, rat(w, total));
        }
    }
    for q1 in 0..dims.q1 {
        for q2 in 0..dims.q2 {
            for a1 in 0..dims.a1 {
                for a2 in 0..dims.a2 {
                    let r = random_payoff(rng);
                    if r != int(0) {
                        raw.payoff.insert((q1, q2, a1, a2), r);
                    }
                }
            }
        }
    }
    validate_game(&raw).expect("generated game is valid")
}

/// Question and answer set sizes drawn from `1..=max`.
pub fn random_game(rng: &mut ChaCha8Rng, max: usize) -> Validated {
    let dims = Dims::new(
        rng.gen_range(1..=max),
        rng.gen_range(1..=max),
        rng.gen_range(1..=max),
        rng.gen_range(1..=max),
    );
    random_game_with(rng, dims)
}

/// A random nonnegative packing/covering instance with at most `max_vars` variables.
pub fn random_instance(rng: &mut ChaCha8Rng, max_vars: usize) -> MpcInstance {
    let n = rng.gen_range(1..=max_vars);
    let m1 = rng.gen_range(0..=20);
    let m2 = rng.gen_range(1..=20);
    let density: f64 = rng.gen_range(0.1..0.6);
    let row = |rng: &mut ChaCha8Rng| {
        let mut r = Vec::new();
        for k in 0..n {
            if rng.gen_bool(density) {
                r.push((k, rat(rng.gen_range(1..10), rng.gen_range(1..5))));
            }
        }
        r
    };
    let a: Vec<_> = (0..m1).map(|_| row(rng)).collect();
    let c: Vec<_> = (0..m2).map(|_| row(rng)).collect();
    let b = (0..m1).map(|_| rat(rng.gen_range(0..10), rng.gen_range(1..5))).collect();
    let d = (0..m2).map(|_| rat(rng.gen_range(0..10), rng.gen_range(1..5))).collect();
    MpcInstance::new(n, a, b, c, d).expect("nonnegative data")
}

/// Smallest `t` with `A x <= t b`, `C x >= d` feasible, when positive and finite.
/// Scaling `b` by it gives an instance that is feasible with no slack.
pub fn packing_threshold(inst: &MpcInstance) -> Option<Rational> {
    use nsvalue_core::mpc::to_feasibility_lp;
    use nsvalue_core::simplex::{solve, LpOutcome};
    let mut lp = to_feasibility_lp(inst);
    let t = lp.add_var("t".into(), true).expect("fresh name");
    for i in 0..inst.packing_rows() {
        let row = &mut lp.constraints[i];
        row.coeffs.push((t, -inst.b()[i].clone()));
        row.rhs = int(0);
    }
    lp.set_objective(vec![(t, int(1))]);
    match solve(&lp) {
        LpOutcome::Optimal { value, .. } if value > int(0) => Some(value),
        _ => None,
    }
}
