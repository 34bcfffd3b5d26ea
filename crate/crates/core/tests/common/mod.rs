#![allow(dead_code)]

use nsvalue_core::game::{validate_game, Dims, Game, RawGame, Strategy};
use nsvalue_core::mpc::MpcInstance;
use nsvalue_core::rational::{int, rat};
use nsvalue_core::Rational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_dims(rng: &mut ChaCha8Rng, max: usize) -> Dims {
    Dims::new(rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max), rng.gen_range(1..=max))
}

/// A random game on `dims` with every question asked, small-denominator payoffs.
pub fn random_full_game(rng: &mut ChaCha8Rng, dims: Dims) -> Game {
    let weights: Vec<i64> = (0..dims.pairs()).map(|_| rng.gen_range(0..=3)).collect();
    let total: i64 = weights.iter().sum();
    let mut raw = RawGame::new(dims);
    for q1 in 0..dims.q1 {
        for q2 in 0..dims.q2 {
            // Keep every marginal positive by mixing in a uniform share.
            let w = weights[dims.pair(q1, q2)];
            raw.pi.insert((q1, q2), rat(w + 1, total + dims.pairs() as i64));
            for a1 in 0..dims.a1 {
                for a2 in 0..dims.a2 {
                    let r = match rng.gen_range(0..6) {
                        0 | 1 => continue,
                        2 | 3 => int(1),
                        _ => rat(rng.gen_range(1..4), 4),
                    };
                    raw.payoff.insert((q1, q2, a1, a2), r);
                }
            }
        }
    }
    validate_game(&raw).unwrap().game
}

pub fn random_game(seed: u64, max: usize) -> Game {
    let mut rng = rng(seed);
    let dims = random_dims(&mut rng, max);
    random_full_game(&mut rng, dims)
}

/// Each `p(.,.|q1,q2)` is an independent random distribution; usually signaling.
pub fn random_strategy(rng: &mut ChaCha8Rng, dims: Dims) -> Strategy {
    let mut p = Vec::with_capacity(dims.size());
    for _ in 0..dims.pairs() {
        let w: Vec<i64> = (0..dims.a1 * dims.a2).map(|_| rng.gen_range(0..5)).collect();
        let total: i64 = w.iter().sum::<i64>().max(1);
        let fallback = w.iter().all(|&x| x == 0);
        for (k, x) in w.iter().enumerate() {
            p.push(if fallback { int((k == 0) as i64) } else { rat(*x, total) });
        }
    }
    Strategy::new(dims, p).unwrap()
}

pub fn random_distribution(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    let w: Vec<i64> = (0..n).map(|_| rng.gen_range(1..5)).collect();
    let total: i64 = w.iter().sum();
    w.into_iter().map(|x| rat(x, total)).collect()
}

pub fn random_instance(rng: &mut ChaCha8Rng, max_vars: usize) -> MpcInstance {
    let n = rng.gen_range(1..=max_vars);
    let m1 = rng.gen_range(0..=12);
    let m2 = rng.gen_range(1..=12);
    let density: f64 = rng.gen_range(0.15..0.6);
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
    MpcInstance::new(n, a, b, c, d).unwrap()
}

/// Smallest `t` with `A x <= t b`, `C x >= d` feasible, when positive and finite.
pub fn packing_threshold(inst: &MpcInstance) -> Option<Rational> {
    use nsvalue_core::mpc::to_feasibility_lp;
    use nsvalue_core::simplex::{solve, LpOutcome};
    let mut lp = to_feasibility_lp(inst);
    let t = lp.add_var("t".into(), true).unwrap();
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
