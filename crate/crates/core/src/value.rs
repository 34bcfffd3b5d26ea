//! Deciding and approximating the no-signaling value, plus exact and
//! classical baselines.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::game::{Game, GameError, Strategy};
use crate::mpc::{solve_mpc_with, InfeasibilityCertificate, MpcError, OutcomeKind, SolverConfig};
use crate::pipeline::{build_mpc_instance, build_primal, repair_approx_solution, PipelineError, Repaired};
use crate::rational::{fmt_rational, int, Rational};
use crate::simplex::{solve, LpOutcome};

/// Largest primal program handed to the exact simplex.
pub const EXACT_VAR_GUARD: usize = 50_000;
/// Largest number of deterministic strategy pairs enumerated by [`classical_value`].
pub const CLASSICAL_GUARD: u128 = 10_000_000;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ValueError {
    #[error("thresholds must satisfy 0 <= s < c <= 1, got s = {s}, c = {c}")]
    InvalidThresholds { s: String, c: String },
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(String),
    #[error("primal program has {vars} variables, exact solving is limited to {guard}")]
    TooLargeForExact { vars: usize, guard: usize },
    #[error("{count} deterministic strategy pairs exceed the enumeration limit {guard}")]
    EnumerationTooLarge { count: String, guard: u128 },
    #[error("exact solver reported {0}")]
    ExactSolver(String),
    #[error(transparent)]
    Solver(#[from] MpcError),
    #[error(transparent)]
    Pipeline(#[from] PipelineError),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Decision {
    AtMostS,
    AtLeastC,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub decision: Decision,
    pub s: Rational,
    pub c: Rational,
    pub epsilon_used: Rational,
    /// For `AtMostS`: a feasible point of the complemented program with
    /// objective at most `s + 3 epsilon_used`, which bounds the value from above.
    pub certificate: Option<Repaired>,
    /// For `AtLeastC`: weights proving that no point has objective `<= s`.
    pub infeasibility: Option<InfeasibilityCertificate>,
    pub rounds: usize,
}

/// Decides `w <= s` versus `w >= c` for the no-signaling value `w`.
/// When `w` lies strictly between the thresholds either side may come back,
/// but each side is backed by an exact certificate: `AtMostS` proves
/// `w <= s + 3 eps < c` and `AtLeastC` proves `w > s`.
pub fn decide(game: &Game, s: &Rational, c: &Rational) -> Result<Verdict, ValueError> {
    decide_with(game, s, c, &SolverConfig::default())
}

pub fn decide_with(
    game: &Game,
    s: &Rational,
    c: &Rational,
    config: &SolverConfig,
) -> Result<Verdict, ValueError> {
    if s.is_negative() || s >= c || *c > Rational::one() {
        return Err(ValueError::InvalidThresholds { s: fmt_rational(s), c: fmt_rational(c) });
    }
    let epsilon = (c - s) / int(4);
    let inst = build_mpc_instance(game, s);
    let out = solve_mpc_with(&inst, &epsilon, config)?;
    let (decision, certificate) = match out.kind {
        OutcomeKind::Approx => {
            let x = out.x.as_deref().expect("approximate outcomes carry x");
            (Decision::AtMostS, Some(repair_approx_solution(game, x, &epsilon, s)?))
        }
        OutcomeKind::Infeasible => (Decision::AtLeastC, None),
    };
    Ok(Verdict {
        decision,
        s: s.clone(),
        c: c.clone(),
        epsilon_used: epsilon,
        certificate,
        infeasibility: out.certificate,
        rounds: out.rounds,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Grid,
    BinarySearch,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValueEstimate {
    pub lower: Rational,
    pub upper: Rational,
    pub method: Method,
    /// Number of `decide` calls.
    pub calls: usize,
    /// Solver rounds summed over all calls.
    pub rounds: usize,
}

fn check_epsilon(eps: &Rational) -> Result<(), ValueError> {
    if !eps.is_positive() || *eps >= Rational::one() {
        return Err(ValueError::InvalidEpsilon(fmt_rational(eps)));
    }
    Ok(())
}

/// `ceil(log2(1/eps)) + 1`.
fn search_depth(eps: &Rational) -> usize {
    let mut depth = 0;
    let mut width = Rational::one();
    while width > *eps {
        width /= int(2);
        depth += 1;
    }
    depth + 1
}

/// Brackets the value within `eps` by binary search over threshold pairs
/// `(mid - eps/4, mid + eps/4)`. Both ends are certified: `upper` is the
/// objective of a feasible complemented point and `lower` a threshold whose
/// instance was proven infeasible, so the value lies in `[lower, upper]`.
pub fn approximate_value(game: &Game, eps: &Rational) -> Result<ValueEstimate, ValueError> {
    approximate_value_with(game, eps, Method::BinarySearch, &SolverConfig::default())
}

pub fn approximate_value_with(
    game: &Game,
    eps: &Rational,
    method: Method,
    config: &SolverConfig,
) -> Result<ValueEstimate, ValueError> {
    check_epsilon(eps)?;
    match method {
        Method::BinarySearch => binary_search(game, eps, config),
        Method::Grid => grid(game, eps, config),
    }
}

fn binary_search(game: &Game, eps: &Rational, config: &SolverConfig) -> Result<ValueEstimate, ValueError> {
    let half = eps / int(2);
    let quarter = eps / int(4);
    let top = Rational::one() - &half;
    let mut lower = Rational::zero();
    let mut upper = Rational::one();
    let (mut calls, mut rounds) = (0, 0);
    for _ in 0..search_depth(eps) {
        if &upper - &lower <= *eps {
            break;
        }
        let mid = (&lower + &upper) / int(2);
        let s = (mid - &quarter).clamp(Rational::zero(), top.clone());
        let c = &s + &half;
        let verdict = decide_with(game, &s, &c, config)?;
        calls += 1;
        rounds += verdict.rounds;
        match verdict.decision {
            Decision::AtMostS => {
                let bound = verdict.certificate.expect("AtMostS carries a certificate").objective;
                upper = upper.min(bound);
            }
            Decision::AtLeastC => lower = lower.max(s),
        }
    }
    Ok(ValueEstimate { lower, upper, method: Method::BinarySearch, calls, rounds })
}

/// Runs every threshold pair `s = k h`, `c = s + h` with `h = eps / 4` in parallel.
fn grid(game: &Game, eps: &Rational, config: &SolverConfig) -> Result<ValueEstimate, ValueError> {
    let h = eps / int(4);
    let mut thresholds = Vec::new();
    let mut s = Rational::zero();
    while &s + &h <= Rational::one() {
        thresholds.push(s.clone());
        s += &h;
    }
    let verdicts: Vec<Verdict> = thresholds
        .par_iter()
        .map(|s| decide_with(game, s, &(s + &h), config))
        .collect::<Result<_, _>>()?;
    let mut lower = Rational::zero();
    let mut upper = Rational::one();
    for v in &verdicts {
        match v.decision {
            Decision::AtMostS => {
                let bound = &v.certificate.as_ref().expect("AtMostS carries a certificate").objective;
                if *bound < upper {
                    upper = bound.clone();
                }
            }
            Decision::AtLeastC => {
                if v.s > lower {
                    lower = v.s.clone();
                }
            }
        }
    }
    Ok(ValueEstimate {
        lower,
        upper,
        method: Method::Grid,
        calls: verdicts.len(),
        rounds: verdicts.iter().map(|v| v.rounds).sum(),
    })
}

/// Exact no-signaling value and an optimal strategy, via the rational simplex
/// on the primal program.
pub fn exact_value(game: &Game) -> Result<(Rational, Strategy), ValueError> {
    let lp = build_primal(game);
    if lp.num_vars() > EXACT_VAR_GUARD {
        return Err(ValueError::TooLargeForExact { vars: lp.num_vars(), guard: EXACT_VAR_GUARD });
    }
    match solve(&lp) {
        LpOutcome::Optimal { value, x } => {
            let size = game.dims().size();
            let strategy = Strategy::new(game.dims(), x[..size].to_vec())?;
            Ok((value, strategy))
        }
        other => Err(ValueError::ExactSolver(format!("{other:?}"))),
    }
}

/// Best value over deterministic strategy pairs. Player 1's functions are
/// enumerated; player 2 best-responds question by question.
pub fn classical_value(game: &Game) -> Result<Rational, ValueError> {
    let d = game.dims();
    let count = (d.a1 as u128)
        .checked_pow(d.q1 as u32)
        .and_then(|x| (d.a2 as u128).checked_pow(d.q2 as u32).and_then(|y| x.checked_mul(y)));
    let firsts = match count {
        Some(c) if c <= CLASSICAL_GUARD => (d.a1 as u128).pow(d.q1 as u32) as u64,
        _ => {
            let shown = count.map_or_else(|| format!("{}^{} * {}^{}", d.a1, d.q1, d.a2, d.q2), |c| c.to_string());
            return Err(ValueError::EnumerationTooLarge { count: shown, guard: CLASSICAL_GUARD });
        }
    };
    let best_response = |code: u64| -> Rational {
        let mut f1 = Vec::with_capacity(d.q1);
        let mut rest = code;
        for _ in 0..d.q1 {
            f1.push((rest % d.a1 as u64) as usize);
            rest /= d.a1 as u64;
        }
        let mut total = Rational::zero();
        for q2 in 0..d.q2 {
            let best = (0..d.a2)
                .map(|a2| {
                    (0..d.q1).fold(Rational::zero(), |acc, q1| {
                        let r = game.payoff(q1, q2, f1[q1], a2);
                        if r.is_zero() {
                            acc
                        } else {
                            acc + game.pi(q1, q2) * r
                        }
                    })
                })
                .max()
                .expect("answer sets are nonempty");
            total += best;
        }
        total
    };
    Ok((0..firsts).into_par_iter().map(best_response).max().expect("at least one strategy"))
}
