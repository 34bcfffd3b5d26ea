//! Small named games and strategies used throughout the tests and the CLI.

use num_traits::Zero;

use crate::game::{Dims, Game, Strategy};
use crate::rational::{int, rat, Rational};

fn indicator(b: bool) -> Rational {
    int(b as i64)
}

fn uniform_pi(dims: Dims) -> impl Fn(usize, usize) -> Rational {
    let w = rat(1, dims.pairs() as i64);
    move |_, _| w.clone()
}

/// One question and one answer per player, always accepted.
pub fn trivial() -> Game {
    Game::from_fn(Dims::new(1, 1, 1, 1), |_, _| int(1), |_, _, _, _| int(1)).unwrap()
}

/// CHSH: uniform binary questions, accept iff `a1 xor a2 = q1 and q2`.
pub fn chsh() -> Game {
    let d = Dims::new(2, 2, 2, 2);
    Game::from_fn(d, uniform_pi(d), |q1, q2, a1, a2| indicator((a1 ^ a2) == (q1 & q2))).unwrap()
}

/// Question guessing: uniform binary questions, accept iff each player names the other's question.
pub fn guess() -> Game {
    let d = Dims::new(2, 2, 2, 2);
    Game::from_fn(d, uniform_pi(d), |q1, q2, a1, a2| indicator(a1 == q2 && a2 == q1)).unwrap()
}

/// Both players receive the same question from `n` choices and must answer equally.
/// Payoffs of question pairs that are never asked are zero.
pub fn equality(n: usize) -> Game {
    let d = Dims::new(n, n, n, n);
    let w = rat(1, n as i64);
    Game::from_fn(
        d,
        |q1, q2| if q1 == q2 { w.clone() } else { Rational::zero() },
        |q1, q2, a1, a2| indicator(q1 == q2 && a1 == a2),
    )
    .unwrap()
}

/// Every payoff is zero.
pub fn zero(dims: Dims) -> Game {
    Game::from_fn(dims, uniform_pi(dims), |_, _, _, _| Rational::zero()).unwrap()
}

/// The PR box: `a1 xor a2 = q1 and q2` with uniform marginals.
pub fn pr_box() -> Strategy {
    Strategy::from_fn(Dims::new(2, 2, 2, 2), |q1, q2, a1, a2| {
        if (a1 ^ a2) == (q1 & q2) {
            rat(1, 2)
        } else {
            Rational::zero()
        }
    })
    .unwrap()
}
