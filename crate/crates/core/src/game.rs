//! Two-player one-round games, strategies and the no-signaling conditions.
//!
//! A game is stored densely: the question distribution as an `n1 x n2` table
//! and the payoff as a row-major `(q1, q2, a1, a2)` table. All entries are
//! exact rationals.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};

use crate::rational::{fmt_rational, is_probability, Rational};
use crate::text::{with_header, ParseError};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GameError {
    #[error("question distribution sums to {0}, expected 1")]
    NonNormalizedDistribution(String),
    #[error("negative probability at question pair ({0}, {1})")]
    NegativeProbability(usize, usize),
    #[error("payoff at ({0}, {1}, {2}, {3}) is outside [0, 1]")]
    PayoffOutOfRange(usize, usize, usize, usize),
    #[error("every question has zero probability")]
    EmptyGame,
    #[error("question {player}:{question} has zero marginal probability")]
    ZeroMarginal { player: u8, question: usize },
    #[error("index ({0}) out of range for the declared dimensions")]
    IndexOutOfRange(String),
    #[error("dimensions must be positive")]
    EmptyDimension,
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("conditional distribution for question pair ({q1}, {q2}) sums to {sum}")]
    NotADistribution { q1: usize, q2: usize, sum: String },
    #[error("negative strategy entry at ({0}, {1}, {2}, {3})")]
    NegativeStrategyEntry(usize, usize, usize, usize),
}

/// Sizes of the four finite sets `Q1, Q2, A1, A2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Dims {
    pub q1: usize,
    pub q2: usize,
    pub a1: usize,
    pub a2: usize,
}

impl Dims {
    pub fn new(q1: usize, q2: usize, a1: usize, a2: usize) -> Self {
        Self { q1, q2, a1, a2 }
    }

    /// `|Q1| |Q2| |A1| |A2|`.
    pub fn size(&self) -> usize {
        self.q1 * self.q2 * self.a1 * self.a2
    }

    pub fn pairs(&self) -> usize {
        self.q1 * self.q2
    }

    #[inline]
    pub fn pair(&self, q1: usize, q2: usize) -> usize {
        q1 * self.q2 + q2
    }

    #[inline]
    pub fn index(&self, q1: usize, q2: usize, a1: usize, a2: usize) -> usize {
        ((q1 * self.q2 + q2) * self.a1 + a1) * self.a2 + a2
    }

    fn check_positive(&self) -> Result<(), GameError> {
        if self.q1 == 0 || self.q2 == 0 || self.a1 == 0 || self.a2 == 0 {
            return Err(GameError::EmptyDimension);
        }
        Ok(())
    }

    fn check_full(&self, q1: usize, q2: usize, a1: usize, a2: usize) -> Result<(), GameError> {
        if q1 >= self.q1 || q2 >= self.q2 || a1 >= self.a1 || a2 >= self.a2 {
            return Err(GameError::IndexOutOfRange(format!("{q1}, {q2}, {a1}, {a2}")));
        }
        Ok(())
    }
}

/// Unvalidated game tables as read from a file: sparse, omitted entries are zero.
#[derive(Debug, Clone, PartialEq)]
pub struct RawGame {
    pub dims: Dims,
    pub pi: BTreeMap<(usize, usize), Rational>,
    pub payoff: BTreeMap<(usize, usize, usize, usize), Rational>,
}

impl RawGame {
    pub fn new(dims: Dims) -> Self {
        Self { dims, pi: BTreeMap::new(), payoff: BTreeMap::new() }
    }

    pub fn from_game(game: &Game) -> Self {
        let d = game.dims();
        let mut raw = Self::new(d);
        for q1 in 0..d.q1 {
            for q2 in 0..d.q2 {
                let p = game.pi(q1, q2);
                if !p.is_zero() {
                    raw.pi.insert((q1, q2), p.clone());
                }
                for a1 in 0..d.a1 {
                    for a2 in 0..d.a2 {
                        let r = game.payoff(q1, q2, a1, a2);
                        if !r.is_zero() {
                            raw.payoff.insert((q1, q2, a1, a2), r.clone());
                        }
                    }
                }
            }
        }
        raw
    }
}

/// A validated game `(Q1, Q2, A1, A2, pi, R)` whose question marginals are all positive.
#[derive(Debug, Clone, PartialEq)]
pub struct Game {
    dims: Dims,
    pi: Vec<Rational>,
    payoff: Vec<Rational>,
    pi1: Vec<Rational>,
    pi2: Vec<Rational>,
}

impl Game {
    /// Builds a game from dense tables, rejecting zero-marginal questions.
    /// Use [`validate_game`] when pruning is wanted instead.
    pub fn from_dense(
        dims: Dims,
        pi: Vec<Rational>,
        payoff: Vec<Rational>,
    ) -> Result<Self, GameError> {
        dims.check_positive()?;
        if pi.len() != dims.pairs() || payoff.len() != dims.size() {
            return Err(GameError::DimensionMismatch(format!(
                "expected {} pi entries and {} payoff entries",
                dims.pairs(),
                dims.size()
            )));
        }
        check_tables(&dims, &pi, &payoff)?;
        let (pi1, pi2) = marginal_tables(&dims, &pi);
        if let Some(q) = pi1.iter().position(Zero::is_zero) {
            return Err(GameError::ZeroMarginal { player: 1, question: q });
        }
        if let Some(q) = pi2.iter().position(Zero::is_zero) {
            return Err(GameError::ZeroMarginal { player: 2, question: q });
        }
        Ok(Self { dims, pi, payoff, pi1, pi2 })
    }

    /// Builds a game from closures over the index space.
    pub fn from_fn(
        dims: Dims,
        pi: impl Fn(usize, usize) -> Rational,
        payoff: impl Fn(usize, usize, usize, usize) -> Rational,
    ) -> Result<Self, GameError> {
        let mut pis = Vec::with_capacity(dims.pairs());
        let mut rs = Vec::with_capacity(dims.size());
        for q1 in 0..dims.q1 {
            for q2 in 0..dims.q2 {
                pis.push(pi(q1, q2));
                for a1 in 0..dims.a1 {
                    for a2 in 0..dims.a2 {
                        rs.push(payoff(q1, q2, a1, a2));
                    }
                }
            }
        }
        Self::from_dense(dims, pis, rs)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn pi(&self, q1: usize, q2: usize) -> &Rational {
        &self.pi[self.dims.pair(q1, q2)]
    }

    pub fn payoff(&self, q1: usize, q2: usize, a1: usize, a2: usize) -> &Rational {
        &self.payoff[self.dims.index(q1, q2, a1, a2)]
    }

    pub fn pi1(&self) -> &[Rational] {
        &self.pi1
    }

    pub fn pi2(&self) -> &[Rational] {
        &self.pi2
    }

    /// Returns a copy of the game with every payoff multiplied by `alpha`.
    pub fn scale_payoff(&self, alpha: &Rational) -> Result<Self, GameError> {
        let payoff = self.payoff.iter().map(|r| r * alpha).collect();
        Self::from_dense(self.dims, self.pi.clone(), payoff)
    }

    /// Relabels questions and answers. `perm_q1[q]` is the new label of old question `q`.
    pub fn relabel(
        &self,
        perm_q1: &[usize],
        perm_q2: &[usize],
        perm_a1: &[usize],
        perm_a2: &[usize],
    ) -> Result<Self, GameError> {
        let d = self.dims;
        let mut pi = vec![Rational::zero(); d.pairs()];
        let mut payoff = vec![Rational::zero(); d.size()];
        for q1 in 0..d.q1 {
            for q2 in 0..d.q2 {
                pi[d.pair(perm_q1[q1], perm_q2[q2])] = self.pi(q1, q2).clone();
                for a1 in 0..d.a1 {
                    for a2 in 0..d.a2 {
                        payoff[d.index(perm_q1[q1], perm_q2[q2], perm_a1[a1], perm_a2[a2])] =
                            self.payoff(q1, q2, a1, a2).clone();
                    }
                }
            }
        }
        Self::from_dense(d, pi, payoff)
    }
}

fn check_tables(dims: &Dims, pi: &[Rational], payoff: &[Rational]) -> Result<(), GameError> {
    let mut total = Rational::zero();
    for q1 in 0..dims.q1 {
        for q2 in 0..dims.q2 {
            let p = &pi[dims.pair(q1, q2)];
            if p.is_negative() {
                return Err(GameError::NegativeProbability(q1, q2));
            }
            total += p;
        }
    }
    if !total.is_one() {
        return Err(GameError::NonNormalizedDistribution(fmt_rational(&total)));
    }
    for q1 in 0..dims.q1 {
        for q2 in 0..dims.q2 {
            for a1 in 0..dims.a1 {
                for a2 in 0..dims.a2 {
                    if !is_probability(&payoff[dims.index(q1, q2, a1, a2)]) {
                        return Err(GameError::PayoffOutOfRange(q1, q2, a1, a2));
                    }
                }
            }
        }
    }
    Ok(())
}

fn marginal_tables(dims: &Dims, pi: &[Rational]) -> (Vec<Rational>, Vec<Rational>) {
    let mut pi1 = vec![Rational::zero(); dims.q1];
    let mut pi2 = vec![Rational::zero(); dims.q2];
    for q1 in 0..dims.q1 {
        for q2 in 0..dims.q2 {
            let p = &pi[dims.pair(q1, q2)];
            pi1[q1] += p;
            pi2[q2] += p;
        }
    }
    (pi1, pi2)
}

/// Index map from a pruned game back to the original question labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pruning {
    pub original: Dims,
    /// `q1_origin[new] = old`.
    pub q1_origin: Vec<usize>,
    pub q2_origin: Vec<usize>,
}

impl Pruning {
    pub fn is_identity(&self) -> bool {
        self.q1_origin.len() == self.original.q1 && self.q2_origin.len() == self.original.q2
    }

    /// Extends a strategy on the pruned game to the original question sets.
    ///
    /// Removed questions answer `0` deterministically and are coupled with the
    /// other player's marginal, which keeps the lifted strategy no-signaling.
    pub fn lift_strategy(&self, strategy: &Strategy) -> Strategy {
        let od = self.original;
        let pd = strategy.dims();
        let mut new1 = vec![None; od.q1];
        for (n, &o) in self.q1_origin.iter().enumerate() {
            new1[o] = Some(n);
        }
        let mut new2 = vec![None; od.q2];
        for (n, &o) in self.q2_origin.iter().enumerate() {
            new2[o] = Some(n);
        }
        let point = |a: usize| if a == 0 { Rational::one() } else { Rational::zero() };
        let mut p = vec![Rational::zero(); od.size()];
        for q1 in 0..od.q1 {
            for q2 in 0..od.q2 {
                for a1 in 0..od.a1 {
                    for a2 in 0..od.a2 {
                        p[od.index(q1, q2, a1, a2)] = match (new1[q1], new2[q2]) {
                            (Some(n1), Some(n2)) => strategy.p(n1, n2, a1, a2).clone(),
                            (Some(n1), None) => {
                                strategy.marginal1(n1, 0, a1) * point(a2)
                            }
                            (None, Some(n2)) => {
                                point(a1) * strategy.marginal2(0, n2, a2)
                            }
                            (None, None) => point(a1) * point(a2),
                        };
                    }
                }
            }
        }
        debug_assert_eq!(pd.a1, od.a1);
        Strategy { dims: od, p }
    }

    /// Restricts a strategy on the original question sets to the kept questions.
    pub fn restrict_strategy(&self, strategy: &Strategy) -> Result<Strategy, GameError> {
        if strategy.dims() != self.original {
            return Err(GameError::DimensionMismatch(format!(
                "game is {:?}, strategy is {:?}",
                self.original,
                strategy.dims()
            )));
        }
        let pd = Dims::new(self.q1_origin.len(), self.q2_origin.len(), self.original.a1, self.original.a2);
        Strategy::from_fn(pd, |q1, q2, a1, a2| {
            strategy.p(self.q1_origin[q1], self.q2_origin[q2], a1, a2).clone()
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Validated {
    pub game: Game,
    pub pruning: Pruning,
}

/// Validates raw tables and removes questions that are never asked.
pub fn validate_game(raw: &RawGame) -> Result<Validated, GameError> {
    let d = raw.dims;
    d.check_positive()?;
    let mut pi = vec![Rational::zero(); d.pairs()];
    for (&(q1, q2), v) in &raw.pi {
        d.check_full(q1, q2, 0, 0)?;
        pi[d.pair(q1, q2)] = v.clone();
    }
    let mut payoff = vec![Rational::zero(); d.size()];
    for (&(q1, q2, a1, a2), v) in &raw.payoff {
        d.check_full(q1, q2, a1, a2)?;
        payoff[d.index(q1, q2, a1, a2)] = v.clone();
    }
    check_tables(&d, &pi, &payoff)?;
    let (pi1, pi2) = marginal_tables(&d, &pi);
    let q1_origin: Vec<usize> = (0..d.q1).filter(|&q| !pi1[q].is_zero()).collect();
    let q2_origin: Vec<usize> = (0..d.q2).filter(|&q| !pi2[q].is_zero()).collect();
    if q1_origin.is_empty() || q2_origin.is_empty() {
        return Err(GameError::EmptyGame);
    }
    let pd = Dims::new(q1_origin.len(), q2_origin.len(), d.a1, d.a2);
    let game = Game::from_fn(
        pd,
        |q1, q2| pi[d.pair(q1_origin[q1], q2_origin[q2])].clone(),
        |q1, q2, a1, a2| payoff[d.index(q1_origin[q1], q2_origin[q2], a1, a2)].clone(),
    )?;
    Ok(Validated { game, pruning: Pruning { original: d, q1_origin, q2_origin } })
}

/// `(pi1, pi2)`: the question marginals of the referee's distribution.
pub fn marginals(game: &Game) -> (Vec<Rational>, Vec<Rational>) {
    (game.pi1.clone(), game.pi2.clone())
}

/// `|G| = |Q1| |Q2| |A1| |A2|`.
pub fn game_size(game: &Game) -> usize {
    game.dims.size()
}

/// A full family of conditional distributions `p(a1, a2 | q1, q2)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Strategy {
    dims: Dims,
    p: Vec<Rational>,
}

impl Strategy {
    pub fn new(dims: Dims, p: Vec<Rational>) -> Result<Self, GameError> {
        dims.check_positive()?;
        if p.len() != dims.size() {
            return Err(GameError::DimensionMismatch(format!(
                "expected {} strategy entries, found {}",
                dims.size(),
                p.len()
            )));
        }
        let s = Self { dims, p };
        s.check()?;
        Ok(s)
    }

    pub fn from_fn(
        dims: Dims,
        f: impl Fn(usize, usize, usize, usize) -> Rational,
    ) -> Result<Self, GameError> {
        let mut p = Vec::with_capacity(dims.size());
        for q1 in 0..dims.q1 {
            for q2 in 0..dims.q2 {
                for a1 in 0..dims.a1 {
                    for a2 in 0..dims.a2 {
                        p.push(f(q1, q2, a1, a2));
                    }
                }
            }
        }
        Self::new(dims, p)
    }

    /// The product strategy `p1(a1|q1) p2(a2|q2)`; rows of `p1` and `p2` must be distributions.
    pub fn product(
        dims: Dims,
        p1: &[Vec<Rational>],
        p2: &[Vec<Rational>],
    ) -> Result<Self, GameError> {
        Self::from_fn(dims, |q1, q2, a1, a2| &p1[q1][a1] * &p2[q2][a2])
    }

    fn check(&self) -> Result<(), GameError> {
        let d = self.dims;
        for q1 in 0..d.q1 {
            for q2 in 0..d.q2 {
                let mut sum = Rational::zero();
                for a1 in 0..d.a1 {
                    for a2 in 0..d.a2 {
                        let v = self.p(q1, q2, a1, a2);
                        if v.is_negative() {
                            return Err(GameError::NegativeStrategyEntry(q1, q2, a1, a2));
                        }
                        sum += v;
                    }
                }
                if !sum.is_one() {
                    return Err(GameError::NotADistribution { q1, q2, sum: fmt_rational(&sum) });
                }
            }
        }
        Ok(())
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn p(&self, q1: usize, q2: usize, a1: usize, a2: usize) -> &Rational {
        &self.p[self.dims.index(q1, q2, a1, a2)]
    }

    pub fn entries(&self) -> &[Rational] {
        &self.p
    }

    /// `sum_{a2} p(a1, a2 | q1, q2)`.
    pub fn marginal1(&self, q1: usize, q2: usize, a1: usize) -> Rational {
        (0..self.dims.a2).fold(Rational::zero(), |acc, a2| acc + self.p(q1, q2, a1, a2))
    }

    /// `sum_{a1} p(a1, a2 | q1, q2)`.
    pub fn marginal2(&self, q1: usize, q2: usize, a2: usize) -> Rational {
        (0..self.dims.a1).fold(Rational::zero(), |acc, a1| acc + self.p(q1, q2, a1, a2))
    }
}

/// Which player's marginal a signaling witness refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Player {
    One,
    Two,
}

/// `(direction, q, a, q_other, q_other')`: the marginal of `direction` at `(q, a)` differs
/// between the other player's questions `q_other` and `q_other'`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalingWitness {
    pub direction: Player,
    pub question: usize,
    pub answer: usize,
    pub other: usize,
    pub other_alt: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SignalingReport {
    pub is_no_signaling: bool,
    pub worst_violation: Rational,
    pub witness: Option<SignalingWitness>,
}

/// Measures the largest dependence of either player's marginal on the other player's question.
pub fn check_no_signaling(strategy: &Strategy, tolerance: &Rational) -> SignalingReport {
    let d = strategy.dims;
    let mut worst = Rational::zero();
    let mut witness = None;
    let mut consider = |values: Vec<Rational>, direction, question, answer| {
        let (mut lo, mut hi) = (0, 0);
        for (i, v) in values.iter().enumerate() {
            if *v < values[lo] {
                lo = i;
            }
            if *v > values[hi] {
                hi = i;
            }
        }
        let gap = &values[hi] - &values[lo];
        if gap > worst {
            worst = gap;
            witness = Some(SignalingWitness { direction, question, answer, other: hi, other_alt: lo });
        }
    };
    for q1 in 0..d.q1 {
        for a1 in 0..d.a1 {
            let values = (0..d.q2).map(|q2| strategy.marginal1(q1, q2, a1)).collect();
            consider(values, Player::One, q1, a1);
        }
    }
    for q2 in 0..d.q2 {
        for a2 in 0..d.a2 {
            let values = (0..d.q1).map(|q1| strategy.marginal2(q1, q2, a2)).collect();
            consider(values, Player::Two, q2, a2);
        }
    }
    SignalingReport { is_no_signaling: worst <= *tolerance, worst_violation: worst, witness }
}

/// `sum_{q1,q2} pi(q1,q2) sum_{a1,a2} R(a1,a2|q1,q2) p(a1,a2|q1,q2)`, summed in index order.
pub fn acceptance_probability(game: &Game, strategy: &Strategy) -> Result<Rational, GameError> {
    if game.dims != strategy.dims {
        return Err(GameError::DimensionMismatch(format!(
            "game is {:?}, strategy is {:?}",
            game.dims, strategy.dims
        )));
    }
    let d = game.dims;
    let mut total = Rational::zero();
    for q1 in 0..d.q1 {
        for q2 in 0..d.q2 {
            let pi = game.pi(q1, q2);
            if pi.is_zero() {
                continue;
            }
            let mut inner = Rational::zero();
            for a1 in 0..d.a1 {
                for a2 in 0..d.a2 {
                    let r = game.payoff(q1, q2, a1, a2);
                    if !r.is_zero() {
                        inner += r * strategy.p(q1, q2, a1, a2);
                    }
                }
            }
            total += pi * inner;
        }
    }
    Ok(total)
}

pub fn parse_game(text: &str) -> Result<RawGame, ParseError> {
    let mut lines = with_header(text, "NSGAME", "1")?;
    let dims = parse_dims(&mut lines)?;
    let mut raw = RawGame::new(dims);
    let mut section = None;
    for line in lines {
        match line.keyword() {
            "pi" if line.tokens.len() == 1 => section = Some("pi"),
            "R" if line.tokens.len() == 1 => section = Some("R"),
            _ => match section {
                Some("pi") => {
                    line.expect_len(3)?;
                    let (q1, q2) = (line.usize_at(0)?, line.usize_at(1)?);
                    if q1 >= dims.q1 || q2 >= dims.q2 {
                        return Err(line.err("question index out of range"));
                    }
                    if raw.pi.insert((q1, q2), line.rational_at(2)?).is_some() {
                        return Err(line.err("duplicate pi entry"));
                    }
                }
                Some(_) => {
                    line.expect_len(5)?;
                    let key = (
                        line.usize_at(0)?,
                        line.usize_at(1)?,
                        line.usize_at(2)?,
                        line.usize_at(3)?,
                    );
                    if key.0 >= dims.q1 || key.1 >= dims.q2 || key.2 >= dims.a1 || key.3 >= dims.a2
                    {
                        return Err(line.err("index out of range"));
                    }
                    if raw.payoff.insert(key, line.rational_at(4)?).is_some() {
                        return Err(line.err("duplicate R entry"));
                    }
                }
                None => return Err(line.err("expected `pi` or `R` section")),
            },
        }
    }
    Ok(raw)
}

fn parse_dims<'a>(
    lines: &mut std::iter::Peekable<impl Iterator<Item = crate::text::Line<'a>>>,
) -> Result<Dims, ParseError> {
    let mut get = |keyword: &str| -> Result<(usize, usize), ParseError> {
        let line = lines
            .next()
            .ok_or_else(|| ParseError::new(0, format!("missing `{keyword}` line")))?;
        if line.keyword() != keyword {
            return Err(line.err(format!("expected `{keyword}`")));
        }
        line.expect_len(3)?;
        let (a, b) = (line.usize_at(1)?, line.usize_at(2)?);
        if a == 0 || b == 0 {
            return Err(line.err("sizes must be positive"));
        }
        Ok((a, b))
    };
    let (q1, q2) = get("questions")?;
    let (a1, a2) = get("answers")?;
    Ok(Dims::new(q1, q2, a1, a2))
}

pub fn write_game(game: &Game) -> String {
    let d = game.dims;
    let mut out = format!("NSGAME 1\nquestions {} {}\nanswers {} {}\npi\n", d.q1, d.q2, d.a1, d.a2);
    for q1 in 0..d.q1 {
        for q2 in 0..d.q2 {
            let p = game.pi(q1, q2);
            if !p.is_zero() {
                let _ = writeln!(out, "{q1} {q2} {}", fmt_rational(p));
            }
        }
    }
    out.push_str("R\n");
    for q1 in 0..d.q1 {
        for q2 in 0..d.q2 {
            for a1 in 0..d.a1 {
                for a2 in 0..d.a2 {
                    let r = game.payoff(q1, q2, a1, a2);
                    if !r.is_zero() {
                        let _ = writeln!(out, "{q1} {q2} {a1} {a2} {}", fmt_rational(r));
                    }
                }
            }
        }
    }
    out
}

/// Parses an `NSSTRAT 1` file. Omitted entries are zero.
pub fn parse_strategy(text: &str) -> Result<Strategy, ParseError> {
    let mut lines = with_header(text, "NSSTRAT", "1")?;
    let dims = parse_dims(&mut lines)?;
    let mut p = vec![Rational::zero(); dims.size()];
    let mut seen = vec![false; dims.size()];
    let mut last_line = 0;
    for line in lines {
        line.expect_len(5)?;
        let (q1, q2, a1, a2) =
            (line.usize_at(0)?, line.usize_at(1)?, line.usize_at(2)?, line.usize_at(3)?);
        if q1 >= dims.q1 || q2 >= dims.q2 || a1 >= dims.a1 || a2 >= dims.a2 {
            return Err(line.err("index out of range"));
        }
        let i = dims.index(q1, q2, a1, a2);
        if std::mem::replace(&mut seen[i], true) {
            return Err(line.err("duplicate entry"));
        }
        p[i] = line.rational_at(4)?;
        last_line = line.number;
    }
    Strategy::new(dims, p).map_err(|e| ParseError::new(last_line, e.to_string()))
}

pub fn write_strategy(strategy: &Strategy) -> String {
    let d = strategy.dims;
    let mut out = format!("NSSTRAT 1\nquestions {} {}\nanswers {} {}\n", d.q1, d.q2, d.a1, d.a2);
    for q1 in 0..d.q1 {
        for q2 in 0..d.q2 {
            for a1 in 0..d.a1 {
                for a2 in 0..d.a2 {
                    let v = strategy.p(q1, q2, a1, a2);
                    if !v.is_zero() {
                        let _ = writeln!(out, "{q1} {q2} {a1} {a2} {}", fmt_rational(v));
                    }
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;
    use crate::rational::{int, rat};

    fn uniform(dims: Dims) -> Strategy {
        let w = rat(1, (dims.a1 * dims.a2) as i64);
        Strategy::from_fn(dims, |_, _, _, _| w.clone()).unwrap()
    }

    #[test]
    fn trivial_game_validates_unchanged() {
        let g = games::trivial();
        let v = validate_game(&RawGame::from_game(&g)).unwrap();
        assert_eq!(v.game, g);
        assert!(v.pruning.is_identity());
    }

    #[test]
    fn chsh_validates_without_pruning() {
        let g = games::chsh();
        let v = validate_game(&RawGame::from_game(&g)).unwrap();
        assert_eq!(v.game, g);
        assert!(v.pruning.is_identity());
    }

    #[test]
    fn zero_marginal_question_is_pruned() {
        let g = games::chsh();
        let mut raw = RawGame::from_game(&g);
        raw.dims.q1 = 3;
        raw.payoff.insert((2, 0, 1, 1), int(1));
        let v = validate_game(&raw).unwrap();
        assert_eq!(v.game.dims().q1, 2);
        assert_eq!(v.game, g);
        assert_eq!(v.pruning.q1_origin, vec![0, 1]);
        assert!(!v.pruning.is_identity());
    }

    #[test]
    fn validation_errors() {
        let mut raw = RawGame::new(Dims::new(1, 1, 1, 1));
        raw.pi.insert((0, 0), rat(1, 2));
        assert!(matches!(validate_game(&raw), Err(GameError::NonNormalizedDistribution(_))));
        raw.pi.insert((0, 0), int(1));
        raw.payoff.insert((0, 0, 0, 0), rat(3, 2));
        assert!(matches!(validate_game(&raw), Err(GameError::PayoffOutOfRange(0, 0, 0, 0))));
        let empty = RawGame::new(Dims::new(2, 2, 1, 1));
        assert!(matches!(
            validate_game(&empty),
            Err(GameError::NonNormalizedDistribution(_))
        ));
    }

    #[test]
    fn marginals_of_named_games() {
        let (p1, p2) = marginals(&games::chsh());
        assert_eq!(p1, vec![rat(1, 2), rat(1, 2)]);
        assert_eq!(p2, vec![rat(1, 2), rat(1, 2)]);
        let (p1, p2) = marginals(&games::trivial());
        assert_eq!((p1, p2), (vec![int(1)], vec![int(1)]));
    }

    #[test]
    fn concentrated_marginal_before_pruning() {
        let mut raw = RawGame::new(Dims::new(3, 2, 1, 1));
        raw.pi.insert((0, 1), int(1));
        let v = validate_game(&raw).unwrap();
        assert_eq!(marginals(&v.game), (vec![int(1)], vec![int(1)]));
        assert_eq!(v.pruning.q1_origin, vec![0]);
        assert_eq!(v.pruning.q2_origin, vec![1]);
    }

    #[test]
    fn acceptance_of_named_strategies() {
        let triv = games::trivial();
        let only = Strategy::from_fn(triv.dims(), |_, _, _, _| int(1)).unwrap();
        assert_eq!(acceptance_probability(&triv, &only).unwrap(), int(1));
        let chsh = games::chsh();
        assert_eq!(acceptance_probability(&chsh, &uniform(chsh.dims())).unwrap(), rat(1, 2));
        assert_eq!(acceptance_probability(&chsh, &games::pr_box()).unwrap(), int(1));
        assert!(matches!(
            acceptance_probability(&triv, &games::pr_box()),
            Err(GameError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn signaling_reports() {
        let d = Dims::new(2, 2, 2, 2);
        let p1 = vec![vec![rat(1, 3), rat(2, 3)], vec![int(1), int(0)]];
        let p2 = vec![vec![rat(1, 2), rat(1, 2)], vec![rat(1, 5), rat(4, 5)]];
        let product = Strategy::product(d, &p1, &p2).unwrap();
        let report = check_no_signaling(&product, &int(0));
        assert!(report.is_no_signaling);
        assert_eq!(report.worst_violation, int(0));
        assert!(report.witness.is_none());

        let signaling =
            Strategy::from_fn(d, |_, q2, a1, a2| int((a1 == q2 && a2 == 0) as i64)).unwrap();
        let report = check_no_signaling(&signaling, &int(0));
        assert!(!report.is_no_signaling);
        assert_eq!(report.worst_violation, int(1));
        let w = report.witness.unwrap();
        assert_eq!(w.direction, Player::One);
        assert_ne!(w.other, w.other_alt);

        let report = check_no_signaling(&games::pr_box(), &int(0));
        assert!(report.is_no_signaling);
        assert_eq!(report.worst_violation, int(0));

        let loose = check_no_signaling(&signaling, &int(1));
        assert!(loose.is_no_signaling);
    }

    #[test]
    fn sizes() {
        assert_eq!(game_size(&games::trivial()), 1);
        assert_eq!(game_size(&games::chsh()), 16);
        let g = Game::from_fn(Dims::new(3, 2, 4, 5), |_, _| rat(1, 6), |_, _, _, _| int(0)).unwrap();
        assert_eq!(game_size(&g), 120);
    }

    #[test]
    fn strategy_rejects_bad_rows() {
        let d = Dims::new(1, 1, 2, 1);
        assert!(matches!(
            Strategy::new(d, vec![rat(1, 2), rat(1, 3)]),
            Err(GameError::NotADistribution { .. })
        ));
        assert!(matches!(
            Strategy::new(d, vec![int(2), int(-1)]),
            Err(GameError::NegativeStrategyEntry(0, 0, 1, 0))
        ));
    }

    #[test]
    fn lifted_strategy_stays_no_signaling() {
        let mut raw = RawGame::from_game(&games::chsh());
        raw.dims = Dims::new(3, 3, 2, 2);
        let v = validate_game(&raw).unwrap();
        let lifted = v.pruning.lift_strategy(&games::pr_box());
        assert_eq!(lifted.dims(), raw.dims);
        assert!(check_no_signaling(&lifted, &int(0)).is_no_signaling);
        let original = validate_game(&raw).unwrap();
        assert_eq!(original.game.dims(), Dims::new(2, 2, 2, 2));
    }

    #[test]
    fn game_text_round_trip() {
        let g = games::chsh();
        let text = write_game(&g);
        let back = validate_game(&parse_game(&text).unwrap()).unwrap().game;
        assert_eq!(back, g);
        let s = games::pr_box();
        assert_eq!(parse_strategy(&write_strategy(&s)).unwrap(), s);
    }

    #[test]
    fn game_parse_errors_carry_line_numbers() {
        let err = parse_game("NSGAME 1\nquestions 1 1\nanswers 1 1\npi\n0 0 1\nR\n0 0 0 x\n")
            .unwrap_err();
        assert_eq!(err.line, 7);
        let err = parse_game("NSGAME 2\n").unwrap_err();
        assert_eq!(err.line, 1);
        let err = parse_game("NSGAME 1\nquestions 1 1\nanswers 1 1\npi\n0 0 1\n0 0 1\n")
            .unwrap_err();
        assert_eq!(err.line, 6);
        let err =
            parse_game("NSGAME 1\nquestions 1 1\nanswers 1 1\n# comment\npi\n3 0 1\n").unwrap_err();
        assert_eq!(err.line, 6);
    }

    #[test]
    fn game_parse_accepts_decimals_and_comments() {
        let text = "NSGAME 1\nquestions 1 2\nanswers 1 1\npi\n0 0 0.25 # a\n0 1 3/4\nR\n0 1 0 0 0.5\n";
        let g = validate_game(&parse_game(text).unwrap()).unwrap().game;
        assert_eq!(*g.pi(0, 0), rat(1, 4));
        assert_eq!(*g.payoff(0, 1, 0, 0), rat(1, 2));
    }
}
