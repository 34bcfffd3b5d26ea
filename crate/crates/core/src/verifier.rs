//! Compiles an explicit two-prover one-round verifier into the game it induces.
//!
//! The verifier flips `l` coins `r`, sends `question_map[r]` to the provers and
//! accepts answers `(a1, a2)` iff `(r, a1, a2)` is in the accept table. The
//! induced game has `pi(q1, q2) = #{r -> (q1, q2)} / 2^l` and `R` equal to the
//! accepting fraction of those `r`.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::game::{validate_game, Dims, Game, GameError, RawGame};
use crate::rational::Rational;
use crate::text::{with_header, ParseError};

pub const DEFAULT_MAX_RANDOMNESS_BITS: u32 = 24;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum VerifierError {
    #[error("2^{bits} random strings exceed the enumeration guard of 2^{guard}")]
    EnumerationTooLarge { bits: u32, guard: u32 },
    #[error("incomplete verifier: {0}")]
    IncompleteSpec(String),
    #[error(transparent)]
    Game(#[from] GameError),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifierSpec {
    pub randomness_bits: u32,
    pub answers: (usize, usize),
    /// Indexed by `r`; `None` marks a missing entry.
    pub question_map: Vec<Option<(usize, usize)>>,
    /// Accepting triples `(r, a1, a2)`; everything else rejects.
    pub accept: BTreeSet<(u64, usize, usize)>,
}

impl VerifierSpec {
    pub fn new(randomness_bits: u32, answers: (usize, usize)) -> Self {
        let n = if randomness_bits <= DEFAULT_MAX_RANDOMNESS_BITS { 1 << randomness_bits } else { 0 };
        Self { randomness_bits, answers, question_map: vec![None; n], accept: BTreeSet::new() }
    }

    fn set_map(&mut self, r: u64, q: (usize, usize)) {
        let r = r as usize;
        if self.question_map.len() <= r {
            self.question_map.resize(r + 1, None);
        }
        self.question_map[r] = Some(q);
    }
}

pub fn compile_game(spec: &VerifierSpec) -> Result<Game, VerifierError> {
    compile_game_with_guard(spec, DEFAULT_MAX_RANDOMNESS_BITS)
}

pub fn compile_game_with_guard(spec: &VerifierSpec, guard: u32) -> Result<Game, VerifierError> {
    let bits = spec.randomness_bits;
    if bits > guard || bits >= 63 {
        return Err(VerifierError::EnumerationTooLarge { bits, guard });
    }
    let total = 1usize << bits;
    let (m1, m2) = spec.answers;
    if m1 == 0 || m2 == 0 {
        return Err(VerifierError::IncompleteSpec("answer alphabets must be nonempty".into()));
    }
    if spec.question_map.len() != total {
        return Err(VerifierError::IncompleteSpec(format!(
            "question map has {} entries, expected {total}",
            spec.question_map.len()
        )));
    }
    let mut questions = Vec::with_capacity(total);
    for (r, q) in spec.question_map.iter().enumerate() {
        questions.push(q.ok_or_else(|| {
            VerifierError::IncompleteSpec(format!("no question pair for r = {r}"))
        })?);
    }
    let n1 = questions.iter().map(|q| q.0).max().unwrap_or(0) + 1;
    let n2 = questions.iter().map(|q| q.1).max().unwrap_or(0) + 1;
    let dims = Dims::new(n1, n2, m1, m2);

    let mut hits = vec![0u64; dims.pairs()];
    for &(q1, q2) in &questions {
        hits[dims.pair(q1, q2)] += 1;
    }
    let mut accepted = vec![0u64; dims.size()];
    for &(r, a1, a2) in &spec.accept {
        if r as usize >= total || a1 >= m1 || a2 >= m2 {
            return Err(VerifierError::IncompleteSpec(format!(
                "accept entry ({r}, {a1}, {a2}) is out of range"
            )));
        }
        let (q1, q2) = questions[r as usize];
        accepted[dims.index(q1, q2, a1, a2)] += 1;
    }

    let mut raw = RawGame::new(dims);
    let denom = BigInt::from(total as u64);
    for q1 in 0..n1 {
        for q2 in 0..n2 {
            let count = hits[dims.pair(q1, q2)];
            if count == 0 {
                continue;
            }
            raw.pi.insert((q1, q2), Rational::new(BigInt::from(count), denom.clone()));
            for a1 in 0..m1 {
                for a2 in 0..m2 {
                    let acc = accepted[dims.index(q1, q2, a1, a2)];
                    let r = Rational::new(BigInt::from(acc), BigInt::from(count));
                    if !r.is_zero() {
                        raw.payoff.insert((q1, q2, a1, a2), r);
                    }
                }
            }
        }
    }
    Ok(validate_game(&raw)?.game)
}

pub fn parse_verifier(text: &str) -> Result<VerifierSpec, ParseError> {
    let mut lines = with_header(text, "NSVERIFIER", "1")?;
    let line = lines.next().ok_or_else(|| ParseError::new(0, "missing `randbits` line"))?;
    if line.keyword() != "randbits" {
        return Err(line.err("expected `randbits <l>`"));
    }
    line.expect_len(2)?;
    let bits: u32 = line.tokens[1].parse().map_err(|_| line.err("invalid randbits"))?;
    if bits >= 63 {
        return Err(line.err("randbits too large"));
    }
    let line = lines.next().ok_or_else(|| ParseError::new(0, "missing `answers` line"))?;
    if line.keyword() != "answers" {
        return Err(line.err("expected `answers <m1> <m2>`"));
    }
    line.expect_len(3)?;
    let answers = (line.usize_at(1)?, line.usize_at(2)?);
    let mut spec = VerifierSpec { randomness_bits: bits, answers, question_map: Vec::new(), accept: BTreeSet::new() };
    let limit = 1u64 << bits;
    for line in lines {
        let r: u64 = line
            .tokens
            .get(1)
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| line.err("expected a random string index"))?;
        if r >= limit {
            return Err(line.err(format!("r = {r} is not below 2^{bits}")));
        }
        match line.keyword() {
            "map" => {
                line.expect_len(4)?;
                if spec.question_map.get(r as usize).is_some_and(Option::is_some) {
                    return Err(line.err("duplicate map entry"));
                }
                spec.set_map(r, (line.usize_at(2)?, line.usize_at(3)?));
            }
            "acc" => {
                line.expect_len(4)?;
                if !spec.accept.insert((r, line.usize_at(2)?, line.usize_at(3)?)) {
                    return Err(line.err("duplicate acc entry"));
                }
            }
            other => return Err(line.err(format!("unknown directive `{other}`"))),
        }
    }
    let total = limit as usize;
    if spec.question_map.len() < total && total <= 1 << DEFAULT_MAX_RANDOMNESS_BITS {
        spec.question_map.resize(total, None);
    }
    Ok(spec)
}

pub fn write_verifier(spec: &VerifierSpec) -> String {
    let mut out = format!(
        "NSVERIFIER 1\nrandbits {}\nanswers {} {}\n",
        spec.randomness_bits, spec.answers.0, spec.answers.1
    );
    for (r, q) in spec.question_map.iter().enumerate() {
        if let Some((q1, q2)) = q {
            let _ = writeln!(out, "map {r} {q1} {q2}");
        }
    }
    for (r, a1, a2) in &spec.accept {
        let _ = writeln!(out, "acc {r} {a1} {a2}");
    }
    out
}

/// Builds a spec from closures over `r`.
pub fn from_fn(
    randomness_bits: u32,
    answers: (usize, usize),
    questions: impl Fn(u64) -> (usize, usize),
    predicate: impl Fn(u64, usize, usize) -> bool,
) -> VerifierSpec {
    let mut spec = VerifierSpec::new(randomness_bits, answers);
    for r in 0..(1u64 << randomness_bits) {
        spec.set_map(r, questions(r));
        for a1 in 0..answers.0 {
            for a2 in 0..answers.1 {
                if predicate(r, a1, a2) {
                    spec.accept.insert((r, a1, a2));
                }
            }
        }
    }
    spec
}

/// Two coins `r = r1 r2` become the questions; accept iff `a1 xor a2 = r1 and r2`.
pub fn chsh_verifier() -> VerifierSpec {
    from_fn(
        2,
        (2, 2),
        |r| (((r >> 1) & 1) as usize, (r & 1) as usize),
        |r, a1, a2| (a1 ^ a2) as u64 == ((r >> 1) & r & 1),
    )
}

/// Two coins become the questions; accept iff each prover names the other's question.
pub fn guess_verifier() -> VerifierSpec {
    from_fn(
        2,
        (2, 2),
        |r| (((r >> 1) & 1) as usize, (r & 1) as usize),
        |r, a1, a2| a1 as u64 == (r & 1) && a2 as u64 == ((r >> 1) & 1),
    )
}

/// Both provers receive the same `bits`-bit question and must answer equally.
pub fn equality_verifier(bits: u32) -> VerifierSpec {
    let n = 1usize << bits;
    from_fn(bits, (n, n), |r| (r as usize, r as usize), |_, a1, a2| a1 == a2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::games;
    use crate::rational::{int, rat};

    #[test]
    fn zero_bits_gives_trivial_game() {
        let spec = from_fn(0, (1, 1), |_| (0, 0), |_, _, _| true);
        assert_eq!(compile_game(&spec).unwrap(), games::trivial());
    }

    #[test]
    fn one_bit_equality() {
        let spec = from_fn(1, (2, 2), |r| (r as usize, r as usize), |_, a1, a2| a1 == a2);
        let g = compile_game(&spec).unwrap();
        assert_eq!(g.dims(), Dims::new(2, 2, 2, 2));
        assert_eq!(*g.pi(0, 0), rat(1, 2));
        assert_eq!(*g.pi(1, 1), rat(1, 2));
        assert_eq!(*g.pi(0, 1), int(0));
        for q in 0..2 {
            for a1 in 0..2 {
                for a2 in 0..2 {
                    assert_eq!(*g.payoff(q, q, a1, a2), int((a1 == a2) as i64));
                }
            }
        }
        assert_eq!(g, games::equality(2));
    }

    #[test]
    fn chsh_spec_compiles_to_chsh() {
        assert_eq!(compile_game(&chsh_verifier()).unwrap(), games::chsh());
        assert_eq!(compile_game(&guess_verifier()).unwrap(), games::guess());
    }

    #[test]
    fn guard_and_incomplete_errors() {
        let spec = equality_verifier(3);
        assert!(matches!(
            compile_game_with_guard(&spec, 2),
            Err(VerifierError::EnumerationTooLarge { bits: 3, guard: 2 })
        ));
        let mut holes = chsh_verifier();
        holes.question_map[2] = None;
        assert!(matches!(compile_game(&holes), Err(VerifierError::IncompleteSpec(_))));
    }

    #[test]
    fn repeated_questions_give_fractional_payoff() {
        // Three of four coin outcomes ask (0, 0); only r = 0 accepts.
        let spec = from_fn(2, (1, 1), |r| if r == 3 { (1, 1) } else { (0, 0) }, |r, _, _| r == 0 || r == 3);
        let g = compile_game(&spec).unwrap();
        assert_eq!(*g.pi(0, 0), rat(3, 4));
        assert_eq!(*g.pi(1, 1), rat(1, 4));
        assert_eq!(*g.payoff(0, 0, 0, 0), rat(1, 3));
        assert_eq!(*g.payoff(1, 1, 0, 0), int(1));
    }

    #[test]
    fn text_round_trip_and_errors() {
        let spec = chsh_verifier();
        let text = write_verifier(&spec);
        assert_eq!(parse_verifier(&text).unwrap(), spec);
        let err = parse_verifier("NSVERIFIER 1\nrandbits 1\nanswers 2 2\nmap 2 0 0\n").unwrap_err();
        assert_eq!(err.line, 4);
        let partial = parse_verifier("NSVERIFIER 1\nrandbits 1\nanswers 2 2\nmap 0 0 0\n").unwrap();
        assert!(matches!(compile_game(&partial), Err(VerifierError::IncompleteSpec(_))));
    }
}
