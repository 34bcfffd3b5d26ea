//! Mixed packing and covering: find `x >= 0` with `A x <= b` and `C x >= d`,
//! all data nonnegative. An `r`-approximate solution relaxes packing to `A x <= r b`.

mod solver;

use std::collections::BTreeMap;
use std::fmt::Write as _;

use num_traits::{Signed, Zero};

use crate::rational::{fmt_rational, Rational};
use crate::text::{with_header, ParseError};

pub use solver::{
    certifies_infeasible, solve_mpc, solve_mpc_with, InfeasibilityCertificate, MpcOutcome,
    OutcomeKind, SolveMethod, SolverConfig,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum MpcError {
    #[error("epsilon must lie in (0, 1), got {0}")]
    InvalidEpsilon(String),
    #[error("negative entry in {0}")]
    NegativeEntry(String),
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
    #[error("solver made no decision after {rounds} rounds")]
    Inconclusive { rounds: usize },
}

pub type SparseRow = Vec<(usize, Rational)>;

#[derive(Debug, Clone, PartialEq)]
pub struct MpcInstance {
    num_vars: usize,
    packing: Vec<SparseRow>,
    b: Vec<Rational>,
    covering: Vec<SparseRow>,
    d: Vec<Rational>,
    var_names: Vec<String>,
}

impl MpcInstance {
    pub fn new(
        num_vars: usize,
        packing: Vec<SparseRow>,
        b: Vec<Rational>,
        covering: Vec<SparseRow>,
        d: Vec<Rational>,
    ) -> Result<Self, MpcError> {
        if packing.len() != b.len() || covering.len() != d.len() {
            return Err(MpcError::DimensionMismatch(format!(
                "A has {} rows and b {}, C has {} rows and d {}",
                packing.len(),
                b.len(),
                covering.len(),
                d.len()
            )));
        }
        let clean = |rows: Vec<SparseRow>, what: &str| -> Result<Vec<SparseRow>, MpcError> {
            rows.into_iter()
                .enumerate()
                .map(|(i, mut row)| {
                    row.sort_by_key(|e| e.0);
                    let mut merged: SparseRow = Vec::with_capacity(row.len());
                    for (j, v) in row {
                        if j >= num_vars {
                            return Err(MpcError::DimensionMismatch(format!(
                                "{what} row {i} references column {j} of {num_vars}"
                            )));
                        }
                        if v.is_negative() {
                            return Err(MpcError::NegativeEntry(format!("{what}[{i}, {j}]")));
                        }
                        match merged.last_mut() {
                            Some((k, acc)) if *k == j => *acc += v,
                            _ => merged.push((j, v)),
                        }
                    }
                    merged.retain(|(_, v)| !v.is_zero());
                    Ok(merged)
                })
                .collect()
        };
        let packing = clean(packing, "A")?;
        let covering = clean(covering, "C")?;
        if let Some(i) = b.iter().position(Signed::is_negative) {
            return Err(MpcError::NegativeEntry(format!("b[{i}]")));
        }
        if let Some(i) = d.iter().position(Signed::is_negative) {
            return Err(MpcError::NegativeEntry(format!("d[{i}]")));
        }
        Ok(Self { num_vars, packing, b, covering, d, var_names: Vec::new() })
    }

    pub fn with_names(mut self, names: Vec<String>) -> Self {
        debug_assert_eq!(names.len(), self.num_vars);
        self.var_names = names;
        self
    }

    pub fn num_vars(&self) -> usize {
        self.num_vars
    }

    pub fn packing_rows(&self) -> usize {
        self.packing.len()
    }

    pub fn covering_rows(&self) -> usize {
        self.covering.len()
    }

    pub fn packing(&self) -> &[SparseRow] {
        &self.packing
    }

    pub fn covering(&self) -> &[SparseRow] {
        &self.covering
    }

    pub fn b(&self) -> &[Rational] {
        &self.b
    }

    pub fn d(&self) -> &[Rational] {
        &self.d
    }

    pub fn var_names(&self) -> &[String] {
        &self.var_names
    }

    pub fn nonzeros(&self) -> usize {
        self.packing.iter().chain(&self.covering).map(Vec::len).sum()
    }

    /// Scales every packing right-hand side by `factor`.
    pub fn scale_b(&self, factor: &Rational) -> Self {
        let mut out = self.clone();
        for v in &mut out.b {
            *v *= factor;
        }
        out
    }
}

fn dot(row: &SparseRow, x: &[Rational]) -> Rational {
    row.iter().fold(Rational::zero(), |acc, (j, v)| {
        if x[*j].is_zero() {
            acc
        } else {
            acc + v * &x[*j]
        }
    })
}

/// `x >= 0`, `A x <= r b` and `C x >= d`, all checked exactly.
pub fn verify_approx_solution(
    inst: &MpcInstance,
    x: &[Rational],
    r: &Rational,
) -> Result<bool, MpcError> {
    if x.len() != inst.num_vars {
        return Err(MpcError::DimensionMismatch(format!(
            "x has {} entries, instance has {} variables",
            x.len(),
            inst.num_vars
        )));
    }
    if x.iter().any(Signed::is_negative) {
        return Ok(false);
    }
    let packs = inst.packing.iter().zip(&inst.b).all(|(row, b)| dot(row, x) <= r * b);
    Ok(packs && inst.covering.iter().zip(&inst.d).all(|(row, d)| dot(row, x) >= *d))
}

/// Float convenience wrapper: the vector is converted exactly before checking.
pub fn verify_approx_solution_f64(
    inst: &MpcInstance,
    x: &[f64],
    r: &Rational,
) -> Result<bool, MpcError> {
    if x.iter().any(|v| !v.is_finite()) {
        return Ok(false);
    }
    let x: Vec<Rational> = x.iter().map(|&v| crate::rational::from_f64(v)).collect();
    verify_approx_solution(inst, &x, r)
}

/// Exact feasibility of the instance through the rational simplex.
pub fn exact_feasible_point(inst: &MpcInstance) -> Option<Vec<Rational>> {
    crate::simplex::find_feasible(&to_feasibility_lp(inst))
}

pub fn to_feasibility_lp(inst: &MpcInstance) -> crate::lp::LinearProgram {
    use crate::lp::{key, LinearProgram, Relation, Sense, Stage};
    let mut lp = LinearProgram::new(Sense::Minimize, Stage::Generic);
    for k in 0..inst.num_vars {
        let name = inst.var_names.get(k).cloned().unwrap_or_else(|| key("x", &[k]));
        lp.add_var(name, true).expect("names are unique");
    }
    for (i, (row, b)) in inst.packing.iter().zip(&inst.b).enumerate() {
        lp.add_constraint(key("pack", &[i]), row.clone(), Relation::Le, b.clone());
    }
    for (i, (row, d)) in inst.covering.iter().zip(&inst.d).enumerate() {
        lp.add_constraint(key("cover", &[i]), row.clone(), Relation::Ge, d.clone());
    }
    lp
}

pub fn parse_mpc(text: &str) -> Result<MpcInstance, ParseError> {
    let mut lines = with_header(text, "MPC", "1")?;
    let dims = lines.next().ok_or_else(|| ParseError::new(0, "missing `dims` line"))?;
    if dims.keyword() != "dims" {
        return Err(dims.err("expected `dims <M1> <M2> <N>`"));
    }
    dims.expect_len(4)?;
    let (m1, m2, n) = (dims.usize_at(1)?, dims.usize_at(2)?, dims.usize_at(3)?);
    let mut a: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    let mut c: BTreeMap<(usize, usize), Rational> = BTreeMap::new();
    let mut b = vec![None; m1];
    let mut d = vec![None; m2];
    for line in lines {
        let value_at = |i: usize| -> Result<Rational, ParseError> {
            let v = line.rational_at(i)?;
            if v.is_negative() {
                return Err(line.err("entries must be nonnegative"));
            }
            Ok(v)
        };
        match line.keyword() {
            kw @ ("A" | "C") => {
                line.expect_len(4)?;
                let (i, j) = (line.usize_at(1)?, line.usize_at(2)?);
                let rows = if kw == "A" { m1 } else { m2 };
                if i >= rows || j >= n {
                    return Err(line.err("index out of range"));
                }
                let map = if kw == "A" { &mut a } else { &mut c };
                if map.insert((i, j), value_at(3)?).is_some() {
                    return Err(line.err("duplicate entry"));
                }
            }
            kw @ ("b" | "d") => {
                line.expect_len(3)?;
                let i = line.usize_at(1)?;
                let vec = if kw == "b" { &mut b } else { &mut d };
                let slot = vec.get_mut(i).ok_or_else(|| line.err("index out of range"))?;
                if slot.replace(value_at(2)?).is_some() {
                    return Err(line.err("duplicate entry"));
                }
            }
            other => return Err(line.err(format!("unknown directive `{other}`"))),
        }
    }
    let mut packing = vec![Vec::new(); m1];
    for ((i, j), v) in a {
        packing[i].push((j, v));
    }
    let mut covering = vec![Vec::new(); m2];
    for ((i, j), v) in c {
        covering[i].push((j, v));
    }
    let b = b.into_iter().map(|v| v.unwrap_or_else(Rational::zero)).collect();
    let d = d.into_iter().map(|v| v.unwrap_or_else(Rational::zero)).collect();
    MpcInstance::new(n, packing, b, covering, d).map_err(|e| ParseError::new(0, e.to_string()))
}

pub fn write_mpc(inst: &MpcInstance) -> String {
    let mut out = format!("MPC 1\ndims {} {} {}\n", inst.packing.len(), inst.covering.len(), inst.num_vars);
    for (i, row) in inst.packing.iter().enumerate() {
        for (j, v) in row {
            let _ = writeln!(out, "A {i} {j} {}", fmt_rational(v));
        }
    }
    for (i, v) in inst.b.iter().enumerate() {
        if !v.is_zero() {
            let _ = writeln!(out, "b {i} {}", fmt_rational(v));
        }
    }
    for (i, row) in inst.covering.iter().enumerate() {
        for (j, v) in row {
            let _ = writeln!(out, "C {i} {j} {}", fmt_rational(v));
        }
    }
    for (i, v) in inst.d.iter().enumerate() {
        if !v.is_zero() {
            let _ = writeln!(out, "d {i} {}", fmt_rational(v));
        }
    }
    out
}

/// The `1 x 1` instance `a x <= b`, `c x >= d`.
pub fn scalar_instance(a: Rational, b: Rational, c: Rational, d: Rational) -> MpcInstance {
    MpcInstance::new(1, vec![vec![(0, a)]], vec![b], vec![vec![(0, c)]], vec![d])
        .expect("scalar instance with nonnegative data")
}

impl MpcInstance {
    /// `true` when `x = 0` already covers every row.
    pub fn trivially_feasible(&self) -> bool {
        self.d.iter().all(Zero::is_zero)
    }
}
