//! Generic sparse linear programs with exact rational data, plus the `dump-lp` text format.
//!
//! ```text
//! max
//! var p[0,0,0,0]
//! var z1[0] free
//! obj 1/2 p[0,0,0,0]
//! row <= 0/1 : 1/1 p[0,0,0,0] -1/1 p1[0,0]
//! ```

use std::collections::HashMap;
use std::fmt::{self, Write as _};

use num_traits::{Signed, Zero};

use crate::rational::{fmt_rational, Rational};
use crate::text::{lines, ParseError};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Maximize,
    Minimize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    Le,
    Eq,
    Ge,
}

impl Relation {
    pub fn flipped(self) -> Self {
        match self {
            Relation::Le => Relation::Ge,
            Relation::Eq => Relation::Eq,
            Relation::Ge => Relation::Le,
        }
    }

    pub fn holds(self, lhs: &Rational, rhs: &Rational) -> bool {
        match self {
            Relation::Le => lhs <= rhs,
            Relation::Eq => lhs == rhs,
            Relation::Ge => lhs >= rhs,
        }
    }
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::Le => "<=",
            Relation::Eq => "=",
            Relation::Ge => ">=",
        })
    }
}

/// Which program of the transformation chain an LP is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Primal,
    Relaxed,
    Scaled,
    Dual,
    Complemented,
    Generic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub nonneg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub coeffs: Vec<(usize, Rational)>,
    pub relation: Relation,
    pub rhs: Rational,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum LpError {
    #[error("duplicate variable `{0}`")]
    DuplicateVariable(String),
    #[error("unknown variable `{0}`")]
    UnknownVariable(String),
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub sense: Sense,
    pub stage: Stage,
    vars: Vec<Variable>,
    index: HashMap<String, usize>,
    pub objective: Vec<(usize, Rational)>,
    pub constraints: Vec<Constraint>,
}

/// `block[i,j,...]`, the naming scheme for variables and rows.
pub fn key(block: &str, ix: &[usize]) -> String {
    let mut s = String::with_capacity(block.len() + 4 * ix.len() + 2);
    s.push_str(block);
    s.push('[');
    for (n, i) in ix.iter().enumerate() {
        if n > 0 {
            s.push(',');
        }
        let _ = write!(s, "{i}");
    }
    s.push(']');
    s
}

/// Splits `block[i,j]` into `("block", "i,j")`.
pub fn split_key(name: &str) -> (&str, &str) {
    match name.split_once('[') {
        Some((block, rest)) => (block, rest.trim_end_matches(']')),
        None => (name, ""),
    }
}

impl LinearProgram {
    pub fn new(sense: Sense, stage: Stage) -> Self {
        Self {
            sense,
            stage,
            vars: Vec::new(),
            index: HashMap::new(),
            objective: Vec::new(),
            constraints: Vec::new(),
        }
    }

    pub fn add_var(&mut self, name: String, nonneg: bool) -> Result<usize, LpError> {
        if self.index.contains_key(&name) {
            return Err(LpError::DuplicateVariable(name));
        }
        let id = self.vars.len();
        self.index.insert(name.clone(), id);
        self.vars.push(Variable { name, nonneg });
        Ok(id)
    }

    pub fn vars(&self) -> &[Variable] {
        &self.vars
    }

    pub fn var_mut(&mut self, id: usize) -> &mut Variable {
        &mut self.vars[id]
    }

    pub fn var_id(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn var(&self, name: &str) -> Result<usize, LpError> {
        self.var_id(name).ok_or_else(|| LpError::UnknownVariable(name.to_string()))
    }

    /// Adds a row; zero coefficients are dropped and repeated variables merged.
    pub fn add_constraint(
        &mut self,
        name: String,
        coeffs: Vec<(usize, Rational)>,
        relation: Relation,
        rhs: Rational,
    ) {
        let coeffs = normalize_terms(coeffs);
        debug_assert!(coeffs.iter().all(|(j, _)| *j < self.vars.len()));
        self.constraints.push(Constraint { name, coeffs, relation, rhs });
    }

    pub fn set_objective(&mut self, terms: Vec<(usize, Rational)>) {
        self.objective = normalize_terms(terms);
    }

    pub fn num_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn num_constraints(&self) -> usize {
        self.constraints.len()
    }

    /// Number of rows whose name belongs to `family`.
    pub fn count_family(&self, family: &str) -> usize {
        self.constraints.iter().filter(|c| split_key(&c.name).0 == family).count()
    }

    pub fn objective_value(&self, x: &[Rational]) -> Rational {
        self.objective.iter().fold(Rational::zero(), |acc, (j, c)| acc + c * &x[*j])
    }

    pub fn row_value(&self, row: &Constraint, x: &[Rational]) -> Rational {
        row.coeffs.iter().fold(Rational::zero(), |acc, (j, c)| acc + c * &x[*j])
    }

    /// Returns the name of the first violated constraint or sign restriction, if any.
    pub fn first_violation(&self, x: &[Rational]) -> Option<String> {
        for (v, xv) in self.vars.iter().zip(x) {
            if v.nonneg && xv.is_negative() {
                return Some(format!("{} >= 0", v.name));
            }
        }
        self.constraints
            .iter()
            .find(|row| !row.relation.holds(&self.row_value(row, x), &row.rhs))
            .map(|row| row.name.clone())
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        x.len() == self.vars.len() && self.first_violation(x).is_none()
    }
}

fn normalize_terms(mut terms: Vec<(usize, Rational)>) -> Vec<(usize, Rational)> {
    terms.sort_by_key(|t| t.0);
    let mut out: Vec<(usize, Rational)> = Vec::with_capacity(terms.len());
    for (j, c) in terms {
        match out.last_mut() {
            Some((k, acc)) if *k == j => *acc += c,
            _ => out.push((j, c)),
        }
    }
    out.retain(|(_, c)| !c.is_zero());
    out
}

pub fn write_lp(lp: &LinearProgram) -> String {
    let mut out = String::new();
    out.push_str(match lp.sense {
        Sense::Maximize => "max\n",
        Sense::Minimize => "min\n",
    });
    for v in &lp.vars {
        if v.nonneg {
            let _ = writeln!(out, "var {}", v.name);
        } else {
            let _ = writeln!(out, "var {} free", v.name);
        }
    }
    out.push_str("obj");
    for (j, c) in &lp.objective {
        let _ = write!(out, " {} {}", fmt_rational(c), lp.vars[*j].name);
    }
    out.push('\n');
    for row in &lp.constraints {
        let _ = write!(out, "row {} {} :", row.relation, fmt_rational(&row.rhs));
        for (j, c) in &row.coeffs {
            let _ = write!(out, " {} {}", fmt_rational(c), lp.vars[*j].name);
        }
        out.push('\n');
    }
    out
}

pub fn parse_lp(text: &str) -> Result<LinearProgram, ParseError> {
    let mut it = lines(text);
    let first = it.next().ok_or_else(|| ParseError::new(1, "empty LP"))?;
    let sense = match first.tokens.as_slice() {
        ["max"] => Sense::Maximize,
        ["min"] => Sense::Minimize,
        _ => return Err(first.err("expected `min` or `max`")),
    };
    let mut lp = LinearProgram::new(sense, Stage::Generic);
    let terms = |lp: &LinearProgram,
                 line: &crate::text::Line<'_>,
                 from: usize|
     -> Result<Vec<(usize, Rational)>, ParseError> {
        let rest = &line.tokens[from..];
        if !rest.len().is_multiple_of(2) {
            return Err(line.err("expected `<coef> <var>` pairs"));
        }
        rest.chunks(2)
            .enumerate()
            .map(|(n, pair)| {
                let coef = line.rational_at(from + 2 * n)?;
                let id = lp
                    .var_id(pair[1])
                    .ok_or_else(|| line.err(format!("unknown variable `{}`", pair[1])))?;
                Ok((id, coef))
            })
            .collect()
    };
    for line in it {
        match line.keyword() {
            "var" => {
                let nonneg = match line.tokens.len() {
                    2 => true,
                    3 if line.tokens[2] == "free" => false,
                    _ => return Err(line.err("expected `var <name> [free]`")),
                };
                lp.add_var(line.tokens[1].to_string(), nonneg)
                    .map_err(|e| line.err(e.to_string()))?;
            }
            "obj" => {
                let t = terms(&lp, &line, 1)?;
                lp.set_objective(t);
            }
            "row" => {
                if line.tokens.len() < 4 || line.tokens[3] != ":" {
                    return Err(line.err("expected `row <relation> <rhs> : ...`"));
                }
                let relation = match line.tokens[1] {
                    "<=" => Relation::Le,
                    "=" => Relation::Eq,
                    ">=" => Relation::Ge,
                    other => return Err(line.err(format!("unknown relation `{other}`"))),
                };
                let rhs = line.rational_at(2)?;
                let t = terms(&lp, &line, 4)?;
                let name = key("r", &[lp.constraints.len()]);
                lp.add_constraint(name, t, relation, rhs);
            }
            other => return Err(line.err(format!("unknown directive `{other}`"))),
        }
    }
    Ok(lp)
}
