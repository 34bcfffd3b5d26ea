//! The chain of linear programs from the no-signaling program of a game to a
//! mixed packing and covering instance.
//!
//! Every stage is an explicit [`LinearProgram`] so it can be solved and
//! compared on its own:
//!
//! 1. `build_primal`: maximize acceptance over `p(a1,a2|q1,q2)` with
//!    marginals `p1(a1|q1)`, `p2(a2|q2)` (blocks `con1`, `con2`, `con3`).
//! 2. `relax_primal`: the marginal equalities become `<=` and the per-pair
//!    normalization moves to the marginals (`norm1`, `norm2`).
//! 3. `scale_by_pi`: substitute `x = pi p`.
//! 4. `dualize`: the LP dual, with blocks `y1`, `y2`, `z1`, `z2`.
//! 5. `clip_and_complement`: bound `y <= 1` and substitute `y = 1 - ybar`,
//!    which makes every coefficient and right-hand side nonnegative.
//!
//! [`build_mpc_instance`] adds the objective cut `sum z <= s` to the last
//! program and splits its rows into packing and covering.

use num_traits::{One, Signed, Zero};

use crate::game::{Dims, Game, GameError, Strategy};
use crate::lp::{key, split_key, LinearProgram, Relation, Sense, Stage};
use crate::mpc::{verify_approx_solution, MpcInstance, SparseRow};
use crate::rational::{int, Rational};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum PipelineError {
    #[error("linear program has the wrong shape: {0}")]
    ShapeMismatch(String),
    #[error("relaxed solution violates its constraints: {0}")]
    InfeasibleInput(String),
    #[error("vector is not a (1+eps)-approximate solution of the instance")]
    NotApproxFeasible,
    #[error(transparent)]
    Game(#[from] GameError),
}

fn each_pair(d: Dims) -> impl Iterator<Item = (usize, usize)> {
    (0..d.q1).flat_map(move |q1| (0..d.q2).map(move |q2| (q1, q2)))
}

/// Variable offsets shared by the primal, relaxed and scaled programs:
/// the joint block (`p` or `x`) in [`Dims::index`] order, then `p1[q1,a1]`, then `p2[q2,a2]`.
#[derive(Debug, Clone, Copy)]
struct PrimalLayout(Dims);

impl PrimalLayout {
    fn joint(&self, q1: usize, q2: usize, a1: usize, a2: usize) -> usize {
        self.0.index(q1, q2, a1, a2)
    }
    fn p1(&self, q1: usize, a1: usize) -> usize {
        self.0.size() + q1 * self.0.a1 + a1
    }
    fn p2(&self, q2: usize, a2: usize) -> usize {
        self.0.size() + self.0.q1 * self.0.a1 + q2 * self.0.a2 + a2
    }
    fn len(&self) -> usize {
        self.0.size() + self.0.q1 * self.0.a1 + self.0.q2 * self.0.a2
    }
}

/// Variable offsets of the dual, complemented and packing/covering programs:
/// `y1[q1,q2,a1]`, `y2[q1,q2,a2]`, `z1[q1]`, `z2[q2]`.
#[derive(Debug, Clone, Copy)]
pub struct DualLayout(pub Dims);

impl DualLayout {
    pub fn y1(&self, q1: usize, q2: usize, a1: usize) -> usize {
        self.0.pair(q1, q2) * self.0.a1 + a1
    }
    pub fn y2(&self, q1: usize, q2: usize, a2: usize) -> usize {
        self.0.pairs() * self.0.a1 + self.0.pair(q1, q2) * self.0.a2 + a2
    }
    pub fn z1(&self, q1: usize) -> usize {
        self.0.pairs() * (self.0.a1 + self.0.a2) + q1
    }
    pub fn z2(&self, q2: usize) -> usize {
        self.0.pairs() * (self.0.a1 + self.0.a2) + self.0.q1 + q2
    }
    pub fn len(&self) -> usize {
        self.0.pairs() * (self.0.a1 + self.0.a2) + self.0.q1 + self.0.q2
    }
    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

fn add_primal_vars(lp: &mut LinearProgram, d: Dims, joint: &str) {
    let mut add = |name| {
        lp.add_var(name, true).expect("fresh names");
    };
    for (q1, q2) in each_pair(d) {
        for a1 in 0..d.a1 {
            for a2 in 0..d.a2 {
                add(key(joint, &[q1, q2, a1, a2]));
            }
        }
    }
    for q1 in 0..d.q1 {
        for a1 in 0..d.a1 {
            add(key("p1", &[q1, a1]));
        }
    }
    for q2 in 0..d.q2 {
        for a2 in 0..d.a2 {
            add(key("p2", &[q2, a2]));
        }
    }
}

/// Marginal rows: `sum_{a2} J - w p1 (rel) 0` and `sum_{a1} J - w p2 (rel) 0`,
/// where `w` is 1 for `p` and `pi(q1,q2)` for `x`.
fn add_marginal_rows(
    lp: &mut LinearProgram,
    game: &Game,
    relation: Relation,
    weight: impl Fn(usize, usize) -> Rational,
) {
    let d = game.dims();
    let l = PrimalLayout(d);
    for (q1, q2) in each_pair(d) {
        for a1 in 0..d.a1 {
            let mut row: Vec<_> = (0..d.a2).map(|a2| (l.joint(q1, q2, a1, a2), Rational::one())).collect();
            row.push((l.p1(q1, a1), -weight(q1, q2)));
            lp.add_constraint(key("con1", &[q1, q2, a1]), row, relation, Rational::zero());
        }
    }
    for (q1, q2) in each_pair(d) {
        for a2 in 0..d.a2 {
            let mut row: Vec<_> = (0..d.a1).map(|a1| (l.joint(q1, q2, a1, a2), Rational::one())).collect();
            row.push((l.p2(q2, a2), -weight(q1, q2)));
            lp.add_constraint(key("con2", &[q1, q2, a2]), row, relation, Rational::zero());
        }
    }
}

fn add_norm_rows(lp: &mut LinearProgram, d: Dims) {
    let l = PrimalLayout(d);
    for q1 in 0..d.q1 {
        let row = (0..d.a1).map(|a1| (l.p1(q1, a1), Rational::one())).collect();
        lp.add_constraint(key("norm1", &[q1]), row, Relation::Eq, Rational::one());
    }
    for q2 in 0..d.q2 {
        let row = (0..d.a2).map(|a2| (l.p2(q2, a2), Rational::one())).collect();
        lp.add_constraint(key("norm2", &[q2]), row, Relation::Eq, Rational::one());
    }
}

/// The no-signaling value as a linear program. Marginal blocks are declared
/// nonnegative; this is implied by the equalities and keeps the dual in
/// inequality form.
pub fn build_primal(game: &Game) -> LinearProgram {
    let d = game.dims();
    let l = PrimalLayout(d);
    let mut lp = LinearProgram::new(Sense::Maximize, Stage::Primal);
    add_primal_vars(&mut lp, d, "p");
    add_marginal_rows(&mut lp, game, Relation::Eq, |_, _| Rational::one());
    for (q1, q2) in each_pair(d) {
        let mut row = Vec::with_capacity(d.a1 * d.a2);
        for a1 in 0..d.a1 {
            for a2 in 0..d.a2 {
                row.push((l.joint(q1, q2, a1, a2), Rational::one()));
            }
        }
        lp.add_constraint(key("con3", &[q1, q2]), row, Relation::Eq, Rational::one());
    }
    lp.set_objective(acceptance_objective(game, |q1, q2| game.pi(q1, q2).clone()));
    lp
}

fn acceptance_objective(game: &Game, weight: impl Fn(usize, usize) -> Rational) -> Vec<(usize, Rational)> {
    let d = game.dims();
    let l = PrimalLayout(d);
    let mut obj = Vec::new();
    for (q1, q2) in each_pair(d) {
        let w = weight(q1, q2);
        if w.is_zero() {
            continue;
        }
        for a1 in 0..d.a1 {
            for a2 in 0..d.a2 {
                let r = game.payoff(q1, q2, a1, a2);
                if !r.is_zero() {
                    obj.push((l.joint(q1, q2, a1, a2), &w * r));
                }
            }
        }
    }
    obj
}

fn block_count(lp: &LinearProgram, block: &str) -> usize {
    lp.vars().iter().filter(|v| split_key(&v.name).0 == block).count()
}

fn expect_shape(
    lp: &LinearProgram,
    stage: Stage,
    blocks: &[(&str, usize)],
) -> Result<(), PipelineError> {
    if lp.stage != stage {
        return Err(PipelineError::ShapeMismatch(format!(
            "expected a {stage:?} program, found {:?}",
            lp.stage
        )));
    }
    let total: usize = blocks.iter().map(|b| b.1).sum();
    for (block, count) in blocks {
        let found = block_count(lp, block);
        if found != *count {
            return Err(PipelineError::ShapeMismatch(format!(
                "block `{block}` has {found} variables, expected {count}"
            )));
        }
    }
    if lp.num_vars() != total {
        return Err(PipelineError::ShapeMismatch(format!(
            "{} variables, expected {total}",
            lp.num_vars()
        )));
    }
    Ok(())
}

fn primal_blocks(d: Dims, joint: &'static str) -> [(&'static str, usize); 3] {
    [(joint, d.size()), ("p1", d.q1 * d.a1), ("p2", d.q2 * d.a2)]
}

/// Relaxes the marginal equalities to `<=` and replaces the per-pair
/// normalization by normalization of `p1` and `p2`.
pub fn relax_primal(lp: &LinearProgram, game: &Game) -> Result<LinearProgram, PipelineError> {
    let d = game.dims();
    expect_shape(lp, Stage::Primal, &primal_blocks(d, "p"))?;
    let mut out = lp.clone();
    out.stage = Stage::Relaxed;
    out.constraints.retain(|row| split_key(&row.name).0 != "con3");
    for row in &mut out.constraints {
        match split_key(&row.name).0 {
            "con1" | "con2" if row.relation == Relation::Eq => row.relation = Relation::Le,
            other => {
                return Err(PipelineError::ShapeMismatch(format!("unexpected row family `{other}`")))
            }
        }
    }
    add_norm_rows(&mut out, d);
    Ok(out)
}

/// Substitutes `x(a1,a2|q1,q2) = pi(q1,q2) p(a1,a2|q1,q2)` in the relaxed program.
/// Pairs with `pi = 0` keep their `x` variables, pinned to zero by `sum x <= 0`.
pub fn scale_by_pi(lp: &LinearProgram, game: &Game) -> Result<LinearProgram, PipelineError> {
    let d = game.dims();
    expect_shape(lp, Stage::Relaxed, &primal_blocks(d, "p"))?;
    let mut out = LinearProgram::new(Sense::Maximize, Stage::Scaled);
    add_primal_vars(&mut out, d, "x");
    add_marginal_rows(&mut out, game, Relation::Le, |q1, q2| game.pi(q1, q2).clone());
    add_norm_rows(&mut out, d);
    out.set_objective(acceptance_objective(game, |_, _| Rational::one()));
    Ok(out)
}

/// Names used for the dual variable of each primal row family.
fn dual_block(family: &str) -> String {
    match family {
        "con1" => "y1".to_string(),
        "con2" => "y2".to_string(),
        "norm1" => "z1".to_string(),
        "norm2" => "z2".to_string(),
        other => format!("dual_{other}"),
    }
}

/// The LP dual of an arbitrary program. One dual variable per primal row
/// (named by [`dual_block`] of the row family), one dual row per primal
/// variable (named after the variable). Rows that would need a nonpositive
/// multiplier get a sign-flipped nonnegative one.
pub fn dual_of(lp: &LinearProgram, stage: Stage) -> LinearProgram {
    let sense = match lp.sense {
        Sense::Maximize => Sense::Minimize,
        Sense::Minimize => Sense::Maximize,
    };
    let mut out = LinearProgram::new(sense, stage);
    let mut sign = Vec::with_capacity(lp.num_constraints());
    for row in &lp.constraints {
        let (family, ix) = split_key(&row.name);
        let name = format!("{}[{ix}]", dual_block(family));
        let (nonneg, s) = match (lp.sense, row.relation) {
            (_, Relation::Eq) => (false, 1),
            (Sense::Maximize, Relation::Le) | (Sense::Minimize, Relation::Ge) => (true, 1),
            _ => (true, -1),
        };
        out.add_var(name, nonneg).expect("row names are unique");
        sign.push(s);
    }
    let signed = |i: usize, v: &Rational| if sign[i] > 0 { v.clone() } else { -v };
    let mut columns: Vec<Vec<(usize, Rational)>> = vec![Vec::new(); lp.num_vars()];
    for (i, row) in lp.constraints.iter().enumerate() {
        for (j, a) in &row.coeffs {
            columns[*j].push((i, signed(i, a)));
        }
    }
    let mut cost = vec![Rational::zero(); lp.num_vars()];
    for (j, c) in &lp.objective {
        cost[*j] = c.clone();
    }
    for (j, (var, col)) in lp.vars().iter().zip(columns).enumerate() {
        let relation = match (var.nonneg, lp.sense) {
            (false, _) => Relation::Eq,
            (true, Sense::Maximize) => Relation::Ge,
            (true, Sense::Minimize) => Relation::Le,
        };
        out.add_constraint(var.name.clone(), col, relation, cost[j].clone());
    }
    let objective = lp.constraints.iter().enumerate().map(|(i, row)| (i, signed(i, &row.rhs))).collect();
    out.set_objective(objective);
    out
}

/// Dual of the scaled program.
pub fn dualize(lp: &LinearProgram, game: &Game) -> Result<LinearProgram, PipelineError> {
    let d = game.dims();
    expect_shape(lp, Stage::Scaled, &primal_blocks(d, "x"))?;
    Ok(dual_of(lp, Stage::Dual))
}

fn dual_blocks(d: Dims, prefix: &str) -> [(String, usize); 4] {
    [
        (format!("{prefix}1"), d.pairs() * d.a1),
        (format!("{prefix}2"), d.pairs() * d.a2),
        ("z1".to_string(), d.q1),
        ("z2".to_string(), d.q2),
    ]
}

/// Adds `y <= 1` to the dual and substitutes `y = 1 - ybar`. Rows are then
/// negated where needed so that all coefficients are nonnegative:
///
/// ```text
/// con1[q1,q2,a1,a2]:  ybar1 + ybar2 <= 2 - R
/// con2[q1,a1]:        z1 + sum_q2 pi ybar1 >= pi1(q1)
/// con3[q2,a2]:        z2 + sum_q1 pi ybar2 >= pi2(q2)
/// ub1, ub2:           ybar <= 1
/// ```
///
/// `z` is declared nonnegative, which the dual rows already imply.
pub fn clip_and_complement(lp: &LinearProgram, game: &Game) -> Result<LinearProgram, PipelineError> {
    let d = game.dims();
    let blocks = dual_blocks(d, "y");
    let named: Vec<(&str, usize)> = blocks.iter().map(|(b, n)| (b.as_str(), *n)).collect();
    expect_shape(lp, Stage::Dual, &named)?;
    let complemented: Vec<bool> = lp
        .vars()
        .iter()
        .map(|v| matches!(split_key(&v.name).0, "y1" | "y2"))
        .collect();
    if lp.objective.iter().any(|(j, _)| complemented[*j]) {
        return Err(PipelineError::ShapeMismatch("objective depends on y".into()));
    }
    let mut out = LinearProgram::new(lp.sense, Stage::Complemented);
    for (v, comp) in lp.vars().iter().zip(&complemented) {
        let name = if *comp { format!("{}bar{}", &v.name[..1], &v.name[1..]) } else { v.name.clone() };
        out.add_var(name, true).expect("names stay unique");
    }
    for row in &lp.constraints {
        let mut rhs = row.rhs.clone();
        let mut coeffs = Vec::with_capacity(row.coeffs.len());
        for (j, a) in &row.coeffs {
            if complemented[*j] {
                rhs -= a;
                coeffs.push((*j, -a));
            } else {
                coeffs.push((*j, a.clone()));
            }
        }
        let mut relation = row.relation;
        if coeffs.iter().all(|(_, a)| !a.is_positive()) {
            coeffs.iter_mut().for_each(|(_, a)| *a = -a.clone());
            rhs = -rhs;
            relation = relation.flipped();
        }
        if coeffs.iter().any(|(_, a)| a.is_negative()) {
            return Err(PipelineError::ShapeMismatch(format!("row `{}` has mixed signs", row.name)));
        }
        let (block, ix) = split_key(&row.name);
        let family = match block {
            "x" => "con1",
            "p1" => "con2",
            "p2" => "con3",
            other => other,
        };
        out.add_constraint(format!("{family}[{ix}]"), coeffs, relation, rhs);
    }
    for (j, v) in lp.vars().iter().enumerate() {
        if complemented[j] {
            let (block, ix) = split_key(&v.name);
            out.add_constraint(format!("ub{}[{ix}]", &block[1..]), vec![(j, Rational::one())], Relation::Le, Rational::one());
        }
    }
    out.set_objective(lp.objective.clone());
    Ok(out)
}

/// All stages for a game, in order.
pub fn all_stages(game: &Game) -> Result<Vec<LinearProgram>, PipelineError> {
    let primal = build_primal(game);
    let relaxed = relax_primal(&primal, game)?;
    let scaled = scale_by_pi(&relaxed, game)?;
    let dual = dualize(&scaled, game)?;
    let complemented = clip_and_complement(&dual, game)?;
    Ok(vec![primal, relaxed, scaled, dual, complemented])
}

pub fn complemented_lp(game: &Game) -> Result<LinearProgram, PipelineError> {
    Ok(all_stages(game)?.pop().expect("five stages"))
}

/// Packing rows: `sum z <= s`, then `con1`, `ub1`, `ub2`. Covering rows:
/// `con2`, then `con3`. Variables follow [`DualLayout`].
///
/// Panics if `s` is negative.
pub fn build_mpc_instance(game: &Game, s: &Rational) -> MpcInstance {
    assert!(!s.is_negative(), "threshold must be nonnegative");
    let d = game.dims();
    let l = DualLayout(d);
    let one = Rational::one();
    let two = int(2);
    let mut packing: Vec<SparseRow> = Vec::new();
    let mut b = Vec::new();
    let z_all: SparseRow = (0..d.q1).map(|q1| (l.z1(q1), one.clone())).chain((0..d.q2).map(|q2| (l.z2(q2), one.clone()))).collect();
    packing.push(z_all);
    b.push(s.clone());
    for (q1, q2) in each_pair(d) {
        for a1 in 0..d.a1 {
            for a2 in 0..d.a2 {
                packing.push(vec![(l.y1(q1, q2, a1), one.clone()), (l.y2(q1, q2, a2), one.clone())]);
                b.push(&two - game.payoff(q1, q2, a1, a2));
            }
        }
    }
    for (q1, q2) in each_pair(d) {
        for a1 in 0..d.a1 {
            packing.push(vec![(l.y1(q1, q2, a1), one.clone())]);
            b.push(one.clone());
        }
    }
    for (q1, q2) in each_pair(d) {
        for a2 in 0..d.a2 {
            packing.push(vec![(l.y2(q1, q2, a2), one.clone())]);
            b.push(one.clone());
        }
    }
    let mut covering: Vec<SparseRow> = Vec::new();
    let mut dv = Vec::new();
    for q1 in 0..d.q1 {
        for a1 in 0..d.a1 {
            let mut row = vec![(l.z1(q1), one.clone())];
            for q2 in 0..d.q2 {
                let pi = game.pi(q1, q2);
                if !pi.is_zero() {
                    row.push((l.y1(q1, q2, a1), pi.clone()));
                }
            }
            covering.push(row);
            dv.push(game.pi1()[q1].clone());
        }
    }
    for q2 in 0..d.q2 {
        for a2 in 0..d.a2 {
            let mut row = vec![(l.z2(q2), one.clone())];
            for q1 in 0..d.q1 {
                let pi = game.pi(q1, q2);
                if !pi.is_zero() {
                    row.push((l.y2(q1, q2, a2), pi.clone()));
                }
            }
            covering.push(row);
            dv.push(game.pi2()[q2].clone());
        }
    }
    MpcInstance::new(l.len(), packing, b, covering, dv)
        .expect("game data yields a well-formed instance")
        .with_names(dual_var_names(d))
}

fn dual_var_names(d: Dims) -> Vec<String> {
    let mut names = Vec::with_capacity(DualLayout(d).len());
    for (q1, q2) in each_pair(d) {
        for a1 in 0..d.a1 {
            names.push(key("ybar1", &[q1, q2, a1]));
        }
    }
    for (q1, q2) in each_pair(d) {
        for a2 in 0..d.a2 {
            names.push(key("ybar2", &[q1, q2, a2]));
        }
    }
    names.extend((0..d.q1).map(|q1| key("z1", &[q1])));
    names.extend((0..d.q2).map(|q2| key("z2", &[q2])));
    names
}

/// A feasible point of the complemented program together with its objective.
#[derive(Debug, Clone, PartialEq)]
pub struct Repaired {
    /// Values in [`DualLayout`] order.
    pub assignment: Vec<Rational>,
    pub objective: Rational,
}

/// Returns the first complemented-program constraint violated by `v`
/// (in [`DualLayout`] order), or its objective if `v` is feasible.
pub fn check_complemented(game: &Game, v: &[Rational]) -> Result<Rational, String> {
    let d = game.dims();
    let l = DualLayout(d);
    if v.len() != l.len() {
        return Err(format!("expected {} values, found {}", l.len(), v.len()));
    }
    if let Some(j) = v.iter().position(Signed::is_negative) {
        return Err(format!("variable {j} is negative"));
    }
    let one = Rational::one();
    let two = int(2);
    for (q1, q2) in each_pair(d) {
        for a1 in 0..d.a1 {
            if v[l.y1(q1, q2, a1)] > one {
                return Err(key("ub1", &[q1, q2, a1]));
            }
            for a2 in 0..d.a2 {
                if &v[l.y1(q1, q2, a1)] + &v[l.y2(q1, q2, a2)] > &two - game.payoff(q1, q2, a1, a2) {
                    return Err(key("con1", &[q1, q2, a1, a2]));
                }
            }
        }
        for a2 in 0..d.a2 {
            if v[l.y2(q1, q2, a2)] > one {
                return Err(key("ub2", &[q1, q2, a2]));
            }
        }
    }
    for q1 in 0..d.q1 {
        for a1 in 0..d.a1 {
            let lhs = (0..d.q2).fold(v[l.z1(q1)].clone(), |acc, q2| acc + game.pi(q1, q2) * &v[l.y1(q1, q2, a1)]);
            if lhs < game.pi1()[q1] {
                return Err(key("con2", &[q1, a1]));
            }
        }
    }
    for q2 in 0..d.q2 {
        for a2 in 0..d.a2 {
            let lhs = (0..d.q1).fold(v[l.z2(q2)].clone(), |acc, q1| acc + game.pi(q1, q2) * &v[l.y2(q1, q2, a2)]);
            if lhs < game.pi2()[q2] {
                return Err(key("con3", &[q2, a2]));
            }
        }
    }
    let objective = (0..d.q1).map(|q1| &v[l.z1(q1)]).chain((0..d.q2).map(|q2| &v[l.z2(q2)])).sum();
    Ok(objective)
}

/// Turns a `(1+eps)`-approximate solution of `build_mpc_instance(game, s)`
/// into an exactly feasible point of the complemented program with objective
/// at most `s + 3 eps`: `ybar' = ybar / (1+eps)`, `z' = z + eps * marginal`.
pub fn repair_approx_solution(
    game: &Game,
    approx: &[Rational],
    epsilon: &Rational,
    s: &Rational,
) -> Result<Repaired, PipelineError> {
    let inst = build_mpc_instance(game, s);
    let r = Rational::one() + epsilon;
    if !matches!(verify_approx_solution(&inst, approx, &r), Ok(true)) {
        return Err(PipelineError::NotApproxFeasible);
    }
    let d = game.dims();
    let l = DualLayout(d);
    let mut assignment: Vec<Rational> = approx.iter().map(|v| v / &r).collect();
    for q1 in 0..d.q1 {
        assignment[l.z1(q1)] = &approx[l.z1(q1)] + epsilon * &game.pi1()[q1];
    }
    for q2 in 0..d.q2 {
        assignment[l.z2(q2)] = &approx[l.z2(q2)] + epsilon * &game.pi2()[q2];
    }
    let objective = check_complemented(game, &assignment).map_err(PipelineError::InfeasibleInput)?;
    Ok(Repaired { assignment, objective })
}

/// A solution `(p~, p1, p2)` of the relaxed program, stored densely:
/// `p_tilde` in [`Dims::index`] order, `p1[q1][a1]`, `p2[q2][a2]`.
#[derive(Debug, Clone, PartialEq)]
pub struct RelaxedSolution {
    pub dims: Dims,
    pub p_tilde: Vec<Rational>,
    pub p1: Vec<Vec<Rational>>,
    pub p2: Vec<Vec<Rational>>,
}

impl RelaxedSolution {
    /// Reads a solution vector of the relaxed (or primal) program.
    pub fn from_lp_values(dims: Dims, x: &[Rational]) -> Result<Self, PipelineError> {
        let l = PrimalLayout(dims);
        if x.len() != l.len() {
            return Err(PipelineError::ShapeMismatch(format!(
                "expected {} values, found {}",
                l.len(),
                x.len()
            )));
        }
        Ok(Self {
            dims,
            p_tilde: x[..dims.size()].to_vec(),
            p1: (0..dims.q1).map(|q1| (0..dims.a1).map(|a1| x[l.p1(q1, a1)].clone()).collect()).collect(),
            p2: (0..dims.q2).map(|q2| (0..dims.a2).map(|a2| x[l.p2(q2, a2)].clone()).collect()).collect(),
        })
    }

    pub fn to_lp_values(&self) -> Vec<Rational> {
        let mut v = self.p_tilde.clone();
        v.extend(self.p1.iter().flatten().cloned());
        v.extend(self.p2.iter().flatten().cloned());
        v
    }

    fn pt(&self, q1: usize, q2: usize, a1: usize, a2: usize) -> &Rational {
        &self.p_tilde[self.dims.index(q1, q2, a1, a2)]
    }

    /// Objective of the relaxed program: `sum pi R p~`.
    pub fn objective(&self, game: &Game) -> Rational {
        let d = self.dims;
        let mut total = Rational::zero();
        for (q1, q2) in each_pair(d) {
            for a1 in 0..d.a1 {
                for a2 in 0..d.a2 {
                    let r = game.payoff(q1, q2, a1, a2);
                    if !r.is_zero() {
                        total += game.pi(q1, q2) * r * self.pt(q1, q2, a1, a2);
                    }
                }
            }
        }
        total
    }

    /// Checks every relaxed constraint exactly.
    pub fn check(&self) -> Result<(), PipelineError> {
        let d = self.dims;
        let bad = |m: String| Err(PipelineError::InfeasibleInput(m));
        if self.p_tilde.len() != d.size()
            || self.p1.len() != d.q1
            || self.p2.len() != d.q2
            || self.p1.iter().any(|r| r.len() != d.a1)
            || self.p2.iter().any(|r| r.len() != d.a2)
        {
            return Err(PipelineError::ShapeMismatch("relaxed solution dimensions".into()));
        }
        if self.p_tilde.iter().any(Signed::is_negative) {
            return bad("negative joint entry".into());
        }
        for (q1, row) in self.p1.iter().enumerate() {
            if row.iter().sum::<Rational>() != Rational::one() {
                return bad(key("norm1", &[q1]));
            }
        }
        for (q2, row) in self.p2.iter().enumerate() {
            if row.iter().sum::<Rational>() != Rational::one() {
                return bad(key("norm2", &[q2]));
            }
        }
        for (q1, q2) in each_pair(d) {
            for a1 in 0..d.a1 {
                let m: Rational = (0..d.a2).map(|a2| self.pt(q1, q2, a1, a2)).sum();
                if m > self.p1[q1][a1] {
                    return bad(key("con1", &[q1, q2, a1]));
                }
            }
            for a2 in 0..d.a2 {
                let m: Rational = (0..d.a1).map(|a1| self.pt(q1, q2, a1, a2)).sum();
                if m > self.p2[q2][a2] {
                    return bad(key("con2", &[q1, q2, a2]));
                }
            }
        }
        Ok(())
    }
}

/// Completes a relaxed solution to a no-signaling strategy with marginals
/// `p1`, `p2`: per pair, the missing mass `s(a1)`, `t(a2)` (both summing to
/// `F`) is added back as the product `s t / F`.
pub fn complete_strategy(game: &Game, relaxed: &RelaxedSolution) -> Result<Strategy, PipelineError> {
    let d = game.dims();
    if relaxed.dims != d {
        return Err(PipelineError::ShapeMismatch("relaxed solution is for another game".into()));
    }
    relaxed.check()?;
    let mut p = relaxed.p_tilde.clone();
    for (q1, q2) in each_pair(d) {
        let s: Vec<Rational> = (0..d.a1)
            .map(|a1| (0..d.a2).fold(relaxed.p1[q1][a1].clone(), |acc, a2| acc - relaxed.pt(q1, q2, a1, a2)))
            .collect();
        let t: Vec<Rational> = (0..d.a2)
            .map(|a2| (0..d.a1).fold(relaxed.p2[q2][a2].clone(), |acc, a1| acc - relaxed.pt(q1, q2, a1, a2)))
            .collect();
        let f: Rational = s.iter().sum();
        if f != t.iter().sum::<Rational>() {
            return Err(PipelineError::InfeasibleInput(format!("unbalanced slack at pair ({q1}, {q2})")));
        }
        if f.is_zero() {
            continue;
        }
        for (a1, sv) in s.iter().enumerate() {
            if sv.is_zero() {
                continue;
            }
            for (a2, tv) in t.iter().enumerate() {
                p[d.index(q1, q2, a1, a2)] += sv * tv / &f;
            }
        }
    }
    Ok(Strategy::new(d, p)?)
}
