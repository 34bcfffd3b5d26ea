//! Exact two-phase tableau simplex over arbitrary-precision rationals.
//!
//! Pricing is Dantzig's rule until a run of degenerate pivots is seen, after
//! which Bland's rule takes over for the rest of the phase, so the method
//! always terminates.

use num_traits::{One, Signed, Zero};

use crate::lp::{LinearProgram, Relation, Sense};
use crate::rational::Rational;

/// Consecutive degenerate pivots tolerated before switching to Bland's rule.
const DEGENERATE_STREAK: usize = 32;

#[derive(Debug, Clone, PartialEq)]
pub enum LpOutcome {
    Optimal { value: Rational, x: Vec<Rational> },
    Infeasible,
    Unbounded,
}

impl LpOutcome {
    pub fn value(&self) -> Option<&Rational> {
        match self {
            LpOutcome::Optimal { value, .. } => Some(value),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum ColumnKind {
    Structural { var: usize, negated: bool },
    Slack,
    Artificial,
}

struct Tableau {
    rows: Vec<Vec<Rational>>,
    rhs: Vec<Rational>,
    /// Reduced costs of the current phase objective (minimization).
    cost: Vec<Rational>,
    /// Negated objective value of the current basis.
    cost_rhs: Rational,
    basis: Vec<usize>,
    kinds: Vec<ColumnKind>,
    banned: Vec<bool>,
    pivots: usize,
}

impl Tableau {
    fn from_lp(lp: &LinearProgram) -> Self {
        let mut kinds = Vec::new();
        let mut column_of = Vec::with_capacity(lp.num_vars());
        for (var, v) in lp.vars().iter().enumerate() {
            let pos = kinds.len();
            kinds.push(ColumnKind::Structural { var, negated: false });
            let neg = if v.nonneg {
                None
            } else {
                kinds.push(ColumnKind::Structural { var, negated: true });
                Some(pos + 1)
            };
            column_of.push((pos, neg));
        }
        let structural = kinds.len();
        let m = lp.num_constraints();
        // One slack/surplus per inequality and one artificial where no slack can start basic.
        let mut plan = Vec::with_capacity(m);
        for row in &lp.constraints {
            let flip = row.rhs.is_negative();
            let relation = if flip { row.relation.flipped() } else { row.relation };
            plan.push((flip, relation));
        }
        let extra: usize = plan
            .iter()
            .map(|(_, rel)| match rel {
                Relation::Le => 1,
                Relation::Eq => 1,
                Relation::Ge => 2,
            })
            .sum();
        let width = structural + extra;
        let mut rows = Vec::with_capacity(m);
        let mut rhs = Vec::with_capacity(m);
        let mut basis = Vec::with_capacity(m);
        let mut next = structural;
        for (row, &(flip, relation)) in lp.constraints.iter().zip(&plan) {
            let mut dense = vec![Rational::zero(); width];
            for (j, c) in &row.coeffs {
                let c = if flip { -c } else { c.clone() };
                let (pos, neg) = column_of[*j];
                if let Some(neg) = neg {
                    dense[neg] = -&c;
                }
                dense[pos] = c;
            }
            match relation {
                Relation::Le => {
                    dense[next] = Rational::one();
                    kinds.push(ColumnKind::Slack);
                    basis.push(next);
                    next += 1;
                }
                Relation::Ge => {
                    dense[next] = -Rational::one();
                    kinds.push(ColumnKind::Slack);
                    dense[next + 1] = Rational::one();
                    kinds.push(ColumnKind::Artificial);
                    basis.push(next + 1);
                    next += 2;
                }
                Relation::Eq => {
                    dense[next] = Rational::one();
                    kinds.push(ColumnKind::Artificial);
                    basis.push(next);
                    next += 1;
                }
            }
            rows.push(dense);
            rhs.push(if flip { -&row.rhs } else { row.rhs.clone() });
        }
        debug_assert_eq!(next, width);
        Self {
            rows,
            rhs,
            cost: vec![Rational::zero(); width],
            cost_rhs: Rational::zero(),
            basis,
            banned: vec![false; width],
            kinds,
            pivots: 0,
        }
    }

    fn width(&self) -> usize {
        self.kinds.len()
    }

    /// Installs `costs` (minimized) and prices out the current basis.
    fn set_costs(&mut self, costs: Vec<Rational>) {
        self.cost = costs;
        self.cost_rhs = Rational::zero();
        for i in 0..self.rows.len() {
            let cb = self.cost[self.basis[i]].clone();
            if cb.is_zero() {
                continue;
            }
            for (j, a) in self.rows[i].iter().enumerate() {
                if !a.is_zero() {
                    self.cost[j] -= &cb * a;
                }
            }
            self.cost_rhs -= &cb * &self.rhs[i];
        }
    }

    fn pivot(&mut self, r: usize, c: usize) {
        self.pivots += 1;
        let inv = self.rows[r][c].recip();
        let nz: Vec<usize> = (0..self.width()).filter(|&j| !self.rows[r][j].is_zero()).collect();
        for &j in &nz {
            self.rows[r][j] *= &inv;
        }
        self.rhs[r] *= &inv;
        let (pivot_row, pivot_rhs) = (self.rows[r].clone(), self.rhs[r].clone());
        for i in 0..self.rows.len() {
            if i == r || self.rows[i][c].is_zero() {
                continue;
            }
            let f = self.rows[i][c].clone();
            let row = &mut self.rows[i];
            for &j in &nz {
                row[j] -= &f * &pivot_row[j];
            }
            self.rhs[i] -= &f * &pivot_rhs;
        }
        if !self.cost[c].is_zero() {
            let f = self.cost[c].clone();
            for &j in &nz {
                self.cost[j] -= &f * &pivot_row[j];
            }
            self.cost_rhs -= &f * &pivot_rhs;
        }
        self.basis[r] = c;
    }

    /// Runs the primal simplex on the installed costs. Returns `false` if unbounded.
    fn optimize(&mut self) -> bool {
        let mut bland = false;
        let mut streak = 0;
        loop {
            let entering = if bland {
                (0..self.width()).find(|&j| !self.banned[j] && self.cost[j].is_negative())
            } else {
                let mut best: Option<usize> = None;
                for j in 0..self.width() {
                    if self.banned[j] || !self.cost[j].is_negative() {
                        continue;
                    }
                    if best.is_none_or(|b| self.cost[j] < self.cost[b]) {
                        best = Some(j);
                    }
                }
                best
            };
            let Some(c) = entering else { return true };
            let mut leave: Option<(usize, Rational)> = None;
            for i in 0..self.rows.len() {
                let a = &self.rows[i][c];
                if !a.is_positive() {
                    continue;
                }
                let ratio = &self.rhs[i] / a;
                let better = match &leave {
                    None => true,
                    Some((k, best)) => {
                        ratio < *best || (ratio == *best && self.basis[i] < self.basis[*k])
                    }
                };
                if better {
                    leave = Some((i, ratio));
                }
            }
            let Some((r, ratio)) = leave else { return false };
            if ratio.is_zero() {
                streak += 1;
                if streak >= DEGENERATE_STREAK {
                    bland = true;
                }
            } else {
                streak = 0;
            }
            self.pivot(r, c);
        }
    }

    /// Phase one. Returns `false` when the constraints are infeasible.
    fn phase_one(&mut self) -> bool {
        let costs = self
            .kinds
            .iter()
            .map(|k| if *k == ColumnKind::Artificial { Rational::one() } else { Rational::zero() })
            .collect();
        self.set_costs(costs);
        self.optimize();
        if !self.cost_rhs.is_zero() {
            return false;
        }
        // Drive basic artificials (at level zero) out of the basis, dropping redundant rows.
        let mut i = 0;
        while i < self.rows.len() {
            if self.kinds[self.basis[i]] == ColumnKind::Artificial {
                let replacement = (0..self.width()).find(|&j| {
                    self.kinds[j] != ColumnKind::Artificial && !self.rows[i][j].is_zero()
                });
                match replacement {
                    Some(j) => self.pivot(i, j),
                    None => {
                        self.rows.swap_remove(i);
                        self.rhs.swap_remove(i);
                        self.basis.swap_remove(i);
                        continue;
                    }
                }
            }
            i += 1;
        }
        for (j, k) in self.kinds.iter().enumerate() {
            if *k == ColumnKind::Artificial {
                self.banned[j] = true;
            }
        }
        true
    }

    fn primal_values(&self, n: usize) -> Vec<Rational> {
        let mut x = vec![Rational::zero(); n];
        for (i, &b) in self.basis.iter().enumerate() {
            if let ColumnKind::Structural { var, negated } = self.kinds[b] {
                if negated {
                    x[var] -= &self.rhs[i];
                } else {
                    x[var] += &self.rhs[i];
                }
            }
        }
        x
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolveStats {
    pub pivots: usize,
}

/// Solves `lp` exactly.
pub fn solve(lp: &LinearProgram) -> LpOutcome {
    solve_with_stats(lp).0
}

pub fn solve_with_stats(lp: &LinearProgram) -> (LpOutcome, SolveStats) {
    let mut t = Tableau::from_lp(lp);
    if !t.phase_one() {
        return (LpOutcome::Infeasible, SolveStats { pivots: t.pivots });
    }
    let mut costs = vec![Rational::zero(); t.width()];
    for (j, kind) in t.kinds.iter().enumerate() {
        if let ColumnKind::Structural { var, negated } = *kind {
            if let Some((_, c)) = lp.objective.iter().find(|(v, _)| *v == var) {
                let mut c = if lp.sense == Sense::Maximize { -c } else { c.clone() };
                if negated {
                    c = -c;
                }
                costs[j] = c;
            }
        }
    }
    t.set_costs(costs);
    if !t.optimize() {
        return (LpOutcome::Unbounded, SolveStats { pivots: t.pivots });
    }
    let x = t.primal_values(lp.num_vars());
    let value = lp.objective_value(&x);
    (LpOutcome::Optimal { value, x }, SolveStats { pivots: t.pivots })
}

/// Exact feasibility: returns a point satisfying every constraint, if one exists.
pub fn find_feasible(lp: &LinearProgram) -> Option<Vec<Rational>> {
    let mut t = Tableau::from_lp(lp);
    t.phase_one().then(|| t.primal_values(lp.num_vars()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lp::{key, Stage};
    use crate::rational::{int, rat};

    fn lp_2d(sense: Sense) -> (LinearProgram, usize, usize) {
        let mut lp = LinearProgram::new(sense, Stage::Generic);
        let a = lp.add_var("a".into(), true).unwrap();
        let b = lp.add_var("b".into(), true).unwrap();
        (lp, a, b)
    }

    #[test]
    fn textbook_maximum() {
        // max 2a + 3b s.t. 2a + b <= 18, 6a + 5b <= 60, 2a + 5b <= 40 -> 28 at (5, 6).
        let (mut lp, a, b) = lp_2d(Sense::Maximize);
        lp.set_objective(vec![(a, int(2)), (b, int(3))]);
        for (i, (ca, cb, r)) in [(2, 1, 18), (6, 5, 60), (2, 5, 40)].into_iter().enumerate() {
            lp.add_constraint(key("r", &[i]), vec![(a, int(ca)), (b, int(cb))], Relation::Le, int(r));
        }
        match solve(&lp) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, int(28));
                assert_eq!(x, vec![int(5), int(6)]);
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn equality_and_ge_rows() {
        // With a = 3 - 2b the objective is 3 - b and the second row caps b at 7/6.
        let (mut lp, a, b) = lp_2d(Sense::Minimize);
        lp.set_objective(vec![(a, int(1)), (b, int(1))]);
        lp.add_constraint("e".into(), vec![(a, int(1)), (b, int(2))], Relation::Eq, int(3));
        lp.add_constraint("g".into(), vec![(a, int(1)), (b, int(-1))], Relation::Ge, rat(-1, 2));
        let out = solve(&lp);
        assert_eq!(out.value(), Some(&rat(11, 6)));
    }

    #[test]
    fn infeasible_and_unbounded() {
        let (mut lp, a, b) = lp_2d(Sense::Maximize);
        lp.set_objective(vec![(a, int(1))]);
        lp.add_constraint("x".into(), vec![(a, int(1)), (b, int(1))], Relation::Le, int(1));
        lp.add_constraint("y".into(), vec![(a, int(1))], Relation::Ge, int(2));
        assert_eq!(solve(&lp), LpOutcome::Infeasible);
        assert!(find_feasible(&lp).is_none());

        let (mut lp, a, b) = lp_2d(Sense::Maximize);
        lp.set_objective(vec![(a, int(1))]);
        lp.add_constraint("x".into(), vec![(a, int(1)), (b, int(-1))], Relation::Le, int(1));
        assert_eq!(solve(&lp), LpOutcome::Unbounded);
    }

    #[test]
    fn free_variables() {
        // min z s.t. z >= 2 - a, z >= a - 4, a free, z free -> -1 at a = 3.
        let mut lp = LinearProgram::new(Sense::Minimize, Stage::Generic);
        let a = lp.add_var("a".into(), false).unwrap();
        let z = lp.add_var("z".into(), false).unwrap();
        lp.set_objective(vec![(z, int(1))]);
        lp.add_constraint("1".into(), vec![(z, int(1)), (a, int(1))], Relation::Ge, int(2));
        lp.add_constraint("2".into(), vec![(z, int(1)), (a, int(-1))], Relation::Ge, int(-4));
        assert_eq!(solve(&lp).value(), Some(&int(-1)));
    }

    #[test]
    fn redundant_equalities() {
        let (mut lp, a, b) = lp_2d(Sense::Maximize);
        lp.set_objective(vec![(a, int(1))]);
        lp.add_constraint("1".into(), vec![(a, int(1)), (b, int(1))], Relation::Eq, int(1));
        lp.add_constraint("2".into(), vec![(a, int(2)), (b, int(2))], Relation::Eq, int(2));
        match solve(&lp) {
            LpOutcome::Optimal { value, x } => {
                assert_eq!(value, int(1));
                assert!(lp.is_feasible(&x));
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn degenerate_cycling_example_terminates() {
        // Beale's example, which cycles under the textbook largest-coefficient rule.
        let mut lp = LinearProgram::new(Sense::Minimize, Stage::Generic);
        let x: Vec<usize> = (0..4).map(|i| lp.add_var(format!("x{i}"), true).unwrap()).collect();
        lp.set_objective(vec![(x[0], rat(-3, 4)), (x[1], int(150)), (x[2], rat(-1, 50)), (x[3], int(6))]);
        lp.add_constraint("1".into(), vec![(x[0], rat(1, 4)), (x[1], int(-60)), (x[2], rat(-1, 25)), (x[3], int(9))], Relation::Le, int(0));
        lp.add_constraint("2".into(), vec![(x[0], rat(1, 2)), (x[1], int(-90)), (x[2], rat(-1, 50)), (x[3], int(3))], Relation::Le, int(0));
        lp.add_constraint("3".into(), vec![(x[2], int(1))], Relation::Le, int(1));
        assert_eq!(solve(&lp).value(), Some(&rat(-1, 20)));
    }
}
