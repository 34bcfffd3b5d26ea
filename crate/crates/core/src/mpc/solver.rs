//! Width-independent multiplicative-weights solver for mixed packing and covering.
//!
//! Rows are normalized to `A' x <= 1`, `C' x >= 1`. The solver grows `x` from
//! zero while tracking two smoothed potentials: `lmax` (log-sum-exp of the
//! packing rows, a soft maximum) and `lmin` (a soft minimum of the covering
//! rows). A coordinate may grow only when its packing gradient, relative to
//! its covering gradient, is at most `1 + eps/2`; all such coordinates grow
//! together by a multiplicative step. Every accepted step keeps
//!
//! ```text
//! lmax(x) - lmax(0) <= (1 + eps) * (lmin(x) - lmin(0))
//! ```
//!
//! so once every covering row reaches 1 the packing rows are at most
//! `1 + 2 eps`. When no coordinate qualifies, the current weights prove
//! infeasibility; that proof is re-checked in exact arithmetic before it is
//! reported. Candidate solutions are likewise verified exactly at `1 + eps`.
//!
//! Arithmetic inside a round is data-parallel over rows and columns. Every
//! reduction uses a fixed summation tree, so results do not depend on the
//! number of worker threads.

use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use super::{verify_approx_solution, MpcError, MpcInstance};
use crate::rational::{from_f64, to_f64, Rational};

/// Rows or columns below this count are processed on the calling thread.
const PAR_THRESHOLD: usize = 4096;
const SUM_BLOCK: usize = 1024;
/// Rounds between full recomputations of the row values from `x`.
const REFRESH_EVERY: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// The iteration runs at `eps * internal_fraction`, leaving room for float drift.
    pub internal_fraction: f64,
    /// Extra attempts, each with the internal epsilon halved.
    pub retries: usize,
    /// Multiplier on the per-attempt round budget `(1 + ln(M1 + M2 + N))^2 / eps'^2`.
    pub round_safety_factor: f64,
    /// Instances with at most this many variables fall back to the exact oracle
    /// when the iteration is inconclusive. Zero disables the fallback.
    pub exact_fallback_vars: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { internal_fraction: 0.45, retries: 1, round_safety_factor: 1.0, exact_fallback_vars: 0 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutcomeKind {
    Infeasible,
    Approx,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    /// Settled during presolve.
    Presolve,
    Iterative,
    Exact,
}

/// Nonnegative row weights `p` (packing) and `c` (covering) such that every
/// column `k` has `(c.d) (pA)_k >= (p.b) (cC)_k`, with equality only where
/// `(cC)_k = 0`, and `c.d > 0`. Any feasible `x` would give `0 < 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct InfeasibilityCertificate {
    pub packing_weights: Vec<Rational>,
    pub covering_weights: Vec<Rational>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct MpcOutcome {
    pub kind: OutcomeKind,
    /// Present iff `kind == Approx`; verified at `1 + epsilon`.
    pub x: Option<Vec<Rational>>,
    pub rounds: usize,
    pub epsilon: Rational,
    pub method: SolveMethod,
    pub certificate: Option<InfeasibilityCertificate>,
}

/// Checks an infeasibility certificate exactly against `inst`.
pub fn certifies_infeasible(inst: &MpcInstance, cert: &InfeasibilityCertificate) -> bool {
    let (p, c) = (&cert.packing_weights, &cert.covering_weights);
    if p.len() != inst.packing_rows() || c.len() != inst.covering_rows() {
        return false;
    }
    if p.iter().chain(c).any(Signed::is_negative) {
        return false;
    }
    let weighted = |w: &[Rational], v: &[Rational]| {
        w.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| if a.is_zero() { acc } else { acc + a * b })
    };
    let cd = weighted(c, inst.d());
    if !cd.is_positive() {
        return false;
    }
    let pb = weighted(p, inst.b());
    let pa = column_weights(inst.packing(), p, inst.num_vars());
    let cc = column_weights(inst.covering(), c, inst.num_vars());
    pa.iter().zip(&cc).all(|(pa_k, cc_k)| {
        let g = &cd * pa_k - &pb * cc_k;
        g.is_positive() || (g.is_zero() && cc_k.is_zero())
    })
}

fn column_weights(rows: &[super::SparseRow], w: &[Rational], n: usize) -> Vec<Rational> {
    let mut out = vec![Rational::zero(); n];
    for (row, wi) in rows.iter().zip(w) {
        if wi.is_zero() {
            continue;
        }
        for (k, v) in row {
            out[*k] += wi * v;
        }
    }
    out
}

pub fn solve_mpc(inst: &MpcInstance, epsilon: &Rational) -> Result<MpcOutcome, MpcError> {
    solve_mpc_with(inst, epsilon, &SolverConfig::default())
}

pub fn solve_mpc_with(
    inst: &MpcInstance,
    epsilon: &Rational,
    config: &SolverConfig,
) -> Result<MpcOutcome, MpcError> {
    if !epsilon.is_positive() || *epsilon >= Rational::one() {
        return Err(MpcError::InvalidEpsilon(crate::rational::fmt_rational(epsilon)));
    }
    let outcome = |kind, x, rounds, method, certificate| MpcOutcome {
        kind,
        x,
        rounds,
        epsilon: epsilon.clone(),
        method,
        certificate,
    };
    let reduced = match Reduced::build(inst) {
        Presolved::Feasible(x) => {
            return Ok(outcome(OutcomeKind::Approx, Some(x), 0, SolveMethod::Presolve, None))
        }
        Presolved::Infeasible(cert) => {
            return Ok(outcome(OutcomeKind::Infeasible, None, 0, SolveMethod::Presolve, Some(cert)))
        }
        Presolved::Reduced(r) => r,
    };

    let r_exact = Rational::one() + epsilon;
    let mut eps_internal = to_f64(epsilon) * config.internal_fraction;
    let mut rounds = 0;
    let size = (inst.packing_rows() + inst.covering_rows() + inst.num_vars()) as f64;
    for _ in 0..=config.retries {
        let budget = (config.round_safety_factor * (1.0 + size.ln()).powi(2)
            / (eps_internal * eps_internal))
            .ceil() as usize;
        let (result, used) = reduced.run(eps_internal, budget.max(1), &|p, c| {
            let cert = reduced.lift_certificate(inst, p, c);
            certifies_infeasible(inst, &cert).then_some(cert)
        });
        rounds += used;
        match result {
            Attempt::Infeasible(cert) => {
                return Ok(outcome(
                    OutcomeKind::Infeasible,
                    None,
                    rounds,
                    SolveMethod::Iterative,
                    Some(cert),
                ))
            }
            Attempt::Candidate(xf) => {
                if let Some(x) = reduced.finalize(inst, &xf, &r_exact) {
                    return Ok(outcome(OutcomeKind::Approx, Some(x), rounds, SolveMethod::Iterative, None));
                }
            }
            Attempt::Stalled | Attempt::RoundLimit => {}
        }
        eps_internal /= 2.0;
    }
    if inst.num_vars() <= config.exact_fallback_vars {
        return Ok(match super::exact_feasible_point(inst) {
            Some(x) => outcome(OutcomeKind::Approx, Some(x), rounds, SolveMethod::Exact, None),
            None => outcome(OutcomeKind::Infeasible, None, rounds, SolveMethod::Exact, None),
        });
    }
    Err(MpcError::Inconclusive { rounds })
}

/// Compressed sparse rows with float values.
struct Csr {
    ptr: Vec<usize>,
    idx: Vec<usize>,
    val: Vec<f64>,
}

impl Csr {
    fn from_rows(rows: Vec<Vec<(usize, f64)>>) -> Self {
        let mut ptr = Vec::with_capacity(rows.len() + 1);
        let mut idx = Vec::new();
        let mut val = Vec::new();
        ptr.push(0);
        for row in rows {
            for (j, v) in row {
                idx.push(j);
                val.push(v);
            }
            ptr.push(idx.len());
        }
        Self { ptr, idx, val }
    }

    fn rows(&self) -> usize {
        self.ptr.len() - 1
    }

    fn transpose(&self, ncols: usize) -> Self {
        let mut cols: Vec<Vec<(usize, f64)>> = vec![Vec::new(); ncols];
        for i in 0..self.rows() {
            for e in self.ptr[i]..self.ptr[i + 1] {
                cols[self.idx[e]].push((i, self.val[e]));
            }
        }
        Self::from_rows(cols)
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let mut acc = 0.0;
        for e in self.ptr[i]..self.ptr[i + 1] {
            acc += self.val[e] * x[self.idx[e]];
        }
        acc
    }

    /// `M x`, one sequential dot product per row.
    fn mul(&self, x: &[f64]) -> Vec<f64> {
        let n = self.rows();
        if n >= PAR_THRESHOLD {
            (0..n).into_par_iter().map(|i| self.row_dot(i, x)).collect()
        } else {
            (0..n).map(|i| self.row_dot(i, x)).collect()
        }
    }
}

/// Sum with a fixed blocking and pairwise tree, independent of thread count.
fn det_sum(v: &[f64]) -> f64 {
    let block = |c: &[f64]| c.iter().sum::<f64>();
    let mut partial: Vec<f64> = if v.len() >= PAR_THRESHOLD {
        v.par_chunks(SUM_BLOCK).map(block).collect()
    } else {
        v.chunks(SUM_BLOCK).map(block).collect()
    };
    while partial.len() > 1 {
        partial = partial.chunks(2).map(|c| c.iter().sum()).collect();
    }
    partial.first().copied().unwrap_or(0.0)
}

fn map_vec(v: &[f64], f: impl Fn(f64) -> f64 + Sync) -> Vec<f64> {
    if v.len() >= PAR_THRESHOLD {
        v.par_iter().map(|&t| f(t)).collect()
    } else {
        v.iter().map(|&t| f(t)).collect()
    }
}

fn max_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
}

fn min_of(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Soft maximum `ln(sum exp(eta u_i)) / eta`; exact max for an empty row set is 0.
fn lmax(u: &[f64], eta: f64) -> f64 {
    if u.is_empty() {
        return 0.0;
    }
    let top = max_of(u);
    top + det_sum(&map_vec(u, |t| (eta * (t - top)).exp())).ln() / eta
}

/// Soft minimum `-ln(sum exp(-eta v_j)) / eta`.
fn lmin(v: &[f64], eta: f64) -> f64 {
    let bottom = min_of(v);
    bottom - det_sum(&map_vec(v, |t| (-eta * (t - bottom)).exp())).ln() / eta
}

enum Attempt {
    Candidate(Vec<f64>),
    Infeasible(InfeasibilityCertificate),
    Stalled,
    RoundLimit,
}

/// Called with packing and covering weights; returns a certificate if they prove infeasibility.
type CertificateCheck<'a> = dyn Fn(&[f64], &[f64]) -> Option<InfeasibilityCertificate> + 'a;

enum Presolved {
    Feasible(Vec<Rational>),
    Infeasible(InfeasibilityCertificate),
    Reduced(Box<Reduced>),
}

/// The instance after removing zero-budget packing rows (their columns are
/// fixed at zero), empty covering rows and columns that cover nothing.
struct Reduced {
    /// Reduced column -> original column.
    cols: Vec<usize>,
    pack_rows: Vec<usize>,
    cover_rows: Vec<usize>,
    /// Packing rows with `b_i = 0` and at least one entry.
    zero_rows: Vec<usize>,
    a: Csr,
    a_t: Csr,
    c: Csr,
    c_t: Csr,
    base: Vec<f64>,
}

impl Reduced {
    fn build(inst: &MpcInstance) -> Presolved {
        let n = inst.num_vars();
        let zero_rows: Vec<usize> = (0..inst.packing_rows())
            .filter(|&i| inst.b()[i].is_zero() && !inst.packing()[i].is_empty())
            .collect();
        let mut forced = vec![false; n];
        for &i in &zero_rows {
            for (k, _) in &inst.packing()[i] {
                forced[*k] = true;
            }
        }
        let cover_rows: Vec<usize> =
            (0..inst.covering_rows()).filter(|&j| inst.d()[j].is_positive()).collect();
        if cover_rows.is_empty() {
            return Presolved::Feasible(vec![Rational::zero(); n]);
        }
        let mut covers = vec![false; n];
        for &j in &cover_rows {
            let row = &inst.covering()[j];
            if row.iter().all(|(k, _)| forced[*k]) {
                // Nothing left to cover this row with.
                let mut unit = vec![0.0; cover_rows.len()];
                unit[cover_rows.iter().position(|&r| r == j).unwrap()] = 1.0;
                let shell = Reduced {
                    cols: Vec::new(),
                    pack_rows: Vec::new(),
                    cover_rows: cover_rows.clone(),
                    zero_rows: zero_rows.clone(),
                    a: Csr::from_rows(Vec::new()),
                    a_t: Csr::from_rows(Vec::new()),
                    c: Csr::from_rows(Vec::new()),
                    c_t: Csr::from_rows(Vec::new()),
                    base: Vec::new(),
                };
                return Presolved::Infeasible(shell.lift_certificate(inst, &[], &unit));
            }
            for (k, _) in row {
                covers[*k] = true;
            }
        }
        let cols: Vec<usize> = (0..n).filter(|&k| covers[k] && !forced[k]).collect();
        let mut local = vec![usize::MAX; n];
        for (r, &k) in cols.iter().enumerate() {
            local[k] = r;
        }
        let normalize = |row: &super::SparseRow, rhs: &Rational| -> Vec<(usize, f64)> {
            row.iter()
                .filter(|(k, _)| local[*k] != usize::MAX)
                .map(|(k, v)| (local[*k], to_f64(&(v / rhs))))
                .collect()
        };
        let mut pack_rows = Vec::new();
        let mut a_rows = Vec::new();
        for i in 0..inst.packing_rows() {
            if inst.b()[i].is_zero() {
                continue;
            }
            let row = normalize(&inst.packing()[i], &inst.b()[i]);
            if !row.is_empty() {
                pack_rows.push(i);
                a_rows.push(row);
            }
        }
        let c_rows: Vec<Vec<(usize, f64)>> =
            cover_rows.iter().map(|&j| normalize(&inst.covering()[j], &inst.d()[j])).collect();
        let a = Csr::from_rows(a_rows);
        let c = Csr::from_rows(c_rows);
        let a_t = a.transpose(cols.len());
        let c_t = c.transpose(cols.len());
        let nn = cols.len() as f64;
        let base = (0..cols.len())
            .map(|k| {
                let col_max = a_t.val[a_t.ptr[k]..a_t.ptr[k + 1]]
                    .iter()
                    .chain(&c_t.val[c_t.ptr[k]..c_t.ptr[k + 1]])
                    .copied()
                    .fold(0.0, f64::max);
                1.0 / (nn * col_max)
            })
            .collect();
        Presolved::Reduced(Box::new(Reduced { cols, pack_rows, cover_rows, zero_rows, a, a_t, c, c_t, base }))
    }

    /// Turns normalized float weights on the reduced rows into exact weights on
    /// the original rows. Zero-budget rows get one shared weight large enough to
    /// dominate the columns they force to zero.
    fn lift_certificate(
        &self,
        inst: &MpcInstance,
        pack_w: &[f64],
        cover_w: &[f64],
    ) -> InfeasibilityCertificate {
        let quantize = |w: f64| if w > 1e-40 { from_f64(w) } else { Rational::zero() };
        let mut p = vec![Rational::zero(); inst.packing_rows()];
        for (r, &i) in self.pack_rows.iter().enumerate() {
            let w = quantize(pack_w[r]);
            if !w.is_zero() {
                p[i] = w / &inst.b()[i];
            }
        }
        let mut c = vec![Rational::zero(); inst.covering_rows()];
        for (r, &j) in self.cover_rows.iter().enumerate() {
            let w = quantize(cover_w[r]);
            if !w.is_zero() {
                c[j] = w / &inst.d()[j];
            }
        }
        if !self.zero_rows.is_empty() {
            let dot = |w: &[Rational], v: &[Rational]| {
                w.iter().zip(v).fold(Rational::zero(), |acc, (a, b)| acc + a * b)
            };
            let cd = dot(&c, inst.d());
            let pb = dot(&p, inst.b());
            let pa = column_weights(inst.packing(), &p, inst.num_vars());
            let cc = column_weights(inst.covering(), &c, inst.num_vars());
            let ones: Vec<Rational> = self.zero_rows.iter().map(|_| Rational::one()).collect();
            let zero_only: Vec<super::SparseRow> =
                self.zero_rows.iter().map(|&i| inst.packing()[i].clone()).collect();
            let z = column_weights(&zero_only, &ones, inst.num_vars());
            let mut weight = Rational::zero();
            if cd.is_positive() {
                for k in 0..inst.num_vars() {
                    if z[k].is_zero() {
                        continue;
                    }
                    let need = (&pb * &cc[k] - &cd * &pa[k]) / (&cd * &z[k]);
                    if need > weight {
                        weight = need;
                    }
                }
            }
            weight += Rational::one();
            for &i in &self.zero_rows {
                p[i] = weight.clone();
            }
        }
        InfeasibilityCertificate { packing_weights: p, covering_weights: c }
    }

    /// Rescales the float candidate so every covering row holds exactly, then
    /// verifies the packing side at `r`.
    fn finalize(&self, inst: &MpcInstance, xf: &[f64], r: &Rational) -> Option<Vec<Rational>> {
        let v = self.c.mul(xf);
        let low = min_of(&v);
        if !(low.is_finite() && low > 0.0) {
            return None;
        }
        let mut scale = (1.0 + 1e-12) / low;
        for _ in 0..4 {
            let mut x = vec![Rational::zero(); inst.num_vars()];
            for (local, &k) in self.cols.iter().enumerate() {
                let value = xf[local] * scale;
                if value > 0.0 && value.is_finite() {
                    x[k] = from_f64(value);
                }
            }
            let covered = inst
                .covering()
                .iter()
                .zip(inst.d())
                .all(|(row, d)| super::dot(row, &x) >= *d);
            if covered {
                return verify_approx_solution(inst, &x, r).ok()?.then_some(x);
            }
            scale *= 1.0 + 1e-9;
        }
        None
    }

    fn run(
        &self,
        eps: f64,
        max_rounds: usize,
        check: &CertificateCheck<'_>,
    ) -> (Attempt, usize) {
        let n = self.cols.len();
        let m1 = self.a.rows();
        let m2 = self.c.rows();
        let eta = ((m1.max(1) as f64).ln() + 1.5 * (m2.max(1) as f64).ln()).max(1.0) / eps;
        let kappa = 1.0 + eps;
        let select = 1.0 + eps / 2.0;

        let mut x = vec![0.0; n];
        let mut u = vec![0.0; m1];
        let mut v = vec![0.0; m2];
        let lmax0 = lmax(&u, eta);
        let lmin0 = lmin(&v, eta);
        let mut mult = 1.0f64;
        let mut next_check = 0;

        for round in 0..max_rounds {
            if round > 0 && round % REFRESH_EVERY == 0 {
                u = self.a.mul(&x);
                v = self.c.mul(&x);
            }
            if min_of(&v) >= 1.0 {
                return (Attempt::Candidate(x), round);
            }
            let top = if m1 > 0 { max_of(&u) } else { 0.0 };
            let bottom = min_of(&v);
            let pw = map_vec(&u, |t| (eta * (t - top)).exp());
            let cw = map_vec(&v, |t| (-eta * (t - bottom)).exp());
            let (psum, csum) = (det_sum(&pw), det_sum(&cw));
            let col_ratio = |k: usize| -> f64 {
                let mut pa = 0.0;
                for e in self.a_t.ptr[k]..self.a_t.ptr[k + 1] {
                    pa += pw[self.a_t.idx[e]] * self.a_t.val[e];
                }
                let mut cc = 0.0;
                for e in self.c_t.ptr[k]..self.c_t.ptr[k + 1] {
                    cc += cw[self.c_t.idx[e]] * self.c_t.val[e];
                }
                let pa = if m1 > 0 { pa / psum } else { 0.0 };
                let cc = cc / csum;
                if cc > 0.0 {
                    pa / cc
                } else {
                    f64::INFINITY
                }
            };
            let lambda: Vec<f64> = if n >= PAR_THRESHOLD {
                (0..n).into_par_iter().map(col_ratio).collect()
            } else {
                (0..n).map(col_ratio).collect()
            };
            let lambda_min = min_of(&lambda);
            if lambda_min > 1.0 && (round >= next_check || lambda_min > select) {
                let pn: Vec<f64> = pw.iter().map(|w| w / psum).collect();
                let cn: Vec<f64> = cw.iter().map(|w| w / csum).collect();
                if let Some(cert) = check(&pn, &cn) {
                    return (Attempt::Infeasible(cert), round + 1);
                }
                next_check = round + 16;
            }
            if lambda_min > select {
                return (Attempt::Stalled, round + 1);
            }
            let delta: Vec<f64> = (0..n)
                .map(|k| if lambda[k] <= select { x[k] + self.base[k] } else { 0.0 })
                .collect();
            let du = self.a.mul(&delta);
            let dv = self.c.mul(&delta);
            let peak = max_of(&du).max(max_of(&dv));
            if !(peak > 0.0 && peak.is_finite()) {
                return (Attempt::Stalled, round + 1);
            }
            let safe = eps / (8.0 * eta * peak);
            let mut m = (mult * 2.0).min(1e12);
            let (next_u, next_v) = loop {
                let theta = m.max(1.0) * safe;
                let nu: Vec<f64> = u.iter().zip(&du).map(|(a, b)| a + theta * b).collect();
                let nv: Vec<f64> = v.iter().zip(&dv).map(|(a, b)| a + theta * b).collect();
                if m <= 1.0 || lmax(&nu, eta) - lmax0 <= kappa * (lmin(&nv, eta) - lmin0) {
                    break (nu, nv);
                }
                m /= 2.0;
            };
            mult = m.max(1.0);
            let theta = mult * safe;
            for (xk, dk) in x.iter_mut().zip(&delta) {
                *xk += theta * dk;
            }
            u = next_u;
            v = next_v;
        }
        (Attempt::RoundLimit, max_rounds)
    }
}
