//! Dense tableau simplex for boxed linear programs.
//!
//! Variables are shifted to `[0, upper - lower]` and handled with the
//! bounded-variable ratio test, so box constraints never become rows. A
//! phase-one run over artificial columns finds a feasible basis; afterwards
//! the artificials are fixed at zero and [`SimplexSolver::maximize`] can be
//! called repeatedly with new objectives, each starting from the previous
//! optimal basis.
//!
//! Pricing is Dantzig's largest reduced cost. After a run of degenerate
//! pivots the solver switches to Bland's smallest-index rule until the
//! objective moves again, which rules out cycling.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::exact::Sense;

const PIVOT_TOL: f64 = 1e-9;
const OPT_TOL: f64 = 1e-10;
const FEAS_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 200;
const DEGENERATE_RUN: usize = 10;
/// Per call to the optimiser.
const MAX_PIVOTS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

/// `maximize objective . x` subject to `rows` and `lower <= x <= upper`.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<LpRow>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn n_vars(&self) -> usize {
        self.lower.len()
    }

    fn validate(&self) -> Result<()> {
        let n = self.n_vars();
        if self.upper.len() != n || self.objective.len() != n {
            return Err(Error::Dimension(format!(
                "LP has {n} lower bounds, {} upper bounds, {} costs",
                self.upper.len(),
                self.objective.len()
            )));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(Error::InvalidArgument(format!(
                    "variable {j} needs finite bounds, got [{l}, {u}]"
                )));
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.coeffs.iter().any(|&(j, c)| j >= n || !c.is_finite()) || !r.rhs.is_finite() {
                return Err(Error::InvalidArgument(format!("LP row {i} is malformed")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    pub pivots: usize,
}

/// Solves `lp` from scratch.
pub fn solve_lp(lp: &LinearProgram) -> Result<LpSolution> {
    SimplexSolver::new(lp)?.maximize(&lp.objective)
}

/// Feasible basis of a boxed LP that can be re-optimised for new objectives.
#[derive(Debug, Clone)]
pub struct SimplexSolver {
    m: usize,
    n_orig: usize,
    ncols: usize,
    lower: Vec<f64>,
    /// Normalised constraint matrix, row-major `m x ncols`.
    a0: Vec<f64>,
    b0: Vec<f64>,
    /// Current `B^{-1} A`, row-major.
    t: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    is_basic: Vec<bool>,
    since_refactor: usize,
    pivots: usize,
}

impl SimplexSolver {
    /// Builds the tableau and runs phase one.
    pub fn new(lp: &LinearProgram) -> Result<Self> {
        lp.validate()?;
        let n = lp.n_vars();
        let m = lp.rows.len();
        let mut dense = vec![vec![0.0; n]; m];
        let mut rhs = vec![0.0; m];
        for (i, row) in lp.rows.iter().enumerate() {
            let mut shift = 0.0;
            for &(j, c) in &row.coeffs {
                dense[i][j] += c;
                shift += c * lp.lower[j];
            }
            rhs[i] = row.rhs - shift;
        }
        // column layout: originals, one slack per inequality, artificials
        let n_slack = lp.rows.iter().filter(|r| r.sense != Sense::Eq).count();
        let mut slack_of = vec![None; m];
        let mut next = n;
        for (i, r) in lp.rows.iter().enumerate() {
            if r.sense != Sense::Eq {
                slack_of[i] = Some(next);
                next += 1;
            }
        }
        debug_assert_eq!(next, n + n_slack);
        let mut basis = vec![usize::MAX; m];
        let mut n_art = 0;
        let mut sign = vec![1.0; m];
        for i in 0..m {
            let s = match lp.rows[i].sense {
                Sense::Le => 1.0,
                Sense::Ge => -1.0,
                Sense::Eq => 0.0,
            };
            if rhs[i] < 0.0 {
                sign[i] = -1.0;
            }
            if s * sign[i] > 0.0 {
                basis[i] = slack_of[i].unwrap();
            } else {
                n_art += 1;
            }
        }
        let ncols = n + n_slack + n_art;
        let mut a0 = vec![0.0; m * ncols];
        let mut upper = vec![f64::INFINITY; ncols];
        for j in 0..n {
            upper[j] = lp.upper[j] - lp.lower[j];
        }
        let mut art = n + n_slack;
        let mut artificial = Vec::new();
        for i in 0..m {
            let row = &mut a0[i * ncols..(i + 1) * ncols];
            for j in 0..n {
                row[j] = sign[i] * dense[i][j];
            }
            if let Some(s) = slack_of[i] {
                let coef = if lp.rows[i].sense == Sense::Le { 1.0 } else { -1.0 };
                row[s] = sign[i] * coef;
            }
            if basis[i] == usize::MAX {
                row[art] = 1.0;
                basis[i] = art;
                artificial.push((art, i));
                art += 1;
            }
            rhs[i] *= sign[i];
        }
        let mut is_basic = vec![false; ncols];
        let mut x = vec![0.0; ncols];
        for (i, &b) in basis.iter().enumerate() {
            is_basic[b] = true;
            x[b] = rhs[i];
        }
        let mut solver = Self {
            m,
            n_orig: n,
            ncols,
            lower: lp.lower.clone(),
            t: a0.clone(),
            a0,
            b0: rhs,
            upper,
            x,
            basis,
            is_basic,
            since_refactor: 0,
            pivots: 0,
        };
        if !artificial.is_empty() {
            let mut cost = vec![0.0; ncols];
            for &(j, _) in &artificial {
                cost[j] = -1.0;
            }
            solver.optimize(&cost)?;
            let scale = solver.b0.iter().fold(1.0f64, |a, b| a.max(b.abs()));
            let worst = artificial
                .iter()
                .max_by(|a, b| solver.x[a.0].total_cmp(&solver.x[b.0]))
                .unwrap();
            if solver.x[worst.0] > FEAS_TOL * scale {
                return Err(Error::Infeasible { row: worst.1 });
            }
            for &(j, _) in &artificial {
                solver.upper[j] = 0.0;
                if !solver.is_basic[j] {
                    solver.x[j] = 0.0;
                }
            }
            solver.refactor()?;
        }
        Ok(solver)
    }

    pub fn pivots(&self) -> usize {
        self.pivots
    }

    /// Re-optimises for `objective` (over the original variables) from the current basis.
    pub fn maximize(&mut self, objective: &[f64]) -> Result<LpSolution> {
        if objective.len() != self.n_orig {
            return Err(Error::Dimension(format!(
                "objective has {} entries, LP has {} variables",
                objective.len(),
                self.n_orig
            )));
        }
        let mut cost = vec![0.0; self.ncols];
        cost[..self.n_orig].copy_from_slice(objective);
        let before = self.pivots;
        self.optimize(&cost)?;
        let x: Vec<f64> = (0..self.n_orig)
            .map(|j| {
                let range = self.upper[j];
                self.lower[j] + self.x[j].clamp(0.0, range)
            })
            .collect();
        let value = x.iter().zip(objective).map(|(a, b)| a * b).sum();
        Ok(LpSolution {
            x,
            value,
            pivots: self.pivots - before,
        })
    }

    fn reduced_costs(&self, cost: &[f64]) -> Vec<f64> {
        let mut d = cost.to_vec();
        for (i, &b) in self.basis.iter().enumerate() {
            let cb = cost[b];
            if cb == 0.0 {
                continue;
            }
            let row = &self.t[i * self.ncols..(i + 1) * self.ncols];
            for (dj, &tij) in d.iter_mut().zip(row) {
                *dj -= cb * tij;
            }
        }
        d
    }

    fn optimize(&mut self, cost: &[f64]) -> Result<()> {
        let nc = self.ncols;
        let mut d = self.reduced_costs(cost);
        let mut degenerate = 0usize;
        let start = self.pivots;
        loop {
            let bland = degenerate >= DEGENERATE_RUN;
            let mut enter = None;
            let mut best = 0.0;
            for j in 0..nc {
                if self.is_basic[j] || self.upper[j] <= 0.0 {
                    continue;
                }
                let at_upper = self.x[j] > 0.0;
                let gain = if at_upper { -d[j] } else { d[j] };
                if gain > OPT_TOL {
                    if bland {
                        enter = Some(j);
                        break;
                    }
                    if gain > best {
                        best = gain;
                        enter = Some(j);
                    }
                }
            }
            let Some(q) = enter else { return Ok(()) };
            let dir = if self.x[q] > 0.0 { -1.0 } else { 1.0 };

            let mut step = self.upper[q];
            let mut leave: Option<(usize, f64)> = None;
            for i in 0..self.m {
                let alpha = self.t[i * nc + q] * dir;
                let b = self.basis[i];
                let lim = if alpha > PIVOT_TOL {
                    self.x[b].max(0.0) / alpha
                } else if alpha < -PIVOT_TOL && self.upper[b].is_finite() {
                    (self.upper[b] - self.x[b]).max(0.0) / -alpha
                } else {
                    continue;
                };
                let take = match leave {
                    _ if lim < step - 1e-12 => true,
                    Some((r, a)) if lim <= step + 1e-12 => {
                        if bland {
                            b < self.basis[r]
                        } else {
                            alpha.abs() > a
                        }
                    }
                    None if lim <= step + 1e-12 => true,
                    _ => false,
                };
                if take {
                    step = step.min(lim);
                    leave = Some((i, alpha.abs()));
                }
            }
            if !step.is_finite() {
                return Err(Error::Numerical("LP is unbounded".into()));
            }
            for i in 0..self.m {
                let alpha = self.t[i * nc + q] * dir;
                if alpha != 0.0 {
                    let b = self.basis[i];
                    self.x[b] -= alpha * step;
                }
            }
            self.x[q] += dir * step;
            degenerate = if step <= 1e-12 { degenerate + 1 } else { 0 };

            match leave {
                None => {
                    // bound flip
                    self.x[q] = if dir > 0.0 { self.upper[q] } else { 0.0 };
                }
                Some((r, _)) => {
                    let out = self.basis[r];
                    let alpha = self.t[r * nc + q] * dir;
                    self.x[out] = if alpha > 0.0 { 0.0 } else { self.upper[out] };
                    self.pivot(r, q);
                    let dq = d[q];
                    if dq != 0.0 {
                        let row = &self.t[r * nc..(r + 1) * nc];
                        for (dj, &tj) in d.iter_mut().zip(row) {
                            *dj -= dq * tj;
                        }
                    }
                    d[q] = 0.0;
                    self.pivots += 1;
                    self.since_refactor += 1;
                    if self.pivots - start > MAX_PIVOTS {
                        return Err(Error::Numerical("simplex pivot limit reached".into()));
                    }
                    if self.since_refactor >= REFACTOR_EVERY {
                        self.refactor()?;
                        d = self.reduced_costs(cost);
                    }
                }
            }
        }
    }

    fn pivot(&mut self, r: usize, q: usize) {
        let nc = self.ncols;
        let p = self.t[r * nc + q];
        for v in &mut self.t[r * nc..(r + 1) * nc] {
            *v /= p;
        }
        let (before, rest) = self.t.split_at_mut(r * nc);
        let (prow, after) = rest.split_at_mut(nc);
        for row in before.chunks_mut(nc).chain(after.chunks_mut(nc)) {
            let f = row[q];
            if f != 0.0 {
                for (v, &pv) in row.iter_mut().zip(prow.iter()) {
                    *v -= f * pv;
                }
                row[q] = 0.0;
            }
        }
        let out = self.basis[r];
        self.is_basic[out] = false;
        self.is_basic[q] = true;
        self.basis[r] = q;
    }

    /// Recomputes `B^{-1} A` and the basic values from the original data.
    fn refactor(&mut self) -> Result<()> {
        let (m, nc) = (self.m, self.ncols);
        self.since_refactor = 0;
        if m == 0 {
            return Ok(());
        }
        let b = DMatrix::from_fn(m, m, |i, k| self.a0[i * nc + self.basis[k]]);
        let lu = b.lu();
        let a = DMatrix::from_fn(m, nc, |i, j| self.a0[i * nc + j]);
        let t = lu
            .solve(&a)
            .ok_or_else(|| Error::Numerical("simplex basis became singular".into()))?;
        let mut rhs = DVector::from_column_slice(&self.b0);
        for j in 0..nc {
            if !self.is_basic[j] && self.x[j] != 0.0 {
                for i in 0..m {
                    rhs[i] -= self.a0[i * nc + j] * self.x[j];
                }
            }
        }
        let xb = lu
            .solve(&rhs)
            .ok_or_else(|| Error::Numerical("simplex basis became singular".into()))?;
        for i in 0..m {
            for j in 0..nc {
                self.t[i * nc + j] = t[(i, j)];
            }
            self.t[i * nc + self.basis[i]] = 1.0;
            self.x[self.basis[i]] = xb[i];
        }
        Ok(())
    }
}
