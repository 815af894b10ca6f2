//! Continuous relaxation of the flight problem solved by Frank-Wolfe.
//!
//! With `q` relaxed to `[0, 1]` and `u` to reals, the feasible set is a
//! polytope and `f(q) = lambda_min(Y(gamma(q)))` is concave, where
//! `gamma_i(q)` is the flow into area `i`. Each iteration takes the smallest
//! eigenvector `v` of `Y`, uses `v^T H_i v` as the supergradient on every edge
//! entering area `i`, solves the linear subproblem with the simplex in
//! [`simplex`], and line-searches the segment towards the LP vertex.

pub mod simplex;

use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::estimator::InfoObjective;
use crate::exact::{MisdpEncoding, Var};
use crate::graph::{MonitorGraph, Path};
use crate::linalg;

pub use simplex::{solve_lp, LinearProgram, LpRow, LpSolution, SimplexSolver};

/// Tolerance of the golden-section line search on `[0, 1]`.
pub const LINE_SEARCH_TOL: f64 = 1e-6;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelaxConfig {
    /// Absolute gap at which to stop; `None` means `1e-4 * alpha`.
    pub tol: Option<f64>,
    pub max_iters: usize,
}

impl Default for RelaxConfig {
    fn default() -> Self {
        Self {
            tol: None,
            max_iters: 500,
        }
    }
}

#[derive(Debug, Clone)]
pub struct RelaxedSolution {
    pub encoding: MisdpEncoding,
    /// Indexed like `encoding.q_edges`.
    pub q_r: Vec<f64>,
    pub u_r: Vec<f64>,
    pub alpha_r: f64,
    pub fw_gap: f64,
    /// Smallest `f(q_k) + gap_k` seen; an upper bound on the relaxed optimum.
    pub upper_bound: f64,
    pub iterations: usize,
}

impl RelaxedSolution {
    /// Relaxed flow on directed edge `from -> to`, zero if the edge is not a variable.
    pub fn flow(&self, from: usize, to: usize) -> f64 {
        self.encoding.q_index(from, to).map_or(0.0, |k| self.q_r[k])
    }

    /// Fractional visit weight of each area.
    pub fn visit_weights(&self) -> Vec<f64> {
        visit_weights(&self.encoding, &self.q_r)
    }

    /// Writes `i,j,q_r` for every directed edge variable.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "q_r"])?;
        for (e, q) in self.encoding.q_edges.iter().zip(&self.q_r) {
            w.write_record([e.from.to_string(), e.to.to_string(), q.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Relaxed constraint system over `[q..., u...]`, zero objective.
pub fn build_relaxed_polytope(g: &MonitorGraph, budget: f64) -> LinearProgram {
    relaxed_lp(&MisdpEncoding::build(g, budget))
}

fn relaxed_lp(enc: &MisdpEncoding) -> LinearProgram {
    let nq = enc.n_q();
    let n = enc.n_areas;
    let rows = enc
        .constraints
        .iter()
        .map(|c| LpRow {
            coeffs: c
                .terms
                .iter()
                .filter_map(|&(v, coef)| match v {
                    Var::Q(k) => Some((k, coef)),
                    Var::U(i) => Some((nq + i, coef)),
                    Var::Alpha => None,
                })
                .collect(),
            sense: c.sense,
            rhs: c.rhs,
        })
        .collect();
    let mut lower = vec![0.0; nq];
    let mut upper = vec![1.0; nq];
    lower.extend(std::iter::repeat_n(enc.u_bounds.0, n));
    upper.extend(std::iter::repeat_n(enc.u_bounds.1, n));
    LinearProgram {
        objective: vec![0.0; nq + n],
        rows,
        lower,
        upper,
    }
}

fn visit_weights(enc: &MisdpEncoding, q: &[f64]) -> Vec<f64> {
    let mut w = vec![0.0; enc.n_areas];
    for (e, &x) in enc.q_edges.iter().zip(q) {
        if e.to >= 1 && e.to <= enc.n_areas {
            w[e.to - 1] += x;
        }
    }
    // tiny negative drift would break the PSD structure of Y
    for x in &mut w {
        *x = x.clamp(0.0, 1.0);
    }
    w
}

/// Supergradient of `f` in `q` at a point whose smallest eigenvector is `v`.
pub fn supergradient(enc: &MisdpEncoding, objective: &InfoObjective, v: &nalgebra::DVector<f64>) -> Vec<f64> {
    let gains = objective.directional_gains(v);
    enc.q_edges
        .iter()
        .map(|e| {
            if e.to >= 1 && e.to <= enc.n_areas {
                gains[e.to - 1]
            } else {
                0.0
            }
        })
        .collect()
}

/// `f(q) = lambda_min(Y(gamma(q)))`.
pub fn relaxed_objective(enc: &MisdpEncoding, objective: &InfoObjective, q: &[f64]) -> Result<f64> {
    objective.lambda_min_weighted(&visit_weights(enc, q))
}

pub fn solve_relaxation(
    g: &MonitorGraph,
    objective: &InfoObjective,
    budget: f64,
    cfg: &RelaxConfig,
) -> Result<RelaxedSolution> {
    if objective.n_areas() != g.n_areas() {
        return Err(Error::Dimension(format!(
            "objective has {} areas, graph has {}",
            objective.n_areas(),
            g.n_areas()
        )));
    }
    let (j0, single) = g.cheapest_single_visit();
    if single > budget + crate::graph::BUDGET_EPS {
        return Err(Error::NoFeasiblePath { budget });
    }
    let enc = MisdpEncoding::build(g, budget);
    let nq = enc.n_q();
    let n = enc.n_areas;
    let lp = relaxed_lp(&enc);
    let mut solver = SimplexSolver::new(&lp)?;

    let start = Path::from_sequence(vec![0, j0, g.end()], g);
    let (q0, u0) = enc.encode_path(&start).expect("depot edges exist");
    let mut x: Vec<f64> = q0.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    x.extend(u0.iter().map(|&u| u as f64));

    let eval = |x: &[f64]| -> Result<f64> { relaxed_objective(&enc, objective, &x[..nq]) };
    let mut fx = eval(&x)?;
    let mut best = (fx, x.clone());
    let mut upper_bound = f64::INFINITY;
    let mut gap = f64::INFINITY;
    let mut iterations = 0;
    let mut c = vec![0.0; nq + n];
    while iterations < cfg.max_iters {
        let y = objective.weighted(&visit_weights(&enc, &x[..nq]));
        let eig = linalg::symmetric_eigen(&y)?;
        let (_, v) = eig.min_pair();
        c[..nq].copy_from_slice(&supergradient(&enc, objective, &v));
        let s = solver.maximize(&c)?.x;
        gap = (0..nq).map(|k| c[k] * (s[k] - x[k])).sum::<f64>().max(0.0);
        upper_bound = upper_bound.min(fx + gap);
        let tol = cfg.tol.unwrap_or(1e-4 * best.0.abs());
        if gap <= tol {
            break;
        }
        iterations += 1;
        let point = |t: f64| -> Vec<f64> { x.iter().zip(&s).map(|(a, b)| a + t * (b - a)).collect() };
        // Y(x + t (s - x)) = Y(x) + t dY; in the eigenbasis of Y(x) the
        // matrix starts diagonal, so the Jacobi sweeps are short
        let dy = objective.weighted(&visit_weights(&enc, &s[..nq])) - &y;
        let mut m = eig.vectors.transpose() * dy * &eig.vectors;
        linalg::symmetrize(&mut m);
        let lam = DMatrix::from_diagonal(&DVector::from_column_slice(&eig.values));
        let (t, _) = line_search(|t| linalg::min_eigenvalue(&(&lam + &m * t)), fx)?;
        if t > 0.0 {
            x = point(t);
            fx = eval(&x)?;
        }
        if fx > best.0 {
            best = (fx, x.clone());
        }
        if t == 0.0 {
            // no ascent along the supergradient vertex: f is nonsmooth here
            break;
        }
    }
    let (alpha_r, x) = best;
    Ok(RelaxedSolution {
        q_r: x[..nq].to_vec(),
        u_r: x[nq..].to_vec(),
        alpha_r,
        fw_gap: gap,
        upper_bound,
        iterations,
        encoding: enc,
    })
}

/// Maximises a concave `phi` on `[0, 1]`; returns `(t, phi(t))` with
/// `phi(t) >= phi(0) = f0`.
fn line_search<F: FnMut(f64) -> Result<f64>>(mut phi: F, f0: f64) -> Result<(f64, f64)> {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let f1 = phi(1.0)?;
    let (mut a, mut b) = (0.0f64, 1.0f64);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut p1 = phi(x1)?;
    let mut p2 = phi(x2)?;
    while b - a > LINE_SEARCH_TOL {
        if p1 < p2 {
            a = x1;
            x1 = x2;
            p1 = p2;
            x2 = a + INV_PHI * (b - a);
            p2 = phi(x2)?;
        } else {
            b = x2;
            x2 = x1;
            p2 = p1;
            x1 = b - INV_PHI * (b - a);
            p1 = phi(x1)?;
        }
    }
    let mut best = (0.0, f0);
    for cand in [(x1, p1), (x2, p2), (1.0, f1)] {
        if cand.1 > best.1 {
            best = cand;
        }
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exact::solve_exact;
    use crate::graph::build_grid;
    use crate::instance::random_instance;
    use crate::model::VisitVector;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn smallest_grid_polytope_shape() {
        let g = build_grid(1, 2, 10.0, [0.0, 0.0], 2.0).unwrap();
        let lp = build_relaxed_polytope(&g, 100.0);
        assert_eq!(lp.n_vars(), 6 + 2);
        // start and end equalities touch exactly the depot edges
        assert_eq!(lp.rows[0].coeffs.len(), 2);
        assert_eq!(lp.rows[1].coeffs.len(), 2);
    }

    #[test]
    fn integral_paths_lie_in_polytope() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let inst = random_instance(3, 3, &mut rng).unwrap();
        let g = &inst.graph;
        let enc = MisdpEncoding::build(g, 1e6);
        let p = Path::from_sequence(vec![0, 1, 2, 3, 6, 5, 4, 7, 8, 9, g.end()], g);
        let (q, u) = enc.encode_path(&p).unwrap();
        let qf: Vec<f64> = q.iter().map(|&b| b as u8 as f64).collect();
        let uf: Vec<f64> = u.iter().map(|&x| x as f64).collect();
        assert_eq!(enc.first_violation(&qf, &uf, 1e-9), None);
    }

    #[test]
    fn polytope_empty_iff_no_single_visit() {
        let g = build_grid(3, 3, 10.0, [0.0, 0.0], 2.0).unwrap();
        let (_, single) = g.cheapest_single_visit();
        for budget in [single - 1.0, single - 1e-6, single, single + 5.0] {
            let feasible = solve_lp(&build_relaxed_polytope(&g, budget)).is_ok();
            assert_eq!(feasible, budget >= single, "budget {budget}");
        }
    }

    #[test]
    fn large_budget_reaches_all_visits() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        for _ in 0..5 {
            let inst = random_instance(2, 3, &mut rng).unwrap();
            let obj = inst.objective().unwrap();
            let sol = solve_relaxation(&inst.graph, &obj, 1e6, &RelaxConfig::default()).unwrap();
            let all = obj.lambda_min(&VisitVector::all(6)).unwrap();
            assert!((sol.alpha_r - all).abs() <= 1e-9 * all, "{} vs {all}", sol.alpha_r);
        }
    }

    #[test]
    fn single_area_grid() {
        let g = build_grid(1, 1, 10.0, [0.0, 0.0], 2.0).unwrap();
        let m = crate::model::DiffusionField::new(1, 1).build().unwrap();
        let obj = InfoObjective::new(&nalgebra::DMatrix::identity(1, 1), &m).unwrap();
        let sol = solve_relaxation(&g, &obj, 100.0, &RelaxConfig::default()).unwrap();
        assert_eq!(sol.alpha_r, obj.lambda_min(&VisitVector::all(1)).unwrap());
        assert!(matches!(
            solve_relaxation(&g, &obj, 1.0, &RelaxConfig::default()),
            Err(Error::NoFeasiblePath { .. })
        ));
    }

    #[test]
    fn relaxation_bounds_exact_on_3x3() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for case in 0..30 {
            let inst = random_instance(3, 3, &mut rng).unwrap();
            let obj = inst.objective().unwrap();
            let exact = solve_exact(&inst.graph, &obj, inst.budget).unwrap();
            let sol = solve_relaxation(&inst.graph, &obj, inst.budget, &RelaxConfig::default()).unwrap();
            let slack = (sol.alpha_r - exact.lambda) / exact.lambda.abs();
            assert!(slack >= -1e-6, "case {case}: slack {slack}");
            assert!(sol.upper_bound >= sol.alpha_r);
            let viol = sol.encoding.first_violation(&sol.q_r, &sol.u_r, 1e-7);
            assert_eq!(viol, None, "case {case}");
            let direct = relaxed_objective(&sol.encoding, &obj, &sol.q_r).unwrap();
            assert_eq!(direct, sol.alpha_r);
        }
    }

    #[test]
    fn supergradient_inequality_on_random_pairs() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let inst = random_instance(3, 3, &mut rng).unwrap();
        let obj = inst.objective().unwrap();
        let enc = MisdpEncoding::build(&inst.graph, inst.budget);
        let lp = relaxed_lp(&enc);
        let nq = enc.n_q();
        // random polytope points from LP vertices with random objectives
        let mut solver = SimplexSolver::new(&lp).unwrap();
        let mut vertices = Vec::new();
        for _ in 0..20 {
            let c: Vec<f64> = (0..lp.n_vars()).map(|_| rng.random_range(-1.0..1.0)).collect();
            vertices.push(solver.maximize(&c).unwrap().x);
        }
        let point = |rng: &mut ChaCha8Rng| -> Vec<f64> {
            let w: Vec<f64> = vertices.iter().map(|_| rng.random_range(0.0..1.0)).collect();
            let total: f64 = w.iter().sum();
            (0..nq)
                .map(|k| vertices.iter().zip(&w).map(|(v, wi)| v[k] * wi).sum::<f64>() / total)
                .collect()
        };
        for _ in 0..100 {
            let q = point(&mut rng);
            let q2 = point(&mut rng);
            let y = obj.weighted(&visit_weights(&enc, &q));
            let (fq, v) = linalg::symmetric_eigen(&y).unwrap().min_pair();
            let g = supergradient(&enc, &obj, &v);
            let fq2 = relaxed_objective(&enc, &obj, &q2).unwrap();
            let lin: f64 = (0..nq).map(|k| g[k] * (q2[k] - q[k])).sum();
            assert!(fq2 <= fq + lin + 1e-9);
        }
    }

    #[test]
    fn line_search_finds_concave_peak() {
        let (t, f) = line_search(|t| Ok(-(t - 0.3f64).powi(2)), -0.09).unwrap();
        assert!((t - 0.3).abs() < 1e-6);
        assert!(f <= 0.0);
        let (t, _) = line_search(|t| Ok(t), 0.0).unwrap();
        assert_eq!(t, 1.0);
        let (t, _) = line_search(|t| Ok(-t), 0.0).unwrap();
        assert_eq!(t, 0.0);
    }

    #[test]
    fn csv_lists_every_edge() {
        let g = build_grid(1, 2, 10.0, [0.0, 0.0], 2.0).unwrap();
        let m = crate::model::DiffusionField::new(1, 2).build().unwrap();
        let obj = InfoObjective::new(&nalgebra::DMatrix::identity(2, 2), &m).unwrap();
        let sol = solve_relaxation(&g, &obj, 100.0, &RelaxConfig::default()).unwrap();
        let mut buf = Vec::new();
        sol.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("i,j,q_r\n"));
        assert_eq!(text.lines().count(), 1 + 6);
    }
}
