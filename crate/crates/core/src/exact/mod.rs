//! Exact information-maximising flight by branch and bound.
//!
//! Simple paths from the start depot are enumerated depth first with
//! neighbours in ascending order, so sequences come out in lexicographic
//! order. Three prunings keep the search small:
//!
//! * a branch is cut once it can no longer reach the end depot in budget;
//! * two partial paths with the same visited set and last vertex share all
//!   completions, so only the cheaper one is expanded;
//! * `lambda_min` is monotone in the visit set, so adding every area still
//!   reachable in budget bounds every completion from above.
//!
//! Ties in `lambda_min` go to the cheaper flight, then to the
//! lexicographically smaller sequence.

mod encoding;
mod export;

use std::collections::HashMap;

pub use encoding::{
    verify_assignment, DirectedEdge, LinearConstraint, MisdpEncoding, Sense, Var,
};
pub use export::{export_misdp, parse_misdp, MisdpDocument, ParsedConstraint};

use crate::error::{Error, Result};
use crate::estimator::InfoObjective;
use crate::graph::{MonitorGraph, Path, BUDGET_EPS};
use crate::linalg;

/// Two flights whose costs differ by less than this are equally expensive.
pub const COST_TIE_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExactConfig {
    pub max_areas: usize,
    /// Upper limit on the number of areas a single flight could visit.
    pub max_visits: usize,
    /// Use the reachable-set upper bound.
    pub bound_pruning: bool,
}

impl Default for ExactConfig {
    fn default() -> Self {
        Self {
            max_areas: 40,
            max_visits: 12,
            bound_pruning: true,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExactSolution {
    pub path: Path,
    pub lambda: f64,
    /// Partial paths expanded by the search.
    pub nodes: usize,
    /// Distinct visit sets whose objective was evaluated.
    pub evaluations: usize,
}

/// Most areas any flight within `budget` can visit.
pub fn max_reachable_visits(g: &MonitorGraph, budget: f64) -> usize {
    let (_, single) = g.cheapest_single_visit();
    if single > budget + BUDGET_EPS {
        return 0;
    }
    let hop = g
        .interior_edges()
        .iter()
        .map(|e| e.2)
        .fold(f64::INFINITY, f64::min);
    let n = g.n_areas();
    if hop.is_infinite() {
        return 1;
    }
    if hop <= 0.0 {
        return n;
    }
    let extra = ((budget + BUDGET_EPS - single) / hop).floor() as usize;
    (1 + extra).min(n)
}

pub fn solve_exact(g: &MonitorGraph, objective: &InfoObjective, budget: f64) -> Result<ExactSolution> {
    solve_exact_with(g, objective, budget, &ExactConfig::default())
}

pub fn solve_exact_with(
    g: &MonitorGraph,
    objective: &InfoObjective,
    budget: f64,
    cfg: &ExactConfig,
) -> Result<ExactSolution> {
    let n = g.n_areas();
    if objective.n_areas() != n {
        return Err(Error::Dimension(format!(
            "objective has {} areas, graph has {n}",
            objective.n_areas()
        )));
    }
    if n > cfg.max_areas || n > 64 {
        return Err(Error::InstanceTooLarge(format!(
            "{n} areas exceed the exact solver limit of {}",
            cfg.max_areas.min(64)
        )));
    }
    let reach = max_reachable_visits(g, budget);
    if reach == 0 {
        return Err(Error::NoFeasiblePath { budget });
    }
    if reach > cfg.max_visits {
        return Err(Error::InstanceTooLarge(format!(
            "up to {reach} visits fit in the budget, exact solver limit is {}",
            cfg.max_visits
        )));
    }
    let mut s = Search {
        g,
        obj: objective,
        budget: budget + BUDGET_EPS,
        to_end: (0..=n + 1).map(|v| g.edge(v, g.end()).unwrap_or(f64::INFINITY)).collect(),
        dist: g.interior_distances(),
        bound: cfg.bound_pruning,
        weights: vec![0.0; n],
        lambda_cache: HashMap::new(),
        bound_cache: HashMap::new(),
        memo: HashMap::new(),
        seq: vec![0],
        best: None,
        nodes: 0,
    };
    for &j in g.neighbors(0) {
        let cost = g.edge(0, j).unwrap();
        if cost + s.to_end[j] > s.budget || !s.claim(1 << (j - 1), j, cost) {
            continue;
        }
        s.seq.push(j);
        s.expand(j, 1 << (j - 1), cost)?;
        s.seq.pop();
    }
    let (lambda, _, seq) = s.best.ok_or(Error::NoFeasiblePath { budget })?;
    Ok(ExactSolution {
        path: Path::from_sequence(seq, g),
        lambda,
        nodes: s.nodes,
        evaluations: s.lambda_cache.len(),
    })
}

struct Search<'a> {
    g: &'a MonitorGraph,
    obj: &'a InfoObjective,
    budget: f64,
    to_end: Vec<f64>,
    dist: Vec<Vec<f64>>,
    bound: bool,
    weights: Vec<f64>,
    lambda_cache: HashMap<u64, f64>,
    bound_cache: HashMap<u64, f64>,
    memo: HashMap<(u64, usize), f64>,
    seq: Vec<usize>,
    best: Option<(f64, f64, Vec<usize>)>,
    nodes: usize,
}

impl Search<'_> {
    fn eval(&mut self, mask: u64) -> Result<f64> {
        if let Some(&l) = self.lambda_cache.get(&mask) {
            return Ok(l);
        }
        let l = self.eval_uncached(mask)?;
        self.lambda_cache.insert(mask, l);
        Ok(l)
    }

    fn eval_uncached(&mut self, mask: u64) -> Result<f64> {
        for (i, w) in self.weights.iter_mut().enumerate() {
            *w = if mask >> i & 1 == 1 { 1.0 } else { 0.0 };
        }
        linalg::min_eigenvalue(&self.obj.weighted(&self.weights))
    }

    /// Records `(set, last)` at `cost`; false if a cheaper twin was already expanded.
    fn claim(&mut self, mask: u64, last: usize, cost: f64) -> bool {
        match self.memo.get(&(mask, last)) {
            Some(&prev) if prev <= cost + COST_TIE_EPS => false,
            _ => {
                self.memo.insert((mask, last), cost);
                true
            }
        }
    }

    fn offer(&mut self, lambda: f64, cost: f64) {
        let better = match &self.best {
            None => true,
            Some((bl, bc, bseq)) => {
                if lambda != *bl {
                    lambda > *bl
                } else if (cost - bc).abs() > COST_TIE_EPS {
                    cost < *bc
                } else {
                    let mut cand = self.seq.clone();
                    cand.push(self.g.end());
                    cand < *bseq
                }
            }
        };
        if better {
            let mut seq = self.seq.clone();
            seq.push(self.g.end());
            self.best = Some((lambda, cost, seq));
        }
    }

    fn expand(&mut self, cur: usize, mask: u64, cost: f64) -> Result<()> {
        self.nodes += 1;
        let close = cost + self.to_end[cur];
        if close <= self.budget {
            let l = self.eval(mask)?;
            self.offer(l, close);
        }
        if self.bound {
            let mut reach = mask;
            let row = &self.dist[cur - 1];
            for a in 0..self.g.n_areas() {
                if mask >> a & 1 == 0 && cost + row[a] + self.to_end[a + 1] <= self.budget {
                    reach |= 1 << a;
                }
            }
            if reach == mask {
                return Ok(());
            }
            let ub = match self.bound_cache.get(&reach) {
                Some(&v) => v,
                None => {
                    let v = match self.lambda_cache.get(&reach) {
                        Some(&v) => v,
                        None => self.eval_uncached(reach)?,
                    };
                    self.bound_cache.insert(reach, v);
                    v
                }
            };
            if let Some((best, _, _)) = &self.best {
                if ub < *best {
                    return Ok(());
                }
            }
        }
        let nbrs: Vec<usize> = self.g.neighbors(cur).to_vec();
        for j in nbrs {
            if !self.g.is_area(j) || mask >> (j - 1) & 1 == 1 {
                continue;
            }
            let next = cost + self.g.edge(cur, j).unwrap();
            if next + self.to_end[j] > self.budget {
                continue;
            }
            let m = mask | 1 << (j - 1);
            if !self.claim(m, j, next) {
                continue;
            }
            self.seq.push(j);
            self.expand(j, m, next)?;
            self.seq.pop();
        }
        Ok(())
    }
}
