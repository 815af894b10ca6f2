//! Sequential edge randomized rounding of a relaxed solution.
//!
//! A rollout walks from the start depot, repeatedly choosing the next area
//! with probability proportional to the relaxed flow on the connecting
//! edge, among unvisited neighbours from which the end depot is still
//! affordable. The best of `L` rollouts by `lambda_min` is returned.
//!
//! Rollout `k` draws from ChaCha stream `k` of the configured seed, so the
//! result does not depend on how rollouts are spread over threads.

use std::collections::HashMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::estimator::InfoObjective;
use crate::graph::{visit_vector, MonitorGraph, Path, BUDGET_EPS};
use crate::model::VisitVector;
use crate::relaxation::RelaxedSolution;

/// Largest visit set reordered exactly.
pub const REORDER_MAX_NODES: usize = 12;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoundingConfig {
    pub iterations: usize,
    pub seed: u64,
    pub allow_reorder: bool,
}

impl Default for RoundingConfig {
    fn default() -> Self {
        Self {
            iterations: 500,
            seed: 0,
            allow_reorder: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Next {
    Node(usize),
    Stop,
}

#[derive(Debug, Clone)]
pub struct RoundingResult {
    pub path: Path,
    pub lambda: f64,
    /// Rollout that produced the returned path.
    pub best_iteration: usize,
}

/// Samples the next area after `current`.
///
/// `visited` is indexed by vertex. Admissible candidates are unvisited area
/// neighbours `j` with `t(current, j) + t(j, N+1) <= remaining`. They are
/// drawn proportionally to `weight(current, j)`; if every admissible weight
/// is zero the draw is uniform.
pub fn roulette_next<R: Rng, W: Fn(usize, usize) -> f64>(
    current: usize,
    weight: W,
    visited: &[bool],
    g: &MonitorGraph,
    remaining: f64,
    rng: &mut R,
) -> Next {
    let end = g.end();
    let mut cands: Vec<(usize, f64)> = Vec::new();
    for &j in g.neighbors(current) {
        if !g.is_area(j) || visited[j] {
            continue;
        }
        let need = g.edge(current, j).unwrap() + g.edge(j, end).unwrap();
        if need <= remaining + BUDGET_EPS {
            cands.push((j, weight(current, j).max(0.0)));
        }
    }
    if cands.is_empty() {
        return Next::Stop;
    }
    let total: f64 = cands.iter().map(|c| c.1).sum();
    if total <= 0.0 {
        return Next::Node(cands[rng.random_range(0..cands.len())].0);
    }
    let mut r = rng.random_range(0.0..total);
    for &(j, w) in &cands {
        if r < w {
            return Next::Node(j);
        }
        r -= w;
    }
    // rounding left r at the very top of the wheel
    Next::Node(cands.iter().rev().find(|c| c.1 > 0.0).unwrap().0)
}

/// One rounding pass; always returns a path within `budget`.
pub fn rollout<R: Rng>(relaxed: &RelaxedSolution, g: &MonitorGraph, budget: f64, rng: &mut R) -> Result<Path> {
    let mut visited = vec![false; g.n_vertices()];
    let mut seq = vec![0];
    let mut cost = 0.0;
    let mut cur = 0;
    visited[0] = true;
    while let Next::Node(j) = roulette_next(cur, |i, j| relaxed.flow(i, j), &visited, g, budget - cost, rng) {
        cost += g.edge(cur, j).unwrap();
        visited[j] = true;
        seq.push(j);
        cur = j;
    }
    if cur == 0 {
        return Err(Error::NoFeasiblePath { budget });
    }
    seq.push(g.end());
    Ok(Path::from_sequence(seq, g))
}

/// RNG of rollout `iteration`.
pub fn rollout_rng(seed: u64, iteration: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(iteration as u64);
    rng
}

/// Best of `cfg.iterations` rollouts; ties keep the earliest rollout.
pub fn randomized_rounding(
    relaxed: &RelaxedSolution,
    g: &MonitorGraph,
    objective: &InfoObjective,
    budget: f64,
    cfg: &RoundingConfig,
) -> Result<RoundingResult> {
    if cfg.iterations == 0 {
        return Err(Error::InvalidArgument("rounding needs at least one iteration".into()));
    }
    let paths: Vec<Path> = (0..cfg.iterations)
        .into_par_iter()
        .map(|k| rollout(relaxed, g, budget, &mut rollout_rng(cfg.seed, k)))
        .collect::<Result<_>>()?;
    let n = g.n_areas();
    let sets: Vec<VisitVector> = paths.iter().map(|p| visit_vector(p, n)).collect();
    let mut unique: Vec<&VisitVector> = Vec::new();
    let mut index: HashMap<&VisitVector, usize> = HashMap::new();
    for s in &sets {
        index.entry(s).or_insert_with(|| {
            unique.push(s);
            unique.len() - 1
        });
    }
    let values: Vec<f64> = unique
        .par_iter()
        .map(|s| objective.lambda_min(s))
        .collect::<Result<_>>()?;
    let mut best = 0;
    let mut best_lambda = values[index[&sets[0]]];
    for (k, s) in sets.iter().enumerate().skip(1) {
        let l = values[index[s]];
        if l > best_lambda {
            best = k;
            best_lambda = l;
        }
    }
    let mut path = paths[best].clone();
    let mut lambda = best_lambda;
    if cfg.allow_reorder {
        path = reorder_path(&path, g, budget, objective)?;
        lambda = objective.lambda_min(&visit_vector(&path, n))?;
    }
    Ok(RoundingResult {
        path,
        lambda,
        best_iteration: best,
    })
}

/// `(1 - lambda_h / lambda_opt) * 100`.
pub fn degradation(lambda_h: f64, lambda_opt: f64) -> Result<f64> {
    if !(lambda_opt > 0.0) {
        return Err(Error::InvalidArgument(format!(
            "reference objective must be positive, got {lambda_opt}"
        )));
    }
    Ok((1.0 - lambda_h / lambda_opt) * 100.0)
}

/// Cheapest depot-to-depot order of `areas` using only graph edges among
/// them, by dynamic programming over subsets. `None` if no such order exists.
pub fn cheapest_order(areas: &[usize], g: &MonitorGraph) -> Option<Path> {
    let k = areas.len();
    if k == 0 || k > REORDER_MAX_NODES {
        return None;
    }
    let full = (1usize << k) - 1;
    let inf = f64::INFINITY;
    let mut dp = vec![inf; (full + 1) * k];
    let mut parent = vec![usize::MAX; (full + 1) * k];
    for (i, &a) in areas.iter().enumerate() {
        dp[(1 << i) * k + i] = g.edge(0, a).unwrap_or(inf);
    }
    for mask in 1..=full {
        for last in 0..k {
            let here = dp[mask * k + last];
            if mask >> last & 1 == 0 || here.is_infinite() {
                continue;
            }
            for next in 0..k {
                if mask >> next & 1 == 1 {
                    continue;
                }
                let Some(t) = g.edge(areas[last], areas[next]) else { continue };
                let m2 = mask | 1 << next;
                let c = here + t;
                if c < dp[m2 * k + next] {
                    dp[m2 * k + next] = c;
                    parent[m2 * k + next] = last;
                }
            }
        }
    }
    let end = g.end();
    let (last, _) = (0..k)
        .map(|i| (i, dp[full * k + i] + g.edge(areas[i], end).unwrap_or(inf)))
        .filter(|c| c.1.is_finite())
        .min_by(|a, b| a.1.total_cmp(&b.1))?;
    let mut order = Vec::with_capacity(k);
    let (mut mask, mut cur) = (full, last);
    while cur != usize::MAX {
        order.push(areas[cur]);
        let p = parent[mask * k + cur];
        mask &= !(1 << cur);
        cur = p;
    }
    order.reverse();
    let mut seq = vec![0];
    seq.extend(order);
    seq.push(end);
    Some(Path::from_sequence(seq, g))
}

/// Reorders the visits of `path` at minimum cost, then keeps adding the
/// area with the best `lambda` gain per extra second while the reordered
/// flight stays within budget.
pub fn reorder_path(path: &Path, g: &MonitorGraph, budget: f64, objective: &InfoObjective) -> Result<Path> {
    let n = g.n_areas();
    let mut current = path.clone();
    if let Some(p) = cheapest_order(path.interior(), g) {
        if p.cost < current.cost - 1e-9 {
            current = p;
        }
    }
    let mut lambda = objective.lambda_min(&visit_vector(&current, n))?;
    loop {
        let base: Vec<usize> = current.interior().to_vec();
        if base.len() >= REORDER_MAX_NODES {
            break;
        }
        let mut best: Option<(f64, f64, Path)> = None;
        for a in 1..=n {
            if base.contains(&a) {
                continue;
            }
            let mut set = base.clone();
            set.push(a);
            set.sort_unstable();
            let Some(p) = cheapest_order(&set, g) else { continue };
            if p.cost > budget + BUDGET_EPS {
                continue;
            }
            let l = objective.lambda_min(&visit_vector(&p, n))?;
            let gain = l - lambda;
            if gain <= 0.0 {
                continue;
            }
            let extra = (p.cost - current.cost).max(1e-12);
            let score = gain / extra;
            if best.as_ref().is_none_or(|b| score > b.0) {
                best = Some((score, l, p));
            }
        }
        match best {
            Some((_, l, p)) => {
                current = p;
                lambda = l;
            }
            None => break,
        }
    }
    Ok(current)
}
