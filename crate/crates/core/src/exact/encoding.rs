//! Mixed-integer encoding of a flight on the monitoring graph.
//!
//! Binary `q_ij` marks directed edge `i -> j` as flown; integer `u_i` is the
//! visiting order of area `i`. Only orientations that can carry flow are
//! materialised: `0 -> j`, `j -> N+1` and both directions of area-to-area
//! edges. Edges into vertex `0` or out of `N + 1` are therefore fixed at zero.
//!
//! Constraints:
//!
//! ```text
//! sum_j q_0j = 1,  sum_j q_j,N+1 = 1                        (start, end)
//! sum_in q_ip = sum_out q_pj <= 1          for every area p  (flow_p, once_p)
//! sum t_ij q_ij <= T_max                                     (budget)
//! 1 <= u_i <= N
//! u_i - u_j + N q_ij <= N - 1              for area edges    (mtz_i_j)
//! ```
//!
//! The order constraint uses `N` as its big-M so that a flight through all
//! `N` areas, ordered `1..=N`, remains admissible.

use crate::graph::{MonitorGraph, Path, BUDGET_EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    /// Index into [`MisdpEncoding::q_edges`].
    Q(usize),
    /// 0-based area index.
    U(usize),
    Alpha,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DirectedEdge {
    pub from: usize,
    pub to: usize,
    pub time: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Eq,
    Ge,
}

impl Sense {
    pub fn as_str(self) -> &'static str {
        match self {
            Sense::Le => "le",
            Sense::Eq => "eq",
            Sense::Ge => "ge",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearConstraint {
    pub name: String,
    pub terms: Vec<(Var, f64)>,
    pub sense: Sense,
    pub rhs: f64,
}

impl LinearConstraint {
    fn lhs(&self, q: &[f64], u: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|&(v, c)| match v {
                Var::Q(k) => c * q[k],
                Var::U(i) => c * u[i],
                Var::Alpha => 0.0,
            })
            .sum()
    }

    fn holds(&self, q: &[f64], u: &[f64], tol: f64) -> bool {
        let lhs = self.lhs(q, u);
        match self.sense {
            Sense::Le => lhs <= self.rhs + tol,
            Sense::Eq => (lhs - self.rhs).abs() <= tol,
            Sense::Ge => lhs >= self.rhs - tol,
        }
    }
}

/// Variables and linear constraints of the information orienteering problem.
#[derive(Debug, Clone, PartialEq)]
pub struct MisdpEncoding {
    pub n_areas: usize,
    pub budget: f64,
    pub q_edges: Vec<DirectedEdge>,
    pub u_bounds: (f64, f64),
    pub constraints: Vec<LinearConstraint>,
}

impl MisdpEncoding {
    pub fn build(g: &MonitorGraph, budget: f64) -> Self {
        let n = g.n_areas();
        let end = g.end();
        let mut q_edges = Vec::new();
        for from in 0..end {
            for &to in g.neighbors(from) {
                if to == 0 || (from != 0 && !g.is_area(from)) {
                    continue;
                }
                q_edges.push(DirectedEdge {
                    from,
                    to,
                    time: g.edge(from, to).unwrap(),
                });
            }
        }
        let mut constraints = Vec::new();
        let out_of = |v: usize| -> Vec<usize> {
            (0..q_edges.len()).filter(|&k| q_edges[k].from == v).collect()
        };
        let into = |v: usize| -> Vec<usize> {
            (0..q_edges.len()).filter(|&k| q_edges[k].to == v).collect()
        };
        constraints.push(LinearConstraint {
            name: "start".into(),
            terms: out_of(0).into_iter().map(|k| (Var::Q(k), 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
        });
        constraints.push(LinearConstraint {
            name: "end".into(),
            terms: into(end).into_iter().map(|k| (Var::Q(k), 1.0)).collect(),
            sense: Sense::Eq,
            rhs: 1.0,
        });
        for p in 1..=n {
            let inflow = into(p);
            let mut flow: Vec<(Var, f64)> = inflow.iter().map(|&k| (Var::Q(k), 1.0)).collect();
            flow.extend(out_of(p).into_iter().map(|k| (Var::Q(k), -1.0)));
            flow.sort_by_key(|t| t.0);
            constraints.push(LinearConstraint {
                name: format!("flow_{p}"),
                terms: flow,
                sense: Sense::Eq,
                rhs: 0.0,
            });
            constraints.push(LinearConstraint {
                name: format!("once_{p}"),
                terms: inflow.into_iter().map(|k| (Var::Q(k), 1.0)).collect(),
                sense: Sense::Le,
                rhs: 1.0,
            });
        }
        constraints.push(LinearConstraint {
            name: "budget".into(),
            terms: q_edges
                .iter()
                .enumerate()
                .map(|(k, e)| (Var::Q(k), e.time))
                .collect(),
            sense: Sense::Le,
            rhs: budget,
        });
        let big_m = n as f64;
        for (k, e) in q_edges.iter().enumerate() {
            if g.is_area(e.from) && g.is_area(e.to) {
                constraints.push(LinearConstraint {
                    name: format!("mtz_{}_{}", e.from, e.to),
                    terms: vec![
                        (Var::Q(k), big_m),
                        (Var::U(e.from - 1), 1.0),
                        (Var::U(e.to - 1), -1.0),
                    ],
                    sense: Sense::Le,
                    rhs: big_m - 1.0,
                });
            }
        }
        Self {
            n_areas: n,
            budget,
            q_edges,
            u_bounds: (1.0, n as f64),
            constraints,
        }
    }

    pub fn n_q(&self) -> usize {
        self.q_edges.len()
    }

    pub fn q_index(&self, from: usize, to: usize) -> Option<usize> {
        self.q_edges.iter().position(|e| e.from == from && e.to == to)
    }

    /// Name of the first violated constraint or bound, if any.
    pub fn first_violation(&self, q: &[f64], u: &[f64], tol: f64) -> Option<String> {
        if q.len() != self.q_edges.len() || u.len() != self.n_areas {
            return Some("dimensions".into());
        }
        if let Some(k) = q.iter().position(|&x| !(-tol..=1.0 + tol).contains(&x)) {
            return Some(format!("q{k}_bounds"));
        }
        let (lo, hi) = self.u_bounds;
        if let Some(i) = u.iter().position(|&x| !(lo - tol..=hi + tol).contains(&x)) {
            return Some(format!("u{i}_bounds"));
        }
        self.constraints
            .iter()
            .find(|c| {
                let tol = if c.name == "budget" { tol.max(BUDGET_EPS) } else { tol };
                !c.holds(q, u, tol)
            })
            .map(|c| c.name.clone())
    }

    /// Integral encoding of a path: `q` along its hops, `u` its visiting positions.
    pub fn encode_path(&self, path: &Path) -> Option<(Vec<bool>, Vec<i64>)> {
        let mut q = vec![false; self.q_edges.len()];
        for w in path.seq.windows(2) {
            q[self.q_index(w[0], w[1])?] = true;
        }
        let mut u = vec![1i64; self.n_areas];
        for (pos, &v) in path.interior().iter().enumerate() {
            u[v - 1] = pos as i64 + 1;
        }
        Some((q, u))
    }

    /// Follows the selected edges from vertex `0`; `None` unless they form
    /// one simple path to `N + 1` using every selected edge.
    pub fn decode(&self, q: &[bool], g: &MonitorGraph) -> Option<Path> {
        let mut seq = vec![0usize];
        let mut used = 0;
        let mut cur = 0;
        let mut seen = vec![false; g.n_vertices()];
        seen[0] = true;
        while cur != g.end() {
            let mut next = self
                .q_edges
                .iter()
                .enumerate()
                .filter(|(k, e)| q[*k] && e.from == cur);
            let (_, e) = next.next()?;
            if next.next().is_some() || seen[e.to] {
                return None;
            }
            seen[e.to] = true;
            cur = e.to;
            seq.push(cur);
            used += 1;
        }
        (used == q.iter().filter(|&&b| b).count()).then(|| Path::from_sequence(seq, g))
    }
}

/// Checks an integral `(q, u)` assignment against every flight constraint.
pub fn verify_assignment(q: &[bool], u: &[i64], g: &MonitorGraph, budget: f64) -> bool {
    let enc = MisdpEncoding::build(g, budget);
    let qf: Vec<f64> = q.iter().map(|&b| if b { 1.0 } else { 0.0 }).collect();
    let uf: Vec<f64> = u.iter().map(|&x| x as f64).collect();
    enc.first_violation(&qf, &uf, 1e-9).is_none()
}
