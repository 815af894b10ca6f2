//! Monitoring graph over area centroids plus take-off and landing vertices.
//!
//! Vertex `0` is the start depot, vertices `1..=N` are area centroids and
//! vertex `N + 1` is the end depot. Both depots connect to every area;
//! areas connect only to adjacent areas. Edge weights are travel times in
//! seconds.

use std::io::Write;

use crate::error::{Error, Result};
use crate::model::VisitVector;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GridShape {
    pub rows: usize,
    pub cols: usize,
}

impl GridShape {
    /// Graph vertex of grid cell `(r, c)`.
    pub fn vertex(&self, r: usize, c: usize) -> usize {
        r * self.cols + c + 1
    }
    /// Grid cell of an area vertex.
    pub fn cell(&self, vertex: usize) -> (usize, usize) {
        ((vertex - 1) / self.cols, (vertex - 1) % self.cols)
    }
}

#[derive(Debug, Clone)]
pub struct MonitorGraph {
    n_areas: usize,
    coords: Vec<[f64; 2]>,
    /// Dense `(N+2)^2` weight table, `NaN` where no edge exists.
    weights: Vec<f64>,
    neighbors: Vec<Vec<usize>>,
    grid: Option<GridShape>,
}

impl MonitorGraph {
    /// Builds a graph from undirected weighted edges and validates the depot structure.
    pub fn new(n_areas: usize, coords: Vec<[f64; 2]>, edges: &[(usize, usize, f64)]) -> Result<Self> {
        if n_areas == 0 {
            return Err(Error::InvalidGraph("graph needs at least one area".into()));
        }
        let nv = n_areas + 2;
        if coords.len() != nv {
            return Err(Error::InvalidGraph(format!(
                "expected {nv} coordinates, got {}",
                coords.len()
            )));
        }
        let end = n_areas + 1;
        let mut weights = vec![f64::NAN; nv * nv];
        for &(i, j, t) in edges {
            if i >= nv || j >= nv || i == j {
                return Err(Error::InvalidGraph(format!("invalid edge ({i}, {j})")));
            }
            if !(t >= 0.0 && t.is_finite()) {
                return Err(Error::InvalidGraph(format!("edge ({i}, {j}) has weight {t}")));
            }
            if (i == 0 && j == end) || (i == end && j == 0) {
                return Err(Error::InvalidGraph("depots must not be joined directly".into()));
            }
            if !weights[i * nv + j].is_nan() {
                return Err(Error::InvalidGraph(format!("duplicate edge ({i}, {j})")));
            }
            weights[i * nv + j] = t;
            weights[j * nv + i] = t;
        }
        for a in 1..=n_areas {
            if weights[a].is_nan() || weights[a * nv + end].is_nan() {
                return Err(Error::InvalidGraph(format!(
                    "area vertex {a} must connect to both depots"
                )));
            }
        }
        let neighbors = (0..nv)
            .map(|i| (0..nv).filter(|&j| !weights[i * nv + j].is_nan()).collect())
            .collect();
        Ok(Self {
            n_areas,
            coords,
            weights,
            neighbors,
            grid: None,
        })
    }

    pub fn n_areas(&self) -> usize {
        self.n_areas
    }
    pub fn n_vertices(&self) -> usize {
        self.n_areas + 2
    }
    pub fn start(&self) -> usize {
        0
    }
    pub fn end(&self) -> usize {
        self.n_areas + 1
    }
    pub fn is_area(&self, v: usize) -> bool {
        (1..=self.n_areas).contains(&v)
    }
    pub fn coords(&self) -> &[[f64; 2]] {
        &self.coords
    }
    pub fn grid(&self) -> Option<GridShape> {
        self.grid
    }

    /// Travel time of edge `(i, j)`, if present.
    pub fn edge(&self, i: usize, j: usize) -> Option<f64> {
        let w = self.weights[i * self.n_vertices() + j];
        (!w.is_nan()).then_some(w)
    }

    /// Neighbours of `v` in ascending order.
    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    /// Undirected edges `(i, j, t)` with `i < j`, lexicographic.
    pub fn edges(&self) -> Vec<(usize, usize, f64)> {
        let nv = self.n_vertices();
        let mut out = Vec::new();
        for i in 0..nv {
            for &j in &self.neighbors[i] {
                if i < j {
                    out.push((i, j, self.weights[i * nv + j]));
                }
            }
        }
        out
    }

    /// Edges between two area vertices.
    pub fn interior_edges(&self) -> Vec<(usize, usize, f64)> {
        self.edges()
            .into_iter()
            .filter(|&(i, j, _)| self.is_area(i) && self.is_area(j))
            .collect()
    }

    /// Cost of the cheapest single-area flight `[0, j, N+1]`, with its area vertex.
    pub fn cheapest_single_visit(&self) -> (usize, f64) {
        (1..=self.n_areas)
            .map(|j| (j, self.edge(0, j).unwrap() + self.edge(j, self.end()).unwrap()))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)))
            .expect("at least one area")
    }

    /// All-pairs shortest travel times between area vertices using only
    /// area-to-area edges. Indexed by 0-based area, `inf` when disconnected.
    pub fn interior_distances(&self) -> Vec<Vec<f64>> {
        let n = self.n_areas;
        let mut d = vec![vec![f64::INFINITY; n]; n];
        for (a, row) in d.iter_mut().enumerate() {
            row[a] = 0.0;
            for &v in &self.neighbors[a + 1] {
                if self.is_area(v) {
                    row[v - 1] = row[v - 1].min(self.edge(a + 1, v).unwrap());
                }
            }
        }
        for k in 0..n {
            for i in 0..n {
                let dik = d[i][k];
                if dik.is_infinite() {
                    continue;
                }
                for j in 0..n {
                    let cand = dik + d[k][j];
                    if cand < d[i][j] {
                        d[i][j] = cand;
                    }
                }
            }
        }
        d
    }

    pub fn write_edges_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["i", "j", "t_ij"])?;
        for (i, j, t) in self.edges() {
            w.write_record([i.to_string(), j.to_string(), t.to_string()])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Geometry of a regular grid of areas and its depots.
///
/// Coordinates are in cell units: the centroid of cell `(r, c)` sits at
/// `(c + 0.5, r + 0.5)`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpec {
    pub rows: usize,
    pub cols: usize,
    /// Time to fly between adjacent centroids while sensing.
    pub cell_time_s: f64,
    pub start_depot: [f64; 2],
    /// Landing point; `None` lands where it took off.
    pub end_depot: Option<[f64; 2]>,
    /// Cruise speed to/from the depots relative to sensing speed.
    pub cruise_speed_ratio: f64,
}

impl GridSpec {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            cell_time_s: 10.0,
            start_depot: [0.0, 0.0],
            end_depot: None,
            cruise_speed_ratio: 2.0,
        }
    }

    pub fn build(&self) -> Result<MonitorGraph> {
        build_grid_with_end(
            self.rows,
            self.cols,
            self.cell_time_s,
            self.start_depot,
            self.end_depot.unwrap_or(self.start_depot),
            self.cruise_speed_ratio,
        )
    }
}

/// Regular grid with 4-neighbour adjacency and a single depot location.
pub fn build_grid(
    rows: usize,
    cols: usize,
    cell_time: f64,
    depot_xy: [f64; 2],
    cruise_speed_ratio: f64,
) -> Result<MonitorGraph> {
    build_grid_with_end(rows, cols, cell_time, depot_xy, depot_xy, cruise_speed_ratio)
}

fn build_grid_with_end(
    rows: usize,
    cols: usize,
    cell_time: f64,
    start: [f64; 2],
    end: [f64; 2],
    cruise_speed_ratio: f64,
) -> Result<MonitorGraph> {
    if rows == 0 || cols == 0 {
        return Err(Error::InvalidGraph("grid needs at least one row and column".into()));
    }
    if !(cell_time > 0.0) || !(cruise_speed_ratio > 0.0) {
        return Err(Error::InvalidGraph(
            "cell time and cruise speed ratio must be positive".into(),
        ));
    }
    let shape = GridShape { rows, cols };
    let n = rows * cols;
    let mut coords = Vec::with_capacity(n + 2);
    coords.push(start);
    for r in 0..rows {
        for c in 0..cols {
            coords.push([c as f64 + 0.5, r as f64 + 0.5]);
        }
    }
    coords.push(end);
    // sensing speed is one cell per `cell_time`
    let depot_time = |a: [f64; 2], b: [f64; 2]| {
        let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
        d * cell_time / cruise_speed_ratio
    };
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            let v = shape.vertex(r, c);
            if c + 1 < cols {
                edges.push((v, shape.vertex(r, c + 1), cell_time));
            }
            if r + 1 < rows {
                edges.push((v, shape.vertex(r + 1, c), cell_time));
            }
        }
    }
    for v in 1..=n {
        edges.push((0, v, depot_time(start, coords[v])));
        edges.push((v, n + 1, depot_time(coords[v], end)));
    }
    let mut g = MonitorGraph::new(n, coords, &edges)?;
    g.grid = Some(shape);
    Ok(g)
}

/// Ordered vertex sequence with its travel cost.
#[derive(Debug, Clone, PartialEq)]
pub struct Path {
    pub seq: Vec<usize>,
    pub cost: f64,
}

impl Path {
    /// Cost is the sum of edge weights; a missing edge makes it infinite.
    pub fn from_sequence(seq: Vec<usize>, g: &MonitorGraph) -> Self {
        let cost = path_cost(&seq, g);
        Self { seq, cost }
    }

    /// Visited area vertices in visiting order.
    pub fn interior(&self) -> &[usize] {
        if self.seq.len() < 2 {
            return &[];
        }
        &self.seq[1..self.seq.len() - 1]
    }
}

pub fn path_cost(seq: &[usize], g: &MonitorGraph) -> f64 {
    seq.windows(2)
        .map(|w| g.edge(w[0], w[1]).unwrap_or(f64::INFINITY))
        .sum()
}

/// Why a sequence is not an admissible flight.
#[derive(Debug, Clone, PartialEq)]
pub enum Infeasibility {
    TooShort,
    BadStart(usize),
    BadEnd(usize),
    NotAnArea(usize),
    MissingEdge(usize, usize),
    RepeatedVertex(usize),
    OverBudget { cost: f64, budget: f64 },
}

/// Budget comparisons allow this much absolute slack for summation roundoff.
pub const BUDGET_EPS: f64 = 1e-9;

pub fn check_path(path: &Path, g: &MonitorGraph, budget: f64) -> std::result::Result<(), Infeasibility> {
    let seq = &path.seq;
    if seq.len() < 2 {
        return Err(Infeasibility::TooShort);
    }
    if seq[0] != g.start() {
        return Err(Infeasibility::BadStart(seq[0]));
    }
    let last = *seq.last().unwrap();
    if last != g.end() {
        return Err(Infeasibility::BadEnd(last));
    }
    let mut seen = vec![false; g.n_vertices()];
    for &v in &seq[1..seq.len() - 1] {
        if !g.is_area(v) {
            return Err(Infeasibility::NotAnArea(v));
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(Infeasibility::RepeatedVertex(v));
        }
    }
    let mut cost = 0.0;
    for w in seq.windows(2) {
        match g.edge(w[0], w[1]) {
            Some(t) => cost += t,
            None => return Err(Infeasibility::MissingEdge(w[0], w[1])),
        }
    }
    if cost > budget + BUDGET_EPS {
        return Err(Infeasibility::OverBudget { cost, budget });
    }
    Ok(())
}

pub fn is_feasible(path: &Path, g: &MonitorGraph, budget: f64) -> bool {
    check_path(path, g, budget).is_ok()
}

/// `gamma_i = 1` iff area vertex `i + 1` appears in the path.
pub fn visit_vector(path: &Path, n_areas: usize) -> VisitVector {
    VisitVector::from_areas(
        n_areas,
        path.seq
            .iter()
            .filter(|&&v| v >= 1 && v <= n_areas)
            .map(|&v| v - 1),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn smallest_grid_edges() {
        let g = build_grid(1, 2, 10.0, [0.0, 0.0], 2.0).unwrap();
        let pairs: Vec<(usize, usize)> = g.edges().iter().map(|&(i, j, _)| (i, j)).collect();
        assert_eq!(pairs, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        assert_eq!(g.end(), 3);
        assert_eq!(g.edge(1, 2), Some(10.0));
        // depot at origin, centroid (0.5, 0.5): sqrt(0.5) cells at twice the speed
        let expect = 0.5f64.sqrt() * 10.0 / 2.0;
        assert!((g.edge(0, 1).unwrap() - expect).abs() < 1e-12);
        assert_eq!(g.edge(0, 3), None);
    }

    #[test]
    fn grid_edge_counts() {
        let g = build_grid(2, 2, 1.0, [0.0, 0.0], 2.0).unwrap();
        assert_eq!(g.interior_edges().len(), 4);
        assert!(g.edge(1, 4).is_none());
        let g = build_grid(6, 6, 1.0, [3.0, 3.0], 2.0).unwrap();
        let (r, c) = (6, 6);
        assert_eq!(g.interior_edges().len(), 2 * r * c - r - c);
        assert_eq!(g.edges().len() - g.interior_edges().len(), 2 * r * c);
    }

    #[test]
    fn feasibility_examples() {
        let g = build_grid(2, 2, 10.0, [0.0, 0.0], 2.0).unwrap();
        let end = g.end();
        let p = Path::from_sequence(vec![0, 1, end], &g);
        assert!(is_feasible(&p, &g, p.cost));
        assert!(!is_feasible(&p, &g, p.cost - 1e-3));
        let direct = Path::from_sequence(vec![0, end], &g);
        assert_eq!(check_path(&direct, &g, 1e9), Err(Infeasibility::MissingEdge(0, end)));
        let rep = Path::from_sequence(vec![0, 1, 2, 1, end], &g);
        assert_eq!(check_path(&rep, &g, 1e9), Err(Infeasibility::RepeatedVertex(1)));
        let diag = Path::from_sequence(vec![0, 1, 4, end], &g);
        assert_eq!(check_path(&diag, &g, 1e9), Err(Infeasibility::MissingEdge(1, 4)));
        let bad = Path::from_sequence(vec![1, 2, end], &g);
        assert_eq!(check_path(&bad, &g, 1e9), Err(Infeasibility::BadStart(1)));
    }

    #[test]
    fn visit_vector_examples() {
        let g = build_grid(2, 2, 10.0, [0.0, 0.0], 2.0).unwrap();
        let p = Path::from_sequence(vec![0, 2, g.end()], &g);
        assert_eq!(visit_vector(&p, 4).as_slice(), &[false, true, false, false]);
        let all = Path::from_sequence(vec![0, 1, 2, 4, 3, g.end()], &g);
        assert_eq!(visit_vector(&all, 4), VisitVector::all(4));
    }

    #[test]
    fn rejects_malformed_graphs() {
        let coords = vec![[0.0, 0.0]; 3];
        assert!(MonitorGraph::new(1, coords.clone(), &[(0, 1, 1.0)]).is_err());
        assert!(MonitorGraph::new(1, coords.clone(), &[(0, 1, 1.0), (1, 2, -1.0)]).is_err());
        assert!(MonitorGraph::new(1, coords.clone(), &[(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).is_err());
        assert!(MonitorGraph::new(1, coords, &[(0, 1, 1.0), (1, 2, 1.0)]).is_ok());
    }

    #[test]
    fn interior_distances_are_manhattan_on_grid() {
        let g = build_grid(3, 4, 2.0, [0.0, 0.0], 2.0).unwrap();
        let d = g.interior_distances();
        let shape = g.grid().unwrap();
        for a in 0..12 {
            for b in 0..12 {
                let (ra, ca) = shape.cell(a + 1);
                let (rb, cb) = shape.cell(b + 1);
                let manhattan = (ra.abs_diff(rb) + ca.abs_diff(cb)) as f64 * 2.0;
                assert_eq!(d[a][b], manhattan);
            }
        }
    }

    #[test]
    fn edge_csv_header_and_rows() {
        let g = build_grid(1, 2, 10.0, [0.0, 0.0], 2.0).unwrap();
        let mut buf = Vec::new();
        g.write_edges_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("i,j,t_ij"));
        assert_eq!(lines.count(), 5);
    }
}
