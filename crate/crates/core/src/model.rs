//! The monitored linear time-invariant field and its sensing structure.
//!
//! Areas are indexed `0..N` here; graph vertex `i + 1` is the centroid of
//! area `i`. Every area carries the same number of states `n`, so the full
//! state has dimension `N * n` with area `i` occupying rows `i*n..(i+1)*n`.
//!
//! Each area exposes `f_i` outputs read by fixed sensors at every step and
//! `m_i` outputs that are only read when the mobile sensor visits the area.
//! Measurement noise is diagonal and kept as per-area variance vectors.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// Fixed and mobile measurement structure of a single area.
#[derive(Debug, Clone, PartialEq)]
pub struct AreaSensing {
    c_fixed: DMatrix<f64>,
    r_fixed: Vec<f64>,
    c_mobile: DMatrix<f64>,
    r_mobile: Vec<f64>,
}

impl AreaSensing {
    pub fn new(
        c_fixed: DMatrix<f64>,
        r_fixed: Vec<f64>,
        c_mobile: DMatrix<f64>,
        r_mobile: Vec<f64>,
    ) -> Result<Self> {
        if c_fixed.ncols() != c_mobile.ncols() {
            return Err(Error::InvalidModel(format!(
                "fixed and mobile measurement matrices disagree on state count ({} vs {})",
                c_fixed.ncols(),
                c_mobile.ncols()
            )));
        }
        if c_fixed.nrows() != r_fixed.len() || c_mobile.nrows() != r_mobile.len() {
            return Err(Error::InvalidModel(
                "one noise variance is required per measurement row".into(),
            ));
        }
        if r_fixed.iter().chain(&r_mobile).any(|&r| !(r > 0.0 && r.is_finite())) {
            return Err(Error::InvalidModel(
                "measurement variances must be finite and strictly positive".into(),
            ));
        }
        Ok(Self {
            c_fixed,
            r_fixed,
            c_mobile,
            r_mobile,
        })
    }

    /// Scalar-state area: an optional fixed sensor and an optional mobile reading.
    pub fn scalar(fixed_variance: Option<f64>, mobile_variance: Option<f64>) -> Result<Self> {
        let (cf, rf) = match fixed_variance {
            Some(r) => (DMatrix::from_element(1, 1, 1.0), vec![r]),
            None => (DMatrix::zeros(0, 1), vec![]),
        };
        let (cm, rm) = match mobile_variance {
            Some(r) => (DMatrix::from_element(1, 1, 1.0), vec![r]),
            None => (DMatrix::zeros(0, 1), vec![]),
        };
        Self::new(cf, rf, cm, rm)
    }

    pub fn n_states(&self) -> usize {
        self.c_fixed.ncols()
    }
    pub fn n_fixed(&self) -> usize {
        self.c_fixed.nrows()
    }
    pub fn n_mobile(&self) -> usize {
        self.c_mobile.nrows()
    }
    pub fn n_outputs(&self) -> usize {
        self.n_fixed() + self.n_mobile()
    }
    pub fn c_fixed(&self) -> &DMatrix<f64> {
        &self.c_fixed
    }
    pub fn c_mobile(&self) -> &DMatrix<f64> {
        &self.c_mobile
    }
    pub fn r_fixed(&self) -> &[f64] {
        &self.r_fixed
    }
    pub fn r_mobile(&self) -> &[f64] {
        &self.r_mobile
    }

    /// `C^T R^{-1} C` restricted to this area's `n x n` state block.
    pub fn info_block(&self, kind: SensorKind) -> DMatrix<f64> {
        let (c, r) = match kind {
            SensorKind::Fixed => (&self.c_fixed, &self.r_fixed),
            SensorKind::Mobile => (&self.c_mobile, &self.r_mobile),
        };
        let n = c.ncols();
        let mut out = DMatrix::zeros(n, n);
        for (row, &var) in r.iter().enumerate() {
            let cr = c.row(row);
            out += cr.transpose() * cr / var;
        }
        linalg::symmetrize(&mut out);
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SensorKind {
    Fixed,
    Mobile,
}

/// Which areas the mobile sensor visits during one flight.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VisitVector(Vec<bool>);

impl VisitVector {
    pub fn new(gamma: Vec<bool>) -> Self {
        Self(gamma)
    }
    pub fn none(n_areas: usize) -> Self {
        Self(vec![false; n_areas])
    }
    pub fn all(n_areas: usize) -> Self {
        Self(vec![true; n_areas])
    }
    /// Marks the given 0-based area indices as visited.
    pub fn from_areas(n_areas: usize, areas: impl IntoIterator<Item = usize>) -> Self {
        let mut v = vec![false; n_areas];
        for a in areas {
            v[a] = true;
        }
        Self(v)
    }
    pub fn len(&self) -> usize {
        self.0.len()
    }
    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
    pub fn is_visited(&self, area: usize) -> bool {
        self.0[area]
    }
    pub fn set(&mut self, area: usize, visited: bool) {
        self.0[area] = visited;
    }
    pub fn count(&self) -> usize {
        self.0.iter().filter(|&&g| g).count()
    }
    pub fn visited(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().filter(|(_, &g)| g).map(|(i, _)| i)
    }
    pub fn as_slice(&self) -> &[bool] {
        &self.0
    }
    /// Componentwise `self <= other`.
    pub fn is_subset_of(&self, other: &VisitVector) -> bool {
        self.0.len() == other.0.len() && self.0.iter().zip(&other.0).all(|(&a, &b)| !a || b)
    }
}

/// Row selector over the `M` stacked outputs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SelectionMatrix {
    rows: Vec<usize>,
    total_outputs: usize,
}

impl SelectionMatrix {
    /// Selected output indices, ascending.
    pub fn rows(&self) -> &[usize] {
        &self.rows
    }
    /// `M_k`, the number of selected measurements.
    pub fn len(&self) -> usize {
        self.rows.len()
    }
    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }
    pub fn total_outputs(&self) -> usize {
        self.total_outputs
    }
    /// Dense `M_k x M` matrix of unit rows.
    pub fn to_matrix(&self) -> DMatrix<f64> {
        let mut g = DMatrix::zeros(self.rows.len(), self.total_outputs);
        for (k, &r) in self.rows.iter().enumerate() {
            g[(k, r)] = 1.0;
        }
        g
    }
}

/// LTI field `x+ = A x + B u + B_d d + w`, `w ~ N(0, Q)`, with per-area sensing.
#[derive(Debug, Clone)]
pub struct FieldModel {
    areas: Vec<AreaSensing>,
    n: usize,
    a: DMatrix<f64>,
    b: DMatrix<f64>,
    b_disturbance: Option<DMatrix<f64>>,
    q: DMatrix<f64>,
    dt_hours: f64,
}

impl FieldModel {
    pub fn new(
        areas: Vec<AreaSensing>,
        a: DMatrix<f64>,
        b: DMatrix<f64>,
        b_disturbance: Option<DMatrix<f64>>,
        q: DMatrix<f64>,
        dt_hours: f64,
    ) -> Result<Self> {
        let Some(first) = areas.first() else {
            return Err(Error::InvalidModel("a field needs at least one area".into()));
        };
        let n = first.n_states();
        if n == 0 {
            return Err(Error::InvalidModel("areas must carry at least one state".into()));
        }
        if let Some((i, _)) = areas.iter().enumerate().find(|(_, ar)| ar.n_states() != n) {
            return Err(Error::InvalidModel(format!(
                "area {i} has {} states, expected {n} (heterogeneous areas are not supported)",
                areas[i].n_states()
            )));
        }
        let dim = areas.len() * n;
        let check = |name: &str, m: &DMatrix<f64>, rows: usize, cols: Option<usize>| -> Result<()> {
            if m.nrows() != rows || cols.is_some_and(|c| m.ncols() != c) {
                return Err(Error::Dimension(format!(
                    "{name} is {}x{}, expected {rows}x{}",
                    m.nrows(),
                    m.ncols(),
                    cols.map_or("*".to_string(), |c| c.to_string())
                )));
            }
            Ok(())
        };
        check("A", &a, dim, Some(dim))?;
        check("B", &b, dim, None)?;
        if let Some(bd) = &b_disturbance {
            check("B_d", bd, dim, None)?;
        }
        check("Q", &q, dim, Some(dim))?;
        linalg::check_symmetric(&q)?;
        let q_min = linalg::min_eigenvalue(&q)?;
        if q_min < -1e-10 * q.amax().max(1.0) {
            return Err(Error::InvalidModel(format!(
                "Q must be positive semidefinite (min eigenvalue {q_min:e})"
            )));
        }
        if !(dt_hours > 0.0) {
            return Err(Error::InvalidModel("time step must be positive".into()));
        }
        Ok(Self {
            areas,
            n,
            a,
            b,
            b_disturbance,
            q,
            dt_hours,
        })
    }

    pub fn n_areas(&self) -> usize {
        self.areas.len()
    }
    /// States per area.
    pub fn states_per_area(&self) -> usize {
        self.n
    }
    /// Full state dimension `N * n`.
    pub fn state_dim(&self) -> usize {
        self.areas.len() * self.n
    }
    /// Total number of measurable outputs `M`.
    pub fn output_dim(&self) -> usize {
        self.areas.iter().map(AreaSensing::n_outputs).sum()
    }
    pub fn input_dim(&self) -> usize {
        self.b.ncols()
    }
    pub fn disturbance_dim(&self) -> usize {
        self.b_disturbance.as_ref().map_or(0, |b| b.ncols())
    }
    pub fn areas(&self) -> &[AreaSensing] {
        &self.areas
    }
    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }
    pub fn b(&self) -> &DMatrix<f64> {
        &self.b
    }
    pub fn b_disturbance(&self) -> Option<&DMatrix<f64>> {
        self.b_disturbance.as_ref()
    }
    pub fn q(&self) -> &DMatrix<f64> {
        &self.q
    }
    pub fn dt_hours(&self) -> f64 {
        self.dt_hours
    }

    /// Index of the first output row belonging to `area` in the stacked `C`.
    pub fn output_offset(&self, area: usize) -> usize {
        self.areas[..area].iter().map(AreaSensing::n_outputs).sum()
    }

    /// Block-diagonal observation matrix `C` (`M x Nn`), each area
    /// contributing `[C_fixed; C_mobile]`.
    pub fn assemble_observation(&self) -> DMatrix<f64> {
        let mut c = DMatrix::zeros(self.output_dim(), self.state_dim());
        let mut row = 0;
        for (i, area) in self.areas.iter().enumerate() {
            let col = i * self.n;
            c.view_mut((row, col), (area.n_fixed(), self.n))
                .copy_from(area.c_fixed());
            row += area.n_fixed();
            c.view_mut((row, col), (area.n_mobile(), self.n))
                .copy_from(area.c_mobile());
            row += area.n_mobile();
        }
        c
    }

    /// Diagonal of `R` in stacked output order.
    pub fn output_variances(&self) -> Vec<f64> {
        self.areas
            .iter()
            .flat_map(|a| a.r_fixed().iter().chain(a.r_mobile()).copied())
            .collect()
    }

    /// Direct sum of the per-area selectors: fixed rows always, mobile rows iff visited.
    pub fn selection_matrix(&self, gamma: &VisitVector) -> Result<SelectionMatrix> {
        self.check_gamma(gamma)?;
        let mut rows = Vec::new();
        let mut offset = 0;
        for (i, area) in self.areas.iter().enumerate() {
            rows.extend(offset..offset + area.n_fixed());
            if gamma.is_visited(i) {
                rows.extend(offset + area.n_fixed()..offset + area.n_outputs());
            }
            offset += area.n_outputs();
        }
        Ok(SelectionMatrix {
            rows,
            total_outputs: offset,
        })
    }

    /// `C_{k,i}^T (R_i)^{-1} C_{k,i}` embedded in the full `Nn x Nn` space.
    pub fn info_term(&self, area: usize, kind: SensorKind) -> Result<DMatrix<f64>> {
        if area >= self.areas.len() {
            return Err(Error::InvalidArgument(format!(
                "area {area} out of range (N = {})",
                self.areas.len()
            )));
        }
        let dim = self.state_dim();
        let mut out = DMatrix::zeros(dim, dim);
        out.view_mut((area * self.n, area * self.n), (self.n, self.n))
            .copy_from(&self.areas[area].info_block(kind));
        Ok(out)
    }

    /// Sum of all fixed-sensor information terms.
    pub fn fixed_information(&self) -> DMatrix<f64> {
        let dim = self.state_dim();
        let mut out = DMatrix::zeros(dim, dim);
        for (i, area) in self.areas.iter().enumerate() {
            if area.n_fixed() > 0 {
                let mut block = out.view_mut((i * self.n, i * self.n), (self.n, self.n));
                block += area.info_block(SensorKind::Fixed);
            }
        }
        out
    }

    pub fn has_fixed_sensors(&self) -> bool {
        self.areas.iter().any(|a| a.n_fixed() > 0)
    }

    pub(crate) fn check_gamma(&self, gamma: &VisitVector) -> Result<()> {
        if gamma.len() != self.areas.len() {
            return Err(Error::Dimension(format!(
                "visit vector has length {}, expected {}",
                gamma.len(),
                self.areas.len()
            )));
        }
        Ok(())
    }
}

/// Synthetic diffusion-coupled field on a `rows x cols` grid with one state per area.
///
/// `A = I - coupling * L` with `L` the 4-neighbour grid Laplacian and
/// `Q = sigma^2 (I + 0.5 Adj)` projected onto the PSD cone.
#[derive(Debug, Clone)]
pub struct DiffusionField {
    pub rows: usize,
    pub cols: usize,
    pub coupling: f64,
    pub process_sigma: f64,
    pub dt_hours: f64,
    /// `(area, variance)` for every area equipped with a fixed sensor.
    pub fixed_sensors: Vec<(usize, f64)>,
    /// Mobile-sensor variance per area; a single entry applies to all areas.
    pub mobile_variance: Vec<f64>,
    /// Gain of the (single) irrigation input on every area.
    pub input_gain: f64,
    /// Gain of the (single) rain-like disturbance channel, if any.
    pub disturbance_gain: Option<f64>,
}

impl DiffusionField {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            coupling: 0.05,
            process_sigma: 0.1,
            dt_hours: 1.0,
            fixed_sensors: Vec::new(),
            mobile_variance: vec![0.1],
            input_gain: 0.0,
            disturbance_gain: None,
        }
    }

    pub fn n_areas(&self) -> usize {
        self.rows * self.cols
    }

    /// 4-neighbour adjacency of the grid, row-major area numbering.
    pub fn adjacency(&self) -> DMatrix<f64> {
        let n = self.n_areas();
        let mut adj = DMatrix::zeros(n, n);
        for r in 0..self.rows {
            for c in 0..self.cols {
                let i = r * self.cols + c;
                if c + 1 < self.cols {
                    adj[(i, i + 1)] = 1.0;
                    adj[(i + 1, i)] = 1.0;
                }
                if r + 1 < self.rows {
                    adj[(i, i + self.cols)] = 1.0;
                    adj[(i + self.cols, i)] = 1.0;
                }
            }
        }
        adj
    }

    pub fn build(&self) -> Result<FieldModel> {
        let n = self.n_areas();
        if n == 0 {
            return Err(Error::InvalidModel("grid must have at least one area".into()));
        }
        if self.mobile_variance.len() != 1 && self.mobile_variance.len() != n {
            return Err(Error::InvalidModel(format!(
                "mobile_variance must have 1 or {n} entries"
            )));
        }
        let adj = self.adjacency();
        let degree = DMatrix::from_diagonal(&DVector::from_fn(n, |i, _| adj.row(i).sum()));
        let laplacian = degree - &adj;
        let a = DMatrix::identity(n, n) - self.coupling * laplacian;
        let raw_q = (DMatrix::identity(n, n) + 0.5 * &adj) * self.process_sigma.powi(2);
        let q = linalg::clip_to_psd(&raw_q)?;

        let mut fixed = vec![None; n];
        for &(area, var) in &self.fixed_sensors {
            if area >= n {
                return Err(Error::InvalidModel(format!("fixed sensor on unknown area {area}")));
            }
            fixed[area] = Some(var);
        }
        let areas = (0..n)
            .map(|i| {
                let rm = if self.mobile_variance.len() == 1 {
                    self.mobile_variance[0]
                } else {
                    self.mobile_variance[i]
                };
                AreaSensing::scalar(fixed[i], Some(rm))
            })
            .collect::<Result<Vec<_>>>()?;
        let b = DMatrix::from_element(n, 1, self.input_gain);
        let bd = self.disturbance_gain.map(|g| DMatrix::from_element(n, 1, g));
        FieldModel::new(areas, a, b, bd, q, self.dt_hours)
    }
}
