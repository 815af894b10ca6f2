//! Kalman filter with intermittent observations and the E-optimal objective.
//!
//! The planning objective is the smallest eigenvalue of the posterior
//! information matrix
//!
//! ```text
//! Y = P_prior^{-1} + sum_i Cf_i^T Rf_i^{-1} Cf_i + sum_i gamma_i Cm_i^T Rm_i^{-1} Cm_i
//! ```
//!
//! which is affine in the visit indicators and independent of the measured
//! values. [`InfoObjective`] caches the constant part so planners can
//! evaluate many visit sets against one prior.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::model::{FieldModel, SensorKind, VisitVector};

/// Tolerance on the smallest eigenvalue of a covariance treated as PD.
pub const PD_TOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BeliefKind {
    Prior,
    Posterior,
}

/// Filter mean and covariance.
#[derive(Debug, Clone)]
pub struct BeliefState {
    pub x_hat: DVector<f64>,
    pub p: DMatrix<f64>,
    pub kind: BeliefKind,
}

impl BeliefState {
    pub fn new(x_hat: DVector<f64>, mut p: DMatrix<f64>, kind: BeliefKind) -> Result<Self> {
        if p.nrows() != x_hat.len() || p.ncols() != x_hat.len() {
            return Err(Error::Dimension(format!(
                "covariance is {}x{} for a state of length {}",
                p.nrows(),
                p.ncols(),
                x_hat.len()
            )));
        }
        linalg::check_symmetric(&p)?;
        linalg::symmetrize(&mut p);
        if linalg::min_eigenvalue(&p)? <= PD_TOL {
            return Err(Error::NotPositiveDefinite("covariance"));
        }
        Ok(Self { x_hat, p, kind })
    }

    /// Zero mean, `variance * I` covariance, posterior kind.
    pub fn isotropic(dim: usize, variance: f64) -> Result<Self> {
        Self::new(
            DVector::zeros(dim),
            DMatrix::identity(dim, dim) * variance,
            BeliefKind::Posterior,
        )
    }

    pub fn trace(&self) -> f64 {
        self.p.trace()
    }
}

/// `x <- A x + B u (+ B_d d)`, `P <- A P A^T + Q`.
pub fn predict(
    belief: &BeliefState,
    model: &FieldModel,
    u: &DVector<f64>,
    d: Option<&DVector<f64>>,
) -> Result<BeliefState> {
    if belief.kind != BeliefKind::Posterior {
        return Err(Error::InvalidArgument("predict expects a posterior belief".into()));
    }
    if belief.x_hat.len() != model.state_dim() {
        return Err(Error::Dimension(format!(
            "belief has {} states, model has {}",
            belief.x_hat.len(),
            model.state_dim()
        )));
    }
    if u.len() != model.input_dim() {
        return Err(Error::Dimension(format!(
            "input has length {}, expected {}",
            u.len(),
            model.input_dim()
        )));
    }
    let mut x = model.a() * &belief.x_hat + model.b() * u;
    match (d, model.b_disturbance()) {
        (Some(d), Some(bd)) => {
            if d.len() != bd.ncols() {
                return Err(Error::Dimension(format!(
                    "disturbance has length {}, expected {}",
                    d.len(),
                    bd.ncols()
                )));
            }
            x += bd * d;
        }
        (Some(_), None) => {
            return Err(Error::Dimension("model has no disturbance channel".into()));
        }
        _ => {}
    }
    let mut p = model.a() * &belief.p * model.a().transpose() + model.q();
    linalg::symmetrize(&mut p);
    Ok(BeliefState {
        x_hat: x,
        p,
        kind: BeliefKind::Prior,
    })
}

/// Measurement update with the outputs selected by `gamma`.
///
/// Uses the Joseph form `(I - K C) P (I - K C)^T + K R K^T`.
pub fn correct(
    belief: &BeliefState,
    model: &FieldModel,
    gamma: &VisitVector,
    y: &DVector<f64>,
) -> Result<BeliefState> {
    if belief.kind != BeliefKind::Prior {
        return Err(Error::InvalidArgument("correct expects a prior belief".into()));
    }
    let sel = model.selection_matrix(gamma)?;
    if y.len() != sel.len() {
        return Err(Error::Dimension(format!(
            "measurement has length {}, selection picks {}",
            y.len(),
            sel.len()
        )));
    }
    if sel.is_empty() {
        return Ok(BeliefState {
            kind: BeliefKind::Posterior,
            ..belief.clone()
        });
    }
    let c_full = model.assemble_observation();
    let variances = model.output_variances();
    let c = DMatrix::from_fn(sel.len(), model.state_dim(), |r, col| c_full[(sel.rows()[r], col)]);
    let r = DMatrix::from_diagonal(&DVector::from_iterator(
        sel.len(),
        sel.rows().iter().map(|&k| variances[k]),
    ));
    let pct = &belief.p * c.transpose();
    let mut s = &c * &pct + &r;
    linalg::symmetrize(&mut s);
    let s_chol = s
        .cholesky()
        .ok_or_else(|| Error::Numerical("innovation covariance is not invertible".into()))?;
    // K = P C^T S^{-1}  <=>  S K^T = C P
    let k = s_chol.solve(&pct.transpose()).transpose();
    let innovation = y - &c * &belief.x_hat;
    let x = &belief.x_hat + &k * innovation;
    let dim = model.state_dim();
    let ikc = DMatrix::identity(dim, dim) - &k * &c;
    let mut p = &ikc * &belief.p * ikc.transpose() + &k * r * k.transpose();
    linalg::symmetrize(&mut p);
    Ok(BeliefState {
        x_hat: x,
        p,
        kind: BeliefKind::Posterior,
    })
}

/// Posterior information matrix with its smallest eigenpair.
#[derive(Debug, Clone)]
pub struct InfoMatrix {
    pub y: DMatrix<f64>,
    pub lambda_min: f64,
    pub v_min: DVector<f64>,
}

/// Smallest eigenvalue of a symmetric matrix and a unit eigenvector.
pub fn min_eigen(y: &DMatrix<f64>) -> Result<(f64, DVector<f64>)> {
    Ok(linalg::symmetric_eigen(y)?.min_pair())
}

/// `Y = P_prior^{-1} + fixed terms + sum_i gamma_i * mobile term_i`.
pub fn information_matrix(
    p_prior: &DMatrix<f64>,
    model: &FieldModel,
    gamma: &VisitVector,
) -> Result<InfoMatrix> {
    let ctx = InfoObjective::new(p_prior, model)?;
    ctx.info_matrix(gamma)
}

/// `lambda_min(Y)` for the given visit set.
pub fn objective(p_prior: &DMatrix<f64>, model: &FieldModel, gamma: &VisitVector) -> Result<f64> {
    InfoObjective::new(p_prior, model)?.lambda_min(gamma)
}

/// Trace of a covariance, reported alongside the objective but never planned on.
pub fn covariance_trace(p: &DMatrix<f64>) -> f64 {
    p.trace()
}

/// Information objective for one prior covariance.
///
/// Holds `P_prior^{-1} + sum fixed terms` and each area's mobile block so
/// that `Y(gamma)` and `Y(weights)` are cheap to assemble.
#[derive(Debug, Clone)]
pub struct InfoObjective {
    base: DMatrix<f64>,
    mobile_blocks: Vec<DMatrix<f64>>,
    n: usize,
}

impl InfoObjective {
    pub fn new(p_prior: &DMatrix<f64>, model: &FieldModel) -> Result<Self> {
        let dim = model.state_dim();
        if p_prior.nrows() != dim || p_prior.ncols() != dim {
            return Err(Error::Dimension(format!(
                "prior covariance is {}x{}, model state is {dim}",
                p_prior.nrows(),
                p_prior.ncols()
            )));
        }
        linalg::check_symmetric(p_prior)?;
        let mut base = linalg::spd_inverse(p_prior)?;
        base += model.fixed_information();
        linalg::symmetrize(&mut base);
        let mobile_blocks = model
            .areas()
            .iter()
            .map(|a| a.info_block(SensorKind::Mobile))
            .collect();
        Ok(Self {
            base,
            mobile_blocks,
            n: model.states_per_area(),
        })
    }

    pub fn n_areas(&self) -> usize {
        self.mobile_blocks.len()
    }

    pub fn dim(&self) -> usize {
        self.base.nrows()
    }

    /// `P_prior^{-1}` plus all fixed-sensor information.
    pub fn constant_part(&self) -> &DMatrix<f64> {
        &self.base
    }

    /// Mobile information block (`n x n`) of one area.
    pub fn mobile_block(&self, area: usize) -> &DMatrix<f64> {
        &self.mobile_blocks[area]
    }

    /// `Y` with fractional visit weights `w_i in [0, 1]`.
    pub fn weighted(&self, weights: &[f64]) -> DMatrix<f64> {
        debug_assert_eq!(weights.len(), self.mobile_blocks.len());
        let mut y = self.base.clone();
        for (i, (&w, block)) in weights.iter().zip(&self.mobile_blocks).enumerate() {
            if w != 0.0 {
                let mut view = y.view_mut((i * self.n, i * self.n), (self.n, self.n));
                view += block * w;
            }
        }
        y
    }

    pub fn information(&self, gamma: &VisitVector) -> DMatrix<f64> {
        let w: Vec<f64> = gamma.as_slice().iter().map(|&g| if g { 1.0 } else { 0.0 }).collect();
        self.weighted(&w)
    }

    pub fn check(&self, gamma: &VisitVector) -> Result<()> {
        if gamma.len() != self.n_areas() {
            return Err(Error::Dimension(format!(
                "visit vector has length {}, expected {}",
                gamma.len(),
                self.n_areas()
            )));
        }
        Ok(())
    }

    pub fn lambda_min(&self, gamma: &VisitVector) -> Result<f64> {
        self.check(gamma)?;
        linalg::min_eigenvalue(&self.information(gamma))
    }

    pub fn lambda_min_weighted(&self, weights: &[f64]) -> Result<f64> {
        linalg::min_eigenvalue(&self.weighted(weights))
    }

    pub fn info_matrix(&self, gamma: &VisitVector) -> Result<InfoMatrix> {
        self.check(gamma)?;
        let y = self.information(gamma);
        let (lambda_min, v_min) = min_eigen(&y)?;
        Ok(InfoMatrix { y, lambda_min, v_min })
    }

    /// `v^T H_i v` for every area: the derivative of `v^T Y v` in `w_i`.
    pub fn directional_gains(&self, v: &DVector<f64>) -> Vec<f64> {
        self.mobile_blocks
            .iter()
            .enumerate()
            .map(|(i, h)| {
                let vi = v.rows(i * self.n, self.n);
                (vi.transpose() * h * vi)[(0, 0)]
            })
            .collect()
    }
}
