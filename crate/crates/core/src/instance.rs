//! Random planning instances on grid fields.
//!
//! Each instance pairs a grid graph with a diffusion field model and a prior
//! covariance obtained by filtering from `10 I` with the fixed sensors for a
//! random number of hours. One earlier flight over a connected strip of
//! areas is mixed in at a random hour.

use nalgebra::{DMatrix, DVector};
use rand::Rng;

use crate::error::Result;
use crate::estimator::{correct, predict, BeliefKind, BeliefState, InfoObjective};
use crate::graph::{GridSpec, MonitorGraph};
use crate::model::{DiffusionField, FieldModel, VisitVector};

#[derive(Debug, Clone)]
pub struct PlanningInstance {
    pub graph: MonitorGraph,
    pub model: FieldModel,
    pub prior: DMatrix<f64>,
    pub budget: f64,
}

impl PlanningInstance {
    pub fn objective(&self) -> Result<InfoObjective> {
        InfoObjective::new(&self.prior, &self.model)
    }
}

/// Prior covariance after `hours` of filtering; `visit` is applied at `visit_hour`.
pub fn filtered_prior(
    model: &FieldModel,
    p0: f64,
    hours: usize,
    visit: Option<(usize, &VisitVector)>,
) -> Result<DMatrix<f64>> {
    let dim = model.state_dim();
    let none = VisitVector::none(model.n_areas());
    let u = DVector::zeros(model.input_dim());
    let mut belief = BeliefState::isotropic(dim, p0)?;
    for h in 1..=hours {
        let prior = predict(&belief, model, &u, None)?;
        if h == hours {
            return Ok(prior.p);
        }
        let gamma = match visit {
            Some((at, g)) if at == h => g,
            _ => &none,
        };
        let sel = model.selection_matrix(gamma)?;
        belief = correct(&prior, model, gamma, &DVector::zeros(sel.len()))?;
    }
    debug_assert_eq!(belief.kind, BeliefKind::Posterior);
    Ok(belief.p)
}

/// Budget of the cheapest single-area flight plus `visits - 1` hops between
/// adjacent areas, so that at most `visits` areas fit in one flight.
pub fn budget_for_visits(g: &MonitorGraph, visits: usize) -> f64 {
    let hop = g
        .interior_edges()
        .iter()
        .map(|e| e.2)
        .fold(f64::INFINITY, f64::min);
    let hop = if hop.is_finite() { hop } else { 0.0 };
    g.cheapest_single_visit().1 + visits.saturating_sub(1) as f64 * hop
}

/// [`random_instance`] with the budget replaced by [`budget_for_visits`].
pub fn random_instance_with_visits<R: Rng>(
    rows: usize,
    cols: usize,
    visits: usize,
    rng: &mut R,
) -> Result<PlanningInstance> {
    let mut inst = random_instance(rows, cols, rng)?;
    inst.budget = budget_for_visits(&inst.graph, visits);
    Ok(inst)
}

/// Random field, depot and prior on a `rows x cols` grid.
///
/// The budget is the cheapest single-area flight plus `U[0, 1]` times the
/// time needed to sense every area once more.
pub fn random_instance<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> Result<PlanningInstance> {
    let n = rows * cols;
    let mut field = DiffusionField::new(rows, cols);
    for a in 0..n {
        if rng.random_bool(0.25) {
            field.fixed_sensors.push((a, rng.random_range(0.05..0.5)));
        }
    }
    let mobile = rng.random_range(0.05..0.5);
    field.mobile_variance = vec![mobile; n];
    let model = field.build()?;

    let mut spec = GridSpec::new(rows, cols);
    spec.start_depot = [
        rng.random_range(0.0..cols as f64),
        rng.random_range(0.0..rows as f64),
    ];
    let graph = spec.build()?;

    let hours = rng.random_range(20..=60);
    let visit = earlier_flight(&graph, rng);
    let at = rng.random_range(1..hours);
    let prior = filtered_prior(&model, 10.0, hours, Some((at, &visit)))?;

    let (_, single) = graph.cheapest_single_visit();
    let budget = single + rng.random_range(0.0..1.0) * n as f64 * spec.cell_time_s;
    Ok(PlanningInstance {
        graph,
        model,
        prior,
        budget,
    })
}

/// Areas of a random self-avoiding walk over adjacent areas, the footprint
/// of an earlier flight.
fn earlier_flight<R: Rng>(g: &MonitorGraph, rng: &mut R) -> VisitVector {
    let n = g.n_areas();
    let len = rng.random_range(1..=n.div_ceil(2));
    let mut seen = vec![false; n];
    let mut cur = rng.random_range(1..=n);
    seen[cur - 1] = true;
    for _ in 1..len {
        let next: Vec<usize> = g
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|&v| g.is_area(v) && !seen[v - 1])
            .collect();
        if next.is_empty() {
            break;
        }
        cur = next[rng.random_range(0..next.len())];
        seen[cur - 1] = true;
    }
    VisitVector::new(seen)
}
