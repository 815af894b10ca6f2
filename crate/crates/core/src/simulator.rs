//! Closed-loop monitoring over many flights.
//!
//! The truth evolves hourly with sampled process noise, the filter predicts
//! every hour and corrects with the fixed sensors, and at scheduled hours a
//! flight is planned from the predicted covariance and its mobile readings
//! are fused as well. Metrics are logged after each hourly correction.
//!
//! Randomness is split into ChaCha streams of the scenario seed: the flight
//! schedule, the truth noise, the measurement noise and the rain pulses each
//! have their own stream, so every strategy sees the same schedule and truth.

use std::fmt;
use std::io::Write;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::baseline::{build_partitions, PartitionSchedule};
use crate::error::{Error, Result};
use crate::estimator::{correct, predict, BeliefState, InfoObjective};
use crate::exact::{solve_exact_with, ExactConfig};
use crate::graph::{visit_vector, GridSpec, MonitorGraph, Path};
use crate::heuristic::{randomized_rounding, reorder_path, RoundingConfig};
use crate::linalg;
use crate::model::{DiffusionField, FieldModel, VisitVector};
use crate::relaxation::{solve_relaxation, RelaxConfig};

/// Ratio samples whose baseline value is below this are flagged.
pub const RATIO_FLOOR: f64 = 1e-15;

const STREAM_SCHEDULE: u64 = 0;
const STREAM_TRUTH: u64 = 1;
const STREAM_MEASUREMENT: u64 = 2;
const STREAM_RAIN: u64 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Exact,
    Heuristic,
    Baseline,
}

impl Strategy {
    pub const ALL: [Strategy; 3] = [Strategy::Exact, Strategy::Heuristic, Strategy::Baseline];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Exact => "exact",
            Strategy::Heuristic => "heuristic",
            Strategy::Baseline => "baseline",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Strategy::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown strategy '{s}'")))
    }
}

/// Multiplier on the flight budget per strategy.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BudgetScale {
    pub exact: f64,
    pub heuristic: f64,
    pub baseline: f64,
}

impl Default for BudgetScale {
    fn default() -> Self {
        Self {
            exact: 1.0,
            heuristic: 1.0,
            baseline: 1.0,
        }
    }
}

impl BudgetScale {
    pub fn get(&self, s: Strategy) -> f64 {
        match s {
            Strategy::Exact => self.exact,
            Strategy::Heuristic => self.heuristic,
            Strategy::Baseline => self.baseline,
        }
    }
}

/// Rain-like pulses: each hour a pulse starts with `start_probability`,
/// lasting a uniform number of hours in `duration_h` at a uniform intensity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PulseTrain {
    pub start_probability: f64,
    pub duration_h: (usize, usize),
    pub intensity: (f64, f64),
}

impl Default for PulseTrain {
    fn default() -> Self {
        Self {
            start_probability: 0.03,
            duration_h: (2, 8),
            intensity: (0.2, 1.0),
        }
    }
}

impl PulseTrain {
    /// Disturbance value for hours `1..=hours` (index 0 is hour 1).
    pub fn sample(&self, hours: usize, seed: u64) -> Vec<f64> {
        let mut rng = stream(seed, STREAM_RAIN);
        let mut d = vec![0.0; hours];
        let mut h = 0;
        while h < hours {
            if rng.random_bool(self.start_probability) {
                let len = rng.random_range(self.duration_h.0..=self.duration_h.1);
                let level = rng.random_range(self.intensity.0..=self.intensity.1);
                for x in d.iter_mut().skip(h).take(len) {
                    *x = level;
                }
                h += len;
            } else {
                h += 1;
            }
        }
        d
    }
}

#[derive(Debug, Clone)]
pub struct ScenarioConfig {
    pub grid: GridSpec,
    pub field: DiffusionField,
    pub budget_s: f64,
    pub horizon_h: usize,
    /// Inclusive range of whole hours between consecutive flights.
    pub flight_gap_h: (usize, usize),
    pub initial_variance: f64,
    pub seed: u64,
    /// Seed of the truth and measurement noise; `None` uses `seed`.
    pub noise_seed: Option<u64>,
    pub budget_scale: BudgetScale,
    pub rounding: RoundingConfig,
    pub relax: RelaxConfig,
    pub exact: ExactConfig,
    pub rain: Option<PulseTrain>,
}

impl ScenarioConfig {
    pub fn new(grid: GridSpec, field: DiffusionField, budget_s: f64) -> Self {
        Self {
            grid,
            field,
            budget_s,
            horizon_h: 350,
            flight_gap_h: (35, 70),
            initial_variance: 10.0,
            seed: 0,
            noise_seed: None,
            budget_scale: BudgetScale::default(),
            rounding: RoundingConfig::default(),
            relax: RelaxConfig::default(),
            exact: ExactConfig::default(),
            rain: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (lo, hi) = self.flight_gap_h;
        if lo == 0 || lo > hi {
            return Err(Error::Scenario(format!("invalid flight gap range [{lo}, {hi}] h")));
        }
        if self.horizon_h <= hi {
            return Err(Error::Scenario(format!(
                "horizon {} h must exceed the largest flight gap {hi} h",
                self.horizon_h
            )));
        }
        if !(self.budget_s > 0.0 && self.budget_s.is_finite()) {
            return Err(Error::Scenario(format!("budget must be positive, got {} s", self.budget_s)));
        }
        if !(self.initial_variance > 0.0) {
            return Err(Error::Scenario("initial variance must be positive".into()));
        }
        if self.field.rows != self.grid.rows || self.field.cols != self.grid.cols {
            return Err(Error::Scenario("field and grid sizes differ".into()));
        }
        Ok(())
    }

    pub fn budget_for(&self, s: Strategy) -> f64 {
        self.budget_s * self.budget_scale.get(s)
    }

    fn noise_seed(&self) -> u64 {
        self.noise_seed.unwrap_or(self.seed)
    }
}

fn stream(seed: u64, k: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(k);
    rng
}

/// Flight hours, shared by every strategy of a scenario.
pub fn flight_schedule(cfg: &ScenarioConfig) -> Vec<usize> {
    let mut rng = stream(cfg.seed, STREAM_SCHEDULE);
    let mut hours = Vec::new();
    let mut t = 0;
    loop {
        t += rng.random_range(cfg.flight_gap_h.0..=cfg.flight_gap_h.1);
        if t > cfg.horizon_h {
            return hours;
        }
        hours.push(t);
    }
}

#[derive(Debug, Clone)]
pub struct FlightEvent {
    pub hour: usize,
    pub path: Path,
    /// `lambda_min` the planner predicted for the chosen visits.
    pub lambda_planned: f64,
    /// `lambda_min` of the posterior information after the flight hour.
    pub lambda_after: f64,
}

#[derive(Debug, Clone)]
pub struct SimTrace {
    pub strategy: Strategy,
    /// Entry `h - 1` is logged after the correction of hour `h`.
    pub lambda_min: Vec<f64>,
    pub trace_p: Vec<f64>,
    pub flights: Vec<FlightEvent>,
    pub final_belief: BeliefState,
}

impl SimTrace {
    /// `lambda_min` at each flight hour.
    pub fn lambda_at_flights(&self) -> Vec<f64> {
        self.flights.iter().map(|f| self.lambda_min[f.hour - 1]).collect()
    }

    fn flight_at(&self, hour: usize) -> Option<usize> {
        self.flights.iter().position(|f| f.hour == hour).map(|k| k + 1)
    }
}

/// Independent `N(0, S)` draws through the eigen square root of `S`.
struct GaussianSampler {
    root: DMatrix<f64>,
}

impl GaussianSampler {
    fn new(s: &DMatrix<f64>) -> Result<Self> {
        let e = linalg::symmetric_eigen(s)?;
        let mut root = e.vectors.clone();
        for (k, &l) in e.values.iter().enumerate() {
            root.column_mut(k).scale_mut(l.max(0.0).sqrt());
        }
        Ok(Self { root })
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> DVector<f64> {
        let z = DVector::from_fn(self.root.ncols(), |_, _| rng.sample::<f64, _>(StandardNormal));
        &self.root * z
    }
}

enum Planner {
    Exact,
    Heuristic,
    Baseline(PartitionSchedule),
}

fn plan_flight(
    planner: &mut Planner,
    cfg: &ScenarioConfig,
    g: &MonitorGraph,
    objective: &InfoObjective,
    budget: f64,
    flight: usize,
) -> Result<Path> {
    match planner {
        Planner::Baseline(sched) => Ok(sched.next_flight()),
        Planner::Exact => Ok(solve_exact_with(g, objective, budget, &cfg.exact)?.path),
        Planner::Heuristic => {
            let relaxed = solve_relaxation(g, objective, budget, &cfg.relax)?;
            let rounding = RoundingConfig {
                seed: cfg.rounding.seed.wrapping_add(cfg.seed.wrapping_mul(1_000_003)).wrapping_add(flight as u64),
                ..cfg.rounding
            };
            let path = randomized_rounding(&relaxed, g, objective, budget, &rounding)?.path;
            if rounding.allow_reorder {
                reorder_path(&path, g, budget, objective)
            } else {
                Ok(path)
            }
        }
    }
}

/// Runs one strategy over the scenario horizon.
pub fn run_scenario(cfg: &ScenarioConfig, strategy: Strategy) -> Result<SimTrace> {
    cfg.validate()?;
    let model = cfg.field.build()?;
    let g = cfg.grid.build()?;
    let budget = cfg.budget_for(strategy);
    let mut planner = match strategy {
        Strategy::Exact => Planner::Exact,
        Strategy::Heuristic => Planner::Heuristic,
        Strategy::Baseline => Planner::Baseline(build_partitions(&g, budget)?),
    };
    let schedule = flight_schedule(cfg);
    let rain = match (cfg.rain, model.b_disturbance()) {
        (Some(p), Some(_)) => Some(p.sample(cfg.horizon_h, cfg.seed)),
        _ => None,
    };
    run_loop(cfg, &model, &g, budget, &schedule, rain.as_deref(), strategy, &mut planner)
}

#[allow(clippy::too_many_arguments)]
fn run_loop(
    cfg: &ScenarioConfig,
    model: &FieldModel,
    g: &MonitorGraph,
    budget: f64,
    schedule: &[usize],
    rain: Option<&[f64]>,
    strategy: Strategy,
    planner: &mut Planner,
) -> Result<SimTrace> {
    let dim = model.state_dim();
    let n = model.n_areas();
    let mut truth_rng = stream(cfg.noise_seed(), STREAM_TRUTH);
    let mut meas_rng = stream(cfg.noise_seed(), STREAM_MEASUREMENT);
    let p0 = DMatrix::identity(dim, dim) * cfg.initial_variance;
    let mut x = GaussianSampler::new(&p0)?.draw(&mut truth_rng);
    let process = GaussianSampler::new(model.q())?;
    let c_full = model.assemble_observation();
    let sigma: Vec<f64> = model.output_variances().iter().map(|v| v.sqrt()).collect();
    let u = DVector::zeros(model.input_dim());

    let mut belief = BeliefState::isotropic(dim, cfg.initial_variance)?;
    let mut trace = SimTrace {
        strategy,
        lambda_min: Vec::with_capacity(cfg.horizon_h),
        trace_p: Vec::with_capacity(cfg.horizon_h),
        flights: Vec::new(),
        final_belief: belief.clone(),
    };
    let mut next_flight = 0;
    for hour in 1..=cfg.horizon_h {
        let d = rain.map(|r| DVector::from_element(model.disturbance_dim(), r[hour - 1]));
        x = model.a() * &x + model.b() * &u + process.draw(&mut truth_rng);
        if let (Some(d), Some(bd)) = (&d, model.b_disturbance()) {
            x += bd * d;
        }
        let prior = predict(&belief, model, &u, d.as_ref())?;

        let flying = schedule.get(next_flight) == Some(&hour);
        let (gamma, planned) = if flying {
            let objective = InfoObjective::new(&prior.p, model)?;
            let path = plan_flight(planner, cfg, g, &objective, budget, next_flight)?;
            let gamma = visit_vector(&path, n);
            let lambda = objective.lambda_min(&gamma)?;
            (gamma, Some((path, lambda)))
        } else {
            (VisitVector::none(n), None)
        };

        let sel = model.selection_matrix(&gamma)?;
        let y = DVector::from_iterator(
            sel.len(),
            sel.rows().iter().map(|&k| {
                let clean = (c_full.row(k) * &x)[(0, 0)];
                clean + sigma[k] * meas_rng.sample::<f64, _>(StandardNormal)
            }),
        );
        belief = correct(&prior, model, &gamma, &y)?;

        let info = linalg::spd_inverse(&belief.p)?;
        let lambda = linalg::min_eigenvalue(&info)?;
        trace.lambda_min.push(lambda);
        trace.trace_p.push(belief.trace());
        if let Some((path, lambda_planned)) = planned {
            trace.flights.push(FlightEvent {
                hour,
                path,
                lambda_planned,
                lambda_after: lambda,
            });
            next_flight += 1;
        }
    }
    trace.final_belief = belief;
    Ok(trace)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RatioSample {
    pub hour: usize,
    /// `None` when the denominator is below [`RATIO_FLOOR`].
    pub ratio: Option<f64>,
}

/// `R(t) = lambda_a(t) / lambda_b(t)` hour by hour for paired traces.
pub fn ratio_metric(a: &SimTrace, b: &SimTrace) -> Result<Vec<RatioSample>> {
    if a.lambda_min.len() != b.lambda_min.len() {
        return Err(Error::Dimension(format!(
            "traces cover {} and {} hours",
            a.lambda_min.len(),
            b.lambda_min.len()
        )));
    }
    let hours = |t: &SimTrace| t.flights.iter().map(|f| f.hour).collect::<Vec<_>>();
    if hours(a) != hours(b) {
        return Err(Error::InvalidArgument("traces have different flight schedules".into()));
    }
    Ok(a.lambda_min
        .iter()
        .zip(&b.lambda_min)
        .enumerate()
        .map(|(k, (&la, &lb))| RatioSample {
            hour: k + 1,
            ratio: (lb.abs() >= RATIO_FLOOR).then(|| la / lb),
        })
        .collect())
}

/// Mean of the unflagged ratio samples taken at flight hours.
pub fn mean_ratio_at_flights(ratio: &[RatioSample], flights: &[FlightEvent]) -> Option<f64> {
    let vals: Vec<f64> = flights.iter().filter_map(|f| ratio[f.hour - 1].ratio).collect();
    (!vals.is_empty()).then(|| vals.iter().sum::<f64>() / vals.len() as f64)
}

/// `time_h,lambda_min,trace_P,flight,strategy`; `flight` is the 1-based
/// flight number executed in that hour, 0 otherwise.
pub fn write_trace_csv<W: Write>(traces: &[&SimTrace], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_h", "lambda_min", "trace_P", "flight", "strategy"])?;
    for t in traces {
        for h in 0..t.lambda_min.len() {
            w.write_record([
                (h + 1).to_string(),
                format!("{:.12e}", t.lambda_min[h]),
                format!("{:.12e}", t.trace_p[h]),
                t.flight_at(h + 1).unwrap_or(0).to_string(),
                t.strategy.to_string(),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// One row per flight with the visited vertex sequence, space separated.
pub fn write_flights_csv<W: Write>(traces: &[&SimTrace], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["flight", "time_h", "strategy", "cost_s", "lambda_planned", "lambda_min", "sequence"])?;
    for t in traces {
        for (k, f) in t.flights.iter().enumerate() {
            let seq: Vec<String> = f.path.seq.iter().map(|v| v.to_string()).collect();
            w.write_record([
                (k + 1).to_string(),
                f.hour.to_string(),
                t.strategy.to_string(),
                format!("{:.6}", f.path.cost),
                format!("{:.12e}", f.lambda_planned),
                format!("{:.12e}", f.lambda_after),
                seq.join(" "),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

/// `time_h,ratio,flagged,flight`; flagged samples leave `ratio` empty.
pub fn write_ratio_csv<W: Write>(ratio: &[RatioSample], flights: &[FlightEvent], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_h", "ratio", "flagged", "flight"])?;
    for s in ratio {
        let flight = flights.iter().position(|f| f.hour == s.hour).map_or(0, |k| k + 1);
        w.write_record([
            s.hour.to_string(),
            s.ratio.map_or(String::new(), |r| format!("{r:.12e}")),
            u8::from(s.ratio.is_none()).to_string(),
            flight.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Long format `time_h,series,value` with one series per strategy metric
/// and, when given, the ratio.
pub fn write_plot_data<W: Write>(traces: &[&SimTrace], ratio: Option<&[RatioSample]>, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time_h", "series", "value"])?;
    for t in traces {
        for (name, series) in [("lambda_min", &t.lambda_min), ("trace_P", &t.trace_p)] {
            for (h, v) in series.iter().enumerate() {
                w.write_record([(h + 1).to_string(), format!("{}_{name}", t.strategy), format!("{v:.12e}")])?;
            }
        }
    }
    for s in ratio.unwrap_or(&[]) {
        if let Some(r) = s.ratio {
            w.write_record([s.hour.to_string(), "ratio".to_string(), format!("{r:.12e}")])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(seed: u64) -> ScenarioConfig {
        let mut field = DiffusionField::new(3, 3);
        field.fixed_sensors = vec![(0, 0.2), (8, 0.2)];
        let mut grid = GridSpec::new(3, 3);
        grid.start_depot = [1.5, 1.5];
        let mut cfg = ScenarioConfig::new(grid, field, 60.0);
        cfg.horizon_h = 120;
        cfg.flight_gap_h = (10, 20);
        cfg.seed = seed;
        cfg.rounding.iterations = 50;
        cfg
    }

    #[test]
    fn schedule_respects_gaps_and_horizon() {
        let cfg = small(3);
        let s = flight_schedule(&cfg);
        assert!(!s.is_empty());
        let mut prev = 0;
        for &h in &s {
            assert!((10..=20).contains(&(h - prev)));
            assert!(h <= cfg.horizon_h);
            prev = h;
        }
        assert!(cfg.horizon_h - prev < 20 + 1);
    }

    #[test]
    fn strategies_share_schedule_and_series_length() {
        let cfg = small(4);
        let hours = flight_schedule(&cfg);
        for s in [Strategy::Exact, Strategy::Heuristic, Strategy::Baseline] {
            let t = run_scenario(&cfg, s).unwrap();
            assert_eq!(t.lambda_min.len(), cfg.horizon_h);
            assert_eq!(t.trace_p.len(), cfg.horizon_h);
            assert_eq!(t.flights.iter().map(|f| f.hour).collect::<Vec<_>>(), hours);
            assert!(t.trace_p.iter().all(|&v| v.is_finite() && v > 0.0));
        }
    }

    #[test]
    fn logged_lambda_matches_planner_prediction() {
        let cfg = small(5);
        for s in [Strategy::Heuristic, Strategy::Baseline] {
            let t = run_scenario(&cfg, s).unwrap();
            for f in &t.flights {
                let rel = (f.lambda_after - f.lambda_planned).abs() / f.lambda_planned;
                assert!(rel < 1e-8, "{s}: {} vs {}", f.lambda_after, f.lambda_planned);
            }
        }
    }

    #[test]
    fn metrics_do_not_depend_on_measurement_noise() {
        let mut a = small(6);
        a.rain = Some(PulseTrain::default());
        a.field.disturbance_gain = Some(0.05);
        let mut b = a.clone();
        b.noise_seed = Some(99);
        let (ta, tb) = (run_scenario(&a, Strategy::Heuristic).unwrap(), run_scenario(&b, Strategy::Heuristic).unwrap());
        assert_eq!(ta.lambda_min, tb.lambda_min);
        assert_eq!(ta.trace_p, tb.trace_p);
        assert_ne!(ta.final_belief.x_hat, tb.final_belief.x_hat);
    }

    #[test]
    fn perfect_sensing_collapses_the_covariance() {
        let mut cfg = small(7);
        cfg.field.process_sigma = 0.0;
        cfg.field.fixed_sensors.clear();
        cfg.field.mobile_variance = vec![1e-6];
        cfg.budget_s = 1e4;
        // without process noise the contraction of A drives P towards singular
        cfg.horizon_h = 30;
        let t = run_scenario(&cfg, Strategy::Heuristic).unwrap();
        let first = t.flights[0].hour;
        assert!(t.trace_p[first - 2] > 1.0);
        assert!(t.trace_p[first - 1] < 1e-4, "{}", t.trace_p[first - 1]);
    }

    #[test]
    fn pure_prediction_loses_information() {
        let mut cfg = small(8);
        cfg.field.fixed_sensors.clear();
        cfg.flight_gap_h = (200, 200);
        cfg.horizon_h = 201;
        let t = run_scenario(&cfg, Strategy::Baseline).unwrap();
        for w in t.lambda_min[..199].windows(2) {
            assert!(w[1] < w[0]);
        }
    }

    #[test]
    fn identical_strategies_have_unit_ratio() {
        let cfg = small(9);
        let t = run_scenario(&cfg, Strategy::Baseline).unwrap();
        let r = ratio_metric(&t, &t).unwrap();
        assert!(r.iter().all(|s| s.ratio == Some(1.0)));
        assert_eq!(mean_ratio_at_flights(&r, &t.flights), Some(1.0));
    }

    #[test]
    fn tiny_denominators_are_flagged() {
        let cfg = small(10);
        let a = run_scenario(&cfg, Strategy::Baseline).unwrap();
        let mut b = a.clone();
        b.lambda_min[3] = 1e-16;
        let r = ratio_metric(&a, &b).unwrap();
        assert_eq!(r[3].ratio, None);
        assert!(r[2].ratio.is_some());
    }

    #[test]
    fn ratio_needs_paired_schedules() {
        let a = run_scenario(&small(11), Strategy::Baseline).unwrap();
        let b = run_scenario(&small(12), Strategy::Baseline).unwrap();
        if a.flights.len() != b.flights.len() || a.flights[0].hour != b.flights[0].hour {
            assert!(ratio_metric(&a, &b).is_err());
        }
    }

    #[test]
    fn rain_pulses_are_nonnegative_and_seeded() {
        let p = PulseTrain::default();
        let a = p.sample(500, 1);
        assert_eq!(a, p.sample(500, 1));
        assert!(a.iter().all(|&v| v >= 0.0));
        assert!(a.iter().any(|&v| v > 0.0));
    }

    #[test]
    fn invalid_configs_are_rejected() {
        let mut cfg = small(1);
        cfg.horizon_h = 15;
        assert!(matches!(run_scenario(&cfg, Strategy::Baseline), Err(Error::Scenario(_))));
        let mut cfg = small(1);
        cfg.budget_s = 0.0;
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn csv_outputs_have_expected_shape() {
        let cfg = small(13);
        let h = run_scenario(&cfg, Strategy::Heuristic).unwrap();
        let b = run_scenario(&cfg, Strategy::Baseline).unwrap();
        let r = ratio_metric(&h, &b).unwrap();
        let mut buf = Vec::new();
        write_trace_csv(&[&h, &b], &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().count(), 1 + 2 * cfg.horizon_h);
        assert!(text.starts_with("time_h,lambda_min,trace_P,flight,strategy\n"));
        let mut buf = Vec::new();
        write_ratio_csv(&r, &h.flights, &mut buf).unwrap();
        let mut rd = csv::Reader::from_reader(buf.as_slice());
        for (rec, s) in rd.records().zip(&r) {
            let rec = rec.unwrap();
            let v: f64 = rec[1].parse().unwrap();
            assert!((v - s.ratio.unwrap()).abs() <= 1e-11 * v.abs());
        }
        let mut buf = Vec::new();
        write_flights_csv(&[&h], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + h.flights.len());
    }
}
