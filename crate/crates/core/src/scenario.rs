//! TOML scenario files.
//!
//! Sections `[grid]`, `[model]`, `[sensors]`, `[budget]`, `[simulation]` and
//! `[strategy]`. Numeric keys carry their unit in the name (`_s`, `_h`,
//! `_cells`). Unknown keys are rejected. `grid.rows`, `grid.cols` and
//! `budget.budget_s` are mandatory; everything else has a default.
//!
//! ```toml
//! [grid]
//! rows = 3
//! cols = 3
//! depot_x_cells = 1.5
//! depot_y_cells = 0.0
//!
//! [sensors]
//! mobile_variance = 0.1
//! fixed = [{ area = 4, variance = 0.2 }]
//!
//! [budget]
//! budget_s = 60.0
//! ```

use std::path::Path as FsPath;

use serde::Deserialize;

use crate::error::{Error, Result};
use crate::exact::ExactConfig;
use crate::graph::GridSpec;
use crate::heuristic::RoundingConfig;
use crate::model::DiffusionField;
use crate::relaxation::RelaxConfig;
use crate::simulator::{BudgetScale, PulseTrain, ScenarioConfig, Strategy};

/// Budgets above this fraction of the model step trigger a warning.
pub const FLIGHT_TO_STEP_WARN: f64 = 0.1;

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawFile {
    grid: Option<RawGrid>,
    #[serde(default)]
    model: RawModel,
    #[serde(default)]
    sensors: RawSensors,
    budget: Option<RawBudget>,
    #[serde(default)]
    simulation: RawSimulation,
    #[serde(default)]
    strategy: RawStrategy,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    rows: Option<usize>,
    cols: Option<usize>,
    cell_time_s: Option<f64>,
    depot_x_cells: Option<f64>,
    depot_y_cells: Option<f64>,
    end_depot_x_cells: Option<f64>,
    end_depot_y_cells: Option<f64>,
    cruise_speed_ratio: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawModel {
    coupling: Option<f64>,
    process_sigma: Option<f64>,
    dt_h: Option<f64>,
    input_gain: Option<f64>,
    disturbance_gain: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSensors {
    mobile_variance: Option<f64>,
    #[serde(default)]
    fixed: Vec<RawFixed>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFixed {
    area: usize,
    variance: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBudget {
    budget_s: Option<f64>,
    exact_scale: Option<f64>,
    heuristic_scale: Option<f64>,
    baseline_scale: Option<f64>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawSimulation {
    horizon_h: Option<usize>,
    flight_gap_min_h: Option<usize>,
    flight_gap_max_h: Option<usize>,
    initial_variance: Option<f64>,
    prior_h: Option<usize>,
    seed: Option<u64>,
    rain: Option<bool>,
    rain_start_probability: Option<f64>,
    rain_min_h: Option<usize>,
    rain_max_h: Option<usize>,
}

#[derive(Debug, Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawStrategy {
    strategies: Option<Vec<String>>,
    iterations: Option<usize>,
    allow_reorder: Option<bool>,
    relax_max_iters: Option<usize>,
    relax_tol: Option<f64>,
    exact_max_visits: Option<usize>,
}

/// A parsed scenario with the load-time warnings.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub config: ScenarioConfig,
    /// Strategies `simulate` runs by default.
    pub strategies: Vec<Strategy>,
    /// Hours of fixed-sensor filtering from the initial covariance before a
    /// single `plan`.
    pub prior_h: usize,
    pub warnings: Vec<String>,
}

fn required<T>(value: Option<T>, section: &str, key: &str) -> Result<T> {
    value.ok_or_else(|| Error::Scenario(format!("missing key `{key}` in section [{section}]")))
}

fn positive(value: f64, section: &str, key: &str) -> Result<f64> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(Error::Scenario(format!("[{section}] {key} must be positive, got {value}")))
    }
}

impl Scenario {
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string()))?;
        let g = required(raw.grid, "grid", "rows")?;
        let rows = required(g.rows, "grid", "rows")?;
        let cols = required(g.cols, "grid", "cols")?;
        if rows == 0 || cols == 0 {
            return Err(Error::Scenario("[grid] rows and cols must be at least 1".into()));
        }
        let mut grid = GridSpec::new(rows, cols);
        if let Some(t) = g.cell_time_s {
            grid.cell_time_s = positive(t, "grid", "cell_time_s")?;
        }
        if let Some(r) = g.cruise_speed_ratio {
            grid.cruise_speed_ratio = positive(r, "grid", "cruise_speed_ratio")?;
        }
        grid.start_depot = [g.depot_x_cells.unwrap_or(0.0), g.depot_y_cells.unwrap_or(0.0)];
        grid.end_depot = match (g.end_depot_x_cells, g.end_depot_y_cells) {
            (None, None) => None,
            (Some(x), Some(y)) => Some([x, y]),
            (None, Some(_)) => return Err(Error::Scenario("missing key `end_depot_x_cells` in section [grid]".into())),
            (Some(_), None) => return Err(Error::Scenario("missing key `end_depot_y_cells` in section [grid]".into())),
        };

        let mut field = DiffusionField::new(rows, cols);
        let m = raw.model;
        if let Some(c) = m.coupling {
            field.coupling = c;
        }
        if let Some(s) = m.process_sigma {
            field.process_sigma = s;
        }
        if let Some(dt) = m.dt_h {
            field.dt_hours = positive(dt, "model", "dt_h")?;
        }
        if let Some(gain) = m.input_gain {
            field.input_gain = gain;
        }
        field.disturbance_gain = m.disturbance_gain;
        if let Some(v) = raw.sensors.mobile_variance {
            field.mobile_variance = vec![positive(v, "sensors", "mobile_variance")?];
        }
        for f in &raw.sensors.fixed {
            if f.area >= rows * cols {
                return Err(Error::Scenario(format!(
                    "[sensors] fixed sensor on area {} outside a {rows}x{cols} grid",
                    f.area
                )));
            }
            field.fixed_sensors.push((f.area, positive(f.variance, "sensors", "fixed.variance")?));
        }

        let b = required(raw.budget, "budget", "budget_s")?;
        let budget_s = positive(required(b.budget_s, "budget", "budget_s")?, "budget", "budget_s")?;
        let scale = |v: Option<f64>, key: &str| v.map_or(Ok(1.0), |x| positive(x, "budget", key));
        let budget_scale = BudgetScale {
            exact: scale(b.exact_scale, "exact_scale")?,
            heuristic: scale(b.heuristic_scale, "heuristic_scale")?,
            baseline: scale(b.baseline_scale, "baseline_scale")?,
        };

        let mut config = ScenarioConfig::new(grid, field, budget_s);
        config.budget_scale = budget_scale;
        let s = raw.simulation;
        if let Some(h) = s.horizon_h {
            config.horizon_h = h;
        }
        config.flight_gap_h = (
            s.flight_gap_min_h.unwrap_or(config.flight_gap_h.0),
            s.flight_gap_max_h.unwrap_or(config.flight_gap_h.1),
        );
        if let Some(v) = s.initial_variance {
            config.initial_variance = positive(v, "simulation", "initial_variance")?;
        }
        config.seed = s.seed.unwrap_or(0);
        if s.rain.unwrap_or(false) {
            let mut p = PulseTrain::default();
            if let Some(x) = s.rain_start_probability {
                if !(0.0..=1.0).contains(&x) {
                    return Err(Error::Scenario("[simulation] rain_start_probability must lie in [0, 1]".into()));
                }
                p.start_probability = x;
            }
            p.duration_h = (s.rain_min_h.unwrap_or(p.duration_h.0), s.rain_max_h.unwrap_or(p.duration_h.1));
            if p.duration_h.0 == 0 || p.duration_h.0 > p.duration_h.1 {
                return Err(Error::Scenario("[simulation] rain_min_h must be in 1..=rain_max_h".into()));
            }
            config.rain = Some(p);
        }

        let st = raw.strategy;
        config.rounding = RoundingConfig {
            iterations: st.iterations.unwrap_or(500),
            seed: 0,
            allow_reorder: st.allow_reorder.unwrap_or(false),
        };
        if config.rounding.iterations == 0 {
            return Err(Error::Scenario("[strategy] iterations must be at least 1".into()));
        }
        config.relax = RelaxConfig {
            tol: st.relax_tol,
            max_iters: st.relax_max_iters.unwrap_or(500),
        };
        config.exact = ExactConfig {
            max_visits: st.exact_max_visits.unwrap_or(ExactConfig::default().max_visits),
            ..ExactConfig::default()
        };
        let strategies = st
            .strategies
            .unwrap_or_else(|| vec!["heuristic".into(), "baseline".into()])
            .iter()
            .map(|k| k.parse().map_err(|_| Error::Scenario(format!("[strategy] unknown strategy '{k}'"))))
            .collect::<Result<Vec<Strategy>>>()?;
        config.validate()?;

        let mut warnings = Vec::new();
        let step_s = config.field.dt_hours * 3600.0;
        if budget_s > FLIGHT_TO_STEP_WARN * step_s {
            warnings.push(format!(
                "flight budget {budget_s} s is not small against the {step_s} s model step; \
                 flights are treated as instantaneous"
            ));
        }
        Ok(Self {
            config,
            strategies,
            prior_h: s.prior_h.unwrap_or(24),
            warnings,
        })
    }

    pub fn load(path: &FsPath) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Scenario(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = "[grid]\nrows = 2\ncols = 3\n[budget]\nbudget_s = 50.0\n";

    #[test]
    fn minimal_file_takes_defaults() {
        let s = Scenario::from_toml(MINIMAL).unwrap();
        assert_eq!((s.config.grid.rows, s.config.grid.cols), (2, 3));
        assert_eq!(s.config.budget_s, 50.0);
        assert_eq!(s.config.horizon_h, 350);
        assert_eq!(s.config.flight_gap_h, (35, 70));
        assert_eq!(s.strategies, vec![Strategy::Heuristic, Strategy::Baseline]);
        assert!(s.warnings.is_empty());
    }

    #[test]
    fn missing_key_names_section_and_key() {
        let e = Scenario::from_toml("[grid]\nrows = 2\ncols = 2\n[budget]\n").unwrap_err();
        assert!(e.to_string().contains("`budget_s` in section [budget]"), "{e}");
        let e = Scenario::from_toml("[grid]\nrows = 2\n[budget]\nbudget_s = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("`cols` in section [grid]"), "{e}");
        let e = Scenario::from_toml("[budget]\nbudget_s = 1.0\n").unwrap_err();
        assert!(e.to_string().contains("[grid]"), "{e}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let e = Scenario::from_toml(&format!("{MINIMAL}[simulation]\nhorizon = 3\n")).unwrap_err();
        assert!(e.to_string().contains("horizon"), "{e}");
        assert!(Scenario::from_toml(&format!("{MINIMAL}[extra]\n")).is_err());
    }

    #[test]
    fn full_file_round_trips_into_config() {
        let text = r#"
[grid]
rows = 3
cols = 3
cell_time_s = 12.0
depot_x_cells = 1.5
depot_y_cells = 0.0
cruise_speed_ratio = 3.0

[model]
coupling = 0.1
process_sigma = 0.2
disturbance_gain = 0.05

[sensors]
mobile_variance = 0.3
fixed = [{ area = 4, variance = 0.2 }]

[budget]
budget_s = 80.0
heuristic_scale = 0.5

[simulation]
horizon_h = 100
flight_gap_min_h = 10
flight_gap_max_h = 20
seed = 9
rain = true

[strategy]
strategies = ["exact", "heuristic"]
iterations = 40
allow_reorder = true
"#;
        let s = Scenario::from_toml(text).unwrap();
        let c = &s.config;
        assert_eq!(c.grid.cell_time_s, 12.0);
        assert_eq!(c.grid.start_depot, [1.5, 0.0]);
        assert_eq!(c.field.fixed_sensors, vec![(4, 0.2)]);
        assert_eq!(c.field.mobile_variance, vec![0.3]);
        assert_eq!(c.budget_for(Strategy::Heuristic), 40.0);
        assert_eq!(c.flight_gap_h, (10, 20));
        assert!(c.rain.is_some());
        assert_eq!(c.rounding.iterations, 40);
        assert!(c.rounding.allow_reorder);
        assert_eq!(s.strategies, vec![Strategy::Exact, Strategy::Heuristic]);
    }

    #[test]
    fn bad_values_are_reported() {
        assert!(Scenario::from_toml("[grid]\nrows = 0\ncols = 2\n[budget]\nbudget_s = 5.0\n").is_err());
        assert!(Scenario::from_toml("[grid]\nrows = 2\ncols = 2\n[budget]\nbudget_s = -5.0\n").is_err());
        let e = Scenario::from_toml(&format!("{MINIMAL}[sensors]\nfixed = [{{ area = 6, variance = 1.0 }}]\n")).unwrap_err();
        assert!(e.to_string().contains("area 6"), "{e}");
        let e = Scenario::from_toml(&format!("{MINIMAL}[strategy]\nstrategies = [\"greedy\"]\n")).unwrap_err();
        assert!(e.to_string().contains("greedy"), "{e}");
    }

    #[test]
    fn long_flights_warn() {
        let s = Scenario::from_toml("[grid]\nrows = 1\ncols = 2\n[budget]\nbudget_s = 1000.0\n").unwrap();
        assert_eq!(s.warnings.len(), 1);
    }
}
