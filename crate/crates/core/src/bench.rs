//! Heuristic-versus-exact benchmark over random grid instances.
//!
//! Instance `k` of size `r x c` is drawn from ChaCha stream `k` of a seed
//! mixed with the grid size, so results do not depend on how instances are
//! spread over worker threads. Times are wall-clock per instance.

use std::io::Write;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::Result;
use crate::exact::{solve_exact_with, ExactConfig};
use crate::heuristic::{degradation, randomized_rounding, RoundingConfig};
use crate::instance::random_instance_with_visits;
use crate::relaxation::{solve_relaxation, RelaxConfig};

/// Flight length in visits used for each grid size.
pub fn default_visits(rows: usize, cols: usize) -> usize {
    match (rows.min(cols), rows.max(cols)) {
        (4, 4) => 6,
        (5, 5) => 7,
        (5, 6) => 8,
        (6, 6) => 9,
        _ => ((1.5 * ((rows * cols) as f64).sqrt()).round() as usize).clamp(1, 12),
    }
}

#[derive(Debug, Clone)]
pub struct BenchConfig {
    pub sizes: Vec<(usize, usize)>,
    pub count: usize,
    pub seed: u64,
    pub rounding_iterations: usize,
    pub relax: RelaxConfig,
    /// Grids with more areas than this are benchmarked heuristic-only.
    pub exact_max_areas: usize,
    /// Worker threads; `None` uses the rayon default.
    pub threads: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        Self {
            sizes: vec![(4, 4), (5, 5), (5, 6), (6, 6)],
            count: 10,
            seed: 0,
            rounding_iterations: 500,
            relax: RelaxConfig::default(),
            exact_max_areas: 25,
            threads: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct InstanceResult {
    pub index: usize,
    pub relax_s: f64,
    pub rounding_s: f64,
    pub alpha_r: f64,
    pub lambda_heuristic: f64,
    pub exact: Option<ExactResult>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExactResult {
    pub seconds: f64,
    pub lambda: f64,
    pub degradation: f64,
}

impl InstanceResult {
    /// Relaxation plus rounding.
    pub fn heuristic_s(&self) -> f64 {
        self.relax_s + self.rounding_s
    }
}

#[derive(Debug, Clone)]
pub struct SizeReport {
    pub rows: usize,
    pub cols: usize,
    pub visits: usize,
    pub instances: Vec<InstanceResult>,
}

fn mean(xs: impl Iterator<Item = f64>) -> Option<f64> {
    let (s, n) = xs.fold((0.0, 0usize), |(s, n), x| (s + x, n + 1));
    (n > 0).then(|| s / n as f64)
}

impl SizeReport {
    pub fn mean_heuristic_s(&self) -> f64 {
        mean(self.instances.iter().map(InstanceResult::heuristic_s)).unwrap_or(f64::NAN)
    }
    pub fn mean_exact_s(&self) -> Option<f64> {
        mean(self.instances.iter().filter_map(|i| i.exact.as_ref().map(|e| e.seconds)))
    }
    pub fn mean_degradation(&self) -> Option<f64> {
        mean(self.instances.iter().filter_map(|i| i.exact.as_ref().map(|e| e.degradation)))
    }
    pub fn max_degradation(&self) -> Option<f64> {
        self.instances
            .iter()
            .filter_map(|i| i.exact.as_ref().map(|e| e.degradation))
            .reduce(f64::max)
    }
}

fn instance_rng(seed: u64, rows: usize, cols: usize, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ ((rows as u64) << 40) ^ ((cols as u64) << 20));
    rng.set_stream(index as u64);
    rng
}

/// Solves instance `index` of one grid size with both methods.
pub fn run_instance(cfg: &BenchConfig, rows: usize, cols: usize, index: usize) -> Result<InstanceResult> {
    let mut rng = instance_rng(cfg.seed, rows, cols, index);
    let inst = random_instance_with_visits(rows, cols, default_visits(rows, cols), &mut rng)?;
    let obj = inst.objective()?;
    let t = Instant::now();
    let relaxed = solve_relaxation(&inst.graph, &obj, inst.budget, &cfg.relax)?;
    let relax_s = t.elapsed().as_secs_f64();
    let rounding = RoundingConfig {
        iterations: cfg.rounding_iterations,
        seed: index as u64,
        allow_reorder: false,
    };
    let t = Instant::now();
    let h = randomized_rounding(&relaxed, &inst.graph, &obj, inst.budget, &rounding)?;
    let rounding_s = t.elapsed().as_secs_f64();
    let exact = if rows * cols <= cfg.exact_max_areas {
        let t = Instant::now();
        let ex = solve_exact_with(&inst.graph, &obj, inst.budget, &ExactConfig::default())?;
        let seconds = t.elapsed().as_secs_f64();
        Some(ExactResult {
            seconds,
            lambda: ex.lambda,
            degradation: degradation(h.lambda, ex.lambda)?,
        })
    } else {
        None
    };
    Ok(InstanceResult {
        index,
        relax_s,
        rounding_s,
        alpha_r: relaxed.alpha_r,
        lambda_heuristic: h.lambda,
        exact,
    })
}

pub fn run_bench(cfg: &BenchConfig) -> Result<Vec<SizeReport>> {
    let work = || -> Result<Vec<SizeReport>> {
        cfg.sizes
            .iter()
            .map(|&(rows, cols)| {
                let instances = (0..cfg.count)
                    .into_par_iter()
                    .map(|k| run_instance(cfg, rows, cols, k))
                    .collect::<Result<Vec<_>>>()?;
                Ok(SizeReport {
                    rows,
                    cols,
                    visits: default_visits(rows, cols),
                    instances,
                })
            })
            .collect()
    };
    match cfg.threads {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build()
            .map_err(|e| crate::Error::InvalidArgument(format!("thread pool: {e}")))?
            .install(work),
        None => work(),
    }
}

/// One row per grid size.
pub fn write_summary_csv<W: Write>(reports: &[SizeReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "grid",
        "visits",
        "count",
        "mean_degradation_pct",
        "max_degradation_pct",
        "mean_heuristic_s",
        "mean_exact_s",
    ])?;
    let opt = |x: Option<f64>, prec: usize| x.map_or(String::new(), |v| format!("{v:.prec$}"));
    for r in reports {
        w.write_record([
            format!("{}x{}", r.rows, r.cols),
            r.visits.to_string(),
            r.instances.len().to_string(),
            opt(r.mean_degradation(), 4),
            opt(r.max_degradation(), 4),
            format!("{:.6}", r.mean_heuristic_s()),
            opt(r.mean_exact_s(), 6),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// One row per instance.
pub fn write_instances_csv<W: Write>(reports: &[SizeReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "grid",
        "instance",
        "relax_s",
        "rounding_s",
        "alpha_r",
        "lambda_heuristic",
        "lambda_exact",
        "exact_s",
        "degradation_pct",
    ])?;
    for r in reports {
        for i in &r.instances {
            let (le, es, d) = match &i.exact {
                Some(e) => (format!("{:.12e}", e.lambda), format!("{:.6}", e.seconds), format!("{:.6}", e.degradation)),
                None => Default::default(),
            };
            w.write_record([
                format!("{}x{}", r.rows, r.cols),
                i.index.to_string(),
                format!("{:.6}", i.relax_s),
                format!("{:.6}", i.rounding_s),
                format!("{:.12e}", i.alpha_r),
                format!("{:.12e}", i.lambda_heuristic),
                le,
                es,
                d,
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
