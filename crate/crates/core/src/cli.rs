//! Command-line front end.
//!
//! Exit codes: 0 success, 1 other failures, 2 unparsable arguments or
//! scenario, 3 no feasible flight, 4 instance too large for exact search.
//! `INFOPLAN_THREADS` caps the worker threads.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path as FsPath, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{run_bench, write_instances_csv, write_summary_csv, BenchConfig};
use crate::error::{Error, Result};
use crate::estimator::InfoObjective;
use crate::exact::{export_misdp, solve_exact_with, MisdpEncoding};
use crate::graph::{visit_vector, MonitorGraph, Path};
use crate::heuristic::{randomized_rounding, reorder_path, RoundingConfig};
use crate::instance::filtered_prior;
use crate::relaxation::solve_relaxation;
use crate::scenario::Scenario;
use crate::simulator::{
    mean_ratio_at_flights, ratio_metric, run_scenario, write_flights_csv, write_plot_data, write_ratio_csv,
    write_trace_csv, SimTrace, Strategy,
};

pub const EXIT_OTHER: i32 = 1;
pub const EXIT_PARSE: i32 = 2;
pub const EXIT_NO_FEASIBLE_PATH: i32 = 3;
pub const EXIT_TOO_LARGE: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "infoplan", version, about = "Information-driven flight planning over a gridded field")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum PlanMethod {
    Exact,
    Relax,
    Heuristic,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Plan one flight from the scenario's prior.
    Plan {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, value_enum, default_value = "heuristic")]
        method: PlanMethod,
        #[arg(long)]
        seed: Option<u64>,
        /// Directory for path, edge and relaxation CSVs.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        budget_scale: f64,
        #[arg(long)]
        iterations: Option<usize>,
    },
    /// Run the multi-flight simulation for one or more strategies.
    Simulate {
        #[arg(long)]
        scenario: PathBuf,
        /// Comma-separated strategies; defaults to the scenario's list.
        #[arg(long, value_delimiter = ',')]
        method: Option<Vec<String>>,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Multiplies the exact and heuristic budgets; the baseline keeps its own.
        #[arg(long)]
        budget_scale: Option<f64>,
        #[arg(long)]
        iterations: Option<usize>,
        /// Also write long-format plot data.
        #[arg(long)]
        plot_data: bool,
    },
    /// Compare heuristic and exact solutions on random instances.
    Bench {
        /// Comma-separated grid sizes such as `4x4,5x5`.
        #[arg(long, default_value = "4x4,5x5,5x6,6x6", value_parser = parse_size, value_delimiter = ',')]
        sizes: Vec<(usize, usize)>,
        #[arg(long, default_value_t = 10)]
        count: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        /// Largest grid, in areas, that is also solved exactly.
        #[arg(long, default_value_t = 25)]
        exact_max_areas: usize,
    },
    /// Write the mixed-integer semidefinite model of the scenario's first flight.
    ExportMisdp {
        #[arg(long)]
        scenario: PathBuf,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        budget_scale: f64,
    },
}

fn parse_size(s: &str) -> std::result::Result<(usize, usize), String> {
    let (r, c) = s
        .split_once(['x', 'X'])
        .ok_or_else(|| format!("expected ROWSxCOLS, got '{s}'"))?;
    let r: usize = r.trim().parse().map_err(|_| format!("bad row count in '{s}'"))?;
    let c: usize = c.trim().parse().map_err(|_| format!("bad column count in '{s}'"))?;
    if r == 0 || c == 0 {
        return Err(format!("grid '{s}' is empty"));
    }
    Ok((r, c))
}

pub fn exit_code(e: &Error) -> i32 {
    match e {
        Error::Scenario(_) => EXIT_PARSE,
        Error::NoFeasiblePath { .. } => EXIT_NO_FEASIBLE_PATH,
        Error::InstanceTooLarge(_) => EXIT_TOO_LARGE,
        _ => EXIT_OTHER,
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the process exit code.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if e.use_stderr() {
                let _ = write!(stderr, "{e}");
                return EXIT_PARSE;
            }
            let _ = write!(stdout, "{e}");
            return 0;
        }
    };
    match dispatch(cli.command, stdout, stderr) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            exit_code(&e)
        }
    }
}

/// Entry point of the binary: applies `INFOPLAN_THREADS` and runs with the
/// process arguments.
pub fn main_with_env() -> i32 {
    if let Some(n) = std::env::var("INFOPLAN_THREADS").ok().and_then(|v| v.parse::<usize>().ok()) {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    let (mut out, mut err) = (std::io::stdout().lock(), std::io::stderr().lock());
    run(std::env::args_os(), &mut out, &mut err)
}

fn load(path: &FsPath, stderr: &mut dyn Write) -> Result<Scenario> {
    let s = Scenario::load(path)?;
    for w in &s.warnings {
        writeln!(stderr, "warning: {w}")?;
    }
    Ok(s)
}

fn create(dir: &FsPath, name: &str) -> Result<BufWriter<File>> {
    fs::create_dir_all(dir)?;
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

fn check_scale(scale: f64) -> Result<f64> {
    if scale > 0.0 && scale.is_finite() {
        Ok(scale)
    } else {
        Err(Error::InvalidArgument(format!("budget scale must be positive, got {scale}")))
    }
}

/// Graph, objective and budget of the first flight of a scenario.
fn first_flight(s: &Scenario, budget_scale: f64) -> Result<(MonitorGraph, InfoObjective, f64)> {
    let cfg = &s.config;
    let model = cfg.field.build()?;
    let g = cfg.grid.build()?;
    let prior = filtered_prior(&model, cfg.initial_variance, s.prior_h.max(1), None)?;
    let objective = InfoObjective::new(&prior, &model)?;
    Ok((g, objective, cfg.budget_s * check_scale(budget_scale)?))
}

fn write_path_csv<W: Write>(path: &Path, g: &MonitorGraph, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "vertex", "area", "row", "col", "arrival_s"])?;
    let grid = g.grid();
    let mut t = 0.0;
    for (k, &v) in path.seq.iter().enumerate() {
        if k > 0 {
            t += g.edge(path.seq[k - 1], v).unwrap_or(f64::NAN);
        }
        let (area, row, col) = match (g.is_area(v), grid) {
            (true, Some(gs)) => {
                let (r, c) = gs.cell(v);
                ((v - 1).to_string(), r.to_string(), c.to_string())
            }
            (true, None) => ((v - 1).to_string(), String::new(), String::new()),
            (false, _) => Default::default(),
        };
        w.write_record([k.to_string(), v.to_string(), area, row, col, format!("{t:.6}")])?;
    }
    w.flush()?;
    Ok(())
}

fn print_path(out: &mut dyn Write, method: &str, lambda: f64, path: &Path, budget: f64) -> Result<()> {
    let seq: Vec<String> = path.seq.iter().map(|v| v.to_string()).collect();
    writeln!(out, "method: {method}")?;
    writeln!(out, "lambda_min: {lambda:.12e}")?;
    writeln!(out, "cost_s: {:.6}", path.cost)?;
    writeln!(out, "budget_s: {budget:.6}")?;
    writeln!(out, "visits: {}", path.interior().len())?;
    writeln!(out, "sequence: {}", seq.join(" "))?;
    Ok(())
}

fn dispatch(cmd: Command, stdout: &mut dyn Write, stderr: &mut dyn Write) -> Result<()> {
    match cmd {
        Command::Plan {
            scenario,
            method,
            seed,
            out,
            budget_scale,
            iterations,
        } => {
            let s = load(&scenario, stderr)?;
            let (g, objective, budget) = first_flight(&s, budget_scale)?;
            if let Some(dir) = &out {
                g.write_edges_csv(create(dir, "edges.csv")?)?;
            }
            let path = match method {
                PlanMethod::Exact => {
                    let ex = solve_exact_with(&g, &objective, budget, &s.config.exact)?;
                    print_path(stdout, "exact", ex.lambda, &ex.path, budget)?;
                    ex.path
                }
                PlanMethod::Relax | PlanMethod::Heuristic => {
                    let relaxed = solve_relaxation(&g, &objective, budget, &s.config.relax)?;
                    if let PlanMethod::Relax = method {
                        writeln!(stdout, "method: relax")?;
                        writeln!(stdout, "alpha_r: {:.12e}", relaxed.alpha_r)?;
                        writeln!(stdout, "upper_bound: {:.12e}", relaxed.upper_bound)?;
                        writeln!(stdout, "fw_gap: {:.6e}", relaxed.fw_gap)?;
                        writeln!(stdout, "iterations: {}", relaxed.iterations)?;
                        writeln!(stdout, "budget_s: {budget:.6}")?;
                        if let Some(dir) = &out {
                            relaxed.write_csv(create(dir, "q_r.csv")?)?;
                        }
                        return Ok(());
                    }
                    let cfg = RoundingConfig {
                        iterations: iterations.unwrap_or(s.config.rounding.iterations),
                        seed: seed.unwrap_or(s.config.seed),
                        allow_reorder: s.config.rounding.allow_reorder,
                    };
                    let mut path = randomized_rounding(&relaxed, &g, &objective, budget, &cfg)?.path;
                    if cfg.allow_reorder {
                        path = reorder_path(&path, &g, budget, &objective)?;
                    }
                    let lambda = objective.lambda_min(&visit_vector(&path, g.n_areas()))?;
                    print_path(stdout, "heuristic", lambda, &path, budget)?;
                    path
                }
            };
            if let Some(dir) = &out {
                write_path_csv(&path, &g, create(dir, "path.csv")?)?;
            }
            Ok(())
        }
        Command::Simulate {
            scenario,
            method,
            seed,
            out,
            budget_scale,
            iterations,
            plot_data,
        } => {
            let s = load(&scenario, stderr)?;
            let mut cfg = s.config.clone();
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(l) = iterations {
                cfg.rounding.iterations = l;
            }
            if let Some(f) = budget_scale {
                let f = check_scale(f)?;
                cfg.budget_scale.heuristic *= f;
                cfg.budget_scale.exact *= f;
            }
            let strategies = match method {
                Some(list) => list.iter().map(|m| m.parse()).collect::<Result<Vec<Strategy>>>()?,
                None => s.strategies.clone(),
            };
            if strategies.is_empty() {
                return Err(Error::InvalidArgument("no strategy selected".into()));
            }
            let mut traces: Vec<SimTrace> = Vec::new();
            for &st in &strategies {
                let t = run_scenario(&cfg, st)?;
                write_trace_csv(&[&t], create(&out, &format!("trace_{st}.csv"))?)?;
                let at = t.lambda_at_flights();
                let mean = if at.is_empty() { f64::NAN } else { at.iter().sum::<f64>() / at.len() as f64 };
                writeln!(
                    stdout,
                    "{st}: flights {} mean lambda_min at flights {mean:.6e} final trace_P {:.6e}",
                    t.flights.len(),
                    t.trace_p.last().copied().unwrap_or(f64::NAN)
                )?;
                traces.push(t);
            }
            let refs: Vec<&SimTrace> = traces.iter().collect();
            write_flights_csv(&refs, create(&out, "flights.csv")?)?;
            let base = traces.iter().find(|t| t.strategy == Strategy::Baseline);
            let planned = traces
                .iter()
                .find(|t| t.strategy == Strategy::Heuristic)
                .or_else(|| traces.iter().find(|t| t.strategy == Strategy::Exact));
            let ratio = match (planned, base) {
                (Some(p), Some(b)) => {
                    let r = ratio_metric(p, b)?;
                    write_ratio_csv(&r, &p.flights, create(&out, "ratio.csv")?)?;
                    match mean_ratio_at_flights(&r, &p.flights) {
                        Some(m) => writeln!(stdout, "ratio {}/{}: mean at flights {m:.6}", p.strategy, b.strategy)?,
                        None => writeln!(stdout, "ratio {}/{}: no unflagged flight samples", p.strategy, b.strategy)?,
                    }
                    Some(r)
                }
                _ => None,
            };
            if plot_data {
                write_plot_data(&refs, ratio.as_deref(), create(&out, "plot_data.csv")?)?;
            }
            Ok(())
        }
        Command::Bench {
            sizes,
            count,
            seed,
            out,
            iterations,
            exact_max_areas,
        } => {
            if count == 0 || iterations == 0 {
                return Err(Error::InvalidArgument("count and iterations must be at least 1".into()));
            }
            let cfg = BenchConfig {
                sizes,
                count,
                seed,
                rounding_iterations: iterations,
                exact_max_areas,
                ..BenchConfig::default()
            };
            let reports = run_bench(&cfg)?;
            writeln!(
                stdout,
                "{:<6} {:>6} {:>6} {:>12} {:>12} {:>14} {:>12}",
                "grid", "visits", "count", "mean_delta%", "max_delta%", "heuristic_s", "exact_s"
            )?;
            let opt = |x: Option<f64>, p: usize| x.map_or("-".to_string(), |v| format!("{v:.p$}"));
            for r in &reports {
                writeln!(
                    stdout,
                    "{:<6} {:>6} {:>6} {:>12} {:>12} {:>14.4} {:>12}",
                    format!("{}x{}", r.rows, r.cols),
                    r.visits,
                    r.instances.len(),
                    opt(r.mean_degradation(), 2),
                    opt(r.max_degradation(), 2),
                    r.mean_heuristic_s(),
                    opt(r.mean_exact_s(), 4)
                )?;
            }
            if let Some(dir) = &out {
                write_summary_csv(&reports, create(dir, "bench_summary.csv")?)?;
                write_instances_csv(&reports, create(dir, "bench_instances.csv")?)?;
            }
            Ok(())
        }
        Command::ExportMisdp {
            scenario,
            out,
            budget_scale,
        } => {
            let s = load(&scenario, stderr)?;
            let (g, objective, budget) = first_flight(&s, budget_scale)?;
            let text = export_misdp(&MisdpEncoding::build(&g, budget), &objective)?;
            match out {
                Some(p) => {
                    if let Some(dir) = p.parent().filter(|d| !d.as_os_str().is_empty()) {
                        fs::create_dir_all(dir)?;
                    }
                    fs::write(&p, text)?;
                }
                None => stdout.write_all(text.as_bytes())?,
            }
            Ok(())
        }
    }
}
