//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails. Tolerances are pinned below.

use std::collections::HashMap;
use std::process::ExitCode;
use std::time::Instant;

use infoplan::bench::{default_visits, run_bench, BenchConfig};
use infoplan::estimator::{correct, information_matrix, BeliefKind, BeliefState, InfoObjective};
use infoplan::exact::solve_exact;
use infoplan::graph::{is_feasible, visit_vector, MonitorGraph, Path};
use infoplan::heuristic::{degradation, randomized_rounding, RoundingConfig};
use infoplan::instance::{random_instance, random_instance_with_visits, PlanningInstance};
use infoplan::linalg::{frobenius, spd_inverse, symmetric_eigen};
use infoplan::model::VisitVector;
use infoplan::relaxation::{solve_relaxation, RelaxConfig};
use infoplan::scenario::Scenario;
use infoplan::simulator::{mean_ratio_at_flights, ratio_metric, run_scenario, SimTrace, Strategy};
use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const C1_MEAN_DELTA_PCT: f64 = 10.0;
const C1_MAX_SECONDS: f64 = 300.0;
const C2_ALPHA_REL: f64 = 1e-6;
const C3_REL_FROB: f64 = 1e-8;
const C3_MAX_COND: f64 = 1e6;
const C4_SLACK: f64 = 1e-12;
const C6_WIN_FRACTION: f64 = 0.95;
const C6_MAX_SECONDS: f64 = 120.0;
const C7_RATIO: (f64, f64) = (0.8, 1.2);
const C8_HEURISTIC_GROWTH: f64 = 5.0;
const C8_EXACT_GROWTH: f64 = 20.0;
const ROUNDING_WITHIN_PCT: f64 = 5.0;
const ROUNDING_MIN_HITS: usize = 95;

type Outcome = (bool, String);

fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(seed);
    r.set_stream(stream);
    r
}

fn lambda(obj: &InfoObjective, path: &Path, g: &MonitorGraph) -> f64 {
    obj.lambda_min(&visit_vector(path, g.n_areas())).unwrap()
}

fn heuristic(inst: &PlanningInstance, obj: &InfoObjective, seed: u64) -> (f64, Path) {
    let relaxed = solve_relaxation(&inst.graph, obj, inst.budget, &RelaxConfig::default()).unwrap();
    let cfg = RoundingConfig {
        iterations: 500,
        seed,
        allow_reorder: false,
    };
    let h = randomized_rounding(&relaxed, &inst.graph, obj, inst.budget, &cfg).unwrap();
    (relaxed.alpha_r, h.path)
}

fn c1_degradation() -> Outcome {
    let t = Instant::now();
    let mut deltas = Vec::new();
    for k in 0..100 {
        let inst = random_instance_with_visits(4, 4, default_visits(4, 4), &mut rng(1, k)).unwrap();
        let obj = inst.objective().unwrap();
        let (_, path) = heuristic(&inst, &obj, k);
        let opt = solve_exact(&inst.graph, &obj, inst.budget).unwrap();
        let lh = lambda(&obj, &path, &inst.graph);
        let lo = lambda(&obj, &opt.path, &inst.graph);
        deltas.push(degradation(lh, lo).unwrap());
    }
    let secs = t.elapsed().as_secs_f64();
    let mean = deltas.iter().sum::<f64>() / deltas.len() as f64;
    let max = deltas.iter().copied().fold(0.0, f64::max);
    (
        mean <= C1_MEAN_DELTA_PCT && secs < C1_MAX_SECONDS,
        format!("100 4x4 instances: mean delta {mean:.2}% (limit {C1_MEAN_DELTA_PCT}%), max {max:.2}%, {secs:.0} s"),
    )
}

fn c2_sandwich() -> Outcome {
    let mut violations = 0;
    let mut worst_alpha = 0.0f64;
    let sizes = [(3, 3), (4, 4), (5, 5)];
    for k in 0..100u64 {
        let (r, c) = sizes[k as usize % 3];
        let inst = random_instance_with_visits(r, c, default_visits(r, c), &mut rng(2, k)).unwrap();
        let obj = inst.objective().unwrap();
        let (alpha, path) = heuristic(&inst, &obj, k);
        let opt = solve_exact(&inst.graph, &obj, inst.budget).unwrap();
        let star = lambda(&obj, &opt.path, &inst.graph);
        let lh = lambda(&obj, &path, &inst.graph);
        let short = (star - alpha) / star.abs();
        worst_alpha = worst_alpha.max(short);
        if alpha < star - C2_ALPHA_REL * star.abs() || lh > star {
            violations += 1;
        }
    }
    (
        violations == 0,
        format!("100 instances 3x3..5x5: {violations} violations, worst relative alpha shortfall {worst_alpha:.2e}"),
    )
}

fn random_visits<R: Rng>(n: usize, rng: &mut R) -> VisitVector {
    let p = rng.random_range(0.0..1.0);
    VisitVector::new((0..n).map(|_| rng.random_bool(p)).collect())
}

fn c3_duality() -> Outcome {
    let mut worst = 0.0f64;
    let (mut checked, mut skipped, mut k) = (0, 0, 0u64);
    while checked < 100 {
        let mut r = rng(3, k);
        k += 1;
        let (rows, cols) = (r.random_range(1..=4), r.random_range(1..=4));
        let inst = random_instance(rows, cols, &mut r).unwrap();
        let gamma = random_visits(rows * cols, &mut r);
        let info = information_matrix(&inst.prior, &inst.model, &gamma).unwrap();
        let eig = symmetric_eigen(&info.y).unwrap();
        let (lo, hi) = eig.values.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v)));
        if lo <= 0.0 || hi / lo > C3_MAX_COND {
            skipped += 1;
            continue;
        }
        let dim = inst.model.state_dim();
        let prior = BeliefState::new(DVector::zeros(dim), inst.prior.clone(), BeliefKind::Prior).unwrap();
        let n_sel = inst.model.selection_matrix(&gamma).unwrap().len();
        let post = correct(&prior, &inst.model, &gamma, &DVector::zeros(n_sel)).unwrap();
        let y_inv = spd_inverse(&info.y).unwrap();
        worst = worst.max(frobenius(&(&post.p - y_inv)) / frobenius(&post.p));
        checked += 1;
    }
    (
        worst <= C3_REL_FROB,
        format!("{checked} instances ({skipped} skipped as ill-conditioned): worst relative error {worst:.2e}"),
    )
}

fn c4_monotonicity() -> Outcome {
    let (mut violations, mut worst) = (0, 0.0f64);
    for k in 0..1000u64 {
        let mut r = rng(4, k);
        let (rows, cols) = (r.random_range(1..=4), r.random_range(1..=4));
        let inst = random_instance(rows, cols, &mut r).unwrap();
        let obj = inst.objective().unwrap();
        let n = rows * cols;
        let mut gamma = random_visits(n, &mut r);
        if gamma.count() == n {
            gamma.set(r.random_range(0..n), false);
        }
        let off: Vec<usize> = (0..n).filter(|&i| !gamma.is_visited(i)).collect();
        let before = obj.lambda_min(&gamma).unwrap();
        gamma.set(off[r.random_range(0..off.len())], true);
        let after = obj.lambda_min(&gamma).unwrap();
        worst = worst.max(before - after);
        if after < before - C4_SLACK {
            violations += 1;
        }
    }
    (
        violations == 0,
        format!("1000 draws: {violations} violations, largest decrease {worst:.2e}"),
    )
}

/// Best path by trying every ordering of distinct areas along graph edges.
fn enumerate(g: &MonitorGraph, obj: &InfoObjective, budget: f64) -> Option<f64> {
    fn go(
        g: &MonitorGraph,
        obj: &InfoObjective,
        budget: f64,
        seq: &mut Vec<usize>,
        cost: f64,
        cache: &mut HashMap<Vec<usize>, f64>,
        best: &mut Option<f64>,
    ) {
        let last = *seq.last().unwrap();
        if last != 0 {
            if g.edge(last, g.end()).is_some() {
                let mut closed = seq.clone();
                closed.push(g.end());
                let p = Path::from_sequence(closed, g);
                if is_feasible(&p, g, budget) {
                    let mut key = seq[1..].to_vec();
                    key.sort_unstable();
                    let l = *cache.entry(key).or_insert_with(|| lambda(obj, &p, g));
                    if best.is_none_or(|b| l > b) {
                        *best = Some(l);
                    }
                }
            }
        }
        for v in 1..=g.n_areas() {
            if seq.contains(&v) {
                continue;
            }
            if let Some(t) = g.edge(last, v) {
                // edge times are nonnegative, so an over-budget prefix stays over budget
                if cost + t > budget {
                    continue;
                }
                seq.push(v);
                go(g, obj, budget, seq, cost + t, cache, best);
                seq.pop();
            }
        }
    }
    let mut best = None;
    go(g, obj, budget, &mut vec![0], 0.0, &mut HashMap::new(), &mut best);
    best
}

fn c5_oracle() -> Outcome {
    let mut mismatches = 0;
    for k in 0..100u64 {
        let inst = random_instance(3, 3, &mut rng(5, k)).unwrap();
        let obj = inst.objective().unwrap();
        let oracle = enumerate(&inst.graph, &obj, inst.budget);
        let exact = solve_exact(&inst.graph, &obj, inst.budget).ok();
        let same = match (oracle, &exact) {
            (None, None) => true,
            (Some(l), Some(e)) => {
                is_feasible(&e.path, &inst.graph, inst.budget)
                    && lambda(&obj, &e.path, &inst.graph) == l
                    && e.lambda == l
            }
            _ => false,
        };
        if !same {
            mismatches += 1;
        }
    }
    (mismatches == 0, format!("100 3x3 instances: {mismatches} mismatches"))
}

fn scenario_6x6() -> Scenario {
    Scenario::load(&std::path::Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios/field_6x6.toml")).unwrap()
}

fn c6_simulation(baseline: &mut Option<SimTrace>) -> Outcome {
    let s = scenario_6x6();
    let t = Instant::now();
    let h = run_scenario(&s.config, Strategy::Heuristic).unwrap();
    let b = run_scenario(&s.config, Strategy::Baseline).unwrap();
    let secs = t.elapsed().as_secs_f64();
    let (hf, bf) = (h.lambda_at_flights(), b.lambda_at_flights());
    let wins = hf.iter().zip(&bf).filter(|(a, b)| a >= b).count();
    let frac = wins as f64 / hf.len().max(1) as f64;
    let mean = mean_ratio_at_flights(&ratio_metric(&h, &b).unwrap(), &h.flights);
    *baseline = Some(b);
    let ok = !hf.is_empty() && frac >= C6_WIN_FRACTION && mean.is_some_and(|m| m > 1.0) && secs < C6_MAX_SECONDS;
    (
        ok,
        format!(
            "6x6, 350 h: heuristic >= baseline at {wins}/{} flights, mean R {:.4}, {secs:.0} s",
            hf.len(),
            mean.unwrap_or(f64::NAN)
        ),
    )
}

fn c7_half_budget(baseline: &SimTrace) -> Outcome {
    let mut s = scenario_6x6();
    s.config.budget_scale.heuristic *= 0.5;
    let h = run_scenario(&s.config, Strategy::Heuristic).unwrap();
    let mean = mean_ratio_at_flights(&ratio_metric(&h, baseline).unwrap(), &h.flights);
    let ok = mean.is_some_and(|m| (C7_RATIO.0..=C7_RATIO.1).contains(&m));
    (
        ok,
        format!(
            "heuristic at 50% budget vs baseline: mean R {:.4} (band {:?})",
            mean.unwrap_or(f64::NAN),
            C7_RATIO
        ),
    )
}

fn c8_scaling() -> Outcome {
    let cfg = BenchConfig {
        sizes: vec![(4, 4), (5, 5), (6, 6)],
        count: 10,
        seed: 8,
        threads: Some(1),
        ..BenchConfig::default()
    };
    let r = run_bench(&cfg).unwrap();
    let h = r[2].mean_heuristic_s() / r[0].mean_heuristic_s();
    let e = r[1].mean_exact_s().unwrap() / r[0].mean_exact_s().unwrap();
    (
        h <= C8_HEURISTIC_GROWTH && e >= C8_EXACT_GROWTH,
        format!(
            "heuristic 4x4 {:.3} s -> 6x6 {:.3} s ({h:.1}x, limit {C8_HEURISTIC_GROWTH}x); \
             exact 4x4 {:.4} s -> 5x5 {:.4} s ({e:.1}x, need {C8_EXACT_GROWTH}x)",
            r[0].mean_heuristic_s(),
            r[2].mean_heuristic_s(),
            r[0].mean_exact_s().unwrap(),
            r[1].mean_exact_s().unwrap()
        ),
    )
}

/// Rounding quality on 3x3 grids: within 5% of the optimum in at least 95
/// of 100 seeded runs.
fn rounding_3x3() -> Outcome {
    let mut hits = 0;
    for k in 0..100u64 {
        let inst = random_instance_with_visits(3, 3, default_visits(3, 3), &mut rng(9, k)).unwrap();
        let obj = inst.objective().unwrap();
        let (_, path) = heuristic(&inst, &obj, k);
        let opt = solve_exact(&inst.graph, &obj, inst.budget).unwrap();
        let d = degradation(lambda(&obj, &path, &inst.graph), lambda(&obj, &opt.path, &inst.graph)).unwrap();
        if d <= ROUNDING_WITHIN_PCT {
            hits += 1;
        }
    }
    (
        hits >= ROUNDING_MIN_HITS,
        format!("3x3, L=500: {hits}/100 runs within {ROUNDING_WITHIN_PCT}% (need {ROUNDING_MIN_HITS})"),
    )
}

fn main() -> ExitCode {
    // `cargo test -- --list` and filters: this binary has no named tests
    if std::env::args().any(|a| a == "--list") {
        return ExitCode::SUCCESS;
    }
    let mut baseline = None;
    let mut results: Vec<(&str, Outcome)> = Vec::new();
    let mut report = |name: &'static str, o: Outcome| {
        println!("{} {name}: {}", if o.0 { "PASS" } else { "FAIL" }, o.1);
        results.push((name, o));
    };
    report("1 heuristic degradation", c1_degradation());
    report("2 relaxation sandwich", c2_sandwich());
    report("3 filter duality", c3_duality());
    report("4 monotonicity", c4_monotonicity());
    report("5 exact vs enumeration", c5_oracle());
    report("6 simulation comparison", c6_simulation(&mut baseline));
    let b = baseline.expect("criterion 6 ran");
    report("7 half-budget experiment", c7_half_budget(&b));
    report("8 runtime scaling", c8_scaling());
    report("rounding quality on 3x3", rounding_3x3());
    let failed: Vec<&str> = results.iter().filter(|r| !r.1 .0).map(|r| r.0).collect();
    println!("{} of {} checks passed", results.len() - failed.len(), results.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        println!("failed: {}", failed.join(", "));
        ExitCode::FAILURE
    }
}
