//! Small heuristic-versus-exact benchmark printed as a table.

use infoplan::bench::{run_bench, BenchConfig};

fn main() -> infoplan::Result<()> {
    let cfg = BenchConfig {
        sizes: vec![(3, 3), (4, 4)],
        count: 5,
        rounding_iterations: 200,
        ..BenchConfig::default()
    };
    println!("grid  visits  mean_delta%  heuristic_s  exact_s");
    for r in run_bench(&cfg)? {
        println!(
            "{}x{}  {:>6}  {:>11.2}  {:>11.4}  {:>7.4}",
            r.rows,
            r.cols,
            r.visits,
            r.mean_degradation().unwrap_or(f64::NAN),
            r.mean_heuristic_s(),
            r.mean_exact_s().unwrap_or(f64::NAN)
        );
    }
    Ok(())
}
