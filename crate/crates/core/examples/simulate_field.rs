//! Multi-flight simulation of the planner against the coverage baseline on
//! a 4x4 field, with the ratio of their minimum eigenvalues.

use infoplan::baseline::block_budget;
use infoplan::graph::GridSpec;
use infoplan::model::DiffusionField;
use infoplan::simulator::{mean_ratio_at_flights, ratio_metric, run_scenario, ScenarioConfig, Strategy};

fn main() -> infoplan::Result<()> {
    let mut field = DiffusionField::new(4, 4);
    field.fixed_sensors = vec![(5, 0.1), (10, 0.1)];
    let mut grid = GridSpec::new(4, 4);
    grid.start_depot = [2.0, 2.0];
    let budget = block_budget(&grid.build()?, 2, 2)?.ceil();

    let mut cfg = ScenarioConfig::new(grid, field, budget);
    cfg.horizon_h = 200;
    cfg.rounding.iterations = 200;

    let planned = run_scenario(&cfg, Strategy::Heuristic)?;
    let baseline = run_scenario(&cfg, Strategy::Baseline)?;
    for (f, b) in planned.flights.iter().zip(&baseline.flights) {
        println!(
            "hour {:>3}: planner {:.4}, baseline {:.4}",
            f.hour, f.lambda_after, b.lambda_after
        );
    }
    let ratio = ratio_metric(&planned, &baseline)?;
    println!("mean ratio at flights {:?}", mean_ratio_at_flights(&ratio, &planned.flights));
    Ok(())
}
