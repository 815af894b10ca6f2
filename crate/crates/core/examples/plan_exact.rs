//! Optimal flight on a small grid by exhaustive search.

use infoplan::exact::solve_exact;
use infoplan::graph::{is_feasible, GridSpec};
use infoplan::instance::filtered_prior;
use infoplan::estimator::InfoObjective;
use infoplan::model::DiffusionField;

fn main() -> infoplan::Result<()> {
    let mut field = DiffusionField::new(3, 4);
    field.fixed_sensors.push((5, 0.2));
    let model = field.build()?;

    let mut grid = GridSpec::new(3, 4);
    grid.start_depot = [2.0, 0.0];
    let g = grid.build()?;

    let prior = filtered_prior(&model, 10.0, 24, None)?;
    let objective = InfoObjective::new(&prior, &model)?;
    let budget = 60.0;

    let best = solve_exact(&g, &objective, budget)?;
    assert!(is_feasible(&best.path, &g, budget));
    println!("lambda_min {:.6}", best.lambda);
    println!("path {:?} ({:.1} s of {budget} s)", best.path.seq, best.path.cost);
    println!("searched {} partial paths, {} visit sets", best.nodes, best.evaluations);
    Ok(())
}
