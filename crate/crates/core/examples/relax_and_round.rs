//! Convex relaxation followed by randomized rounding, compared with the
//! exact optimum on one random instance.

use infoplan::exact::solve_exact;
use infoplan::heuristic::{degradation, randomized_rounding, RoundingConfig};
use infoplan::instance::random_instance_with_visits;
use infoplan::relaxation::{solve_relaxation, RelaxConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> infoplan::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let inst = random_instance_with_visits(4, 4, 6, &mut rng)?;
    let obj = inst.objective()?;

    let relaxed = solve_relaxation(&inst.graph, &obj, inst.budget, &RelaxConfig::default())?;
    println!(
        "relaxation: alpha_r {:.5}, bound {:.5}, {} iterations",
        relaxed.alpha_r, relaxed.upper_bound, relaxed.iterations
    );
    let mut weights: Vec<(usize, f64)> = relaxed.visit_weights().into_iter().enumerate().collect();
    weights.sort_by(|a, b| b.1.total_cmp(&a.1));
    println!("heaviest areas {:?}", &weights[..4]);

    let cfg = RoundingConfig { iterations: 500, seed: 1, allow_reorder: false };
    let rounded = randomized_rounding(&relaxed, &inst.graph, &obj, inst.budget, &cfg)?;
    let exact = solve_exact(&inst.graph, &obj, inst.budget)?;
    println!("rounded {:.5} via {:?} (rollout {})", rounded.lambda, rounded.path.seq, rounded.best_iteration);
    println!("exact   {:.5} via {:?}", exact.lambda, exact.path.seq);
    println!("degradation {:.2}%", degradation(rounded.lambda, exact.lambda)?);
    Ok(())
}
