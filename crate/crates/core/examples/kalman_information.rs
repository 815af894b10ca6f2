//! One filter step in covariance form next to the information matrix the
//! planner maximizes: both give the same posterior.

use infoplan::estimator::{correct, information_matrix, predict, BeliefState};
use infoplan::linalg::{min_eigenvalue, spd_inverse};
use infoplan::model::{DiffusionField, VisitVector};
use nalgebra::DVector;

fn main() -> infoplan::Result<()> {
    let mut field = DiffusionField::new(2, 3);
    field.fixed_sensors.push((0, 0.3));
    let model = field.build()?;
    let n = model.n_areas();

    let belief = BeliefState::isotropic(model.state_dim(), 4.0)?;
    let prior = predict(&belief, &model, &DVector::zeros(model.input_dim()), None)?;
    let visits = VisitVector::from_areas(n, [2, 4]);
    let sel = model.selection_matrix(&visits)?;
    let post = correct(&prior, &model, &visits, &DVector::zeros(sel.len()))?;

    let info = information_matrix(&prior.p, &model, &visits)?;
    let gap = (spd_inverse(&post.p)? - &info.y).abs().max();
    println!("trace P: prior {:.4}, posterior {:.4}", prior.trace(), post.trace());
    println!("lambda_min(Y) {:.6}, from P^-1 {:.6}", info.lambda_min, min_eigenvalue(&spd_inverse(&post.p)?)?);
    println!("max |P^-1 - Y| = {gap:.2e}");
    Ok(())
}
