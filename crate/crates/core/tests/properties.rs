use infoplan::estimator::{correct, predict, BeliefState};
use infoplan::exact::{solve_exact, verify_assignment, MisdpEncoding};
use infoplan::graph::{is_feasible, visit_vector, GridSpec, MonitorGraph, Path};
use infoplan::heuristic::{reorder_path, rollout, rollout_rng};
use infoplan::instance::{random_instance, PlanningInstance};
use infoplan::linalg::{min_eigenvalue, symmetric_eigen};
use infoplan::model::{DiffusionField, VisitVector};
use infoplan::relaxation::{solve_relaxation, RelaxConfig};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn instance(rows: usize, cols: usize, seed: u64) -> PlanningInstance {
    random_instance(rows, cols, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap()
}

/// Random self-avoiding flight that stays within `budget`, if any exists.
fn random_flight(g: &MonitorGraph, budget: f64, seed: u64) -> Option<Path> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let to_end = |v: usize| g.edge(v, g.end()).unwrap_or(f64::INFINITY);
    let mut seq = vec![0];
    let mut cost = 0.0;
    loop {
        let cur = *seq.last().unwrap();
        let options: Vec<usize> = g
            .neighbors(cur)
            .iter()
            .copied()
            .filter(|&v| g.is_area(v) && !seq.contains(&v))
            .filter(|&v| cost + g.edge(cur, v).unwrap() + to_end(v) <= budget)
            .collect();
        if options.is_empty() || (seq.len() > 1 && rng.random_bool(0.2)) {
            break;
        }
        let v = options[rng.random_range(0..options.len())];
        cost += g.edge(cur, v).unwrap();
        seq.push(v);
    }
    (seq.len() > 1).then(|| {
        seq.push(g.end());
        Path::from_sequence(seq, g)
    })
}

fn symmetric(n: usize, seed: u64) -> DMatrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let a = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    &a + a.transpose()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn jacobi_matches_library_eigenvalues(n in 1usize..12, seed in any::<u64>()) {
        let a = symmetric(n, seed);
        let ours = symmetric_eigen(&a).unwrap();
        let mut reference: Vec<f64> = a.clone().symmetric_eigen().eigenvalues.iter().copied().collect();
        reference.sort_by(f64::total_cmp);
        for (x, y) in ours.values.iter().zip(&reference) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + y.abs()));
        }
        let v = &ours.vectors;
        let rebuilt = v * DMatrix::from_diagonal(&DVector::from_vec(ours.values.clone())) * v.transpose();
        prop_assert!((rebuilt - &a).abs().max() <= 1e-10 * (1.0 + a.abs().max()));
        prop_assert!((v.transpose() * v - DMatrix::identity(n, n)).abs().max() <= 1e-10);
    }

    #[test]
    fn adding_a_visit_never_lowers_lambda(rows in 1usize..4, cols in 1usize..4, seed in any::<u64>(), bits in any::<u16>(), pick in any::<usize>()) {
        let inst = instance(rows, cols, seed);
        let obj = inst.objective().unwrap();
        let n = rows * cols;
        let mut gamma = VisitVector::new((0..n).map(|i| bits >> i & 1 == 1).collect());
        let off: Vec<usize> = (0..n).filter(|&i| !gamma.is_visited(i)).collect();
        prop_assume!(!off.is_empty());
        let before = obj.lambda_min(&gamma).unwrap();
        gamma.set(off[pick % off.len()], true);
        prop_assert!(obj.lambda_min(&gamma).unwrap() >= before - 1e-12);
    }

    #[test]
    fn feasible_paths_encode_and_decode(rows in 1usize..5, cols in 1usize..5, seed in any::<u64>()) {
        let inst = instance(rows, cols, seed);
        let g = &inst.graph;
        let path = random_flight(g, inst.budget, seed);
        prop_assume!(path.is_some());
        let path = path.unwrap();
        prop_assert!(is_feasible(&path, g, inst.budget));
        let enc = MisdpEncoding::build(g, inst.budget);
        let (q, u) = enc.encode_path(&path).unwrap();
        prop_assert!(verify_assignment(&q, &u, g, inst.budget));
        prop_assert_eq!(enc.decode(&q, g).unwrap().seq, path.seq);
    }

    #[test]
    fn covariance_stays_symmetric_positive_definite(rows in 1usize..4, cols in 1usize..4, seed in any::<u64>(), steps in 1usize..30) {
        let model = DiffusionField::new(rows, cols).build().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut belief = BeliefState::isotropic(model.state_dim(), rng.random_range(0.1..20.0)).unwrap();
        let u = DVector::zeros(model.input_dim());
        for _ in 0..steps {
            let prior = predict(&belief, &model, &u, None).unwrap();
            let gamma = VisitVector::new((0..rows * cols).map(|_| rng.random_bool(0.3)).collect());
            let n_sel = model.selection_matrix(&gamma).unwrap().len();
            let y = DVector::from_fn(n_sel, |_, _| rng.random_range(-1.0..1.0));
            belief = correct(&prior, &model, &gamma, &y).unwrap();
            prop_assert!(belief.trace() <= prior.trace() + 1e-12);
        }
        prop_assert_eq!(&belief.p, &belief.p.transpose());
        prop_assert!(min_eigenvalue(&belief.p).unwrap() > 0.0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn rollouts_and_reordering_stay_feasible(rows in 2usize..4, cols in 2usize..4, seed in any::<u64>()) {
        let inst = instance(rows, cols, seed);
        let obj = inst.objective().unwrap();
        let g = &inst.graph;
        let relaxed = solve_relaxation(g, &obj, inst.budget, &RelaxConfig::default()).unwrap();
        let best = solve_exact(g, &obj, inst.budget).unwrap();
        prop_assert!(relaxed.alpha_r >= best.lambda * (1.0 - 1e-6));
        for k in 0..20 {
            let p = rollout(&relaxed, g, inst.budget, &mut rollout_rng(seed, k)).unwrap();
            prop_assert!(is_feasible(&p, g, inst.budget));
            let lam = obj.lambda_min(&visit_vector(&p, g.n_areas())).unwrap();
            prop_assert!(lam <= best.lambda);
            let r = reorder_path(&p, g, inst.budget, &obj).unwrap();
            prop_assert!(is_feasible(&r, g, inst.budget));
            prop_assert!(obj.lambda_min(&visit_vector(&r, g.n_areas())).unwrap() >= lam);
        }
    }

    #[test]
    fn exact_is_at_least_any_random_flight(rows in 1usize..4, cols in 1usize..4, seed in any::<u64>()) {
        let inst = instance(rows, cols, seed);
        let obj = inst.objective().unwrap();
        let g = &inst.graph;
        let best = solve_exact(g, &obj, inst.budget).unwrap();
        prop_assert!(is_feasible(&best.path, g, inst.budget));
        for k in 0..20 {
            if let Some(p) = random_flight(g, inst.budget, seed ^ k) {
                prop_assert!(obj.lambda_min(&visit_vector(&p, g.n_areas())).unwrap() <= best.lambda);
            }
        }
    }
}

#[test]
fn grid_edges_are_symmetric_and_positive() {
    for (rows, cols) in [(1, 1), (2, 3), (4, 4)] {
        let g = GridSpec::new(rows, cols).build().unwrap();
        for (i, j, t) in g.interior_edges() {
            assert!(t > 0.0);
            assert_eq!(g.edge(j, i), Some(t));
        }
    }
}
