mod common;

use std::sync::Arc;

use common::entropy;
use gencost::costs::{bregman_cost, fenchel_young_cost, quadratic_cost};
use gencost::linalg::{point, Matrix};
use gencost::objective::{EntropyObjective, LinearObjective, ObjectiveRef, QuadraticObjective, SinObjective, SumObjective};
use gencost::par::Execution;
use gencost::potential::{ObjectivePotential, PotentialRef, QuadraticPotential, SumExp};
use gencost::rng;
use gencost::solvers::{
    alternating_minimize, forward_backward, gdgc_explicit, gradient_descent, latent_em, log_divergence_gd,
    mirror_descent, natural_gradient, newton, pocs, riemannian_sphere_gd, sinkhorn, ConvexSet, SolverSpec,
    SolverTrace,
};
use gencost::transforms::{SearchConfig, Surrogate};
use gencost::verify::{
    check_cross_curvature, check_descent, check_five_point, CurvatureExpectation, FivePointForm,
};
use proptest::prelude::*;

fn assert_descends(t: &SolverTrace) {
    let r = check_descent(t, 1e-10);
    assert!(r.passed, "{}: {:?}", t.solver.name(), r.first_violation());
}

fn quad(a: &[f64], anchor: &[f64]) -> ObjectiveRef {
    let d = anchor.len();
    Arc::new(QuadraticObjective::new(Matrix::from_row_slice(d, d, a), point(anchor), 0.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn euclidean_solvers_descend(a in -2.0f64..2.0, b in -2.0f64..2.0) {
        let spec = SolverSpec::horizon(30);
        let x0 = point(&[a, b]);
        let f = quad(&[1.2, 0.3, 0.3, 0.7], &[0.4, -0.2]);
        assert_descends(&gradient_descent(&f, 2.0, &x0, &spec).unwrap());
        let u: PotentialRef = Arc::new(SumExp { dim: 2, ridge: 0.5 });
        assert_descends(&natural_gradient(&quad(&[0.4, 0.1, 0.1, 0.3], &[0.0, 0.0]), &u, &x0, &spec).unwrap());
        let g: ObjectiveRef = Arc::new(SumExp { dim: 2, ridge: 1.0 });
        assert_descends(&newton(&g, &x0, &spec).unwrap());
        let uq: PotentialRef = Arc::new(QuadraticPotential::new(2, 1.0));
        let small = x0.clone() * 0.2;
        assert_descends(&log_divergence_gd(&quad(&[0.5, 0.0, 0.0, 0.5], &[0.0, 0.0]), &uq, 0.5, &small, &spec).unwrap());
        let c = quadratic_cost(2, 2.0);
        let cfg = SearchConfig::cube(2, -3.0, 3.0).with_seed(1);
        let gg = quad(&[1.0, 0.0, 0.0, 1.0], &[0.7, -1.2]);
        assert_descends(&forward_backward(&f, Some(&gg), &c, &x0, &spec, &cfg).unwrap());
        let h = quad(&[0.6, 0.0, 0.0, 0.6], &[-0.5, 0.3]);
        let phi = Surrogate::split(quadratic_cost(2, 1.0), Some(gg), Some(h), cfg);
        assert_descends(&alternating_minimize(&phi, &x0, &spec).unwrap());
    }

    #[test]
    fn positive_and_sphere_solvers_descend(a in 0.2f64..2.0, b in 0.2f64..2.0, angle in 0.1f64..3.0) {
        let spec = SolverSpec::horizon(30);
        let f: ObjectiveRef = Arc::new(EntropyObjective { weights: point(&[0.5, 0.7]), slope: point(&[0.2, -0.3]) });
        assert_descends(&mirror_descent(&f, &entropy(2), &point(&[a, b]), &spec).unwrap());
        let lin: ObjectiveRef = Arc::new(LinearObjective { slope: point(&[0.0, 0.3, 1.0]), offset: 0.0 });
        let x0 = point(&[angle.sin(), 0.0, angle.cos()]);
        assert_descends(&riemannian_sphere_gd(&lin, 1.0, &x0, &spec).unwrap());
    }

    #[test]
    fn discrete_solvers_descend(seed in any::<u64>()) {
        let spec = SolverSpec::horizon(30);
        let mut r = rng::stream(seed, 0);
        let b = Matrix::from_fn(5, 4, |_, _| rng::uniform_in_box(&mut r, &[(0.0, 1.0)])[0]);
        let mu = rng::probability_vector(&mut r, 5);
        let nu = rng::probability_vector(&mut r, 4);
        assert_descends(&sinkhorn(&b, 0.5, &mu, &nu, &spec).unwrap().trace);
        let mut k = Matrix::from_fn(5, 3, |_, _| rng::uniform_in_box(&mut r, &[(0.05, 1.0)])[0]);
        for mut col in k.column_iter_mut() {
            let s = col.sum();
            col /= s;
        }
        let theta0 = rng::probability_vector(&mut r, 3);
        assert_descends(&latent_em(&k, &mu, &theta0, &spec).unwrap());
        let x0 = rng::uniform_in_box(&mut r, &[(-2.0, 2.0); 3]);
        let first = ConvexSet::Box { lo: vec![-2.0; 3], hi: vec![2.0; 3] };
        let second = ConvexSet::Ball { center: vec![3.0, 0.0, 0.0], radius: 1.5 };
        assert_descends(&pocs(&first, &second, &x0, &spec).unwrap());
    }
}

#[test]
fn descent_iterates_do_not_depend_on_the_dual_parametrization() {
    let f: ObjectiveRef = Arc::new(EntropyObjective { weights: point(&[0.5, 0.7]), slope: point(&[0.2, -0.3]) });
    let spec = SolverSpec::horizon(50);
    let x0 = point(&[1.5, 0.2]);
    let a = gdgc_explicit(&f, &bregman_cost(entropy(2)), &x0, &spec).unwrap();
    let b = gdgc_explicit(&f, &fenchel_young_cost(entropy(2)), &x0, &spec).unwrap();
    for n in 0..a.len() {
        let dev = (a.x(n) - b.x(n)).amax();
        assert!(dev <= 1e-10, "n = {n}: {dev:e}");
    }
}

#[test]
fn natural_gradient_with_the_objective_as_potential_is_newton() {
    let f: ObjectiveRef = Arc::new(
        SumObjective::new(vec![Arc::new(SumExp { dim: 2, ridge: 0.0 }), quad(&[0.5, 0.1, 0.1, 0.4], &[0.0, 0.0])]).unwrap(),
    );
    let spec = SolverSpec::horizon(30);
    let x0 = point(&[1.0, -1.5]);
    let u: PotentialRef = Arc::new(ObjectivePotential(f.clone()));
    let a = natural_gradient(&f, &u, &x0, &spec).unwrap();
    let b = newton(&f, &x0, &spec).unwrap();
    for n in 0..a.len() {
        assert!((a.x(n) - b.x(n)).amax() <= 1e-10 * a.x(n).amax().max(1.0), "n = {n}");
    }
}

#[test]
fn sequential_and_parallel_checks_agree_exactly() {
    let sine: ObjectiveRef = Arc::new(SinObjective { dim: 1, amplitude: 1.0, frequency: 1.0 });
    let reports: Vec<_> = [Execution::Sequential, Execution::Parallel]
        .into_iter()
        .map(|e| {
            let cfg = SearchConfig::cube(1, -4.0, 4.0).with_seed(9).with_execution(e);
            let phi = Surrogate::c_transform_surrogate(quadratic_cost(1, 1.0), sine.clone(), cfg.clone());
            let five = check_five_point(&phi, 0.0, FivePointForm::Standard, 30, &cfg).unwrap();
            let cfg2 = SearchConfig::cube(2, 0.2, 2.0).with_seed(9).with_execution(e);
            let curv = check_cross_curvature(&bregman_cost(entropy(2)), CurvatureExpectation::Zero, 1e-5, 50, &cfg2).unwrap();
            (five, curv)
        })
        .collect();
    assert_eq!(reports[0], reports[1]);
}
