mod common;

use std::sync::Arc;

use common::entropy;
use gencost::costs::{bregman_cost, fenchel_young_cost, quadratic_cost, CostRef};
use gencost::linalg::{point, Matrix};
use gencost::objective::{EntropyObjective, ObjectiveRef, QuadraticObjective, SinObjective, SumObjective};
use gencost::par::{map_indexed, Execution};
use gencost::rng;
use gencost::transforms::{c_transform, marginal_f, SearchConfig, Surrogate};

fn majorization_gap(f: ObjectiveRef, c: CostRef, cfg: SearchConfig, samples: usize) -> f64 {
    let phi = Surrogate::c_transform_surrogate(c, f.clone(), cfg.clone());
    map_indexed(Execution::Parallel, samples, |i| {
        let mut r = rng::stream(cfg.seed, i as u64);
        let x = rng::uniform_in_box(&mut r, &cfg.bounds);
        let y = rng::uniform_in_box(&mut r, cfg.dual_box());
        phi.phi(&x, &y).unwrap() - f.value(&x).unwrap()
    })
    .into_iter()
    .fold(f64::INFINITY, f64::min)
}

#[test]
fn surrogate_majorizes_the_objective() {
    let sine: ObjectiveRef = Arc::new(SinObjective { dim: 1, amplitude: 1.0, frequency: 1.0 });
    let gap = majorization_gap(sine, quadratic_cost(1, 1.0), SearchConfig::cube(1, -4.0, 4.0).with_seed(1), 1000);
    assert!(gap >= -1e-8, "sine: {gap:e}");

    let ent: ObjectiveRef = Arc::new(EntropyObjective { weights: point(&[0.5, 0.4]), slope: point(&[0.1, -0.1]) });
    let mut cfg = SearchConfig::cube(2, 0.1, 2.5).with_seed(2);
    cfg.dual_bounds = Some(vec![(0.1, 2.5); 2]);
    let gap = majorization_gap(ent, bregman_cost(entropy(2)), cfg, 1000);
    assert!(gap >= -1e-8, "entropy: {gap:e}");
}

#[test]
fn marginal_is_invariant_under_dual_reparametrization() {
    let f: ObjectiveRef = Arc::new(EntropyObjective { weights: point(&[0.5, 0.4]), slope: point(&[0.1, -0.1]) });
    let u = entropy(2);
    let (lo, hi) = (0.05, 3.0);
    let mut cfg_b = SearchConfig::cube(2, lo, hi).with_seed(3);
    cfg_b.dual_bounds = Some(vec![(lo, hi); 2]);
    // The gradient of the negative entropy is ln y + 1.
    let mut cfg_fy = cfg_b.clone();
    cfg_fy.dual_bounds = Some(vec![(lo.ln() + 1.0, hi.ln() + 1.0); 2]);
    let b = Surrogate::c_transform_surrogate(bregman_cost(u.clone()), f.clone(), cfg_b.clone());
    let fy = Surrogate::c_transform_surrogate(fenchel_young_cost(u), f, cfg_fy);
    let mut r = rng::stream(3, 0);
    for _ in 0..20 {
        let x = rng::uniform_in_box(&mut r, &[(0.2, 2.0); 2]);
        let (a, _) = marginal_f(&b, &x).unwrap();
        let (e, _) = marginal_f(&fy, &x).unwrap();
        assert!((a - e).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {e} at {x:?}");
    }
}

#[test]
fn c_transform_is_monotone_in_the_objective() {
    let low: ObjectiveRef = Arc::new(SinObjective { dim: 1, amplitude: 1.0, frequency: 1.0 });
    let bump: ObjectiveRef = Arc::new(QuadraticObjective::new(Matrix::from_element(1, 1, 0.3), point(&[0.5]), 0.1).unwrap());
    let high: ObjectiveRef = Arc::new(SumObjective::new(vec![low.clone(), bump]).unwrap());
    let c = quadratic_cost(1, 1.0);
    let cfg = SearchConfig::cube(1, -4.0, 4.0).with_seed(4);
    let mut r = rng::stream(4, 0);
    for _ in 0..100 {
        let y = rng::uniform_in_box(&mut r, &[(-4.0, 4.0)]);
        let a = c_transform(&low, &c, &y, &cfg).unwrap().value;
        let b = c_transform(&high, &c, &y, &cfg).unwrap().value;
        assert!(a <= b + 1e-10, "{a} > {b} at {y:?}");
    }
}
