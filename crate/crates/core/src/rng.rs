//! Counter-based random streams: sample `i` of a seeded run always draws
//! from the same stream, independent of evaluation order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::linalg::Point;

pub fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn uniform_in_box<R: Rng>(rng: &mut R, bounds: &[(f64, f64)]) -> Point {
    Point::from_iterator(bounds.len(), bounds.iter().map(|&(lo, hi)| rng.gen_range(lo..=hi)))
}

/// Standard normal vector via Box-Muller.
pub fn normal_vector<R: Rng>(rng: &mut R, d: usize) -> Point {
    Point::from_iterator(
        d,
        (0..d).map(|_| {
            let u1: f64 = rng.gen_range(f64::EPSILON..1.0);
            let u2: f64 = rng.gen::<f64>();
            (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
        }),
    )
}

pub fn unit_vector<R: Rng>(rng: &mut R, d: usize) -> Point {
    loop {
        let v = normal_vector(rng, d);
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

/// Random probability vector with entries bounded away from zero.
pub fn probability_vector<R: Rng>(rng: &mut R, n: usize) -> Point {
    let v = Point::from_iterator(n, (0..n).map(|_| rng.gen_range(0.1..1.0)));
    let s = v.sum();
    v / s
}
