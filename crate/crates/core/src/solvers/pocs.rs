//! Alternating projections between two closed convex sets.

use serde::{Deserialize, Serialize};

use super::{SolverKind, SolverSpec, SolverTrace};
use crate::error::{Error, Result};
use crate::linalg::{solve_spd, Matrix, Point};

/// A closed convex set with an exact Euclidean projection.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ConvexSet {
    /// `{x : <normal, x> <= offset}`.
    Halfspace { normal: Vec<f64>, offset: f64 },
    Ball { center: Vec<f64>, radius: f64 },
    Box { lo: Vec<f64>, hi: Vec<f64> },
    /// `{x : a x = b}` with `a` given by rows of full rank.
    Affine { a: Vec<Vec<f64>>, b: Vec<f64> },
}

impl ConvexSet {
    pub fn dim(&self) -> usize {
        match self {
            ConvexSet::Halfspace { normal, .. } => normal.len(),
            ConvexSet::Ball { center, .. } => center.len(),
            ConvexSet::Box { lo, .. } => lo.len(),
            ConvexSet::Affine { a, .. } => a.first().map_or(0, Vec::len),
        }
    }

    fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        match self {
            ConvexSet::Halfspace { normal, .. } if normal.iter().all(|&v| v == 0.0) => bad("halfspace normal is zero"),
            ConvexSet::Ball { radius, .. } if !(*radius >= 0.0) => bad("ball radius must be nonnegative"),
            ConvexSet::Box { lo, hi } if lo.len() != hi.len() || lo.iter().zip(hi).any(|(l, h)| l > h) => {
                bad("box bounds are inconsistent")
            }
            ConvexSet::Affine { a, b } if a.is_empty() || a.len() != b.len() || a.iter().any(|r| r.len() != a[0].len()) => {
                bad("affine constraint has inconsistent shape")
            }
            _ => Ok(()),
        }
    }

    pub fn project(&self, x: &Point) -> Result<Point> {
        self.validate()?;
        crate::error::check_dim(self.dim(), x.len())?;
        Ok(match self {
            ConvexSet::Halfspace { normal, offset } => {
                let a = Point::from_column_slice(normal);
                let excess = a.dot(x) - offset;
                if excess <= 0.0 {
                    x.clone()
                } else {
                    x - a.clone() * (excess / a.norm_squared())
                }
            }
            ConvexSet::Ball { center, radius } => {
                let c = Point::from_column_slice(center);
                let d = x - &c;
                let r = d.norm();
                if r <= *radius {
                    x.clone()
                } else {
                    c + d * (radius / r)
                }
            }
            ConvexSet::Box { lo, hi } => Point::from_fn(x.len(), |i, _| x[i].clamp(lo[i], hi[i])),
            ConvexSet::Affine { a, b } => {
                let am = Matrix::from_fn(a.len(), x.len(), |i, j| a[i][j]);
                let residual = &am * x - Point::from_column_slice(b);
                let w = solve_spd(&(&am * am.transpose()), &residual)?;
                x - am.transpose() * w
            }
        })
    }

    pub fn distance(&self, x: &Point) -> Result<f64> {
        Ok((x - self.project(x)?).norm())
    }

    pub fn contains(&self, x: &Point, tol: f64) -> Result<bool> {
        Ok(self.distance(x)? <= tol * (1.0 + x.norm()))
    }
}

/// `y_{n+1} = P_C(x_n)`, `x_{n+1} = P_B(y_{n+1})` from `x_0` in `B`.
///
/// Record `n` holds the objective `d_C(x_n)^2` and
/// `phi = |x_n - y_n|^2 / 2` with `y_0 = x_0`.
pub fn pocs(b: &ConvexSet, c: &ConvexSet, x0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    if !b.contains(x0, 1e-12)? {
        return Err(Error::InvalidParameter("starting point must lie in the first set".into()));
    }
    crate::error::check_dim(b.dim(), c.dim())?;
    let mut trace = SolverTrace::new(SolverKind::Pocs, "alternating projections");
    let (mut x, mut y) = (x0.clone(), x0.clone());
    for n in 0..=spec.horizon {
        let objective = c.distance(&x)?.powi(2);
        trace.push(&x, Some(&y), objective, Some(0.5 * (&x - &y).norm_squared()));
        if n == spec.horizon {
            break;
        }
        let yn = c.project(&x)?;
        let xn = b.project(&yn)?;
        trace.set_gap(n, 0.5 * objective - 0.5 * (&xn - &yn).norm_squared());
        x = xn;
        y = yn;
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;

    #[test]
    fn projections_land_in_sets_and_are_idempotent() {
        let sets = [
            ConvexSet::Halfspace { normal: vec![1.0, 2.0], offset: 1.0 },
            ConvexSet::Ball { center: vec![0.5, 0.5], radius: 0.3 },
            ConvexSet::Box { lo: vec![0.0, -1.0], hi: vec![1.0, 0.0] },
            ConvexSet::Affine { a: vec![vec![1.0, 1.0]], b: vec![1.0] },
        ];
        let x = point(&[3.0, 2.0]);
        for s in &sets {
            let p = s.project(&x).unwrap();
            assert!(s.contains(&p, 1e-14).unwrap(), "{s:?}");
            assert!((s.project(&p).unwrap() - &p).amax() < 1e-14);
        }
    }

    #[test]
    fn rejects_start_outside_first_set() {
        let b = ConvexSet::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let c = ConvexSet::Halfspace { normal: vec![1.0, 0.0], offset: -2.0 };
        assert!(matches!(pocs(&b, &c, &point(&[2.0, 0.0]), &SolverSpec::horizon(2)), Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn intersecting_sets_drive_distance_to_zero() {
        let b = ConvexSet::Ball { center: vec![0.0, 0.0], radius: 1.0 };
        let c = ConvexSet::Affine { a: vec![vec![1.0, -1.0]], b: vec![0.5] };
        let t = pocs(&b, &c, &point(&[-0.6, 0.6]), &SolverSpec::horizon(50)).unwrap();
        assert!(t.records[50].objective < 1e-12);
        for w in t.objectives().windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }
}
