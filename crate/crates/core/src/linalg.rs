//! Small dense linear-algebra helpers on top of nalgebra.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

pub type Point = DVector<f64>;
pub type Matrix = DMatrix<f64>;

pub fn point(v: &[f64]) -> Point {
    DVector::from_row_slice(v)
}

/// Solves `a x = b` by LU; fails on a singular or non-finite system.
pub fn solve(a: &Matrix, b: &Point) -> Result<Point> {
    if a.nrows() != a.ncols() || a.nrows() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.len() });
    }
    let x = a.clone().lu().solve(b).ok_or(Error::SingularHessian)?;
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularHessian)
    }
}

/// Solves `a x = b` for symmetric positive definite `a`.
pub fn solve_spd(a: &Matrix, b: &Point) -> Result<Point> {
    let chol = a.clone().cholesky().ok_or(Error::SingularHessian)?;
    let x = chol.solve(b);
    if x.iter().all(|v| v.is_finite()) {
        Ok(x)
    } else {
        Err(Error::SingularHessian)
    }
}

pub fn symmetrize(a: &Matrix) -> Matrix {
    (a + a.transpose()) * 0.5
}

/// Smallest eigenvalue of the symmetric part of `a`.
pub fn min_eigenvalue(a: &Matrix) -> f64 {
    SymmetricEigen::new(symmetrize(a))
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min)
}

pub fn max_abs(a: &Matrix) -> f64 {
    a.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Orthonormal basis of the complement of the unit vector `x`, as columns.
pub fn orthogonal_complement(x: &Point) -> Matrix {
    let d = x.len();
    let mut cols: Vec<Point> = Vec::with_capacity(d.saturating_sub(1));
    let mut basis = vec![x.normalize()];
    for k in 0..d {
        if cols.len() + 1 == d {
            break;
        }
        let mut v = Point::zeros(d);
        v[k] = 1.0;
        for b in &basis {
            v -= b * b.dot(&v);
        }
        for b in &basis {
            v -= b * b.dot(&v);
        }
        let n = v.norm();
        if n > 1e-8 {
            let v = v / n;
            basis.push(v.clone());
            cols.push(v);
        }
    }
    Matrix::from_columns(&cols)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solve_recovers_solution() {
        let a = Matrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 3.0]);
        let x = solve(&a, &point(&[3.0, 4.0])).unwrap();
        assert!((x - point(&[1.0, 1.0])).norm() < 1e-14);
    }

    #[test]
    fn singular_system_is_rejected() {
        let a = Matrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(solve_spd(&a, &point(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn complement_is_orthonormal() {
        let x = point(&[1.0, 2.0, -2.0]).normalize();
        let e = orthogonal_complement(&x);
        assert_eq!(e.ncols(), 2);
        let g = e.transpose() * &e;
        assert!((g - Matrix::identity(2, 2)).norm() < 1e-12);
        assert!((e.transpose() * x).norm() < 1e-12);
    }
}
