//! Coupling solvers on finite spaces: entropic optimal transport and a
//! latent-variable EM. Both alternate between two I-projections.

use super::{SolverKind, SolverSpec, SolverTrace};
use crate::error::{Error, Result};
use crate::linalg::{Matrix, Point};

/// Generalized KL divergence `sum p log(p/q) - p + q`, with `0 log 0 = 0`.
/// Infinite when `p > 0` where `q = 0`.
pub fn kl_divergence(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch { expected: p.len(), got: q.len() });
    }
    let mut s = 0.0;
    for (&a, &b) in p.iter().zip(q) {
        if a < 0.0 || b < 0.0 || !a.is_finite() || !b.is_finite() {
            return Err(Error::Domain("KL divergence needs nonnegative finite entries".into()));
        }
        if a > 0.0 {
            if b == 0.0 {
                return Ok(f64::INFINITY);
            }
            s += a * (a / b).ln();
        }
        s += b - a;
    }
    Ok(s)
}

fn check_distribution(p: &Point, what: &str) -> Result<()> {
    if p.iter().any(|&v| !(v > 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter(format!("{what} must have positive finite entries")));
    }
    if (p.sum() - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidParameter(format!("{what} must sum to one")));
    }
    Ok(())
}

fn flat(m: &Matrix) -> Vec<f64> {
    // Row-major flattening.
    m.transpose().as_slice().to_vec()
}

fn log_sum_exp<I: Iterator<Item = f64> + Clone>(it: I) -> f64 {
    let m = it.clone().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + it.map(|v| (v - m).exp()).sum::<f64>().ln()
}

/// Output of [`sinkhorn`]: the trace plus the couplings `pi_n`.
#[derive(Debug, Clone)]
pub struct SinkhornRun {
    pub trace: SolverTrace,
    pub couplings: Vec<Matrix>,
    /// Whether the iteration ran on log-couplings.
    pub log_domain: bool,
}

/// Alternating row and column scaling of the Gibbs coupling
/// `gamma_0 ~ exp(-b/eps) mu nu^T`, normalized to unit mass.
///
/// Record `n` holds `x = pi_n`, `y = gamma_n` (row-major), the objective
/// `KL(rowmarg(pi_n) | mu)` and `phi = KL(pi_n | gamma_n)`. Every `pi_n`
/// has column marginal `nu`; `pi_0` is the column scaling of `gamma_0`.
pub fn sinkhorn(b: &Matrix, eps: f64, mu: &Point, nu: &Point, spec: &SolverSpec) -> Result<SinkhornRun> {
    if !(eps > 0.0) {
        return Err(Error::InvalidParameter("entropic regularization must be positive".into()));
    }
    let (m, k) = b.shape();
    if mu.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: mu.len() });
    }
    if nu.len() != k {
        return Err(Error::DimensionMismatch { expected: k, got: nu.len() });
    }
    check_distribution(mu, "source marginal")?;
    check_distribution(nu, "target marginal")?;
    if b.iter().any(|v| !v.is_finite()) {
        return Err(Error::Domain("cost matrix must be finite".into()));
    }
    let log_domain = b.iter().map(|&v| -v / eps).fold(f64::INFINITY, f64::min) < 1e-300f64.ln();

    // Work on log-couplings throughout; exponentiate directly when the
    // entries are representable.
    let mut lp = Matrix::from_fn(m, k, |i, j| -b[(i, j)] / eps + mu[i].ln() + nu[j].ln());
    let total = log_sum_exp(lp.iter().copied());
    lp.add_scalar_mut(-total);

    let to_linear = |l: &Matrix| l.map(f64::exp);
    let row_scale = |l: &Matrix| -> Matrix {
        let mut out = l.clone();
        for i in 0..m {
            let r = if log_domain { log_sum_exp(l.row(i).iter().copied()) } else { l.row(i).iter().map(|v| v.exp()).sum::<f64>().ln() };
            for j in 0..k {
                out[(i, j)] = l[(i, j)] - r + mu[i].ln();
            }
        }
        out
    };
    let col_scale = |l: &Matrix| -> Matrix {
        let mut out = l.clone();
        for j in 0..k {
            let c = if log_domain { log_sum_exp(l.column(j).iter().copied()) } else { l.column(j).iter().map(|v| v.exp()).sum::<f64>().ln() };
            for i in 0..m {
                out[(i, j)] = l[(i, j)] - c + nu[j].ln();
            }
        }
        out
    };
    let marginal_kl = |l: &Matrix, rows: bool| -> Result<f64> {
        let (marg, target): (Vec<f64>, &Point) = if rows {
            ((0..m).map(|i| log_sum_exp(l.row(i).iter().copied()).exp()).collect(), mu)
        } else {
            ((0..k).map(|j| log_sum_exp(l.column(j).iter().copied()).exp()).collect(), nu)
        };
        if rows {
            kl_divergence(&marg, target.as_slice())
        } else {
            kl_divergence(target.as_slice(), &marg)
        }
    };

    let mut trace = SolverTrace::new(SolverKind::Sinkhorn, format!("eps={eps}"));
    let mut couplings = Vec::with_capacity(spec.horizon + 1);
    let mut lg = lp;
    let mut lp = col_scale(&lg);
    for n in 0..=spec.horizon {
        let pi = to_linear(&lp);
        let gamma = to_linear(&lg);
        let objective = marginal_kl(&lp, true)?;
        // KL(pi | gamma) with pi = colscale(gamma) reduces to the column
        // marginal divergence of gamma.
        let phi = marginal_kl(&lg, false)?;
        trace.push(&Point::from_vec(flat(&pi)), Some(&Point::from_vec(flat(&gamma))), objective, Some(phi));
        couplings.push(pi);
        if n == spec.horizon {
            break;
        }
        lg = row_scale(&lp);
        lp = col_scale(&lg);
        let phi_next = marginal_kl(&lg, false)?;
        trace.set_gap(n, objective - phi_next);
    }
    Ok(SinkhornRun { trace, couplings, log_domain })
}

/// Limit coupling of [`sinkhorn`], iterated in log-domain until the row
/// marginal matches `mu` to `tol` in max norm.
pub fn sinkhorn_limit(b: &Matrix, eps: f64, mu: &Point, nu: &Point, tol: f64, max_iter: usize) -> Result<Matrix> {
    let (m, k) = b.shape();
    if mu.len() != m || nu.len() != k {
        return Err(Error::DimensionMismatch { expected: m + k, got: mu.len() + nu.len() });
    }
    let (lmu, lnu) = (mu.map(f64::ln), nu.map(f64::ln));
    let mut lp = Matrix::from_fn(m, k, |i, j| -b[(i, j)] / eps + lmu[i] + lnu[j]);
    for _ in 0..max_iter {
        for i in 0..m {
            let r = log_sum_exp(lp.row(i).iter().copied());
            lp.row_mut(i).add_scalar_mut(lmu[i] - r);
        }
        for j in 0..k {
            let c = log_sum_exp(lp.column(j).iter().copied());
            lp.column_mut(j).add_scalar_mut(lnu[j] - c);
        }
        let err = (0..m).map(|i| (log_sum_exp(lp.row(i).iter().copied()).exp() - mu[i]).abs()).fold(0.0, f64::max);
        if err <= tol {
            return Ok(lp.map(f64::exp));
        }
    }
    Err(Error::NoConvergence { what: "sinkhorn limit".into(), iterations: max_iter })
}

/// EM for the mixture `p_theta(i, j) = k[(i, j)] theta_j` fitted to the
/// observed marginal `mu`.
///
/// Record `n` holds `x = theta_n`, `y = pi_n` (row-major, absent at `n = 0`),
/// the objective `KL(mu | K theta_n)` and `phi = KL(pi_n | p_theta_n)`.
pub fn latent_em(k: &Matrix, mu: &Point, theta0: &Point, spec: &SolverSpec) -> Result<SolverTrace> {
    let (m, r) = k.shape();
    if mu.len() != m {
        return Err(Error::DimensionMismatch { expected: m, got: mu.len() });
    }
    if theta0.len() != r {
        return Err(Error::DimensionMismatch { expected: r, got: theta0.len() });
    }
    check_distribution(mu, "observed marginal")?;
    if k.iter().any(|&v| !(v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidParameter("mixture kernel must be nonnegative".into()));
    }
    if theta0.iter().any(|&v| !(v >= 0.0)) || theta0.sum() <= 0.0 {
        return Err(Error::InvalidParameter("mixture weights must be nonnegative with positive mass".into()));
    }

    let joint = |theta: &Point| Matrix::from_fn(m, r, |i, j| k[(i, j)] * theta[j]);
    let predicted = |theta: &Point| -> Result<Point> {
        let p = k * theta;
        if p.iter().zip(mu.iter()).any(|(&pi, &mi)| mi > 0.0 && pi <= 0.0) {
            return Err(Error::ZeroMass);
        }
        Ok(p)
    };

    let mut trace = SolverTrace::new(SolverKind::LatentEm, format!("{m}x{r}"));
    let mut theta = theta0.clone();
    let mut pi: Option<Matrix> = None;
    for n in 0..=spec.horizon {
        let p = predicted(&theta)?;
        let objective = kl_divergence(mu.as_slice(), p.as_slice())?;
        let phi = match &pi {
            Some(pi) => Some(kl_divergence(&flat(pi), &flat(&joint(&theta)))?),
            None => None,
        };
        let y = pi.as_ref().map(|pi| Point::from_vec(flat(pi)));
        trace.push(&theta, y.as_ref(), objective, phi);
        if n == spec.horizon {
            break;
        }
        let jt = joint(&theta);
        let next_pi = Matrix::from_fn(m, r, |i, j| if p[i] > 0.0 { mu[i] * jt[(i, j)] / p[i] } else { 0.0 });
        let next_theta = Point::from_fn(r, |j, _| next_pi.column(j).sum());
        let phi_next = kl_divergence(&flat(&next_pi), &flat(&joint(&next_theta)))?;
        trace.set_gap(n, objective - phi_next);
        theta = next_theta;
        pi = Some(next_pi);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::point;

    /// Classical scaling-vector form `pi = diag(u) K diag(v)`.
    fn scaling_oracle(b: &Matrix, eps: f64, mu: &Point, nu: &Point, iters: usize) -> Matrix {
        let kern = Matrix::from_fn(mu.len(), nu.len(), |i, j| (-b[(i, j)] / eps).exp() * mu[i] * nu[j]);
        let mut v = nu.component_div(&kern.row_sum().transpose());
        let mut u = Point::from_element(mu.len(), 1.0);
        for _ in 0..iters {
            u = mu.component_div(&(&kern * &v));
            v = nu.component_div(&(kern.transpose() * &u));
        }
        Matrix::from_fn(mu.len(), nu.len(), |i, j| u[i] * kern[(i, j)] * v[j])
    }

    fn example() -> (Matrix, Point, Point) {
        let b = Matrix::from_row_slice(3, 2, &[0.0, 1.0, 0.5, 0.2, 2.0, 0.1]);
        (b, point(&[0.2, 0.5, 0.3]), point(&[0.6, 0.4]))
    }

    #[test]
    fn kl_of_equal_vectors_is_zero() {
        assert_eq!(kl_divergence(&[0.3, 0.7], &[0.3, 0.7]).unwrap(), 0.0);
        assert_eq!(kl_divergence(&[1.0, 0.0], &[0.5, 0.5]).unwrap(), 0.5f64.recip().ln());
        assert!(kl_divergence(&[0.5, 0.5], &[1.0, 0.0]).unwrap().is_infinite());
    }

    #[test]
    fn sinkhorn_matches_scaling_vectors() {
        let (b, mu, nu) = example();
        let run = sinkhorn(&b, 0.5, &mu, &nu, &SolverSpec::horizon(20)).unwrap();
        let oracle = scaling_oracle(&b, 0.5, &mu, &nu, 20);
        let diff = (&run.couplings[20] - oracle).amax();
        assert!(diff < 1e-14, "{diff}");
        assert!(!run.log_domain);
    }

    #[test]
    fn sinkhorn_switches_to_log_domain_for_tiny_eps() {
        let (b, mu, nu) = example();
        let run = sinkhorn(&b, 1e-3, &mu, &nu, &SolverSpec::horizon(200)).unwrap();
        assert!(run.log_domain);
        let pi = &run.couplings[200];
        for j in 0..2 {
            assert!((pi.column(j).sum() - nu[j]).abs() < 1e-12);
        }
        assert!(run.trace.objectives().iter().all(|v| v.is_finite()));
    }

    #[test]
    fn sinkhorn_objective_is_nonincreasing() {
        let (b, mu, nu) = example();
        let run = sinkhorn(&b, 0.2, &mu, &nu, &SolverSpec::horizon(30)).unwrap();
        let obj = run.trace.objectives();
        for w in obj.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
    }

    #[test]
    fn em_decreases_and_conserves_mass() {
        let k = Matrix::from_row_slice(3, 2, &[0.7, 0.1, 0.2, 0.3, 0.1, 0.6]);
        let mu = point(&[0.5, 0.2, 0.3]);
        let t = latent_em(&k, &mu, &point(&[0.5, 0.5]), &SolverSpec::horizon(40)).unwrap();
        let obj = t.objectives();
        for w in obj.windows(2) {
            assert!(w[1] <= w[0] + 1e-15);
        }
        assert!((t.x(40).sum() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn em_rejects_unreachable_observation() {
        let k = Matrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 1.0]);
        let err = latent_em(&k, &point(&[0.5, 0.5]), &point(&[1.0, 0.0]), &SolverSpec::horizon(3));
        assert!(matches!(err, Err(Error::ZeroMass)));
    }
}
