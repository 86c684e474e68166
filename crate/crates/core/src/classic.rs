//! O(n^2) solvers for symmetric positive definite Toeplitz systems.
//!
//! [`bareiss_factor`] runs the Schur (Bareiss) recursion on the two-row
//! generator of `T`, producing `T = L U` directly. [`levinson_solve`] is the
//! Levinson order recursion, which builds `T^-1` implicitly and records the
//! reflection coefficients along the way.

use crate::error::{DisplaceError, Result};
use crate::factorization::Factorization;
use crate::matrices::{
    back_unit_lower_adjoint, back_upper, forward_unit_lower, forward_upper_adjoint,
    toeplitz_matvec, DenseMatrix, ToeplitzMatrix, Vector,
};
use crate::report::{residual_metrics, Method, SolveReport};
use crate::scalar::EPS;

/// Reflection coefficients of the Levinson recursion, one per order `1..n`.
///
/// Sign convention: the coefficient of order `k` is the partial correlation,
/// i.e. minus the last entry of the order-`k` Yule-Walker solution. For
/// `a_k = rho^|k|` every coefficient after the first is zero and the first is `rho`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ReflectionLog {
    pub coefficients: Vec<f64>,
    /// Every coefficient is strictly positive.
    pub all_positive: bool,
}

/// `T = L U` with `L` unit lower and `U` upper triangular.
#[derive(Debug, Clone, PartialEq)]
pub struct BareissFactors {
    pub l: DenseMatrix,
    pub u: DenseMatrix,
}

impl Factorization<f64> for BareissFactors {
    fn order(&self) -> usize {
        self.u.rows()
    }

    fn solve(&self, b: &[f64]) -> Result<Vector> {
        check_len(self.order(), b.len())?;
        let mut y = b.to_vec();
        forward_unit_lower(&self.l, &mut y);
        back_upper(&self.u, &mut y);
        Ok(y.into())
    }

    fn solve_adjoint(&self, b: &[f64]) -> Result<Vector> {
        check_len(self.order(), b.len())?;
        let mut y = b.to_vec();
        forward_upper_adjoint(&self.u, &mut y);
        back_unit_lower_adjoint(&self.l, &mut y);
        Ok(y.into())
    }
}

fn check_len(n: usize, m: usize) -> Result<()> {
    if n != m {
        return Err(DisplaceError::dims(format!(
            "Toeplitz of order {n}, rhs length {m}"
        )));
    }
    Ok(())
}

fn check_symmetric(t: &ToeplitzMatrix) -> Result<()> {
    if !t.is_symmetric() {
        return Err(DisplaceError::NotPositiveDefinite {
            step: 0,
            detail: "matrix is not symmetric".into(),
        });
    }
    if !(t.diag(0) > 0.0) {
        return Err(DisplaceError::NotPositiveDefinite {
            step: 0,
            detail: format!("diagonal a_0 = {} is not positive", t.diag(0)),
        });
    }
    Ok(())
}

/// Schur/Bareiss LU factorization of a symmetric positive definite Toeplitz
/// matrix. No pivoting; a pivot `<= n eps a_0` or a reflection coefficient of
/// magnitude `>= 1` means the matrix is not (numerically) positive definite.
pub fn bareiss_factor(t: &ToeplitzMatrix) -> Result<BareissFactors> {
    check_symmetric(t)?;
    let n = t.n();
    let a0 = t.diag(0);
    let tol = n as f64 * EPS * a0;
    // Generator rows of T - Z T Z^T = (g g^T - h h^T) / a_0.
    let mut g: Vec<f64> = t.first_column().to_vec();
    let mut h = g.clone();
    h[0] = 0.0;
    let mut u = DenseMatrix::zeros(n, n);
    for k in 0..n {
        let pivot = g[k];
        if !(pivot > tol) {
            return Err(DisplaceError::NotPositiveDefinite {
                step: k,
                detail: format!("pivot {pivot:e} <= tolerance {tol:e}"),
            });
        }
        u.row_mut(k)[k..].copy_from_slice(&g[k..]);
        if k + 1 == n {
            break;
        }
        // Shift g down one place, then rotate (g, h) hyperbolically to zero h[k+1].
        for j in (k + 1..n).rev() {
            g[j] = g[j - 1];
        }
        g[k] = 0.0;
        let gamma = h[k + 1] / g[k + 1];
        if !(gamma.abs() < 1.0) {
            return Err(DisplaceError::NotPositiveDefinite {
                step: k + 1,
                detail: format!("reflection coefficient {gamma} has magnitude >= 1"),
            });
        }
        for j in k + 1..n {
            let (gj, hj) = (g[j], h[j]);
            g[j] = gj - gamma * hj;
            h[j] = hj - gamma * gj;
        }
    }
    let l = DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => u[(j, i)] / u[(j, j)],
        std::cmp::Ordering::Equal => 1.0,
        std::cmp::Ordering::Less => 0.0,
    });
    Ok(BareissFactors { l, u })
}

pub fn bareiss_solve(t: &ToeplitzMatrix, b: &[f64]) -> Result<(Vector, SolveReport)> {
    check_len(t.n(), b.len())?;
    let f = bareiss_factor(t)?;
    let report = report_for(t, &f, b, Method::Bareiss)?;
    Ok((report.x.clone(), report))
}

pub(crate) fn report_for<F: Factorization<f64>>(
    t: &ToeplitzMatrix,
    f: &F,
    b: &[f64],
    method: Method,
) -> Result<SolveReport> {
    let x = f.solve(b)?;
    let ax = toeplitz_matvec(t, &x)?;
    let r: Vec<f64> = ax.iter().zip(b).map(|(a, bb)| a - bb).collect();
    let norm_a = t.norm_inf();
    let res = residual_metrics(&r, norm_a, &x, b);
    let kappa = f.kappa_inf_estimate(norm_a)?;
    Ok(SolveReport::direct(method, x, res, norm_a, kappa, 1.0))
}

/// Levinson order recursion for `T x = b` with `T` symmetric positive definite.
pub fn levinson_solve(t: &ToeplitzMatrix, b: &[f64]) -> Result<(Vector, ReflectionLog)> {
    check_len(t.n(), b.len())?;
    check_symmetric(t)?;
    let n = t.n();
    let a0 = t.diag(0);
    let tol = n as f64 * EPS;
    // Work with the unit-diagonal matrix T / a_0.
    let r: Vec<f64> = (1..n).map(|k| t.diag(k as isize) / a0).collect();
    let rhs: Vec<f64> = b.iter().map(|v| v / a0).collect();

    let mut x = vec![0.0; n];
    let mut y = vec![0.0; n];
    let mut coefficients = Vec::with_capacity(n.saturating_sub(1));
    x[0] = rhs[0];
    if n == 1 {
        return Ok((
            x.into(),
            ReflectionLog {
                coefficients,
                all_positive: true,
            },
        ));
    }
    let mut alpha = -r[0];
    let mut beta = 1.0;
    y[0] = alpha;
    push_reflection(&mut coefficients, alpha, 1)?;
    let mut scratch = vec![0.0; n];
    for k in 1..n {
        beta *= 1.0 - alpha * alpha;
        if !(beta > tol) {
            return Err(DisplaceError::NotPositiveDefinite {
                step: k,
                detail: format!("prediction error {beta:e} <= tolerance {tol:e}"),
            });
        }
        let dot: f64 = (0..k).map(|i| r[i] * x[k - 1 - i]).sum();
        let mu = (rhs[k] - dot) / beta;
        for i in 0..k {
            scratch[i] = x[i] + mu * y[k - 1 - i];
        }
        x[..k].copy_from_slice(&scratch[..k]);
        x[k] = mu;
        if k + 1 < n {
            let dot: f64 = (0..k).map(|i| r[i] * y[k - 1 - i]).sum();
            alpha = (-r[k] - dot) / beta;
            push_reflection(&mut coefficients, alpha, k + 1)?;
            for i in 0..k {
                scratch[i] = y[i] + alpha * y[k - 1 - i];
            }
            y[..k].copy_from_slice(&scratch[..k]);
            y[k] = alpha;
        }
    }
    let all_positive = coefficients.iter().all(|&c| c > 0.0);
    Ok((
        x.into(),
        ReflectionLog {
            coefficients,
            all_positive,
        },
    ))
}

fn push_reflection(log: &mut Vec<f64>, alpha: f64, order: usize) -> Result<()> {
    if !(alpha.abs() < 1.0) {
        return Err(DisplaceError::NotPositiveDefinite {
            step: order,
            detail: format!("reflection coefficient {} has magnitude >= 1", -alpha),
        });
    }
    log.push(-alpha);
    Ok(())
}

/// Levinson as a [`Factorization`]: every solve reruns the recursion. `T` is
/// symmetric, so adjoint solves are ordinary solves.
#[derive(Debug, Clone)]
pub struct LevinsonSolver<'a> {
    t: &'a ToeplitzMatrix,
}

impl<'a> LevinsonSolver<'a> {
    pub fn new(t: &'a ToeplitzMatrix) -> Self {
        LevinsonSolver { t }
    }
}

impl Factorization<f64> for LevinsonSolver<'_> {
    fn order(&self) -> usize {
        self.t.n()
    }

    fn solve(&self, b: &[f64]) -> Result<Vector> {
        levinson_solve(self.t, b).map(|(x, _)| x)
    }

    fn solve_adjoint(&self, b: &[f64]) -> Result<Vector> {
        self.solve(b)
    }
}

/// [`levinson_solve`] plus a [`SolveReport`].
pub fn levinson_solve_report(
    t: &ToeplitzMatrix,
    b: &[f64],
) -> Result<(SolveReport, ReflectionLog)> {
    let (_, log) = levinson_solve(t, b)?;
    let report = report_for(t, &LevinsonSolver::new(t), b, Method::Levinson)?;
    Ok((report, log))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::dense_solve;

    fn tridiag(n: usize) -> ToeplitzMatrix {
        let mut c = vec![0.0; n];
        c[0] = 2.0;
        if n > 1 {
            c[1] = -1.0;
        }
        ToeplitzMatrix::symmetric(c).unwrap()
    }

    #[test]
    fn identity_factors_trivially() {
        let f = bareiss_factor(&ToeplitzMatrix::identity(4)).unwrap();
        assert_eq!(f.l, DenseMatrix::identity(4));
        assert_eq!(f.u, DenseMatrix::identity(4));
    }

    #[test]
    fn tridiagonal_pivots_are_minor_ratios() {
        let f = bareiss_factor(&tridiag(3)).unwrap();
        let d: Vec<f64> = (0..3).map(|k| f.u[(k, k)]).collect();
        for (got, want) in d.iter().zip([2.0, 1.5, 4.0 / 3.0]) {
            assert!((got - want).abs() < 1e-15);
        }
        let lu = f.l.matmul(&f.u).unwrap();
        assert!(lu.sub(&tridiag(3).to_dense()).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn two_by_two_schur_complement() {
        let t = ToeplitzMatrix::symmetric(vec![1.0, 0.9]).unwrap();
        let f = bareiss_factor(&t).unwrap();
        assert!((f.u[(1, 1)] - 0.19).abs() < 1e-15);
    }

    #[test]
    fn indefinite_and_nonsymmetric_inputs_are_rejected() {
        let t = ToeplitzMatrix::symmetric(vec![1.0, 2.0]).unwrap();
        assert!(matches!(
            bareiss_factor(&t),
            Err(DisplaceError::NotPositiveDefinite { .. })
        ));
        assert!(matches!(
            levinson_solve(&t, &[1.0, 1.0]),
            Err(DisplaceError::NotPositiveDefinite { .. })
        ));
        let ns = ToeplitzMatrix::new(vec![2.0, 1.0], vec![0.0]).unwrap();
        assert!(matches!(
            bareiss_factor(&ns),
            Err(DisplaceError::NotPositiveDefinite { .. })
        ));
        let neg = ToeplitzMatrix::symmetric(vec![-1.0, 0.0]).unwrap();
        assert!(matches!(
            levinson_solve(&neg, &[1.0, 1.0]),
            Err(DisplaceError::NotPositiveDefinite { .. })
        ));
    }

    #[test]
    fn bareiss_solve_examples() {
        let t = ToeplitzMatrix::symmetric(vec![2.0, 0.0, 0.0]).unwrap();
        let (x, _) = bareiss_solve(&t, &[2.0; 3]).unwrap();
        assert_eq!(x.into_inner(), vec![1.0; 3]);

        let t = tridiag(8);
        let b = t.matvec_direct(&[1.0; 8]).unwrap();
        let (x, rep) = bareiss_solve(&t, &b).unwrap();
        assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-13));
        assert!(rep.normalized_residual < 8.0 * EPS);
    }

    #[test]
    fn levinson_examples() {
        let (x, log) =
            levinson_solve(&ToeplitzMatrix::identity(4), &[1.0, -2.0, 3.0, 0.5]).unwrap();
        assert_eq!(x.into_inner(), vec![1.0, -2.0, 3.0, 0.5]);
        assert_eq!(log.coefficients, vec![0.0; 3]);
        assert!(!log.all_positive);

        let (x, _) = levinson_solve(&tridiag(2), &[1.0, 1.0]).unwrap();
        assert!((x[0] - 1.0).abs() < 1e-15 && (x[1] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn yule_walker_rhs_matches_oracle() {
        let a = [4.0, 2.0, 1.0, 0.5, 0.25, 0.125];
        let t = ToeplitzMatrix::symmetric(a[..5].to_vec()).unwrap();
        let b: Vec<f64> = a[1..6].iter().map(|v| -v).collect();
        let (x, log) = levinson_solve(&t, &b).unwrap();
        let oracle = dense_solve(&t.to_dense(), &b).unwrap();
        for (u, v) in x.iter().zip(oracle.iter()) {
            assert!((u - v).abs() < 1e-14);
        }
        // a_k = 4 * 0.5^k: an AR(1) autocorrelation, so only the first coefficient is non-zero.
        assert!((log.coefficients[0] - 0.5).abs() < 1e-15);
        assert!(log.coefficients[1..].iter().all(|c| c.abs() < 1e-15));
    }
}
