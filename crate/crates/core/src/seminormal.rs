//! Semi-normal equations `U^T U x = T^T b`, where `U` is the Cholesky factor of
//! the explicitly formed `T^T T`, with optional iterative refinement.
//!
//! The Gram matrix is accurate to working precision, but forming it squares the
//! condition number, so the unrefined solution carries an error of order
//! `kappa^2 eps`. Refinement with corrections from the same factor brings the
//! residual back to `O(eps)` while `kappa eps` is small.

use crate::error::{DisplaceError, Result};
use crate::factorization::Factorization;
use crate::matrices::{
    back_upper, estimate_kappa_inf, toeplitz_matvec, DenseMatrix, ToeplitzMatrix, Vector,
};
use crate::report::{residual_metrics, Method, SolveReport};
use crate::scalar::EPS;

pub const DEFAULT_REFINE: usize = 3;

/// Real matrices the semi-normal solver accepts: square Toeplitz or any dense
/// full-column-rank matrix.
pub trait LinearOperator {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;
    fn apply(&self, x: &[f64]) -> Result<Vector>;
    fn apply_transpose(&self, y: &[f64]) -> Result<Vector>;
    fn norm_inf(&self) -> f64;
}

impl LinearOperator for ToeplitzMatrix {
    fn nrows(&self) -> usize {
        self.n()
    }
    fn ncols(&self) -> usize {
        self.n()
    }
    fn apply(&self, x: &[f64]) -> Result<Vector> {
        toeplitz_matvec(self, x)
    }
    fn apply_transpose(&self, y: &[f64]) -> Result<Vector> {
        toeplitz_matvec(&self.transpose(), y)
    }
    fn norm_inf(&self) -> f64 {
        ToeplitzMatrix::norm_inf(self)
    }
}

impl LinearOperator for DenseMatrix {
    fn nrows(&self) -> usize {
        self.rows()
    }
    fn ncols(&self) -> usize {
        self.cols()
    }
    fn apply(&self, x: &[f64]) -> Result<Vector> {
        self.matvec(x)
    }
    fn apply_transpose(&self, y: &[f64]) -> Result<Vector> {
        self.adjoint_matvec(y)
    }
    fn norm_inf(&self) -> f64 {
        DenseMatrix::norm_inf(self)
    }
}

/// Dense `rows x cols` Toeplitz matrix `[a_{i-j}]` from its first column and
/// the first row right of the diagonal.
pub fn rectangular_toeplitz(col: &[f64], row: &[f64]) -> Result<DenseMatrix> {
    let (m, n) = (col.len(), row.len() + 1);
    if m == 0 {
        return Err(DisplaceError::InvalidInput(
            "Toeplitz needs at least one row".into(),
        ));
    }
    let data = (0..m)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .map(|(i, j)| if i >= j { col[i - j] } else { row[j - i - 1] })
        .collect();
    DenseMatrix::from_row_major(m, n, data)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SeminormalFactor {
    /// Upper triangular with positive diagonal, `U^T U ~ T^T T`.
    pub u: DenseMatrix,
    /// `||T^T T - U^T U||_inf / ||T^T T||_inf`.
    pub gram_residual: f64,
    /// Estimate of `kappa(T)` as `sqrt(kappa_inf(T^T T))`.
    pub kappa_estimate: f64,
    /// `kappa(T) >= 1/sqrt(eps)`: the squared condition leaves no accurate digits
    /// before refinement.
    pub condition_squared: bool,
}

impl SeminormalFactor {
    /// Solves `U^T U z = c`.
    pub fn solve_gram(&self, c: &[f64]) -> Vector {
        let mut z = c.to_vec();
        let n = z.len();
        for i in 0..n {
            let s: f64 = (0..i).map(|k| self.u[(k, i)] * z[k]).sum();
            z[i] = (z[i] - s) / self.u[(i, i)];
        }
        back_upper(&self.u, &mut z);
        z.into()
    }
}

struct GramSolver<'a>(&'a SeminormalFactor);

impl Factorization<f64> for GramSolver<'_> {
    fn order(&self) -> usize {
        self.0.u.rows()
    }
    fn solve(&self, b: &[f64]) -> Result<Vector> {
        Ok(self.0.solve_gram(b))
    }
    fn solve_adjoint(&self, b: &[f64]) -> Result<Vector> {
        Ok(self.0.solve_gram(b))
    }
}

/// Cholesky factor of the explicitly formed `T^T T`, built column by column
/// from matrix-vector products.
pub fn seminormal_factor<A: LinearOperator + ?Sized>(a: &A) -> Result<SeminormalFactor> {
    let (m, n) = (a.nrows(), a.ncols());
    if m < n {
        return Err(DisplaceError::dims(format!(
            "semi-normal equations need rows >= cols, got {m}x{n}"
        )));
    }
    let mut gram = DenseMatrix::zeros(n, n);
    let mut e = vec![0.0; n];
    for j in 0..n {
        e[j] = 1.0;
        let col = a.apply_transpose(&a.apply(&e)?)?;
        e[j] = 0.0;
        for i in 0..n {
            gram[(i, j)] = col[i];
        }
    }
    // Symmetrize the rounding noise.
    for i in 0..n {
        for j in i + 1..n {
            let v = 0.5 * (gram[(i, j)] + gram[(j, i)]);
            gram[(i, j)] = v;
            gram[(j, i)] = v;
        }
    }

    let max_diag = (0..n).map(|i| gram[(i, i)]).fold(0.0, f64::max);
    let tol = n as f64 * EPS * max_diag;
    let mut u = DenseMatrix::zeros(n, n);
    for i in 0..n {
        let s: f64 = (0..i).map(|k| u[(k, i)] * u[(k, i)]).sum();
        let d = gram[(i, i)] - s;
        if !(d > tol) {
            return Err(DisplaceError::RankDeficient {
                column: i,
                pivot: d,
            });
        }
        let dii = d.sqrt();
        u[(i, i)] = dii;
        for j in i + 1..n {
            let s: f64 = (0..i).map(|k| u[(k, i)] * u[(k, j)]).sum();
            u[(i, j)] = (gram[(i, j)] - s) / dii;
        }
    }

    let utu = u.transpose().matmul(&u)?;
    let gram_norm = gram.norm_inf();
    let gram_residual = utu.sub(&gram)?.norm_inf() / gram_norm;
    let mut factor = SeminormalFactor {
        u,
        gram_residual,
        kappa_estimate: f64::NAN,
        condition_squared: false,
    };
    let kg = {
        let solver = GramSolver(&factor);
        estimate_kappa_inf(
            n,
            gram_norm,
            |b| solver.solve(b).map(Vector::into_inner),
            |b| solver.solve_adjoint(b).map(Vector::into_inner),
        )?
    };
    factor.kappa_estimate = kg.sqrt();
    factor.condition_squared = factor.kappa_estimate >= 1.0 / EPS.sqrt();
    Ok(factor)
}

/// `||T^T (b - T x)||_inf / (||T||_inf ||b||_inf)`, the least-squares
/// optimality measure; the absolute value when the denominator vanishes.
pub fn normal_residual<A: LinearOperator + ?Sized>(a: &A, b: &[f64], x: &[f64]) -> Result<f64> {
    if b.len() != a.nrows() || x.len() != a.ncols() {
        return Err(DisplaceError::dims(format!(
            "{}x{} matrix with b of length {} and x of length {}",
            a.nrows(),
            a.ncols(),
            b.len(),
            x.len()
        )));
    }
    let ax = a.apply(x)?;
    let r: Vec<f64> = b.iter().zip(ax.iter()).map(|(bb, v)| bb - v).collect();
    let num = a.apply_transpose(&r)?.norm_inf();
    let denom = a.norm_inf() * b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    Ok(if denom < f64::MIN_POSITIVE {
        num
    } else {
        num / denom
    })
}

/// Solves `T x = b` (or the least-squares problem when `T` has more rows than
/// columns) via the semi-normal equations, then applies up to `refine` steps of
/// refinement `x += (U^T U)^-1 T^T (b - T x)`.
///
/// Refinement stops once the residual measure reaches `n eps` or improves by
/// less than a factor of two. The measure is the normalized residual for
/// square systems and [`normal_residual`] otherwise.
pub fn seminormal_solve<A: LinearOperator + ?Sized>(
    a: &A,
    b: &[f64],
    refine: usize,
) -> Result<(Vector, SolveReport)> {
    if b.len() != a.nrows() {
        return Err(DisplaceError::dims(format!(
            "{}x{} matrix, rhs length {}",
            a.nrows(),
            a.ncols(),
            b.len()
        )));
    }
    let factor = seminormal_factor(a)?;
    seminormal_solve_with(a, &factor, b, refine)
}

pub fn seminormal_solve_with<A: LinearOperator + ?Sized>(
    a: &A,
    factor: &SeminormalFactor,
    b: &[f64],
    refine: usize,
) -> Result<(Vector, SolveReport)> {
    let square = a.nrows() == a.ncols();
    let n = a.ncols();
    let norm_a = a.norm_inf();
    let target = n as f64 * EPS;
    let measure = |x: &[f64]| -> Result<f64> {
        if square {
            let ax = a.apply(x)?;
            let r: Vec<f64> = ax.iter().zip(b).map(|(v, bb)| v - bb).collect();
            Ok(residual_metrics(&r, norm_a, x, b).normalized)
        } else {
            normal_residual(a, b, x)
        }
    };

    let mut x = factor.solve_gram(&a.apply_transpose(b)?);
    let mut m = measure(&x)?;
    let mut history = vec![m];
    let mut iters = 0;
    while iters < refine && m > target {
        let ax = a.apply(&x)?;
        let r: Vec<f64> = b.iter().zip(ax.iter()).map(|(bb, v)| bb - v).collect();
        let d = factor.solve_gram(&a.apply_transpose(&r)?);
        let candidate = x.add(&d);
        let m_new = measure(&candidate)?;
        if !(m_new < m) {
            if m > EPS.sqrt() {
                return Err(DisplaceError::NoConvergence(format!(
                    "residual went from {m:e} to {m_new:e} at step {}",
                    iters + 1
                )));
            }
            break;
        }
        x = candidate;
        iters += 1;
        history.push(m_new);
        let stalled = m_new > 0.5 * m;
        m = m_new;
        if stalled {
            break;
        }
    }

    let ax = a.apply(&x)?;
    let r: Vec<f64> = ax.iter().zip(b).map(|(v, bb)| v - bb).collect();
    let res = residual_metrics(&r, norm_a, &x, b);
    let mut report = SolveReport::direct(
        Method::Seminormal,
        x.clone(),
        res,
        norm_a,
        factor.kappa_estimate,
        1.0,
    );
    report.refine_iters = iters;
    report.residual_history = history;
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_scaled_identity() {
        let f = seminormal_factor(&ToeplitzMatrix::<f64>::identity(3)).unwrap();
        assert_eq!(f.u, DenseMatrix::identity(3));
        assert_eq!(f.gram_residual, 0.0);
        let f = seminormal_factor(&ToeplitzMatrix::symmetric(vec![2.0, 0.0]).unwrap()).unwrap();
        assert_eq!(f.u, DenseMatrix::diag(&[2.0, 2.0]));

        let (x, rep) =
            seminormal_solve(&ToeplitzMatrix::<f64>::identity(3), &[1.0, -4.0, 2.5], 3).unwrap();
        assert_eq!(x.into_inner(), vec![1.0, -4.0, 2.5]);
        assert_eq!(rep.refine_iters, 0);
    }

    #[test]
    fn refinement_improves_tridiagonal_solve() {
        let mut c = vec![0.0; 8];
        c[0] = 2.0;
        c[1] = -1.0;
        let t = ToeplitzMatrix::symmetric(c).unwrap();
        let b = t.matvec_direct(&[1.0; 8]).unwrap();
        let (x0, _) = seminormal_solve(&t, &b, 0).unwrap();
        let (x3, rep) = seminormal_solve(&t, &b, 3).unwrap();
        let err = |x: &Vector| x.iter().map(|v| (v - 1.0).abs()).fold(0.0, f64::max);
        // kappa_2 is about 32, so kappa^2 eps is about 2e-13.
        assert!(err(&x0) < 1e-12);
        assert!(err(&x3) <= err(&x0).max(1e-14));
        assert!(rep.residual_history.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn overdetermined_consistent_system() {
        let a = rectangular_toeplitz(&[3.0, 1.0, -1.0, 0.5], &[2.0]).unwrap();
        assert_eq!((a.rows(), a.cols()), (4, 2));
        let b = a.matvec(&[1.0, -2.0]).unwrap();
        let (x, _) = seminormal_solve(&a, &b, 3).unwrap();
        let r = b.sub(&a.matvec(&x).unwrap());
        assert!(r.norm_inf() <= 4.0 * 10.0 * EPS * b.norm_inf());
        assert!(normal_residual(&a, &b, &x).unwrap() <= 4.0 * 10.0 * EPS);
    }

    #[test]
    fn normal_residual_edge_cases() {
        let a = rectangular_toeplitz(&[1.0, 0.0, 0.0], &[0.0]).unwrap();
        // b orthogonal to range(A) = span(e1, e2) and x = 0.
        assert_eq!(
            normal_residual(&a, &[0.0, 0.0, 5.0], &[0.0, 0.0]).unwrap(),
            0.0
        );
        let b = [1.0, 2.0, 0.0];
        let x = [1.0, 2.0];
        assert_eq!(normal_residual(&a, &b, &x).unwrap(), 0.0);
        // Perturb x by delta along range(A^T): T^T r = -T^T T delta.
        let got = normal_residual(&a, &b, &[1.0 + 1e-6, 2.0]).unwrap();
        assert!((got - 1e-6 / 2.0).abs() < 1e-15);
        assert!(normal_residual(&a, &b, &[1.0]).is_err());
    }

    #[test]
    fn rank_deficient_is_rejected() {
        let a = rectangular_toeplitz(&[1.0, 1.0, 1.0], &[1.0]).unwrap();
        assert!(matches!(
            seminormal_factor(&a),
            Err(DisplaceError::RankDeficient { .. })
        ));
        let wide = rectangular_toeplitz(&[1.0], &[1.0, 2.0]).unwrap();
        assert!(seminormal_factor(&wide).is_err());
    }
}
