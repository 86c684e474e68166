use nalgebra::DMatrix;
use num_complex::Complex64;

use super::dense::DenseMatrix;
use super::lu::dense_lu_pp;
use crate::error::{DisplaceError, Result};
use crate::scalar::{Scalar, EPS};

/// Norm and condition numbers of a square matrix. `kappa_inf` uses the
/// max-row-sum norm; `kappa_2` comes from the singular values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Conditioning {
    pub norm_inf: f64,
    pub kappa_inf: f64,
    pub kappa_2: f64,
}

pub fn norms_and_condition<S: Scalar>(a: &DenseMatrix<S>) -> Result<Conditioning> {
    if !a.is_square() {
        return Err(DisplaceError::dims(format!(
            "condition number needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let lu = dense_lu_pp(a).map_err(|e| DisplaceError::SingularMatrix(e.to_string()))?;
    let inv = lu.inverse();
    let norm_inf = a.norm_inf();
    let kappa_inf = norm_inf * inv.norm_inf();
    let sv = singular_values(a);
    let smin = *sv.last().expect("non-empty matrix");
    if smin <= 0.0 {
        return Err(DisplaceError::SingularMatrix(
            "smallest singular value is zero".into(),
        ));
    }
    Ok(Conditioning {
        norm_inf,
        kappa_inf,
        kappa_2: sv[0] / smin,
    })
}

/// Singular values in non-increasing order.
pub fn singular_values<S: Scalar>(a: &DenseMatrix<S>) -> Vec<f64> {
    let mut sv: Vec<f64> = if S::IS_COMPLEX {
        let m = DMatrix::<Complex64>::from_row_slice(
            a.rows(),
            a.cols(),
            &a.as_slice()
                .iter()
                .map(|v| v.to_complex())
                .collect::<Vec<_>>(),
        );
        m.svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    } else {
        let m = DMatrix::<f64>::from_row_slice(
            a.rows(),
            a.cols(),
            &a.as_slice().iter().map(|v| v.re()).collect::<Vec<_>>(),
        );
        m.svd(false, false)
            .singular_values
            .iter()
            .copied()
            .collect()
    };
    sv.sort_by(|x, y| y.total_cmp(x));
    sv
}

/// 2-norm condition number, also for rectangular full-rank matrices.
pub fn kappa_2<S: Scalar>(a: &DenseMatrix<S>) -> f64 {
    let sv = singular_values(a);
    let smin = sv[sv.len().min(a.rows()).min(a.cols()) - 1];
    if smin > 0.0 {
        sv[0] / smin
    } else {
        f64::INFINITY
    }
}

/// Number of singular values above `tol`.
pub fn numerical_rank<S: Scalar>(a: &DenseMatrix<S>, tol: f64) -> usize {
    singular_values(a).into_iter().filter(|&s| s > tol).count()
}

/// Estimates `||B||_1` from products with `B` and `B^H` (Hager's method with
/// Higham's extra test vector, as in LAPACK's `xLACN2`).
pub fn estimate_norm_one<S: Scalar>(
    n: usize,
    mut apply: impl FnMut(&[S]) -> Result<Vec<S>>,
    mut apply_adjoint: impl FnMut(&[S]) -> Result<Vec<S>>,
) -> Result<f64> {
    let l1 = |v: &[S]| v.iter().map(|x| x.abs()).sum::<f64>();
    let mut x = vec![S::from_f64(1.0 / n as f64); n];
    let mut est = 0.0_f64;
    let mut last_j = usize::MAX;
    for iter in 0..5 {
        let y = apply(&x)?;
        est = est.max(l1(&y));
        let xi: Vec<S> = y
            .iter()
            .map(|&v| {
                let m = v.abs();
                if m == 0.0 {
                    S::one()
                } else {
                    v.scale(1.0 / m)
                }
            })
            .collect();
        let z = apply_adjoint(&xi)?;
        let (j, zmax) =
            z.iter()
                .enumerate()
                .map(|(i, v)| (i, v.abs()))
                .fold(
                    (0, -1.0),
                    |acc, (i, m)| if m > acc.1 { (i, m) } else { acc },
                );
        let ztx: f64 = z.iter().zip(&x).map(|(&a, &b)| (a.conj() * b).re()).sum();
        if iter > 0 && (zmax <= ztx || j == last_j) {
            break;
        }
        last_j = j;
        x.iter_mut().for_each(|v| *v = S::zero());
        x[j] = S::one();
    }
    let alt: Vec<S> = (0..n)
        .map(|i| {
            let sign = if i % 2 == 0 { 1.0 } else { -1.0 };
            let denom = if n > 1 { (n - 1) as f64 } else { 1.0 };
            S::from_f64(sign * (1.0 + i as f64 / denom))
        })
        .collect();
    let alt_est = 2.0 * l1(&apply(&alt)?) / (3.0 * n as f64);
    Ok(est.max(alt_est))
}

/// Estimated `kappa_inf` from solves with `A` and `A^H`.
pub fn estimate_kappa_inf<S: Scalar>(
    n: usize,
    norm_inf: f64,
    solve: impl FnMut(&[S]) -> Result<Vec<S>>,
    solve_adjoint: impl FnMut(&[S]) -> Result<Vec<S>>,
) -> Result<f64> {
    // ||A^-1||_inf = ||A^-H||_1: apply B = A^-H, B^H = A^-1.
    Ok(norm_inf * estimate_norm_one(n, solve_adjoint, solve)?)
}

/// Threshold below which a singular value is treated as zero relative to `a`.
pub fn rank_tolerance<S: Scalar>(a: &DenseMatrix<S>) -> f64 {
    a.rows().max(a.cols()) as f64 * EPS * a.norm_inf()
}
