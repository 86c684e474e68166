//! Error measurements, the residual/error sandwich and stability verdicts.

use std::fmt;

use crate::error::Result;
use crate::matrices::{dense_lu_pp, DenseMatrix, Materialize, Vector};
use crate::report::SolveReport;
use crate::scalar::{Scalar, EPS};

/// Error-free transformation `a + b = s + e`.
#[inline]
fn two_sum(a: f64, b: f64) -> (f64, f64) {
    let s = a + b;
    let bb = s - a;
    (s, (a - (s - bb)) + (b - bb))
}

/// `A x - b` evaluated with compensated dot products, accurate as if computed
/// in twice the working precision.
pub fn compensated_residual(a: &DenseMatrix, x: &[f64], b: &[f64]) -> Vector {
    Vector::from_fn(a.rows(), |i| {
        let (mut s, mut c) = (-b[i], 0.0);
        for (aij, xj) in a.row(i).iter().zip(x) {
            let p = aij * xj;
            let pe = aij.mul_add(*xj, -p);
            let (t, e) = two_sum(s, p);
            s = t;
            c += e + pe;
        }
        s + c
    })
}

/// Reference solution of `A x = b`: partial-pivoting LU followed by refinement
/// with compensated residuals, accurate to a few ulps while `kappa eps << 1`.
pub fn oracle_solve(a: &DenseMatrix, b: &[f64]) -> Result<Vector> {
    let lu = dense_lu_pp(a)?;
    let mut x = lu.solve(b)?;
    for _ in 0..4 {
        let r = compensated_residual(a, &x, b);
        let d = lu.solve(&r)?;
        x = x.sub(&d);
    }
    Ok(x)
}

/// Absolute slack allowed on the measured relative error: the reference
/// solution is itself only correctly rounded up to a few ulps.
pub const ORACLE_SLACK: f64 = 4.0 * EPS;

/// The a posteriori bracket
/// `||r|| / (kappa ||b||) <= ||x~ - x|| / ||x|| <= kappa ||r|| / ||b||`
/// in the infinity norm, together with the measured error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBounds {
    pub lower: f64,
    pub upper: f64,
    pub measured: f64,
    pub kappa: f64,
    /// `||r|| / ||b||`.
    pub rhs_residual: f64,
}

impl ErrorBounds {
    /// Whether the measured error lies in `[lower / slack, upper * slack]`,
    /// allowing [`ORACLE_SLACK`] for the inexact reference solution.
    pub fn holds(&self, slack: f64) -> bool {
        self.lower <= slack * (self.measured + ORACLE_SLACK)
            && self.measured <= slack * self.upper + ORACLE_SLACK
    }
}

/// Evaluates the residual/error bracket for a candidate solution `x_tilde`.
/// `x` comes from [`oracle_solve`], `kappa_inf` from the explicit inverse and
/// the residual from [`compensated_residual`].
pub fn error_bounds_check<M: Materialize<f64> + ?Sized>(
    a: &M,
    b: &[f64],
    x_tilde: &[f64],
) -> Result<ErrorBounds> {
    let a = a.materialize()?;
    let lu = dense_lu_pp(&a)?;
    let kappa = a.norm_inf() * lu.inverse().norm_inf();
    let x = oracle_solve(&a, b)?;
    let r = compensated_residual(&a, x_tilde, b);
    let norm_b = b.iter().map(|v| v.abs()).fold(0.0, f64::max);
    let rhs_residual = if norm_b > 0.0 {
        r.norm_inf() / norm_b
    } else {
        r.norm_inf()
    };
    let xn = x.norm_inf();
    let diff = x
        .iter()
        .zip(x_tilde)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let measured = if xn > 0.0 { diff / xn } else { diff };
    Ok(ErrorBounds {
        lower: rhs_residual / kappa,
        upper: kappa * rhs_residual,
        measured,
        kappa,
        rhs_residual,
    })
}

/// Ordered from worst to best, so that the verdict on an ensemble is the
/// minimum over its instances.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum StabilityClass {
    Unstable,
    WeaklyStable,
    Stable,
}

impl StabilityClass {
    pub fn name(&self) -> &'static str {
        match self {
            StabilityClass::Unstable => "unstable",
            StabilityClass::WeaklyStable => "weakly-stable",
            StabilityClass::Stable => "stable",
        }
    }

    /// Stability implies weak stability.
    pub fn is_weakly_stable(&self) -> bool {
        *self >= StabilityClass::WeaklyStable
    }
}

impl fmt::Display for StabilityClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Thresholds used to classify a single solve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerdictPolicy {
    /// Constant `c` in the `c n eps` thresholds.
    pub c: f64,
    /// Largest condition number regarded as moderate.
    pub max_moderate_kappa: f64,
}

impl Default for VerdictPolicy {
    fn default() -> Self {
        VerdictPolicy {
            c: 10.0,
            max_moderate_kappa: 1.0 / EPS.sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Evidence {
    pub n: usize,
    pub backward_error: f64,
    pub rhs_residual: f64,
    pub kappa: f64,
    /// `c n eps`, compared with the backward error.
    pub stable_threshold: f64,
    /// `2 c n eps (kappa + 1)`, compared with the rhs residual. A backward
    /// error below `c n eps` implies an rhs residual below half of this.
    pub weak_threshold: f64,
    pub kappa_moderate: bool,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StabilityVerdict {
    pub class: StabilityClass,
    pub evidence: Evidence,
}

/// Stable when the normwise backward error is `O(n eps)`; weakly stable when
/// the condition number is moderate and `||r|| / ||b||` is `O(n eps kappa)`.
pub fn classify<S: Scalar>(report: &SolveReport<S>, policy: &VerdictPolicy) -> StabilityVerdict {
    let n = report.n();
    let stable_threshold = policy.c * n as f64 * EPS;
    let kappa = report.kappa;
    let weak_threshold = 2.0 * stable_threshold * (kappa + 1.0);
    let kappa_moderate = kappa <= policy.max_moderate_kappa;
    let evidence = Evidence {
        n,
        backward_error: report.backward_error(),
        rhs_residual: report.rhs_residual,
        kappa,
        stable_threshold,
        weak_threshold,
        kappa_moderate,
    };
    let class = if evidence.backward_error <= stable_threshold {
        StabilityClass::Stable
    } else if kappa_moderate && evidence.rhs_residual <= weak_threshold {
        StabilityClass::WeaklyStable
    } else {
        StabilityClass::Unstable
    };
    StabilityVerdict { class, evidence }
}

/// Verdict on an ensemble: the weakest per-instance class, `None` if empty.
pub fn classify_ensemble<'a>(
    verdicts: impl IntoIterator<Item = &'a StabilityVerdict>,
) -> Option<StabilityClass> {
    verdicts.into_iter().map(|v| v.class).min()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrices::ToeplitzMatrix;
    use crate::report::Method;

    #[test]
    fn compensated_residual_recovers_cancellation() {
        // 1e16 + 1 - 1e16 loses the 1 in plain arithmetic.
        let a = DenseMatrix::from_rows(&[vec![1e16, 1.0, -1e16]]);
        let r = compensated_residual(&a, &[1.0, 1.0, 1.0], &[0.0]);
        assert_eq!(r[0], 1.0);
    }

    #[test]
    fn exact_solution_and_identity() {
        let t = ToeplitzMatrix::<f64>::identity(4);
        let b = [1.0, -2.0, 3.0, 0.5];
        let eb = error_bounds_check(&t, &b, &b).unwrap();
        assert_eq!((eb.lower, eb.upper, eb.measured), (0.0, 0.0, 0.0));
        assert!(eb.holds(1.0));

        let xt = [1.5, -2.0, 3.0, 0.5];
        let eb = error_bounds_check(&t, &b, &xt).unwrap();
        assert_eq!(eb.kappa, 1.0);
        assert_eq!(eb.lower, eb.upper);
        assert_eq!(eb.lower, 0.5 / 3.0);
        assert_eq!(eb.measured, 0.5 / 3.0);
    }

    #[test]
    fn verdict_ordering() {
        let mk = |res: f64, rhs: f64, kappa: f64| {
            let mut r = SolveReport::<f64> {
                method: Method::Dense,
                x: Vector::from(vec![1.0; 4]),
                normalized_residual: res,
                rhs_residual: rhs,
                residual_norm: res,
                norm_a: 1.0,
                norm_b: 1.0,
                kappa,
                generator_growth: 1.0,
                refine_iters: 0,
                fallback_used: false,
                residual_history: vec![res],
                imaginary_leak: 0.0,
            };
            r.residual_norm = rhs;
            r
        };
        let p = VerdictPolicy::default();
        assert_eq!(
            classify(&mk(0.0, 0.0, 1.0), &p).class,
            StabilityClass::Stable
        );
        assert_eq!(
            classify(&mk(0.0, 1e-12, 1e6), &p).class,
            StabilityClass::WeaklyStable
        );
        assert_eq!(
            classify(&mk(0.0, 1e-12, 1e9), &p).class,
            StabilityClass::Unstable
        );
        assert_eq!(
            classify(&mk(0.0, 1e-3, 10.0), &p).class,
            StabilityClass::Unstable
        );
        let vs = [
            classify(&mk(0.0, 0.0, 1.0), &p),
            classify(&mk(0.0, 1e-12, 1e6), &p),
        ];
        assert_eq!(classify_ensemble(&vs), Some(StabilityClass::WeaklyStable));
        assert_eq!(classify_ensemble(&[]), None);
        assert!(StabilityClass::Stable.is_weakly_stable());
    }
}
