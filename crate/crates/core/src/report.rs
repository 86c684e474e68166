//! Solve reports shared by all solvers.

use std::fmt;

use crate::gko::GeneratorConditioning;
use crate::matrices::Vector;
use crate::scalar::Scalar;

/// Solver identity as it appears in reports and on the command line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    Gko(GeneratorConditioning),
    Bareiss,
    Levinson,
    Seminormal,
    Dense,
}

impl Method {
    /// Every method in a fixed order, used by experiments and benches.
    pub const ALL: [Method; 7] = [
        Method::Gko(GeneratorConditioning::Plain),
        Method::Gko(GeneratorConditioning::GuOrthogonal),
        Method::Gko(GeneratorConditioning::StewartLU),
        Method::Bareiss,
        Method::Levinson,
        Method::Seminormal,
        Method::Dense,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Method::Gko(GeneratorConditioning::Plain) => "gko/plain",
            Method::Gko(GeneratorConditioning::GuOrthogonal) => "gko/gu",
            Method::Gko(GeneratorConditioning::StewartLU) => "gko/stewart",
            Method::Bareiss => "bareiss",
            Method::Levinson => "levinson",
            Method::Seminormal => "seminormal",
            Method::Dense => "dense",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Outcome of one solve with the error measurements used throughout the crate.
/// All norms are infinity norms.
#[derive(Debug, Clone, PartialEq)]
pub struct SolveReport<S: Scalar = f64> {
    pub method: Method,
    pub x: Vector<S>,
    /// `||A x - b|| / (||A|| ||x||)`.
    pub normalized_residual: f64,
    /// `||A x - b|| / ||b||`.
    pub rhs_residual: f64,
    pub residual_norm: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub kappa: f64,
    /// Generator cancellation growth for GKO methods, 1 otherwise.
    pub generator_growth: f64,
    pub refine_iters: usize,
    pub fallback_used: bool,
    /// Normalized residual after the initial solve and after each refinement step.
    pub residual_history: Vec<f64>,
    /// `||Im x|| / ||x||` discarded when returning a real solution.
    pub imaginary_leak: f64,
}

impl<S: Scalar> SolveReport<S> {
    pub const NORM: &'static str = "inf";

    pub fn n(&self) -> usize {
        self.x.len()
    }

    /// Normwise backward error `||r|| / (||A|| ||x|| + ||b||)`: the smallest
    /// relative perturbation of `(A, b)` for which `x` is an exact solution.
    pub fn backward_error(&self) -> f64 {
        let denom = self.norm_a * self.x.norm_inf() + self.norm_b;
        if denom < f64::MIN_POSITIVE {
            self.residual_norm
        } else {
            self.residual_norm / denom
        }
    }
}

/// Residual measurements for one candidate solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub(crate) struct Residuals {
    pub residual_norm: f64,
    pub norm_b: f64,
    pub normalized: f64,
    pub rhs: f64,
}

/// Residual metrics from a residual vector. Denominators below the smallest
/// normal double fall back to the absolute residual.
pub(crate) fn residual_metrics<S: Scalar>(r: &[S], norm_a: f64, x: &[S], b: &[S]) -> Residuals {
    let inf = |v: &[S]| v.iter().map(|e| e.abs()).fold(0.0, f64::max);
    let (rn, xn, bn) = (inf(r), inf(x), inf(b));
    let guard = |den: f64| {
        if den < f64::MIN_POSITIVE {
            rn
        } else {
            rn / den
        }
    };
    Residuals {
        residual_norm: rn,
        norm_b: bn,
        normalized: guard(norm_a * xn),
        rhs: guard(bn),
    }
}

impl<S: Scalar> SolveReport<S> {
    /// Report for a direct solve with no refinement.
    pub(crate) fn direct(
        method: Method,
        x: Vector<S>,
        res: Residuals,
        norm_a: f64,
        kappa: f64,
        generator_growth: f64,
    ) -> Self {
        SolveReport {
            method,
            x,
            normalized_residual: res.normalized,
            rhs_residual: res.rhs,
            residual_norm: res.residual_norm,
            norm_a,
            norm_b: res.norm_b,
            kappa,
            generator_growth,
            refine_iters: 0,
            fallback_used: false,
            residual_history: vec![res.normalized],
            imaginary_leak: 0.0,
        }
    }
}
