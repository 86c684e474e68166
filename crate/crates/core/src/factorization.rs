//! Common interface over computed factorizations: solves with `A` and `A^H`,
//! which is enough for iterative refinement and condition estimation.

use crate::error::Result;
use crate::matrices::{estimate_kappa_inf, DenseLu, Vector};
use crate::scalar::Scalar;

pub trait Factorization<S: Scalar> {
    fn order(&self) -> usize;

    fn solve(&self, b: &[S]) -> Result<Vector<S>>;

    fn solve_adjoint(&self, b: &[S]) -> Result<Vector<S>>;

    /// Estimated infinity-norm condition number given `||A||_inf`.
    fn kappa_inf_estimate(&self, norm_inf: f64) -> Result<f64> {
        estimate_kappa_inf(
            self.order(),
            norm_inf,
            |b| self.solve(b).map(Vector::into_inner),
            |b| self.solve_adjoint(b).map(Vector::into_inner),
        )
    }
}

impl<S: Scalar> Factorization<S> for DenseLu<S> {
    fn order(&self) -> usize {
        self.n()
    }

    fn solve(&self, b: &[S]) -> Result<Vector<S>> {
        DenseLu::solve(self, b)
    }

    fn solve_adjoint(&self, b: &[S]) -> Result<Vector<S>> {
        DenseLu::solve_adjoint(self, b)
    }
}
