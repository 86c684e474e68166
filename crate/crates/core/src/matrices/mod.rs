//! Dense and compact matrix types, the partial-pivoting oracle, and norms.

mod dense;
pub(crate) mod fft;
mod lu;
mod norms;
mod structured;

pub use dense::{DenseMatrix, Vector};
pub(crate) use lu::{
    back_unit_lower_adjoint, back_upper, forward_unit_lower, forward_upper_adjoint,
};
pub use lu::{dense_lu_pp, dense_solve, DenseLu};
pub use norms::{
    estimate_kappa_inf, estimate_norm_one, kappa_2, norms_and_condition, numerical_rank,
    rank_tolerance, singular_values, Conditioning,
};
pub use structured::{toeplitz_matvec, HankelMatrix, ToeplitzMatrix};

use crate::error::Result;
use crate::scalar::Scalar;

/// Entry-wise reconstruction of a compactly stored matrix.
pub trait Materialize<S: Scalar> {
    fn materialize(&self) -> Result<DenseMatrix<S>>;
}

impl<S: Scalar> Materialize<S> for ToeplitzMatrix<S> {
    fn materialize(&self) -> Result<DenseMatrix<S>> {
        Ok(self.to_dense())
    }
}

impl<S: Scalar> Materialize<S> for HankelMatrix<S> {
    fn materialize(&self) -> Result<DenseMatrix<S>> {
        Ok(self.to_dense())
    }
}

impl<S: Scalar> Materialize<S> for DenseMatrix<S> {
    fn materialize(&self) -> Result<DenseMatrix<S>> {
        Ok(self.clone())
    }
}

pub fn materialize<S: Scalar, M: Materialize<S> + ?Sized>(m: &M) -> Result<DenseMatrix<S>> {
    m.materialize()
}
