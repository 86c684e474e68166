//! Fast O(n^2) solvers for low-displacement-rank linear systems (Toeplitz,
//! Hankel, Cauchy-type) and tooling to measure their numerical stability.
//!
//! The modules follow the data flow of a structured solve:
//!
//! - [`matrices`]: dense and compact matrix types, the partial-pivoting oracle, norms.
//! - [`displacement`]: Sylvester displacement operators and generators.
//! - [`gko`]: structured Gaussian elimination on Cauchy-type matrices.
//! - [`toeplitz_pipeline`]: DFT conversion of Toeplitz/Hankel systems to Cauchy form.
//! - [`classic`]: Bareiss and Levinson solvers for SPD Toeplitz matrices.
//! - [`seminormal`]: semi-normal equations with iterative refinement.
//! - [`stability_lab`]: error metrics, the check-and-fallback driver, experiments.
//! - [`io`]: the text file formats.

// Negated comparisons such as `!(pivot > tol)` are deliberate: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod classic;
pub mod displacement;
pub mod error;
pub mod factorization;
pub mod gko;
pub mod io;
pub mod matrices;
pub mod random;
pub mod report;
pub mod scalar;
pub mod seminormal;
pub mod stability_lab;
pub mod toeplitz_pipeline;

pub use num_complex::Complex64;

pub use classic::{bareiss_factor, bareiss_solve, levinson_solve, BareissFactors, ReflectionLog};
pub use displacement::{
    apply_displacement, cauchy_generators, generator_rescale, toeplitz_generators,
    verify_generators, CauchyTypeSystem, DisplacementOperator, GeneratorPair,
};
pub use error::{DisplaceError, Result};
pub use factorization::Factorization;
pub use gko::{gko_factor, gko_solve, recover_column, GeneratorConditioning, StructuredLUFactors};
pub use matrices::{
    dense_lu_pp, dense_solve, materialize, norms_and_condition, toeplitz_matvec, DenseMatrix,
    HankelMatrix, Materialize, ToeplitzMatrix, Vector,
};
pub use report::{Method, SolveReport};
pub use scalar::{Scalar, EPS};
pub use seminormal::{normal_residual, seminormal_factor, seminormal_solve, SeminormalFactor};
pub use stability_lab::{guaranteed_solve, StructuredSystem};
pub use toeplitz_pipeline::{gko_toeplitz_factor, gko_toeplitz_solve, hankel_solve};
