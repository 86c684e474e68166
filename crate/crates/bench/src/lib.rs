//! Fixed-seed inputs shared by the solver benchmarks.

use displace_core::random::{
    normal_vector, random_spd_toeplitz, trial_rng, well_conditioned_toeplitz,
};
use displace_core::ToeplitzMatrix;

/// Orders timed by every benchmark group.
pub const SIZES: [usize; 3] = [64, 128, 256];

/// Symmetric positive definite Toeplitz system of order `n`.
pub fn spd_system(n: usize) -> (ToeplitzMatrix, Vec<f64>) {
    let mut rng = trial_rng(0xbe4c, n as u64);
    let t = random_spd_toeplitz(&mut rng, n);
    let b = normal_vector(&mut rng, n).into_inner();
    (t, b)
}

/// Nonsymmetric Toeplitz system of order `n`. Falls back to an unverified draw
/// when no matrix with `kappa_2 <= 1e4` turns up, since timing does not depend
/// on conditioning.
pub fn general_system(n: usize) -> (ToeplitzMatrix, Vec<f64>) {
    let mut rng = trial_rng(0xbe4d, n as u64);
    let t = well_conditioned_toeplitz(&mut rng, n, 1e4)
        .map(|(t, _)| t)
        .unwrap_or_else(|_| displace_core::random::random_toeplitz(&mut rng, n));
    let b = normal_vector(&mut rng, n).into_inner();
    (t, b)
}
