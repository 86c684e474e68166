//! Seeded random test families. Every generator takes an explicit RNG so that
//! experiments are reproducible from a stored seed.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::displacement::{CauchyTypeSystem, GeneratorPair};
use crate::error::{DisplaceError, Result};
use crate::matrices::{kappa_2, singular_values, DenseMatrix, ToeplitzMatrix, Vector};

pub type TestRng = ChaCha8Rng;

/// RNG for trial `stream` of an experiment seeded with `seed`. Distinct streams
/// are independent, so trials can be generated in any order.
pub fn trial_rng(seed: u64, stream: u64) -> TestRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn normal(rng: &mut impl Rng) -> f64 {
    StandardNormal.sample(rng)
}

pub fn normal_vector(rng: &mut impl Rng, n: usize) -> Vector {
    Vector::from_fn(n, |_| normal(rng))
}

/// Toeplitz matrix with independent standard normal diagonals.
pub fn random_toeplitz(rng: &mut impl Rng, n: usize) -> ToeplitzMatrix {
    let col = (0..n).map(|_| normal(rng)).collect();
    let row = (1..n).map(|_| normal(rng)).collect();
    ToeplitzMatrix::new(col, row).expect("finite normal samples")
}

/// Random Toeplitz matrix with `kappa_2 <= max_kappa`, verified by SVD.
/// Returns the matrix and its measured condition number.
pub fn well_conditioned_toeplitz(
    rng: &mut impl Rng,
    n: usize,
    max_kappa: f64,
) -> Result<(ToeplitzMatrix, f64)> {
    const ATTEMPTS: usize = 200;
    for _ in 0..ATTEMPTS {
        let t = random_toeplitz(rng, n);
        let k = kappa_2(&t.to_dense());
        if k <= max_kappa {
            return Ok((t, k));
        }
    }
    Err(DisplaceError::FamilyGenerationFailure(format!(
        "no Toeplitz matrix of order {n} with kappa <= {max_kappa:e} in {ATTEMPTS} draws"
    )))
}

/// Symmetric positive definite Toeplitz matrix `a_k = sum_j c_j cos(k theta_j)
/// + mu delta_k0` with positive weights; each cosine term is positive
/// semidefinite and `mu > 0` makes the sum definite.
pub fn random_spd_toeplitz(rng: &mut impl Rng, n: usize) -> ToeplitzMatrix {
    let terms = 4;
    let weights: Vec<f64> = (0..terms).map(|_| rng.random_range(0.1..1.0)).collect();
    let angles: Vec<f64> = (0..terms).map(|_| rng.random_range(0.0..PI)).collect();
    let mu = 10f64.powf(rng.random_range(-3.0..0.0));
    let col = (0..n)
        .map(|k| {
            let s: f64 = weights
                .iter()
                .zip(&angles)
                .map(|(c, th)| c * (k as f64 * th).cos())
                .sum();
            if k == 0 {
                s + mu
            } else {
                s
            }
        })
        .collect();
    ToeplitzMatrix::symmetric(col).expect("finite entries")
}

/// Real nodes that interlace with random jitter: `t_i ~ i`, `s_j ~ j + 1/2`,
/// with rows shuffled so that pivoting has work to do. Interlacing keeps the
/// Cauchy kernel away from the node collisions that make it ill-conditioned.
pub fn interlaced_nodes(rng: &mut impl Rng, n: usize) -> (Vector, Vector) {
    let mut t: Vec<f64> = (0..n)
        .map(|i| i as f64 + rng.random_range(-0.2..0.2))
        .collect();
    let s: Vec<f64> = (0..n)
        .map(|j| j as f64 + 0.5 + rng.random_range(-0.2..0.2))
        .collect();
    for i in (1..n).rev() {
        t.swap(i, rng.random_range(0..=i));
    }
    (t.into(), s.into())
}

fn signed_magnitude(rng: &mut impl Rng) -> f64 {
    let m = rng.random_range(0.5..2.0);
    if rng.random_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Cauchy-type system with interlaced nodes. For `alpha = 1` the generators
/// are bounded away from zero (a row/column-scaled Cauchy matrix); for larger
/// `alpha` they are standard normal.
pub fn random_cauchy(rng: &mut impl Rng, n: usize, alpha: usize) -> Result<CauchyTypeSystem> {
    let (t, s) = interlaced_nodes(rng, n);
    let (phi, psi) = if alpha == 1 {
        (
            DenseMatrix::from_fn(n, 1, |_, _| signed_magnitude(rng)),
            DenseMatrix::from_fn(1, n, |_, _| signed_magnitude(rng)),
        )
    } else {
        (
            DenseMatrix::from_fn(n, alpha, |_, _| normal(rng)),
            DenseMatrix::from_fn(alpha, n, |_, _| normal(rng)),
        )
    };
    CauchyTypeSystem::new(t, s, GeneratorPair::new(phi, psi)?)
}

/// Rank-2 Cauchy-type system whose generators nearly cancel:
/// `Phi = [u, u + delta w]`, `Psi = [v^T; -v^T + delta z^T]`, so that
/// `Phi Psi = delta (u z^T - w v^T) + delta^2 w z^T` is tiny relative to
/// `|Phi| |Psi|`.
pub fn adversarial_cauchy(rng: &mut impl Rng, n: usize, delta: f64) -> Result<CauchyTypeSystem> {
    let (t, s) = interlaced_nodes(rng, n);
    let u = normal_vector(rng, n);
    let v = normal_vector(rng, n);
    let w = normal_vector(rng, n);
    let z = normal_vector(rng, n);
    let phi = DenseMatrix::from_fn(n, 2, |i, a| if a == 0 { u[i] } else { u[i] + delta * w[i] });
    let psi = DenseMatrix::from_fn(
        2,
        n,
        |a, j| if a == 0 { v[j] } else { -v[j] + delta * z[j] },
    );
    CauchyTypeSystem::new(t, s, GeneratorPair::new(phi, psi)?)
}

/// Symmetric positive definite Toeplitz matrices with a prescribed condition
/// number: the prolate matrix `a_0 = 2w`, `a_k = sin(2 pi w k) / (pi k)` (whose
/// spectrum fills `(0, 1)` with eigenvalues exponentially close to zero) plus
/// the diagonal shift that places `kappa_2` at the target.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProlateFamily {
    pub n: usize,
    /// The bandwidth `w` is drawn uniformly from this range per matrix.
    pub bandwidth: (f64, f64),
}

impl ProlateFamily {
    pub fn new(n: usize) -> Self {
        ProlateFamily {
            n,
            bandwidth: (0.2, 0.3),
        }
    }

    pub fn prolate(n: usize, w: f64) -> ToeplitzMatrix {
        ToeplitzMatrix::symmetric(
            (0..n)
                .map(|k| {
                    if k == 0 {
                        2.0 * w
                    } else {
                        (2.0 * PI * w * k as f64).sin() / (PI * k as f64)
                    }
                })
                .collect(),
        )
        .expect("finite entries")
    }

    /// Matrix with `kappa_2` within 1% of `target`; returns it with the
    /// SVD-measured condition number.
    pub fn generate(&self, target: f64, rng: &mut impl Rng) -> Result<(ToeplitzMatrix, f64)> {
        if !(target > 1.0) || !target.is_finite() {
            return Err(DisplaceError::FamilyGenerationFailure(format!(
                "target condition number {target} must be finite and > 1"
            )));
        }
        let w = rng.random_range(self.bandwidth.0..self.bandwidth.1);
        let p = Self::prolate(self.n, w);
        // Symmetric positive semidefinite: singular values are the eigenvalues,
        // up to rounding near zero.
        let sv = singular_values(&p.to_dense());
        let (hi, lo) = (sv[0], *sv.last().expect("n >= 1"));
        if hi / lo.max(f64::MIN_POSITIVE) < target {
            return Err(DisplaceError::FamilyGenerationFailure(format!(
                "prolate matrix of order {} has kappa {:e} below target {target:e}",
                self.n,
                hi / lo
            )));
        }
        let sigma = (hi - target * lo) / (target - 1.0);
        let t = p.shifted(sigma);
        let k = kappa_2(&t.to_dense());
        if (k / target - 1.0).abs() > 0.01 {
            return Err(DisplaceError::FamilyGenerationFailure(format!(
                "shifted prolate matrix has kappa {k:e}, target {target:e}"
            )));
        }
        Ok((t, k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn streams_are_reproducible_and_distinct() {
        let a = normal_vector(&mut trial_rng(7, 3), 4);
        let b = normal_vector(&mut trial_rng(7, 3), 4);
        let c = normal_vector(&mut trial_rng(7, 4), 4);
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn prolate_family_hits_targets() {
        let fam = ProlateFamily::new(24);
        let mut rng = trial_rng(1, 0);
        for target in [10.0, 1e3, 1e6] {
            let (t, k) = fam.generate(target, &mut rng).unwrap();
            assert!(t.is_symmetric());
            assert!((k / target - 1.0).abs() <= 0.01);
        }
        assert!(fam.generate(0.5, &mut rng).is_err());
        assert!(ProlateFamily::new(2).generate(1e12, &mut rng).is_err());
    }

    #[test]
    fn spd_family_is_positive_definite() {
        let mut rng = trial_rng(2, 0);
        for _ in 0..10 {
            let t = random_spd_toeplitz(&mut rng, 12);
            let sv = singular_values(&t.to_dense());
            // Positive definite symmetric: Cholesky-free check via a_0 > 0 and
            // all eigenvalues (= singular values) bounded below by mu > 0.
            assert!(t.diag(0) > 0.0 && sv.last().unwrap() > &0.0);
        }
    }

    #[test]
    fn adversarial_generators_cancel() {
        let sys = adversarial_cauchy(&mut trial_rng(3, 0), 10, 1e-6).unwrap();
        let g = sys.generators();
        let ratio = g.phi().norm_fro() * g.psi().norm_fro() / g.product().norm_fro();
        assert!(ratio > 1e4);
    }

    #[test]
    fn well_conditioned_toeplitz_is_verified() {
        let (t, k) = well_conditioned_toeplitz(&mut trial_rng(4, 0), 16, 1e3).unwrap();
        assert!(k <= 1e3);
        assert_eq!(k, kappa_2(&t.to_dense()));
    }
}
