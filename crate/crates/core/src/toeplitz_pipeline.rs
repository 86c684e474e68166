//! Toeplitz and Hankel solves through the unitary DFT transformation to a
//! Cauchy-type system.
//!
//! With `F` the unitary DFT (`F[k][j] = w^{kj} / sqrt(n)`, `w = e^{2 pi i/n}`)
//! and `D = diag(1, e^{i pi/n}, ..., e^{i pi (n-1)/n})`, one has
//! `Z_1 = F^* D_t F` and `Z_-1 = D^-1 F^* D_s F D` with `t_k = w^k` and
//! `s_k = e^{i pi/n} w^k`. Substituting in `Z_1 T - T Z_-1 = Phi Psi` shows that
//! `R = F T D^-1 F^*` satisfies `D_t R - R D_s = (F Phi)(Psi D^-1 F^*)`, so `T`
//! can be factored as `T = F^* P^T L U F D` by running GKO on `R`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::displacement::{toeplitz_generators, CauchyTypeSystem, GeneratorPair};
use crate::error::{DisplaceError, Result};
use crate::factorization::Factorization;
use crate::gko::{GeneratorConditioning, StructuredLUFactors};
use crate::matrices::fft::{dft_in_place, Sign};
use crate::matrices::{toeplitz_matvec, DenseMatrix, HankelMatrix, ToeplitzMatrix, Vector};
use crate::report::{residual_metrics, Method, SolveReport};
use crate::scalar::{Scalar, EPS};

#[cfg(any(test, feature = "fault-injection"))]
use crate::gko::FaultInjection;

/// The unitary pair `(F, D)` of order `n`, applied in O(n log n).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FourierDiagonalPair {
    n: usize,
}

impl FourierDiagonalPair {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "transform order must be >= 1");
        FourierDiagonalPair { n }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// `D[k][k] = e^{i pi k / n}`.
    pub fn d(&self, k: usize) -> Complex64 {
        Complex64::from_polar(1.0, PI * k as f64 / self.n as f64)
    }

    /// `F x`.
    pub fn apply_f(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut v = x.to_vec();
        dft_in_place(&mut v, Sign::Positive);
        let s = 1.0 / (self.n as f64).sqrt();
        v.iter_mut().for_each(|z| *z *= s);
        v
    }

    /// `F^* x`.
    pub fn apply_f_adjoint(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut v = x.to_vec();
        dft_in_place(&mut v, Sign::Negative);
        let s = 1.0 / (self.n as f64).sqrt();
        v.iter_mut().for_each(|z| *z *= s);
        v
    }

    pub fn dense_f(&self) -> DenseMatrix<Complex64> {
        let n = self.n;
        let s = 1.0 / (n as f64).sqrt();
        DenseMatrix::from_fn(n, n, |k, j| {
            Complex64::from_polar(s, 2.0 * PI * ((k * j) % n) as f64 / n as f64)
        })
    }

    pub fn dense_d(&self) -> DenseMatrix<Complex64> {
        let d: Vec<Complex64> = (0..self.n).map(|k| self.d(k)).collect();
        DenseMatrix::diag(&d)
    }

    /// Eigenvalues of `Z_1`: `t_k = e^{2 pi i k / n}`.
    pub fn t_nodes(&self) -> Vec<Complex64> {
        (0..self.n)
            .map(|k| Complex64::from_polar(1.0, 2.0 * PI * k as f64 / self.n as f64))
            .collect()
    }

    /// Eigenvalues of `Z_-1`: `s_k = e^{i pi (2k + 1) / n}`.
    pub fn s_nodes(&self) -> Vec<Complex64> {
        (0..self.n)
            .map(|k| Complex64::from_polar(1.0, PI * (2 * k + 1) as f64 / self.n as f64))
            .collect()
    }
}

/// The Cauchy-type system `R = F T D^-1 F^*` with transformed generators.
pub fn toeplitz_to_cauchy<S: Scalar>(t: &ToeplitzMatrix<S>) -> CauchyTypeSystem<Complex64> {
    let n = t.n();
    let fd = FourierDiagonalPair::new(n);
    let gen = toeplitz_generators(t);
    let alpha = gen.alpha();

    let mut phi = DenseMatrix::zeros(n, alpha);
    for c in 0..alpha {
        let col: Vec<Complex64> = (0..n).map(|i| gen.phi()[(i, c)].to_complex()).collect();
        for (i, v) in fd.apply_f(&col).into_iter().enumerate() {
            phi[(i, c)] = v;
        }
    }
    // (Psi D^-1 F^*)_j = n^{-1/2} sum_k Psi_k conj(d_k) w^{-jk}.
    let mut psi = DenseMatrix::zeros(alpha, n);
    for c in 0..alpha {
        let row: Vec<Complex64> = (0..n)
            .map(|k| gen.psi()[(c, k)].to_complex() * fd.d(k).conj())
            .collect();
        for (j, v) in fd.apply_f_adjoint(&row).into_iter().enumerate() {
            psi[(c, j)] = v;
        }
    }
    let gen = GeneratorPair::new(phi, psi).expect("transformed generators keep their shape");
    CauchyTypeSystem::new(fd.t_nodes().into(), fd.s_nodes().into(), gen)
        .expect("roots of unity never collide with odd 2n-th roots")
}

/// `T = F^* P^T L U F D`.
#[derive(Debug, Clone)]
pub struct GkoToeplitzFactorization {
    fd: FourierDiagonalPair,
    cauchy: StructuredLUFactors<Complex64>,
}

impl GkoToeplitzFactorization {
    pub fn cauchy_factors(&self) -> &StructuredLUFactors<Complex64> {
        &self.cauchy
    }

    pub fn growth(&self) -> f64 {
        self.cauchy.growth
    }

    /// Dense `F^* P^T L U F D`, for checking against `T`.
    pub fn reconstruct(&self) -> DenseMatrix<Complex64> {
        let f = self.fd.dense_f();
        let r = self.cauchy.reconstruct();
        f.adjoint()
            .matmul(&r)
            .and_then(|m| m.matmul(&f))
            .and_then(|m| m.matmul(&self.fd.dense_d()))
            .expect("square factors")
    }
}

impl Factorization<Complex64> for GkoToeplitzFactorization {
    fn order(&self) -> usize {
        self.fd.n()
    }

    /// `x = D^-1 F^* R^-1 F b`.
    fn solve(&self, b: &[Complex64]) -> Result<Vector<Complex64>> {
        let n = self.fd.n();
        if b.len() != n {
            return Err(DisplaceError::dims(format!(
                "Toeplitz of order {n}, rhs length {}",
                b.len()
            )));
        }
        let y = self.cauchy.solve(&self.fd.apply_f(b))?;
        let z = self.fd.apply_f_adjoint(&y);
        Ok(Vector::from_fn(n, |k| z[k] * self.fd.d(k).conj()))
    }

    /// `z = F^* R^-H F D c`.
    fn solve_adjoint(&self, c: &[Complex64]) -> Result<Vector<Complex64>> {
        let n = self.fd.n();
        if c.len() != n {
            return Err(DisplaceError::dims(format!(
                "Toeplitz of order {n}, rhs length {}",
                c.len()
            )));
        }
        let dc: Vec<Complex64> = c
            .iter()
            .enumerate()
            .map(|(k, &v)| v * self.fd.d(k))
            .collect();
        let y = self.cauchy.solve_adjoint(&self.fd.apply_f(&dc))?;
        Ok(self.fd.apply_f_adjoint(&y).into())
    }
}

pub fn gko_toeplitz_factor<S: Scalar>(
    t: &ToeplitzMatrix<S>,
    cond: GeneratorConditioning,
) -> Result<GkoToeplitzFactorization> {
    let sys = toeplitz_to_cauchy(t);
    Ok(GkoToeplitzFactorization {
        fd: FourierDiagonalPair::new(t.n()),
        cauchy: crate::gko::gko_factor(&sys, cond)?,
    })
}

#[cfg(any(test, feature = "fault-injection"))]
pub fn gko_toeplitz_factor_with_fault<S: Scalar>(
    t: &ToeplitzMatrix<S>,
    cond: GeneratorConditioning,
    fault: FaultInjection,
) -> Result<GkoToeplitzFactorization> {
    let sys = toeplitz_to_cauchy(t);
    Ok(GkoToeplitzFactorization {
        fd: FourierDiagonalPair::new(t.n()),
        cauchy: crate::gko::gko_factor_with_fault(&sys, cond, fault)?,
    })
}

/// Maps a complex solution back to `S`. For real `S` the imaginary part is
/// dropped after checking it stays below `sqrt(eps) ||x||`; returns the relative
/// discarded magnitude.
pub(crate) fn to_scalar<S: Scalar>(z: &[Complex64]) -> Result<(Vector<S>, f64)> {
    let xn = z.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let leak = if S::IS_COMPLEX {
        0.0
    } else {
        z.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    };
    let threshold = EPS.sqrt() * xn;
    if leak > threshold {
        return Err(DisplaceError::ImaginaryLeak { leak, threshold });
    }
    let rel = if xn > 0.0 { leak / xn } else { 0.0 };
    Ok((
        z.iter()
            .map(|&v| S::from_complex(v))
            .collect::<Vec<_>>()
            .into(),
        rel,
    ))
}

/// Solves a Toeplitz system using a previously computed factorization and
/// builds the report.
pub(crate) fn solve_with<S: Scalar>(
    t: &ToeplitzMatrix<S>,
    fac: &GkoToeplitzFactorization,
    b: &[S],
    cond: GeneratorConditioning,
) -> Result<SolveReport<S>> {
    let bc: Vec<Complex64> = b.iter().map(|v| v.to_complex()).collect();
    let z = fac.solve(&bc)?;
    let (x, leak) = to_scalar::<S>(&z)?;
    let ax = toeplitz_matvec(t, &x)?;
    let r: Vec<S> = ax.iter().zip(b).map(|(&a, &bb)| a - bb).collect();
    let norm_a = t.norm_inf();
    let res = residual_metrics(&r, norm_a, &x, b);
    let kappa = fac.kappa_inf_estimate(norm_a)?;
    let mut report = SolveReport::direct(Method::Gko(cond), x, res, norm_a, kappa, fac.growth());
    report.imaginary_leak = leak;
    Ok(report)
}

/// Solves `T x = b` by DFT conversion and GKO. For real `T`, `b` the result is
/// real; an imaginary part above `sqrt(eps) ||x||` is reported as
/// [`DisplaceError::ImaginaryLeak`].
pub fn gko_toeplitz_solve<S: Scalar>(
    t: &ToeplitzMatrix<S>,
    b: &[S],
    cond: GeneratorConditioning,
) -> Result<(Vector<S>, SolveReport<S>)> {
    if b.len() != t.n() {
        return Err(DisplaceError::dims(format!(
            "Toeplitz of order {}, rhs length {}",
            t.n(),
            b.len()
        )));
    }
    let fac = gko_toeplitz_factor(t, cond)?;
    let report = solve_with(t, &fac, b, cond)?;
    Ok((report.x.clone(), report))
}

/// Solves `H x = b` as the Toeplitz system `(J H) x = J b`, `J` the reversal.
pub fn hankel_solve<S: Scalar>(
    h: &HankelMatrix<S>,
    b: &[S],
    cond: GeneratorConditioning,
) -> Result<(Vector<S>, SolveReport<S>)> {
    if b.len() != h.n() {
        return Err(DisplaceError::dims(format!(
            "Hankel of order {}, rhs length {}",
            h.n(),
            b.len()
        )));
    }
    let jb: Vec<S> = b.iter().rev().copied().collect();
    gko_toeplitz_solve(&h.row_reversed(), &jb, cond)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::displacement::verify_generators;
    use crate::matrices::{dense_solve, Materialize};

    fn dense_r(t: &ToeplitzMatrix<f64>) -> DenseMatrix<Complex64> {
        let fd = FourierDiagonalPair::new(t.n());
        let f = fd.dense_f();
        let dinv = DenseMatrix::diag(&(0..t.n()).map(|k| fd.d(k).conj()).collect::<Vec<_>>());
        f.matmul(&t.to_dense().to_complex())
            .and_then(|m| m.matmul(&dinv))
            .and_then(|m| m.matmul(&f.adjoint()))
            .unwrap()
    }

    #[test]
    fn scalar_case() {
        let t = ToeplitzMatrix::new(vec![2.5], vec![]).unwrap();
        let sys = toeplitz_to_cauchy(&t);
        assert!((sys.t()[0] - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!((sys.s()[0] - Complex64::new(-1.0, 0.0)).norm() < 1e-15);
        let r = sys.materialize().unwrap();
        assert!((r[(0, 0)] - Complex64::new(2.5, 0.0)).norm() < 1e-15);
        let (x, _) = gko_toeplitz_solve(&t, &[5.0], GeneratorConditioning::Plain).unwrap();
        assert!((x[0] - 2.0).abs() < 1e-15);
    }

    #[test]
    fn identity_transforms_to_dense_product() {
        let t = ToeplitzMatrix::<f64>::identity(6);
        let sys = toeplitz_to_cauchy(&t);
        let r = sys.materialize().unwrap();
        assert!(r.sub(&dense_r(&t)).unwrap().max_abs() < 1e-14);
        let res = verify_generators(&sys.operator(), &dense_r(&t), sys.generators()).unwrap();
        assert!(res <= 6.0 * 10.0 * EPS, "{res}");
    }

    #[test]
    fn transformed_generators_reproduce_dense_r() {
        let t = ToeplitzMatrix::new(vec![4.0, -1.0, 0.5, 2.0, -0.25], vec![1.5, 3.0, -2.0, 0.75])
            .unwrap();
        let sys = toeplitz_to_cauchy(&t);
        let rd = dense_r(&t);
        assert!(sys.materialize().unwrap().sub(&rd).unwrap().max_abs() < 1e-13);
        assert!(verify_generators(&sys.operator(), &rd, sys.generators()).unwrap() < 50.0 * EPS);
    }

    #[test]
    fn factor_chain_reconstructs_t() {
        let t = ToeplitzMatrix::new(vec![3.0, 1.0, -2.0, 0.5], vec![-1.0, 2.0, 0.25]).unwrap();
        for cond in GeneratorConditioning::ALL {
            let fac = gko_toeplitz_factor(&t, cond).unwrap();
            let diff = fac.reconstruct().sub(&t.to_dense().to_complex()).unwrap();
            assert!(diff.max_abs() < 1e-13, "{cond}");
        }
    }

    #[test]
    fn spd_tridiagonal_solves_to_ones() {
        let t = ToeplitzMatrix::symmetric({
            let mut c = vec![0.0; 8];
            c[0] = 2.0;
            c[1] = -1.0;
            c
        })
        .unwrap();
        let b = t.matvec_direct(&[1.0; 8]).unwrap();
        for cond in GeneratorConditioning::ALL {
            let (x, rep) = gko_toeplitz_solve(&t, &b, cond).unwrap();
            // kappa_inf of this matrix is about 40.
            assert!(x.iter().all(|v| (v - 1.0).abs() < 1e-12), "{cond}");
            assert!(rep.imaginary_leak < 1e-14);
        }
    }

    #[test]
    fn adjoint_solve_is_consistent() {
        let t = ToeplitzMatrix::new(vec![3.0, 1.0, -2.0], vec![-1.0, 2.0]).unwrap();
        let fac = gko_toeplitz_factor(&t, GeneratorConditioning::GuOrthogonal).unwrap();
        let c = [
            Complex64::new(1.0, 0.5),
            Complex64::new(-2.0, 0.0),
            Complex64::new(0.0, 1.0),
        ];
        let z = fac.solve_adjoint(&c).unwrap();
        let back = t.to_dense().to_complex().adjoint_matvec(&z).unwrap();
        for (u, v) in back.iter().zip(&c) {
            assert!((u - v).norm() < 1e-13);
        }
    }

    #[test]
    fn hankel_examples() {
        // Anti-identity: x is b reversed.
        let mut h = vec![0.0; 7];
        h[3] = 1.0;
        let h = HankelMatrix::new(h).unwrap();
        let (x, _) = hankel_solve(&h, &[1.0, 2.0, 3.0, 4.0], GeneratorConditioning::Plain).unwrap();
        for (a, b) in x.iter().zip([4.0, 3.0, 2.0, 1.0]) {
            assert!((a - b).abs() < 1e-14);
        }

        let hilbert = HankelMatrix::new((0..5).map(|k| 1.0 / (k as f64 + 1.0)).collect()).unwrap();
        let b = [1.0, -1.0, 2.0];
        let oracle = dense_solve(&hilbert.to_dense(), &b).unwrap();
        let (x, _) = hankel_solve(&hilbert, &b, GeneratorConditioning::GuOrthogonal).unwrap();
        // kappa of the 3x3 Hilbert matrix is about 750.
        for (a, o) in x.iter().zip(oracle.iter()) {
            assert!((a - o).abs() <= 1e-11 * oracle.norm_inf());
        }

        let one = HankelMatrix::new(vec![4.0]).unwrap();
        let (x, _) = hankel_solve(&one, &[2.0], GeneratorConditioning::StewartLU).unwrap();
        assert!((x[0] - 0.5).abs() < 1e-16);
    }

    #[test]
    fn imaginary_leak_threshold() {
        let z = [Complex64::new(1.0, 1e-3)];
        assert!(matches!(
            to_scalar::<f64>(&z),
            Err(DisplaceError::ImaginaryLeak { .. })
        ));
        let z = [Complex64::new(1.0, 1e-12)];
        let (x, leak) = to_scalar::<f64>(&z).unwrap();
        assert_eq!(x[0], 1.0);
        assert!(leak <= 1e-12);
        let (_, leak) = to_scalar::<Complex64>(&[Complex64::new(0.0, 1.0)]).unwrap();
        assert_eq!(leak, 0.0);
    }
}
