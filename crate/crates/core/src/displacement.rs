//! Sylvester displacement `A_f R - R A_b = Phi Psi` and its generators.
//!
//! Two operator families are supported: diagonal pairs `(D_t, D_s)`, under which
//! a rank-`alpha` displacement defines a Cauchy-type matrix, and the
//! `(Z_1, Z_-1)` shift pair used for Toeplitz matrices, where `Z_phi` is the
//! down-shift with `phi` in the top-right corner.

use crate::error::{DisplaceError, Result};
use crate::matrices::{dense_lu_pp, DenseMatrix, Materialize, ToeplitzMatrix, Vector};
use crate::scalar::{Scalar, EPS};

/// Largest displacement rank accepted by [`GeneratorPair`].
pub const MAX_ALPHA: usize = 8;

#[derive(Debug, Clone, PartialEq)]
pub enum DisplacementOperator<S: Scalar = f64> {
    /// `A_f = diag(t)`, `A_b = diag(s)`.
    DiagonalPair { t: Vector<S>, s: Vector<S> },
    /// `A_f = Z_{f_corner}`, `A_b = Z_{b_corner}`, corners in `{1, -1}`.
    ShiftPair { f_corner: f64, b_corner: f64 },
}

impl<S: Scalar> DisplacementOperator<S> {
    pub fn diagonal(t: Vector<S>, s: Vector<S>) -> Result<Self> {
        if t.len() != s.len() {
            return Err(DisplaceError::dims(format!(
                "node vectors of lengths {} and {}",
                t.len(),
                s.len()
            )));
        }
        Ok(DisplacementOperator::DiagonalPair { t, s })
    }

    pub fn shift(f_corner: f64, b_corner: f64) -> Result<Self> {
        for c in [f_corner, b_corner] {
            if c != 1.0 && c != -1.0 {
                return Err(DisplaceError::InvalidInput(format!(
                    "shift corner must be +1 or -1, got {c}"
                )));
            }
        }
        Ok(DisplacementOperator::ShiftPair { f_corner, b_corner })
    }

    /// The Toeplitz operator pair `(Z_1, Z_-1)`.
    pub fn toeplitz() -> Self {
        DisplacementOperator::ShiftPair {
            f_corner: 1.0,
            b_corner: -1.0,
        }
    }
}

/// `(Phi, Psi)` with `Phi` of shape `n x alpha` and `Psi` of shape `alpha x n`.
/// Columns of `Phi` (rows of `Psi`) are the generator vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorPair<S: Scalar = f64> {
    phi: DenseMatrix<S>,
    psi: DenseMatrix<S>,
}

impl<S: Scalar> GeneratorPair<S> {
    pub fn new(phi: DenseMatrix<S>, psi: DenseMatrix<S>) -> Result<Self> {
        let alpha = phi.cols();
        if alpha == 0 || alpha > MAX_ALPHA {
            return Err(DisplaceError::InvalidInput(format!(
                "displacement rank must be in 1..={MAX_ALPHA}, got {alpha}"
            )));
        }
        if psi.rows() != alpha || psi.cols() != phi.rows() {
            return Err(DisplaceError::dims(format!(
                "Phi is {}x{}, Psi is {}x{}",
                phi.rows(),
                phi.cols(),
                psi.rows(),
                psi.cols()
            )));
        }
        if !phi.is_finite() || !psi.is_finite() {
            return Err(DisplaceError::InvalidInput(
                "generators must be finite".into(),
            ));
        }
        Ok(GeneratorPair { phi, psi })
    }

    pub fn n(&self) -> usize {
        self.phi.rows()
    }

    pub fn alpha(&self) -> usize {
        self.phi.cols()
    }

    pub fn phi(&self) -> &DenseMatrix<S> {
        &self.phi
    }

    pub fn psi(&self) -> &DenseMatrix<S> {
        &self.psi
    }

    /// `Phi Psi`.
    pub fn product(&self) -> DenseMatrix<S> {
        self.phi
            .matmul(&self.psi)
            .expect("shapes checked at construction")
    }

    /// `Phi_i . Psi_j`, one entry of the displacement.
    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> S {
        (0..self.alpha())
            .map(|k| self.phi[(i, k)] * self.psi[(k, j)])
            .sum()
    }
}

/// Nodes `t`, `s` plus generators; `R[i][j] = Phi_i Psi_j / (t_i - s_j)`.
#[derive(Debug, Clone, PartialEq)]
pub struct CauchyTypeSystem<S: Scalar = f64> {
    t: Vector<S>,
    s: Vector<S>,
    gen: GeneratorPair<S>,
}

impl<S: Scalar> CauchyTypeSystem<S> {
    pub fn new(t: Vector<S>, s: Vector<S>, gen: GeneratorPair<S>) -> Result<Self> {
        let n = gen.n();
        if t.len() != n || s.len() != n {
            return Err(DisplaceError::dims(format!(
                "generators of order {n} with node vectors of lengths {} and {}",
                t.len(),
                s.len()
            )));
        }
        check_nodes(&t, &s)?;
        Ok(CauchyTypeSystem { t, s, gen })
    }

    pub fn n(&self) -> usize {
        self.t.len()
    }

    pub fn t(&self) -> &Vector<S> {
        &self.t
    }

    pub fn s(&self) -> &Vector<S> {
        &self.s
    }

    pub fn generators(&self) -> &GeneratorPair<S> {
        &self.gen
    }

    pub fn operator(&self) -> DisplacementOperator<S> {
        DisplacementOperator::DiagonalPair {
            t: self.t.clone(),
            s: self.s.clone(),
        }
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> S {
        self.gen.entry(i, j) / (self.t[i] - self.s[j])
    }

    /// `R x` in O(alpha n^2) without forming `R`.
    pub fn matvec(&self, x: &[S]) -> Result<Vector<S>> {
        let n = self.n();
        if x.len() != n {
            return Err(DisplaceError::dims(format!(
                "Cauchy-type matrix of order {n} times vector of length {}",
                x.len()
            )));
        }
        Ok(Vector::from_fn(n, |i| {
            (0..n).map(|j| self.entry(i, j) * x[j]).sum()
        }))
    }

    /// `||R||_inf` without forming `R`.
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// The same system with every entry multiplied by `c` (generators `Phi` scaled).
    pub fn scaled(&self, c: S) -> Self {
        let phi = self.gen.phi.scaled(c);
        CauchyTypeSystem {
            t: self.t.clone(),
            s: self.s.clone(),
            gen: GeneratorPair {
                phi,
                psi: self.gen.psi.clone(),
            },
        }
    }
}

impl<S: Scalar> Materialize<S> for CauchyTypeSystem<S> {
    fn materialize(&self) -> Result<DenseMatrix<S>> {
        let n = self.n();
        Ok(DenseMatrix::from_fn(n, n, |i, j| self.entry(i, j)))
    }
}

fn check_nodes<S: Scalar>(t: &[S], s: &[S]) -> Result<()> {
    for (i, &ti) in t.iter().enumerate() {
        if let Some(j) = s.iter().position(|&sj| sj == ti) {
            return Err(DisplaceError::NodeCollision { row: i, col: j });
        }
    }
    Ok(())
}

/// `A_f R - R A_b`, computed densely.
pub fn apply_displacement<S: Scalar>(
    op: &DisplacementOperator<S>,
    r: &DenseMatrix<S>,
) -> Result<DenseMatrix<S>> {
    if !r.is_square() {
        return Err(DisplaceError::dims(format!(
            "displacement of a non-square {}x{} matrix",
            r.rows(),
            r.cols()
        )));
    }
    let n = r.rows();
    match op {
        DisplacementOperator::DiagonalPair { t, s } => {
            if t.len() != n || s.len() != n {
                return Err(DisplaceError::dims(format!(
                    "operator of order {} applied to order {n}",
                    t.len()
                )));
            }
            Ok(DenseMatrix::from_fn(n, n, |i, j| (t[i] - s[j]) * r[(i, j)]))
        }
        DisplacementOperator::ShiftPair { f_corner, b_corner } => {
            let (f, b) = (S::from_f64(*f_corner), S::from_f64(*b_corner));
            Ok(DenseMatrix::from_fn(n, n, |i, j| {
                let zr = if i == 0 {
                    f * r[(n - 1, j)]
                } else {
                    r[(i - 1, j)]
                };
                let rz = if j + 1 < n {
                    r[(i, j + 1)]
                } else {
                    b * r[(i, 0)]
                };
                zr - rz
            }))
        }
    }
}

/// Rank-2 `(Z_1, Z_-1)` generators of a Toeplitz matrix:
/// `Phi = [e_1, (a_0, a_{1-n}+a_1, ..., a_{-1}+a_{n-1})]`,
/// `Psi = [(a_{n-1}-a_{-1}, ..., a_1-a_{1-n}, a_0); (0, ..., 0, 1)]`.
pub fn toeplitz_generators<S: Scalar>(t: &ToeplitzMatrix<S>) -> GeneratorPair<S> {
    let n = t.n();
    let n_i = n as isize;
    let mut phi = DenseMatrix::zeros(n, 2);
    let mut psi = DenseMatrix::zeros(2, n);
    phi[(0, 0)] = S::one();
    phi[(0, 1)] = t.diag(0);
    for i in 1..n {
        let i = i as isize;
        phi[(i as usize, 1)] = t.diag(i - n_i) + t.diag(i);
    }
    for j in 0..n - 1 {
        let k = n_i - 1 - j as isize;
        psi[(0, j)] = t.diag(k) - t.diag(-(j as isize) - 1);
    }
    psi[(0, n - 1)] = t.diag(0);
    psi[(1, n - 1)] = S::one();
    GeneratorPair { phi, psi }
}

/// The rank-1 Cauchy system `[1 / (t_i - s_j)]` with all-ones generators.
pub fn cauchy_generators<S: Scalar>(t: &Vector<S>, s: &Vector<S>) -> Result<CauchyTypeSystem<S>> {
    if t.len() != s.len() {
        return Err(DisplaceError::dims(format!(
            "node vectors of lengths {} and {}",
            t.len(),
            s.len()
        )));
    }
    let n = t.len();
    let gen = GeneratorPair {
        phi: DenseMatrix::from_fn(n, 1, |_, _| S::one()),
        psi: DenseMatrix::from_fn(1, n, |_, _| S::one()),
    };
    CauchyTypeSystem::new(t.clone(), s.clone(), gen)
}

/// `||A_f R - R A_b - Phi Psi||_inf / ||R||_inf`; the absolute residual when
/// `||R||` is below the smallest normal double.
pub fn verify_generators<S: Scalar>(
    op: &DisplacementOperator<S>,
    r: &DenseMatrix<S>,
    gen: &GeneratorPair<S>,
) -> Result<f64> {
    if gen.n() != r.rows() {
        return Err(DisplaceError::dims(format!(
            "generators of order {} for a matrix of order {}",
            gen.n(),
            r.rows()
        )));
    }
    let disp = apply_displacement(op, r)?;
    let diff = disp.sub(&gen.product())?;
    let rn = r.norm_inf();
    let abs = diff.norm_inf();
    Ok(if rn < f64::MIN_POSITIVE {
        abs
    } else {
        abs / rn
    })
}

/// `(Phi M, M^-1 Psi)`; leaves the product unchanged.
pub fn generator_rescale<S: Scalar>(
    gen: &GeneratorPair<S>,
    m: &DenseMatrix<S>,
) -> Result<GeneratorPair<S>> {
    let alpha = gen.alpha();
    if m.rows() != alpha || m.cols() != alpha {
        return Err(DisplaceError::dims(format!(
            "transform must be {alpha}x{alpha}, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let lu = dense_lu_pp(m).map_err(|e| DisplaceError::SingularTransform(e.to_string()))?;
    let inv = lu.inverse();
    let kappa = m.norm_inf() * inv.norm_inf();
    if !(kappa < 1.0 / (alpha as f64 * EPS)) {
        return Err(DisplaceError::SingularTransform(format!(
            "condition estimate {kappa:e} too large"
        )));
    }
    Ok(GeneratorPair {
        phi: gen.phi.matmul(m)?,
        psi: inv.matmul(&gen.psi)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn v(x: &[f64]) -> Vector {
        Vector::from(x.to_vec())
    }

    #[test]
    fn zero_diagonal_operator_gives_zero() {
        let op = DisplacementOperator::diagonal(v(&[0.0, 0.0]), v(&[0.0, 0.0])).unwrap();
        let r = DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        assert_eq!(
            apply_displacement(&op, &r).unwrap(),
            DenseMatrix::zeros(2, 2)
        );
    }

    #[test]
    fn shift_pair_on_identity_differs_in_corner() {
        let d = apply_displacement(&DisplacementOperator::toeplitz(), &DenseMatrix::identity(3))
            .unwrap();
        let mut expect = DenseMatrix::zeros(3, 3);
        expect[(0, 2)] = 2.0;
        assert_eq!(d, expect);
    }

    #[test]
    fn diagonal_pair_on_cauchy_gives_ones() {
        let sys = cauchy_generators(&v(&[2.0, 3.0]), &v(&[0.0, 1.0])).unwrap();
        let r = sys.materialize().unwrap();
        let d = apply_displacement(&sys.operator(), &r).unwrap();
        assert!(
            d.sub(&DenseMatrix::from_fn(2, 2, |_, _| 1.0))
                .unwrap()
                .max_abs()
                < 1e-15
        );
    }

    #[test]
    fn toeplitz_generators_of_identity() {
        let g = toeplitz_generators(&ToeplitzMatrix::<f64>::identity(3));
        assert_eq!(g.phi().column(0).into_inner(), vec![1.0, 0.0, 0.0]);
        assert_eq!(g.phi().column(1).into_inner(), vec![1.0, 0.0, 0.0]);
        assert_eq!(g.psi().row(0), &[0.0, 0.0, 1.0]);
        assert_eq!(g.psi().row(1), &[0.0, 0.0, 1.0]);
        let mut expect = DenseMatrix::zeros(3, 3);
        expect[(0, 2)] = 2.0;
        assert_eq!(g.product(), expect);
    }

    #[test]
    fn toeplitz_generators_scalar_case() {
        let t = ToeplitzMatrix::new(vec![3.5], vec![]).unwrap();
        let g = toeplitz_generators(&t);
        assert_eq!(g.phi(), &DenseMatrix::from_rows(&[vec![1.0, 3.5]]));
        assert_eq!(g.psi(), &DenseMatrix::from_rows(&[vec![3.5], vec![1.0]]));
        assert_eq!(g.product()[(0, 0)], 7.0);
        let r = verify_generators(&DisplacementOperator::toeplitz(), &t.to_dense(), &g).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn cauchy_examples() {
        let r = cauchy_generators(&v(&[2.0, 3.0]), &v(&[0.0, 1.0]))
            .unwrap()
            .materialize()
            .unwrap();
        assert_eq!(
            r,
            DenseMatrix::from_rows(&[vec![0.5, 1.0], vec![1.0 / 3.0, 0.5]])
        );
        let r = cauchy_generators(&v(&[1.0]), &v(&[0.0]))
            .unwrap()
            .materialize()
            .unwrap();
        assert_eq!(r, DenseMatrix::from_rows(&[vec![1.0]]));
        let r = cauchy_generators(&v(&[0.0, 1.0]), &v(&[2.0, 3.0]))
            .unwrap()
            .materialize()
            .unwrap();
        assert_eq!(
            r,
            DenseMatrix::from_rows(&[vec![-0.5, -1.0 / 3.0], vec![-1.0, -0.5]])
        );
        assert!(matches!(
            cauchy_generators(&v(&[1.0, 2.0]), &v(&[0.0, 1.0])),
            Err(DisplaceError::NodeCollision { row: 0, col: 1 })
        ));
    }

    #[test]
    fn verify_detects_corruption_and_guards_zero() {
        let t = ToeplitzMatrix::new(vec![4.0, 1.0, -2.0], vec![0.5, 3.0]).unwrap();
        let r = t.to_dense();
        let op = DisplacementOperator::toeplitz();
        let g = toeplitz_generators(&t);
        assert!(verify_generators(&op, &r, &g).unwrap() <= 3.0 * EPS);

        let bad = GeneratorPair::new(g.phi().scaled(2.0), g.psi().clone()).unwrap();
        let expect = g.product().norm_inf() / r.norm_inf();
        let got = verify_generators(&op, &r, &bad).unwrap();
        assert!((got - expect).abs() <= 1e-12 * expect);

        let z = DenseMatrix::<f64>::zeros(3, 3);
        let zg = GeneratorPair::new(DenseMatrix::zeros(3, 1), DenseMatrix::zeros(1, 3)).unwrap();
        assert_eq!(verify_generators(&op, &z, &zg).unwrap(), 0.0);
    }

    #[test]
    fn rescale_examples() {
        let g = toeplitz_generators(&ToeplitzMatrix::new(vec![2.0, 1.0], vec![-1.0]).unwrap());
        assert_eq!(generator_rescale(&g, &DenseMatrix::identity(2)).unwrap(), g);
        let g2 = generator_rescale(&g, &DenseMatrix::diag(&[2.0, 2.0])).unwrap();
        assert_eq!(g2.phi(), &g.phi().scaled(2.0));
        assert_eq!(g2.psi(), &g.psi().scaled(0.5));
        assert_eq!(g2.product(), g.product());
        let singular = DenseMatrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        assert!(matches!(
            generator_rescale(&g, &singular),
            Err(DisplaceError::SingularTransform(_))
        ));
    }

    #[test]
    fn generator_pair_shape_checks() {
        assert!(
            GeneratorPair::new(DenseMatrix::<f64>::zeros(3, 9), DenseMatrix::zeros(9, 3)).is_err()
        );
        assert!(
            GeneratorPair::new(DenseMatrix::<f64>::zeros(3, 2), DenseMatrix::zeros(2, 4)).is_err()
        );
        assert!(DisplacementOperator::<f64>::shift(1.0, 0.5).is_err());
    }
}
