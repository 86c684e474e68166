//! Structured Gaussian elimination with partial pivoting on Cauchy-type
//! matrices (the GKO algorithm).
//!
//! Only the generators `(Phi, Psi)` and the nodes are stored. At step `k` the
//! first column of the current Schur complement is recovered from the
//! generators, the largest entry is pivoted to the top (row interchanges keep
//! the diagonal displacement structure), the pivot row is recovered, and the
//! generators of the next Schur complement are formed in O(alpha n):
//!
//! ```text
//! Phi_i <- Phi_i - (y_i / d) Phi_k        (i > k)
//! Psi_j <- Psi_j - Psi_k (w_j / d)        (j > k)
//! ```
//!
//! where `y`, `w` are the recovered column and row and `d` is the pivot.
//! Optionally the active generators are first rescaled by an invertible
//! `alpha x alpha` transform (orthogonalization or a pivoted LU of `Phi`) to
//! limit generator growth.

use std::fmt;
use std::str::FromStr;

use crate::displacement::CauchyTypeSystem;
use crate::error::{DisplaceError, Result};
use crate::factorization::Factorization;
use crate::matrices::{
    back_unit_lower_adjoint, back_upper, forward_unit_lower, forward_upper_adjoint, DenseMatrix,
    Vector,
};
use crate::report::{residual_metrics, Method, SolveReport};
use crate::scalar::{Scalar, EPS};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GeneratorConditioning {
    /// Generators are updated as they come.
    Plain,
    /// Columns of `Phi` orthonormalized before every step (Gu).
    GuOrthogonal,
    /// `Phi` replaced by the unit-lower factor of its row-pivoted LU before
    /// every step (Stewart).
    StewartLU,
}

impl GeneratorConditioning {
    pub const ALL: [GeneratorConditioning; 3] = [
        GeneratorConditioning::Plain,
        GeneratorConditioning::GuOrthogonal,
        GeneratorConditioning::StewartLU,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            GeneratorConditioning::Plain => "plain",
            GeneratorConditioning::GuOrthogonal => "gu",
            GeneratorConditioning::StewartLU => "stewart",
        }
    }
}

impl fmt::Display for GeneratorConditioning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GeneratorConditioning {
    type Err = DisplaceError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "plain" => Ok(GeneratorConditioning::Plain),
            "gu" => Ok(GeneratorConditioning::GuOrthogonal),
            "stewart" => Ok(GeneratorConditioning::StewartLU),
            other => Err(DisplaceError::InvalidInput(format!(
                "unknown pivot variant '{other}' (expected plain, gu or stewart)"
            ))),
        }
    }
}

/// One elimination step.
#[derive(Debug, Clone, PartialEq)]
pub struct PivotStep {
    /// Original row index chosen as pivot.
    pub row: usize,
    /// `||Phi^(k)||_inf` and `||Psi^(k)||_inf` of the active generators, after conditioning.
    pub phi_norm: f64,
    pub psi_norm: f64,
    /// `||Phi^(k)||_F ||Psi^(k)||_F / ||Phi^(k) Psi^(k)||_F`.
    pub cancellation: f64,
    /// Rows (original indices) chosen by the Stewart generator LU, in order.
    pub generator_pivots: Vec<usize>,
}

/// `P R = L U` for a Cauchy-type `R`.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredLUFactors<S: Scalar = f64> {
    /// Row `k` of `P R` is row `perm[k]` of `R`.
    pub perm: Vec<usize>,
    pub l: DenseMatrix<S>,
    pub u: DenseMatrix<S>,
    /// Largest per-step generator cancellation ratio; 1 means no cancellation.
    pub growth: f64,
    /// `max_k ||Phi^(k)|| ||Psi^(k)|| / (||Phi^(1)|| ||Psi^(1)||)`.
    pub norm_growth: f64,
    pub pivot_log: Vec<PivotStep>,
    pub conditioning: GeneratorConditioning,
}

impl<S: Scalar> StructuredLUFactors<S> {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    /// `P^T L U`.
    pub fn reconstruct(&self) -> DenseMatrix<S> {
        let lu = self.l.matmul(&self.u).expect("square factors");
        let mut out = DenseMatrix::zeros(self.n(), self.n());
        for (k, &p) in self.perm.iter().enumerate() {
            out.row_mut(p).copy_from_slice(lu.row(k));
        }
        out
    }

    /// `||P R - L U||_inf / ||R||_inf` against a dense reference.
    pub fn factor_residual(&self, r: &DenseMatrix<S>) -> f64 {
        let diff = self.reconstruct().sub(r).expect("same order");
        diff.norm_inf() / r.norm_inf()
    }
}

impl<S: Scalar> Factorization<S> for StructuredLUFactors<S> {
    fn order(&self) -> usize {
        self.n()
    }

    fn solve(&self, b: &[S]) -> Result<Vector<S>> {
        if b.len() != self.n() {
            return Err(DisplaceError::dims(format!(
                "factorization of order {}, rhs length {}",
                self.n(),
                b.len()
            )));
        }
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        forward_unit_lower(&self.l, &mut y);
        back_upper(&self.u, &mut y);
        Ok(y.into())
    }

    fn solve_adjoint(&self, b: &[S]) -> Result<Vector<S>> {
        if b.len() != self.n() {
            return Err(DisplaceError::dims(format!(
                "factorization of order {}, rhs length {}",
                self.n(),
                b.len()
            )));
        }
        let mut y = b.to_vec();
        forward_upper_adjoint(&self.u, &mut y);
        back_unit_lower_adjoint(&self.l, &mut y);
        let mut x = vec![S::zero(); self.n()];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x.into())
    }
}

/// Column `j` of the Cauchy-type matrix restricted to the rows in `active`.
pub fn recover_column<S: Scalar>(
    sys: &CauchyTypeSystem<S>,
    j: usize,
    active: &[usize],
) -> Result<Vector<S>> {
    let n = sys.n();
    if j >= n {
        return Err(DisplaceError::dims(format!(
            "column {j} of an order-{n} system"
        )));
    }
    if let Some(&i) = active.iter().find(|&&i| i >= n) {
        return Err(DisplaceError::dims(format!(
            "row {i} of an order-{n} system"
        )));
    }
    let (t, s) = (sys.t(), sys.s());
    let mut out = Vec::with_capacity(active.len());
    for &i in active {
        let gap = t[i] - s[j];
        if gap == S::zero() {
            return Err(DisplaceError::NodeCollision { row: i, col: j });
        }
        out.push(sys.generators().entry(i, j) / gap);
    }
    Ok(out.into())
}

/// Signature of the test-only generator corruption hook: `(step, active Phi
/// rows, active Psi columns)`, both `alpha`-strided.
type Hook<'a, S> = &'a dyn Fn(usize, &mut [S], &mut [S]);

pub fn gko_factor<S: Scalar>(
    sys: &CauchyTypeSystem<S>,
    cond: GeneratorConditioning,
) -> Result<StructuredLUFactors<S>> {
    factor_impl(sys, cond, None)
}

/// Corrupts the generator update so that the fast path produces a wrong
/// factorization. Only for exercising fallback logic.
#[cfg(any(test, feature = "fault-injection"))]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FaultInjection {
    /// Step after whose generator update the corruption is applied.
    pub step: usize,
    /// Added to every active `Phi` entry, relative to `||Phi||_inf`.
    pub magnitude: f64,
}

#[cfg(any(test, feature = "fault-injection"))]
impl FaultInjection {
    pub(crate) fn apply<S: Scalar>(&self, step: usize, phi: &mut [S], alpha: usize) {
        if step != self.step {
            return;
        }
        let scale = phi
            .chunks(alpha)
            .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
            .fold(0.0, f64::max)
            .max(1.0);
        for (i, v) in phi.iter_mut().enumerate() {
            let sign = if i % 3 == 0 { -1.0 } else { 1.0 };
            *v += S::from_f64(sign * self.magnitude * scale);
        }
    }
}

#[cfg(any(test, feature = "fault-injection"))]
pub fn gko_factor_with_fault<S: Scalar>(
    sys: &CauchyTypeSystem<S>,
    cond: GeneratorConditioning,
    fault: FaultInjection,
) -> Result<StructuredLUFactors<S>> {
    let alpha = sys.generators().alpha();
    let hook = move |step: usize, phi: &mut [S], _psi: &mut [S]| fault.apply(step, phi, alpha);
    factor_impl(sys, cond, Some(&hook))
}

struct Work<S> {
    alpha: usize,
    /// Row `i` of `Phi` at `phi[i * alpha..]`, rows kept in pivoted order.
    phi: Vec<S>,
    /// Column `j` of `Psi` at `psi[j * alpha..]`.
    psi: Vec<S>,
    t: Vec<S>,
    s: Vec<S>,
}

impl<S: Scalar> Work<S> {
    #[inline]
    fn phi_row(&self, i: usize) -> &[S] {
        &self.phi[i * self.alpha..(i + 1) * self.alpha]
    }

    #[inline]
    fn psi_col(&self, j: usize) -> &[S] {
        &self.psi[j * self.alpha..(j + 1) * self.alpha]
    }

    #[inline]
    fn entry(&self, i: usize, j: usize) -> S {
        dot(self.phi_row(i), self.psi_col(j)) / (self.t[i] - self.s[j])
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a == b {
            return;
        }
        for c in 0..self.alpha {
            self.phi.swap(a * self.alpha + c, b * self.alpha + c);
        }
        self.t.swap(a, b);
    }
}

#[inline]
fn dot<S: Scalar>(a: &[S], b: &[S]) -> S {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

fn factor_impl<S: Scalar>(
    sys: &CauchyTypeSystem<S>,
    cond: GeneratorConditioning,
    hook: Option<Hook<'_, S>>,
) -> Result<StructuredLUFactors<S>> {
    let n = sys.n();
    let gen = sys.generators();
    let alpha = gen.alpha();
    let mut w = Work {
        alpha,
        phi: (0..n)
            .flat_map(|i| (0..alpha).map(move |c| (i, c)))
            .map(|(i, c)| gen.phi()[(i, c)])
            .collect(),
        psi: (0..n)
            .flat_map(|j| (0..alpha).map(move |c| (j, c)))
            .map(|(j, c)| gen.psi()[(c, j)])
            .collect(),
        t: sys.t().to_vec(),
        s: sys.s().to_vec(),
    };
    let mut perm: Vec<usize> = (0..n).collect();
    let mut l = DenseMatrix::identity(n);
    let mut u = DenseMatrix::zeros(n, n);
    let mut pivot_log = Vec::with_capacity(n);
    let mut growth = 1.0_f64;
    let mut norm_growth = 1.0_f64;
    let mut first_norm_product = 0.0;
    let mut tol = 0.0;
    let mut col = vec![S::zero(); n];

    for k in 0..n {
        let generator_pivots = {
            let (phi, psi) = (&mut w.phi[k * alpha..], &mut w.psi[k * alpha..]);
            let local = match cond {
                GeneratorConditioning::Plain => Vec::new(),
                GeneratorConditioning::GuOrthogonal => {
                    gu_orthogonalize(phi, psi, alpha);
                    Vec::new()
                }
                GeneratorConditioning::StewartLU => stewart_lu(phi, psi, alpha),
            };
            local.into_iter().map(|r| perm[k + r]).collect()
        };

        let (phi_norm, psi_norm) = active_norms(&w.phi[k * alpha..], &w.psi[k * alpha..], alpha);
        let cancellation = cancellation_ratio(&w.phi[k * alpha..], &w.psi[k * alpha..], alpha);
        if k == 0 {
            first_norm_product = phi_norm * psi_norm;
        } else if first_norm_product > 0.0 {
            norm_growth = norm_growth.max(phi_norm * psi_norm / first_norm_product);
        }
        growth = growth.max(cancellation);

        // Recover the first column of the Schur complement and pick the pivot.
        let mut p = k;
        let mut best = -1.0;
        for (i, slot) in col.iter_mut().enumerate().skip(k) {
            let v = w.entry(i, k);
            *slot = v;
            let m = v.abs();
            if m > best {
                best = m;
                p = i;
            }
        }
        if k == 0 {
            tol = n as f64 * EPS * best;
        }
        if !(best > tol) {
            return Err(DisplaceError::SingularPivot {
                step: k,
                magnitude: best,
                tolerance: tol,
            });
        }
        if p != k {
            w.swap_rows(p, k);
            col.swap(p, k);
            perm.swap(p, k);
            for c in 0..k {
                let tmp = l[(p, c)];
                l[(p, c)] = l[(k, c)];
                l[(k, c)] = tmp;
            }
        }
        pivot_log.push(PivotStep {
            row: perm[k],
            phi_norm,
            psi_norm,
            cancellation,
            generator_pivots,
        });

        let d = col[k];
        u[(k, k)] = d;
        for j in k + 1..n {
            u[(k, j)] = w.entry(k, j);
        }
        for i in k + 1..n {
            l[(i, k)] = col[i] / d;
        }

        // Schur complement generators.
        let phi_k: Vec<S> = w.phi_row(k).to_vec();
        for i in k + 1..n {
            let m = l[(i, k)];
            for (dst, &src) in w.phi[i * alpha..(i + 1) * alpha].iter_mut().zip(&phi_k) {
                *dst -= m * src;
            }
        }
        let psi_k: Vec<S> = w.psi_col(k).to_vec();
        for j in k + 1..n {
            let m = u[(k, j)] / d;
            for (dst, &src) in w.psi[j * alpha..(j + 1) * alpha].iter_mut().zip(&psi_k) {
                *dst -= src * m;
            }
        }
        if let Some(h) = hook {
            let (phi, psi) = (&mut w.phi[(k + 1) * alpha..], &mut w.psi[(k + 1) * alpha..]);
            h(k, phi, psi);
        }
    }

    Ok(StructuredLUFactors {
        perm,
        l,
        u,
        growth,
        norm_growth,
        pivot_log,
        conditioning: cond,
    })
}

fn active_norms<S: Scalar>(phi: &[S], psi: &[S], alpha: usize) -> (f64, f64) {
    let phi_norm = phi
        .chunks(alpha)
        .map(|r| r.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max);
    let mut psi_rows = vec![0.0; alpha];
    for c in psi.chunks(alpha) {
        for (acc, v) in psi_rows.iter_mut().zip(c) {
            *acc += v.abs();
        }
    }
    (phi_norm, psi_rows.into_iter().fold(0.0, f64::max))
}

/// `||Phi||_F ||Psi||_F / ||Phi Psi||_F` via the `alpha x alpha` Gram matrices,
/// using `||Phi Psi||_F^2 = tr(Phi^H Phi Psi Psi^H)`. Exactly 1 when `alpha = 1`.
fn cancellation_ratio<S: Scalar>(phi: &[S], psi: &[S], alpha: usize) -> f64 {
    let gram = |m: &[S], conj_left: bool| {
        let mut g = vec![S::zero(); alpha * alpha];
        for r in m.chunks(alpha) {
            for a in 0..alpha {
                for b in 0..alpha {
                    g[a * alpha + b] += if conj_left {
                        r[a].conj() * r[b]
                    } else {
                        r[a] * r[b].conj()
                    };
                }
            }
        }
        g
    };
    let gp = gram(phi, true);
    let gq = gram(psi, false);
    let trace = |g: &[S]| (0..alpha).map(|a| g[a * alpha + a].re()).sum::<f64>();
    let cross: f64 = (0..alpha)
        .flat_map(|a| (0..alpha).map(move |b| (a, b)))
        .map(|(a, b)| (gp[a * alpha + b] * gq[b * alpha + a]).re())
        .sum();
    if cross <= 0.0 {
        return 1.0;
    }
    ((trace(&gp) * trace(&gq)) / cross).sqrt().max(1.0)
}

/// Replaces the active `Phi` by `Q` and `Psi` by `R Psi`, where `Phi = Q R` by
/// modified Gram-Schmidt with one reorthogonalization pass. Numerically
/// dependent columns are kept unnormalized with a unit diagonal in `R`, so the
/// product `Phi Psi` is preserved exactly in exact arithmetic.
fn gu_orthogonalize<S: Scalar>(phi: &mut [S], psi: &mut [S], alpha: usize) {
    let m = phi.len() / alpha;
    let mut q: Vec<Vec<S>> = Vec::with_capacity(alpha);
    let mut r = vec![S::zero(); alpha * alpha];
    for c in 0..alpha {
        let mut v: Vec<S> = (0..m).map(|i| phi[i * alpha + c]).collect();
        let orig = v.iter().map(|x| x.abs_sqr()).sum::<f64>().sqrt();
        for _pass in 0..2 {
            for (p, qp) in q.iter().enumerate() {
                let h: S = qp.iter().zip(&v).map(|(&a, &b)| a.conj() * b).sum();
                for (vi, &qi) in v.iter_mut().zip(qp) {
                    *vi -= h * qi;
                }
                r[p * alpha + c] += h;
            }
        }
        let nrm = v.iter().map(|x| x.abs_sqr()).sum::<f64>().sqrt();
        if nrm > EPS * orig && nrm > 0.0 {
            let inv = 1.0 / nrm;
            v.iter_mut().for_each(|x| *x = x.scale(inv));
            r[c * alpha + c] = S::from_f64(nrm);
        } else {
            r[c * alpha + c] = S::one();
        }
        q.push(v);
    }
    for i in 0..m {
        for c in 0..alpha {
            phi[i * alpha + c] = q[c][i];
        }
    }
    apply_upper(psi, &r, alpha);
}

/// Replaces the active `Phi` by the unit-lower factor of its row-pivoted LU and
/// `Psi` by `U Psi`. Returns the chosen pivot rows (local indices).
fn stewart_lu<S: Scalar>(phi: &mut [S], psi: &mut [S], alpha: usize) -> Vec<usize> {
    let m = phi.len() / alpha;
    let mut work = phi.to_vec();
    let mut lower = vec![S::zero(); phi.len()];
    let mut upper = vec![S::zero(); alpha * alpha];
    let mut used = vec![false; m];
    let mut pivots = Vec::with_capacity(alpha);
    for c in 0..alpha {
        let col_scale = (0..m).map(|i| phi[i * alpha + c].abs()).fold(0.0, f64::max);
        let mut p = usize::MAX;
        let mut best = 0.0;
        for i in (0..m).filter(|&i| !used[i]) {
            let v = work[i * alpha + c].abs();
            if v > best {
                best = v;
                p = i;
            }
        }
        if p == usize::MAX || best <= EPS * col_scale {
            // Dependent column: carry the remainder as-is.
            for i in (0..m).filter(|&i| !used[i]) {
                lower[i * alpha + c] = work[i * alpha + c];
            }
            upper[c * alpha + c] = S::one();
            continue;
        }
        used[p] = true;
        pivots.push(p);
        let piv = work[p * alpha + c];
        for cc in c..alpha {
            upper[c * alpha + cc] = work[p * alpha + cc];
        }
        lower[p * alpha + c] = S::one();
        for i in 0..m {
            if used[i] {
                continue;
            }
            let f = work[i * alpha + c] / piv;
            lower[i * alpha + c] = f;
            for cc in c + 1..alpha {
                let ucc = upper[c * alpha + cc];
                work[i * alpha + cc] -= f * ucc;
            }
        }
    }
    phi.copy_from_slice(&lower);
    apply_upper(psi, &upper, alpha);
    pivots
}

/// `psi_j <- U psi_j` for every column, `U` upper triangular `alpha x alpha`.
fn apply_upper<S: Scalar>(psi: &mut [S], upper: &[S], alpha: usize) {
    let mut tmp = vec![S::zero(); alpha];
    for col in psi.chunks_mut(alpha) {
        for a in 0..alpha {
            tmp[a] = (a..alpha).map(|b| upper[a * alpha + b] * col[b]).sum();
        }
        col.copy_from_slice(&tmp);
    }
}

/// Solves `R x = b` for a Cauchy-type `R` through [`gko_factor`].
pub fn gko_solve<S: Scalar>(
    sys: &CauchyTypeSystem<S>,
    b: &[S],
    cond: GeneratorConditioning,
) -> Result<(Vector<S>, SolveReport<S>)> {
    if b.len() != sys.n() {
        return Err(DisplaceError::dims(format!(
            "system of order {}, rhs length {}",
            sys.n(),
            b.len()
        )));
    }
    let f = gko_factor(sys, cond)?;
    let x = f.solve(b)?;
    let ax = sys.matvec(&x)?;
    let r: Vec<S> = ax.iter().zip(b).map(|(&a, &bb)| a - bb).collect();
    let norm_a = sys.norm_inf();
    let res = residual_metrics(&r, norm_a, &x, b);
    let kappa = f.kappa_inf_estimate(norm_a)?;
    let report = SolveReport::direct(Method::Gko(cond), x.clone(), res, norm_a, kappa, f.growth);
    Ok((x, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::displacement::{cauchy_generators, GeneratorPair};
    use crate::matrices::{dense_lu_pp, Materialize};

    fn v(x: &[f64]) -> Vector {
        Vector::from(x.to_vec())
    }

    fn two_by_two() -> CauchyTypeSystem {
        cauchy_generators(&v(&[2.0, 3.0]), &v(&[0.0, 1.0])).unwrap()
    }

    #[test]
    fn recover_column_examples() {
        let sys = two_by_two();
        let c = recover_column(&sys, 0, &[0, 1]).unwrap();
        assert_eq!(c.into_inner(), vec![0.5, 1.0 / 3.0]);
        assert!(recover_column(&sys, 2, &[0]).is_err());

        let gen = GeneratorPair::new(
            DenseMatrix::from_rows(&[vec![1.0], vec![2.0]]),
            DenseMatrix::from_rows(&[vec![0.0, 3.0]]),
        )
        .unwrap();
        let sys = CauchyTypeSystem::new(v(&[2.0, 3.0]), v(&[0.0, 1.0]), gen).unwrap();
        assert_eq!(
            recover_column(&sys, 0, &[0, 1]).unwrap().into_inner(),
            vec![0.0, 0.0]
        );
    }

    #[test]
    fn scalar_system() {
        let gen = GeneratorPair::new(
            DenseMatrix::from_rows(&[vec![3.0]]),
            DenseMatrix::from_rows(&[vec![2.0]]),
        )
        .unwrap();
        let sys = CauchyTypeSystem::new(v(&[1.0]), v(&[0.0]), gen).unwrap();
        for cond in GeneratorConditioning::ALL {
            let f = gko_factor(&sys, cond).unwrap();
            assert_eq!(f.perm, vec![0]);
            assert_eq!(f.l, DenseMatrix::identity(1));
            assert!((f.u[(0, 0)] - 6.0).abs() < 1e-15);
            assert_eq!(f.growth, 1.0);
            let (x, _) = gko_solve(&sys, &[42.0], cond).unwrap();
            assert!((x[0] - 7.0).abs() < 1e-15);
        }
    }

    #[test]
    fn hand_eliminated_two_by_two() {
        let f = gko_factor(&two_by_two(), GeneratorConditioning::Plain).unwrap();
        assert_eq!(f.perm, vec![0, 1]);
        assert!((f.u[(0, 0)] - 0.5).abs() < 1e-16);
        assert!((f.u[(0, 1)] - 1.0).abs() < 1e-16);
        assert!((f.u[(1, 1)] + 1.0 / 6.0).abs() < 1e-15);
        assert!((f.l[(1, 0)] - 2.0 / 3.0).abs() < 1e-15);

        let (x, rep) = gko_solve(
            &two_by_two(),
            &[1.5, 5.0 / 6.0],
            GeneratorConditioning::Plain,
        )
        .unwrap();
        assert!((x[0] - 1.0).abs() < 1e-14 && (x[1] - 1.0).abs() < 1e-14);
        assert!(rep.normalized_residual < 1e-15);
    }

    #[test]
    fn schur_complement_generators_match_dense() {
        // Non-trivial alpha = 2 system; every variant must reproduce dense GEPP pivots.
        let t = v(&[0.3, 1.7, -0.9, 2.4, 0.1]);
        let s = v(&[-1.1, 0.75, 3.2, -2.5, 1.3]);
        let gen = GeneratorPair::new(
            DenseMatrix::from_fn(5, 2, |i, j| ((i * 7 + j * 3) % 5) as f64 - 1.5),
            DenseMatrix::from_fn(2, 5, |i, j| ((i * 2 + j * 5) % 7) as f64 * 0.5 - 1.0),
        )
        .unwrap();
        let sys = CauchyTypeSystem::new(t, s, gen).unwrap();
        let r = sys.materialize().unwrap();
        let dense = dense_lu_pp(&r).unwrap();
        for cond in GeneratorConditioning::ALL {
            let f = gko_factor(&sys, cond).unwrap();
            assert_eq!(f.perm, dense.perm, "{cond}");
            assert!(
                f.factor_residual(&r) < 1e-13,
                "{cond}: {}",
                f.factor_residual(&r)
            );
            assert!(f.l.sub(&dense.l).unwrap().max_abs() < 1e-12);
        }
    }

    #[test]
    fn singular_system_is_reported() {
        // Rank-one Cauchy-type matrix: Phi Psi entries chosen so R has a zero Schur complement.
        let gen = GeneratorPair::new(
            DenseMatrix::from_rows(&[vec![1.0], vec![1.0]]),
            DenseMatrix::from_rows(&[vec![1.0, 1.0]]),
        )
        .unwrap();
        let t = v(&[1.0, 1.0]);
        let sys = CauchyTypeSystem::new(t, v(&[0.0, 0.5]), gen).unwrap();
        assert!(matches!(
            gko_factor(&sys, GeneratorConditioning::Plain),
            Err(DisplaceError::SingularPivot { step: 1, .. })
        ));
    }

    #[test]
    fn fault_injection_corrupts_factorization() {
        let sys = cauchy_generators(&v(&[2.0, 3.0, 5.0, 7.0]), &v(&[0.0, 1.0, 4.0, 6.5])).unwrap();
        let r = sys.materialize().unwrap();
        let fault = FaultInjection {
            step: 0,
            magnitude: 10.0,
        };
        if let Ok(f) = gko_factor_with_fault(&sys, GeneratorConditioning::Plain, fault) {
            assert!(f.factor_residual(&r) > 1e-3);
        }
    }

    #[test]
    fn conditioning_parses() {
        assert_eq!(
            "gu".parse::<GeneratorConditioning>().unwrap(),
            GeneratorConditioning::GuOrthogonal
        );
        assert!("householder".parse::<GeneratorConditioning>().is_err());
    }
}
