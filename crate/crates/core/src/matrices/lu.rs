use super::dense::{DenseMatrix, Vector};
use crate::error::{DisplaceError, Result};
use crate::scalar::{Scalar, EPS};

/// `P A = L U` from Gaussian elimination with partial pivoting.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseLu<S: Scalar = f64> {
    /// Row `k` of `P A` is row `perm[k]` of `A`.
    pub perm: Vec<usize>,
    pub l: DenseMatrix<S>,
    pub u: DenseMatrix<S>,
    /// Largest intermediate entry over largest initial entry.
    pub growth: f64,
}

/// Gaussian elimination with partial pivoting. Ties between equal-magnitude
/// candidates go to the lowest row index.
pub fn dense_lu_pp<S: Scalar>(a: &DenseMatrix<S>) -> Result<DenseLu<S>> {
    if !a.is_square() {
        return Err(DisplaceError::dims(format!(
            "LU needs a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    let n = a.rows();
    let tol = n as f64 * EPS * a.norm_inf();
    let initial_max = a.max_abs();
    let mut w = a.clone();
    let mut perm: Vec<usize> = (0..n).collect();
    let mut running_max = initial_max;

    for k in 0..n {
        let mut p = k;
        let mut best = w[(k, k)].abs();
        for i in k + 1..n {
            let m = w[(i, k)].abs();
            if m > best {
                best = m;
                p = i;
            }
        }
        if best <= tol {
            return Err(DisplaceError::SingularPivot {
                step: k,
                magnitude: best,
                tolerance: tol,
            });
        }
        if p != k {
            w.swap_rows(p, k);
            perm.swap(p, k);
        }
        let pivot = w[(k, k)];
        for i in k + 1..n {
            let m = w[(i, k)] / pivot;
            w[(i, k)] = m;
            if m == S::zero() {
                continue;
            }
            for j in k + 1..n {
                let ukj = w[(k, j)];
                let v = w[(i, j)] - m * ukj;
                w[(i, j)] = v;
                running_max = running_max.max(v.abs());
            }
        }
    }

    let l = DenseMatrix::from_fn(n, n, |i, j| match i.cmp(&j) {
        std::cmp::Ordering::Greater => w[(i, j)],
        std::cmp::Ordering::Equal => S::one(),
        std::cmp::Ordering::Less => S::zero(),
    });
    let u = DenseMatrix::from_fn(n, n, |i, j| if i <= j { w[(i, j)] } else { S::zero() });
    let growth = if initial_max > 0.0 {
        running_max / initial_max
    } else {
        1.0
    };
    Ok(DenseLu { perm, l, u, growth })
}

/// Solves `A x = b` by [`dense_lu_pp`] and substitution.
pub fn dense_solve<S: Scalar>(a: &DenseMatrix<S>, b: &[S]) -> Result<Vector<S>> {
    if b.len() != a.rows() {
        return Err(DisplaceError::dims(format!(
            "{}x{} system with right-hand side of length {}",
            a.rows(),
            a.cols(),
            b.len()
        )));
    }
    dense_lu_pp(a)?.solve(b)
}

impl<S: Scalar> DenseLu<S> {
    pub fn n(&self) -> usize {
        self.perm.len()
    }

    pub fn solve(&self, b: &[S]) -> Result<Vector<S>> {
        let n = self.n();
        if b.len() != n {
            return Err(DisplaceError::dims(format!(
                "LU of order {n}, rhs length {}",
                b.len()
            )));
        }
        let mut y: Vec<S> = self.perm.iter().map(|&p| b[p]).collect();
        forward_unit_lower(&self.l, &mut y);
        back_upper(&self.u, &mut y);
        Ok(y.into())
    }

    /// Solves `A^H x = b`.
    pub fn solve_adjoint(&self, b: &[S]) -> Result<Vector<S>> {
        let n = self.n();
        if b.len() != n {
            return Err(DisplaceError::dims(format!(
                "LU of order {n}, rhs length {}",
                b.len()
            )));
        }
        let mut y = b.to_vec();
        forward_upper_adjoint(&self.u, &mut y);
        back_unit_lower_adjoint(&self.l, &mut y);
        let mut x = vec![S::zero(); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        Ok(x.into())
    }

    pub fn inverse(&self) -> DenseMatrix<S> {
        let n = self.n();
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![S::zero(); n];
        for j in 0..n {
            e.iter_mut().for_each(|v| *v = S::zero());
            e[j] = S::one();
            let col = self.solve(&e).expect("dimension checked");
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
        }
        inv
    }

    /// `P^T L U`, i.e. the matrix that was factored.
    pub fn reconstruct(&self) -> DenseMatrix<S> {
        let lu = self.l.matmul(&self.u).expect("square factors");
        let n = self.n();
        let mut out = DenseMatrix::zeros(n, n);
        for (k, &p) in self.perm.iter().enumerate() {
            out.row_mut(p).copy_from_slice(lu.row(k));
        }
        out
    }
}

pub(crate) fn forward_unit_lower<S: Scalar>(l: &DenseMatrix<S>, y: &mut [S]) {
    for i in 0..y.len() {
        let s: S = l.row(i)[..i]
            .iter()
            .zip(&y[..i])
            .map(|(&a, &b)| a * b)
            .sum();
        y[i] -= s;
    }
}

pub(crate) fn back_upper<S: Scalar>(u: &DenseMatrix<S>, y: &mut [S]) {
    let n = y.len();
    for i in (0..n).rev() {
        let s: S = u.row(i)[i + 1..]
            .iter()
            .zip(&y[i + 1..])
            .map(|(&a, &b)| a * b)
            .sum();
        y[i] = (y[i] - s) / u[(i, i)];
    }
}

/// Solves `U^H y = b` in place (a lower-triangular solve).
pub(crate) fn forward_upper_adjoint<S: Scalar>(u: &DenseMatrix<S>, y: &mut [S]) {
    let n = y.len();
    for i in 0..n {
        let d = u[(i, i)].conj();
        y[i] /= d;
        let yi = y[i];
        for j in i + 1..n {
            y[j] -= u[(i, j)].conj() * yi;
        }
    }
}

/// Solves `L^H y = b` in place for unit lower `L`.
pub(crate) fn back_unit_lower_adjoint<S: Scalar>(l: &DenseMatrix<S>, y: &mut [S]) {
    let n = y.len();
    for i in (0..n).rev() {
        let yi = y[i];
        for j in 0..i {
            y[j] -= l[(i, j)].conj() * yi;
        }
    }
}
