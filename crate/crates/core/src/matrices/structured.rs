use num_complex::Complex64;

use super::dense::{DenseMatrix, Vector};
use super::fft::{dft_in_place, Sign};
use crate::error::{DisplaceError, Result};
use crate::scalar::Scalar;

/// Below this order the direct product beats the circulant embedding.
const FFT_MATVEC_CUTOFF: usize = 48;

/// Square Toeplitz matrix `T[i][j] = a_{i-j}` stored by its 2n-1 parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct ToeplitzMatrix<S: Scalar = f64> {
    /// `a_0, a_1, ..., a_{n-1}`: the first column.
    col: Vec<S>,
    /// `a_{-1}, ..., a_{-(n-1)}`: the first row to the right of the diagonal.
    row: Vec<S>,
}

impl<S: Scalar> ToeplitzMatrix<S> {
    /// `col` is the first column (`a_0..a_{n-1}`), `row` the first row right of the
    /// diagonal (`a_{-1}..a_{-(n-1)}`).
    pub fn new(col: Vec<S>, row: Vec<S>) -> Result<Self> {
        if col.is_empty() {
            return Err(DisplaceError::InvalidInput(
                "Toeplitz order must be >= 1".into(),
            ));
        }
        if row.len() + 1 != col.len() {
            return Err(DisplaceError::dims(format!(
                "Toeplitz of order {} needs {} row parameters, got {}",
                col.len(),
                col.len() - 1,
                row.len()
            )));
        }
        if col.iter().chain(&row).any(|v| !v.is_finite()) {
            return Err(DisplaceError::InvalidInput(
                "Toeplitz parameters must be finite".into(),
            ));
        }
        Ok(ToeplitzMatrix { col, row })
    }

    /// Symmetric Toeplitz from its first column.
    pub fn symmetric(col: Vec<S>) -> Result<Self> {
        let row = col.iter().skip(1).copied().collect();
        Self::new(col, row)
    }

    /// Builds from a function of the diagonal index `k = i - j`.
    pub fn from_diagonals(n: usize, mut a: impl FnMut(isize) -> S) -> Result<Self> {
        let col = (0..n as isize).map(&mut a).collect();
        let row = (1..n as isize).map(|k| a(-k)).collect();
        Self::new(col, row)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonals(n, |k| if k == 0 { S::one() } else { S::zero() })
            .expect("identity is a valid Toeplitz matrix")
    }

    pub fn n(&self) -> usize {
        self.col.len()
    }

    /// `a_k` for `-(n-1) <= k <= n-1`.
    #[inline]
    pub fn diag(&self, k: isize) -> S {
        if k >= 0 {
            self.col[k as usize]
        } else {
            self.row[(-k - 1) as usize]
        }
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> S {
        self.diag(i as isize - j as isize)
    }

    pub fn first_column(&self) -> &[S] {
        &self.col
    }

    pub fn first_row_tail(&self) -> &[S] {
        &self.row
    }

    pub fn is_symmetric(&self) -> bool {
        self.col.iter().skip(1).zip(&self.row).all(|(a, b)| a == b)
    }

    pub fn transpose(&self) -> Self {
        ToeplitzMatrix {
            col: self.reversed_col_from_row(),
            row: self.col[1..].to_vec(),
        }
    }

    fn reversed_col_from_row(&self) -> Vec<S> {
        std::iter::once(self.col[0])
            .chain(self.row.iter().copied())
            .collect()
    }

    pub fn map<T: Scalar>(&self, f: impl Fn(S) -> T) -> ToeplitzMatrix<T> {
        ToeplitzMatrix {
            col: self.col.iter().map(|&v| f(v)).collect(),
            row: self.row.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn scaled(&self, c: S) -> Self {
        self.map(|v| v * c)
    }

    /// Adds `sigma` to every diagonal entry.
    pub fn shifted(&self, sigma: S) -> Self {
        let mut out = self.clone();
        out.col[0] += sigma;
        out
    }

    /// Max row sum, computed from the parameters in O(n^2).
    pub fn norm_inf(&self) -> f64 {
        let n = self.n();
        (0..n)
            .map(|i| (0..n).map(|j| self.entry(i, j).abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn to_dense(&self) -> DenseMatrix<S> {
        let n = self.n();
        DenseMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    /// Direct O(n^2) product.
    pub fn matvec_direct(&self, x: &[S]) -> Result<Vector<S>> {
        self.check_len(x)?;
        let n = self.n();
        Ok(Vector::from_fn(n, |i| {
            (0..n).map(|j| self.entry(i, j) * x[j]).sum()
        }))
    }

    /// O(n log n) product through a circulant embedding of order `2n`.
    pub fn matvec_fft(&self, x: &[S]) -> Result<Vector<S>> {
        self.check_len(x)?;
        let n = self.n();
        let m = 2 * n;
        let mut c = vec![Complex64::new(0.0, 0.0); m];
        for (ck, &a) in c.iter_mut().zip(&self.col) {
            *ck = a.to_complex();
        }
        for k in 1..n {
            c[m - k] = self.row[k - 1].to_complex();
        }
        let mut v = vec![Complex64::new(0.0, 0.0); m];
        for (dst, &src) in v.iter_mut().zip(x) {
            *dst = src.to_complex();
        }
        dft_in_place(&mut c, Sign::Negative);
        dft_in_place(&mut v, Sign::Negative);
        for (vi, ci) in v.iter_mut().zip(&c) {
            *vi *= ci;
        }
        dft_in_place(&mut v, Sign::Positive);
        let inv = 1.0 / m as f64;
        Ok(Vector::from_fn(n, |i| S::from_complex(v[i] * inv)))
    }

    fn check_len(&self, x: &[S]) -> Result<()> {
        if x.len() != self.n() {
            return Err(DisplaceError::dims(format!(
                "Toeplitz of order {} times vector of length {}",
                self.n(),
                x.len()
            )));
        }
        Ok(())
    }
}

/// `T x`, switching to the circulant-embedding product for larger orders.
pub fn toeplitz_matvec<S: Scalar>(t: &ToeplitzMatrix<S>, x: &[S]) -> Result<Vector<S>> {
    if t.n() < FFT_MATVEC_CUTOFF {
        t.matvec_direct(x)
    } else {
        t.matvec_fft(x)
    }
}

/// Square Hankel matrix `H[i][j] = h_{i+j}`.
#[derive(Debug, Clone, PartialEq)]
pub struct HankelMatrix<S: Scalar = f64> {
    antidiagonals: Vec<S>,
}

impl<S: Scalar> HankelMatrix<S> {
    /// `antidiagonals` holds `h_0..h_{2n-2}`.
    pub fn new(antidiagonals: Vec<S>) -> Result<Self> {
        if antidiagonals.is_empty() || antidiagonals.len() % 2 == 0 {
            return Err(DisplaceError::dims(format!(
                "Hankel needs 2n-1 antidiagonal entries, got {}",
                antidiagonals.len()
            )));
        }
        if antidiagonals.iter().any(|v| !v.is_finite()) {
            return Err(DisplaceError::InvalidInput(
                "Hankel parameters must be finite".into(),
            ));
        }
        Ok(HankelMatrix { antidiagonals })
    }

    pub fn n(&self) -> usize {
        self.antidiagonals.len().div_ceil(2)
    }

    pub fn antidiagonals(&self) -> &[S] {
        &self.antidiagonals
    }

    #[inline]
    pub fn entry(&self, i: usize, j: usize) -> S {
        self.antidiagonals[i + j]
    }

    /// The Toeplitz matrix `J H` obtained by reversing the row order.
    pub fn row_reversed(&self) -> ToeplitzMatrix<S> {
        let n = self.n();
        let h = &self.antidiagonals;
        // (JH)[i][j] = h_{n-1-i+j}, so a_k = h_{n-1-k}.
        ToeplitzMatrix::from_diagonals(n, |k| h[(n as isize - 1 - k) as usize])
            .expect("row reversal of a valid Hankel matrix")
    }

    pub fn to_dense(&self) -> DenseMatrix<S> {
        let n = self.n();
        DenseMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }

    pub fn matvec(&self, x: &[S]) -> Result<Vector<S>> {
        let y = toeplitz_matvec(&self.row_reversed(), x)?;
        Ok(y.reversed())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn entry_indexing_follows_diagonal_offset() {
        let t = ToeplitzMatrix::new(vec![1.0, 2.0], vec![3.0]).unwrap();
        let d = t.to_dense();
        assert_eq!(d, DenseMatrix::from_rows(&[vec![1.0, 3.0], vec![2.0, 1.0]]));
        assert!(!t.is_symmetric());
        assert_eq!(t.transpose().to_dense(), d.transpose());
    }

    #[test]
    fn rejects_bad_parameter_counts() {
        assert!(ToeplitzMatrix::<f64>::new(vec![], vec![]).is_err());
        assert!(ToeplitzMatrix::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(HankelMatrix::new(vec![1.0, 2.0]).is_err());
    }

    #[test]
    fn matvec_examples() {
        let id = ToeplitzMatrix::<f64>::identity(2);
        assert_eq!(&*toeplitz_matvec(&id, &[5.0, 6.0]).unwrap(), &[5.0, 6.0]);

        let t = ToeplitzMatrix::new(vec![2.0, 1.0], vec![3.0]).unwrap();
        assert_eq!(&*t.matvec_direct(&[1.0, 1.0]).unwrap(), &[5.0, 3.0]);

        let ones = ToeplitzMatrix::from_diagonals(3, |_| 1.0).unwrap();
        assert_eq!(&*ones.matvec_direct(&[1.0; 3]).unwrap(), &[3.0; 3]);

        assert!(matches!(
            t.matvec_direct(&[1.0]),
            Err(DisplaceError::DimensionMismatch(_))
        ));
    }

    #[test]
    fn fft_matvec_matches_direct_on_small_case() {
        let t = ToeplitzMatrix::new(vec![2.0, 1.0, -0.5], vec![3.0, 0.25]).unwrap();
        let x = [1.0, -2.0, 0.5];
        let a = t.matvec_direct(&x).unwrap();
        let b = t.matvec_fft(&x).unwrap();
        for (u, v) in a.iter().zip(b.iter()) {
            assert!((u - v).abs() < 1e-14);
        }
    }

    #[test]
    fn hankel_materializes_and_reverses() {
        let h = HankelMatrix::new(vec![1.0, 2.0, 3.0]).unwrap();
        assert_eq!(
            h.to_dense(),
            DenseMatrix::from_rows(&[vec![1.0, 2.0], vec![2.0, 3.0]])
        );
        let t = h.row_reversed().to_dense();
        assert_eq!(t, DenseMatrix::from_rows(&[vec![2.0, 3.0], vec![1.0, 2.0]]));
        assert_eq!(&*h.matvec(&[1.0, 1.0]).unwrap(), &[3.0, 5.0]);
    }
}
