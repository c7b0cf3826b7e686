use std::ops::{Index, IndexMut};

use crate::error::{Error, Result};
use crate::scalar::{Real, C};

/// Dense row-major complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct CMat<T> {
    rows: usize,
    cols: usize,
    data: Vec<C<T>>,
}

impl<T: Real> CMat<T> {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        CMat {
            rows,
            cols,
            data: vec![C::new(T::zero(), T::zero()); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = C::new(T::one(), T::zero());
        }
        m
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> C<T>) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        CMat { rows, cols, data }
    }

    pub fn from_vec(rows: usize, cols: usize, data: Vec<C<T>>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::Dimension(format!(
                "{} entries for a {rows}×{cols} matrix",
                data.len()
            )));
        }
        Ok(CMat { rows, cols, data })
    }

    pub fn diagonal(diag: &[C<T>]) -> Self {
        let n = diag.len();
        let mut m = Self::zeros(n, n);
        for (i, d) in diag.iter().enumerate() {
            m[(i, i)] = *d;
        }
        m
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Side length; panics on non-square matrices.
    #[inline]
    pub fn dim(&self) -> usize {
        assert_eq!(self.rows, self.cols, "dim() on a non-square matrix");
        self.rows
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    #[inline]
    pub fn as_slice(&self) -> &[C<T>] {
        &self.data
    }

    #[inline]
    pub fn as_mut_slice(&mut self) -> &mut [C<T>] {
        &mut self.data
    }

    pub fn row(&self, i: usize) -> &[C<T>] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn matmul(&self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!(self.cols, rhs.rows, "matmul shape mismatch");
        let mut out = CMat::zeros(self.rows, rhs.cols);
        T::gemm(self.rows, self.cols, rhs.cols, &self.data, &rhs.data, &mut out.data);
        out
    }

    /// Conjugate transpose.
    pub fn adjoint(&self) -> CMat<T> {
        let mut out = CMat::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                out.data[j * self.rows + i] = self.data[i * self.cols + j].conj();
            }
        }
        out
    }

    pub fn conj(&self) -> CMat<T> {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z.conj()).collect(),
        }
    }

    pub fn sub(&self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a - b).collect(),
        }
    }

    pub fn add(&self, rhs: &CMat<T>) -> CMat<T> {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&rhs.data).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn scale(&self, s: C<T>) -> CMat<T> {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().map(|z| z * s).collect(),
        }
    }

    /// `self − I`.
    pub fn minus_identity(&self) -> CMat<T> {
        let mut out = self.clone();
        let n = self.rows.min(self.cols);
        for i in 0..n {
            out[(i, i)] = out[(i, i)] - C::new(T::one(), T::zero());
        }
        out
    }

    /// `self · diag(d)`: scales column `j` by `d[j]`.
    pub fn scale_columns(&self, d: &[C<T>]) -> CMat<T> {
        assert_eq!(d.len(), self.cols);
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.cols) {
            for (z, s) in row.iter_mut().zip(d) {
                *z = *z * *s;
            }
        }
        out
    }

    /// Kronecker product with row-major (i, j) ↦ i·n + j indexing.
    pub fn kron(&self, rhs: &CMat<T>) -> CMat<T> {
        let (r1, c1, r2, c2) = (self.rows, self.cols, rhs.rows, rhs.cols);
        let mut out = CMat::zeros(r1 * r2, c1 * c2);
        for i in 0..r1 {
            for k in 0..c1 {
                let a = self.data[i * c1 + k];
                for j in 0..r2 {
                    let orow = (i * r2 + j) * (c1 * c2);
                    for l in 0..c2 {
                        out.data[orow + k * c2 + l] = a * rhs.data[j * c2 + l];
                    }
                }
            }
        }
        out
    }

    /// Block-diagonal direct sum.
    pub fn direct_sum(parts: &[&CMat<T>]) -> CMat<T> {
        let rows: usize = parts.iter().map(|m| m.rows).sum();
        let cols: usize = parts.iter().map(|m| m.cols).sum();
        let mut out = CMat::zeros(rows, cols);
        let (mut r0, mut c0) = (0, 0);
        for m in parts {
            for i in 0..m.rows {
                for j in 0..m.cols {
                    out[(r0 + i, c0 + j)] = m[(i, j)];
                }
            }
            r0 += m.rows;
            c0 += m.cols;
        }
        out
    }

    /// Copy of the sub-block starting at `(r0, c0)`.
    pub fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> CMat<T> {
        CMat::from_fn(rows, cols, |i, j| self[(r0 + i, c0 + j)])
    }

    /// Matrix–vector product.
    pub fn apply(&self, x: &[C<T>], y: &mut [C<T>]) {
        assert_eq!(x.len(), self.cols);
        assert_eq!(y.len(), self.rows);
        for (i, yi) in y.iter_mut().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            let mut acc = C::new(T::zero(), T::zero());
            for (a, b) in row.iter().zip(x) {
                acc = acc + a * b;
            }
            *yi = acc;
        }
    }

    /// `y = self† x` without forming the adjoint.
    pub fn apply_adjoint(&self, x: &[C<T>], y: &mut [C<T>]) {
        assert_eq!(x.len(), self.rows);
        assert_eq!(y.len(), self.cols);
        for yi in y.iter_mut() {
            *yi = C::new(T::zero(), T::zero());
        }
        for (i, xi) in x.iter().enumerate() {
            let row = &self.data[i * self.cols..(i + 1) * self.cols];
            for (yj, a) in y.iter_mut().zip(row) {
                *yj = *yj + a.conj() * xi;
            }
        }
    }

    pub fn max_abs_diff(&self, rhs: &CMat<T>) -> T {
        assert_eq!((self.rows, self.cols), (rhs.rows, rhs.cols));
        self.data
            .iter()
            .zip(&rhs.data)
            .map(|(a, b)| (a - b).norm())
            .fold(T::zero(), T::max)
    }

    pub fn frobenius(&self) -> T {
        self.data.iter().map(|z| z.norm_sqr()).sum::<T>().sqrt()
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|z| z.re.is_finite() && z.im.is_finite())
    }

    /// Exact comparison against the identity.
    pub fn is_identity(&self) -> bool {
        self.rows == self.cols
            && self.data.iter().enumerate().all(|(k, z)| {
                let one = if k / self.cols == k % self.cols { T::one() } else { T::zero() };
                z.re == one && z.im == T::zero()
            })
    }

    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|z| z.re == T::zero() && z.im == T::zero())
    }

    /// Entrywise conversion to another scalar type.
    pub fn cast<U: Real>(&self) -> CMat<U> {
        CMat {
            rows: self.rows,
            cols: self.cols,
            data: self
                .data
                .iter()
                .map(|z| C::new(U::lit(z.re.to_f64_lossy()), U::lit(z.im.to_f64_lossy())))
                .collect(),
        }
    }
}

impl<T> Index<(usize, usize)> for CMat<T> {
    type Output = C<T>;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &C<T> {
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for CMat<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut C<T> {
        &mut self.data[i * self.cols + j]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C<f64> {
        C::new(re, im)
    }

    #[test]
    fn adjoint_and_apply_agree() {
        let m = CMat::from_fn(3, 2, |i, j| c(i as f64 + 1.0, j as f64 - 0.5));
        let x = [c(1.0, 2.0), c(-1.0, 0.5), c(0.0, 1.0)];
        let mut y1 = [c(0.0, 0.0); 2];
        let mut y2 = [c(0.0, 0.0); 2];
        m.apply_adjoint(&x, &mut y1);
        m.adjoint().apply(&x, &mut y2);
        for (a, b) in y1.iter().zip(&y2) {
            assert!((a - b).norm() < 1e-14);
        }
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let k = CMat::<f64>::identity(2).kron(&CMat::identity(3));
        assert_eq!(k, CMat::identity(6));
    }

    #[test]
    fn kron_mixed_product() {
        let a = CMat::from_fn(2, 2, |i, j| c((i + 2 * j) as f64, 1.0));
        let b = CMat::from_fn(2, 2, |i, j| c(1.0, (i * j) as f64));
        let lhs = a.kron(&b).matmul(&b.kron(&a));
        let rhs = a.matmul(&b).kron(&b.matmul(&a));
        assert!(lhs.max_abs_diff(&rhs) < 1e-12);
    }

    #[test]
    fn direct_sum_layout() {
        let a = CMat::diagonal(&[c(1.0, 0.0)]);
        let b = CMat::from_fn(2, 2, |i, j| c((i * 2 + j) as f64, 0.0));
        let s = CMat::direct_sum(&[&a, &b]);
        assert_eq!(s.dim(), 3);
        assert_eq!(s[(0, 0)], c(1.0, 0.0));
        assert_eq!(s[(2, 1)], c(2.0, 0.0));
        assert_eq!(s[(0, 2)], c(0.0, 0.0));
    }
}
