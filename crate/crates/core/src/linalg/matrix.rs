//! Dense row-major matrices with the handful of factorizations the library needs.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::Scalar;

/// Largest ambient dimension accepted for maps and cocycles.
pub const MAX_DIM: usize = 8;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix<T> {
    rows: usize,
    cols: usize,
    data: Vec<T>,
}

impl<T: fmt::Debug> fmt::Debug for Matrix<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for i in 0..self.rows {
            write!(f, "  ")?;
            for j in 0..self.cols {
                write!(f, "{:?} ", self.data[i * self.cols + j])?;
            }
            writeln!(f)?;
        }
        write!(f, "]")
    }
}

impl<T: Scalar> Matrix<T> {
    pub fn new(rows: usize, cols: usize, data: Vec<T>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, found: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![T::zero(); rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = T::one();
        }
        m
    }

    pub fn diag(values: &[T]) -> Self {
        let n = values.len();
        let mut m = Self::zeros(n, n);
        for (i, &v) in values.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    /// Builds a matrix from row slices; all rows must have equal length.
    pub fn from_rows<R: AsRef<[T]>>(rows: &[R]) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.as_ref().len()).unwrap_or(0);
        let mut data = Vec::with_capacity(r * c);
        for row in rows {
            let row = row.as_ref();
            if row.len() != c {
                return Err(Error::DimensionMismatch { expected: c, found: row.len() });
            }
            data.extend_from_slice(row);
        }
        Ok(Self { rows: r, cols: c, data })
    }

    /// Builds a matrix whose columns are the given vectors.
    pub fn from_columns<C: AsRef<[T]>>(cols: &[C]) -> Result<Self> {
        let c = cols.len();
        let r = cols.first().map(|x| x.as_ref().len()).unwrap_or(0);
        let mut m = Self::zeros(r, c);
        for (j, col) in cols.iter().enumerate() {
            let col = col.as_ref();
            if col.len() != r {
                return Err(Error::DimensionMismatch { expected: r, found: col.len() });
            }
            for i in 0..r {
                m[(i, j)] = col[i];
            }
        }
        Ok(m)
    }

    #[inline]
    pub fn rows(&self) -> usize {
        self.rows
    }

    #[inline]
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[T] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[T] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<T> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Submatrix made of the first `k` columns.
    pub fn leading_columns(&self, k: usize) -> Self {
        self.select_columns(&(0..k).collect::<Vec<_>>())
    }

    pub fn select_columns(&self, idx: &[usize]) -> Self {
        let mut m = Self::zeros(self.rows, idx.len());
        for i in 0..self.rows {
            for (jj, &j) in idx.iter().enumerate() {
                m[(i, jj)] = self[(i, j)];
            }
        }
        m
    }

    pub fn submatrix(&self, rows: &[usize], cols: &[usize]) -> Self {
        let mut m = Self::zeros(rows.len(), cols.len());
        for (ii, &i) in rows.iter().enumerate() {
            for (jj, &j) in cols.iter().enumerate() {
                m[(ii, jj)] = self[(i, j)];
            }
        }
        m
    }

    /// Horizontal concatenation `[self | other]`.
    pub fn hstack(&self, other: &Self) -> Result<Self> {
        if self.rows != other.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: other.rows });
        }
        let mut m = Self::zeros(self.rows, self.cols + other.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m[(i, j)] = self[(i, j)];
            }
            for j in 0..other.cols {
                m[(i, self.cols + j)] = other[(i, j)];
            }
        }
        Ok(m)
    }

    pub fn transpose(&self) -> Self {
        let mut t = Self::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scale(&self, s: T) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|&x| x * s).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(&a, &b)| a - b).collect(),
        }
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.cols != other.rows {
            return Err(Error::DimensionMismatch { expected: self.cols, found: other.rows });
        }
        let mut out = Self::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self[(i, k)];
                if a == T::zero() {
                    continue;
                }
                let orow = other.row(k);
                let dst = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (d, &b) in dst.iter_mut().zip(orow) {
                    *d += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.cols {
            return Err(Error::DimensionMismatch { expected: self.cols, found: x.len() });
        }
        Ok((0..self.rows).map(|i| self.row(i).iter().zip(x).map(|(&a, &b)| a * b).sum()).collect())
    }

    /// `selfᵀ · x` without forming the transpose.
    pub fn tr_mul_vec(&self, x: &[T]) -> Result<Vec<T>> {
        if x.len() != self.rows {
            return Err(Error::DimensionMismatch { expected: self.rows, found: x.len() });
        }
        let mut out = vec![T::zero(); self.cols];
        for (i, &xi) in x.iter().enumerate() {
            for (o, &a) in out.iter_mut().zip(self.row(i)) {
                *o += a * xi;
            }
        }
        Ok(out)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|x| x.is_finite())
    }

    pub fn max_abs(&self) -> T {
        self.data.iter().fold(T::zero(), |m, &x| m.max(x.abs()))
    }

    pub fn frobenius_norm(&self) -> T {
        self.data.iter().map(|&x| x * x).sum::<T>().sqrt()
    }

    /// Entrywise absolute value.
    pub fn abs(&self) -> Self {
        Self { rows: self.rows, cols: self.cols, data: self.data.iter().map(|x| x.abs()).collect() }
    }

    pub fn min_entry(&self) -> T {
        self.data.iter().fold(T::infinity(), |m, &x| m.min(x))
    }

    /// Determinant by partial-pivot LU. Empty matrices have determinant one.
    pub fn det(&self) -> Result<T> {
        if !self.is_square() {
            return Err(Error::invalid(format!("determinant of non-square {}x{} matrix", self.rows, self.cols)));
        }
        let n = self.rows;
        let mut a = self.data.clone();
        let mut det = T::one();
        for k in 0..n {
            let mut p = k;
            let mut best = a[k * n + k].abs();
            for i in k + 1..n {
                let v = a[i * n + k].abs();
                if v > best {
                    best = v;
                    p = i;
                }
            }
            if best == T::zero() {
                return Ok(T::zero());
            }
            if p != k {
                for j in 0..n {
                    a.swap(k * n + j, p * n + j);
                }
                det = -det;
            }
            let pivot = a[k * n + k];
            det *= pivot;
            for i in k + 1..n {
                let f = a[i * n + k] / pivot;
                if f == T::zero() {
                    continue;
                }
                for j in k + 1..n {
                    let akj = a[k * n + j];
                    a[i * n + j] -= f * akj;
                }
            }
        }
        Ok(det)
    }

    /// Inverse by Gauss-Jordan elimination with partial pivoting.
    pub fn inverse(&self) -> Result<Self> {
        if !self.is_square() {
            return Err(Error::invalid("inverse of non-square matrix"));
        }
        let n = self.rows;
        let mut a = self.clone();
        let mut inv = Self::identity(n);
        let scale = self.max_abs();
        for k in 0..n {
            let mut p = k;
            for i in k + 1..n {
                if a[(i, k)].abs() > a[(p, k)].abs() {
                    p = i;
                }
            }
            if a[(p, k)].abs() <= T::epsilon() * scale * T::lit(1e-6) || a[(p, k)] == T::zero() {
                return Err(Error::invalid("matrix is numerically singular"));
            }
            if p != k {
                for j in 0..n {
                    a.data.swap(k * n + j, p * n + j);
                    inv.data.swap(k * n + j, p * n + j);
                }
            }
            let pivot = a[(k, k)];
            for j in 0..n {
                a[(k, j)] /= pivot;
                inv[(k, j)] /= pivot;
            }
            for i in 0..n {
                if i == k {
                    continue;
                }
                let f = a[(i, k)];
                if f == T::zero() {
                    continue;
                }
                for j in 0..n {
                    let akj = a[(k, j)];
                    let ikj = inv[(k, j)];
                    a[(i, j)] -= f * akj;
                    inv[(i, j)] -= f * ikj;
                }
            }
        }
        Ok(inv)
    }

    /// Householder QR. Returns the full orthogonal `Q` (rows×rows) and `R` (rows×cols)
    /// with a non-negative diagonal.
    pub fn qr_full(&self) -> (Self, Self) {
        let m = self.rows;
        let n = self.cols;
        let mut r = self.clone();
        let mut q = Self::identity(m);
        for k in 0..n.min(m.saturating_sub(1)) {
            let mut norm = T::zero();
            for i in k..m {
                norm += r[(i, k)] * r[(i, k)];
            }
            let norm = norm.sqrt();
            if norm == T::zero() {
                continue;
            }
            let alpha = if r[(k, k)] > T::zero() { -norm } else { norm };
            let mut v: Vec<T> = (k..m).map(|i| r[(i, k)]).collect();
            v[0] -= alpha;
            let vnorm2: T = v.iter().map(|&x| x * x).sum();
            if vnorm2 == T::zero() {
                continue;
            }
            let two = T::lit(2.0);
            for j in 0..n {
                let dot: T = (k..m).map(|i| v[i - k] * r[(i, j)]).sum();
                let f = two * dot / vnorm2;
                for i in k..m {
                    r[(i, j)] -= f * v[i - k];
                }
            }
            // Q <- Q * H
            for i in 0..m {
                let dot: T = (k..m).map(|l| q[(i, l)] * v[l - k]).sum();
                let f = two * dot / vnorm2;
                for l in k..m {
                    q[(i, l)] -= f * v[l - k];
                }
            }
        }
        for k in 0..n.min(m) {
            if r[(k, k)] < T::zero() {
                for j in 0..n {
                    r[(k, j)] = -r[(k, j)];
                }
                for i in 0..m {
                    q[(i, k)] = -q[(i, k)];
                }
            }
        }
        for i in 0..m {
            for j in 0..n.min(i) {
                r[(i, j)] = T::zero();
            }
        }
        (q, r)
    }

    /// Thin QR: `Q` is rows×k and `R` is k×cols with `k = min(rows, cols)`.
    pub fn qr(&self) -> (Self, Self) {
        let k = self.rows.min(self.cols);
        let (q, r) = self.qr_full();
        let mut rt = Self::zeros(k, self.cols);
        for i in 0..k {
            for j in 0..self.cols {
                rt[(i, j)] = r[(i, j)];
            }
        }
        (q.leading_columns(k), rt)
    }
}

impl<T> Index<(usize, usize)> for Matrix<T> {
    type Output = T;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &T {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl<T> IndexMut<(usize, usize)> for Matrix<T> {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut T {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl<T: Scalar> Mul for &Matrix<T> {
    type Output = Matrix<T>;

    /// Panics on a shape mismatch; use [`Matrix::matmul`] for a fallible product.
    fn mul(self, rhs: &Matrix<T>) -> Matrix<T> {
        self.matmul(rhs).expect("matrix shapes agree")
    }
}

pub fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| x * y).sum()
}

pub fn norm<T: Scalar>(a: &[T]) -> T {
    dot(a, a).sqrt()
}
