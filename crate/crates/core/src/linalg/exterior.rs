//! Minors and compound (exterior-power) matrices.
//!
//! The basis of `∧^p ℝ^d` is `e_I = e_{i_1} ∧ … ∧ e_{i_p}` for strictly increasing
//! index tuples `I`, ordered lexicographically. Entry `(I, J)` of the `p`-th compound
//! is the minor of `A` on rows `I` and columns `J`.

use itertools::Itertools;

use crate::error::{Error, Result};
use crate::linalg::matrix::Matrix;
use crate::Scalar;

/// Strictly increasing `p`-subsets of `0..d` in lexicographic order.
pub fn index_tuples(d: usize, p: usize) -> Vec<Vec<usize>> {
    (0..d).combinations(p).collect()
}

pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn check_indices(idx: &[usize], bound: usize, what: &str) -> Result<()> {
    if idx.iter().any(|&i| i >= bound) {
        return Err(Error::invalid(format!("{what} index out of range 0..{bound}: {idx:?}")));
    }
    if idx.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid(format!("{what} indices must be strictly increasing: {idx:?}")));
    }
    Ok(())
}

/// Determinant of the submatrix on the given (0-based, strictly increasing) rows and columns.
pub fn minor<T: Scalar>(a: &Matrix<T>, rows: &[usize], cols: &[usize]) -> Result<T> {
    if rows.len() != cols.len() {
        return Err(Error::DimensionMismatch { expected: rows.len(), found: cols.len() });
    }
    if rows.len() > a.rows().min(a.cols()) {
        return Err(Error::invalid(format!("minor order {} exceeds matrix size", rows.len())));
    }
    check_indices(rows, a.rows(), "row")?;
    check_indices(cols, a.cols(), "column")?;
    a.submatrix(rows, cols).det()
}

/// The `p`-th compound matrix `A^[p]`, of size `C(d,p) × C(d,p)`.
pub fn exterior_power<T: Scalar>(a: &Matrix<T>, p: usize) -> Result<Matrix<T>> {
    if !a.is_square() {
        return Err(Error::invalid("exterior power of a non-square matrix"));
    }
    let d = a.rows();
    if p == 0 || p > d {
        return Err(Error::invalid(format!("exterior power order {p} outside 1..={d}")));
    }
    let tuples = index_tuples(d, p);
    let n = tuples.len();
    let mut out = Matrix::zeros(n, n);
    for (r, rows) in tuples.iter().enumerate() {
        for (c, cols) in tuples.iter().enumerate() {
            out[(r, c)] = a.submatrix(rows, cols).det()?;
        }
    }
    Ok(out)
}
