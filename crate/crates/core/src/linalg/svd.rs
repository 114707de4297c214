//! One-sided Jacobi SVD.
//!
//! Hestenes' method orthogonalizes the columns of `A V` by plane rotations. It is slow
//! for large matrices but every matrix here is at most 70×70 (the middle compound of an
//! 8×8 map), and it delivers singular values with high relative accuracy.

use crate::linalg::matrix::Matrix;
use crate::Scalar;

/// `A = U · diag(values) · Vᵀ` with values sorted in descending order.
#[derive(Debug, Clone)]
pub struct Svd<T> {
    /// rows×k, orthonormal columns (k = min(rows, cols)).
    pub u: Matrix<T>,
    pub values: Vec<T>,
    /// cols×cols when rows ≥ cols; k×cols transposed shape otherwise.
    pub v: Matrix<T>,
}

const MAX_SWEEPS: usize = 80;

/// Singular value decomposition of an arbitrary real matrix.
pub fn svd<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    if a.rows() >= a.cols() {
        jacobi_tall(a)
    } else {
        let t = jacobi_tall(&a.transpose());
        Svd { u: t.v.leading_columns(t.values.len()), values: t.values, v: full_from_thin(&t.u) }
    }
}

/// Completes an orthonormal thin frame to a square orthogonal matrix.
fn full_from_thin<T: Scalar>(thin: &Matrix<T>) -> Matrix<T> {
    let (q, _) = thin.qr_full();
    let mut out = q.clone();
    for j in 0..thin.cols() {
        for i in 0..thin.rows() {
            out[(i, j)] = thin[(i, j)];
        }
    }
    out
}

fn jacobi_tall<T: Scalar>(a: &Matrix<T>) -> Svd<T> {
    let m = a.rows();
    let n = a.cols();
    let mut w = a.clone();
    let mut v = Matrix::<T>::identity(n);
    let eps = T::epsilon();

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..n {
            for q in p + 1..n {
                let mut alpha = T::zero();
                let mut beta = T::zero();
                let mut gamma = T::zero();
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    alpha += wp * wp;
                    beta += wq * wq;
                    gamma += wp * wq;
                }
                if gamma == T::zero() || gamma.abs() <= eps * (alpha * beta).sqrt() {
                    continue;
                }
                rotated = true;
                let zeta = (beta - alpha) / (T::lit(2.0) * gamma);
                let t = zeta.signum() / (zeta.abs() + (T::one() + zeta * zeta).sqrt());
                let c = T::one() / (T::one() + t * t).sqrt();
                let s = c * t;
                for i in 0..m {
                    let wp = w[(i, p)];
                    let wq = w[(i, q)];
                    w[(i, p)] = c * wp - s * wq;
                    w[(i, q)] = s * wp + c * wq;
                }
                for i in 0..n {
                    let vp = v[(i, p)];
                    let vq = v[(i, q)];
                    v[(i, p)] = c * vp - s * vq;
                    v[(i, q)] = s * vp + c * vq;
                }
            }
        }
        if !rotated {
            break;
        }
    }

    let mut order: Vec<(usize, T)> =
        (0..n).map(|j| (j, (0..m).map(|i| w[(i, j)] * w[(i, j)]).sum::<T>().sqrt())).collect();
    order.sort_by(|x, y| y.1.partial_cmp(&x.1).unwrap_or(std::cmp::Ordering::Equal));

    let mut u = Matrix::zeros(m, n);
    let mut vs = Matrix::zeros(n, n);
    let mut values = Vec::with_capacity(n);
    for (jj, &(j, s)) in order.iter().enumerate() {
        values.push(s);
        for i in 0..n {
            vs[(i, jj)] = v[(i, j)];
        }
        if s > T::zero() {
            for i in 0..m {
                u[(i, jj)] = w[(i, j)] / s;
            }
        }
    }
    // Columns of U belonging to zero singular values are filled in to keep U orthonormal.
    let rank = values.iter().filter(|&&s| s > T::zero()).count();
    if rank < n {
        let (q, _) = u.leading_columns(rank).qr_full();
        // Columns rank.. of q span the complement of the nonzero part.
        for jj in rank..n {
            for i in 0..m {
                u[(i, jj)] = q[(i, jj)];
            }
        }
    }
    Svd { u, values, v: vs }
}

/// Singular values sorted in descending order.
pub fn singular_values_desc<T: Scalar>(a: &Matrix<T>) -> Vec<T> {
    svd(a).values
}

/// Largest singular value (operator 2-norm).
pub fn spectral_norm<T: Scalar>(a: &Matrix<T>) -> T {
    singular_values_desc(a).first().copied().unwrap_or(T::zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn reconstruct(s: &Svd<f64>) -> Matrix<f64> {
        let k = s.values.len();
        let mut us = s.u.clone();
        for j in 0..k {
            for i in 0..us.rows() {
                us[(i, j)] *= s.values[j];
            }
        }
        &us * &s.v.leading_columns(k).transpose()
    }

    #[test]
    fn reconstructs_square_and_wide() {
        let a = Matrix::from_rows(&[[0.3, 0.1, -0.2], [0.0, 0.2, 0.5], [1.0, -1.0, 0.25]]).unwrap();
        let s = svd(&a);
        let b = reconstruct(&s);
        for i in 0..3 {
            for j in 0..3 {
                assert_relative_eq!(a[(i, j)], b[(i, j)], epsilon = 1e-14);
            }
        }
        assert!(s.values.windows(2).all(|w| w[0] >= w[1]));

        let wide = Matrix::from_rows(&[[1.0, 2.0, 3.0], [0.0, -1.0, 4.0]]).unwrap();
        let s = svd(&wide);
        assert_eq!(s.values.len(), 2);
        let b = reconstruct(&s);
        for i in 0..2 {
            for j in 0..3 {
                assert_relative_eq!(wide[(i, j)], b[(i, j)], epsilon = 1e-13);
            }
        }
    }

    #[test]
    fn rank_deficient_keeps_orthonormal_u() {
        let a = Matrix::from_rows(&[[1.0, 2.0], [2.0, 4.0]]).unwrap();
        let s = svd(&a);
        assert_relative_eq!(s.values[1], 0.0, epsilon = 1e-14);
        let utu = &s.u.transpose() * &s.u;
        assert_relative_eq!(utu[(0, 1)], 0.0, epsilon = 1e-14);
        assert_relative_eq!(utu[(1, 1)], 1.0, epsilon = 1e-14);
    }

    #[test]
    fn tiny_singular_values_keep_relative_accuracy() {
        let a = Matrix::diag(&[1.0, 1e-30, 3e-12]);
        let s = singular_values_desc(&a);
        assert_relative_eq!(s[2], 1e-30, max_relative = 1e-14);
        assert_relative_eq!(s[1], 3e-12, max_relative = 1e-14);
    }
}
