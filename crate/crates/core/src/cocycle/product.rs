//! Matrix products along words, kept in factored or rescaled form so that long
//! contracting products never underflow.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::cocycle::weights::SymbolWord;
use crate::error::{Error, Result};
use crate::linalg::{svd, Matrix};
use crate::Scalar;

/// `A_{i_0} · A_{i_1} ⋯ A_{i_{n−1}}`; the empty word gives the identity.
pub fn word_product<T: Scalar>(maps: &[Matrix<T>], word: &SymbolWord) -> Result<Matrix<T>> {
    let d = ambient_dim(maps)?;
    word.validate(maps.len())?;
    let mut p = Matrix::identity(d);
    for &s in word.symbols() {
        p = &p * &maps[s as usize];
    }
    Ok(p)
}

pub(crate) fn ambient_dim<T: Scalar>(maps: &[Matrix<T>]) -> Result<usize> {
    let first = maps.first().ok_or_else(|| Error::invalid("empty matrix tuple"))?;
    let d = first.rows();
    for m in maps {
        if !m.is_square() || m.rows() != d {
            return Err(Error::DimensionMismatch { expected: d, found: m.rows() });
        }
    }
    Ok(d)
}

/// A product stored as `exp(log_scale) · matrix` with `max |matrix_ij| = 1`.
#[derive(Debug, Clone)]
pub struct ScaledProduct<T> {
    pub matrix: Matrix<T>,
    pub log_scale: T,
}

impl<T: Scalar> ScaledProduct<T> {
    pub fn identity(d: usize) -> Self {
        Self { matrix: Matrix::identity(d), log_scale: T::zero() }
    }

    pub fn from_matrix(m: &Matrix<T>) -> Self {
        let mut s = Self { matrix: m.clone(), log_scale: T::zero() };
        s.renormalize();
        s
    }

    fn renormalize(&mut self) {
        let m = self.matrix.max_abs();
        if m > T::zero() && m.is_finite() {
            self.matrix = self.matrix.scale(T::one() / m);
            self.log_scale += m.ln();
        }
    }

    /// `self · rhs`.
    pub fn mul_right(&self, rhs: &Matrix<T>) -> Self {
        let mut s = Self { matrix: &self.matrix * rhs, log_scale: self.log_scale };
        s.renormalize();
        s
    }

    /// `lhs · self`.
    pub fn mul_left(&self, lhs: &Matrix<T>) -> Self {
        let mut s = Self { matrix: lhs * &self.matrix, log_scale: self.log_scale };
        s.renormalize();
        s
    }

    /// Logarithm of the operator norm.
    pub fn log_norm(&self) -> T {
        crate::linalg::spectral_norm(&self.matrix).ln() + self.log_scale
    }
}

/// `M_0 · M_1 ⋯ M_{n−1}` in scaled form.
pub fn scaled_product<T: Scalar>(factors: &[&Matrix<T>], d: usize) -> ScaledProduct<T> {
    let mut p = ScaledProduct::identity(d);
    for m in factors {
        p = p.mul_right(m);
    }
    p
}

/// Left singular structure of a long product `P = M_0 · M_1 ⋯ M_{n−1}`.
///
/// `basis` is orthogonal with `basis[:, ..k]` spanning the dominant `k`-dimensional
/// image subspace of `P` for every `k`; `log_singular_values` are descending.
#[derive(Debug, Clone)]
pub struct ProductFactor<T> {
    pub basis: Matrix<T>,
    pub log_singular_values: Vec<T>,
}

impl<T: Scalar> ProductFactor<T> {
    /// `log(σ_{k+1}/σ_k)` for the boundary after the `k` largest values (1-based `k`).
    pub fn log_gap(&self, k: usize) -> T {
        self.log_singular_values[k] - self.log_singular_values[k - 1]
    }
}

/// Factors `P = M_0 ⋯ M_{n−1}` by propagating the right singular frame of the rescaled
/// product back through the factors with a QR step after every multiplication.
///
/// The rescaled product alone resolves the dominant subspaces only up to roughly
/// `ε·σ_1/σ_k`; re-propagation removes that loss for every block.
pub fn factor_product<T: Scalar>(factors: &[&Matrix<T>], d: usize) -> ProductFactor<T> {
    let coarse = scaled_product(factors, d);
    let mut q = svd(&coarse.matrix).v;
    let mut log_r = vec![T::zero(); d];
    for m in factors.iter().rev() {
        let (qn, r) = (*m * &q).qr();
        for (acc, i) in log_r.iter_mut().zip(0..d) {
            *acc += r[(i, i)].abs().ln();
        }
        q = qn;
    }
    ProductFactor { basis: q, log_singular_values: log_r }
}

/// Haar-distributed orthogonal `d×d` matrix (QR of a Gaussian matrix).
pub fn random_orthogonal<T: Scalar, R: Rng + ?Sized>(d: usize, rng: &mut R) -> Matrix<T> {
    loop {
        let data: Vec<T> = (0..d * d).map(|_| T::lit(rng.sample::<f64, _>(StandardNormal))).collect();
        let g = Matrix::new(d, d, data).expect("square shape");
        let (q, r) = g.qr();
        if (0..d).all(|i| r[(i, i)] > T::lit(1e-8)) {
            return q;
        }
    }
}

/// Re-orthonormalizing propagation of a frame under `A_{w_k}` for `k = 0, 1, …`.
/// Returns the final frame and the accumulated `log |R_jj|`.
pub(crate) fn propagate_frame<T: Scalar>(
    maps: &[Matrix<T>],
    word: &[u16],
    start: Matrix<T>,
    renorm_interval: usize,
) -> (Matrix<T>, Vec<T>) {
    let d = start.rows();
    let k = start.cols();
    let mut q = start;
    let mut log_r = vec![T::zero(); k];
    let mut block = Matrix::identity(d);
    let mut pending = 0usize;
    let interval = renorm_interval.max(1);
    for (step, &s) in word.iter().enumerate() {
        block = &maps[s as usize] * &block;
        pending += 1;
        if pending == interval || step + 1 == word.len() {
            let (qn, r) = (&block * &q).qr();
            for (acc, i) in log_r.iter_mut().zip(0..k) {
                *acc += r[(i, i)].abs().ln();
            }
            q = qn;
            block = Matrix::identity(d);
            pending = 0;
        }
    }
    (q, log_r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::stream_rng;
    use approx::assert_relative_eq;

    #[test]
    fn word_product_examples() {
        let a = Matrix::diag(&[0.5, 0.25]);
        let b = Matrix::diag(&[0.2, 0.1]);
        let maps = vec![a.clone(), b];
        assert_eq!(word_product(&maps, &SymbolWord::new(vec![0])).unwrap(), a);
        assert_eq!(word_product(&maps, &SymbolWord::empty()).unwrap(), Matrix::identity(2));
        let ab = word_product(&maps, &SymbolWord::new(vec![0, 1])).unwrap();
        assert_eq!(ab, Matrix::diag(&[0.1, 0.025]));
        assert!(word_product(&maps, &SymbolWord::new(vec![2])).is_err());
    }

    #[test]
    fn product_order_is_left_to_right() {
        let a = Matrix::from_rows(&[[0.3, 0.1], [0.0, 0.2]]).unwrap();
        let b = Matrix::from_rows(&[[0.1, 0.0], [0.4, 0.2]]).unwrap();
        let p = word_product(&[a.clone(), b.clone()], &SymbolWord::new(vec![0, 1])).unwrap();
        assert_eq!(p, &a * &b);
    }

    #[test]
    fn factor_product_matches_direct_svd_for_short_products() {
        let a = Matrix::<f64>::from_rows(&[[0.6, 0.2, 0.0], [0.1, 0.3, 0.1], [0.0, 0.2, 0.4]]).unwrap();
        let b = Matrix::from_rows(&[[0.3, -0.1, 0.2], [0.0, 0.5, 0.1], [0.2, 0.0, 0.3]]).unwrap();
        let factors = vec![&a, &b, &a, &a, &b];
        let f = factor_product(&factors, 3);
        let direct = factors.iter().fold(Matrix::identity(3), |p, m| &p * *m);
        let s = svd(&direct);
        for i in 0..3 {
            assert_relative_eq!(f.log_singular_values[i], s.values[i].ln(), epsilon = 1e-10);
        }
        let top = crate::linalg::SubspaceFrame::from_orthonormal(f.basis.leading_columns(1)).unwrap();
        let top_direct = crate::linalg::SubspaceFrame::from_orthonormal(s.u.leading_columns(1)).unwrap();
        assert!(crate::linalg::principal_angle_distance(&top, &top_direct).unwrap() < 1e-12);
    }

    #[test]
    fn long_diagonal_product_does_not_underflow() {
        let a = Matrix::diag(&[1.0 / 3.0, 0.5]);
        let factors = vec![&a; 2000];
        let f = factor_product(&factors, 2);
        assert_relative_eq!(f.log_singular_values[0], 2000.0 * 0.5f64.ln(), max_relative = 1e-12);
        assert_relative_eq!(f.log_singular_values[1], 2000.0 * (1.0f64 / 3.0).ln(), max_relative = 1e-12);
        assert!(f.basis[(1, 0)].abs() > 1.0 - 1e-12);
    }

    #[test]
    fn random_orthogonal_is_orthogonal() {
        let q: Matrix<f64> = random_orthogonal(4, &mut stream_rng(3, 0));
        let g = &q.transpose() * &q;
        for i in 0..4 {
            for j in 0..4 {
                assert_relative_eq!(g[(i, j)], if i == j { 1.0 } else { 0.0 }, epsilon = 1e-13);
            }
        }
    }
}
