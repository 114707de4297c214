//! Small-matrix numerics: singular values, restricted norms, compounds, subspace geometry.

pub mod exterior;
pub mod matrix;
pub mod subspace;
pub mod svd;

pub use exterior::{binomial, exterior_power, index_tuples, minor};
pub use matrix::{Matrix, MAX_DIM};
pub use subspace::{
    orthogonal_projection, principal_angle_distance, principal_angles, subspace_intersection, FlagChain, SubspaceFrame,
    INTERSECTION_TOL, NESTING_TOL, ORTHONORMAL_TOL,
};
pub use svd::{spectral_norm, svd, Svd};

use crate::error::{Error, Result};
use crate::Scalar;

/// Default lower bound on `|det A|` for maps that must be invertible.
pub const DET_EPS: f64 = 1e-12;

/// Singular values `α_d ≤ … ≤ α_1` in ascending order.
pub fn singular_values<T: Scalar>(a: &Matrix<T>) -> Result<Vec<T>> {
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let mut s = svd::singular_values_desc(a);
    s.reverse();
    Ok(s)
}

/// `‖A|V‖ = sup_{v ∈ V} ‖Av‖ / ‖v‖`.
pub fn restricted_norm<T: Scalar>(a: &Matrix<T>, v: &SubspaceFrame<T>) -> Result<T> {
    if a.cols() != v.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: a.cols(), found: v.ambient_dim() });
    }
    Ok(spectral_norm(&(a * v.frame())))
}

/// `m(A|V) = ‖A⁻¹|V‖⁻¹`.
pub fn restricted_conorm<T: Scalar>(a: &Matrix<T>, v: &SubspaceFrame<T>) -> Result<T> {
    let inv = a.inverse()?;
    Ok(T::one() / restricted_norm(&inv, v)?)
}

/// Validates a linear part for contexts that need a contractive invertible map.
pub fn check_contractive_invertible<T: Scalar>(a: &Matrix<T>, det_eps: T) -> Result<()> {
    if !a.is_square() {
        return Err(Error::invalid("linear part must be square"));
    }
    let d = a.rows();
    if d == 0 || d > MAX_DIM {
        return Err(Error::UnsupportedDimension(d));
    }
    if !a.is_finite() {
        return Err(Error::invalid("matrix has non-finite entries"));
    }
    let norm = spectral_norm(a);
    if !(norm < T::one()) {
        return Err(Error::invalid(format!("map is not contractive: operator norm {norm}")));
    }
    let det = a.det()?.abs();
    if !(det > det_eps) {
        return Err(Error::invalid(format!("map is singular: |det| = {det}")));
    }
    Ok(())
}
