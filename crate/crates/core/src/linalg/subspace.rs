//! Subspaces as orthonormal frames, nested flags, and principal-angle geometry.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::matrix::{norm, Matrix};
use crate::linalg::svd::svd;
use crate::Scalar;

/// Tolerance on `frameᵀ·frame − I` accepted by [`SubspaceFrame::from_orthonormal`].
pub const ORTHONORMAL_TOL: f64 = 1e-10;
/// Containment residual accepted between consecutive members of a [`FlagChain`].
pub const NESTING_TOL: f64 = 1e-8;
/// Default principal-angle cutoff for [`subspace_intersection`].
pub const INTERSECTION_TOL: f64 = 1e-6;

/// A `k`-dimensional subspace of `ℝ^d`, stored as a `d×k` matrix with orthonormal columns.
///
/// Two frames describe the same subspace iff their principal-angle distance is zero;
/// frames themselves are not canonical.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubspaceFrame<T> {
    frame: Matrix<T>,
}

impl<T: Scalar> SubspaceFrame<T> {
    /// Wraps a frame that is already orthonormal (checked to [`ORTHONORMAL_TOL`]).
    pub fn from_orthonormal(frame: Matrix<T>) -> Result<Self> {
        let k = frame.cols();
        if k == 0 || k > frame.rows() {
            return Err(Error::invalid(format!("subspace dimension {k} outside 1..={}", frame.rows())));
        }
        let gram = &frame.transpose() * &frame;
        let tol = T::lit(ORTHONORMAL_TOL);
        for i in 0..k {
            for j in 0..k {
                let target = if i == j { T::one() } else { T::zero() };
                if (gram[(i, j)] - target).abs() > tol.max(T::epsilon() * T::lit(64.0)) {
                    return Err(Error::invalid("frame columns are not orthonormal"));
                }
            }
        }
        Ok(Self { frame })
    }

    /// Orthonormalizes the columns of `spanning`; they must be linearly independent.
    pub fn from_spanning(spanning: &Matrix<T>) -> Result<Self> {
        let k = spanning.cols();
        if k == 0 || k > spanning.rows() {
            return Err(Error::invalid("spanning set has invalid size"));
        }
        let (q, r) = spanning.qr();
        let scale = spanning.max_abs();
        for i in 0..k {
            if r[(i, i)] <= scale * T::epsilon() * T::lit(1e3) {
                return Err(Error::invalid("spanning vectors are linearly dependent"));
            }
        }
        Ok(Self { frame: q })
    }

    /// `span(e_i : i ∈ axes)` for 0-based coordinate indices.
    pub fn coordinate(d: usize, axes: &[usize]) -> Result<Self> {
        let mut m = Matrix::zeros(d, axes.len());
        for (j, &a) in axes.iter().enumerate() {
            if a >= d {
                return Err(Error::invalid(format!("axis {a} out of range for dimension {d}")));
            }
            m[(a, j)] = T::one();
        }
        Self::from_orthonormal(m)
    }

    pub fn line(direction: &[T]) -> Result<Self> {
        let n = norm(direction);
        if !(n > T::zero()) {
            return Err(Error::invalid("zero direction vector"));
        }
        let unit: Vec<T> = direction.iter().map(|&x| x / n).collect();
        Self::from_orthonormal(Matrix::from_columns(&[unit])?)
    }

    pub fn whole_space(d: usize) -> Self {
        Self { frame: Matrix::identity(d) }
    }

    /// Ambient dimension `d`.
    pub fn ambient_dim(&self) -> usize {
        self.frame.rows()
    }

    /// Subspace dimension `k`.
    pub fn dim(&self) -> usize {
        self.frame.cols()
    }

    pub fn frame(&self) -> &Matrix<T> {
        &self.frame
    }

    /// Orthogonal projector `P = F Fᵀ` (d×d).
    pub fn projector(&self) -> Matrix<T> {
        &self.frame * &self.frame.transpose()
    }

    /// Orthogonal complement, or `None` for the whole space.
    pub fn complement(&self) -> Option<Self> {
        let d = self.ambient_dim();
        let k = self.dim();
        if k == d {
            return None;
        }
        let (q, _) = self.frame.qr_full();
        let idx: Vec<usize> = (k..d).collect();
        Some(Self { frame: q.select_columns(&idx) })
    }

    /// Image `A·V`, re-orthonormalized. Fails if `A` collapses the subspace.
    pub fn image(&self, a: &Matrix<T>) -> Result<Self> {
        if a.cols() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: a.cols() });
        }
        Self::from_spanning(&(a * &self.frame))
    }

    /// Euclidean distance from `x` to the subspace.
    pub fn residual(&self, x: &[T]) -> Result<T> {
        let coords = orthogonal_projection(self, x)?;
        let back = self.frame.mul_vec(&coords)?;
        Ok(norm(&x.iter().zip(&back).map(|(&a, &b)| a - b).collect::<Vec<_>>()))
    }

    /// Largest distance of a unit vector of `other` to `self` (0 iff `other ⊆ self`).
    pub fn containment_residual(&self, other: &Self) -> Result<T> {
        if other.ambient_dim() != self.ambient_dim() {
            return Err(Error::DimensionMismatch { expected: self.ambient_dim(), found: other.ambient_dim() });
        }
        let proj = &self.frame * &(&self.frame.transpose() * &other.frame);
        let resid = other.frame.sub(&proj);
        Ok(svd(&resid).values.first().copied().unwrap_or(T::zero()))
    }

    /// Re-expresses the frame in another frame's coordinates (`Wᵀ·F`); requires `self ⊆ W`.
    pub fn in_coordinates_of(&self, outer: &Self) -> Result<Self> {
        let coords = &outer.frame.transpose() * &self.frame;
        Self::from_spanning(&coords)
    }
}

/// Coordinates of the orthogonal projection of `x` onto `V`, in the frame basis (`Fᵀx`).
pub fn orthogonal_projection<T: Scalar>(v: &SubspaceFrame<T>, x: &[T]) -> Result<Vec<T>> {
    v.frame.tr_mul_vec(x)
}

/// Principal angles between two subspaces, ascending; `min(k_U, k_W)` values.
///
/// Small angles are recovered from the distance between paired principal vectors
/// rather than from `acos`, which loses all precision near zero.
pub fn principal_angles<T: Scalar>(u: &SubspaceFrame<T>, w: &SubspaceFrame<T>) -> Result<Vec<T>> {
    Ok(principal_vectors(u, w)?.into_iter().map(|(angle, _, _)| angle).collect())
}

/// An angle with its unit vectors in `u` and in `w`.
type PrincipalPair<T> = (T, Vec<T>, Vec<T>);

fn principal_vectors<T: Scalar>(u: &SubspaceFrame<T>, w: &SubspaceFrame<T>) -> Result<Vec<PrincipalPair<T>>> {
    if u.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: u.ambient_dim(), found: w.ambient_dim() });
    }
    let c = &u.frame.transpose() * &w.frame;
    let s = svd(&c);
    let k = u.dim().min(w.dim());
    let two = T::lit(2.0);
    let mut out = Vec::with_capacity(k);
    for j in 0..k {
        let y = s.u.column(j);
        let z = s.v.column(j);
        let uy = u.frame.mul_vec(&y)?;
        let wz = w.frame.mul_vec(&z)?;
        let diff: Vec<T> = uy.iter().zip(&wz).map(|(&a, &b)| a - b).collect();
        let chord = norm(&diff).min(two);
        let angle = two * (chord / two).asin();
        out.push((angle, uy, wz));
    }
    out.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap_or(std::cmp::Ordering::Equal));
    Ok(out)
}

/// Sine of the largest principal angle between equal-dimensional subspaces.
pub fn principal_angle_distance<T: Scalar>(u: &SubspaceFrame<T>, w: &SubspaceFrame<T>) -> Result<T> {
    if u.ambient_dim() != w.ambient_dim() {
        return Err(Error::DimensionMismatch { expected: u.ambient_dim(), found: w.ambient_dim() });
    }
    if u.dim() != w.dim() {
        return Err(Error::DimensionMismatch { expected: u.dim(), found: w.dim() });
    }
    // ‖(I − P_U) W‖₂ = sin θ_max, and is symmetric for equal dimensions.
    let dist = u.containment_residual(w)?;
    Ok(dist.min(T::one()).max(T::zero()))
}

/// Numerical intersection: principal vectors whose angle is below `tol`.
/// Returns `None` when the intersection is `{0}`.
pub fn subspace_intersection<T: Scalar>(
    u: &SubspaceFrame<T>,
    w: &SubspaceFrame<T>,
    tol: T,
) -> Result<Option<SubspaceFrame<T>>> {
    let pv = principal_vectors(u, w)?;
    let half = T::lit(0.5);
    let cols: Vec<Vec<T>> = pv
        .into_iter()
        .filter(|(angle, _, _)| *angle < tol)
        .map(|(_, a, b)| a.iter().zip(&b).map(|(&x, &y)| (x + y) * half).collect())
        .collect();
    if cols.is_empty() {
        return Ok(None);
    }
    SubspaceFrame::from_spanning(&Matrix::from_columns(&cols)?).map(Some)
}

/// Nested subspaces `frames[0] ⊃ frames[1] ⊃ …` with strictly decreasing dimensions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagChain<T> {
    frames: Vec<SubspaceFrame<T>>,
}

impl<T: Scalar> FlagChain<T> {
    pub fn new(frames: Vec<SubspaceFrame<T>>) -> Result<Self> {
        if let Some(first) = frames.first() {
            let d = first.ambient_dim();
            for pair in frames.windows(2) {
                if pair[1].ambient_dim() != d {
                    return Err(Error::DimensionMismatch { expected: d, found: pair[1].ambient_dim() });
                }
                if pair[1].dim() >= pair[0].dim() {
                    return Err(Error::invalid("flag dimensions must be strictly decreasing"));
                }
                let r = pair[0].containment_residual(&pair[1])?;
                if r > T::lit(NESTING_TOL) {
                    return Err(Error::invalid(format!("flag is not nested: containment residual {r}")));
                }
            }
        }
        Ok(Self { frames })
    }

    /// Flag spanned by leading columns of an orthonormal `d×d` basis, one member per
    /// entry of `dims` (which must be strictly decreasing).
    pub fn from_leading_columns(basis: &Matrix<T>, dims: &[usize]) -> Result<Self> {
        let frames = dims
            .iter()
            .map(|&k| SubspaceFrame::from_orthonormal(basis.leading_columns(k)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(frames)
    }

    pub fn ambient_dim(&self) -> usize {
        self.frames.first().map(|f| f.ambient_dim()).unwrap_or(0)
    }

    pub fn dims(&self) -> Vec<usize> {
        self.frames.iter().map(|f| f.dim()).collect()
    }

    pub fn frames(&self) -> &[SubspaceFrame<T>] {
        &self.frames
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    /// Member of the given dimension, if present.
    pub fn member(&self, dim: usize) -> Option<&SubspaceFrame<T>> {
        self.frames.iter().find(|f| f.dim() == dim)
    }

    /// Image of every member under an invertible linear map.
    pub fn image(&self, a: &Matrix<T>) -> Result<Self> {
        Self::new(self.frames.iter().map(|f| f.image(a)).collect::<Result<Vec<_>>>()?)
    }

    /// Largest containment residual between consecutive members.
    pub fn nesting_residual(&self) -> Result<T> {
        let mut worst = T::zero();
        for pair in self.frames.windows(2) {
            worst = worst.max(pair[0].containment_residual(&pair[1])?);
        }
        Ok(worst)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn projection_examples() {
        let e2 = SubspaceFrame::<f64>::coordinate(2, &[1]).unwrap();
        assert_eq!(orthogonal_projection(&e2, &[3.0, 4.0]).unwrap(), vec![4.0]);
        let diag = SubspaceFrame::line(&[1.0, 1.0]).unwrap();
        assert_relative_eq!(orthogonal_projection(&diag, &[1.0, 0.0]).unwrap()[0], 1.0 / 2f64.sqrt(), epsilon = 1e-15);
        let full = SubspaceFrame::<f64>::whole_space(3);
        let x = [1.0, -2.0, 0.5];
        let y = orthogonal_projection(&full, &x).unwrap();
        assert_relative_eq!(norm(&y), norm(&x), epsilon = 1e-15);
    }

    #[test]
    fn distance_examples() {
        let e1 = SubspaceFrame::<f64>::coordinate(2, &[0]).unwrap();
        let e2 = SubspaceFrame::<f64>::coordinate(2, &[1]).unwrap();
        let diag = SubspaceFrame::line(&[1.0, 1.0]).unwrap();
        assert_eq!(principal_angle_distance(&e1, &e1).unwrap(), 0.0);
        assert_relative_eq!(principal_angle_distance(&e1, &e2).unwrap(), 1.0, epsilon = 1e-15);
        assert_relative_eq!(
            principal_angle_distance(&e1, &diag).unwrap(),
            (std::f64::consts::FRAC_PI_4).sin(),
            epsilon = 1e-15
        );
        assert!(principal_angle_distance(&e1, &SubspaceFrame::whole_space(2)).is_err());
    }

    #[test]
    fn small_angles_are_resolved() {
        let a = SubspaceFrame::line(&[1.0, 0.0]).unwrap();
        let b = SubspaceFrame::line(&[1.0, 1e-12]).unwrap();
        let ang = principal_angles(&a, &b).unwrap();
        assert_relative_eq!(ang[0], 1e-12, max_relative = 1e-6);
    }

    #[test]
    fn intersection_of_coordinate_planes() {
        let u = SubspaceFrame::<f64>::coordinate(3, &[0, 1]).unwrap();
        let w = SubspaceFrame::<f64>::coordinate(3, &[1, 2]).unwrap();
        let i = subspace_intersection(&u, &w, 1e-6).unwrap().unwrap();
        assert_eq!(i.dim(), 1);
        let e2 = SubspaceFrame::coordinate(3, &[1]).unwrap();
        assert!(principal_angle_distance(&i, &e2).unwrap() < 1e-14);
        let same = subspace_intersection(&u, &u, 1e-6).unwrap().unwrap();
        assert!(principal_angle_distance(&same, &u).unwrap() < 1e-14);
        let e1 = SubspaceFrame::coordinate(3, &[0]).unwrap();
        let e3 = SubspaceFrame::coordinate(3, &[2]).unwrap();
        assert!(subspace_intersection(&e1, &e3, 1e-6).unwrap().is_none());
    }

    #[test]
    fn complement_and_flags() {
        let v = SubspaceFrame::line(&[1.0, 2.0, 2.0]).unwrap();
        let c = v.complement().unwrap();
        assert_eq!(c.dim(), 2);
        let cross = &v.frame().transpose() * c.frame();
        assert!(cross.max_abs() < 1e-15);
        assert!(SubspaceFrame::<f64>::whole_space(2).complement().is_none());

        let plane = SubspaceFrame::<f64>::coordinate(3, &[0, 1]).unwrap();
        let line = SubspaceFrame::<f64>::coordinate(3, &[1]).unwrap();
        let flag = FlagChain::new(vec![plane.clone(), line]).unwrap();
        assert_eq!(flag.dims(), vec![2, 1]);
        let off = SubspaceFrame::<f64>::coordinate(3, &[2]).unwrap();
        assert!(FlagChain::new(vec![plane.clone(), off]).is_err());
        assert!(FlagChain::new(vec![plane.clone(), plane]).is_err());
    }
}
