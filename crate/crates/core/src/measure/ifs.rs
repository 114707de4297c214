use serde::{Deserialize, Serialize};

use crate::cocycle::weights::BernoulliWeights;
use crate::error::{Error, Result};
use crate::linalg::{check_contractive_invertible, singular_values, spectral_norm, Matrix, DET_EPS};
use crate::Scalar;

/// `f(x) = A x + t`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AffineMap<T> {
    pub linear: Matrix<T>,
    pub translation: Vec<T>,
}

impl<T: Scalar> AffineMap<T> {
    pub fn new(linear: Matrix<T>, translation: Vec<T>) -> Result<Self> {
        if linear.cols() != translation.len() || !linear.is_square() {
            return Err(Error::DimensionMismatch { expected: linear.cols(), found: translation.len() });
        }
        if translation.iter().any(|x| !x.is_finite()) {
            return Err(Error::invalid("translation has non-finite entries"));
        }
        Ok(Self { linear, translation })
    }

    pub fn dim(&self) -> usize {
        self.translation.len()
    }

    pub fn apply(&self, x: &[T]) -> Vec<T> {
        let mut y = self.linear.mul_vec(x).expect("dimension checked at construction");
        y.iter_mut().zip(&self.translation).for_each(|(a, &b)| *a += b);
        y
    }

    /// `f ∘ g`.
    pub fn compose(&self, g: &Self) -> Self {
        Self { linear: &self.linear * &g.linear, translation: self.apply(&g.translation) }
    }

    /// The unique fixed point, solving `(I − A) x = t`.
    pub fn fixed_point(&self) -> Result<Vec<T>> {
        let d = self.dim();
        let m = Matrix::identity(d).sub(&self.linear);
        m.inverse()?.mul_vec(&self.translation)
    }
}

/// An iterated function system `{f_i(x) = A_i x + t_i}` with Bernoulli weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IfsSystem<T> {
    maps: Vec<AffineMap<T>>,
    weights: BernoulliWeights<T>,
}

impl<T: Scalar> IfsSystem<T> {
    /// Validates that every map is contractive and invertible and that the weights match.
    pub fn new(maps: Vec<AffineMap<T>>, weights: BernoulliWeights<T>) -> Result<Self> {
        let first = maps.first().ok_or_else(|| Error::invalid("an IFS needs at least one map"))?;
        let d = first.dim();
        if maps.len() != weights.len() {
            return Err(Error::DimensionMismatch { expected: maps.len(), found: weights.len() });
        }
        if maps.len() > u16::MAX as usize {
            return Err(Error::invalid("too many maps"));
        }
        for m in &maps {
            if m.dim() != d {
                return Err(Error::DimensionMismatch { expected: d, found: m.dim() });
            }
            check_contractive_invertible(&m.linear, T::lit(DET_EPS))?;
        }
        Ok(Self { maps, weights })
    }

    /// Builds an IFS from linear parts and translations given separately.
    pub fn from_parts(linear: Vec<Matrix<T>>, translations: Vec<Vec<T>>, weights: BernoulliWeights<T>) -> Result<Self> {
        if linear.len() != translations.len() {
            return Err(Error::DimensionMismatch { expected: linear.len(), found: translations.len() });
        }
        let maps =
            linear.into_iter().zip(translations).map(|(a, t)| AffineMap::new(a, t)).collect::<Result<Vec<_>>>()?;
        Self::new(maps, weights)
    }

    pub fn dim(&self) -> usize {
        self.maps[0].dim()
    }

    pub fn len(&self) -> usize {
        self.maps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.maps.is_empty()
    }

    pub fn maps(&self) -> &[AffineMap<T>] {
        &self.maps
    }

    pub fn weights(&self) -> &BernoulliWeights<T> {
        &self.weights
    }

    pub fn linear_parts(&self) -> Vec<Matrix<T>> {
        self.maps.iter().map(|m| m.linear.clone()).collect()
    }

    /// `α_1(A_i)` for each map.
    pub fn contraction_norms(&self) -> Vec<T> {
        self.maps.iter().map(|m| spectral_norm(&m.linear)).collect()
    }

    /// `min_i α_d(A_i)`.
    pub fn min_weakest_singular_value(&self) -> T {
        self.maps
            .iter()
            .map(|m| singular_values(&m.linear).expect("finite by construction")[0])
            .fold(T::infinity(), T::min)
    }

    /// Radius `R = max‖t_i‖ / (1 − max α_1(A_i))` of the invariant ball `B(0, R)`.
    pub fn bounding_radius(&self) -> T {
        let t_max = self.maps.iter().map(|m| crate::linalg::matrix::norm(&m.translation)).fold(T::zero(), T::max);
        let a_max = self.contraction_norms().into_iter().fold(T::zero(), T::max);
        t_max / (T::one() - a_max)
    }

    pub fn with_weights(&self, weights: BernoulliWeights<T>) -> Result<Self> {
        Self::new(self.maps.clone(), weights)
    }
}
