//! Strict total positivity and the positive-cone criterion for domination.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{exterior_power, Matrix};
use crate::Scalar;

/// Default lower bound a minor must exceed to count as positive.
pub const DEFAULT_EPS_MINOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StpReport {
    /// Every minor of order `1..=d−1` exceeds the threshold.
    pub strictly_totally_positive: bool,
    /// Smallest minor of order `≤ d−1`.
    pub min_minor: f64,
    /// Sign of the full determinant, reported separately.
    pub determinant_positive: bool,
}

/// Minors of every order `p ≤ d−1`, via the compound matrices.
pub fn stp_report<T: Scalar>(a: &Matrix<T>, eps_minor: f64) -> Result<StpReport> {
    if !a.is_square() {
        return Err(Error::invalid("STP check needs a square matrix"));
    }
    let d = a.rows();
    let mut min_minor = f64::INFINITY;
    for p in 1..d {
        min_minor = min_minor.min(exterior_power(a, p)?.min_entry().to_f64_lossy());
    }
    Ok(StpReport {
        strictly_totally_positive: d > 1 && min_minor > eps_minor,
        min_minor,
        determinant_positive: a.det()? > T::zero(),
    })
}

/// Whether every minor of order `1..=d−1` is greater than [`DEFAULT_EPS_MINOR`].
pub fn stp_check<T: Scalar>(a: &Matrix<T>) -> bool {
    stp_report(a, DEFAULT_EPS_MINOR).map(|r| r.strictly_totally_positive).unwrap_or(false)
}

/// Whether every `A_k^[p]` has all entries above `eps_minor`, so the closed positive
/// orthant of `∧^p ℝ^d` is mapped into its interior.
pub fn cone_invariance_check<T: Scalar>(maps: &[Matrix<T>], p: usize, eps_minor: f64) -> Result<bool> {
    let d = maps.first().map(|m| m.rows()).ok_or_else(|| Error::invalid("empty matrix tuple"))?;
    if p == 0 || p >= d {
        return Err(Error::invalid(format!("cone order {p} outside 1..{d}")));
    }
    for m in maps {
        if exterior_power(m, p)?.min_entry().to_f64_lossy() <= eps_minor {
            return Ok(false);
        }
    }
    Ok(true)
}
