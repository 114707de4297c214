//! Classifies each index as dominated, non-dominated or inconclusive from a scan table.

use serde::{Deserialize, Serialize};

use crate::domination::scan::GapRatioTable;
use crate::stats::fit_line;

/// Default slope threshold separating decay from a flat ratio.
pub const DEFAULT_EPS_SLOPE: f64 = 0.01;
/// Largest residual of the linear fit, relative to the fitted drop over the range,
/// that still counts as exponential decay.
pub const MAX_RELATIVE_RESIDUAL: f64 = 0.25;
/// Shortest table the classifier will judge.
pub const MIN_SCAN_LENGTH: usize = 6;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DominationStatus {
    Dominated,
    NonDominated,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IndexDomination {
    /// 1-based index `i` of the ratio `α_{i+1}/α_i`.
    pub index: usize,
    pub status: DominationStatus,
    /// Fitted slope of `log max ratio` against `n`; `τ = exp(decay_rate)`.
    pub decay_rate: f64,
    /// Smallest `C` with `max ratio(n) ≤ C·τ^n` at every scanned length.
    pub constant_estimate: f64,
    /// Slope fitted on the second half of the lengths only.
    pub tail_slope: f64,
    pub relative_residual: f64,
    pub n_max: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominationReport {
    pub indices: Vec<IndexDomination>,
    /// `D(A)`: the indices whose status is dominated.
    pub dominated_indices: Vec<usize>,
    pub n_max: usize,
    pub eps_slope: f64,
    /// False when the maxima came from Monte-Carlo words.
    pub exhaustive: bool,
}

impl DominationReport {
    pub fn status(&self, i: usize) -> Option<DominationStatus> {
        self.indices.iter().find(|r| r.index == i).map(|r| r.status)
    }

    pub fn is_dominated(&self, i: usize) -> bool {
        self.dominated_indices.contains(&i)
    }

    pub fn has_inconclusive(&self) -> bool {
        self.indices.iter().any(|r| r.status == DominationStatus::Inconclusive)
    }

    /// A report in which every index is inconclusive, e.g. when no scan could be run.
    pub fn all_inconclusive(d: usize, n_max: usize, eps_slope: f64) -> Self {
        let indices = (1..d)
            .map(|index| IndexDomination {
                index,
                status: DominationStatus::Inconclusive,
                decay_rate: f64::NAN,
                constant_estimate: f64::NAN,
                tail_slope: f64::NAN,
                relative_residual: f64::NAN,
                n_max,
            })
            .collect();
        Self { indices, dominated_indices: Vec::new(), n_max, eps_slope, exhaustive: false }
    }
}

fn classify(index: usize, y: &[f64], eps_slope: f64) -> IndexDomination {
    let n_max = y.len() - 1;
    let inconclusive = |decay_rate, constant_estimate, tail_slope, relative_residual| IndexDomination {
        index,
        status: DominationStatus::Inconclusive,
        decay_rate,
        constant_estimate,
        tail_slope,
        relative_residual,
        n_max,
    };
    if n_max < MIN_SCAN_LENGTH || y.iter().any(|v| !v.is_finite()) {
        return inconclusive(f64::NAN, f64::NAN, f64::NAN, f64::NAN);
    }
    let x: Vec<f64> = (0..=n_max).map(|n| n as f64).collect();
    let full = fit_line(&x, y).expect("at least two distinct lengths");
    let half = n_max / 2;
    let tail = fit_line(&x[half..], &y[half..]).expect("at least two distinct lengths");
    let b = full.slope;
    let constant_estimate = x.iter().zip(y).map(|(n, v)| v - b * n).fold(f64::NEG_INFINITY, f64::max).exp();
    let drop = (b * n_max as f64).abs().max(f64::MIN_POSITIVE);
    let relative_residual = full.rms_residual / drop;

    let status = if b < -eps_slope && tail.slope < -eps_slope && relative_residual < MAX_RELATIVE_RESIDUAL {
        DominationStatus::Dominated
    } else if tail.slope >= -eps_slope {
        DominationStatus::NonDominated
    } else {
        return inconclusive(b, constant_estimate, tail.slope, relative_residual);
    };
    IndexDomination {
        index,
        status,
        decay_rate: b,
        constant_estimate,
        tail_slope: tail.slope,
        relative_residual,
        n_max,
    }
}

/// Least-squares classification of each row of the table.
///
/// Dominated: both the full-range and the tail slope are below `−eps_slope` and the
/// linear fit is good. Non-dominated: the tail slope is at least `−eps_slope`, i.e.
/// the ratios stay above `e^{−eps_slope·n}` asymptotically. Anything else, and every
/// table shorter than [`MIN_SCAN_LENGTH`], is inconclusive.
pub fn detect_domination(table: &GapRatioTable, eps_slope: f64) -> DominationReport {
    let indices: Vec<IndexDomination> =
        table.max_log_ratio.iter().enumerate().map(|(k, row)| classify(k + 1, row, eps_slope)).collect();
    let dominated_indices =
        indices.iter().filter(|r| r.status == DominationStatus::Dominated).map(|r| r.index).collect();
    DominationReport { indices, dominated_indices, n_max: table.n_max, eps_slope, exhaustive: table.exhaustive }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domination::scan::{gap_ratio_scan, DEFAULT_WORD_BUDGET};
    use crate::linalg::Matrix;
    use approx::assert_relative_eq;

    #[test]
    fn diagonal_tuple_is_dominated_at_rate_log_two_thirds() {
        let a = Matrix::diag(&[1.0 / 3.0, 0.5]);
        let t = gap_ratio_scan(&[a.clone(), a], 10, DEFAULT_WORD_BUDGET).unwrap();
        let r = detect_domination(&t, DEFAULT_EPS_SLOPE);
        assert_eq!(r.dominated_indices, vec![1]);
        assert_relative_eq!(r.indices[0].decay_rate, (2.0f64 / 3.0).ln(), epsilon = 1e-10);
        assert_relative_eq!(r.indices[0].constant_estimate, 1.0, epsilon = 1e-10);
    }

    #[test]
    fn conformal_and_swapped_diagonals_are_not_dominated() {
        let t = 0.9f64;
        let r = Matrix::from_rows(&[[t.cos(), -t.sin()], [t.sin(), t.cos()]]).unwrap().scale(0.5);
        let rep = detect_domination(&gap_ratio_scan(&[r], 10, DEFAULT_WORD_BUDGET).unwrap(), DEFAULT_EPS_SLOPE);
        assert!(rep.dominated_indices.is_empty());
        assert_eq!(rep.indices[0].status, DominationStatus::NonDominated);

        let a = Matrix::diag(&[0.5, 0.25]);
        let b = Matrix::diag(&[0.25, 0.5]);
        let rep = detect_domination(&gap_ratio_scan(&[a, b], 10, DEFAULT_WORD_BUDGET).unwrap(), DEFAULT_EPS_SLOPE);
        assert_eq!(rep.indices[0].status, DominationStatus::NonDominated);
    }

    #[test]
    fn short_tables_are_inconclusive() {
        let a = Matrix::diag(&[1.0 / 3.0, 0.5]);
        let rep = detect_domination(&gap_ratio_scan(&[a], 4, DEFAULT_WORD_BUDGET).unwrap(), DEFAULT_EPS_SLOPE);
        assert_eq!(rep.indices[0].status, DominationStatus::Inconclusive);
        assert!(rep.has_inconclusive());
    }

    #[test]
    fn fitted_envelope_dominates_data() {
        let a = Matrix::from_rows(&[[0.5, 0.3], [0.2, 0.4]]).unwrap();
        let b = Matrix::from_rows(&[[0.3, 0.2], [0.1, 0.6]]).unwrap();
        let t = gap_ratio_scan(&[a, b], 12, DEFAULT_WORD_BUDGET).unwrap();
        let rep = detect_domination(&t, DEFAULT_EPS_SLOPE);
        let r = &rep.indices[0];
        assert_eq!(r.status, DominationStatus::Dominated);
        for n in 0..=12 {
            let bound = 1.1 * r.constant_estimate * (r.decay_rate * n as f64).exp();
            assert!(t.max_ratio(1, n) <= bound);
        }
    }
}
