//! Lyapunov spectrum of the Bernoulli matrix cocycle.
//!
//! Each trial propagates a random orthonormal `d`-frame through an i.i.d. word and
//! accumulates `log |R_jj|` from periodic QR steps. The sum of the first `p` terms grows
//! like `log ‖∧^p P_n‖`, so `χ_1 + … + χ_p ≈ −(1/n) Σ_{j≤p} log |R_jj|`; the exponents
//! follow by differencing. The word is applied newest-on-the-left, which produces
//! the reversed product `A_{i_{n−1}} ⋯ A_{i_0}`; for i.i.d. symbols it has the same
//! law as `A_{i_0} ⋯ A_{i_{n−1}}`, so the estimator is unchanged.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::product::{ambient_dim, propagate_frame, random_orthogonal};
use crate::cocycle::weights::{BernoulliWeights, SymbolWord};
use crate::error::{Error, Result};
use crate::linalg::{check_contractive_invertible, exterior_power, Matrix, DET_EPS};
use crate::stats;
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LyapunovOptions {
    pub steps: usize,
    pub trials: usize,
    /// Number of multiplications between QR re-orthonormalizations.
    pub renorm_interval: usize,
    /// Exponents closer than this are merged into one block. `None` means
    /// `0.05 · mean(χ)`.
    pub gap_threshold: Option<f64>,
}

impl Default for LyapunovOptions {
    fn default() -> Self {
        Self { steps: 10_000, trials: 20, renorm_interval: 10, gap_threshold: None }
    }
}

/// Estimated exponents `0 < χ_1 ≤ … ≤ χ_d` in nats per symbol.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovSpectrum<T> {
    pub chi: Vec<T>,
    /// Per-exponent standard error across trials; `None` with a single trial.
    pub stderr: Option<Vec<T>>,
    /// Mean of `χ_1 + … + χ_p` for `p = 1..=d`.
    pub partial_sums: Vec<T>,
    pub partial_sum_stderr: Option<Vec<T>>,
    /// Sizes `d_1, …, d_p` of the blocks of (numerically) equal exponents.
    pub multiplicities: Vec<usize>,
    pub gap_threshold: T,
    /// Per-trial partial sums, in trial order.
    pub trial_partial_sums: Vec<Vec<T>>,
    pub steps: usize,
}

impl<T: Scalar> LyapunovSpectrum<T> {
    pub fn dim(&self) -> usize {
        self.chi.len()
    }

    pub fn is_simple(&self) -> bool {
        self.multiplicities.iter().all(|&m| m == 1)
    }

    /// Block boundaries `d_1, d_1 + d_2, …` strictly inside `1..d`.
    pub fn block_cuts(&self) -> Vec<usize> {
        cuts_from_multiplicities(&self.multiplicities)
    }

    /// Standard error of `Σ χ_i` (the last partial sum).
    pub fn total_stderr(&self) -> Option<T> {
        self.partial_sum_stderr.as_ref().and_then(|s| s.last().copied())
    }
}

/// Cumulative block sizes, excluding the full dimension.
pub fn cuts_from_multiplicities(mult: &[usize]) -> Vec<usize> {
    let mut acc = 0;
    let mut cuts = Vec::new();
    for &m in mult.iter().take(mult.len().saturating_sub(1)) {
        acc += m;
        cuts.push(acc);
    }
    cuts
}

/// Groups ascending exponents into blocks whose consecutive gaps are below `threshold`.
pub fn detect_multiplicities<T: Scalar>(chi: &[T], threshold: T) -> Vec<usize> {
    let mut blocks = Vec::new();
    let mut current = 0usize;
    for (i, _) in chi.iter().enumerate() {
        current += 1;
        let split = i + 1 == chi.len() || chi[i + 1] - chi[i] >= threshold;
        if split {
            blocks.push(current);
            current = 0;
        }
    }
    blocks
}

/// `−Σ_k p_k log |det A_k|`, the value `Σ χ_i` must match.
pub fn expected_exponent_sum<T: Scalar>(maps: &[Matrix<T>], weights: &BernoulliWeights<T>) -> Result<T> {
    let mut s = T::zero();
    for (m, &p) in maps.iter().zip(weights.probabilities()) {
        if p > T::zero() {
            s -= p * m.det()?.abs().ln();
        }
    }
    Ok(s)
}

pub(crate) fn validate_tuple<T: Scalar>(maps: &[Matrix<T>], weights: &BernoulliWeights<T>) -> Result<usize> {
    let d = ambient_dim(maps)?;
    if weights.len() != maps.len() {
        return Err(Error::DimensionMismatch { expected: maps.len(), found: weights.len() });
    }
    for m in maps {
        check_contractive_invertible(m, T::lit(DET_EPS))?;
    }
    Ok(d)
}

pub fn lyapunov_spectrum<T: Scalar>(
    maps: &[Matrix<T>],
    weights: &BernoulliWeights<T>,
    opts: &LyapunovOptions,
    seed: u64,
) -> Result<LyapunovSpectrum<T>> {
    let d = validate_tuple(maps, weights)?;
    if opts.steps < 100 {
        return Err(Error::invalid(format!("need at least 100 steps, got {}", opts.steps)));
    }
    if opts.trials == 0 {
        return Err(Error::invalid("need at least one trial"));
    }

    let trial_partial_sums: Vec<Vec<T>> = (0..opts.trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = stats::stream_rng(seed, trial as u64);
            let start = random_orthogonal::<T, _>(d, &mut rng);
            let word = weights.sample_word(opts.steps, &mut rng);
            let (_, log_r) = propagate_frame(maps, word.symbols(), start, opts.renorm_interval);
            let n = T::from_usize_lossy(opts.steps);
            let mut acc = T::zero();
            log_r
                .iter()
                .map(|&l| {
                    acc -= l / n;
                    acc
                })
                .collect()
        })
        .collect();

    let column = |p: usize| -> Vec<f64> { trial_partial_sums.iter().map(|t| t[p].to_f64_lossy()).collect() };
    let per_exponent = |p: usize| -> Vec<f64> {
        trial_partial_sums.iter().map(|t| (t[p] - if p == 0 { T::zero() } else { t[p - 1] }).to_f64_lossy()).collect()
    };

    let partial_sums: Vec<T> = (0..d).map(|p| T::lit(stats::mean(&column(p)))).collect();
    let chi: Vec<T> = (0..d).map(|p| T::lit(stats::mean(&per_exponent(p)))).collect();
    let (stderr, partial_sum_stderr) = if opts.trials > 1 {
        (
            Some((0..d).map(|p| T::lit(stats::std_error(&per_exponent(p)).unwrap_or(0.0))).collect()),
            Some((0..d).map(|p| T::lit(stats::std_error(&column(p)).unwrap_or(0.0))).collect()),
        )
    } else {
        (None, None)
    };

    let mean_chi = chi.iter().copied().sum::<T>() / T::from_usize_lossy(d);
    let gap_threshold = match opts.gap_threshold {
        Some(g) => T::lit(g),
        None => T::lit(0.05) * mean_chi,
    };
    let multiplicities = detect_multiplicities(&chi, gap_threshold);

    Ok(LyapunovSpectrum {
        chi,
        stderr,
        partial_sums,
        partial_sum_stderr,
        multiplicities,
        gap_threshold,
        trial_partial_sums,
        steps: opts.steps,
    })
}

/// Independent estimate of `χ_1 + … + χ_p` along one word: a random vector of
/// `∧^p ℝ^d` is pushed through the compound matrices `A^[p]` and its log-growth is
/// averaged. Used to cross-check the frame-propagation estimator.
pub fn exterior_growth_rate<T: Scalar>(maps: &[Matrix<T>], word: &SymbolWord, p: usize, start: &[T]) -> Result<T> {
    let compounds = maps.iter().map(|m| exterior_power(m, p)).collect::<Result<Vec<_>>>()?;
    word.validate(maps.len())?;
    if word.is_empty() {
        return Err(Error::invalid("empty word"));
    }
    let mut v = start.to_vec();
    let mut log_growth = T::zero();
    for &s in word.symbols() {
        v = compounds[s as usize].mul_vec(&v)?;
        let n = crate::linalg::matrix::norm(&v);
        log_growth += n.ln();
        v.iter_mut().for_each(|x| *x /= n);
    }
    Ok(-log_growth / T::from_usize_lossy(word.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn deterministic_diagonal_cocycle() {
        let a = Matrix::diag(&[1.0 / 3.0, 0.5]);
        let w = BernoulliWeights::new(vec![0.3, 0.7]).unwrap();
        let opts = LyapunovOptions { steps: 10_000, trials: 4, ..Default::default() };
        let s = lyapunov_spectrum(&[a.clone(), a], &w, &opts, 1).unwrap();
        assert!((s.chi[0] - 2f64.ln()).abs() < 0.01, "{:?}", s.chi);
        assert!((s.chi[1] - 3f64.ln()).abs() < 0.01, "{:?}", s.chi);
        assert_eq!(s.multiplicities, vec![1, 1]);
    }

    #[test]
    fn swapped_diagonals_merge_into_one_block() {
        let a = Matrix::diag(&[0.5, 0.25]);
        let b = Matrix::diag(&[0.25, 0.5]);
        let w = BernoulliWeights::uniform(2).unwrap();
        let opts = LyapunovOptions { steps: 20_000, trials: 10, ..Default::default() };
        let s = lyapunov_spectrum(&[a, b], &w, &opts, 9).unwrap();
        let expected = 1.5 * 2f64.ln();
        assert!((s.chi[0] - expected).abs() < 0.02, "{:?}", s.chi);
        assert!((s.chi[1] - expected).abs() < 0.02, "{:?}", s.chi);
        assert_eq!(s.multiplicities, vec![2]);
        assert!(s.block_cuts().is_empty());
    }

    #[test]
    fn conformal_map_has_double_exponent() {
        let t: f64 = 0.7;
        let r = Matrix::from_rows(&[[t.cos(), -t.sin()], [t.sin(), t.cos()]]).unwrap().scale(0.5);
        let w = BernoulliWeights::uniform(1).unwrap();
        let s = lyapunov_spectrum(&[r], &w, &LyapunovOptions { trials: 3, ..Default::default() }, 2).unwrap();
        assert_relative_eq!(s.chi[0], 2f64.ln(), epsilon = 1e-3);
        assert_relative_eq!(s.chi[1], 2f64.ln(), epsilon = 1e-3);
        assert_eq!(s.multiplicities, vec![2]);
    }

    #[test]
    fn single_trial_has_no_error_bars() {
        let a = Matrix::diag(&[0.4, 0.2]);
        let w = BernoulliWeights::uniform(1).unwrap();
        let s =
            lyapunov_spectrum(&[a], &w, &LyapunovOptions { trials: 1, steps: 200, ..Default::default() }, 0).unwrap();
        assert!(s.stderr.is_none() && s.partial_sum_stderr.is_none());
    }

    #[test]
    fn rejects_bad_input() {
        let w = BernoulliWeights::uniform(1).unwrap();
        let opts = LyapunovOptions::default();
        assert!(lyapunov_spectrum(&[Matrix::diag(&[1.2, 0.2])], &w, &opts, 0).is_err());
        assert!(lyapunov_spectrum(&[Matrix::diag(&[0.5, 0.0])], &w, &opts, 0).is_err());
        let short = LyapunovOptions { steps: 10, ..Default::default() };
        assert!(lyapunov_spectrum(&[Matrix::diag(&[0.5, 0.2])], &w, &short, 0).is_err());
    }

    #[test]
    fn multiplicity_grouping() {
        assert_eq!(detect_multiplicities(&[1.0, 1.01, 2.0], 0.05), vec![2, 1]);
        assert_eq!(detect_multiplicities(&[1.0, 2.0, 3.0], 0.05), vec![1, 1, 1]);
        assert_eq!(cuts_from_multiplicities(&[1, 2, 1]), vec![1, 3]);
    }

    #[test]
    fn seeded_runs_are_bitwise_identical() {
        let a = Matrix::from_rows(&[[0.5, 0.2], [0.1, 0.3]]).unwrap();
        let b = Matrix::from_rows(&[[0.2, -0.1], [0.3, 0.6]]).unwrap();
        let w = BernoulliWeights::new(vec![0.4, 0.6]).unwrap();
        let opts = LyapunovOptions { steps: 500, trials: 6, ..Default::default() };
        let x = lyapunov_spectrum(&[a.clone(), b.clone()], &w, &opts, 77).unwrap();
        let y = lyapunov_spectrum(&[a, b], &w, &opts, 77).unwrap();
        assert_eq!(x, y);
    }
}
