//! Samples from the Furstenberg measure `μ_F` on the flag space.
//!
//! A sample is the flag of fast subspaces `V_j` of the inverse cocycle seen at time 0:
//! a uniformly random flag is carried by `A_{i_0}^{−1} ⋯ A_{i_{n−1}}^{−1}`, applying
//! `A_{i_{n−1}}^{−1}` first, with a QR step after each map. `V_j` has dimension
//! `d − (d_1 + … + d_j)`. The law of the output is `(A_k^{−1})_*`-stationary, which is
//! what [`furstenberg_push`] exercises.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::lyapunov::validate_tuple;
use crate::cocycle::product::random_orthogonal;
use crate::cocycle::weights::{BernoulliWeights, SymbolWord};
use crate::error::{Error, Result};
use crate::linalg::{FlagChain, Matrix};
use crate::stats::stream_rng;
use crate::Scalar;

pub const DEFAULT_FURSTENBERG_ITERATIONS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlagSample<T> {
    pub flag: FlagChain<T>,
    /// Symbols `i_0, …, i_{n−1}` whose inverse maps produced the flag.
    pub word_prefix: SymbolWord,
}

/// Flag dimensions `d − c` for each block boundary `c`, largest first.
pub fn fast_flag_dims(d: usize, cuts: &[usize]) -> Vec<usize> {
    cuts.iter().map(|&c| d - c).collect()
}

fn inverses<T: Scalar>(maps: &[Matrix<T>]) -> Result<Vec<Matrix<T>>> {
    maps.iter().map(|m| m.inverse()).collect()
}

fn check_cuts(d: usize, cuts: &[usize]) -> Result<()> {
    if cuts.is_empty() {
        return Err(Error::Inconclusive {
            reason: "no spectral gap: the Furstenberg flag space is trivial".into(),
            observed_gap: 0.0,
        });
    }
    if cuts.iter().any(|&c| c == 0 || c >= d) || cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("cuts must be strictly increasing within 1..d"));
    }
    Ok(())
}

/// `count` independent samples after `iterations` inverse steps each.
///
/// `cuts` are the block boundaries of the spectrum (see
/// [`LyapunovSpectrum::block_cuts`](crate::cocycle::LyapunovSpectrum::block_cuts));
/// an empty list means there is no gap and the call is inconclusive.
pub fn furstenberg_sample<T: Scalar>(
    maps: &[Matrix<T>],
    weights: &BernoulliWeights<T>,
    cuts: &[usize],
    iterations: usize,
    count: usize,
    seed: u64,
) -> Result<Vec<FlagSample<T>>> {
    let d = validate_tuple(maps, weights)?;
    check_cuts(d, cuts)?;
    let inv = inverses(maps)?;
    let dims = fast_flag_dims(d, cuts);
    (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(seed, i as u64);
            let mut q = random_orthogonal::<T, _>(d, &mut rng);
            let word = weights.sample_word(iterations, &mut rng);
            for &s in word.symbols().iter().rev() {
                q = (&inv[s as usize] * &q).qr().0;
            }
            Ok(FlagSample { flag: FlagChain::from_leading_columns(&q, &dims)?, word_prefix: word })
        })
        .collect()
}

/// One more step of the inverse random walk: each flag `θ` becomes `A_k^{−1} θ` with
/// a fresh symbol `k ~ p` prepended to its word.
pub fn furstenberg_push<T: Scalar>(
    samples: &[FlagSample<T>],
    maps: &[Matrix<T>],
    weights: &BernoulliWeights<T>,
    seed: u64,
) -> Result<Vec<FlagSample<T>>> {
    validate_tuple(maps, weights)?;
    let inv = inverses(maps)?;
    samples
        .par_iter()
        .enumerate()
        .map(|(i, s)| {
            let k = weights.sample_symbol(&mut stream_rng(seed, i as u64));
            Ok(FlagSample { flag: s.flag.image(&inv[k as usize])?, word_prefix: s.word_prefix.prepend(k) })
        })
        .collect()
}

/// Angle in `[0, π)` of a line in `ℝ²`, for one-dimensional statistics of `d = 2` flags.
pub fn line_angle<T: Scalar>(flag: &FlagChain<T>) -> Result<f64> {
    let line = flag
        .member(1)
        .filter(|f| f.ambient_dim() == 2)
        .ok_or_else(|| Error::invalid("line angles need a line in the plane"))?;
    let x = line.frame()[(0, 0)].to_f64_lossy();
    let y = line.frame()[(1, 0)].to_f64_lossy();
    let a = y.atan2(x).rem_euclid(std::f64::consts::PI);
    Ok(if a >= std::f64::consts::PI { 0.0 } else { a })
}
