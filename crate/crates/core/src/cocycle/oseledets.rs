//! Finite-depth estimates of the Oseledets flag `E^1(ii) ⊂ … ⊂ E^{p−1}(ii)`.
//!
//! `E^k` is the span of the `k` slowest-growing directions of the inverse product
//! `(A_{i_0} ⋯ A_{i_{n−1}})^{−1}`, i.e. the dominant `k`-dimensional image subspace of
//! `A_{i_0} ⋯ A_{i_{n−1}}`. The forward product is factored with [`factor_product`] so
//! the subspace stays accurate even when the singular values span hundreds of
//! orders of magnitude.

use crate::cocycle::product::{ambient_dim, factor_product};
use crate::cocycle::weights::SymbolWord;
use crate::error::{Error, Result};
use crate::linalg::{FlagChain, Matrix};
use crate::Scalar;

/// Default accuracy target for the estimated subspaces (principal-angle sine).
pub const OSELEDETS_TOL: f64 = 1e-8;

/// Estimated flag together with the singular-value data that certified it.
#[derive(Debug, Clone)]
pub struct OseledetsEstimate<T> {
    /// Members `E^{c}` for each cut `c`, largest dimension first.
    pub flag: FlagChain<T>,
    /// `log σ_c − log σ_{c+1}` of the depth-`n` product, per cut.
    pub log_gaps: Vec<T>,
    /// Predicted principal-angle error `≈ exp(−gap)`, per cut.
    pub error_bounds: Vec<T>,
    pub depth: usize,
}

/// Estimates `E^c(ii)` for every `c` in `cuts` from the first `depth` symbols of `word`.
///
/// The angle error of a dominant subspace decays like `σ_{c+1}/σ_c`; each cut must
/// reach `10 · tol` or better, otherwise the estimate is inconclusive and the error
/// carries the observed gap per symbol.
pub fn oseledets_fast_flag<T: Scalar>(
    maps: &[Matrix<T>],
    word: &SymbolWord,
    depth: usize,
    cuts: &[usize],
    tol: f64,
) -> Result<OseledetsEstimate<T>> {
    let d = ambient_dim(maps)?;
    word.validate(maps.len())?;
    if depth == 0 || depth > word.len() {
        return Err(Error::invalid(format!("depth {depth} must lie in 1..={}", word.len())));
    }
    if cuts.iter().any(|&c| c == 0 || c >= d) || cuts.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::invalid("cuts must be strictly increasing within 1..d"));
    }
    let factors: Vec<&Matrix<T>> = word.symbols()[..depth].iter().map(|&s| &maps[s as usize]).collect();
    let f = factor_product(&factors, d);
    let n = T::from_usize_lossy(depth);

    if cuts.is_empty() {
        let best = (1..d).map(|k| -f.log_gap(k)).fold(T::zero(), T::max);
        return Err(Error::Inconclusive {
            reason: "no spectral gap to resolve".into(),
            observed_gap: (best / n).to_f64_lossy(),
        });
    }

    let required = (10.0 / tol).ln();
    let mut log_gaps = Vec::with_capacity(cuts.len());
    for &c in cuts {
        let gap = -f.log_gap(c);
        if gap.to_f64_lossy() < required {
            return Err(Error::Inconclusive {
                reason: format!("gap at index {c} too small at depth {depth}"),
                observed_gap: (gap / n).to_f64_lossy(),
            });
        }
        log_gaps.push(gap);
    }
    let dims: Vec<usize> = cuts.iter().rev().copied().collect();
    let flag = FlagChain::from_leading_columns(&f.basis, &dims)?;
    log_gaps.reverse();
    let error_bounds = log_gaps.iter().map(|&g| (-g).exp()).collect();
    Ok(OseledetsEstimate { flag, log_gaps, error_bounds, depth })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::weights::BernoulliWeights;
    use crate::linalg::{principal_angle_distance, SubspaceFrame};
    use crate::stats::stream_rng;

    #[test]
    fn diagonal_flag_is_weak_axis() {
        let a = Matrix::diag(&[1.0 / 3.0, 0.5]);
        let maps = vec![a.clone(), a];
        let word = SymbolWord::new([0, 1].repeat(50));
        let e = oseledets_fast_flag(&maps, &word, 100, &[1], OSELEDETS_TOL).unwrap();
        let e2 = SubspaceFrame::coordinate(2, &[1]).unwrap();
        assert!(principal_angle_distance(&e.flag.frames()[0], &e2).unwrap() < 1e-8);
    }

    #[test]
    fn conformal_is_inconclusive() {
        let t: f64 = 0.3;
        let r = Matrix::from_rows(&[[t.cos(), -t.sin()], [t.sin(), t.cos()]]).unwrap().scale(0.5);
        let word = SymbolWord::new(vec![0; 50]);
        match oseledets_fast_flag(std::slice::from_ref(&r), &word, 50, &[1], OSELEDETS_TOL) {
            Err(Error::Inconclusive { observed_gap, .. }) => assert!(observed_gap.abs() < 1e-10),
            other => panic!("expected inconclusive, got {other:?}"),
        }
        assert!(matches!(oseledets_fast_flag(&[r], &word, 50, &[], OSELEDETS_TOL), Err(Error::Inconclusive { .. })));
    }

    #[test]
    fn shallow_depth_is_inconclusive() {
        let maps = vec![Matrix::diag(&[1.0 / 3.0, 0.5])];
        let word = SymbolWord::new(vec![0; 10]);
        assert!(matches!(oseledets_fast_flag(&maps, &word, 10, &[1], OSELEDETS_TOL), Err(Error::Inconclusive { .. })));
    }

    #[test]
    fn equivariance_under_shift() {
        let a = Matrix::from_rows(&[[0.5, 0.3, 0.1], [0.2, 0.4, 0.2], [0.1, 0.2, 0.3]]).unwrap();
        let b = Matrix::from_rows(&[[0.3, 0.1, 0.0], [0.2, 0.5, 0.1], [0.1, 0.3, 0.4]]).unwrap();
        let maps = vec![a, b];
        let w = BernoulliWeights::<f64>::uniform(2).unwrap();
        let word = w.sample_word(400, &mut stream_rng(4, 0));
        let here = oseledets_fast_flag(&maps, &word, 300, &[1, 2], OSELEDETS_TOL).unwrap();
        let there = oseledets_fast_flag(&maps, &word.shift(), 299, &[1, 2], OSELEDETS_TOL).unwrap();
        let inv = maps[word.symbols()[0] as usize].inverse().unwrap();
        let pushed = here.flag.image(&inv).unwrap();
        for (x, y) in pushed.frames().iter().zip(there.flag.frames()) {
            assert!(principal_angle_distance(x, y).unwrap() < 1e-6);
        }
        assert_eq!(here.flag.dims(), vec![2, 1]);
    }
}
