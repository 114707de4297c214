//! Finite-depth estimates of the bundles `F^i(ii)` and `E^i(ii)` of a dominated index,
//! and the splitting subspaces `e^{i_j}` built from them.
//!
//! With `A^{(n)}(ii) = A_{i_{n−1}} ⋯ A_{i_0}`, `F^i` is the span of the `d − i`
//! right-singular directions of `A^{(n)}` with the smallest singular values, so it
//! depends only on the future `i_0 i_1 …` and satisfies `A_{i_0} F^i(ii) = F^i(σii)`.
//! `E^i` is the dominant `i`-dimensional image of the past product
//! `A_{i_{−1}} ⋯ A_{i_{−n}}`.

use serde::{Deserialize, Serialize};

use crate::cocycle::product::{ambient_dim, factor_product, ScaledProduct};
use crate::cocycle::weights::{SymbolWord, TwoSidedWord};
use crate::domination::detect::DominationReport;
use crate::error::{Error, Result};
use crate::linalg::{
    exterior_power, principal_angle_distance, principal_angles, subspace_intersection, svd, Matrix, SubspaceFrame,
};
use crate::Scalar;

/// Default target accuracy (principal-angle sine) for bundle estimates.
pub const DEFAULT_BUNDLE_TOL: f64 = 1e-4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BundleEstimate<T> {
    pub index: usize,
    /// `F^i`, dimension `d − i`.
    pub f: SubspaceFrame<T>,
    /// `E^i`, dimension `i`.
    pub e: SubspaceFrame<T>,
    /// Smallest principal angle between `F` and `E` (radians).
    pub angle_lower_bound: f64,
    /// `sin∠(A_{i_0} F(ii), F(σii))`.
    pub equivariance_residual: f64,
    /// `‖A^{(n)}|F‖ / α_{i+1}(A^{(n)})` for `n = 1..=depth`.
    pub growth_ratios: Vec<f64>,
    /// Maximum of `growth_ratios`.
    pub growth_constant: f64,
    /// `sin∠(F at depth n, F at depth n/2)`.
    pub cauchy_difference: f64,
    /// `log(α_i/α_{i+1})` of `A^{(n)}` at full depth.
    pub log_gap: f64,
    pub depth: usize,
    pub word: TwoSidedWord,
}

impl<T: Scalar> BundleEstimate<T> {
    /// Largest growth ratio over lengths `1..=n`.
    pub fn growth_constant_up_to(&self, n: usize) -> f64 {
        self.growth_ratios[..n.min(self.growth_ratios.len())].iter().copied().fold(0.0, f64::max)
    }
}

/// `(F^i, log gap)` from the first `depth` future symbols.
fn stable_space<T: Scalar>(
    maps: &[Matrix<T>],
    future: &[u16],
    i: usize,
    depth: usize,
    d: usize,
) -> Result<(SubspaceFrame<T>, T)> {
    // Right-singular structure of A_{i_{n−1}}⋯A_{i_0} is the left structure of its
    // transpose A_{i_0}ᵀ⋯A_{i_{n−1}}ᵀ.
    let transposed: Vec<Matrix<T>> = future[..depth].iter().map(|&s| maps[s as usize].transpose()).collect();
    let refs: Vec<&Matrix<T>> = transposed.iter().collect();
    let f = factor_product(&refs, d);
    let idx: Vec<usize> = (i..d).collect();
    Ok((SubspaceFrame::from_orthonormal(f.basis.select_columns(&idx))?, -f.log_gap(i)))
}

fn unstable_space<T: Scalar>(
    maps: &[Matrix<T>],
    past: &[u16],
    i: usize,
    depth: usize,
    d: usize,
) -> Result<SubspaceFrame<T>> {
    let refs: Vec<&Matrix<T>> = past[..depth].iter().map(|&s| &maps[s as usize]).collect();
    let f = factor_product(&refs, d);
    SubspaceFrame::from_orthonormal(f.basis.leading_columns(i))
}

/// `log α_{i+1}(A^{(n)})` and `log ‖A^{(n)}|F‖` for `n = 1..=depth`, both accumulated in
/// scaled form.
///
/// `A^{(n)}|F` is tracked through the equivariant frames `F(σ^k ii)`, each re-estimated
/// from the remaining future and used as the basis of the next restriction. Pushing one
/// frame forward instead would amplify its rounding error by `α_{i+1}/α_i` per step.
fn growth_ratios<T: Scalar>(
    maps: &[Matrix<T>],
    future: &[u16],
    f: &SubspaceFrame<T>,
    i: usize,
    depth: usize,
    d: usize,
) -> Result<Vec<f64>> {
    let orders: Vec<usize> = (i..=i + 1).filter(|&p| p < d).collect();
    let compounds: Vec<Vec<Matrix<T>>> = maps
        .iter()
        .map(|m| orders.iter().map(|&p| exterior_power(m, p)).collect::<Result<Vec<_>>>())
        .collect::<Result<_>>()?;
    let log_dets: Vec<T> = maps.iter().map(|m| m.det().map(|x| x.abs().ln())).collect::<Result<_>>()?;

    let mut comp: Vec<ScaledProduct<T>> =
        orders.iter().map(|&p| ScaledProduct::identity(crate::linalg::binomial(d, p))).collect();
    let mut log_det = T::zero();
    let mut q = f.frame().clone();
    let mut restricted = ScaledProduct::identity(d - i);
    let mut out = Vec::with_capacity(depth);
    for (k, &s) in future[..depth].iter().enumerate() {
        let s = s as usize;
        for (c, m) in comp.iter_mut().zip(&compounds[s]) {
            *c = c.mul_left(m);
        }
        log_det += log_dets[s];
        let image = &maps[s] * &q;
        let ahead = (future.len() - k - 1).min(depth);
        let next = if ahead >= 1 {
            stable_space(maps, &future[k + 1..], i, ahead, d)?.0.frame().clone()
        } else {
            image.qr().0
        };
        restricted = restricted.mul_left(&(&next.transpose() * &image));
        q = next;

        let l_i = comp[0].log_norm();
        let l_next = if i + 1 < d { comp[1].log_norm() } else { log_det };
        let log_alpha = l_next - l_i;
        out.push((restricted.log_norm() - log_alpha).to_f64_lossy().exp());
    }
    Ok(out)
}

/// Estimates the bundles of a dominated index `i` along a two-sided word, with the
/// default accuracy target [`DEFAULT_BUNDLE_TOL`].
pub fn strong_stable_bundle<T: Scalar>(
    maps: &[Matrix<T>],
    word: &TwoSidedWord,
    i: usize,
    depth: usize,
    report: &DominationReport,
) -> Result<BundleEstimate<T>> {
    strong_stable_bundle_with_tol(maps, word, i, depth, report, DEFAULT_BUNDLE_TOL)
}

/// As [`strong_stable_bundle`]; the depth-`n` singular gap must reach
/// `log(10/tol)` or the call is inconclusive.
pub fn strong_stable_bundle_with_tol<T: Scalar>(
    maps: &[Matrix<T>],
    word: &TwoSidedWord,
    i: usize,
    depth: usize,
    report: &DominationReport,
    tol: f64,
) -> Result<BundleEstimate<T>> {
    let d = ambient_dim(maps)?;
    if i == 0 || i >= d {
        return Err(Error::invalid(format!("index {i} outside 1..{d}")));
    }
    if !report.is_dominated(i) {
        return Err(Error::NotDominated(i));
    }
    word.future.validate(maps.len())?;
    word.past.validate(maps.len())?;
    if depth < 2 || word.future.len() <= depth || word.past.len() < depth {
        return Err(Error::invalid(format!(
            "depth {depth} needs at least {} future and {depth} past symbols",
            depth + 1
        )));
    }
    let future = word.future.symbols();
    let (f, gap) = stable_space(maps, future, i, depth, d)?;
    if gap.to_f64_lossy() < (10.0 / tol).ln() {
        return Err(Error::Inconclusive {
            reason: format!("singular gap at index {i} too small at depth {depth}"),
            observed_gap: gap.to_f64_lossy() / depth as f64,
        });
    }
    let e = unstable_space(maps, word.past.symbols(), i, depth, d)?;

    let (f_shift, _) = stable_space(maps, &future[1..], i, depth, d)?;
    let pushed = f.image(&maps[future[0] as usize])?;
    let equivariance_residual = principal_angle_distance(&pushed, &f_shift)?.to_f64_lossy();
    let (f_half, _) = stable_space(maps, future, i, depth / 2, d)?;
    let cauchy_difference = principal_angle_distance(&f, &f_half)?.to_f64_lossy();
    let angle_lower_bound = principal_angles(&f, &e)?.first().map(|a| a.to_f64_lossy()).unwrap_or(0.0);

    let growth = growth_ratios(maps, future, &f, i, depth, d)?;
    let growth_constant = growth.iter().copied().fold(0.0, f64::max);
    Ok(BundleEstimate {
        index: i,
        f,
        e,
        angle_lower_bound,
        equivariance_residual,
        growth_ratios: growth,
        growth_constant,
        cauchy_difference,
        log_gap: gap.to_f64_lossy(),
        depth,
        word: word.clone(),
    })
}

/// The splitting `ℝ^d = e^{i_1} ⊕ … ⊕ e^{i_{k+1}}` from bundles of the dominated
/// indices `i_1 < … < i_k`, all estimated along the same word.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Splitting<T> {
    pub spaces: Vec<SubspaceFrame<T>>,
    /// Smallest principal angle between any two of the spaces (radians).
    pub min_pairwise_angle: f64,
    /// Smallest singular value of the stacked frames; zero iff the sum is not direct.
    pub direct_sum_margin: f64,
}

/// `e^{i_1} = E^{i_1}`, `e^{i_j} = E^{i_j} ∩ F^{i_{j−1}}`, and the last space `F^{i_k}`.
pub fn splitting_subspaces<T: Scalar>(bundles: &[BundleEstimate<T>], tol: f64) -> Result<Splitting<T>> {
    let first = bundles.first().ok_or_else(|| Error::invalid("no bundles given"))?;
    let d = first.f.ambient_dim();
    if bundles.windows(2).any(|w| w[0].index >= w[1].index) {
        return Err(Error::invalid("bundles must be sorted by strictly increasing index"));
    }
    let mut spaces = vec![first.e.clone()];
    for pair in bundles.windows(2) {
        let expected = pair[1].index - pair[0].index;
        let meet = subspace_intersection(&pair[1].e, &pair[0].f, T::lit(tol))?;
        match meet {
            Some(s) if s.dim() == expected => spaces.push(s),
            other => {
                return Err(Error::Inconsistent(format!(
                    "E^{} ∩ F^{} has dimension {}, expected {expected}",
                    pair[1].index,
                    pair[0].index,
                    other.map(|s| s.dim()).unwrap_or(0)
                )))
            }
        }
    }
    spaces.push(bundles.last().expect("non-empty").f.clone());

    let mut min_pairwise_angle = f64::INFINITY;
    for (a, s) in spaces.iter().enumerate() {
        for t in &spaces[a + 1..] {
            let angle = principal_angles(s, t)?.first().map(|x| x.to_f64_lossy()).unwrap_or(0.0);
            min_pairwise_angle = min_pairwise_angle.min(angle);
        }
    }
    let mut stacked = spaces[0].frame().clone();
    for s in &spaces[1..] {
        stacked = stacked.hstack(s.frame())?;
    }
    if stacked.cols() != d {
        return Err(Error::Inconsistent(format!("splitting dimensions sum to {}, not {d}", stacked.cols())));
    }
    let direct_sum_margin = svd(&stacked).values.last().map(|x| x.to_f64_lossy()).unwrap_or(0.0);
    Ok(Splitting { spaces, min_pairwise_angle, direct_sum_margin })
}

/// Two-sided word with `n` past and `n + extra` future symbols from a one-sided word.
pub fn two_sided_from(word: &SymbolWord, past_len: usize) -> TwoSidedWord {
    let s = word.symbols();
    let past_len = past_len.min(s.len());
    let mut past: Vec<u16> = s[..past_len].to_vec();
    past.reverse();
    TwoSidedWord::new(SymbolWord::new(past), SymbolWord::new(s[past_len..].to_vec()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cocycle::BernoulliWeights;
    use crate::domination::detect::{detect_domination, DEFAULT_EPS_SLOPE};
    use crate::domination::scan::{gap_ratio_scan, DEFAULT_WORD_BUDGET};
    use crate::stats::stream_rng;

    fn report(maps: &[Matrix<f64>]) -> DominationReport {
        detect_domination(&gap_ratio_scan(maps, 8, DEFAULT_WORD_BUDGET).unwrap(), DEFAULT_EPS_SLOPE)
    }

    fn random_word(n_symbols: usize, len: usize, seed: u64) -> TwoSidedWord {
        let w = BernoulliWeights::<f64>::uniform(n_symbols).unwrap();
        two_sided_from(&w.sample_word(2 * len + 2, &mut stream_rng(seed, 0)), len)
    }

    #[test]
    fn diagonal_bundles_are_coordinate_axes() {
        let maps = vec![Matrix::diag(&[1.0 / 3.0, 0.5]), Matrix::diag(&[1.0 / 3.0, 0.5])];
        let rep = report(&maps);
        let b = strong_stable_bundle(&maps, &random_word(2, 60, 1), 1, 40, &rep).unwrap();
        let e1 = SubspaceFrame::coordinate(2, &[0]).unwrap();
        let e2 = SubspaceFrame::coordinate(2, &[1]).unwrap();
        assert!(principal_angle_distance(&b.f, &e1).unwrap() < 1e-10);
        assert!(principal_angle_distance(&b.e, &e2).unwrap() < 1e-10);
        assert!((b.growth_constant - 1.0).abs() < 1e-9);
        assert!((b.angle_lower_bound - std::f64::consts::FRAC_PI_2).abs() < 1e-10);
    }

    #[test]
    fn refuses_non_dominated_index() {
        let maps = vec![Matrix::diag(&[0.5, 0.25]), Matrix::diag(&[0.25, 0.5])];
        let rep = report(&maps);
        let err = strong_stable_bundle(&maps, &random_word(2, 30, 2), 1, 20, &rep).unwrap_err();
        assert_eq!(err, Error::NotDominated(1));
    }

    #[test]
    fn positive_tuple_bundles_respect_the_cone() {
        let a = Matrix::from_rows(&[[0.5, 0.2], [0.2, 0.3]]).unwrap();
        let b = Matrix::from_rows(&[[0.3, 0.25], [0.1, 0.5]]).unwrap();
        let maps = vec![a, b];
        let rep = report(&maps);
        assert_eq!(rep.dominated_indices, vec![1]);
        let est = strong_stable_bundle(&maps, &random_word(2, 60, 3), 1, 40, &rep).unwrap();
        let (ex, ey) = (est.e.frame()[(0, 0)], est.e.frame()[(1, 0)]);
        assert!(ex * ey > 0.0, "E should lie in the open positive cone");
        let (fx, fy) = (est.f.frame()[(0, 0)], est.f.frame()[(1, 0)]);
        assert!(fx * fy < 0.0, "F should avoid the closed positive cone");
        assert!(est.equivariance_residual < 1e-4);
        assert!(est.cauchy_difference < 1e-3);
    }

    #[test]
    fn growth_ratios_stay_bounded_for_a_strong_gap() {
        // Gap rate near 1.5 per step: pushing a rounded frame forward would leak by e^60.
        let a = Matrix::from_rows(&[[0.6, 0.3], [0.05, 0.04]]).unwrap();
        let b = Matrix::from_rows(&[[0.5, 0.1], [0.2, 0.06]]).unwrap();
        let maps = vec![a, b];
        let rep = report(&maps);
        assert_eq!(rep.dominated_indices, vec![1]);
        let est = strong_stable_bundle(&maps, &random_word(2, 60, 4), 1, 40, &rep).unwrap();
        let (c20, c40) = (est.growth_constant_up_to(20), est.growth_constant_up_to(40));
        assert!(c40.is_finite() && c40 / c20 < 1.5, "{c20} {c40}");
    }

    #[test]
    fn diagonal_splitting_in_three_dimensions() {
        let a = Matrix::diag(&[0.25, 1.0 / 3.0, 0.5]);
        let maps = vec![a.clone(), a];
        let rep = report(&maps);
        assert_eq!(rep.dominated_indices, vec![1, 2]);
        let w = random_word(2, 80, 5);
        let bundles: Vec<_> = [1, 2].iter().map(|&i| strong_stable_bundle(&maps, &w, i, 60, &rep).unwrap()).collect();
        let s = splitting_subspaces(&bundles, 1e-6).unwrap();
        let axes = [2, 1, 0];
        for (space, &ax) in s.spaces.iter().zip(&axes) {
            let target = SubspaceFrame::coordinate(3, &[ax]).unwrap();
            assert!(principal_angle_distance(space, &target).unwrap() < 1e-8);
        }
        assert!((s.direct_sum_margin - 1.0).abs() < 1e-8);
    }
}
