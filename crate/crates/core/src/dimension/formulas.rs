//! Closed-form dimension formulas: Ledrappier-Young, Lyapunov dimension, and oracles.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cocycle::entropy_of;
use crate::error::{Error, Result};
use crate::Scalar;

/// Inputs of the Ledrappier-Young formula.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionInputs<T> {
    /// Entropy `h` of the Bernoulli weights, in nats.
    pub entropy: T,
    /// Fiber-entropy correction `H`, `0 ≤ H ≤ h`.
    pub fiber_entropy: T,
    /// Exponents `χ_1 ≤ … ≤ χ_d`.
    pub chi: Vec<T>,
    /// `dim μ^T_{V_i^⊥}` for each index in `indices`.
    pub proj_dims: BTreeMap<usize, T>,
    /// Index set `D ⊆ {1, …, d−1}` summed over.
    pub indices: Vec<usize>,
}

fn check_spectrum<T: Scalar>(chi: &[T]) -> Result<()> {
    if chi.is_empty() {
        return Err(Error::invalid("empty spectrum"));
    }
    if chi.iter().any(|&c| !(c > T::zero()) || !c.is_finite()) {
        return Err(Error::invalid("exponents must be positive and finite"));
    }
    if chi.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("exponents must be ascending"));
    }
    Ok(())
}

/// `(h − H)/χ_d + Σ_{i∈D} ((χ_{i+1} − χ_i)/χ_d) · dim μ^T_{V_i^⊥}`.
pub fn ly_dimension<T: Scalar>(inputs: &DimensionInputs<T>) -> Result<T> {
    let chi = &inputs.chi;
    check_spectrum(chi)?;
    let d = chi.len();
    if inputs.fiber_entropy < T::zero() || !inputs.fiber_entropy.is_finite() {
        return Err(Error::invalid("fiber entropy must be a nonnegative number"));
    }
    let top = chi[d - 1];
    let mut total = (inputs.entropy - inputs.fiber_entropy) / top;
    for &i in &inputs.indices {
        if i == 0 || i >= d {
            return Err(Error::invalid(format!("index {i} outside 1..{d}")));
        }
        let p = *inputs.proj_dims.get(&i).ok_or(Error::MissingProjection(i))?;
        total += (chi[i] - chi[i - 1]) / top * p;
    }
    Ok(total)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LyapunovDimension {
    /// The minimum clamped to `[0, d]`.
    pub value: f64,
    pub raw: f64,
    pub clamped: bool,
    /// The `k` (1-based) attaining the minimum.
    pub minimizing_k: usize,
}

/// `min_k {k − 1 + (h − Σ_{i<k} χ_i)/χ_k}` over `k = 1, …, d`, clamped to `[0, d]`.
///
/// The spectrum must be ascending and positive; an empty spectrum gives `0`.
pub fn lyapunov_dimension<T: Scalar>(h: T, chi: &[T]) -> LyapunovDimension {
    let mut best = f64::INFINITY;
    let mut arg = 0;
    let mut partial = T::zero();
    for (k, &c) in chi.iter().enumerate() {
        let v = (T::from_usize_lossy(k) + (h - partial) / c).to_f64_lossy();
        if v < best {
            best = v;
            arg = k + 1;
        }
        partial += c;
    }
    if chi.is_empty() {
        return LyapunovDimension { value: 0.0, raw: 0.0, clamped: false, minimizing_k: 0 };
    }
    let value = best.clamp(0.0, chi.len() as f64);
    LyapunovDimension { value, raw: best, clamped: value != best, minimizing_k: arg }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TelescopingCheck {
    pub lhs: f64,
    pub rhs: f64,
    pub holds: bool,
}

/// Checks the identity
/// `(H⁰ − H^d)/χ_d + Σ_{i=1}^{d−1} ((χ_{i+1} − χ_i)/χ_d) Σ_{k<i} (H^k − H^{k+1})/χ_{k+1}
///  = Σ_{j<d} (H^j − H^{j+1})/χ_{j+1}`
/// to `1e−12` relative to the magnitude of the summands.
pub fn telescoping_identity_check<T: Scalar>(hseq: &[T], chi: &[T]) -> Result<TelescopingCheck> {
    check_spectrum(chi)?;
    let d = chi.len();
    if hseq.len() != d + 1 {
        return Err(Error::DimensionMismatch { expected: d + 1, found: hseq.len() });
    }
    if hseq.windows(2).any(|w| w[0] < w[1]) {
        return Err(Error::invalid("H sequence must be nonincreasing"));
    }
    let step = |k: usize| (hseq[k] - hseq[k + 1]) / chi[k];
    let top = chi[d - 1];
    let mut lhs = (hseq[0] - hseq[d]) / top;
    let mut inner = T::zero();
    for i in 1..d {
        inner += step(i - 1);
        lhs += (chi[i] - chi[i - 1]) / top * inner;
    }
    let mut rhs = T::zero();
    let mut scale = T::zero();
    for j in 0..d {
        rhs += step(j);
        scale += step(j).abs();
    }
    let (lhs, rhs, scale) = (lhs.to_f64_lossy(), rhs.to_f64_lossy(), scale.to_f64_lossy());
    let eps = if T::epsilon().to_f64_lossy() > 1e-10 { 1e3 * T::epsilon().to_f64_lossy() } else { 1e-12 };
    Ok(TelescopingCheck { lhs, rhs, holds: (lhs - rhs).abs() <= eps * scale.max(lhs.abs()).max(f64::MIN_POSITIVE) })
}

/// Closed-form dimension of a Bernoulli measure on a Bedford-McMullen carpet, with its
/// Ledrappier-Young components.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BedfordMcMullen {
    pub dimension: f64,
    pub entropy: f64,
    pub row_entropy: f64,
    /// `(log n, log m)`.
    pub chi: [f64; 2],
    /// `H(row marginal)/log n`.
    pub proj_dim: f64,
}

/// `H(p)/log m + (1/log n − 1/log m)·H(row marginal)` for digits `(column, row)` on an
/// `m × n` grid with `m > n ≥ 2`.
pub fn bedford_mcmullen_closed_form(
    digits: &[(usize, usize)],
    probs: &[f64],
    m: usize,
    n: usize,
) -> Result<BedfordMcMullen> {
    if !(m > n && n >= 2) {
        return Err(Error::invalid("need m > n ≥ 2"));
    }
    if digits.is_empty() || digits.len() != probs.len() {
        return Err(Error::invalid("need one probability per digit"));
    }
    let mut seen = std::collections::BTreeSet::new();
    for &(c, r) in digits {
        if c >= m || r >= n || !seen.insert((c, r)) {
            return Err(Error::invalid(format!("invalid or repeated digit ({c}, {r})")));
        }
    }
    if probs.iter().any(|&p| !(p >= 0.0)) || (probs.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
        return Err(Error::invalid("probabilities must be nonnegative and sum to 1"));
    }
    let mut rows = vec![0.0; n];
    for (&(_, r), &p) in digits.iter().zip(probs) {
        rows[r] += p;
    }
    let entropy = entropy_of(probs);
    let row_entropy = entropy_of(&rows);
    let (ln_m, ln_n) = ((m as f64).ln(), (n as f64).ln());
    Ok(BedfordMcMullen {
        dimension: entropy / ln_m + (1.0 / ln_n - 1.0 / ln_m) * row_entropy,
        entropy,
        row_entropy,
        chi: [ln_n, ln_m],
        proj_dim: row_entropy / ln_n,
    })
}

/// `h / χ` for a self-similar measure under the strong separation condition.
pub fn self_similar_dimension(probs: &[f64], ratios: &[f64]) -> Result<f64> {
    if probs.len() != ratios.len() || probs.is_empty() {
        return Err(Error::invalid("need one ratio per probability"));
    }
    if ratios.iter().any(|&r| !(r > 0.0 && r < 1.0)) {
        return Err(Error::invalid("ratios must lie in (0, 1)"));
    }
    let chi: f64 = probs.iter().zip(ratios).map(|(p, r)| -p * r.ln()).sum();
    Ok(entropy_of(probs) / chi)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EquivalenceVerdict {
    Holds,
    Fails,
    Inconclusive,
}

/// What the equivalence check compares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceInputs {
    pub ly_dim: Option<f64>,
    pub lyapunov_dim: f64,
    /// `None` when `H` is unknown.
    pub fiber_entropy: Option<f64>,
    pub proj_dims: BTreeMap<usize, f64>,
    pub indices: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EquivalenceCheck {
    pub verdict: EquivalenceVerdict,
    /// `|ly_dim − lyapunov_dim|`.
    pub dimension_residual: Option<f64>,
    pub fiber_entropy_residual: Option<f64>,
    /// `|dim μ^T_{V_i^⊥} − min(i, ly_dim)|` per index.
    pub projection_residuals: BTreeMap<usize, f64>,
    pub dimensions_agree: Option<bool>,
    pub conditions_hold: Option<bool>,
    /// Whether both sides of the biconditional came out the same way.
    pub consistent: Option<bool>,
    pub tol: f64,
}

/// The Lyapunov dimension equals the Ledrappier-Young value iff `H = 0` and every
/// projection has full dimension `min(i, dim μ)`. Both sides are evaluated separately;
/// the verdict is theirs when they agree and inconclusive when they do not.
pub fn kaplan_yorke_equivalence_check(inputs: &EquivalenceInputs, tol: f64) -> EquivalenceCheck {
    let mut residuals = BTreeMap::new();
    let mut proj_ok = Some(true);
    for &i in &inputs.indices {
        match (inputs.proj_dims.get(&i), inputs.ly_dim) {
            (Some(&p), Some(ly)) => {
                let r = (p - (i as f64).min(ly)).abs();
                residuals.insert(i, r);
                if r > tol {
                    proj_ok = proj_ok.map(|_| false);
                }
            }
            _ => proj_ok = None,
        }
    }
    let h_res = inputs.fiber_entropy.map(f64::abs);
    let conditions = match (h_res, proj_ok) {
        (Some(h), _) if h > tol => Some(false),
        (_, Some(false)) => Some(false),
        (Some(_), Some(true)) => Some(true),
        _ => None,
    };
    let dim_res = inputs.ly_dim.map(|ly| (ly - inputs.lyapunov_dim).abs());
    let agree = dim_res.map(|r| r <= tol);
    let consistent = agree.zip(conditions).map(|(a, c)| a == c);
    let verdict = match (agree, conditions) {
        (Some(true), Some(true)) => EquivalenceVerdict::Holds,
        (Some(false), Some(false)) => EquivalenceVerdict::Fails,
        _ => EquivalenceVerdict::Inconclusive,
    };
    EquivalenceCheck {
        verdict,
        dimension_residual: dim_res,
        fiber_entropy_residual: h_res,
        projection_residuals: residuals,
        dimensions_agree: agree,
        conditions_hold: conditions,
        consistent,
        tol,
    }
}
