//! Extremes over words of the singular-value gap ratios `α_{i+1}(A_w)/α_i(A_w)`.
//!
//! Ratios come from compound norms, `log α_{i+1} − log α_i = L_{i+1} − 2L_i + L_{i−1}`
//! with `L_p = log ‖∧^p A_w‖`, so tiny singular values are never read off a single
//! SVD. All words of length `≤ n_max` are enumerated depth first and every
//! prefix product is shared by its whole subtree.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::product::{ambient_dim, ScaledProduct};
use crate::error::{Error, Result};
use crate::linalg::{exterior_power, Matrix};
use crate::stats::stream_rng;
use crate::Scalar;

/// Default cap on the number of word products an exhaustive scan may form.
pub const DEFAULT_WORD_BUDGET: u128 = 1_000_000;

/// `max_log_ratio[i − 1][n]` is `max_{|w| = n} log(α_{i+1}(A_w)/α_i(A_w))`; `min_log_ratio`
/// is the matching minimum. Row `n = 0` is the identity (`log 1 = 0`).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GapRatioTable {
    pub d: usize,
    pub n_max: usize,
    pub max_log_ratio: Vec<Vec<f64>>,
    pub min_log_ratio: Vec<Vec<f64>>,
    /// Number of word products formed (excluding the empty word).
    pub words_examined: u128,
    /// Whether the maxima are exact over all words, or Monte-Carlo lower bounds.
    pub exhaustive: bool,
}

impl GapRatioTable {
    fn empty(d: usize, n_max: usize, exhaustive: bool) -> Self {
        let row = |v: f64| {
            let mut r = vec![v; n_max + 1];
            r[0] = 0.0;
            r
        };
        Self {
            d,
            n_max,
            max_log_ratio: (1..d).map(|_| row(f64::NEG_INFINITY)).collect(),
            min_log_ratio: (1..d).map(|_| row(f64::INFINITY)).collect(),
            words_examined: 0,
            exhaustive,
        }
    }

    fn record(&mut self, n: usize, log_ratios: &[f64]) {
        for (i, &r) in log_ratios.iter().enumerate() {
            self.max_log_ratio[i][n] = self.max_log_ratio[i][n].max(r);
            self.min_log_ratio[i][n] = self.min_log_ratio[i][n].min(r);
        }
        self.words_examined += 1;
    }

    fn merge(mut self, other: &Self) -> Self {
        for i in 0..self.max_log_ratio.len() {
            for n in 0..=self.n_max {
                self.max_log_ratio[i][n] = self.max_log_ratio[i][n].max(other.max_log_ratio[i][n]);
                self.min_log_ratio[i][n] = self.min_log_ratio[i][n].min(other.min_log_ratio[i][n]);
            }
        }
        self.words_examined += other.words_examined;
        self
    }

    /// Maximum ratio (not its log) for 1-based index `i` at length `n`.
    pub fn max_ratio(&self, i: usize, n: usize) -> f64 {
        self.max_log_ratio[i - 1][n].exp()
    }
}

/// `Σ_{n=1}^{n_max} N^n`, saturating.
pub fn exhaustive_cost(n_symbols: usize, n_max: usize) -> u128 {
    let mut total: u128 = 0;
    let mut level: u128 = 1;
    for _ in 0..n_max {
        level = level.saturating_mul(n_symbols as u128);
        total = total.saturating_add(level);
    }
    total
}

/// Compound matrices of one map, plus `log |det|`.
struct Compounds<T> {
    by_order: Vec<Matrix<T>>,
    log_det: T,
}

fn compounds<T: Scalar>(maps: &[Matrix<T>], d: usize) -> Result<Vec<Compounds<T>>> {
    maps.iter()
        .map(|m| {
            let by_order = (1..d).map(|p| exterior_power(m, p)).collect::<Result<Vec<_>>>()?;
            let det = m.det()?.abs();
            if !(det > T::zero()) {
                return Err(Error::invalid("gap ratios need invertible maps"));
            }
            Ok(Compounds { by_order, log_det: det.ln() })
        })
        .collect()
}

/// Running product `A_w` kept as scaled compounds `∧^p A_w`, `p = 1..d−1`.
#[derive(Clone)]
struct CompoundProduct<T> {
    by_order: Vec<ScaledProduct<T>>,
    log_det: T,
}

impl<T: Scalar> CompoundProduct<T> {
    fn identity(d: usize) -> Self {
        Self {
            by_order: (1..d).map(|p| ScaledProduct::identity(crate::linalg::binomial(d, p))).collect(),
            log_det: T::zero(),
        }
    }

    fn times(&self, c: &Compounds<T>) -> Self {
        Self {
            by_order: self.by_order.iter().zip(&c.by_order).map(|(s, m)| s.mul_right(m)).collect(),
            log_det: self.log_det + c.log_det,
        }
    }

    /// `log(α_{i+1}/α_i)` for `i = 1..d−1`.
    fn log_ratios(&self) -> Vec<f64> {
        let mut l = Vec::with_capacity(self.by_order.len() + 2);
        l.push(0.0);
        l.extend(self.by_order.iter().map(|s| s.log_norm().to_f64_lossy()));
        l.push(self.log_det.to_f64_lossy());
        (1..l.len() - 1).map(|i| l[i + 1] - 2.0 * l[i] + l[i - 1]).collect()
    }
}

fn descend<T: Scalar>(
    c: &[Compounds<T>],
    prod: &CompoundProduct<T>,
    n: usize,
    n_max: usize,
    table: &mut GapRatioTable,
) {
    table.record(n, &prod.log_ratios());
    if n == n_max {
        return;
    }
    for comp in c {
        descend(c, &prod.times(comp), n + 1, n_max, table);
    }
}

/// Exact extremes over every word of length `0..=n_max`.
///
/// Fails with [`Error::BudgetExceeded`] when `Σ N^n` exceeds `budget`; use
/// [`gap_ratio_scan_monte_carlo`] in that case.
pub fn gap_ratio_scan<T: Scalar>(maps: &[Matrix<T>], n_max: usize, budget: u128) -> Result<GapRatioTable> {
    let d = ambient_dim(maps)?;
    let required = exhaustive_cost(maps.len(), n_max);
    if required > budget {
        return Err(Error::BudgetExceeded { required, budget });
    }
    let c = compounds(maps, d)?;
    let mut table = GapRatioTable::empty(d, n_max, true);
    if d < 2 {
        return Ok(table);
    }
    if n_max == 0 {
        return Ok(table);
    }
    let root = CompoundProduct::identity(d);
    let subtrees: Vec<GapRatioTable> = c
        .par_iter()
        .map(|first| {
            let mut t = GapRatioTable::empty(d, n_max, true);
            descend(&c, &root.times(first), 1, n_max, &mut t);
            t
        })
        .collect();
    for s in &subtrees {
        table = table.merge(s);
    }
    Ok(table)
}

/// Monte-Carlo extremes: `samples` uniformly random words per length. The maxima are
/// lower bounds for the true maxima, so the table is flagged non-exhaustive.
pub fn gap_ratio_scan_monte_carlo<T: Scalar>(
    maps: &[Matrix<T>],
    n_max: usize,
    samples: usize,
    seed: u64,
) -> Result<GapRatioTable> {
    let d = ambient_dim(maps)?;
    let c = compounds(maps, d)?;
    let mut table = GapRatioTable::empty(d, n_max, false);
    if d < 2 || n_max == 0 {
        return Ok(table);
    }
    // One random word of length n_max per sample; its prefixes cover every length.
    let parts: Vec<GapRatioTable> = (0..samples)
        .into_par_iter()
        .map(|k| {
            let mut rng = stream_rng(seed, k as u64);
            let mut t = GapRatioTable::empty(d, n_max, false);
            let mut prod = CompoundProduct::identity(d);
            for n in 1..=n_max {
                prod = prod.times(&c[rng.random_range(0..c.len())]);
                t.record(n, &prod.log_ratios());
            }
            t
        })
        .collect();
    for p in &parts {
        table = table.merge(p);
    }
    Ok(table)
}
