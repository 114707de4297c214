//! Empirical dimension estimators for point clouds.

use rand::seq::index::sample;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::cloud::PointCloud;
use crate::stats::{self, fit_line, stream_rng};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LocalDimensionOptions {
    /// Number of radii in the geometric grid.
    pub radii: usize,
    /// Ratio between consecutive radii (`< 1`).
    pub ratio: f64,
    /// Largest radius; `None` means a tenth of the cloud diameter.
    pub r_max: Option<f64>,
    /// Number of centers drawn from the cloud.
    pub centers: usize,
    /// Centers with fewer usable radii are skipped.
    pub min_radii: usize,
}

impl Default for LocalDimensionOptions {
    fn default() -> Self {
        Self { radii: 24, ratio: 0.8, r_max: None, centers: 100, min_radii: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalDimensionReport {
    /// Slope of `log μ̂(B(x, r))` against `log r`, per usable center.
    pub slopes: Vec<f64>,
    pub median: f64,
    pub iqr: f64,
    pub centers_used: usize,
    pub centers_skipped: usize,
    /// Radii that passed the truncation-error filter, descending.
    pub radii: Vec<f64>,
}

/// Sample points a ball must typically hold at the smallest radius.
const NEIGHBOUR_FLOOR: usize = 10;

fn kth_neighbour_distance(pts: &[Vec<f64>], ci: usize) -> f64 {
    let x = &pts[ci];
    let mut best: Vec<f64> = Vec::with_capacity(NEIGHBOUR_FLOOR + 1);
    for (j, y) in pts.iter().enumerate() {
        if j == ci {
            continue;
        }
        let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        if best.len() < NEIGHBOUR_FLOOR || d2 < best[NEIGHBOUR_FLOOR - 1] {
            let at = best.partition_point(|&b| b <= d2);
            best.insert(at, d2);
            best.truncate(NEIGHBOUR_FLOOR);
        }
    }
    best.last().copied().unwrap_or(0.0).sqrt()
}

/// Local-dimension slopes at random centers, by brute-force ball counts.
///
/// The grid runs down from `r_max` with the given ratio, widened when needed so the
/// smallest radius is at least the median distance to a center's tenth-nearest neighbour.
/// Radii below ten times the largest truncation error are dropped, as are radii whose
/// ball holds no other sample point.
pub fn local_dimension_estimate<T: Scalar>(
    cloud: &PointCloud<T>,
    opts: &LocalDimensionOptions,
    seed: u64,
) -> Result<LocalDimensionReport> {
    if cloud.len() < 2 {
        return Err(Error::invalid("need at least two points"));
    }
    if !(opts.ratio > 0.0 && opts.ratio < 1.0) || opts.radii < 2 {
        return Err(Error::invalid("radii grid needs at least two radii and a ratio in (0, 1)"));
    }
    let diam = cloud.diameter().to_f64_lossy();
    let r_max = opts.r_max.unwrap_or(if diam > 0.0 { diam / 10.0 } else { 1.0 });
    let trunc_floor = 10.0 * cloud.max_error_bound().map(|e| e.to_f64_lossy()).unwrap_or(0.0);
    let pts: Vec<Vec<f64>> = cloud.points.iter().map(|p| p.iter().map(|x| x.to_f64_lossy()).collect()).collect();
    let m = pts.len();
    let c = opts.centers.min(m);
    let centers = sample(&mut stream_rng(seed, 0), m, c).into_vec();

    // Widen the ratio when the default grid would reach balls that typically hold fewer
    // than NEIGHBOUR_FLOOR points: the log-mass of nearly empty balls is biased upward.
    let sparse_floor =
        stats::median(&centers.par_iter().map(|&ci| kth_neighbour_distance(&pts, ci)).collect::<Vec<_>>());
    let n_grid = opts.radii as i32 - 1;
    let r_low = (r_max * opts.ratio.powi(n_grid)).max(sparse_floor);
    let ratio = if r_low < r_max { (r_low / r_max).powf(1.0 / n_grid as f64) } else { opts.ratio };
    let radii: Vec<f64> =
        (0..opts.radii).map(|k| r_max * ratio.powi(k as i32)).take_while(|&r| r >= trunc_floor).collect();
    let n_r = radii.len();
    if n_r < 2 {
        return Err(Error::invalid("truncation error leaves fewer than two usable radii"));
    }
    let log_step = (1.0 / ratio).ln();
    let log_r: Vec<f64> = radii.iter().map(|r| r.ln()).collect();

    let slopes: Vec<Option<f64>> = centers
        .par_iter()
        .map(|&ci| {
            let x = &pts[ci];
            let mut counts = vec![0usize; n_r];
            for (j, y) in pts.iter().enumerate() {
                if j == ci {
                    continue;
                }
                let d2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
                let d = d2.sqrt();
                if d > r_max {
                    continue;
                }
                let k = if d > 0.0 { ((r_max / d).ln() / log_step).floor() as usize } else { n_r - 1 };
                counts[k.min(n_r - 1)] += 1;
            }
            let mut xs = Vec::with_capacity(n_r);
            let mut ys = Vec::with_capacity(n_r);
            let mut mass = 0usize;
            for k in (0..n_r).rev() {
                mass += counts[k];
                if mass > 0 {
                    xs.push(log_r[k]);
                    ys.push((mass as f64 / m as f64).ln());
                }
            }
            if xs.len() < opts.min_radii.min(n_r) {
                return None;
            }
            fit_line(&xs, &ys).map(|f| f.slope)
        })
        .collect();
    let used: Vec<f64> = slopes.iter().flatten().copied().collect();
    let skipped = slopes.len() - used.len();
    Ok(LocalDimensionReport {
        median: stats::median(&used),
        iqr: stats::iqr(&used),
        centers_used: used.len(),
        centers_skipped: skipped,
        slopes: used,
        radii,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BoxCountOptions {
    /// Grid scales per halving of the cell side.
    pub steps_per_octave: u32,
    /// Number of shifted grids averaged at each scale.
    pub shifts: usize,
    /// Scales with fewer occupied cells are skipped as too coarse.
    pub min_occupied: usize,
    /// Finest scale index; `None` picks the finest scale whose occupied cells still
    /// average `min_per_cell` points.
    pub max_step: Option<u32>,
    pub min_per_cell: f64,
}

impl Default for BoxCountOptions {
    fn default() -> Self {
        Self { steps_per_octave: 2, shifts: 4, min_occupied: 32, max_step: None, min_per_cell: 5.0 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCountEstimate {
    /// Slope of the grid entropy against `log(1/δ)` (information dimension).
    pub dimension: f64,
    /// `log(L/δ)` for each scale used, with `L` the bounding-box side.
    pub log_scales: Vec<f64>,
    /// Miller-Madow corrected entropies (nats) averaged over shifts, one per scale.
    pub entropies: Vec<f64>,
    /// Occupied cells of the unshifted grid.
    pub occupied_cells: Vec<usize>,
    pub rms_residual: f64,
}

/// Miller-Madow corrected entropy of the cloud over the grid of cell side `cell`
/// translated by `shift` cells, and its number of occupied cells.
///
/// Cells are identified by sorting integer keys, so the result does not depend on
/// hash order. Keys are packed into a `u128` when the grid is small enough.
fn grid_entropy(pts: &[Vec<f64>], lo: &[f64], cell: f64, extent: f64, shift: &[f64]) -> (f64, usize) {
    let index = |x: f64, l: f64, s: f64| ((x - l) / cell + s).floor().max(0.0) as u64;
    let bits = (extent / cell + 2.0).log2().ceil() as u32;
    let counts = if bits as usize * lo.len() <= 128 {
        let mut keys: Vec<u128> = pts
            .par_iter()
            .map(|p| p.iter().zip(lo).zip(shift).fold(0u128, |k, ((&x, &l), &s)| (k << bits) | index(x, l, s) as u128))
            .collect();
        keys.par_sort_unstable();
        run_lengths(&keys)
    } else {
        let mut keys: Vec<Vec<u64>> = pts
            .par_iter()
            .map(|p| p.iter().zip(lo).zip(shift).map(|((&x, &l), &s)| index(x, l, s)).collect())
            .collect();
        keys.par_sort_unstable();
        run_lengths(&keys)
    };
    let m = pts.len() as f64;
    let h: f64 = counts
        .iter()
        .map(|&c| {
            let q = c as f64 / m;
            -q * q.ln()
        })
        .sum();
    (h + (counts.len() as f64 - 1.0) / (2.0 * m), counts.len())
}

fn run_lengths<K: PartialEq>(sorted: &[K]) -> Vec<usize> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=sorted.len() {
        if i == sorted.len() || sorted[i] != sorted[start] {
            out.push(i - start);
            start = i;
        }
    }
    out
}

/// Fractional grid offsets: zero first, then a Kronecker sequence.
fn grid_shifts(dim: usize, count: usize) -> Vec<Vec<f64>> {
    const PRIMES: [f64; 8] = [2.0, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0];
    (0..count.max(1)).map(|s| (0..dim).map(|k| (s as f64 * PRIMES[k % 8].sqrt()).fract()).collect()).collect()
}

/// Information dimension from grid entropies: least-squares slope of `H(δ)` against
/// `log(1/δ)` over geometric scales `δ = L·2^{−j/s}`.
///
/// Averaging each scale over shifted grids damps the dependence on how the grid
/// happens to align with the measure. Scales whose cells are smaller than ten times the
/// truncation error are not used.
pub fn box_counting_dimension<T: Scalar>(cloud: &PointCloud<T>, opts: &BoxCountOptions) -> Result<BoxCountEstimate> {
    let (lo, hi) = cloud.bounding_box().ok_or_else(|| Error::invalid("empty point cloud"))?;
    if opts.steps_per_octave == 0 {
        return Err(Error::invalid("steps_per_octave must be positive"));
    }
    let lo: Vec<f64> = lo.iter().map(|x| x.to_f64_lossy()).collect();
    let side = hi.iter().zip(&lo).map(|(h, &l)| h.to_f64_lossy() - l).fold(0.0, f64::max);
    let m = cloud.len();
    if side <= 0.0 {
        return Ok(BoxCountEstimate {
            dimension: 0.0,
            log_scales: vec![],
            entropies: vec![],
            occupied_cells: vec![],
            rms_residual: 0.0,
        });
    }
    let pts: Vec<Vec<f64>> = cloud.points.iter().map(|p| p.iter().map(|x| x.to_f64_lossy()).collect()).collect();
    let floor = 10.0 * cloud.max_error_bound().map(|e| e.to_f64_lossy()).unwrap_or(0.0);
    let shifts = grid_shifts(cloud.dim, opts.shifts);
    let step = std::f64::consts::LN_2 / opts.steps_per_octave as f64;
    let mut log_scales = Vec::new();
    let mut entropies = Vec::new();
    let mut occupied_cells = Vec::new();
    for j in 0..=40 * opts.steps_per_octave {
        if opts.max_step.is_some_and(|l| j > l) {
            break;
        }
        let cell = side * (-(j as f64) * step).exp();
        if cell < floor {
            break;
        }
        let per_shift: Vec<(f64, usize)> = shifts.iter().map(|s| grid_entropy(&pts, &lo, cell, side, s)).collect();
        let occ = per_shift[0].1;
        if opts.max_step.is_none() && (m as f64) / (occ as f64) < opts.min_per_cell {
            break;
        }
        if occ < opts.min_occupied && occ < m {
            continue;
        }
        log_scales.push(j as f64 * step);
        entropies.push(per_shift.iter().map(|e| e.0).sum::<f64>() / per_shift.len() as f64);
        occupied_cells.push(occ);
    }
    if log_scales.len() < 2 {
        return Err(Error::invalid("too few samples for two grid scales"));
    }
    let fit = fit_line(&log_scales, &entropies).expect("distinct scales");
    Ok(BoxCountEstimate { dimension: fit.slope, log_scales, entropies, occupied_cells, rms_residual: fit.rms_residual })
}
