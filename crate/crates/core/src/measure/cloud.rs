//! Natural projection, seeded sampling of `μ = π_*ν`, and point clouds.

use std::io::{Read, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cocycle::weights::SymbolWord;
use crate::error::{Error, Result};
use crate::linalg::{orthogonal_projection, SubspaceFrame};
use crate::measure::ifs::IfsSystem;
use crate::stats::stream_rng;
use crate::Scalar;

/// Samples drawn per independent random stream.
pub const SAMPLE_CHUNK: usize = 1024;

/// A truncated natural projection `f_{i_0} ∘ ⋯ ∘ f_{i_{n−1}}(0)`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProjectedPoint<T> {
    pub point: Vec<T>,
    /// Distance bound to `π(ii)` for every infinite extension of the word.
    pub error_bound: T,
}

/// `Σ_{k<n} A_{i_0}⋯A_{i_{k−1}} t_{i_k}`, evaluated innermost map first.
///
/// The bound is `R · Π_k α_1(A_{i_k})` with `R` the invariant-ball radius, since the
/// tail `π(σ^n ii)` and the origin both lie in `B(0, R)`.
pub fn natural_projection<T: Scalar>(ifs: &IfsSystem<T>, word: &SymbolWord) -> Result<ProjectedPoint<T>> {
    if word.is_empty() {
        return Err(Error::invalid("natural projection needs a non-empty word"));
    }
    word.validate(ifs.len())?;
    let norms = ifs.contraction_norms();
    Ok(project_with(ifs, word.symbols(), &norms, ifs.bounding_radius()))
}

fn project_with<T: Scalar>(ifs: &IfsSystem<T>, word: &[u16], norms: &[T], radius: T) -> ProjectedPoint<T> {
    let mut x = vec![T::zero(); ifs.dim()];
    let mut contraction = T::one();
    for &s in word.iter().rev() {
        x = ifs.maps()[s as usize].apply(&x);
        contraction *= norms[s as usize];
    }
    ProjectedPoint { point: x, error_bound: radius * contraction }
}

/// Depth for a truncation error below `1e−6·R`, with `R` the bounding radius. A system
/// whose attractor is the origin needs a single step.
pub fn default_depth<T: Scalar>(ifs: &IfsSystem<T>) -> Result<usize> {
    let r = ifs.bounding_radius();
    if r == T::zero() {
        return Ok(1);
    }
    depth_for_resolution(ifs, r * T::lit(1e-6))
}

/// Smallest depth whose worst-case truncation error is below `resolution`.
pub fn depth_for_resolution<T: Scalar>(ifs: &IfsSystem<T>, resolution: T) -> Result<usize> {
    if !(resolution > T::zero()) {
        return Err(Error::invalid("resolution must be positive"));
    }
    let r = ifs.bounding_radius();
    let a = ifs.contraction_norms().into_iter().fold(T::zero(), T::max);
    if r <= resolution || a == T::zero() {
        return Ok(1);
    }
    let n = ((resolution / r).ln() / a.ln()).ceil().to_f64_lossy();
    Ok((n.max(1.0) as usize).min(100_000))
}

/// Samples of a measure on `ℝ^d` together with the words that generated them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PointCloud<T> {
    pub dim: usize,
    pub points: Vec<Vec<T>>,
    pub words: Vec<SymbolWord>,
    pub depth: usize,
    pub seed: Option<u64>,
    /// Per-point truncation error bounds, when known.
    pub error_bounds: Option<Vec<T>>,
}

impl<T: Scalar> PointCloud<T> {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Coordinate-wise bounding box `(lo, hi)`.
    pub fn bounding_box(&self) -> Option<(Vec<T>, Vec<T>)> {
        let first = self.points.first()?;
        let mut lo = first.clone();
        let mut hi = first.clone();
        for p in &self.points {
            for k in 0..self.dim {
                lo[k] = lo[k].min(p[k]);
                hi[k] = hi[k].max(p[k]);
            }
        }
        Some((lo, hi))
    }

    /// Diagonal length of the bounding box (an upper bound on the diameter).
    pub fn diameter(&self) -> T {
        match self.bounding_box() {
            Some((lo, hi)) => lo.iter().zip(&hi).map(|(&a, &b)| (b - a) * (b - a)).sum::<T>().sqrt(),
            None => T::zero(),
        }
    }

    pub fn max_error_bound(&self) -> Option<T> {
        self.error_bounds.as_ref().map(|e| e.iter().copied().fold(T::zero(), T::max))
    }

    /// Fraction of points whose word starts with symbol `k`.
    pub fn first_symbol_frequency(&self, k: u16) -> f64 {
        let hits = self.words.iter().filter(|w| w.symbols().first() == Some(&k)).count();
        hits as f64 / self.len().max(1) as f64
    }

    /// Writes `x1,…,xd,word,depth` rows; values use the shortest round-trip decimal form.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header: Vec<String> = (1..=self.dim).map(|k| format!("x{k}")).collect();
        header.push("word".into());
        header.push("depth".into());
        w.write_record(&header)?;
        for (p, word) in self.points.iter().zip(&self.words) {
            let mut row: Vec<String> = p.iter().map(|x| x.to_string()).collect();
            row.push(word.to_dotted());
            row.push(self.depth.to_string());
            w.write_record(&row)?;
        }
        w.flush()?;
        Ok(())
    }

    /// Reads the format of [`write_csv`](Self::write_csv).
    pub fn read_csv<R: Read>(input: R) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        let n = header.len();
        if n < 3 || &header[n - 2] != "word" || &header[n - 1] != "depth" {
            return Err(Error::invalid("cloud CSV header must be x1,…,xd,word,depth"));
        }
        let dim = n - 2;
        for (k, name) in header.iter().take(dim).enumerate() {
            if name != format!("x{}", k + 1) {
                return Err(Error::invalid(format!("unexpected column '{name}'")));
            }
        }
        let mut points = Vec::new();
        let mut words = Vec::new();
        let mut depth = None;
        for (line, rec) in r.records().enumerate() {
            let rec = rec?;
            let p = (0..dim)
                .map(|k| {
                    rec[k]
                        .parse::<T>()
                        .map_err(|_| Error::invalid(format!("row {}: bad number '{}'", line + 2, &rec[k])))
                })
                .collect::<Result<Vec<T>>>()?;
            let dep: usize =
                rec[dim + 1].parse().map_err(|_| Error::invalid(format!("row {}: bad depth", line + 2)))?;
            if *depth.get_or_insert(dep) != dep {
                return Err(Error::invalid("rows disagree on depth"));
            }
            points.push(p);
            words.push(SymbolWord::from_dotted(&rec[dim])?);
        }
        Ok(Self { dim, points, words, depth: depth.unwrap_or(0), seed: None, error_bounds: None })
    }
}

/// `count` i.i.d. samples of `μ`, each the natural projection of a random word of
/// length `depth`. Results depend only on `seed`, not on the thread count.
pub fn sample_measure<T: Scalar>(ifs: &IfsSystem<T>, count: usize, depth: usize, seed: u64) -> Result<PointCloud<T>> {
    if depth == 0 {
        return Err(Error::invalid("sampling depth must be at least 1"));
    }
    let norms = ifs.contraction_norms();
    let radius = ifs.bounding_radius();
    let chunks: Vec<Vec<(ProjectedPoint<T>, SymbolWord)>> = (0..count.div_ceil(SAMPLE_CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut rng = stream_rng(seed, c as u64);
            let n = SAMPLE_CHUNK.min(count - c * SAMPLE_CHUNK);
            (0..n)
                .map(|_| {
                    let w = ifs.weights().sample_word(depth, &mut rng);
                    (project_with(ifs, w.symbols(), &norms, radius), w)
                })
                .collect()
        })
        .collect();
    let mut points = Vec::with_capacity(count);
    let mut words = Vec::with_capacity(count);
    let mut bounds = Vec::with_capacity(count);
    for (p, w) in chunks.into_iter().flatten() {
        points.push(p.point);
        bounds.push(p.error_bound);
        words.push(w);
    }
    Ok(PointCloud { dim: ifs.dim(), points, words, depth, seed: Some(seed), error_bounds: Some(bounds) })
}

/// Coordinates `Vᵀx` of every point; words and error bounds carry over, since the
/// projection is 1-Lipschitz.
pub fn project_cloud<T: Scalar>(cloud: &PointCloud<T>, v: &SubspaceFrame<T>) -> Result<PointCloud<T>> {
    if v.ambient_dim() != cloud.dim {
        return Err(Error::DimensionMismatch { expected: cloud.dim, found: v.ambient_dim() });
    }
    let points = cloud.points.par_iter().map(|p| orthogonal_projection(v, p)).collect::<Result<Vec<_>>>()?;
    Ok(PointCloud { dim: v.dim(), points, ..cloud.clone() })
}
