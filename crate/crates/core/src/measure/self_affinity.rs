//! Empirical test of `μ = Σ_i p_i μ ∘ f_i^{−1}` on axis-aligned boxes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measure::cloud::PointCloud;
use crate::measure::ifs::IfsSystem;
use crate::stats::stream_rng;
use crate::Scalar;

/// Boxes holding fewer sample points than this are skipped.
pub const MIN_BOX_SAMPLES: usize = 10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisBox {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl AxisBox {
    pub fn new(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        if lo.len() != hi.len() {
            return Err(Error::DimensionMismatch { expected: lo.len(), found: hi.len() });
        }
        if lo.iter().zip(&hi).any(|(a, b)| !(a <= b)) {
            return Err(Error::invalid("box needs lo ≤ hi in every coordinate"));
        }
        Ok(Self { lo, hi })
    }

    pub fn contains<T: Scalar>(&self, x: &[T]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (&a, &b))| {
            let v = v.to_f64_lossy();
            a <= v && v <= b
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoxStatus {
    Pass,
    Fail,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxCheck {
    pub test_box: AxisBox,
    /// `μ̂(B)`.
    pub lhs: f64,
    /// `Σ_i p_i μ̂(f_i^{−1} B)`.
    pub rhs: f64,
    pub tolerance: f64,
    pub status: BoxStatus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelfAffinityReport {
    pub boxes: Vec<BoxCheck>,
    pub max_discrepancy: f64,
    pub samples: usize,
}

impl SelfAffinityReport {
    pub fn all_passed(&self) -> bool {
        self.boxes.iter().all(|b| b.status != BoxStatus::Fail)
    }

    pub fn checked(&self) -> usize {
        self.boxes.iter().filter(|b| b.status != BoxStatus::Skipped).count()
    }
}

/// Compares both sides of the self-affinity identity on each box.
///
/// The right-hand side reuses the sample: `y_j = f_{i_0}^{−1}(x_j)` is the point coded by
/// the shifted word, itself a draw from `μ`, so `μ̂(f_i^{−1}B)` is the fraction of `j` with
/// `f_i(y_j) ∈ B`. The difference of the two sides then has variance at most `μ(B)/m`,
/// which is what the `3·√(μ̂(B)/m)` tolerance assumes.
pub fn self_affinity_check<T: Scalar>(
    cloud: &PointCloud<T>,
    ifs: &IfsSystem<T>,
    boxes: &[AxisBox],
) -> Result<SelfAffinityReport> {
    if cloud.dim != ifs.dim() {
        return Err(Error::DimensionMismatch { expected: ifs.dim(), found: cloud.dim });
    }
    if cloud.is_empty() {
        return Err(Error::invalid("empty point cloud"));
    }
    if let Some(b) = boxes.iter().find(|b| b.lo.len() != cloud.dim) {
        return Err(Error::DimensionMismatch { expected: cloud.dim, found: b.lo.len() });
    }
    let inverses = ifs.linear_parts().iter().map(|a| a.inverse()).collect::<Result<Vec<_>>>()?;
    let mut shifted = Vec::with_capacity(cloud.len());
    for (x, w) in cloud.points.iter().zip(&cloud.words) {
        let s = *w.symbols().first().ok_or_else(|| Error::invalid("sample without a word"))? as usize;
        let t = &ifs.maps()[s].translation;
        let diff: Vec<T> = x.iter().zip(t).map(|(&a, &b)| a - b).collect();
        shifted.push(inverses[s].mul_vec(&diff)?);
    }
    let images: Vec<Vec<Vec<T>>> = ifs.maps().iter().map(|f| shifted.iter().map(|y| f.apply(y)).collect()).collect();

    let m = cloud.len() as f64;
    let p = ifs.weights().probabilities();
    let mut checks = Vec::with_capacity(boxes.len());
    let mut max_discrepancy: f64 = 0.0;
    for b in boxes {
        let count = cloud.points.iter().filter(|x| b.contains(x)).count();
        let lhs = count as f64 / m;
        let rhs: f64 = images
            .iter()
            .zip(p)
            .map(|(img, &pi)| pi.to_f64_lossy() * img.iter().filter(|y| b.contains(y)).count() as f64 / m)
            .sum();
        let tolerance = 3.0 * (lhs.max(rhs) / m).sqrt();
        let status = if count < MIN_BOX_SAMPLES {
            BoxStatus::Skipped
        } else {
            max_discrepancy = max_discrepancy.max((lhs - rhs).abs());
            if (lhs - rhs).abs() <= tolerance {
                BoxStatus::Pass
            } else {
                BoxStatus::Fail
            }
        };
        checks.push(BoxCheck { test_box: b.clone(), lhs, rhs, tolerance, status });
    }
    Ok(SelfAffinityReport { boxes: checks, max_discrepancy, samples: cloud.len() })
}

/// `count` random boxes centered at sample points, with side lengths between 5% and 40%
/// of the cloud's extent in each coordinate.
pub fn random_test_boxes<T: Scalar>(cloud: &PointCloud<T>, count: usize, seed: u64) -> Vec<AxisBox> {
    let Some((lo, hi)) = cloud.bounding_box() else {
        return Vec::new();
    };
    let mut rng = stream_rng(seed, 0);
    (0..count)
        .map(|_| {
            let c = &cloud.points[rng.random_range(0..cloud.len())];
            let mut blo = Vec::with_capacity(cloud.dim);
            let mut bhi = Vec::with_capacity(cloud.dim);
            for k in 0..cloud.dim {
                let extent = (hi[k] - lo[k]).to_f64_lossy().max(1e-12);
                let half = extent * rng.random_range(0.025..0.2);
                blo.push(c[k].to_f64_lossy() - half);
                bhi.push(c[k].to_f64_lossy() + half);
            }
            AxisBox { lo: blo, hi: bhi }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::cloud::sample_measure;
    use crate::measure::fixtures::{bm_carpet, cantor};

    #[test]
    fn cantor_examples() {
        let ifs = cantor();
        let cloud = sample_measure(&ifs, 20_000, 30, 3).unwrap();
        let boxes = vec![
            AxisBox::new(vec![-1.0], vec![1.0]).unwrap(),
            AxisBox::new(vec![0.0], vec![1.0 / 3.0]).unwrap(),
            AxisBox::new(vec![0.4], vec![0.6]).unwrap(),
        ];
        let r = self_affinity_check(&cloud, &ifs, &boxes).unwrap();
        assert_eq!(r.boxes[0].lhs, 1.0);
        assert!((r.boxes[0].rhs - 1.0).abs() < 1e-12);
        assert!((r.boxes[1].rhs - 0.5).abs() < 1e-12);
        assert_eq!(r.boxes[2].status, BoxStatus::Skipped);
        assert_eq!((r.boxes[2].lhs, r.boxes[2].rhs), (0.0, 0.0));
        assert!(r.all_passed());
    }

    #[test]
    fn random_boxes_pass_on_the_carpet() {
        let ifs = bm_carpet();
        let cloud = sample_measure(&ifs, 20_000, 25, 4).unwrap();
        let boxes = random_test_boxes(&cloud, 10, 5);
        let r = self_affinity_check(&cloud, &ifs, &boxes).unwrap();
        assert!(r.all_passed(), "{r:?}");
        assert!(r.checked() >= 8);
    }

    #[test]
    fn wrong_weights_are_detected() {
        let ifs = cantor();
        let cloud = sample_measure(&ifs, 20_000, 30, 3).unwrap();
        let skewed = ifs.with_weights(crate::cocycle::BernoulliWeights::new(vec![0.8, 0.2]).unwrap()).unwrap();
        let boxes = vec![AxisBox::new(vec![0.0], vec![1.0 / 3.0]).unwrap()];
        let r = self_affinity_check(&cloud, &skewed, &boxes).unwrap();
        assert!(!r.all_passed());
    }
}
