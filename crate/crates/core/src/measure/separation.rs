//! Sufficient check of the strong separation condition, and the lift to `ℝ^{d+1}` that
//! always satisfies it.
//!
//! Every cylinder `f_w(Λ)` is enclosed in the axis box `f_w(K)` (hull), where `K` is a
//! box containing the attractor. Pairs of cylinders with different first symbols are
//! refined until their hulls separate; pairs still touching at the deepest level are
//! tested for coincident sample points.

use serde::{Deserialize, Serialize};

use crate::cocycle::weights::{BernoulliWeights, SymbolWord};
use crate::error::{Error, Result};
use crate::linalg::{singular_values, Matrix};
use crate::measure::ifs::{AffineMap, IfsSystem};
use crate::Scalar;

/// Upper limit on hull pairs examined by [`check_separation`].
pub const SEPARATION_PAIR_BUDGET: usize = 1_000_000;
/// Sample points closer than this multiple of the attractor's box diameter count as
/// coinciding.
pub const COINCIDENCE_RESOLUTION: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SeparationStatus {
    SscVerified,
    OverlapDetected,
    Inconclusive,
}

/// Two cylinders and how far apart their hulls (or sample points) are.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationWitness {
    pub first: SymbolWord,
    pub second: SymbolWord,
    /// Euclidean distance between the hulls; zero when they intersect.
    pub hull_distance: f64,
    /// Smallest distance between the compared sample points, when computed.
    pub point_distance: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationVerdict {
    pub status: SeparationStatus,
    /// For SSC: the closest separated pair (its distance is a lower bound on
    /// `min_{i≠j} dist(f_i(Λ), f_j(Λ))`). Otherwise the offending pair.
    pub witness: Option<SeparationWitness>,
    /// Deepest level the refinement was allowed to reach.
    pub level: usize,
    pub pairs_examined: usize,
}

impl SeparationVerdict {
    /// Lower bound on the gap between first-level images, for verified SSC.
    pub fn gap(&self) -> Option<f64> {
        match self.status {
            SeparationStatus::SscVerified => self.witness.as_ref().map(|w| w.hull_distance),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
struct AxisHull<T> {
    center: Vec<T>,
    half: Vec<T>,
}

impl<T: Scalar> AxisHull<T> {
    fn image(&self, f: &AffineMap<T>) -> Self {
        let center = f.apply(&self.center);
        let half = f.linear.abs().mul_vec(&self.half).expect("matching dimension");
        Self { center, half }
    }

    fn distance(&self, other: &Self) -> T {
        self.center
            .iter()
            .zip(&other.center)
            .zip(self.half.iter().zip(&other.half))
            .map(|((&a, &b), (&ha, &hb))| {
                let g = ((a - b).abs() - ha - hb).max(T::zero());
                g * g
            })
            .sum::<T>()
            .sqrt()
    }

    fn intersect(&self, other: &Self) -> Self {
        let two = T::lit(2.0);
        let mut center = Vec::with_capacity(self.center.len());
        let mut half = Vec::with_capacity(self.center.len());
        for k in 0..self.center.len() {
            let lo = (self.center[k] - self.half[k]).max(other.center[k] - other.half[k]);
            let hi = (self.center[k] + self.half[k]).min(other.center[k] + other.half[k]);
            center.push((lo + hi) / two);
            half.push(((hi - lo) / two).max(T::zero()));
        }
        Self { center, half }
    }

    fn hull_of(boxes: &[Self]) -> Self {
        let d = boxes[0].center.len();
        let two = T::lit(2.0);
        let mut center = Vec::with_capacity(d);
        let mut half = Vec::with_capacity(d);
        for k in 0..d {
            let lo = boxes.iter().map(|b| b.center[k] - b.half[k]).fold(T::infinity(), T::min);
            let hi = boxes.iter().map(|b| b.center[k] + b.half[k]).fold(T::neg_infinity(), T::max);
            center.push((lo + hi) / two);
            half.push((hi - lo) / two);
        }
        Self { center, half }
    }

    fn diameter(&self) -> T {
        let two = T::lit(2.0);
        self.half.iter().map(|&h| (two * h) * (two * h)).sum::<T>().sqrt()
    }
}

/// An axis box containing the attractor, tightened by iterating `K ↦ hull(∪ f_i(K)) ∩ K`
/// from a box around an invariant ball.
fn attractor_box<T: Scalar>(ifs: &IfsSystem<T>) -> Result<AxisHull<T>> {
    let d = ifs.dim();
    let fixed = ifs.maps().iter().map(|m| m.fixed_point()).collect::<Result<Vec<_>>>()?;
    let n = T::from_usize_lossy(fixed.len());
    let c: Vec<T> = (0..d).map(|k| fixed.iter().map(|p| p[k]).sum::<T>() / n).collect();
    let a_max = ifs.contraction_norms().into_iter().fold(T::zero(), T::max);
    let spread = ifs
        .maps()
        .iter()
        .map(|m| crate::linalg::matrix::norm(&m.apply(&c).iter().zip(&c).map(|(&a, &b)| a - b).collect::<Vec<_>>()))
        .fold(T::zero(), T::max);
    let r = spread / (T::one() - a_max);
    let mut k = AxisHull { center: c, half: vec![r; d] };
    for _ in 0..10_000 {
        let images: Vec<_> = ifs.maps().iter().map(|m| k.image(m)).collect();
        let next = AxisHull::hull_of(&images).intersect(&k);
        let change = next
            .half
            .iter()
            .zip(&k.half)
            .map(|(&a, &b)| (a - b).abs())
            .chain(next.center.iter().zip(&k.center).map(|(&a, &b)| (a - b).abs()))
            .fold(T::zero(), T::max);
        k = next;
        if change <= T::epsilon() * T::lit(4.0) * (k.diameter() + T::one()) {
            break;
        }
    }
    // Guard the final box against rounding in the last iterations.
    let slack = T::epsilon() * T::lit(64.0) * (k.diameter() + T::one());
    k.half.iter_mut().for_each(|h| *h += slack);
    Ok(k)
}

struct Node<T> {
    word: Vec<u16>,
    map: AffineMap<T>,
}

impl<T: Scalar> Node<T> {
    fn child(&self, ifs: &IfsSystem<T>, s: u16) -> Self {
        let mut word = self.word.clone();
        word.push(s);
        Self { word, map: self.map.compose(&ifs.maps()[s as usize]) }
    }
}

/// Checks SSC by refining pairs of cylinder hulls down to `level`.
///
/// * ssc-verified: every pair of cylinders with different first symbols has disjoint
///   hulls at some level `≤ level`; the witness is the closest such pair.
/// * overlap-detected: at the deepest level two cylinders still touch and their images
///   of a common attractor point coincide to [`COINCIDENCE_RESOLUTION`], e.g. repeated maps.
/// * inconclusive: otherwise, including touching images such as abutting intervals.
pub fn check_separation<T: Scalar>(ifs: &IfsSystem<T>, level: usize) -> Result<SeparationVerdict> {
    if level == 0 {
        return Err(Error::invalid("separation level must be at least 1"));
    }
    let k = attractor_box(ifs)?;
    let resolution = T::lit(COINCIDENCE_RESOLUTION) * k.diameter().max(T::min_positive_value());
    let anchor = ifs.maps()[0].fixed_point()?;
    let hull = |n: &Node<T>| k.image(&n.map);
    let root = |s: u16| Node { word: vec![s], map: ifs.maps()[s as usize].clone() };

    let n_maps = ifs.len() as u16;
    let mut stack: Vec<(Node<T>, Node<T>)> = Vec::new();
    for a in 0..n_maps {
        for b in a + 1..n_maps {
            stack.push((root(a), root(b)));
        }
    }
    let mut examined = 0usize;
    let mut closest: Option<SeparationWitness> = None;
    let mut unresolved: Option<SeparationWitness> = None;
    while let Some((u, v)) = stack.pop() {
        examined += 1;
        if examined > SEPARATION_PAIR_BUDGET {
            let w = unresolved.take().unwrap_or(SeparationWitness {
                first: SymbolWord::new(u.word),
                second: SymbolWord::new(v.word),
                hull_distance: 0.0,
                point_distance: None,
            });
            return Ok(SeparationVerdict {
                status: SeparationStatus::Inconclusive,
                witness: Some(w),
                level,
                pairs_examined: examined - 1,
            });
        }
        let dist = hull(&u).distance(&hull(&v));
        if dist > T::zero() {
            let dist = dist.to_f64_lossy();
            if closest.as_ref().is_none_or(|c| dist < c.hull_distance) {
                closest = Some(SeparationWitness {
                    first: SymbolWord::new(u.word.clone()),
                    second: SymbolWord::new(v.word.clone()),
                    hull_distance: dist,
                    point_distance: None,
                });
            }
            continue;
        }
        if u.word.len() < level {
            for s in 0..n_maps {
                for t in 0..n_maps {
                    stack.push((u.child(ifs, s), v.child(ifs, t)));
                }
            }
            continue;
        }
        let p = u.map.apply(&anchor);
        let q = v.map.apply(&anchor);
        let gap = crate::linalg::matrix::norm(&p.iter().zip(&q).map(|(&a, &b)| a - b).collect::<Vec<_>>());
        let witness = SeparationWitness {
            first: SymbolWord::new(u.word),
            second: SymbolWord::new(v.word),
            hull_distance: 0.0,
            point_distance: Some(gap.to_f64_lossy()),
        };
        if gap <= resolution {
            return Ok(SeparationVerdict {
                status: SeparationStatus::OverlapDetected,
                witness: Some(witness),
                level,
                pairs_examined: examined,
            });
        }
        if unresolved.as_ref().is_none_or(|w| witness.point_distance < w.point_distance) {
            unresolved = Some(witness);
        }
    }
    let (status, witness) = match unresolved {
        Some(w) => (SeparationStatus::Inconclusive, Some(w)),
        None => (SeparationStatus::SscVerified, closest),
    };
    Ok(SeparationVerdict { status, witness, level, pairs_examined: examined })
}

/// A lifted system `f̂_i(x, s) = (A_i x + t_i, ρ s + τ_i)` in `ℝ^{d+1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LiftedIfs<T> {
    pub ifs: IfsSystem<T>,
    pub rho: T,
    pub tau: Vec<T>,
}

/// Lifts `ifs` with `Â_i = blockdiag(A_i, ρ)` and `τ_i = i/N` (0-based `i`).
///
/// The default `ρ = 0.9 · min{1/N, min_i α_d(A_i)}` keeps `ρ` the weakest singular value of
/// every lifted map; the last coordinate of the lifted attractor lies in
/// `[0, (1 − 1/N)/(1 − ρ)] ⊂ [0, 1)`, so the level-one images are separated by at least
/// `1/N − ρ > 0` in that coordinate.
pub fn lift_ifs<T: Scalar>(ifs: &IfsSystem<T>, rho: Option<T>) -> Result<LiftedIfs<T>> {
    let n = ifs.len();
    let n_t = T::from_usize_lossy(n);
    let limit = (T::one() / n_t).min(ifs.min_weakest_singular_value());
    let rho = match rho {
        Some(r) if r > T::zero() && r < limit => r,
        Some(r) => {
            return Err(Error::invalid(format!("rho = {r} must lie in (0, {limit})")));
        }
        None => T::lit(0.9) * limit,
    };
    let d = ifs.dim();
    let tau: Vec<T> = (0..n).map(|i| T::from_usize_lossy(i) / n_t).collect();
    let maps = ifs
        .maps()
        .iter()
        .zip(&tau)
        .map(|(m, &t)| {
            let mut a = Matrix::zeros(d + 1, d + 1);
            for r in 0..d {
                for c in 0..d {
                    a[(r, c)] = m.linear[(r, c)];
                }
            }
            a[(d, d)] = rho;
            let mut tr = m.translation.clone();
            tr.push(t);
            AffineMap::new(a, tr)
        })
        .collect::<Result<Vec<_>>>()?;
    let weights = BernoulliWeights::new(ifs.weights().probabilities().to_vec())?;
    Ok(LiftedIfs { ifs: IfsSystem::new(maps, weights)?, rho, tau })
}

/// `α_{d+1}` of each lifted map.
pub fn lifted_weakest_singular_values<T: Scalar>(lifted: &LiftedIfs<T>) -> Result<Vec<T>> {
    lifted.ifs.maps().iter().map(|m| singular_values(&m.linear).map(|s| s[0])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::fixtures::{bm_carpet, cantor};

    #[test]
    fn cantor_is_separated_with_gap_one_third() {
        let v = check_separation(&cantor(), 6).unwrap();
        assert_eq!(v.status, SeparationStatus::SscVerified);
        assert!((v.gap().unwrap() - 1.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn repeated_map_is_an_overlap() {
        let a = Matrix::diag(&[0.5, 0.3]);
        let ifs = IfsSystem::from_parts(
            vec![a.clone(), a],
            vec![vec![0.1, 0.2], vec![0.1, 0.2]],
            BernoulliWeights::uniform(2).unwrap(),
        )
        .unwrap();
        assert_eq!(check_separation(&ifs, 4).unwrap().status, SeparationStatus::OverlapDetected);
    }

    #[test]
    fn abutting_images_are_inconclusive() {
        let ifs = IfsSystem::from_parts(
            vec![Matrix::diag(&[0.5]), Matrix::diag(&[0.5])],
            vec![vec![0.0], vec![0.5]],
            BernoulliWeights::uniform(2).unwrap(),
        )
        .unwrap();
        assert_eq!(check_separation(&ifs, 8).unwrap().status, SeparationStatus::Inconclusive);
        // The carpet's second and third images touch at a single point.
        assert_eq!(check_separation(&bm_carpet(), 8).unwrap().status, SeparationStatus::Inconclusive);
    }

    #[test]
    fn lift_arithmetic_and_separation() {
        let ifs = IfsSystem::from_parts(
            vec![Matrix::diag(&[0.5, 0.4]), Matrix::diag(&[0.6, 0.45])],
            vec![vec![0.0, 0.0], vec![0.1, 0.0]],
            BernoulliWeights::uniform(2).unwrap(),
        )
        .unwrap();
        let lifted = lift_ifs(&ifs, None).unwrap();
        assert!((lifted.rho - 0.36_f64).abs() < 1e-15);
        assert_eq!(lifted.tau, vec![0.0, 0.5]);
        for s in lifted_weakest_singular_values(&lifted).unwrap() {
            assert_eq!(s, lifted.rho);
        }
        assert_eq!(check_separation(&lifted.ifs, 4).unwrap().status, SeparationStatus::SscVerified);
        assert!(lift_ifs(&ifs, Some(0.5)).is_err());

        let carpet = lift_ifs(&bm_carpet(), None).unwrap();
        assert_eq!(check_separation(&carpet.ifs, 4).unwrap().status, SeparationStatus::SscVerified);
    }
}
