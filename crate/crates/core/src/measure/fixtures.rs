//! Reference systems with known dimensions.

use crate::cocycle::BernoulliWeights;
use crate::linalg::Matrix;
use crate::measure::ifs::IfsSystem;

/// Middle-thirds Cantor measure with equal weights.
pub fn cantor() -> IfsSystem<f64> {
    IfsSystem::from_parts(
        vec![Matrix::diag(&[1.0 / 3.0]); 2],
        vec![vec![0.0], vec![2.0 / 3.0]],
        BernoulliWeights::uniform(2).unwrap(),
    )
    .expect("valid system")
}

/// Bedford-McMullen carpet on a 3×2 grid with digits `(0,0), (1,0), (2,1)`, equal weights.
pub fn bm_carpet() -> IfsSystem<f64> {
    let digits = [(0.0, 0.0), (1.0, 0.0), (2.0, 1.0)];
    IfsSystem::from_parts(
        vec![Matrix::diag(&[1.0 / 3.0, 0.5]); 3],
        digits.iter().map(|&(c, r)| vec![c / 3.0, r / 2.0]).collect(),
        BernoulliWeights::uniform(3).unwrap(),
    )
    .expect("valid system")
}
