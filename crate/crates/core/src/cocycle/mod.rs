//! The Bernoulli matrix cocycle: words, products, exponents and invariant flags.

pub mod furstenberg;
pub mod lyapunov;
pub mod oseledets;
pub mod product;
pub mod weights;

pub use furstenberg::{
    fast_flag_dims, furstenberg_push, furstenberg_sample, line_angle, FlagSample, DEFAULT_FURSTENBERG_ITERATIONS,
};
pub use lyapunov::{
    cuts_from_multiplicities, detect_multiplicities, expected_exponent_sum, exterior_growth_rate, lyapunov_spectrum,
    LyapunovOptions, LyapunovSpectrum,
};
pub use oseledets::{oseledets_fast_flag, OseledetsEstimate, OSELEDETS_TOL};
pub use product::{factor_product, random_orthogonal, scaled_product, word_product, ProductFactor, ScaledProduct};
pub use weights::{entropy_of, BernoulliWeights, SymbolWord, TwoSidedWord};
