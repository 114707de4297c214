//! Numerics for the Ledrappier-Young theory of self-affine measures.
//!
//! The crate is generic over the scalar type (`f32` or `f64`, see [`Scalar`]); the
//! `*64` aliases below fix `f64`, which is what the estimators are tuned for.

// `!(x > 0)` is used on purpose so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cocycle;
pub mod dimension;
pub mod domination;
pub mod error;
pub mod linalg;
pub mod measure;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type Matrix64 = linalg::Matrix<f64>;
pub type SubspaceFrame64 = linalg::SubspaceFrame<f64>;
pub type FlagChain64 = linalg::FlagChain<f64>;
pub type BernoulliWeights64 = cocycle::BernoulliWeights<f64>;
pub type LyapunovSpectrum64 = cocycle::LyapunovSpectrum<f64>;
pub type IfsSystem64 = measure::IfsSystem<f64>;
pub type PointCloud64 = measure::PointCloud<f64>;
pub type DimensionInputs64 = dimension::DimensionInputs<f64>;
