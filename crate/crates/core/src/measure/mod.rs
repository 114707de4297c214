//! Self-affine measures: the IFS, sampling, separation, and empirical dimension.

pub mod cloud;
pub mod estimators;
pub mod fixtures;
pub mod ifs;
pub mod self_affinity;
pub mod separation;

pub use cloud::{
    default_depth, depth_for_resolution, natural_projection, project_cloud, sample_measure, PointCloud, ProjectedPoint,
};
pub use estimators::{
    box_counting_dimension, local_dimension_estimate, BoxCountEstimate, BoxCountOptions, LocalDimensionOptions,
    LocalDimensionReport,
};
pub use ifs::{AffineMap, IfsSystem};
pub use self_affinity::{random_test_boxes, self_affinity_check, AxisBox, BoxCheck, BoxStatus, SelfAffinityReport};
pub use separation::{
    check_separation, lift_ifs, lifted_weakest_singular_values, LiftedIfs, SeparationStatus, SeparationVerdict,
    SeparationWitness,
};
