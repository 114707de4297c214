//! Dimension formulas and the end-to-end pipeline.

pub mod formulas;
pub mod pipeline;

pub use formulas::{
    bedford_mcmullen_closed_form, kaplan_yorke_equivalence_check, ly_dimension, lyapunov_dimension,
    self_similar_dimension, telescoping_identity_check, BedfordMcMullen, DimensionInputs, EquivalenceCheck,
    EquivalenceInputs, EquivalenceVerdict, LyapunovDimension, TelescopingCheck,
};
pub use pipeline::{
    full_pipeline, ConditionalLy, DimensionReport, EmpiricalDimension, FormulaRoute, PipelineConfig,
    ProjectionEstimate, Provenance, Tagged, REPORT_SCHEMA_VERSION,
};
