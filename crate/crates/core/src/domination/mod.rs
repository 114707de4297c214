//! Dominated splittings: gap-ratio scans, the STP cone criterion, and the bundles
//! `F^i`, `E^i` with their splitting subspaces.

pub mod bundles;
pub mod detect;
pub mod positivity;
pub mod scan;

pub use bundles::{
    splitting_subspaces, strong_stable_bundle, strong_stable_bundle_with_tol, two_sided_from, BundleEstimate,
    Splitting, DEFAULT_BUNDLE_TOL,
};
pub use detect::{
    detect_domination, DominationReport, DominationStatus, IndexDomination, DEFAULT_EPS_SLOPE, MAX_RELATIVE_RESIDUAL,
    MIN_SCAN_LENGTH,
};
pub use positivity::{cone_invariance_check, stp_check, stp_report, StpReport, DEFAULT_EPS_MINOR};
pub use scan::{exhaustive_cost, gap_ratio_scan, gap_ratio_scan_monte_carlo, GapRatioTable, DEFAULT_WORD_BUDGET};
