//! End-to-end dimension report for an IFS with Bernoulli weights.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::cocycle::{furstenberg_sample, lyapunov_spectrum, LyapunovOptions, DEFAULT_FURSTENBERG_ITERATIONS};
use crate::dimension::formulas::{
    kaplan_yorke_equivalence_check, ly_dimension, lyapunov_dimension, DimensionInputs, EquivalenceCheck,
    EquivalenceInputs, LyapunovDimension,
};
use crate::domination::{
    detect_domination, gap_ratio_scan, gap_ratio_scan_monte_carlo, DominationReport, DEFAULT_EPS_SLOPE,
    DEFAULT_WORD_BUDGET,
};
use crate::error::{Error, Result};
use crate::measure::{
    box_counting_dimension, check_separation, default_depth, local_dimension_estimate, project_cloud, sample_measure,
    BoxCountEstimate, BoxCountOptions, IfsSystem, LocalDimensionOptions, LocalDimensionReport, SeparationStatus,
    SeparationVerdict,
};
use crate::stats;
use crate::Scalar;

/// Version of the serialized [`DimensionReport`] layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// Where a reported number came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Estimated,
    ClosedForm,
    UserSupplied,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tagged<T> {
    pub value: T,
    pub provenance: Provenance,
}

impl<T> Tagged<T> {
    fn new(value: T, provenance: Provenance) -> Self {
        Self { value, provenance }
    }
}

/// Which form of the formula applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FormulaRoute {
    /// All exponents distinct; the sum runs over `1..d`.
    SimpleSpectrum,
    /// Repeated exponents; the sum runs over the dominated indices.
    Dominated,
    /// Repeated exponents in dimension `> 2` with no dominated index.
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub seed: u64,
    pub samples: usize,
    /// Truncation depth; `None` picks the depth whose error is below `1e−6·R`.
    pub depth: Option<usize>,
    pub lyapunov: LyapunovOptions,
    pub scan_length: usize,
    pub word_budget: u128,
    pub eps_slope: f64,
    pub separation_level: usize,
    /// Furstenberg flags per projection index.
    pub flags: usize,
    pub furstenberg_iterations: usize,
    /// User-supplied `H`, overriding the separation policy.
    pub fiber_entropy: Option<f64>,
    /// User-supplied projection dimensions, overriding the estimates.
    pub proj_dims: Option<BTreeMap<usize, f64>>,
    pub local_dimension: LocalDimensionOptions,
    pub box_count: BoxCountOptions,
    pub equivalence_tol: f64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            seed: 0,
            samples: 200_000,
            depth: None,
            lyapunov: LyapunovOptions::default(),
            scan_length: 10,
            word_budget: DEFAULT_WORD_BUDGET,
            eps_slope: DEFAULT_EPS_SLOPE,
            separation_level: 8,
            flags: 8,
            furstenberg_iterations: DEFAULT_FURSTENBERG_ITERATIONS,
            fiber_entropy: None,
            proj_dims: None,
            local_dimension: LocalDimensionOptions::default(),
            box_count: BoxCountOptions::default(),
            equivalence_tol: 0.01,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProjectionEstimate {
    pub index: usize,
    /// Median over flags of the projected cloud's box-count dimension.
    pub value: f64,
    pub provenance: Provenance,
    pub per_flag: Vec<f64>,
    pub iqr: Option<f64>,
}

/// `ly(H) = at_zero − H · per_unit`, reported when `H` is unknown.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionalLy {
    pub at_zero: f64,
    pub per_unit: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDimension {
    pub box_count: BoxCountEstimate,
    pub local: LocalDimensionReport,
    pub provenance: Provenance,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionReport {
    pub schema_version: u32,
    pub dim: usize,
    pub route: FormulaRoute,
    pub indices: Vec<usize>,
    pub entropy: Tagged<f64>,
    pub fiber_entropy: Option<Tagged<f64>>,
    pub chi: Tagged<Vec<f64>>,
    pub chi_stderr: Option<Vec<f64>>,
    pub multiplicities: Vec<usize>,
    pub domination: Option<DominationReport>,
    pub separation: SeparationVerdict,
    pub proj_dims: Vec<ProjectionEstimate>,
    /// `None` when `H` is unknown or the formula does not apply.
    pub ly_dim: Option<Tagged<f64>>,
    pub ly_dim_conditional: Option<ConditionalLy>,
    pub lyapunov_dim: Tagged<LyapunovDimension>,
    pub empirical_dim: EmpiricalDimension,
    pub equivalence: EquivalenceCheck,
    pub caveats: Vec<String>,
    pub samples: usize,
    pub depth: usize,
    pub resolved_config: PipelineConfig,
}

fn stage_seed(seed: u64, stage: u64) -> u64 {
    seed ^ stage.wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Runs every stage and assembles the report.
///
/// `H` is taken from the config when given; otherwise it is `0` only when the
/// separation check verifies strong separation and every weight is positive. Without
/// either, the report carries the formula as a function of `H` instead of a value.
pub fn full_pipeline<T: Scalar>(ifs: &IfsSystem<T>, config: &PipelineConfig) -> Result<DimensionReport> {
    let d = ifs.dim();
    let maps = ifs.linear_parts();
    let weights = ifs.weights();
    let seed = config.seed;
    let mut caveats = Vec::new();
    if config.samples < 2 {
        return Err(Error::invalid("need at least two samples"));
    }

    let spectrum = lyapunov_spectrum(&maps, weights, &config.lyapunov, stage_seed(seed, 1))?;
    let chi: Vec<f64> = spectrum.chi.iter().map(|c| c.to_f64_lossy()).collect();
    let chi_stderr = spectrum.stderr.as_ref().map(|s| s.iter().map(|c| c.to_f64_lossy()).collect());
    let entropy = weights.entropy().to_f64_lossy();

    let domination = if d >= 2 {
        let table = match gap_ratio_scan(&maps, config.scan_length, config.word_budget) {
            Ok(t) => t,
            Err(Error::BudgetExceeded { .. }) => {
                caveats.push("word budget exceeded: domination scanned on random words only".into());
                let samples = (config.word_budget / config.scan_length.max(1) as u128).min(1 << 20) as usize;
                gap_ratio_scan_monte_carlo(&maps, config.scan_length, samples, stage_seed(seed, 2))?
            }
            Err(e) => return Err(e),
        };
        Some(detect_domination(&table, config.eps_slope))
    } else {
        None
    };

    let (route, indices) = if spectrum.is_simple() {
        (FormulaRoute::SimpleSpectrum, (1..d).collect::<Vec<_>>())
    } else {
        let dominated = domination.as_ref().map(|r| r.dominated_indices.clone()).unwrap_or_default();
        if dominated.is_empty() && d > 2 {
            caveats.push("repeated exponents without a dominated index: formula not applicable".into());
            (FormulaRoute::NotApplicable, vec![])
        } else {
            (FormulaRoute::Dominated, dominated)
        }
    };

    let separation = check_separation(ifs, config.separation_level)?;
    let fiber_entropy = match config.fiber_entropy {
        Some(h) => {
            if !(0.0..=entropy + 1e-12).contains(&h) {
                return Err(Error::invalid(format!("H = {h} must lie in [0, h] with h = {entropy}")));
            }
            Some(Tagged::new(h, Provenance::UserSupplied))
        }
        None if separation.status == SeparationStatus::SscVerified && weights.is_strictly_positive() => {
            Some(Tagged::new(0.0, Provenance::ClosedForm))
        }
        None => {
            caveats.push(format!(
                "separation {}: H unknown, Ledrappier-Young value reported as a function of H",
                status_label(separation.status)
            ));
            None
        }
    };

    let depth = match config.depth {
        Some(n) => n,
        None => default_depth(ifs)?,
    };
    let cloud = sample_measure(ifs, config.samples, depth, stage_seed(seed, 3))?;

    let mut proj_dims = Vec::new();
    if let Some(user) = &config.proj_dims {
        for &i in &indices {
            let v = *user.get(&i).ok_or(Error::MissingProjection(i))?;
            proj_dims.push(ProjectionEstimate {
                index: i,
                value: v,
                provenance: Provenance::UserSupplied,
                per_flag: vec![],
                iqr: None,
            });
        }
    } else if !indices.is_empty() {
        let flags = furstenberg_sample(
            &maps,
            weights,
            &indices,
            config.furstenberg_iterations,
            config.flags.max(1),
            stage_seed(seed, 4),
        )?;
        for &i in &indices {
            let mut per_flag = Vec::with_capacity(flags.len());
            for f in &flags {
                let v = f.flag.member(d - i).ok_or_else(|| Error::Inconsistent(format!("flag lacks V_{i}")))?;
                let perp = v.complement().ok_or_else(|| Error::Inconsistent("empty complement".into()))?;
                let projected = project_cloud(&cloud, &perp)?;
                per_flag.push(box_counting_dimension(&projected, &config.box_count)?.dimension);
            }
            let raw = stats::median(&per_flag);
            let value = raw.clamp(0.0, i as f64);
            if value != raw {
                caveats.push(format!("projection dimension for index {i} clamped from {raw:.4} to [0, {i}]"));
            }
            proj_dims.push(ProjectionEstimate {
                index: i,
                value,
                provenance: Provenance::Estimated,
                iqr: Some(stats::iqr(&per_flag)),
                per_flag,
            });
        }
    }
    let proj_map: BTreeMap<usize, f64> = proj_dims.iter().map(|p| (p.index, p.value)).collect();

    let formula = |h_fiber: f64| {
        ly_dimension(&DimensionInputs {
            entropy,
            fiber_entropy: h_fiber,
            chi: chi.clone(),
            proj_dims: proj_map.clone(),
            indices: indices.clone(),
        })
    };
    let (ly_dim, ly_dim_conditional) = if route == FormulaRoute::NotApplicable {
        (None, None)
    } else {
        match &fiber_entropy {
            Some(h) => (Some(Tagged::new(formula(h.value)?, Provenance::Estimated)), None),
            None => (None, Some(ConditionalLy { at_zero: formula(0.0)?, per_unit: 1.0 / chi[d - 1] })),
        }
    };

    let lyapunov_dim = lyapunov_dimension(entropy, &chi);
    if lyapunov_dim.clamped {
        caveats.push(format!("Lyapunov dimension clamped from {:.4}", lyapunov_dim.raw));
    }
    let equivalence = kaplan_yorke_equivalence_check(
        &EquivalenceInputs {
            ly_dim: ly_dim.as_ref().map(|t| t.value),
            lyapunov_dim: lyapunov_dim.value,
            fiber_entropy: fiber_entropy.as_ref().map(|t| t.value),
            proj_dims: proj_map,
            indices: indices.clone(),
        },
        config.equivalence_tol,
    );
    if equivalence.consistent == Some(false) {
        caveats.push("equivalence sides disagree at the configured tolerance".into());
    }

    let empirical_dim = EmpiricalDimension {
        box_count: box_counting_dimension(&cloud, &config.box_count)?,
        local: local_dimension_estimate(&cloud, &config.local_dimension, stage_seed(seed, 5))?,
        provenance: Provenance::Estimated,
    };

    Ok(DimensionReport {
        schema_version: REPORT_SCHEMA_VERSION,
        dim: d,
        route,
        indices,
        entropy: Tagged::new(entropy, Provenance::ClosedForm),
        fiber_entropy,
        chi: Tagged::new(chi, Provenance::Estimated),
        chi_stderr,
        multiplicities: spectrum.multiplicities.clone(),
        domination,
        separation,
        proj_dims,
        ly_dim,
        ly_dim_conditional,
        lyapunov_dim: Tagged::new(lyapunov_dim, Provenance::Estimated),
        empirical_dim,
        equivalence,
        caveats,
        samples: cloud.len(),
        depth,
        resolved_config: config.clone(),
    })
}

fn status_label(s: SeparationStatus) -> &'static str {
    match s {
        SeparationStatus::SscVerified => "ssc-verified",
        SeparationStatus::OverlapDetected => "overlap-detected",
        SeparationStatus::Inconclusive => "inconclusive",
    }
}
