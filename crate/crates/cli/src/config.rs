//! JSON run configuration.

use std::path::Path;

use affine_dim::cocycle::{BernoulliWeights, LyapunovOptions};
use affine_dim::dimension::PipelineConfig;
use affine_dim::domination::{DEFAULT_EPS_SLOPE, DEFAULT_WORD_BUDGET};
use affine_dim::measure::IfsSystem;
use affine_dim::Matrix64;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;

/// An IFS as plain data: row-major matrices, translations, and weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IfsSpec {
    pub matrices: Vec<Vec<Vec<f64>>>,
    pub translations: Vec<Vec<f64>>,
    /// Defaults to uniform.
    #[serde(default)]
    pub weights: Option<Vec<f64>>,
}

impl IfsSpec {
    pub fn build(&self) -> Result<IfsSystem<f64>> {
        let linear = self
            .matrices
            .iter()
            .enumerate()
            .map(|(i, rows)| Matrix64::from_rows(rows).with_context(|| format!("ifs.matrices[{i}]")))
            .collect::<Result<Vec<_>>>()?;
        let weights = match &self.weights {
            Some(w) => BernoulliWeights::new(w.clone()).context("ifs.weights")?,
            None => BernoulliWeights::uniform(linear.len()).context("ifs.matrices")?,
        };
        IfsSystem::from_parts(linear, self.translations.clone(), weights).context("ifs")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DominationSection {
    pub n_max: usize,
    pub word_budget: u128,
    pub eps_slope: f64,
}

impl Default for DominationSection {
    fn default() -> Self {
        Self { n_max: 10, word_budget: DEFAULT_WORD_BUDGET, eps_slope: DEFAULT_EPS_SLOPE }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SampleSection {
    pub count: usize,
    /// `None` picks the depth whose truncation error is below `1e−6·R`.
    pub depth: Option<usize>,
}

impl Default for SampleSection {
    fn default() -> Self {
        Self { count: 10_000, depth: None }
    }
}

/// One closed-form oracle case for `validate`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum OracleCase {
    /// Carpet on an `m × n` grid; maps `(x + c)/m, (y + r)/n`.
    BedfordMcmullen {
        name: String,
        m: usize,
        n: usize,
        digits: Vec<(usize, usize)>,
        #[serde(default)]
        probs: Option<Vec<f64>>,
        /// Tolerance for the formula value from estimated inputs.
        #[serde(default = "default_formula_tol")]
        tol: f64,
        /// Tolerance for the empirical dimension.
        #[serde(default = "default_empirical_tol")]
        empirical_tol: f64,
    },
    /// One-dimensional similarities `r_i x + t_i` satisfying strong separation.
    SelfSimilar {
        name: String,
        ratios: Vec<f64>,
        translations: Vec<f64>,
        #[serde(default)]
        probs: Option<Vec<f64>>,
        #[serde(default = "default_formula_tol")]
        tol: f64,
        #[serde(default = "default_empirical_tol")]
        empirical_tol: f64,
    },
}

fn default_formula_tol() -> f64 {
    0.02
}

fn default_empirical_tol() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub schema_version: u32,
    pub seed: u64,
    pub ifs: Option<IfsSpec>,
    pub lyapunov: LyapunovOptions,
    pub domination: DominationSection,
    /// Options of the `dim` pipeline; its `seed` and `lyapunov` are taken from the top level.
    pub dim: PipelineConfig,
    pub sample: SampleSection,
    pub validate: Vec<OracleCase>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed: 0,
            ifs: None,
            lyapunov: LyapunovOptions::default(),
            domination: DominationSection::default(),
            dim: PipelineConfig::default(),
            sample: SampleSection::default(),
            validate: Vec::new(),
        }
    }
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        if cfg.schema_version != CONFIG_SCHEMA_VERSION {
            bail!("unsupported schema_version {} (expected {CONFIG_SCHEMA_VERSION})", cfg.schema_version);
        }
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("invalid config {}", path.display()))
    }

    pub fn ifs(&self) -> Result<IfsSystem<f64>> {
        match &self.ifs {
            Some(spec) => spec.build(),
            None => bail!("this command needs an `ifs` section in the config"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unknown_keys_are_located() {
        let err = RunConfig::parse("{\n  \"seed\": 1,\n  \"sed\": 2\n}").unwrap_err();
        let msg = format!("{err:#}");
        assert!(msg.contains("sed") && msg.contains("line 3"), "{msg}");
        let nested = RunConfig::parse(r#"{"lyapunov": {"step": 5}}"#).unwrap_err();
        assert!(format!("{nested:#}").contains("step"));
    }

    #[test]
    fn defaults_round_trip() {
        let cfg = RunConfig::parse("{}").unwrap();
        let again = RunConfig::parse(&serde_json::to_string(&cfg).unwrap()).unwrap();
        assert_eq!(cfg, again);
        assert!(RunConfig::parse(r#"{"schema_version": 9}"#).is_err());
    }

    #[test]
    fn ifs_spec_builds() {
        let cfg =
            RunConfig::parse(r#"{"ifs": {"matrices": [[[0.5, 0], [0, 0.25]]], "translations": [[0, 0]]}}"#).unwrap();
        assert_eq!(cfg.ifs().unwrap().dim(), 2);
        let bad = RunConfig::parse(r#"{"ifs": {"matrices": [[[2.0]]], "translations": [[0]]}}"#).unwrap();
        assert!(bad.ifs().is_err());
    }
}
