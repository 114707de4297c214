//! Subcommand implementations. Each returns the bytes of its primary report.

use std::fmt::Write as _;
use std::path::Path;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use affine_dim::cocycle::{expected_exponent_sum, lyapunov_spectrum, BernoulliWeights};
use affine_dim::dimension::{
    bedford_mcmullen_closed_form, full_pipeline, self_similar_dimension, DimensionReport, Provenance, Tagged,
};
use affine_dim::domination::{
    cone_invariance_check, detect_domination, exhaustive_cost, gap_ratio_scan, stp_report, DominationReport, StpReport,
    DEFAULT_EPS_MINOR,
};
use affine_dim::measure::{check_separation, default_depth, sample_measure, IfsSystem, SeparationStatus};
use affine_dim::{Error, LyapunovSpectrum64, Matrix64};
use anyhow::{bail, Context, Result};
use serde::Serialize;

use crate::config::{OracleCase, RunConfig, CONFIG_SCHEMA_VERSION};

/// Wall-clock details, left out under `--deterministic`.
#[derive(Debug, Serialize)]
pub struct RunInfo {
    pub elapsed_seconds: f64,
    pub finished_unix_seconds: u64,
}

#[derive(Debug, Serialize)]
struct Envelope<'a, R> {
    schema_version: u32,
    command: &'a str,
    report: R,
    warnings: &'a [String],
    resolved_config: &'a RunConfig,
    #[serde(skip_serializing_if = "Option::is_none")]
    run_info: Option<RunInfo>,
}

pub struct RunContext<'a> {
    pub config: &'a RunConfig,
    /// Start of the run; `None` under `--deterministic`.
    pub started: Option<Instant>,
    pub warnings: Vec<String>,
}

impl RunContext<'_> {
    pub fn warn(&mut self, msg: impl Into<String>) {
        let msg = msg.into();
        eprintln!("warning: {msg}");
        self.warnings.push(msg);
    }

    fn envelope<R: Serialize>(&mut self, command: &str, report: R) -> Result<Vec<u8>> {
        let env = Envelope {
            schema_version: CONFIG_SCHEMA_VERSION,
            command,
            report,
            warnings: &self.warnings,
            resolved_config: self.config,
            run_info: self.started.map(|t| RunInfo {
                elapsed_seconds: t.elapsed().as_secs_f64(),
                finished_unix_seconds: SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            }),
        };
        let mut bytes = serde_json::to_vec_pretty(&env)?;
        bytes.push(b'\n');
        Ok(bytes)
    }
}

#[derive(Debug, Serialize)]
struct LyapunovReport {
    chi: Tagged<Vec<f64>>,
    stderr: Option<Vec<f64>>,
    partial_sums: Vec<f64>,
    partial_sum_stderr: Option<Vec<f64>>,
    multiplicities: Vec<usize>,
    gap_threshold: f64,
    steps: usize,
    trials: usize,
    /// `−Σ_k p_k log|det A_k|`, which the exponents must sum to.
    expected_sum: Tagged<f64>,
    entropy: Tagged<f64>,
}

pub fn lyapunov(cx: &mut RunContext, csv: Option<&Path>) -> Result<Vec<u8>> {
    let ifs = cx.config.ifs()?;
    let maps = ifs.linear_parts();
    let opts = &cx.config.lyapunov;
    let spectrum: LyapunovSpectrum64 = lyapunov_spectrum(&maps, ifs.weights(), opts, cx.config.seed)?;
    if spectrum.stderr.is_none() {
        cx.warn("a single trial gives no standard errors");
    }
    if let Some(path) = csv {
        let mut out = String::from("trial");
        for j in 1..=spectrum.dim() {
            write!(out, ",s{j}")?;
        }
        out.push('\n');
        for (t, sums) in spectrum.trial_partial_sums.iter().enumerate() {
            write!(out, "{t}")?;
            for s in sums {
                write!(out, ",{s:?}")?;
            }
            out.push('\n');
        }
        std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    }
    let report = LyapunovReport {
        chi: Tagged { value: spectrum.chi.clone(), provenance: Provenance::Estimated },
        stderr: spectrum.stderr.clone(),
        partial_sums: spectrum.partial_sums.clone(),
        partial_sum_stderr: spectrum.partial_sum_stderr.clone(),
        multiplicities: spectrum.multiplicities.clone(),
        gap_threshold: spectrum.gap_threshold,
        steps: spectrum.steps,
        trials: opts.trials,
        expected_sum: Tagged {
            value: expected_exponent_sum(&maps, ifs.weights())?,
            provenance: Provenance::ClosedForm,
        },
        entropy: Tagged { value: ifs.weights().entropy(), provenance: Provenance::ClosedForm },
    };
    cx.envelope("lyapunov", report)
}

#[derive(Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
enum ScanStatus {
    Complete,
    Inconclusive,
}

#[derive(Debug, Serialize)]
struct ConeCheck {
    p: usize,
    invariant: bool,
}

#[derive(Debug, Serialize)]
struct DominationOutput {
    status: ScanStatus,
    dominated_indices: Vec<usize>,
    words_required: u128,
    words_examined: u128,
    domination: DominationReport,
    provenance: Provenance,
    stp: Vec<StpReport>,
    /// Only evaluated when every map is strictly totally positive.
    cone_invariance: Vec<ConeCheck>,
}

pub fn domination(cx: &mut RunContext) -> Result<Vec<u8>> {
    let ifs = cx.config.ifs()?;
    let maps = ifs.linear_parts();
    let d = ifs.dim();
    let sec = cx.config.domination.clone();
    let required = exhaustive_cost(maps.len(), sec.n_max);
    let (status, report, examined) = match gap_ratio_scan(&maps, sec.n_max, sec.word_budget) {
        Ok(table) => (ScanStatus::Complete, detect_domination(&table, sec.eps_slope), table.words_examined),
        Err(Error::BudgetExceeded { required, budget }) => {
            cx.warn(format!("exhaustive scan needs {required} words, budget is {budget}: domination inconclusive"));
            (ScanStatus::Inconclusive, DominationReport::all_inconclusive(d, sec.n_max, sec.eps_slope), 0)
        }
        Err(e) => return Err(e.into()),
    };
    let stp = maps.iter().map(|a| stp_report(a, DEFAULT_EPS_MINOR)).collect::<affine_dim::Result<Vec<_>>>()?;
    let mut cones = Vec::new();
    if d >= 2 && stp.iter().all(|r| r.strictly_totally_positive) {
        for p in 1..d {
            cones.push(ConeCheck { p, invariant: cone_invariance_check(&maps, p, DEFAULT_EPS_MINOR)? });
        }
    }
    let out = DominationOutput {
        status,
        dominated_indices: report.dominated_indices.clone(),
        words_required: required,
        words_examined: examined,
        domination: report,
        provenance: Provenance::Estimated,
        stp,
        cone_invariance: cones,
    };
    cx.envelope("domination", out)
}

pub struct DimFlags<'a> {
    pub assume_ssc: bool,
    pub histogram: Option<&'a Path>,
}

pub fn dim(cx: &mut RunContext, flags: &DimFlags) -> Result<Vec<u8>> {
    let ifs = cx.config.ifs()?;
    let cfg = &cx.config.dim;
    if flags.assume_ssc {
        let verdict = check_separation(&ifs, cfg.separation_level)?;
        if verdict.status != SeparationStatus::SscVerified {
            bail!(
                "refusing --assume-ssc: the separation check at level {} returned {:?}",
                verdict.level,
                verdict.status
            );
        }
    }
    let report: DimensionReport = full_pipeline(&ifs, cfg)?;
    for c in &report.caveats {
        cx.warn(c.clone());
    }
    if let Some(path) = flags.histogram {
        let mut out = String::from("center,slope\n");
        for (i, s) in report.empirical_dim.local.slopes.iter().enumerate() {
            writeln!(out, "{i},{s:?}")?;
        }
        std::fs::write(path, out).with_context(|| format!("cannot write {}", path.display()))?;
    }
    cx.envelope("dim", report)
}

pub fn sample(cx: &mut RunContext) -> Result<Vec<u8>> {
    let ifs = cx.config.ifs()?;
    let sec = &cx.config.sample;
    let depth = match sec.depth {
        Some(n) => n,
        None => default_depth(&ifs)?,
    };
    let cloud = sample_measure(&ifs, sec.count, depth, cx.config.seed)?;
    let mut bytes = Vec::new();
    cloud.write_csv(&mut bytes)?;
    Ok(bytes)
}

#[derive(Debug, Clone, Serialize)]
pub struct ValidationRow {
    pub name: String,
    pub kind: &'static str,
    pub oracle: f64,
    pub pipeline: Option<f64>,
    pub residual: Option<f64>,
    pub tol: f64,
    pub empirical: f64,
    pub empirical_residual: f64,
    pub empirical_tol: f64,
    pub pass: bool,
}

#[derive(Debug, Serialize)]
pub struct ValidationReport {
    pub rows: Vec<ValidationRow>,
    pub all_passed: bool,
}

fn carpet_ifs(m: usize, n: usize, digits: &[(usize, usize)], probs: &[f64]) -> Result<IfsSystem<f64>> {
    let a = Matrix64::diag(&[1.0 / m as f64, 1.0 / n as f64]);
    Ok(IfsSystem::from_parts(
        vec![a; digits.len()],
        digits.iter().map(|&(c, r)| vec![c as f64 / m as f64, r as f64 / n as f64]).collect(),
        BernoulliWeights::new(probs.to_vec())?,
    )?)
}

fn similarity_ifs(ratios: &[f64], translations: &[f64], probs: &[f64]) -> Result<IfsSystem<f64>> {
    if ratios.len() != translations.len() {
        bail!("need one translation per ratio");
    }
    Ok(IfsSystem::from_parts(
        ratios.iter().map(|&r| Matrix64::diag(&[r])).collect(),
        translations.iter().map(|&t| vec![t]).collect(),
        BernoulliWeights::new(probs.to_vec())?,
    )?)
}

fn uniform(k: usize) -> Vec<f64> {
    vec![1.0 / k as f64; k]
}

/// Runs every oracle case through the generic pipeline. Cases are assumed to satisfy
/// the open set condition, so `H = 0` is supplied.
pub fn validate(cx: &mut RunContext) -> Result<(Vec<u8>, String, bool)> {
    if cx.config.validate.is_empty() {
        bail!("the validation suite in the config is empty");
    }
    let mut rows = Vec::new();
    for case in cx.config.validate.clone() {
        let (name, kind, oracle, ifs, tol, empirical_tol) = match &case {
            OracleCase::BedfordMcmullen { name, m, n, digits, probs, tol, empirical_tol } => {
                let p = probs.clone().unwrap_or_else(|| uniform(digits.len()));
                let bm = bedford_mcmullen_closed_form(digits, &p, *m, *n)?;
                (name.clone(), "bedford-mcmullen", bm.dimension, carpet_ifs(*m, *n, digits, &p)?, *tol, *empirical_tol)
            }
            OracleCase::SelfSimilar { name, ratios, translations, probs, tol, empirical_tol } => {
                let p = probs.clone().unwrap_or_else(|| uniform(ratios.len()));
                let v = self_similar_dimension(&p, ratios)?;
                (name.clone(), "self-similar", v, similarity_ifs(ratios, translations, &p)?, *tol, *empirical_tol)
            }
        };
        let cfg = affine_dim::dimension::PipelineConfig {
            fiber_entropy: Some(0.0),
            proj_dims: None,
            ..cx.config.dim.clone()
        };
        let report = full_pipeline(&ifs, &cfg).with_context(|| format!("case {name}"))?;
        let pipeline = report.ly_dim.as_ref().map(|t| t.value);
        let residual = pipeline.map(|v| (v - oracle).abs());
        let empirical = report.empirical_dim.box_count.dimension;
        let empirical_residual = (empirical - oracle).abs();
        let pass = residual.is_some_and(|r| r <= tol) && empirical_residual <= empirical_tol;
        rows.push(ValidationRow {
            name,
            kind,
            oracle,
            pipeline,
            residual,
            tol,
            empirical,
            empirical_residual,
            empirical_tol,
            pass,
        });
    }
    let all_passed = rows.iter().all(|r| r.pass);
    let table = render_table(&rows);
    let bytes = cx.envelope("validate", ValidationReport { rows, all_passed })?;
    Ok((bytes, table, all_passed))
}

fn render_table(rows: &[ValidationRow]) -> String {
    let mut out = format!(
        "{:<24} {:<17} {:>8} {:>8} {:>9} {:>6} {:>9} {:>9} {:>6}  {}\n",
        "case", "kind", "oracle", "pipeline", "|diff|", "tol", "empirical", "|diff|", "tol", "result"
    );
    for r in rows {
        let opt = |v: Option<f64>, p: usize| v.map_or("-".to_string(), |x| format!("{x:.p$}"));
        let _ = writeln!(
            out,
            "{:<24} {:<17} {:>8.4} {:>8} {:>9} {:>6.3} {:>9.4} {:>9.2e} {:>6.3}  {}",
            r.name,
            r.kind,
            r.oracle,
            opt(r.pipeline, 4),
            r.residual.map_or("-".to_string(), |x| format!("{x:.2e}")),
            r.tol,
            r.empirical,
            r.empirical_residual,
            r.empirical_tol,
            if r.pass { "pass" } else { "FAIL" }
        );
    }
    out
}
