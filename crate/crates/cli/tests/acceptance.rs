//! Acceptance suite: one line per criterion, with the tolerance it was judged against.
//! Runs as a plain binary (`harness = false`) so the lines are always printed.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use affine_dim::cocycle::{
    expected_exponent_sum, furstenberg_push, furstenberg_sample, line_angle, lyapunov_spectrum, random_orthogonal,
    BernoulliWeights, LyapunovOptions,
};
use affine_dim::dimension::{
    bedford_mcmullen_closed_form, full_pipeline, ly_dimension, lyapunov_dimension, telescoping_identity_check,
    DimensionInputs, DimensionReport, EquivalenceVerdict, PipelineConfig,
};
use affine_dim::domination::{
    detect_domination, gap_ratio_scan, stp_check, strong_stable_bundle, two_sided_from, DominationReport,
    DEFAULT_EPS_SLOPE, DEFAULT_WORD_BUDGET,
};
use affine_dim::linalg::{exterior_power, principal_angle_distance, singular_values, spectral_norm, SubspaceFrame};
use affine_dim::measure::fixtures::{bm_carpet, cantor};
use affine_dim::measure::{
    check_separation, lift_ifs, lifted_weakest_singular_values, random_test_boxes, sample_measure, self_affinity_check,
    IfsSystem, SeparationStatus,
};
use affine_dim::stats::{ks_two_sample, stream_rng};
use affine_dim::Matrix64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn timed(limit: Option<Duration>, f: impl FnOnce() -> Outcome) -> Outcome {
    let start = Instant::now();
    let mut o = f();
    let took = start.elapsed();
    match limit {
        Some(limit) => {
            o.pass &= took < limit;
            o.detail = format!("{}; runtime {:.2} s (limit {} s)", o.detail, took.as_secs_f64(), limit.as_secs());
        }
        None => o.detail = format!("{}; runtime {:.2} s", o.detail, took.as_secs_f64()),
    }
    o
}

fn uniform_matrix(d: usize, lo: f64, hi: f64, rng: &mut ChaCha8Rng) -> Matrix64 {
    Matrix64::new(d, d, (0..d * d).map(|_| rng.random_range(lo..hi)).collect()).unwrap()
}

/// Rescales `a` so its spectral norm is `target`.
fn with_norm(a: &Matrix64, target: f64) -> Matrix64 {
    a.scale(target / spectral_norm(a))
}

fn random_contraction(d: usize, rng: &mut ChaCha8Rng) -> Matrix64 {
    loop {
        let a = with_norm(&uniform_matrix(d, -1.0, 1.0, rng), rng.random_range(0.3..0.8));
        if singular_values(&a).unwrap()[0] > 0.05 {
            return a;
        }
    }
}

fn random_weights(k: usize, rng: &mut ChaCha8Rng) -> BernoulliWeights<f64> {
    let raw: Vec<f64> = (0..k).map(|_| rng.random_range(0.2..1.0)).collect();
    let total: f64 = raw.iter().sum();
    BernoulliWeights::new(raw.iter().map(|w| w / total).collect()).unwrap()
}

/// Product of positive lower and upper bidiagonal factors, rescaled to be contractive.
fn random_stp(d: usize, rng: &mut ChaCha8Rng) -> Matrix64 {
    loop {
        let mut m = Matrix64::identity(d);
        for lower in [true, true, true, false, false, false] {
            let mut f = Matrix64::zeros(d, d);
            for i in 0..d {
                f[(i, i)] = rng.random_range(0.5..1.5);
                if i + 1 < d {
                    let (r, c) = if lower { (i + 1, i) } else { (i, i + 1) };
                    f[(r, c)] = rng.random_range(0.2..1.0);
                }
            }
            m = &m * &f;
        }
        let m = with_norm(&m, rng.random_range(0.4..0.8));
        if stp_check(&m) {
            return m;
        }
    }
}

fn scan(maps: &[Matrix64]) -> DominationReport {
    detect_domination(&gap_ratio_scan(maps, 10, DEFAULT_WORD_BUDGET).unwrap(), DEFAULT_EPS_SLOPE)
}

fn lyapunov_diagonal_oracle() -> Outcome {
    timed(Some(Duration::from_secs(5)), || {
        let a = Matrix64::diag(&[1.0 / 3.0, 0.5]);
        let opts = LyapunovOptions { steps: 10_000, trials: 20, ..Default::default() };
        let s = lyapunov_spectrum(&[a.clone(), a], &BernoulliWeights::uniform(2).unwrap(), &opts, 1).unwrap();
        let err = (s.chi[0] - 2f64.ln()).abs().max((s.chi[1] - 3f64.ln()).abs());
        outcome(err <= 0.01, format!("chi = ({:.5}, {:.5}), max |err| = {err:.2e} <= 0.01", s.chi[0], s.chi[1]))
    })
}

fn spectrum_conservation() -> Outcome {
    timed(None, || {
        let mut rng = stream_rng(2, 0);
        let mut good = 0;
        for case in 0..50 {
            let d = if case < 25 { 2 } else { 3 };
            let k = rng.random_range(2..=3);
            let maps: Vec<Matrix64> = (0..k).map(|_| random_contraction(d, &mut rng)).collect();
            let w = random_weights(k, &mut rng);
            let s = lyapunov_spectrum(&maps, &w, &LyapunovOptions::default(), case).unwrap();
            let residual = (s.partial_sums[d - 1] - expected_exponent_sum(&maps, &w).unwrap()).abs();
            if residual <= 3.0 * s.total_stderr().unwrap() {
                good += 1;
            }
        }
        outcome(good >= 47, format!("{good}/50 tuples with |sum chi + sum p log|det|| <= 3 stderr (need 47)"))
    })
}

fn exterior_identities() -> Outcome {
    timed(Some(Duration::from_secs(10)), || {
        let mut rng = stream_rng(3, 0);
        let (mut worst_mult, mut worst_norm) = (0.0f64, 0.0f64);
        for _ in 0..1000 {
            let d = rng.random_range(1..=5);
            let p = rng.random_range(1..=d);
            let a = uniform_matrix(d, -1.0, 1.0, &mut rng);
            let b = uniform_matrix(d, -1.0, 1.0, &mut rng);
            let (ea, eb) = (exterior_power(&a, p).unwrap(), exterior_power(&b, p).unwrap());
            let lhs = exterior_power(&(&a * &b), p).unwrap();
            let scale = (spectral_norm(&ea) * spectral_norm(&eb)).max(f64::MIN_POSITIVE);
            worst_mult = worst_mult.max(spectral_norm(&lhs.sub(&(&ea * &eb))) / scale);
            let top: f64 = singular_values(&a).unwrap().iter().rev().take(p).product();
            worst_norm = worst_norm.max((spectral_norm(&ea) - top).abs() / top.max(f64::MIN_POSITIVE));
        }
        outcome(
            worst_mult <= 1e-8 && worst_norm <= 1e-8,
            format!("1000 pairs: multiplicativity rel {worst_mult:.1e}, norm identity rel {worst_norm:.1e} (<= 1e-8)"),
        )
    })
}

fn stp_implies_domination() -> Outcome {
    timed(None, || {
        let mut rng = stream_rng(4, 0);
        let stp_ok = (0..20)
            .filter(|_| {
                let maps = vec![random_stp(3, &mut rng), random_stp(3, &mut rng)];
                scan(&maps).dominated_indices == vec![1, 2]
            })
            .count();
        let conformal_ok = (0..5)
            .filter(|_| {
                let maps: Vec<Matrix64> = (0..2)
                    .map(|_| random_orthogonal::<f64, _>(3, &mut rng).scale(rng.random_range(0.3..0.7)))
                    .collect();
                scan(&maps).dominated_indices.is_empty()
            })
            .count();
        outcome(
            stp_ok == 20 && conformal_ok == 5,
            format!("STP tuples with D = {{1, 2}}: {stp_ok}/20; conformal tuples with D = {{}}: {conformal_ok}/5"),
        )
    })
}

fn bundle_bound() -> Outcome {
    timed(None, || {
        let mut rng = stream_rng(5, 0);
        let mut tuples = vec![
            vec![Matrix64::diag(&[1.0 / 3.0, 0.5]); 2],
            vec![Matrix64::diag(&[0.25, 1.0 / 3.0, 0.5]), Matrix64::diag(&[0.2, 0.3, 0.6])],
        ];
        for _ in 0..3 {
            tuples.push(vec![random_stp(3, &mut rng), random_stp(3, &mut rng)]);
        }
        let mut worst_ratio = 0.0f64;
        let mut failures = Vec::new();
        for (t, maps) in tuples.iter().enumerate() {
            let report = scan(maps);
            let w = BernoulliWeights::<f64>::uniform(maps.len()).unwrap();
            for &i in &report.dominated_indices {
                let (mut sup20, mut sup40) = (0.0f64, 0.0f64);
                for k in 0..100 {
                    let word = two_sided_from(&w.sample_word(122, &mut stream_rng(50 + t as u64, k)), 60);
                    match strong_stable_bundle(maps, &word, i, 40, &report) {
                        Ok(b) => {
                            sup20 = sup20.max(b.growth_constant_up_to(20));
                            sup40 = sup40.max(b.growth_constant_up_to(40));
                        }
                        Err(e) => failures.push(format!("tuple {t} index {i}: {e}")),
                    }
                }
                let ratio = sup40 / sup20;
                if !(sup40.is_finite() && ratio < 2.0) {
                    failures.push(format!("tuple {t} index {i}: sup40/sup20 = {ratio}"));
                }
                worst_ratio = worst_ratio.max(ratio);
            }
        }
        let detail = format!("5 tuples x 100 words: max sup_(n<=40)/sup_(n<=20) = {worst_ratio:.4} (< 2)");
        match failures.first() {
            None => outcome(true, detail),
            Some(f) => outcome(false, format!("{detail}; {} failures, first: {f}", failures.len())),
        }
    })
}

fn furstenberg_oracles() -> Outcome {
    timed(None, || {
        let a = Matrix64::diag(&[1.0 / 3.0, 0.5]);
        let w = BernoulliWeights::uniform(2).unwrap();
        let samples = furstenberg_sample(&[a.clone(), a], &w, &[1], 100, 10_000, 6).unwrap();
        let e1 = SubspaceFrame::coordinate(2, &[0]).unwrap();
        let worst = samples
            .iter()
            .map(|s| principal_angle_distance(s.flag.member(1).unwrap(), &e1).unwrap())
            .fold(0.0f64, f64::max);

        let mut rng = stream_rng(6, 0);
        let maps: Vec<Matrix64> = (0..2).map(|_| with_norm(&uniform_matrix(2, 0.05, 0.5, &mut rng), 0.7)).collect();
        let w = random_weights(2, &mut rng);
        let s = furstenberg_sample(&maps, &w, &[1], 100, 4000, 7).unwrap();
        let pushed = furstenberg_push(&s, &maps, &w, 8).unwrap();
        let angles = |v: &[_]| -> Vec<f64> {
            v.iter().map(|x: &affine_dim::cocycle::FlagSample<f64>| line_angle(&x.flag).unwrap()).collect()
        };
        let ks = ks_two_sample(&angles(&s), &angles(&pushed));
        outcome(
            worst < 1e-6 && ks < 0.05,
            format!("diagonal: max angle to e1 over 10^4 flags = {worst:.1e} (< 1e-6); positive tuple KS = {ks:.4} (< 0.05)"),
        )
    })
}

fn carpet_report(samples: usize) -> DimensionReport {
    let cfg = PipelineConfig { seed: 7, samples, fiber_entropy: Some(0.0), ..Default::default() };
    full_pipeline(&bm_carpet(), &cfg).unwrap()
}

fn ly_vs_closed_form(carpet: &mut Option<DimensionReport>) -> Outcome {
    timed(Some(Duration::from_secs(60)), || {
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        let bm = bedford_mcmullen_closed_form(&[(0, 0), (1, 0), (2, 1)], &[1.0 / 3.0; 3], 3, 2).unwrap();
        let ly = ly_dimension(&DimensionInputs {
            entropy: l3,
            fiber_entropy: 0.0,
            chi: vec![l2, l3],
            proj_dims: BTreeMap::from([(1, (l3 - 2.0 / 3.0 * l2) / l2)]),
            indices: vec![1],
        })
        .unwrap();
        let formula_err = (ly - 1.3390).abs().max((ly - bm.dimension).abs());
        let report = carpet_report(200_000);
        let empirical = report.empirical_dim.box_count.dimension;
        let pipeline = report.ly_dim.as_ref().map_or(f64::NAN, |t| t.value);
        *carpet = Some(report);
        let emp_err = (empirical - bm.dimension).abs();
        outcome(
            formula_err <= 1e-3 && emp_err <= 0.05,
            format!(
                "formula {ly:.6} vs oracle {:.6} (|err| {formula_err:.1e} <= 1e-3); box count {empirical:.4} \
                 (|err| {emp_err:.4} <= 0.05); pipeline estimate {pipeline:.4}",
                bm.dimension
            ),
        )
    })
}

fn lyapunov_dimension_checks(carpet: Option<&DimensionReport>) -> Outcome {
    timed(None, || {
        let mut rng = stream_rng(8, 0);
        let mut mismatches = 0;
        for _ in 0..1000 {
            let d = rng.random_range(1..=6);
            let mut chi: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..3.0)).collect();
            chi.sort_by(f64::total_cmp);
            let h = rng.random_range(0.0..20.0);
            let mut best = f64::INFINITY;
            for k in 1..=d {
                let below: f64 = chi[..k - 1].iter().sum();
                best = best.min((k - 1) as f64 + (h - below) / chi[k - 1]);
            }
            if lyapunov_dimension(h, &chi).raw != best {
                mismatches += 1;
            }
        }
        let (l2, l3) = (2f64.ln(), 3f64.ln());
        let bm = lyapunov_dimension(l3, &[l2, l3]).value;
        let exact = (l3 / l2).min(1.0 + (l3 - l2) / l3);
        let bm_err = (bm - exact).abs();
        let carpet_verdict = carpet.map(|r| r.equivalence.verdict);
        let cantor_cfg = PipelineConfig { seed: 8, samples: 50_000, ..Default::default() };
        let cantor_verdict = full_pipeline(&cantor(), &cantor_cfg).unwrap().equivalence.verdict;
        outcome(
            mismatches == 0
                && bm_err <= 1e-12
                && (bm - 1.3691).abs() < 5e-5
                && carpet_verdict == Some(EquivalenceVerdict::Fails)
                && cantor_verdict == EquivalenceVerdict::Holds,
            format!(
                "brute-force mismatches {mismatches}/1000; carpet {bm:.6} (|err| {bm_err:.1e} <= 1e-12); \
                 equivalence carpet {carpet_verdict:?} (want Fails), Cantor {cantor_verdict:?} (want Holds)"
            ),
        )
    })
}

fn telescoping() -> Outcome {
    timed(None, || {
        let mut rng = stream_rng(9, 0);
        let mut worst = 0.0f64;
        let mut all = true;
        for _ in 0..1000 {
            let d = rng.random_range(1..=6);
            let mut chi: Vec<f64> = (0..d).map(|_| rng.random_range(0.05..3.0)).collect();
            chi.sort_by(f64::total_cmp);
            let mut hseq = vec![rng.random_range(0.0..10.0)];
            for _ in 0..d {
                let next = hseq.last().unwrap() - rng.random_range(0.0..2.0);
                hseq.push(next);
            }
            let t = telescoping_identity_check(&hseq, &chi).unwrap();
            all &= t.holds;
            worst = worst.max((t.lhs - t.rhs).abs() / t.lhs.abs().max(t.rhs.abs()).max(1.0));
        }
        let example = telescoping_identity_check(&[1.0, 0.5, 0.0], &[1.0, 2.0]).unwrap();
        let example_ok = (example.lhs - 0.75).abs() < 1e-15 && (example.rhs - 0.75).abs() < 1e-15;
        outcome(
            all && example_ok,
            format!("1000 sequences, worst relative gap {worst:.1e} (<= 1e-12); hand example 0.75 {example_ok}"),
        )
    })
}

fn lift_construction() -> Outcome {
    timed(None, || {
        let mut rng = stream_rng(10, 0);
        let mut separated = 0;
        let mut exact = 0;
        for _ in 0..20 {
            let d = rng.random_range(1..=3);
            let k = rng.random_range(2..=4);
            let maps: Vec<Matrix64> = (0..k).map(|_| random_contraction(d, &mut rng)).collect();
            let translations: Vec<Vec<f64>> =
                (0..k).map(|_| (0..d).map(|_| rng.random_range(-1.0..1.0)).collect()).collect();
            let ifs = IfsSystem::from_parts(maps, translations, random_weights(k, &mut rng)).unwrap();
            let lifted = lift_ifs(&ifs, None).unwrap();
            if check_separation(&lifted.ifs, 8).unwrap().status == SeparationStatus::SscVerified {
                separated += 1;
            }
            if lifted_weakest_singular_values(&lifted).unwrap().iter().all(|&s| s == lifted.rho) {
                exact += 1;
            }
        }
        outcome(
            separated == 20 && exact == 20,
            format!("20 random systems: ssc-verified {separated}/20, weakest singular value == rho exactly {exact}/20"),
        )
    })
}

fn self_affinity() -> Outcome {
    timed(None, || {
        let mut parts = Vec::new();
        let mut pass = true;
        for (name, ifs) in [("Cantor", cantor()), ("carpet", bm_carpet())] {
            let cloud = sample_measure(&ifs, 100_000, 30, 11).unwrap();
            let boxes = random_test_boxes(&cloud, 10, 12);
            let report = self_affinity_check(&cloud, &ifs, &boxes).unwrap();
            pass &= report.all_passed();
            parts
                .push(format!("{name} {}", if report.all_passed() { "all 10 boxes within 3 sigma" } else { "failed" }));
        }
        outcome(pass, parts.join("; "))
    })
}

fn cli_determinism() -> Outcome {
    timed(None, || {
        let bin = env!("CARGO_BIN_EXE_affine-dim");
        let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
        let dir = tempfile::tempdir().unwrap();
        let suite = dir.path().join("suite.json");
        std::fs::write(
            &suite,
            r#"{"dim": {"samples": 20000}, "validate": [{"kind": "self-similar", "name": "cantor",
                "ratios": [0.3333333333333333, 0.3333333333333333], "translations": [0.0, 0.6666666666666666]}]}"#,
        )
        .unwrap();
        let runs: Vec<(&str, PathBuf)> = vec![
            ("lyapunov", configs.join("bm.json")),
            ("domination", configs.join("stp.json")),
            ("dim", configs.join("cantor.json")),
            ("sample", configs.join("bm.json")),
            ("validate", suite),
        ];
        let mut bad = Vec::new();
        for (cmd, config) in &runs {
            let outputs: Vec<Vec<u8>> = (0..2)
                .map(|k| {
                    let out = dir.path().join(format!("{cmd}-{k}.out"));
                    let status = Command::new(bin)
                        .args([*cmd, "--deterministic", "--seed", "7", "--config"])
                        .arg(config)
                        .arg("--out")
                        .arg(&out)
                        .output()
                        .unwrap()
                        .status;
                    assert!(status.success(), "{cmd} exited with {status}");
                    std::fs::read(&out).unwrap()
                })
                .collect();
            if outputs[0] != outputs[1] || outputs[0].is_empty() {
                bad.push(*cmd);
            }
        }
        outcome(bad.is_empty(), format!("{} commands run twice, differing: {bad:?}", runs.len()))
    })
}

fn main() {
    let mut carpet = None;
    let results = vec![
        ("lyapunov exponents, diagonal oracle", lyapunov_diagonal_oracle()),
        ("spectrum conservation", spectrum_conservation()),
        ("exterior-power identities", exterior_identities()),
        ("positivity implies domination", stp_implies_domination()),
        ("bundle growth bound", bundle_bound()),
        ("Furstenberg degenerate oracle and stationarity", furstenberg_oracles()),
        ("Ledrappier-Young vs closed form", ly_vs_closed_form(&mut carpet)),
        ("Lyapunov dimension and equivalence", lyapunov_dimension_checks(carpet.as_ref())),
        ("telescoping identity", telescoping()),
        ("lift construction", lift_construction()),
        ("self-affinity", self_affinity()),
        ("CLI determinism", cli_determinism()),
    ];
    let mut failed = 0;
    for (k, (name, o)) in results.iter().enumerate() {
        println!("[{}] {:>2}. {name}: {}", if o.pass { "PASS" } else { "FAIL" }, k + 1, o.detail);
        failed += usize::from(!o.pass);
    }
    println!("acceptance: {}/{} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
