//! Acceptance gate: prints one PASS/FAIL line per criterion.
//!
//! The process fails when any criterion that could be evaluated failed.
//! Criteria that need the student-performance files print FAIL with the
//! reason when the files are absent; they fail the process only when
//! `DESCRY_ACCEPTANCE_STRICT=1`. Point `DESCRY_STUDENT_DIR` at a directory
//! holding `student-mat.csv` and `student-por.csv` to run them.

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::Instant;

use descry::data::{center_feature, jitter_augment, resample, split, student, Dataset, ResamplePlan};
use descry::descriptors::{cpdp, cpfi, sage, shapley_local, subset_epe, Payload, Refits, ShapleyMode};
use descry::models::{epe, train, LearnerConfig, LossFunction, MlpConfig, Model, PredictorHandle};
use descry::phenomenon::{optimal_predictor, Marginal, OptimalPredictorSpec, Phenomenon, ResponseTerm};
use descry::rng::stream_seed;
use descry::samplers::{build_grid, Grid};
use descry::stats::{critical_value, mean, median, sample_variance, spearman};
use descry::uncertainty::{ci_combined, ci_estimation, CIConfig, CurveTarget};
use statrs::distribution::{Continuous, ContinuousCDF, Normal};

const SEED: u64 = 20240611;

enum Verdict {
    Pass,
    Fail,
    /// Inputs missing; the criterion could not be evaluated.
    Unavailable,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

fn judged(ok: bool, detail: String) -> Outcome {
    Outcome { verdict: if ok { Verdict::Pass } else { Verdict::Fail }, detail }
}

fn benchmark() -> Phenomenon {
    Phenomenon::LinearGaussian {
        mean: vec![0.0, 0.0],
        covariance: vec![vec![1.0, 0.5], vec![0.5, 1.0]],
        coefficients: vec![2.0, 1.0],
        intercept: 0.0,
        noise_sd: 1.0,
    }
}

fn nonlinear() -> Phenomenon {
    Phenomenon::NonlinearIndependent {
        marginals: vec![Marginal::Normal { mean: 0.5, sd: 1.0 }, Marginal::Uniform { low: -1.0, high: 2.0 }],
        terms: vec![
            ResponseTerm::Monomial { feature: 0, degree: 3, coefficient: 0.5 },
            ResponseTerm::Monomial { feature: 1, degree: 2, coefficient: -1.0 },
            ResponseTerm::Product { a: 0, b: 1, coefficient: 2.0 },
        ],
        intercept: 1.0,
        noise_sd: 0.5,
    }
}

fn oracle(p: &Phenomenon) -> PredictorHandle {
    optimal_predictor(&OptimalPredictorSpec { phenomenon: p.clone(), loss: LossFunction::Mse }).unwrap()
}

/// `E[X1 | |X1 - v| <= b]` for standard normal `X1`.
fn band_mean(v: f64, b: f64) -> f64 {
    let n = Normal::standard();
    (n.pdf(v - b) - n.pdf(v + b)) / (n.cdf(v + b) - n.cdf(v - b))
}

/// Band-averaged conditional PDP of `a + c1 x1 + c2 x2` on the benchmark,
/// where `E[X2 | X1] = X1 / 2`.
fn linear_band_cpdp(a: f64, c1: f64, c2: f64, v: f64, b: f64) -> f64 {
    a + (c1 + 0.5 * c2) * band_mean(v, b)
}

fn linear_parts(h: &PredictorHandle) -> (f64, Vec<f64>) {
    match &h.model {
        Model::Linear { intercept, coefficients, .. } => (*intercept, coefficients.clone()),
        m => panic!("expected a linear model, got {m:?}"),
    }
}

fn criterion_1() -> Outcome {
    let p = benchmark();
    let d = p.sample(50_000, stream_seed(SEED, "c1", 0)).unwrap();
    let h = oracle(&p);
    let grid = build_grid(&d, "X1", 20).unwrap();
    let r = cpdp(&h, &d, 0, &grid).unwrap();
    let points = r.curve().unwrap();
    let mut worst: f64 = 0.0;
    for pt in points {
        let truth = p.true_conditional_expectation(0, pt.grid_value).unwrap();
        worst = worst.max((pt.estimate - truth).abs() / pt.std_error.unwrap());
    }
    judged(
        worst <= 4.0 && points.len() >= 15,
        format!("{} retained grid points, max |cPDP - 2.5v| = {worst:.2} SE (limit 4)", points.len()),
    )
}

fn criterion_2() -> Outcome {
    let mut details = Vec::new();
    let mut ok = true;
    for (name, p) in [("linear_gaussian", benchmark()), ("nonlinear_independent", nonlinear())] {
        let h = oracle(&p);
        let mut worst: f64 = 0.0;
        for (i, &v) in [-1.0, 0.3, 1.5].iter().enumerate() {
            for feature in 0..2 {
                let rows = p.sample_conditional(feature, v, 1_000_000, stream_seed(SEED, "c2", (i * 2 + feature) as u64)).unwrap();
                let preds: Vec<f64> = rows.iter().map(|r| h.predict_scalar_row(r).unwrap()).collect();
                let se = (sample_variance(&preds) / preds.len() as f64).sqrt();
                let truth = p.true_conditional_expectation(feature, v).unwrap();
                worst = worst.max((mean(&preds) - truth).abs() / se);
            }
        }
        ok &= worst <= 4.0;
        details.push(format!("{name} max deviation {worst:.2} MC SE"));
    }
    judged(ok, format!("{} (limit 4, 10^6 draws per point)", details.join(", ")))
}

fn criterion_3() -> Outcome {
    let p = benchmark();
    let truth = p.true_epe(LossFunction::Mse, &[1]).unwrap() - p.true_epe(LossFunction::Mse, &[0, 1]).unwrap();
    let d_train = p.sample(10_000, stream_seed(SEED, "c3-train", 0)).unwrap();
    let d_eval = p.sample(10_000, stream_seed(SEED, "c3-eval", 0)).unwrap();
    let started = Instant::now();
    let r = cpfi(&LearnerConfig::Ols, &d_train, &d_eval, 0, LossFunction::Mse).unwrap();
    let secs = started.elapsed().as_secs_f64();
    let Payload::Scalar { value, std_error: Some(se) } = r.payload else { panic!("cpfi returns a scalar") };
    judged(
        (value - truth).abs() <= 2.0 * se && (truth - 3.0).abs() < 1e-12 && secs < 60.0,
        format!("cpfi(X1) = {value:.4} +- {se:.4}, oracle {truth} (limit 2 SE), {secs:.2}s"),
    )
}

/// Five features, `X2` a copy of `X1`, `X5` irrelevant.
fn duplicate_problem(k: usize, seed: u64) -> Dataset {
    let base = Phenomenon::NonlinearIndependent {
        marginals: vec![
            Marginal::Normal { mean: 0.0, sd: 1.0 },
            Marginal::Normal { mean: 0.0, sd: 1.0 },
            Marginal::Normal { mean: 0.0, sd: 1.0 },
            Marginal::Uniform { low: -1.0, high: 1.0 },
        ],
        terms: vec![
            ResponseTerm::Monomial { feature: 0, degree: 1, coefficient: 1.0 },
            ResponseTerm::Monomial { feature: 1, degree: 1, coefficient: 1.0 },
            ResponseTerm::Monomial { feature: 2, degree: 1, coefficient: 0.5 },
        ],
        intercept: 0.0,
        noise_sd: 0.5,
    };
    let d = base.sample(k, seed).unwrap();
    let rows: Vec<Vec<f64>> = d.rows().iter().map(|r| vec![r[0], r[0], r[1], r[2], r[3]]).collect();
    let features = (1..=5).map(|i| descry::data::FeatureSpec::numeric(format!("X{i}"))).collect();
    Dataset::new(features, d.target().clone(), rows, d.targets().to_vec(), d.provenance(), d.seed()).unwrap()
}

fn criterion_4() -> Outcome {
    let d_train = duplicate_problem(1500, stream_seed(SEED, "c4-train", 0));
    let d_eval = duplicate_problem(800, stream_seed(SEED, "c4-eval", 0));
    let cfg = LearnerConfig::Ols;
    let loss = LossFunction::Mse;
    let all: Vec<usize> = (0..5).collect();
    let refits = Refits::new(&cfg, &d_train, loss);
    let x = d_eval.row(3).to_vec();
    let mut notes = Vec::new();
    let mut ok = true;

    let sage_exact = sage(&cfg, &d_train, &d_eval, loss, ShapleyMode::Exact, 0, SEED).unwrap();
    let sage_mc = sage(&cfg, &d_train, &d_eval, loss, ShapleyMode::PermutationMc, 2000, SEED).unwrap();
    let sage_total = subset_epe(&refits, &d_eval, &[]).unwrap() - subset_epe(&refits, &d_eval, &all).unwrap();

    let local_exact = shapley_local(&cfg, &d_train, &d_eval, &x, loss, ShapleyMode::Exact, 0, SEED).unwrap();
    let local_mc = shapley_local(&cfg, &d_train, &d_eval, &x, loss, ShapleyMode::PermutationMc, 2000, SEED).unwrap();
    let local_total = refits.model(&all).unwrap().predict_scalar_row(&x).unwrap()
        - refits.model(&[]).unwrap().predict_scalar_row(&x).unwrap();

    for (name, exact, mc, total) in [("sage", &sage_exact, &sage_mc, sage_total), ("local", &local_exact, &local_mc, local_total)] {
        let phi = exact.attribution().unwrap();
        let Payload::Attribution { values: mc_phi, std_errors: Some(se) } = &mc.payload else { panic!("mc attribution") };
        let efficiency = (phi.iter().sum::<f64>() - total).abs();
        let symmetry = (phi[0] - phi[1]).abs();
        let mc_sym = (mc_phi[0] - mc_phi[1]).abs() / (se[0].powi(2) + se[1].powi(2)).sqrt().max(1e-12);
        let mc_dev = phi
            .iter()
            .zip(mc_phi)
            .zip(se)
            .map(|((e, m), s)| if *s > 0.0 { (e - m).abs() / s } else if (e - m).abs() < 1e-9 { 0.0 } else { f64::INFINITY })
            .fold(0.0, f64::max);
        ok &= efficiency <= 1e-9 && symmetry <= 1e-6 && mc_sym <= 3.0 && mc_dev <= 3.0;
        notes.push(format!(
            "{name}: efficiency gap {efficiency:.1e}, |phi1-phi2| {symmetry:.1e} exact / {mc_sym:.2} SE mc, max |mc-exact| {mc_dev:.2} SE"
        ));
    }
    judged(ok, format!("{} (limits 1e-9, 3 SE)", notes.join("; ")))
}

const C5_GRID: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];
const C5_BAND: f64 = 0.1;

fn c5_target(d: &Dataset) -> CurveTarget {
    CurveTarget { feature: 0, grid: Grid::from_points(d, "X1", &C5_GRID).unwrap(), band: C5_BAND }
}

fn coverage(hits: usize, total: usize) -> f64 {
    hits as f64 / total.max(1) as f64
}

fn criterion_5() -> Outcome {
    let p = benchmark();
    let h = oracle(&p);
    let truth: BTreeMap<u64, f64> = C5_GRID.iter().map(|&v| (v.to_bits(), 2.5 * band_mean(v, C5_BAND))).collect();
    let started = Instant::now();

    let (mut hits, mut total) = (0, 0);
    for run in 0..300u64 {
        let d = p.sample(1000, stream_seed(SEED, "c5-ee-data", run)).unwrap();
        let report = ci_estimation(&h, &d, &c5_target(&d), &CIConfig::new(0.05, 50, stream_seed(SEED, "c5-ee", run))).unwrap();
        for (v, ci) in report.grid.points.iter().zip(&report.ci_ee) {
            total += 1;
            hits += ci.contains(truth[&v.to_bits()]) as usize;
        }
    }
    let ee = coverage(hits, total);

    let (mut hits, mut total) = (0, 0);
    for run in 0..200u64 {
        let d_train = p.sample(1000, stream_seed(SEED, "c5-me-train", run)).unwrap();
        let d_eval = p.sample(1000, stream_seed(SEED, "c5-me-eval", run)).unwrap();
        let cfg = CIConfig::combined(0.05, 20, 20, stream_seed(SEED, "c5-me", run));
        let report = ci_combined(&LearnerConfig::Ols, &d_train, &d_eval, &c5_target(&d_eval), LossFunction::Mse, &cfg).unwrap();
        for (v, ci) in report.grid.points.iter().zip(report.ci_me_ee.as_ref().unwrap()) {
            total += 1;
            hits += ci.contains(truth[&v.to_bits()]) as usize;
        }
    }
    let me = coverage(hits, total);
    let secs = started.elapsed().as_secs_f64();
    judged(
        (0.90..=0.98).contains(&ee) && (0.88..=0.99).contains(&me) && secs < 600.0,
        format!("CI_EE coverage {ee:.3} over 300 runs (0.90-0.98), CI_ME+EE coverage {me:.3} over 200 runs (0.88-0.99), {secs:.1}s"),
    )
}

fn criterion_6() -> Outcome {
    let p = benchmark();
    let d_train = p.sample(2000, stream_seed(SEED, "c6-train", 0)).unwrap();
    let h = train(&LearnerConfig::Ols, &d_train, LossFunction::Mse).unwrap();
    let (a, c) = linear_parts(&h);

    let mut per_point: Vec<Vec<f64>> = vec![Vec::new(); C5_GRID.len()];
    for r in 0..500u64 {
        let d = p.sample(1000, stream_seed(SEED, "c6-eval", r)).unwrap();
        let target = c5_target(&d);
        for (slot, v) in per_point.iter_mut().zip(target.evaluate(&h, &d).unwrap()) {
            slot.extend(v);
        }
    }
    let mut fresh: f64 = 0.0;
    for (values, &v) in per_point.iter().zip(&C5_GRID) {
        let se = (sample_variance(values) / values.len() as f64).sqrt();
        fresh = fresh.max((mean(values) - linear_band_cpdp(a, c[0], c[1], v, C5_BAND)).abs() / se);
    }

    let d_eval = p.sample(1000, stream_seed(SEED, "c6-eval", 500)).unwrap();
    let target = c5_target(&d_eval);
    let full = target.evaluate(&h, &d_eval).unwrap();
    let plan = ResamplePlan::bootstrap(500, stream_seed(SEED, "c6-bootstrap", 0));
    let mut per_point: Vec<Vec<f64>> = vec![Vec::new(); C5_GRID.len()];
    for r in 0..500 {
        let d = resample(&d_eval, &plan, r).unwrap();
        for (slot, v) in per_point.iter_mut().zip(target.evaluate(&h, &d).unwrap()) {
            slot.extend(v);
        }
    }
    let mut boot: f64 = 0.0;
    for (values, g) in per_point.iter().zip(&full) {
        let se = (sample_variance(values) / values.len() as f64).sqrt();
        boot = boot.max((mean(values) - g.unwrap()).abs() / se);
    }
    judged(
        fresh <= 4.0 && boot <= 4.0,
        format!(
            "max |mean - reference| over 500 resamples: {fresh:.2} SE for fresh evaluation sets against the exact value, \
             {boot:.2} SE for bootstrap resamples against the full-sample estimate (limit 4)"
        ),
    )
}

struct StudentData {
    merged: Dataset,
}

fn student_data() -> Option<StudentData> {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data");
    let (m, p) = student::locate(&[root.join("student"), root])?;
    Some(StudentData { merged: student::load_merged(m, p).ok()?.dataset })
}

fn unavailable() -> Outcome {
    Outcome {
        verdict: Verdict::Unavailable,
        detail: format!(
            "student data not available: set {} to a directory holding {} and {}",
            student::DATA_DIR_ENV,
            student::MATH_FILE,
            student::PORTUGUESE_FILE
        ),
    }
}

fn mlp_config(seed: u64) -> LearnerConfig {
    LearnerConfig::Mlp(MlpConfig { seed, ..MlpConfig::default() })
}

fn criterion_7(data: Option<&StudentData>) -> Outcome {
    let Some(data) = data else { return unavailable() };
    let d = &data.merged;
    let j = d.feature_index(student::PORTUGUESE_GRADE).unwrap();
    let (centered, _) = center_feature(&d.select_features(&[j]), student::PORTUGUESE_GRADE).unwrap();
    let h = train(&LearnerConfig::Ols, &centered, LossFunction::Mse).unwrap();
    let (b0, b) = linear_parts(&h);
    let b1 = b[0];
    let n = centered.len() as f64;
    let x = centered.column(0);
    let rss: f64 = centered.rows().iter().zip(centered.targets()).map(|(r, y)| (y - b0 - b1 * r[0]).powi(2)).sum();
    let sigma = (rss / (n - 2.0)).sqrt();
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let t = critical_value(0.05, Some(n - 2.0));
    let ci0 = (b0 - t * sigma / n.sqrt(), b0 + t * sigma / n.sqrt());
    let ci1 = (b1 - t * sigma / sxx.sqrt(), b1 + t * sigma / sxx.sqrt());
    let overlaps = |ci: (f64, f64), lo: f64, hi: f64| ci.0 <= hi && lo <= ci.1;

    let (tr, te) = split(d, 0.8, SEED).unwrap();
    let mlp = train(&mlp_config(SEED), &tr, LossFunction::Mse).unwrap();
    let mlp_mse = epe(&mlp, &te, LossFunction::Mse).unwrap();
    let lin = train(&LearnerConfig::Ols, &tr.select_features(&[j]), LossFunction::Mse).unwrap();
    let lin_mse = epe(&lin, &te.select_features(&[j]), LossFunction::Mse).unwrap();

    let ok = (b0 - 10.46).abs() <= 0.3
        && (b1 - 0.77).abs() <= 0.1
        && overlaps(ci0, 10.05, 10.88)
        && overlaps(ci1, 0.63, 0.91)
        && mlp_mse <= 12.0
        && (lin_mse - 16.0).abs() <= 2.0;
    judged(
        ok,
        format!(
            "{} rows; fit {b0:.2} + {b1:.3} x, CIs [{:.2}, {:.2}] and [{:.3}, {:.3}]; test MSE mlp {mlp_mse:.2}, linear {lin_mse:.2}",
            d.len(),
            ci0.0,
            ci0.1,
            ci1.0,
            ci1.1
        ),
    )
}

fn criterion_8(data: Option<&StudentData>) -> Outcome {
    let Some(data) = data else { return unavailable() };
    let d = &data.merged;
    let (tr, _) = split(d, 0.8, SEED).unwrap();
    let d_eval =
        jitter_augment(d, student::PORTUGUESE_GRADE, &[1.0, -1.0, 2.0, -2.0, 3.0, -3.0], Some(student::GRADE_RANGE)).unwrap();
    let grades: Vec<f64> = (0..=20).map(f64::from).collect();
    let grid = Grid::from_points(&d_eval, student::PORTUGUESE_GRADE, &grades).unwrap();
    let target = CurveTarget::with_grid(&d_eval, grid);
    let cfg = CIConfig::combined(0.05, 20, 20, SEED);
    let report = ci_combined(&mlp_config(SEED), &tr, &d_eval, &target, LossFunction::Mse, &cfg).unwrap();
    let outer = report.ci_me_ee.as_ref().unwrap();
    let (mut mid_v, mut mid_g, mut mid_w, mut tail_w) = (Vec::new(), Vec::new(), Vec::new(), Vec::new());
    for ((&v, &g), ci) in report.grid.points.iter().zip(&report.point_estimates).zip(outer) {
        if (8.0..=17.0).contains(&v) {
            mid_v.push(v);
            mid_g.push(g);
            mid_w.push(ci.half_width());
        } else {
            tail_w.push(ci.half_width());
        }
    }
    let rho = spearman(&mid_v, &mid_g);
    let ratio = median(&tail_w) / median(&mid_w);
    judged(
        rho > 0.9 && ratio >= 2.0,
        format!("Spearman rho over grades 8-17 = {rho:.3} (limit 0.9), outer/mid median half-width ratio {ratio:.2} (limit 2)"),
    )
}

fn descry(args: &[String]) -> bool {
    Command::new(env!("CARGO_BIN_EXE_descry")).args(args).output().map(|o| o.status.success()).unwrap_or(false)
}

fn artifacts(dir: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in fs::read_dir(dir).unwrap() {
        let path = entry.unwrap().path();
        if path.is_dir() {
            out.extend(artifacts(&path));
        } else if path.extension().is_some_and(|e| e == "json" || e == "csv") {
            out.insert(path.clone(), fs::read(&path).unwrap());
        }
    }
    out
}

fn criterion_9() -> Outcome {
    let tmp = tempfile::TempDir::new().unwrap();
    let at = |rel: &str| tmp.path().join(rel).to_str().unwrap().to_string();
    let spec = serde_json::to_string(&benchmark()).unwrap();
    fs::write(at("lg.json"), spec).unwrap();
    let steps: Vec<Vec<String>> = [
        vec!["simulate", "--spec", &at("lg.json"), "--k", "600", "--seed", "11", "--out", &at("runs/sim")],
        vec![
            "train", "--data", &at("runs/sim/dataset.json"), "--learner", "mlp", "--hidden", "8,4", "--epochs", "40", "--seed", "5",
            "--out", &at("runs/model"),
        ],
        vec![
            "describe", "--model", &at("runs/model/model.json"), "--data", &at("runs/sim/dataset.csv"), "--question", "cpdp",
            "--feature", "X1", "--out", &at("runs/cpdp"),
        ],
        vec![
            "describe", "--model", &at("runs/model/model.json"), "--train", &at("runs/sim/dataset.json"), "--data",
            &at("runs/sim/dataset.json"), "--question", "sage", "--mode", "permutation-mc", "--permutations", "40", "--seed", "3",
            "--out", &at("runs/sage"),
        ],
        vec![
            "uncertainty", "--model", &at("runs/model/model.json"), "--train", &at("runs/sim/dataset.json"), "--data",
            &at("runs/sim/dataset.json"), "--feature", "X1", "--grid-points", "6", "--mode", "combined", "--seed", "9", "--out",
            &at("runs/ci"),
        ],
    ]
    .iter()
    .map(|s| s.iter().map(|a| a.to_string()).collect())
    .collect();
    for step in &steps {
        if !descry(step) {
            return judged(false, format!("step `{}` failed", step[0]));
        }
    }
    let first = artifacts(&tmp.path().join("runs"));
    let manifests: Vec<String> = ["sim", "model", "cpdp", "sage", "ci"]
        .iter()
        .map(|r| {
            let copy = at(&format!("{r}-manifest.json"));
            fs::copy(at(&format!("runs/{r}/manifest.json")), &copy).unwrap();
            copy
        })
        .collect();
    fs::remove_dir_all(tmp.path().join("runs")).unwrap();
    for m in &manifests {
        if !descry(&["--config".to_string(), m.clone()]) {
            return judged(false, format!("rerun from {m} failed"));
        }
    }
    let second = artifacts(&tmp.path().join("runs"));
    let differing: Vec<String> = first
        .iter()
        .filter(|(k, v)| second.get(*k) != Some(*v))
        .map(|(k, _)| k.strip_prefix(tmp.path()).unwrap().display().to_string())
        .collect();
    judged(
        differing.is_empty() && first.len() == second.len(),
        format!("{} JSON/CSV files compared after rerunning 5 manifests; differing: {differing:?}", first.len()),
    )
}

fn main() {
    let strict = std::env::var("DESCRY_ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let only: Option<Vec<u32>> =
        std::env::var("DESCRY_ACCEPTANCE_ONLY").ok().map(|v| v.split(',').filter_map(|s| s.trim().parse().ok()).collect());
    let wanted = |n: u32| only.as_ref().is_none_or(|o| o.contains(&n));
    let students = if wanted(7) || wanted(8) { student_data() } else { None };
    let criteria: Vec<(u32, &str, Box<dyn Fn() -> Outcome>)> = vec![
        (1, "oracle cPDP equals the conditional expectation", Box::new(criterion_1)),
        (2, "tower rule for conditional sampling", Box::new(criterion_2)),
        (3, "cPFI ground truth", Box::new(criterion_3)),
        (4, "Shapley efficiency, symmetry and MC agreement", Box::new(criterion_4)),
        (5, "confidence interval coverage", Box::new(criterion_5)),
        (6, "estimator unbiasedness", Box::new(criterion_6)),
        (7, "student data: linear fit and test errors", Box::new(|| criterion_7(students.as_ref()))),
        (8, "student data: jittered cPDP shape and band widths", Box::new(|| criterion_8(students.as_ref()))),
        (9, "CLI determinism", Box::new(criterion_9)),
    ];
    let mut failed = false;
    for (n, name, check) in criteria.iter().filter(|(n, ..)| wanted(*n)) {
        let started = Instant::now();
        let outcome = check();
        let secs = started.elapsed().as_secs_f64();
        let label = match outcome.verdict {
            Verdict::Pass => "PASS",
            Verdict::Fail => {
                failed = true;
                "FAIL"
            }
            Verdict::Unavailable => {
                failed |= strict;
                "FAIL"
            }
        };
        println!("{label} [{n}] {name}: {} ({secs:.1}s)", outcome.detail);
    }
    if failed {
        std::process::exit(1);
    }
}
