use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use tempfile::TempDir;

const BENCHMARK: &str = r#"{"kind":"linear_gaussian","mean":[0,0],"covariance":[[1,0.5],[0.5,1]],"coefficients":[2,1],"intercept":0,"noise_sd":1,"seed":7}"#;

fn descry(args: &[&str]) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_descry")).args(args).output().expect("binary runs")
}

fn run(args: &[&str]) -> i32 {
    descry_cli::run(std::iter::once("descry").chain(args.iter().copied()))
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

struct Fixture {
    dir: TempDir,
}

impl Fixture {
    /// Simulated benchmark data plus an OLS model.
    fn new(k: usize) -> Self {
        let dir = TempDir::new().unwrap();
        let spec = dir.path().join("lg.json");
        fs::write(&spec, BENCHMARK).unwrap();
        let f = Self { dir };
        let k = k.to_string();
        assert_eq!(run(&["simulate", "--spec", p(&spec), "--k", &k, "--out", p(&f.path("sim"))]), 0);
        assert_eq!(run(&["train", "--data", p(&f.path("sim/dataset.json")), "--learner", "ols", "--out", p(&f.path("model"))]), 0);
        f
    }

    fn path(&self, rel: &str) -> PathBuf {
        self.dir.path().join(rel)
    }

    fn read(&self, rel: &str) -> String {
        fs::read_to_string(self.path(rel)).unwrap()
    }

    fn cpdp(&self, out: &str, extra: &[&str]) -> i32 {
        let mut args = vec![
            "describe".to_string(),
            "--model".into(),
            p(&self.path("model/model.json")).into(),
            "--data".into(),
            p(&self.path("sim/dataset.csv")).into(),
            "--question".into(),
            "cpdp".into(),
            "--feature".into(),
            "X1".into(),
            "--out".into(),
            p(&self.path(out)).into(),
        ];
        args.extend(extra.iter().map(|s| s.to_string()));
        run(&args.iter().map(String::as_str).collect::<Vec<_>>())
    }
}

#[test]
fn simulate_writes_dataset_csv_and_manifest() {
    let f = Fixture::new(300);
    let manifest: serde_json::Value = serde_json::from_str(&f.read("sim/manifest.json")).unwrap();
    assert_eq!(manifest["config"]["command"], "simulate");
    assert_eq!(manifest["seeds"]["sample"], 7);
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    let csv = f.read("sim/dataset.csv");
    assert_eq!(csv.lines().next(), Some("X1,X2,Y"));
    assert_eq!(csv.lines().count(), 301);
}

#[test]
fn describe_cpdp_writes_result_curve_and_plot_with_rug() {
    let f = Fixture::new(2000);
    assert_eq!(f.cpdp("b", &[]), 0);
    let result: serde_json::Value = serde_json::from_str(&f.read("b/result.json")).unwrap();
    assert_eq!(result["payload"]["kind"], "curve");
    assert!(f.read("b/curve.csv").starts_with("grid,estimate,group_size,std_error\n"));
    let svg = f.read("b/plot.svg");
    assert!(svg.contains(r#"viewBox="0 0 800 500""#));
    assert!(svg.contains(r#"class="rug""#));
    assert!(f.path("b/sparse_regions.json").is_file());
}

#[test]
fn combined_uncertainty_plot_has_two_nested_dashed_bands() {
    let f = Fixture::new(1500);
    let code = run(&[
        "uncertainty",
        "--model",
        p(&f.path("model/model.json")),
        "--train",
        p(&f.path("sim/dataset.json")),
        "--data",
        p(&f.path("sim/dataset.json")),
        "--feature",
        "X1",
        "--grid-points",
        "8",
        "--mode",
        "combined",
        "--out",
        p(&f.path("u")),
    ]);
    assert_eq!(code, 0);
    let svg = f.read("u/plot.svg");
    let polygons: Vec<&str> = svg.lines().filter(|l| l.starts_with("<polygon")).collect();
    assert_eq!(polygons.len(), 2);
    assert!(polygons.iter().all(|l| l.contains("stroke-dasharray")));
    let report: serde_json::Value = serde_json::from_str(&f.read("u/report.json")).unwrap();
    let inner = report["ci_ee"].as_array().unwrap();
    let outer = report["ci_me_ee"].as_array().unwrap();
    for (i, o) in inner.iter().zip(outer) {
        assert!(o["lo"].as_f64().unwrap() <= i["lo"].as_f64().unwrap() + 1e-12);
        assert!(o["hi"].as_f64().unwrap() >= i["hi"].as_f64().unwrap() - 1e-12);
    }
    assert!(f.read("u/report.csv").starts_with("# kind=combined\n"));
}

#[test]
fn rerun_from_manifest_is_byte_identical() {
    let f = Fixture::new(1000);
    assert_eq!(f.cpdp("first", &[]), 0);
    let manifest = f.path("manifest-copy.json");
    fs::copy(f.path("first/manifest.json"), &manifest).unwrap();
    let before: Vec<(String, Vec<u8>)> = ["result.json", "curve.csv", "sparse_regions.json", "manifest.json"]
        .iter()
        .map(|n| (n.to_string(), fs::read(f.path("first").join(n)).unwrap()))
        .collect();
    fs::remove_dir_all(f.path("first")).unwrap();
    assert_eq!(run(&["--config", p(&manifest)]), 0);
    for (name, bytes) in &before {
        assert_eq!(&fs::read(f.path("first").join(name)).unwrap(), bytes, "{name} differs");
    }
    assert_eq!(run(&["--config", p(&manifest), "--out", p(&f.path("second"))]), 0);
    assert_eq!(fs::read(f.path("second/curve.csv")).unwrap(), before[1].1);
}

#[test]
fn hand_written_config_gets_flag_defaults() {
    let f = Fixture::new(500);
    let config = serde_json::json!({
        "command": "describe",
        "model": f.path("model/model.json"),
        "data": f.path("sim/dataset.json"),
        "question": "cpdp",
        "feature": "X2",
        "out": f.path("cfg"),
    });
    let path = f.path("config.json");
    fs::write(&path, config.to_string()).unwrap();
    assert_eq!(run(&["--config", p(&path)]), 0);
    let manifest: serde_json::Value = serde_json::from_str(&f.read("cfg/manifest.json")).unwrap();
    assert_eq!(manifest["config"]["grid_points"], 20);
}

#[test]
fn exit_codes_and_error_json() {
    let f = Fixture::new(200);
    assert_eq!(descry(&["describe", "--no-such-flag"]).status.code(), Some(2));
    assert_eq!(descry(&[]).status.code(), Some(2));
    assert_eq!(descry(&["--help"]).status.code(), Some(0));
    let out = descry(&[
        "describe",
        "--model",
        p(&f.path("model/model.json")),
        "--data",
        p(&f.path("sim/dataset.json")),
        "--question",
        "cpdp",
        "--feature",
        "X9",
        "--out",
        p(&f.path("bad")),
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["operation"], "describe");
    assert_eq!(err["code"], "UnknownFeature");
    assert!(err["module"].is_string());
    assert_eq!(serde_json::from_str::<serde_json::Value>(&f.read("bad/error.json")).unwrap(), err);

    let missing = descry(&[
        "describe",
        "--model",
        p(&f.path("model/model.json")),
        "--data",
        p(&f.path("sim/dataset.json")),
        "--question",
        "ice",
        "--feature",
        "X1",
        "--out",
        p(&f.path("bad2")),
    ]);
    assert_eq!(missing.status.code(), Some(2), "ice without an instance is a usage error");
}

#[test]
fn thread_count_does_not_change_outputs() {
    let f = Fixture::new(800);
    let mut outputs = Vec::new();
    for threads in ["1", "4"] {
        let out = f.path(&format!("t{threads}"));
        let status = Command::new(env!("CARGO_BIN_EXE_descry"))
            .env("DESCRY_THREADS", threads)
            .args([
                "describe",
                "--model",
                p(&f.path("model/model.json")),
                "--train",
                p(&f.path("sim/dataset.json")),
                "--data",
                p(&f.path("sim/dataset.json")),
                "--question",
                "sage",
                "--mode",
                "permutation-mc",
                "--permutations",
                "50",
                "--out",
                p(&out),
            ])
            .status()
            .unwrap();
        assert!(status.success());
        outputs.push(fs::read(out.join("result.json")).unwrap());
    }
    assert_eq!(outputs[0], outputs[1]);
}

#[test]
fn report_single_run_has_one_figure_and_one_table() {
    let f = Fixture::new(1000);
    assert_eq!(f.cpdp("b", &[]), 0);
    let md_path = f.path("summary.md");
    assert_eq!(run(&["report", "--runs", p(&f.path("b")), "--out", p(&md_path)]), 0);
    let md = fs::read_to_string(&md_path).unwrap();
    assert_eq!(md.matches("![").count(), 1);
    assert_eq!(md.lines().filter(|l| l.starts_with("| ---")).count(), 1);
    assert!(md.contains("](b/plot.svg)"));
}

#[test]
fn report_groups_mixed_runs_and_warns_about_sparsity() {
    let f = Fixture::new(400);
    assert_eq!(f.cpdp("curve", &["--grid=-1,0,1,4.5", "--band=0.2"]), 0);
    let code = run(&[
        "describe",
        "--model",
        p(&f.path("model/model.json")),
        "--train",
        p(&f.path("sim/dataset.json")),
        "--data",
        p(&f.path("sim/dataset.json")),
        "--question",
        "cpfi",
        "--feature",
        "X1",
        "--out",
        p(&f.path("imp")),
    ]);
    assert_eq!(code, 0);
    let md_path = f.path("summary.md");
    let runs = format!("{},{},{}", p(&f.path("curve")), p(&f.path("imp")), p(&f.path("model")));
    assert_eq!(run(&["report", "--runs", &runs, "--out", p(&md_path)]), 0);
    let md = fs::read_to_string(&md_path).unwrap();
    let headings: Vec<&str> = md.lines().filter(|l| l.starts_with("## ")).collect();
    assert_eq!(headings, ["## cpdp", "## cpfi", "## train", "## Sparsity warnings"]);
    assert!(md.contains("grid point 4.5 dropped"));
}

#[test]
fn report_without_manifest_fails() {
    let f = Fixture::new(100);
    let empty = f.path("empty");
    fs::create_dir_all(&empty).unwrap();
    let out = descry(&["report", "--runs", p(&empty), "--out", p(&f.path("r.md"))]);
    assert_eq!(out.status.code(), Some(1));
    let err: serde_json::Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(err["code"], "MissingManifest");
}

#[test]
fn ingest_centers_jitters_and_splits() {
    let dir = TempDir::new().unwrap();
    let csv = dir.path().join("g.csv");
    let mut text = String::from("a;grade;y\n");
    for i in 0..40 {
        text.push_str(&format!("{};{};{}\n", i % 3, (i * 7) % 21, i as f64 * 0.5));
    }
    fs::write(&csv, text).unwrap();
    let schema = dir.path().join("schema.json");
    fs::write(
        &schema,
        r#"{"columns":[{"name":"a","kind":"integer"},{"name":"grade","kind":"integer"},{"name":"y","kind":"numeric"}],"target":"y"}"#,
    )
    .unwrap();
    let out = dir.path().join("ing");
    let code = run(&[
        "ingest",
        "--data",
        p(&csv),
        "--schema",
        p(&schema),
        "--delimiter",
        ";",
        "--jitter",
        "grade",
        "--offsets=-1,1",
        "--clamp=0,20",
        "--split",
        "0.75",
        "--seed",
        "3",
        "--out",
        p(&out),
    ]);
    assert_eq!(code, 0);
    let summary: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["rows"], 120);
    assert_eq!(summary["train_rows"], 90);
    assert_eq!(summary["test_rows"], 30);
    let d: descry::data::Dataset = serde_json::from_str(&fs::read_to_string(out.join("dataset.json")).unwrap()).unwrap();
    assert!(d.column(1).iter().all(|&g| (0.0..=20.0).contains(&g)));
}
