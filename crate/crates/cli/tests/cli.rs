//! End-to-end runs of the `asg` binary on the built-in fixtures.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn asg(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_asg"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("asg runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

/// Writes fixture `name` and extracts it into `bundle.json`.
fn bundle(name: &str) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    let out = asg(&["fixture", name, "-o", "fx"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let manifest = format!("fx/{name}/manifest.json");
    let out = asg(&["extract", &manifest, "-o", "bundle.json"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    dir
}

const QUICK: [&str; 4] = ["--generations", "20", "--iterations", "3"];

fn optimize(dir: &Path, out_dir: &str, extra: &[&str]) -> Output {
    let mut args = vec!["optimize", "bundle.json", "-o", out_dir];
    args.extend(extra);
    asg(&args, dir)
}

#[test]
fn stack_extracts_and_assembles_bottom_up() {
    let dir = bundle("stack2");
    let b = json(dir.path().join("bundle.json"));
    assert_eq!(b["format"], "asg-bundle");
    assert_eq!(b["degree"], serde_json::json!([[0, 5], [5, 0]]));

    let out = optimize(dir.path(), "run", &QUICK);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let seq = json(dir.path().join("run/sequence.json"));
    let steps = seq["best"]["steps"].as_array().unwrap();
    assert_eq!(steps[0]["name"], "plate");
    assert_eq!(steps[1]["name"], "cube");
    assert_eq!(steps[1]["direction"], "-z");
    for k in 1..=3 {
        assert!(dir.path().join(format!("run/convergence_iter{k}.csv")).is_file());
    }
}

#[test]
fn missing_mesh_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(code(&asg(&["fixture", "stack2", "-o", "fx"], dir.path())), 0);
    std::fs::remove_file(dir.path().join("fx/stack2/01_plate.stl")).unwrap();
    let out = asg(&["extract", "fx/stack2/manifest.json", "-o", "b.json"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("plate"), "{}", stderr(&out));
    assert!(!dir.path().join("b.json").exists());
}

#[test]
fn ring_fixture_bundle_records_the_scaling() {
    let dir = bundle("pulley_band");
    let b = json(dir.path().join("bundle.json"));
    let rings = b["rings"].as_array().unwrap();
    assert_eq!(rings.len(), 1);
    assert_eq!(rings[0]["name"], "band");
    assert_eq!(rings[0]["scale_factor"], 1.05);
}

#[test]
fn same_seed_gives_identical_files() {
    let dir = bundle("bracket5");
    for run in ["a", "b"] {
        let out = optimize(dir.path(), run, &["--seed", "11", "--generations", "30"]);
        assert_eq!(code(&out), 0, "{}", stderr(&out));
    }
    let mut names = vec!["sequence.json".to_string(), "report.json".to_string()];
    names.extend((1..=10).map(|k| format!("convergence_iter{k}.csv")));
    for name in names {
        let a = std::fs::read(dir.path().join("a").join(&name)).unwrap();
        let b = std::fs::read(dir.path().join("b").join(&name)).unwrap();
        assert!(a == b, "{name} differs between runs");
    }
}

#[test]
fn bracket_best_sequence_has_cstd_16_and_survives_verification() {
    let dir = bundle("bracket5");
    let out = optimize(dir.path(), "run", &["--seed", "3"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    assert_eq!(json(dir.path().join("run/sequence.json"))["best"]["max_cstd"], 16);

    let out = asg(
        &["verify", "bundle.json", "run/sequence.json", "-o", "run/verification.json"],
        dir.path(),
    );
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let v = json(dir.path().join("run/verification.json"));
    assert_eq!(v["neighbor_count"], 16);
    assert_eq!(v["dominated_by_neighbor"], false);
    assert_eq!(v["exhaustive"]["base_on_front"], true);

    let out = asg(&["report", "run", "-o", "plots"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = std::fs::read_to_string(dir.path().join("plots/scatter.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).expect("scatter is valid XML");
    let has_class = |n: &roxmltree::Node, c: &str| n.attribute("class") == Some(c);
    assert_eq!(doc.descendants().filter(|n| has_class(n, "best")).count(), 1);
    assert_eq!(doc.descendants().filter(|n| has_class(n, "series")).count(), 2);
    roxmltree::Document::parse(&std::fs::read_to_string(dir.path().join("plots/convergence.svg")).unwrap())
        .expect("convergence plot is valid XML");
    let summary = std::fs::read_to_string(dir.path().join("plots/summary.txt")).unwrap();
    assert!(summary.contains("feasible: 100.0%"), "{summary}");
    assert!(summary.contains("max CSTD 16"), "{summary}");
}

#[test]
fn report_without_verification_has_one_series() {
    let dir = bundle("stack2");
    assert_eq!(code(&optimize(dir.path(), "run", &QUICK)), 0);
    let out = asg(&["report", "run", "-o", "plots"], dir.path());
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let svg = std::fs::read_to_string(dir.path().join("plots/scatter.svg")).unwrap();
    let doc = roxmltree::Document::parse(&svg).unwrap();
    let series = doc.descendants().filter(|n| n.attribute("class") == Some("series")).count();
    assert_eq!(series, 1);
}

#[test]
fn report_on_an_empty_directory_names_the_missing_file() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::create_dir(dir.path().join("run")).unwrap();
    let out = asg(&["report", "run", "-o", "plots"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("sequence.json"), "{}", stderr(&out));
}

#[test]
fn sequence_from_another_product_is_rejected() {
    let stack = bundle("stack2");
    assert_eq!(code(&optimize(stack.path(), "run", &QUICK)), 0);
    let bracket = bundle("bracket5");
    let seq = stack.path().join("run/sequence.json");
    let out = asg(
        &["verify", "bundle.json", seq.to_str().unwrap(), "-o", "v.json"],
        bracket.path(),
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("2 parts but the bundle has 5"), "{}", stderr(&out));
}

#[test]
fn interlocked_product_exits_with_infeasible_status() {
    let dir = bundle("stack2");
    let path = dir.path().join("bundle.json");
    let mut b = json(path.clone());
    for matrix in b["interference_free"].as_object_mut().unwrap().values_mut() {
        *matrix = serde_json::json!([[0, 0], [0, 0]]);
    }
    std::fs::write(&path, serde_json::to_string_pretty(&b).unwrap()).unwrap();
    let out = optimize(dir.path(), "run", &QUICK);
    assert_eq!(code(&out), 3, "{}", stderr(&out));
    assert_eq!(json(dir.path().join("run/sequence.json"))["best"]["feasible"], false);
}

#[test]
fn bad_flags_and_configs_are_invalid_input() {
    let dir = bundle("stack2");
    assert_eq!(code(&optimize(dir.path(), "run", &["--rates", "0.2,0.1"])), 2);
    assert_eq!(code(&optimize(dir.path(), "run", &["--rates", "0.2,0.1,0.35,1.5"])), 2);
    std::fs::write(dir.path().join("ga.toml"), "generations = 5\niterations = 0\n").unwrap();
    assert_eq!(code(&optimize(dir.path(), "run", &["--config", "ga.toml"])), 2);
    std::fs::write(dir.path().join("ga.json"), r#"{"generations": 5, "iterations": 2}"#).unwrap();
    let out = optimize(dir.path(), "run", &["--config", "ga.json", "--iterations", "1"]);
    assert_eq!(code(&out), 0, "{}", stderr(&out));
    let report = json(dir.path().join("run/report.json"));
    assert_eq!(report["config"]["generations"], 5);
    assert_eq!(report["config"]["iterations"], 1);
}

#[test]
fn corrupt_bundle_is_invalid_input() {
    let dir = bundle("stack2");
    let path = dir.path().join("bundle.json");
    let mut b = json(path.clone());
    b["version"] = serde_json::json!(99);
    std::fs::write(&path, b.to_string()).unwrap();
    let out = optimize(dir.path(), "run", &QUICK);
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("schema version 99"), "{}", stderr(&out));
}

#[test]
fn unknown_fixture_is_invalid_input() {
    let dir = tempfile::tempdir().unwrap();
    let out = asg(&["fixture", "teapot", "-o", "fx"], dir.path());
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("stack2"));
}
