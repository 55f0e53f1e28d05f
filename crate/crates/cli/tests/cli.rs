//! Runs the `sls` binary end to end in scratch directories.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use ndarray::Array2;
use sls_core::{plan_prune, FeatureTrace, PruningPlan, ScProfile, StorageReport};
use tempfile::TempDir;

fn sls(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sls"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = sls(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read<T: serde::de::DeserializeOwned>(path: impl AsRef<Path>) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

const SMALL_TSNE: &[&str] = &["--perplexity", "10", "--tsne-iters", "300"];

fn small_trace(dir: &Path) {
    ok(
        dir,
        &["synth", "--synthetic-layers", "4", "--synthetic-samples", "60", "--synthetic-classes", "3", "-o", "t.slsf"],
    );
}

#[test]
fn missing_trace_exits_2_naming_the_path() {
    let dir = TempDir::new().unwrap();
    let out = sls(dir.path(), &["evaluate", "--trace", "no-such-trace.slsf"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-trace.slsf"));
}

#[test]
fn evaluate_is_reproducible_per_seed() {
    let dir = TempDir::new().unwrap();
    small_trace(dir.path());
    let run = |out: &str| {
        let mut args = vec!["evaluate", "--trace", "t.slsf", "--seed", "7", "-o", out];
        args.extend_from_slice(SMALL_TSNE);
        let table = ok(dir.path(), &args);
        assert_eq!(table.lines().count(), 5);
        fs::read(dir.path().join(out)).unwrap()
    };
    let a = run("a.json");
    assert_eq!(a, run("b.json"));
    let profile: ScProfile = serde_json::from_slice(&a).unwrap();
    assert_eq!(profile.values.len(), 4);
    assert_eq!(profile.seed, 7);
    assert_eq!(profile.tsne.perplexity, 10.0);
}

#[test]
fn evaluate_writes_csv_on_request() {
    let dir = TempDir::new().unwrap();
    small_trace(dir.path());
    let mut args = vec!["evaluate", "--trace", "t.slsf", "--format", "csv", "--max-samples", "30"];
    args.extend_from_slice(SMALL_TSNE);
    ok(dir.path(), &args);
    let csv = fs::read_to_string(dir.path().join("profile.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("layer,sc_index"));
    assert_eq!(csv.lines().count(), 5);
}

#[test]
fn plan_matches_library_and_feeds_report() {
    let dir = TempDir::new().unwrap();
    let profile = ScProfile::from_values("demo", vec![0.05, 0.10, 0.12, 0.20, 0.35, 0.50]);
    fs::write(dir.path().join("profile.json"), serde_json::to_string(&profile).unwrap()).unwrap();

    let stdout = ok(dir.path(), &["plan", "--profile", "profile.json"]);
    assert!(stdout.contains("layers 5..=6"), "{stdout}");
    let plan: PruningPlan = read(dir.path().join("plan.json"));
    assert_eq!(plan, plan_prune(&profile, 0.3).unwrap());

    ok(dir.path(), &["plan", "--profile", "profile.json", "--alpha", "0", "-o", "zero.json"]);
    assert_eq!(read::<PruningPlan>(dir.path().join("zero.json")).keep_layers, 1);

    ok(dir.path(), &["plan", "--profile", "profile.json", "--alpha", "1.01", "-o", "full.json"]);
    let spec = r#"{"pretrained_per_layer":[5,5,5,5,5,5],"adapter_per_layer":[[1,1,1,1,1,1],[2,2,2,2,2,2]],"head_per_dataset":[3,4]}"#;
    fs::write(dir.path().join("spec.json"), spec).unwrap();
    ok(dir.path(), &["report", "plan.json", "zero.json", "--model-spec", "spec.json"]);
    let report: StorageReport = read(dir.path().join("report.json"));
    assert_eq!(report.per_dataset_index, vec![4, 1]);
    assert_eq!(report.stored_total, 30 + 4 + 2 + 7);
}

#[test]
fn report_worked_example_and_unpruned_case() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("profile.json"), serde_json::to_string(&ScProfile::from_values("k1", vec![0.1, 0.5])).unwrap()).unwrap();
    fs::write(
        dir.path().join("spec.json"),
        r#"{"pretrained_per_layer":[10,10],"adapter_per_layer":[[1,1]],"head_per_dataset":[2]}"#,
    )
    .unwrap();

    // alpha 0 on an all-positive profile keeps layer 1 only
    ok(dir.path(), &["plan", "--profile", "profile.json", "--alpha", "0", "-o", "one.json"]);
    ok(dir.path(), &["report", "one.json", "--model-spec", "spec.json", "-o", "r1.json"]);
    let r: StorageReport = read(dir.path().join("r1.json"));
    assert_eq!((r.stored_total, r.naive_copies, r.petl_baseline), (23, 13, 24));
    assert_eq!(r.dataset_names, vec!["k1".to_string()]);

    ok(dir.path(), &["plan", "--profile", "profile.json", "-o", "all.json"]);
    ok(dir.path(), &["report", "all.json", "--model-spec", "spec.json", "-o", "r2.json"]);
    let r: StorageReport = read(dir.path().join("r2.json"));
    assert_eq!(r.stored_total, r.petl_baseline);
}

#[test]
fn dimension_mismatch_and_bad_json_exit_2() {
    let dir = TempDir::new().unwrap();
    fs::write(dir.path().join("profile.json"), serde_json::to_string(&ScProfile::from_values("x", vec![0.1, 0.5, 0.6])).unwrap()).unwrap();
    ok(dir.path(), &["plan", "--profile", "profile.json"]);
    fs::write(
        dir.path().join("spec.json"),
        r#"{"pretrained_per_layer":[10,10],"adapter_per_layer":[[1,1]],"head_per_dataset":[2]}"#,
    )
    .unwrap();
    let out = sls(dir.path(), &["report", "plan.json", "--model-spec", "spec.json"]);
    assert_eq!(out.status.code(), Some(2));

    fs::write(dir.path().join("broken.json"), "{\"values\": [").unwrap();
    let out = sls(dir.path(), &["plan", "--profile", "broken.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("broken.json"));

    fs::write(dir.path().join("range.json"), serde_json::to_string(&ScProfile::from_values("x", vec![0.1, 2.0])).unwrap()).unwrap();
    assert_eq!(sls(dir.path(), &["plan", "--profile", "range.json"]).status.code(), Some(2));
}

#[test]
fn degenerate_features_exit_3() {
    let dir = TempDir::new().unwrap();
    let labels: Vec<u32> = (0..12).map(|i| i % 2).collect();
    let trace = FeatureTrace::new("flat", 2, vec![Array2::zeros((12, 3))], labels).unwrap();
    sls_core::write_trace_file(&trace, dir.path().join("flat.slsf")).unwrap();
    let out = sls(dir.path(), &["evaluate", "--trace", "flat.slsf", "--perplexity", "5"]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
}

#[test]
fn bench_writes_json_and_csv() {
    let dir = TempDir::new().unwrap();
    let mut args = vec![
        "bench",
        "--synthetic-layers",
        "6",
        "--synthetic-samples",
        "80",
        "--synthetic-classes",
        "4",
        "--alphas",
        "0.1,0.3,0.5",
        "--strategy",
        "iterative",
    ];
    args.extend_from_slice(SMALL_TSNE);
    let first = ok(dir.path(), &args);
    let csv = fs::read(dir.path().join("bench.csv")).unwrap();
    let text = String::from_utf8(csv.clone()).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 7);
    assert_eq!(lines[0].split(',').filter(|c| c.starts_with("kept@")).count(), 3);

    let json: serde_json::Value = read(dir.path().join("bench.json"));
    assert_eq!(json["strategy"], "iterative");
    let trajectories: Vec<usize> = json["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["retrain"]["trajectory"].as_array().unwrap().len())
        .collect();
    let keeps: Vec<usize> = json["outcomes"]
        .as_array()
        .unwrap()
        .iter()
        .map(|o| o["plan"]["keep_layers"].as_u64().unwrap() as usize)
        .collect();
    for (steps, keep) in trajectories.iter().zip(&keeps) {
        assert_eq!(*steps, 6 - keep);
    }

    let second = ok(dir.path(), &args);
    assert_eq!(first, second);
    assert_eq!(fs::read(dir.path().join("bench.csv")).unwrap(), csv);
}

#[test]
fn help_lists_defaults() {
    let dir = TempDir::new().unwrap();
    for (cmd, needle) in [
        ("evaluate", "[default: 30]"),
        ("plan", "[default: 0.3]"),
        ("report", "--model-spec"),
        ("bench", "[default: one-shot]"),
        ("synth", "[default: 12]"),
    ] {
        let help = ok(dir.path(), &[cmd, "--help"]);
        assert!(help.contains(needle), "{cmd}: {help}");
        assert!(help.contains("[default: 42]"), "{cmd} lacks the seed default");
    }
}
