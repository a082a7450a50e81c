//! End-to-end checks of the mskmeans binary: exit codes, output formats,
//! and byte-level reproducibility.

use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_mskmeans"))
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn mskmeans")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn write_points_csv(dir: &Path, name: &str, rows: &[[f64; 2]]) -> String {
    let path = dir.join(name);
    let text: String =
        rows.iter().map(|r| format!("{},{}\n", r[0], r[1])).collect();
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

fn grid_rows() -> Vec<[f64; 2]> {
    // Three well-separated blobs of four points each.
    let mut rows = Vec::new();
    for &(cx, cy) in &[(0.0, 0.0), (10.0, 0.0), (5.0, 8.0)] {
        for (dx, dy) in [(0.0, 0.0), (0.3, 0.1), (-0.2, 0.2), (0.1, -0.3)] {
            rows.push([cx + dx, cy + dy]);
        }
    }
    rows
}

#[test]
fn cluster_stdout_is_byte_stable() {
    let dir = TempDir::new().unwrap();
    let input = write_points_csv(dir.path(), "pts.csv", &grid_rows());
    let args = ["cluster", "--input", &input, "--k", "3", "--seed", "9", "--steps", "20"];
    let a = run(&args);
    let b = run(&args);
    assert!(a.status.success(), "stderr: {}", stderr(&a));

    // Timings live only under summary.meta; everything else reproduces
    // byte-for-byte given the same flags and seed.
    let mut doc_a: Value = serde_json::from_str(&stdout(&a)).expect("stdout is one JSON document");
    let mut doc_b: Value = serde_json::from_str(&stdout(&b)).unwrap();
    assert!(doc_a["summary"]["meta"]["seconds"].is_f64());
    doc_a["summary"].as_object_mut().unwrap().remove("meta");
    doc_b["summary"].as_object_mut().unwrap().remove("meta");
    assert_eq!(doc_a, doc_b, "same flags and seed must reproduce the data");

    let doc = doc_a;
    assert_eq!(doc["summary"]["k"], 3);
    assert_eq!(doc["summary"]["n"], 12);
    assert_eq!(doc["summary"]["algorithm"], "msls-g");
    assert_eq!(doc["centers"].as_array().unwrap().len(), 3);
    assert!(doc["summary"]["final_cost"].as_f64().unwrap() > 0.0);
    assert!(
        doc["summary"]["final_cost"].as_f64().unwrap()
            <= doc["summary"]["seeding_cost"].as_f64().unwrap()
    );
}

#[test]
fn cluster_out_writes_centers_and_summary_sidecar() {
    let dir = TempDir::new().unwrap();
    let input = write_points_csv(dir.path(), "pts.csv", &grid_rows());
    let out = dir.path().join("centers.csv");
    let res = run(&[
        "cluster",
        "--input",
        &input,
        "--k",
        "3",
        "--seed",
        "4",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", stderr(&res));
    assert!(stdout(&res).is_empty(), "data goes to the file, not stdout");

    let centers = std::fs::read_to_string(&out).unwrap();
    assert_eq!(centers.lines().count(), 3);
    for line in centers.lines() {
        assert_eq!(line.split(',').count(), 2);
        for field in line.split(',') {
            field.parse::<f64>().expect("center coordinates are numeric");
        }
    }

    let summary_path = dir.path().join("centers.summary.json");
    let summary: Value =
        serde_json::from_str(&std::fs::read_to_string(summary_path).unwrap()).unwrap();
    assert_eq!(summary["k"], 3);
    assert!(summary["meta"]["seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn ssls_matches_greedy_single_swap() {
    let dir = TempDir::new().unwrap();
    let input = write_points_csv(dir.path(), "pts.csv", &grid_rows());
    let base = ["cluster", "--input", &input, "--k", "3", "--seed", "2", "--steps", "15"];
    let ssls = run(&[&base[..], &["--algo", "ssls"]].concat());
    let greedy = run(&[&base[..], &["--algo", "msls-g", "--p", "1"]].concat());
    assert!(ssls.status.success() && greedy.status.success());

    let a: Value = serde_json::from_str(&stdout(&ssls)).unwrap();
    let b: Value = serde_json::from_str(&stdout(&greedy)).unwrap();
    assert_eq!(a["centers"], b["centers"]);
    assert_eq!(a["summary"]["final_cost"], b["summary"]["final_cost"]);
    assert_eq!(a["summary"]["algorithm"], "ssls");
    assert_eq!(b["summary"]["algorithm"], "msls-g");
}

#[test]
fn zero_steps_reduces_to_seeding() {
    let dir = TempDir::new().unwrap();
    let input = write_points_csv(dir.path(), "pts.csv", &grid_rows());
    let msls = run(&[
        "cluster", "--input", &input, "--k", "3", "--seed", "5", "--algo", "msls", "--steps", "0",
    ]);
    let kmpp = run(&[
        "cluster", "--input", &input, "--k", "3", "--seed", "5", "--algo", "kmpp",
    ]);
    assert!(msls.status.success() && kmpp.status.success());

    let a: Value = serde_json::from_str(&stdout(&msls)).unwrap();
    let b: Value = serde_json::from_str(&stdout(&kmpp)).unwrap();
    assert_eq!(a["centers"], b["centers"]);
    assert_eq!(a["summary"]["seeding_cost"], a["summary"]["final_cost"]);
    assert_eq!(a["summary"]["final_cost"], b["summary"]["final_cost"]);
    assert_eq!(a["summary"]["steps_accepted"], 0);
}

#[test]
fn missing_input_exits_one() {
    let res = run(&["cluster", "--input", "/nonexistent/pts.csv", "--k", "2"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(stderr(&res).contains("mskmeans:"), "stderr: {}", stderr(&res));
}

#[test]
fn bad_flags_exit_two() {
    let dir = TempDir::new().unwrap();
    let input = write_points_csv(dir.path(), "pts.csv", &grid_rows());
    for args in [
        vec!["cluster", "--input", &input, "--k", "0"],
        vec!["cluster", "--input", &input, "--k", "2", "--p", "0"],
        vec!["cluster", "--input", &input, "--k", "2", "--epsilon", "1.0"],
        vec!["cluster", "--input", &input, "--k", "2", "--algo", "quantum"],
        vec!["bound", "--p", "0"],
        vec!["bound", "--p", "inf", "--variant", "unknown"],
        vec!["experiment", "--spec", "x.json", "--mode", "sideways"],
    ] {
        let res = run(&args);
        assert_eq!(res.status.code(), Some(2), "args {args:?}: {}", stderr(&res));
    }
}

#[test]
fn invalid_experiment_spec_exits_two() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("spec.json");

    std::fs::write(&path, "{ not json").unwrap();
    let res = run(&["experiment", "--spec", path.to_str().unwrap(), "--mode", "trajectory"]);
    assert_eq!(res.status.code(), Some(2));
    assert!(stderr(&res).contains("invalid experiment spec"), "stderr: {}", stderr(&res));

    // Well-formed JSON that fails validation: k = 0.
    std::fs::write(
        &path,
        r#"{
            "dataset": {"type": "synthetic", "n": 50, "dim": 2, "components": 3, "seed": 1},
            "k": 0,
            "algorithms": [{"variant": "ssls"}],
            "seeds": [1]
        }"#,
    )
    .unwrap();
    let res = run(&["experiment", "--spec", path.to_str().unwrap(), "--mode", "trajectory"]);
    assert_eq!(res.status.code(), Some(2));
}

fn small_spec(dir: &Path) -> String {
    let path = dir.join("spec.json");
    std::fs::write(
        &path,
        r#"{
            "dataset": {"type": "synthetic", "n": 120, "dim": 3, "components": 4, "seed": 13},
            "name": "smoke",
            "k": 4,
            "algorithms": [
                {"variant": "ssls"},
                {"variant": "msls-g", "p": 2}
            ],
            "steps": 8,
            "seeds": [1, 2]
        }"#,
    )
    .unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn experiment_csv_layout_and_determinism() {
    let dir = TempDir::new().unwrap();
    let spec = small_spec(dir.path());
    let out = dir.path().join("rows.csv");
    let args = [
        "experiment", "--spec", &spec, "--mode", "trajectory", "--out", out.to_str().unwrap(),
    ];
    let res = run(&args);
    assert!(res.status.success(), "stderr: {}", stderr(&res));

    let rows = std::fs::read_to_string(&out).unwrap();
    let mut lines = rows.lines();
    assert_eq!(
        lines.next().unwrap(),
        "dataset,algorithm,p,seed,k,phase,index,cost,relative_cost,seconds"
    );
    let body: Vec<&str> = lines.collect();
    // 2 seeding rows + 2 algorithms × 2 seeds × 8 steps.
    assert_eq!(body.len(), 2 + 2 * 2 * 8);
    for want in ["kmpp", "ssls", "msls-g"] {
        assert!(body.iter().any(|l| l.split(',').nth(1) == Some(want)), "no rows for {want}");
    }
    for seed in ["1", "2"] {
        assert!(body.iter().any(|l| l.split(',').nth(3) == Some(seed)), "no rows for seed {seed}");
    }

    // Sidecars: per-cell summary and the run metadata with the spec echoed.
    let summary = std::fs::read_to_string(dir.path().join("rows.summary.csv")).unwrap();
    assert!(summary.starts_with("dataset,algorithm,p,phase,index,seeds,"));
    let meta: Value =
        serde_json::from_str(&std::fs::read_to_string(dir.path().join("rows.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["mode"], "trajectory");
    assert_eq!(meta["spec"]["name"], "smoke");
    assert_eq!(meta["spec"]["k"], 4);

    // Cost columns reproduce across reruns; the timing column may not.
    let rerun_out = dir.path().join("rows2.csv");
    let res2 = run(&[
        "experiment", "--spec", &spec, "--mode", "trajectory", "--out",
        rerun_out.to_str().unwrap(),
    ]);
    assert!(res2.status.success());
    let rows2 = std::fs::read_to_string(&rerun_out).unwrap();
    let strip = |text: &str| -> Vec<String> {
        text.lines()
            .map(|l| l.rsplit_once(',').map(|(head, _)| head.to_string()).unwrap())
            .collect()
    };
    assert_eq!(strip(&rows), strip(&rows2));
}

#[test]
fn experiment_stdout_json_when_no_out() {
    let dir = TempDir::new().unwrap();
    let spec = small_spec(dir.path());
    let res = run(&["experiment", "--spec", &spec, "--mode", "lloyd"]);
    assert!(res.status.success(), "stderr: {}", stderr(&res));
    let doc: Value = serde_json::from_str(&stdout(&res)).expect("stdout is one JSON document");
    assert_eq!(doc["meta"]["mode"], "lloyd");
    assert!(doc["rows"].as_array().unwrap().len() > 0);
    assert!(doc["summary"].as_array().unwrap().len() > 0);
    // Lloyd mode emits per-iteration rows on top of the step rows.
    assert!(doc["rows"]
        .as_array()
        .unwrap()
        .iter()
        .any(|r| r["phase"] == "lloyd"));
}

#[test]
fn bound_rejects_zero_and_accepts_aliases() {
    for p in ["inf", "infinity", "3"] {
        let res = run(&["bound", "--p", p]);
        assert!(res.status.success(), "p={p}");
        stdout(&res).trim().parse::<f64>().expect("numeric bound");
    }
    let res = run(&["bound", "--p", "0"]);
    assert_eq!(res.status.code(), Some(2));
}
