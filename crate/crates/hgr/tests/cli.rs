use std::process::{Command, Output};

use serde_json::Value;

fn hgr(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_hgr"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok_json(args: &[&str]) -> Value {
    let out = hgr(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).unwrap()
}

fn results(args: &[&str]) -> Value {
    ok_json(args)["results"].clone()
}

#[test]
fn envelope_has_all_fields() {
    let v = ok_json(&[
        "compute",
        "--synthetic",
        "linear:n=50:sigma=0.5",
        "--method",
        "pearson",
    ]);
    for key in [
        "command",
        "version",
        "input_sha256",
        "config",
        "results",
        "timings_ms",
    ] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "compute");
    assert_eq!(v["input_sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn exact_quadratic_dependence_is_one() {
    let r = results(&[
        "compute",
        "--synthetic",
        "quadratic:n=500:sigma=0",
        "--method",
        "kb",
        "--degrees",
        "2,1",
    ]);
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() <= 1e-8);
}

#[test]
fn degree_one_kb_matches_pearson() {
    let spec = "cubic:n=200:sigma=0.4:seed=3";
    let kb = results(&[
        "compute",
        "--synthetic",
        spec,
        "--method",
        "kb",
        "--degrees",
        "1,1",
    ]);
    let p = results(&["compute", "--synthetic", spec, "--method", "pearson"]);
    assert!((kb["value"].as_f64().unwrap() - p["abs_value"].as_f64().unwrap()).abs() <= 1e-8);
}

#[test]
fn seeded_rdc_payloads_are_byte_identical() {
    let args = [
        "compute",
        "--synthetic",
        "circular:n=200:sigma=0.1",
        "--method",
        "rdc",
        "--seed",
        "7",
    ];
    let a = hgr(&args);
    let b = hgr(&args);
    let strip = |o: &Output| {
        let mut v: Value = serde_json::from_slice(&o.stdout).unwrap();
        v.as_object_mut().unwrap().remove("timings_ms");
        v.to_string()
    };
    assert_eq!(strip(&a), strip(&b));
}

#[test]
fn csv_input_and_columns() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("pair.csv");
    let gen = ok_json(&[
        "generate",
        "--synthetic",
        "quadratic:n=100:sigma=0.05:seed=2",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(gen["results"]["rows"], 100);
    let from_file = results(&[
        "compute",
        "--input",
        path.to_str().unwrap(),
        "--degrees",
        "2,1",
    ]);
    let synthetic = results(&[
        "compute",
        "--synthetic",
        "quadratic:n=100:sigma=0.05:seed=2",
        "--degrees",
        "2,1",
    ]);
    assert_eq!(from_file["value"], synthetic["value"]);
    let swapped = results(&[
        "compute",
        "--input",
        path.to_str().unwrap(),
        "--columns",
        "b,a",
        "--degrees",
        "1,2",
    ]);
    assert!(
        (swapped["value"].as_f64().unwrap() - from_file["value"].as_f64().unwrap()).abs() < 1e-8
    );
}

#[test]
fn input_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.csv");
    std::fs::write(&bad, "a,b\n1,2\nx,3\n4,5\n").unwrap();
    for args in [
        vec!["compute", "--input", bad.to_str().unwrap()],
        vec!["compute", "--input", "/nonexistent/file.csv"],
        vec!["compute"],
        vec!["compute", "--synthetic", "spiral:n=10"],
        vec!["compute", "--synthetic", "linear", "--degrees", "0,3"],
    ] {
        let out = hgr(&args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        let err: Value = serde_json::from_slice(&out.stderr).unwrap();
        assert_eq!(err["error"]["kind"], "input");
    }
}

#[test]
fn thread_cap_must_be_positive() {
    let out = Command::new(env!("CARGO_BIN_EXE_hgr"))
        .env("HGR_THREADS", "zero")
        .args(["compute", "--synthetic", "linear"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn scan_on_quadratic_data() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("grid.csv");
    let r = results(&[
        "scan",
        "--synthetic",
        "quadratic:n=500:sigma=0.1:seed=1",
        "--max-degrees",
        "5,5",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    let grid = r["values"].as_array().unwrap();
    let cell = |h: usize, k: usize| grid[h - 1][k - 1].as_f64().unwrap();
    assert!(cell(2, 1) >= cell(5, 5) - 0.05 - 1e-6);
    assert!((cell(1, 1) - r["abs_pearson"].as_f64().unwrap()).abs() <= 1e-8);
    assert_eq!(r["monotone"], true);
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().next().unwrap(), "h,k1,k2,k3,k4,k5");
    assert_eq!(text.lines().count(), 6);
}

#[test]
fn detect_noiseless_relations() {
    let r = results(&[
        "detect",
        "--sigmas",
        "0",
        "--seeds",
        "2",
        "--n",
        "500",
        "--methods",
        "kb,sk",
    ]);
    for row in r["summary"].as_array().unwrap() {
        let mean = row["mean"].as_f64().unwrap();
        match (
            row["relation"].as_str().unwrap(),
            row["method"].as_str().unwrap(),
        ) {
            ("sin_of_square", _) => {}
            (_, "kb") => assert!(mean >= 0.98, "{row}"),
            _ => {}
        }
    }
    let get = |rel: &str, m: &str| {
        r["summary"]
            .as_array()
            .unwrap()
            .iter()
            .find(|x| x["relation"] == rel && x["method"] == m)
            .unwrap()["mean"]
            .as_f64()
            .unwrap()
    };
    assert!(get("circular", "kb") - get("circular", "sk") >= 0.2);
}

#[test]
fn detect_fixed_data_contrast() {
    let r = results(&[
        "detect",
        "--relations",
        "quadratic",
        "--sigmas",
        "0.2",
        "--seeds",
        "5",
        "--n",
        "300",
        "--methods",
        "kb,rdc",
        "--fixed-data",
    ]);
    for row in r["summary"].as_array().unwrap() {
        let std = row["std"].as_f64().unwrap();
        match row["method"].as_str().unwrap() {
            "kb" => assert_eq!(std, 0.0),
            _ => assert!(std > 0.0),
        }
    }
}

#[test]
fn determinism_command() {
    let r = results(&[
        "determinism",
        "--synthetic",
        "cubic:n=200:sigma=0.3",
        "--runs",
        "30",
    ]);
    assert_eq!(r["kb"]["std"], 0.0);
    assert_eq!(r["kb"]["bit_identical"], true);
    assert_eq!(r["sk"]["std"], 0.0);
    assert!(r["rdc"]["std"].as_f64().unwrap() > 0.0);
    let one = results(&[
        "determinism",
        "--synthetic",
        "cubic:n=200:sigma=0.3",
        "--runs",
        "1",
        "--methods",
        "rdc",
    ]);
    assert_eq!(one["rdc"]["std"], 0.0);
}

#[test]
fn bench_single_repeat() {
    let r = results(&[
        "bench",
        "--sizes",
        "500,2000",
        "--repeats",
        "1",
        "--degree",
        "3",
    ]);
    let sizes = r["sizes"].as_array().unwrap();
    assert_eq!(sizes.len(), 2);
    for row in sizes {
        assert_eq!(row["sk_ms"].as_array().unwrap().len(), 1);
        assert!(row["sk_median_ms"].as_f64().unwrap() > 0.0);
    }
}

#[test]
fn inspect_consistency_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("proj.csv");
    let r = results(&[
        "inspect",
        "--synthetic",
        "quadratic:n=400:sigma=0.1:seed=3",
        "--degrees",
        "2,1",
        "--test-split",
        "0.25",
        "--csv",
        csv.to_str().unwrap(),
    ]);
    assert!(
        (r["projected_correlation"].as_f64().unwrap() - r["value"].as_f64().unwrap()).abs() <= 1e-8
    );
    let alpha = r["alpha"].as_array().unwrap();
    assert!(alpha[1].as_f64().unwrap().abs() >= 10.0 * alpha[0].as_f64().unwrap().abs());
    assert_eq!(r["test"]["n_test"], 100);
    let text = std::fs::read_to_string(csv).unwrap();
    assert_eq!(text.lines().count(), 401);
}

#[test]
fn train_on_csv_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("fair.csv");
    ok_json(&[
        "generate",
        "--fairness",
        "n=200:seed=1",
        "--output",
        path.to_str().unwrap(),
    ]);
    let args = [
        "train",
        "--data",
        path.to_str().unwrap(),
        "--schema",
        "target=y,protected=z,categorical=group",
        "--penalizer",
        "none",
        "--folds",
        "3",
        "--epochs",
        "20",
        "--hidden",
        "8",
    ];
    let a = results(&args);
    let b = results(&args);
    assert_eq!(a, b);
    assert_eq!(a["folds"].as_array().unwrap().len(), 3);
    assert!(a["summary"]["constraint_val"]["mean"].as_f64().unwrap() > 0.0);
    assert!(a["folds"][0]["final_lambda"].as_f64().unwrap() == 0.0);
    let features = a["dataset"]["features"].as_array().unwrap();
    assert!(features.iter().any(|f| f == "group=a"));

    let out = hgr(&["train", "--data", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    let out = hgr(&[
        "train",
        "--data",
        path.to_str().unwrap(),
        "--schema",
        "target=y,protected=missing",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn generate_to_stdout() {
    let out = hgr(&["generate", "--synthetic", "linear:n=10:sigma=0.1"]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next(), Some("a,b"));
    assert_eq!(text.lines().count(), 11);
}
