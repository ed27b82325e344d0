use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};

fn lemlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lemlab"))
        .args(args)
        .env("LEMLAB_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    let mut all: Vec<&str> = args.to_vec();
    let out = dir.to_str().unwrap();
    all.extend(["--out", out]);
    lemlab(&all)
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn file_hashes(dir: &Path) -> Vec<(String, String)> {
    read_json(&dir.join("manifest.json"))["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| (f["path"].as_str().unwrap().to_string(), f["sha256"].as_str().unwrap().to_string()))
        .collect()
}

#[test]
fn length_of_p0_reports_closed_form_and_asymptote() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["length", "--family", "p0", "--n", "9"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = read_json(&dir.path().join("length.json"));
    let closed = report["closed_form"].as_f64().unwrap();
    let fiber = report["fiber"]["length"].as_f64().unwrap();
    assert!((closed - 20.899_111_801_667_08).abs() < 1e-9);
    assert!((fiber - closed).abs() < 1e-8 * closed);
    assert!((report["asymptote"].as_f64().unwrap() - 20.7726).abs() < 1e-4);
}

#[test]
fn manifest_hashes_match_written_files() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["trace", "--family", "example1", "--n", "9", "--a", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let manifest = read_json(&dir.path().join("manifest.json"));
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["config"]["seed"], "0x45485031");
    assert_eq!(manifest["config"]["input"]["a"], 0.5);
    let mut listed: Vec<String> = Vec::new();
    for (path, hash) in file_hashes(dir.path()) {
        let bytes = fs::read(dir.path().join(&path)).unwrap();
        assert_eq!(hex::encode(Sha256::digest(&bytes)), hash, "{path}");
        listed.push(path);
    }
    let mut on_disk: Vec<String> = fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    listed.sort();
    assert_eq!(listed, on_disk);
}

#[test]
fn trace_svg_is_self_contained() {
    let dir = tempfile::tempdir().unwrap();
    run_in(dir.path(), &["trace", "--family", "p0", "--n", "4"]);
    let svg = fs::read_to_string(dir.path().join("trace.svg")).unwrap();
    assert!(svg.contains(r#"viewBox="-1.6 -1.6 3.2 3.2""#));
    assert!(!svg.contains("href") && !svg.contains("<style"));
    let csv = fs::read_to_string(dir.path().join("trace.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("component_id,vertex_index,re,im"));
}

#[test]
fn reruns_reproduce_hashes() {
    for args in [
        &["trace", "--family", "example2", "--n", "6", "--a", "0.8"][..],
        &["search", "--n", "3", "--restarts", "2"][..],
        &["laurent", "--family", "example1", "--n", "5"][..],
    ] {
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        assert_eq!(run_in(a.path(), args).status.code(), Some(0));
        assert_eq!(run_in(b.path(), args).status.code(), Some(0));
        assert_eq!(file_hashes(a.path()), file_hashes(b.path()), "{args:?}");
    }
}

#[test]
fn family_file_feeds_back_as_input() {
    let dir = tempfile::tempdir().unwrap();
    let fam = dir.path().join("fam");
    let o = run_in(&fam, &["families", "--family", "example2", "--n", "9", "--a", "0.5"]);
    assert_eq!(o.status.code(), Some(0));
    let input = fam.join("polynomial.json");
    let from_file = dir.path().join("file");
    let from_family = dir.path().join("family");
    run_in(&from_file, &["length", "--input", input.to_str().unwrap()]);
    run_in(&from_family, &["length", "--family", "example2", "--n", "9", "--a", "0.5"]);
    let a = read_json(&from_file.join("length.json"));
    let b = read_json(&from_family.join("length.json"));
    assert_eq!(a["length"], b["length"]);
    let deficit = b["deficit"].as_f64().unwrap();
    assert!(deficit > 0.5 && deficit < 1.0, "{deficit}");
}

#[test]
fn area_reports_polya_bound() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["area", "--family", "cassini", "--r", "0.5", "--level", "1", "--budget-tol", "1e-5"]);
    assert_eq!(o.status.code(), Some(0));
    let report = read_json(&dir.path().join("area.json"));
    assert_eq!(report["polya_holds"], true);
    let area = report["area"]["value"].as_f64().unwrap();
    assert!(area > 0.0 && area <= report["polya_bound"].as_f64().unwrap());
}

#[test]
fn fitted_battery_passes_on_shipped_calibration() {
    let dir = tempfile::tempdir().unwrap();
    let o = run_in(dir.path(), &["verify", "--battery", "fitted"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stdout));
    let summary = read_json(&dir.path().join("summary.json"));
    let lines = fs::read_to_string(dir.path().join("reports.jsonl")).unwrap();
    assert_eq!(lines.lines().count() as u64, summary["suites"].as_u64().unwrap());
    for line in lines.lines() {
        let r: Value = serde_json::from_str(line).unwrap();
        assert_eq!(r["kind"], "fitted");
        assert_eq!(r["passed"], true);
    }
}

#[test]
fn configuration_errors_exit_64() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, r#"{"coefficients":[[1,0],[3,0]]}"#).unwrap();
    let out = dir.path().join("out");
    let o = out.to_str().unwrap();
    for args in [
        &["length", "--family", "p0"][..],
        &["length", "--family", "nope", "--n", "3"][..],
        &["length", "--n", "3"][..],
        &["length", "--family", "p0", "--n", "3", "--input", bad.to_str().unwrap()][..],
        &["length", "--input", bad.to_str().unwrap(), "--out", o][..],
        &["length", "--input", "/nonexistent/poly.json"][..],
        &["trace", "--family", "p0", "--n", "3", "--seed", "xyz"][..],
        &["area", "--family", "p0", "--n", "3", "--level", "-1"][..],
        &["laurent", "--family", "p0", "--n", "3", "--level", "0.5"][..],
        &["search", "--n", "2"][..],
        &["verify", "--battery", "medium"][..],
    ] {
        assert_eq!(lemlab(args).status.code(), Some(64), "{args:?}");
    }
    assert!(!out.exists());
}

#[test]
fn runtime_failures_exit_70_with_diagnostic() {
    let dir = tempfile::tempdir().unwrap();
    // Below the critical value the sublevel set is disconnected.
    let o = run_in(dir.path(), &["laurent", "--family", "cassini", "--r", "2", "--level", "2"]);
    assert_eq!(o.status.code(), Some(70));
    let diag: Value = serde_json::from_slice(&o.stderr).unwrap();
    assert_eq!(diag["status"], "runtime_failure");
}

#[test]
fn thread_cap_must_be_positive() {
    let o = Command::new(env!("CARGO_BIN_EXE_lemlab"))
        .args(["families", "--out", tempfile::tempdir().unwrap().path().to_str().unwrap()])
        .env("LEMLAB_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(64));
}
