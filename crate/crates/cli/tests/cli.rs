//! End-to-end tests of the `ucpg` binary: exit codes, file outputs, and
//! byte-level determinism.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ucpg"))
}

fn tmp_dir(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join("ucpg-cli-tests").join(name);
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn sequences_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../sequences")
        .canonicalize()
        .unwrap()
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn generate_writes_the_closed_form_phases() {
    let dir = tmp_dir("generate");
    let out_path = dir.join("n4.json");
    let out = run(&[
        "generate",
        "--n",
        "4",
        "--phi",
        "90deg",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    let phases: Vec<f64> = parsed["phases_rad"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    let expected_deg = [0.0, 22.5, 225.0, 247.5];
    for (p, e) in phases.iter().zip(expected_deg) {
        assert!(
            (p.to_degrees() - e).abs() < 1e-9,
            "phase {} deg vs expected {e}",
            p.to_degrees()
        );
    }
    assert_eq!(parsed["family"], "ucpg-analytic");
}

#[test]
fn generate_rejects_odd_pulse_count() {
    let out = run(&["generate", "--n", "7", "--phi", "30deg"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("even"));
}

#[test]
fn generate_accepts_radian_suffix() {
    let dir = tmp_dir("generate-rad");
    let out_path = dir.join("n4rad.json");
    let out = run(&[
        "generate",
        "--n",
        "4",
        "--phi",
        "1.5707963267948966rad",
        "--out",
        out_path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let parsed: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert!((parsed["target_phase"].as_f64().unwrap() - std::f64::consts::FRAC_PI_2).abs() < 1e-12);
}

#[test]
fn verify_passes_analytic_eight_pulse_file() {
    let seq = sequences_dir().join("ucpg-n8-phi90.json");
    let out = run(&["verify", "--seq", seq.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(report["pass"], true);
    assert_eq!(report["predicted_exponent"], 5);
    let fitted = report["fitted_exponent"].as_f64().unwrap();
    assert!((fitted - 5.0).abs() < 0.1, "fitted {fitted}");
}

#[test]
fn verify_fails_naive_sequence_at_order_one() {
    let dir = tmp_dir("verify-naive");
    let path = dir.join("naive.json");
    std::fs::write(
        &path,
        r#"{
  "schema_version": 1,
  "family": "naive",
  "n_pulses": 4,
  "phases_rad": [0.0, 0.0, 0.0, 0.0],
  "target_phase": 0.0,
  "provenance": "equal phases, no cancellation"
}"#,
    )
    .unwrap();
    let out = run(&["verify", "--seq", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(report["pass"], false);
    assert_eq!(report["per_order"][0]["order"], 1);
    assert_eq!(report["per_order"][0]["pass"], false);
    assert_eq!(report["first_failure"][0], 1);
}

#[test]
fn verify_labels_large_sequences_as_conjectured() {
    let dir = tmp_dir("verify-n28");
    let path = dir.join("n28.json");
    let gen = run(&[
        "generate",
        "--n",
        "28",
        "--phi",
        "45deg",
        "--out",
        path.to_str().unwrap(),
    ]);
    assert_eq!(gen.status.code(), Some(0));
    let out = run(&["verify", "--seq", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    assert_eq!(report["conjectured"], true);
    assert_eq!(report["pass"], true);
}

#[test]
fn scan_writes_deterministic_artifacts() {
    let seq = sequences_dir().join("ucpg-n4-phi90.json");
    let dir_a = tmp_dir("scan-a");
    let dir_b = tmp_dir("scan-b");
    for dir in [&dir_a, &dir_b] {
        let out = run(&[
            "scan",
            "--seq",
            seq.to_str().unwrap(),
            "--grid",
            "12x12",
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    for name in [
        "ucpg-n4-phi90-rectangular.csv",
        "ucpg-n4-phi90-rectangular.json",
        "ucpg-n4-phi90-rectangular.svg",
    ] {
        let a = std::fs::read(dir_a.join(name)).unwrap();
        let b = std::fs::read(dir_b.join(name)).unwrap();
        assert_eq!(a, b, "{name} differs between identical runs");
    }
    let csv = std::fs::read_to_string(dir_a.join("ucpg-n4-phi90-rectangular.csv")).unwrap();
    assert!(csv.starts_with("eps_a,delta,fidelity\n"));
    assert_eq!(csv.lines().count(), 1 + 12 * 12);
    let sidecar: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dir_a.join("ucpg-n4-phi90-rectangular.json")).unwrap())
            .unwrap();
    assert!(sidecar["config_hash"].as_str().unwrap().len() == 16);
    assert_eq!(sidecar["grid"]["n_eps"], 12);
}

#[test]
fn scan_output_is_independent_of_thread_count() {
    let seq = sequences_dir().join("ucpg-n4-phi90.json");
    let dir_a = tmp_dir("scan-t1");
    let dir_b = tmp_dir("scan-t4");
    for (dir, threads) in [(&dir_a, "1"), (&dir_b, "4")] {
        let out = run(&[
            "scan",
            "--seq",
            seq.to_str().unwrap(),
            "--grid",
            "11x11",
            "--threads",
            threads,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(dir_a.join("ucpg-n4-phi90-rectangular.csv")).unwrap();
    let b = std::fs::read(dir_b.join("ucpg-n4-phi90-rectangular.csv")).unwrap();
    assert_eq!(a, b);
}

#[test]
fn scan_rejects_too_few_integrator_steps() {
    let seq = sequences_dir().join("ucpg-n4-phi90.json");
    let out = run(&[
        "scan",
        "--seq",
        seq.to_str().unwrap(),
        "--envelope",
        "gauss",
        "--steps",
        "50",
        "--grid",
        "5x5",
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn gauss_scan_matches_rect_on_resonance_row() {
    let seq = sequences_dir().join("ucpg-n4-phi90.json");
    let dir = tmp_dir("scan-gauss");
    // 11 delta points over a symmetric range include delta = 0 exactly.
    for env in ["rect", "gauss"] {
        let out = run(&[
            "scan",
            "--seq",
            seq.to_str().unwrap(),
            "--grid",
            "9x11",
            "--envelope",
            env,
            "--out",
            dir.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let read_rows = |name: &str| -> Vec<(f64, f64, f64)> {
        std::fs::read_to_string(dir.join(name))
            .unwrap()
            .lines()
            .skip(1)
            .map(|l| {
                let mut it = l.split(',').map(|v| v.parse::<f64>().unwrap());
                (it.next().unwrap(), it.next().unwrap(), it.next().unwrap())
            })
            .collect()
    };
    let rect = read_rows("ucpg-n4-phi90-rectangular.csv");
    let gauss = read_rows("ucpg-n4-phi90-truncated-gaussian.csv");
    let mut compared = 0;
    for (r, g) in rect.iter().zip(&gauss) {
        if r.1 == 0.0 {
            assert!((r.2 - g.2).abs() < 1e-6, "at eps_a={}: {} vs {}", r.0, r.2, g.2);
            compared += 1;
        }
    }
    assert_eq!(compared, 9);
}

#[test]
fn compare_of_sequence_with_itself_reports_identical_metrics() {
    let seq = sequences_dir().join("ucpg-n4-phi90.json");
    let out = run(&[
        "compare",
        "--seq-a",
        seq.to_str().unwrap(),
        "--seq-b",
        seq.to_str().unwrap(),
        "--grid",
        "15x15",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_str(&stdout_str(&out)).unwrap();
    let entries = report["entries"].as_array().unwrap();
    assert_eq!(entries.len(), 2);
    assert_eq!(entries[0]["area_fraction"], entries[1]["area_fraction"]);
    assert_eq!(entries[0]["eps_a_halfwidth"], entries[1]["eps_a_halfwidth"]);
    assert_eq!(entries[0]["delta_halfwidth"], entries[1]["delta_halfwidth"]);
}

#[test]
fn compare_reports_reference_data_absent_for_placeholders() {
    let a = sequences_dir().join("ucpg-n4-phi90.json");
    let b = sequences_dir().join("uph6a-phi90.json");
    let out = run(&[
        "compare",
        "--seq-a",
        a.to_str().unwrap(),
        "--seq-b",
        b.to_str().unwrap(),
        "--grid",
        "8x8",
    ]);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("reference data absent"));
}

#[test]
fn compare_with_axis_cuts_writes_cut_files() {
    let a = sequences_dir().join("ucpg-n8-phi90.json");
    let b = sequences_dir().join("uph10a-phi90.json");
    let dir = tmp_dir("compare-cuts");
    let out = run(&[
        "compare",
        "--seq-a",
        a.to_str().unwrap(),
        "--seq-b",
        b.to_str().unwrap(),
        "--grid",
        "11x11",
        "--axis-cuts",
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    assert!(dir.join("compare.json").exists());
    for name in [
        "ucpg-n8-phi90-cut-eps.csv",
        "ucpg-n8-phi90-cut-delta.csv",
        "uph10a-phi90-cut-eps.csv",
        "uph10a-phi90-cut-delta.csv",
    ] {
        let text = std::fs::read_to_string(dir.join(name)).unwrap();
        assert!(text.starts_with("coordinate,infidelity\n"));
        assert_eq!(text.lines().count(), 1 + 11);
    }
}

#[test]
fn missing_files_exit_with_io_code() {
    let out = run(&["verify", "--seq", "/nonexistent/nope.json"]);
    assert_eq!(out.status.code(), Some(3));
    let out = run(&["scan", "--seq", "/nonexistent/nope.json"]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn malformed_sequence_file_exits_with_schema_code() {
    let dir = tmp_dir("malformed");
    let path = dir.join("bad.json");
    std::fs::write(&path, "{\"family\": 12}").unwrap();
    let out = run(&["verify", "--seq", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn usage_errors_exit_with_code_two() {
    let out = run(&["scan"]); // missing required --seq
    assert_eq!(out.status.code(), Some(2));
    let out = run(&["generate", "--n", "4", "--phi", "notanangle"]);
    assert_eq!(out.status.code(), Some(2));
    let out = run(&[
        "scan",
        "--seq",
        sequences_dir().join("ucpg-n4-phi90.json").to_str().unwrap(),
        "--grid",
        "0x9",
    ]);
    assert_eq!(out.status.code(), Some(2));
}
