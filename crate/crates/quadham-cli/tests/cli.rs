//! End-to-end tests of the `quadham` binary: exit codes, file schemas,
//! byte determinism and the worked examples.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_quadham"))
}

fn write(dir: &Path, name: &str, contents: &str) -> std::path::PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, contents).unwrap();
    path
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn read(path: &Path) -> String {
    std::fs::read_to_string(path).unwrap_or_else(|e| panic!("read {}: {e}", path.display()))
}

/// Parses a frequencies.csv into (index, omega_sq) pairs.
fn parse_omega_sq(csv: &str) -> Vec<f64> {
    csv.lines()
        .filter(|l| !l.starts_with('#') && !l.starts_with("index") && !l.is_empty())
        .map(|l| l.split(',').nth(3).unwrap().parse::<f64>().unwrap())
        .collect()
}

const TWO_BODY: &str = r#"{"n": 2, "masses": [1.0, 1.0], "phi": [[2.0, 1.0], [1.0, 2.0]]}"#;
const TRIDIAG3: &str =
    r#"{"n": 3, "masses": [1.0, 1.0, 1.0], "phi": [[2.0, 1.0, 0.0], [1.0, 2.0, 1.0], [0.0, 1.0, 2.0]]}"#;
const CHAIN4: &str = r#"{"chain": {"n": 4, "m": 1.0, "d1": 1.0, "d12": 1.0}}"#;

#[test]
fn diagonalize_two_body_worked_example() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", TWO_BODY);
    let out = tmp.path().join("out");
    let res = run(&[
        "diagonalize",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "two_body",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success(), "stderr: {}", String::from_utf8_lossy(&res.stderr));
    let mut w = parse_omega_sq(&read(&out.join("frequencies.csv")));
    w.sort_by(f64::total_cmp);
    assert!((w[0] - 1.0).abs() <= 1e-12 && (w[1] - 3.0).abs() <= 1e-12);
    let seq = read(&out.join("sequence.json"));
    assert!(seq.contains("\"alpha\": -1.0000000000000000e0"));
    assert!(seq.contains("\"beta\": 5.0000000000000000e-1"));
    let resid = read(&out.join("residuals.json"));
    assert!(resid.contains("\"converged\": true"));
}

#[test]
fn diagonalize_all_oracle_and_sweep_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", TRIDIAG3);
    let out = tmp.path().join("out");
    let res = run(&[
        "diagonalize",
        "--input",
        input.to_str().unwrap(),
        "--method",
        "all",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let mut oracle = parse_omega_sq(&read(&out.join("oracle/frequencies.csv")));
    let mut sweep = parse_omega_sq(&read(&out.join("sweep/frequencies.csv")));
    let three = parse_omega_sq(&read(&out.join("three_body/frequencies.csv")));
    oracle.sort_by(f64::total_cmp);
    sweep.sort_by(f64::total_cmp);
    let mut three = three;
    three.sort_by(f64::total_cmp);
    for ((a, b), c) in oracle.iter().zip(sweep.iter()).zip(three.iter()) {
        assert!((a - b).abs() <= 1e-8);
        assert!((a - c).abs() <= 1e-8);
    }
}

#[test]
fn odd_bravais_chain_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", r#"{"chain": {"n": 5, "m": 1.0, "d1": 1.0, "d12": 1.0}}"#);
    let res = run(&["diagonalize", "--input", input.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("even particle count"));
}

#[test]
fn unknown_fields_are_rejected_with_diagnostics() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(
        tmp.path(),
        "h.json",
        r#"{"n": 1, "masses": [1.0], "phi": [[1.0]], "bogus": true}"#,
    );
    let res = run(&["diagonalize", "--input", input.to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("bogus"));
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", CHAIN4);
    let (a, b) = (tmp.path().join("a"), tmp.path().join("b"));
    for out in [&a, &b] {
        let res = run(&[
            "diagonalize",
            "--input",
            input.to_str().unwrap(),
            "--method",
            "all",
            "--out",
            out.to_str().unwrap(),
        ]);
        assert_eq!(res.status.code(), Some(2)); // bravais row honestly non-converged
    }
    for rel in [
        "oracle/frequencies.csv",
        "sweep/frequencies.csv",
        "sweep/sequence.json",
        "sweep/residuals.json",
        "bravais/frequencies.csv",
        "bravais/sequence.json",
    ] {
        assert_eq!(read(&a.join(rel)), read(&b.join(rel)), "{rel} differs between runs");
    }
    // Provenance is embedded.
    let csv = read(&a.join("sweep/frequencies.csv"));
    assert!(csv.starts_with("# quadham "));
    assert!(csv.contains("# config_hash="));
}

#[test]
fn compare_n2_chain_all_methods_agree() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", r#"{"chain": {"n": 2, "m": 1.0, "d1": 1.0, "d12": 1.0}}"#);
    let out = tmp.path().join("out");
    let res = run(&["compare", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let csv = read(&out.join("compare.csv"));
    for line in csv.lines().filter(|l| l.starts_with("diff,")) {
        let val: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!(val <= 1e-10, "difference too large in: {line}");
    }
}

#[test]
fn compare_n4_chain_records_two_frequency_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", CHAIN4);
    let out = tmp.path().join("out");
    let res = run(&["compare", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success(), "informational rows must not fail the run");
    let csv = read(&out.join("compare.csv"));
    let diff_value = |a: &str, b: &str, q: &str| -> f64 {
        csv.lines()
            .find(|l| l.starts_with(&format!("diff,{a},{b},{q}")))
            .and_then(|l| l.split(',').nth(5))
            .unwrap()
            .parse()
            .unwrap()
    };
    assert!(diff_value("oracle", "sweep", "zpe_abs_diff") <= 1e-8);
    let gap = diff_value("bravais_closed_form", "toeplitz_closed_form", "zpe_abs_diff");
    assert!(gap > 1e-2, "two-frequency gap should be recorded, got {gap}");
    assert!(csv.contains("converged,bravais_closed_form,,converged,,false"));
}

#[test]
fn compare_decoupled_instance_gives_site_frequencies() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(
        tmp.path(),
        "h.json",
        r#"{"n": 3, "masses": [1.0, 2.0, 4.0], "phi": [[2.0, 0.0, 0.0], [0.0, 4.0, 0.0], [0.0, 0.0, 8.0]]}"#,
    );
    let out = tmp.path().join("out");
    let res = run(&["compare", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let csv = read(&out.join("compare.csv"));
    // omega_sq = phi_ii/m_i = 2 on every site for both methods.
    for line in csv.lines().filter(|l| l.starts_with("frequency,")) {
        let val: f64 = line.split(',').nth(5).unwrap().parse().unwrap();
        assert!((val - 2.0).abs() <= 1e-12, "line: {line}");
    }
}

#[test]
fn groundstate_single_oscillator() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", r#"{"n": 1, "hbar": 2.0, "masses": [2.0], "phi": [[8.0]]}"#);
    let out = tmp.path().join("out");
    let res = run(&["groundstate", "--input", input.to_str().unwrap(), "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let state = read(&out.join("state.json"));
    let v: serde_json::Value = serde_json::from_str(&state).unwrap();
    // omega = sqrt(phi11/m) = 2, B = m*omega/hbar = 2, E0 = hbar*omega/2 = 2.
    assert!((v["b_diagonal"][0].as_f64().unwrap() - 2.0).abs() <= 1e-12);
    assert!((v["e0"].as_f64().unwrap() - 2.0).abs() <= 1e-12);
    assert_eq!(v["residual"].as_f64().unwrap(), 0.0);
}

#[test]
fn groundstate_two_body_records_residual() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", TWO_BODY);
    let out = tmp.path().join("out");
    let res = run(&["groundstate", "--input", input.to_str().unwrap(), "--method", "two_body", "--out", out.to_str().unwrap()]);
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_str(&read(&out.join("state.json"))).unwrap();
    assert!(v["residual"].as_f64().unwrap() <= 1e-10);
    let e0 = v["e0"].as_f64().unwrap();
    let zpe = v["zpe_oracle"].as_f64().unwrap();
    assert!((e0 - zpe).abs() <= 1e-12);
    assert!((e0 - 0.5 * (1.0 + 3.0f64.sqrt())).abs() <= 1e-12);
}

#[test]
fn groundstate_unstable_exits_one_listing_frequencies() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", r#"{"n": 2, "masses": [1.0, 1.0], "phi": [[1.0, 3.0], [3.0, 1.0]]}"#);
    let res = run(&["groundstate", "--input", input.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(res.status.code(), Some(1));
    let err = String::from_utf8_lossy(&res.stderr);
    assert!(err.contains("unstable") && err.contains("-2"), "stderr: {err}");
}

#[test]
fn exhausted_budget_exits_two_with_results() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", CHAIN4);
    let out = tmp.path().join("out");
    let res = run(&[
        "diagonalize",
        "--input",
        input.to_str().unwrap(),
        "--max-sweeps",
        "0",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(res.status.code(), Some(2));
    assert!(read(&out.join("residuals.json")).contains("\"converged\": false"));
    assert!(out.join("frequencies.csv").exists());
}

#[test]
fn json_format_emits_valid_documents() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", TRIDIAG3);
    let out = tmp.path().join("out");
    let res = run(&[
        "diagonalize",
        "--input",
        input.to_str().unwrap(),
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    let v: serde_json::Value = serde_json::from_str(&read(&out.join("frequencies.json"))).unwrap();
    assert_eq!(v["rows"].as_array().unwrap().len(), 3);
    let seq: serde_json::Value = serde_json::from_str(&read(&out.join("sequence.json"))).unwrap();
    // 1-based particle indices in serialized steps.
    for step in seq["steps"].as_array().unwrap() {
        let i = step["i"].as_u64().unwrap();
        let j = step["j"].as_u64().unwrap();
        assert!(i >= 1 && j >= 1 && i <= 3 && j <= 3 && i != j);
    }
}

#[test]
fn batch_mode_writes_per_input_directories() {
    let tmp = tempfile::tempdir().unwrap();
    let a = write(tmp.path(), "alpha.json", TWO_BODY);
    let b = write(tmp.path(), "beta.json", CHAIN4);
    let out = tmp.path().join("out");
    let res = run(&[
        "diagonalize",
        "--input",
        a.to_str().unwrap(),
        "--input",
        b.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(res.status.success());
    assert!(out.join("alpha/frequencies.csv").exists());
    assert!(out.join("beta/frequencies.csv").exists());
}

#[test]
fn pairs_chain_rejects_coupled_neighbours() {
    let tmp = tempfile::tempdir().unwrap();
    let input = write(tmp.path(), "h.json", CHAIN4);
    let res = run(&["diagonalize", "--input", input.to_str().unwrap(), "--method", "pairs_chain"]);
    assert_eq!(res.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&res.stderr).contains("not pair-decoupled"));
}
