//! End-to-end checks of the `uqsd` binary: output contracts, exit codes,
//! config resolution, and determinism of emitted files.

use std::process::{Command, Output};

use serde_json::Value;

fn uqsd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_uqsd"))
        .args(args)
        .output()
        .expect("spawn uqsd")
}

fn stdout_str(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf-8 stdout")
}

fn stderr_str(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).expect("utf-8 stderr")
}

fn exit_code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn parse_json(out: &Output) -> Value {
    serde_json::from_str(&stdout_str(out)).expect("json stdout")
}

/// Every numeric cell carries exactly six decimal places.
fn assert_six_decimal_cells(csv: &str, columns: usize) {
    for (i, line) in csv.lines().enumerate().skip(1) {
        let cells: Vec<&str> = line.split(',').collect();
        assert_eq!(cells.len(), columns, "line {i}: {line}");
        for cell in &cells[1..] {
            let decimals = cell.split('.').nth(1).unwrap_or("");
            assert_eq!(decimals.len(), 6, "cell {cell} on line {i}");
        }
    }
}

#[test]
fn table_emits_the_documented_header_and_known_operating_points() {
    let out = uqsd(&["table", "--q1", "0.5", "--m-list", "0,1"]);
    assert_eq!(exit_code(&out), 0);
    let csv = stdout_str(&out);
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("m,kappa,p_in,p_b,p_c,p_s"));
    assert_eq!(
        lines.next(),
        Some("0,1.482569,0.812181,0.124824,0.062995,0.187819")
    );
    assert_eq!(
        lines.next(),
        Some("1,4.568523,0.735467,0.106051,0.158482,0.264533")
    );
    assert_eq!(lines.next(), None);
    assert_six_decimal_cells(&csv, 6);
}

#[test]
fn table_rejects_a_prior_outside_the_unit_interval() {
    let out = uqsd(&["table", "--q1", "1.5"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("prior"), "{}", stderr_str(&out));
}

#[test]
fn table_requires_a_prior() {
    let out = uqsd(&["table"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("--q1"));
}

#[test]
fn sweep_with_a_degenerate_range_emits_one_row() {
    let out = uqsd(&["sweep", "--q1", "0.5", "--m", "0", "--kappa-range", "2:2:0.5"]);
    assert_eq!(exit_code(&out), 0);
    let csv = stdout_str(&out);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "kappa,p_b,p_c,p_in,p_s");
    assert_eq!(lines.len(), 2);
    assert!(lines[1].starts_with("2.000000,"));
    assert_six_decimal_cells(&csv, 5);
}

#[test]
fn sweep_rejects_a_malformed_range() {
    for range in ["1:2", "1:2:x", "0:5:0.1", "5:1:0.1"] {
        let out = uqsd(&["sweep", "--q1", "0.5", "--m", "0", "--kappa-range", range]);
        assert_eq!(exit_code(&out), 2, "range {range:?}");
    }
}

#[test]
fn sweep_files_are_reproducible_and_carry_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("a.csv");
    let second = dir.path().join("b.csv");
    let args = |path: &std::path::Path| {
        vec![
            "sweep".to_string(),
            "--q1".to_string(),
            "0.5".to_string(),
            "--m".to_string(),
            "1".to_string(),
            "--kappa-range".to_string(),
            "4:5:0.25".to_string(),
            "--output".to_string(),
            path.display().to_string(),
        ]
    };
    let run = |path: &std::path::Path| {
        let arg_strings = args(path);
        let arg_refs: Vec<&str> = arg_strings.iter().map(String::as_str).collect();
        assert_eq!(exit_code(&uqsd(&arg_refs)), 0);
    };
    run(&first);
    run(&second);
    let data_a = std::fs::read(&first).unwrap();
    let data_b = std::fs::read(&second).unwrap();
    assert_eq!(data_a, data_b);

    let manifest_raw = std::fs::read_to_string(dir.path().join("a.csv.manifest.json")).unwrap();
    let manifest: Value = serde_json::from_str(&manifest_raw).unwrap();
    assert_eq!(manifest["command"], "sweep");
    assert_eq!(manifest["version"], env!("CARGO_PKG_VERSION"));
    assert_eq!(manifest["parameters"]["kappa_range"], "4:5:0.25");
    assert_eq!(manifest["parameters"]["m"], 1);
    assert!(manifest["tolerances"]["unitarity"].is_f64());
    assert!(manifest["timestamp"].is_string());
}

#[test]
fn simulate_is_deterministic_and_conserves_trials() {
    let args = [
        "simulate", "--m", "1", "--kappa", "4.5", "--trials", "20000", "--seed", "9",
    ];
    let first = uqsd(&args);
    let second = uqsd(&args);
    assert_eq!(exit_code(&first), 0);
    assert_eq!(first.stdout, second.stdout);

    let report = parse_json(&first);
    let mut total = 0u64;
    for prep in ["state1", "state2"] {
        for outcome in ["a", "b", "c"] {
            total += report["counts"][prep][outcome].as_u64().unwrap();
        }
    }
    assert_eq!(total, 20000);
    let prep_total = report["prep_counts"]["state1"].as_u64().unwrap()
        + report["prep_counts"]["state2"].as_u64().unwrap();
    assert_eq!(prep_total, 20000);
    assert_eq!(report["audit"]["pass"], true);
    assert_eq!(report["audit"]["b_given_state2"], 0);
    assert_eq!(report["audit"]["c_given_state1"], 0);
}

#[test]
fn simulate_accepts_a_single_trial() {
    let out = uqsd(&["simulate", "--m", "0", "--kappa", "1.5", "--trials", "1"]);
    assert_eq!(exit_code(&out), 0);
    let report = parse_json(&out);
    assert_eq!(report["parameters"]["trials"], 1);
}

#[test]
fn simulate_reports_a_failed_audit_without_failing_the_run() {
    let out = uqsd(&[
        "simulate", "--m", "1", "--kappa", "4.5", "--perturb-theta", "0.1", "--trials",
        "20000", "--seed", "3",
    ]);
    assert_eq!(exit_code(&out), 0);
    let report = parse_json(&out);
    assert_eq!(report["audit"]["pass"], false);
    assert!(report["audit"]["b_given_state2"].as_u64().unwrap() > 0);
}

#[test]
fn verify_passes_at_a_family_point() {
    let out = uqsd(&["verify", "--m", "1", "--kappa", "4.5"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    assert!(text.contains("result: PASS (7 checks)"), "{text}");
    assert!(text.contains("closed-form-agreement"));
}

#[test]
fn verify_passes_at_an_idle_free_point() {
    let out = uqsd(&["verify", "--theta", "0", "--alpha", "1"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout_str(&out).contains("result: PASS (5 checks)"));
}

#[test]
fn verify_flags_a_perturbed_phase_as_an_unambiguity_failure() {
    let out = uqsd(&[
        "verify", "--m", "1", "--kappa", "4.5", "--perturb-theta", "0.1",
    ]);
    assert_eq!(exit_code(&out), 1);
    let text = stdout_str(&out);
    assert!(text.contains("unambiguity            FAIL"), "{text}");
    assert!(text.contains("result: FAIL"));
}

#[test]
fn verify_json_reports_every_check_with_its_bound() {
    let out = uqsd(&["verify", "--m", "2", "--kappa", "7.5", "--format", "json"]);
    assert_eq!(exit_code(&out), 0);
    let report = parse_json(&out);
    assert_eq!(report["passed"], true);
    let checks = report["checks"].as_array().unwrap();
    assert_eq!(checks.len(), 7);
    for check in checks {
        assert_eq!(check["passed"], true);
        assert!(check["observed"].is_f64());
        assert!(check["bound"].is_f64());
    }
}

#[test]
fn verify_covers_the_standing_grid() {
    let out = uqsd(&["verify", "--all-grid"]);
    assert_eq!(exit_code(&out), 0);
    assert!(stdout_str(&out).contains("grid result: PASS (144 points, 1008 checks)"));
}

#[test]
fn kraus_prints_an_identity_element_when_nothing_evolves() {
    let out = uqsd(&["kraus", "--theta", "0", "--alpha", "1"]);
    assert_eq!(exit_code(&out), 0);
    let text = stdout_str(&out);
    let m_a = text.split("M_a =").nth(1).unwrap();
    assert!(m_a.contains("[ +1.000000+0.000000i  +0.000000+0.000000i  +0.000000+0.000000i ]"));
    assert!(!text.contains("sector-restricted"), "free route has no restriction");
}

#[test]
fn kraus_json_carries_the_restricted_block_at_a_family_point() {
    let out = uqsd(&[
        "kraus", "--m", "0", "--kappa", "1.4142135623730951", "--format", "json",
    ]);
    assert_eq!(exit_code(&out), 0);
    let report = parse_json(&out);
    for name in ["m_a", "m_b", "m_c"] {
        assert_eq!(report["kraus"][name]["rows"], 3);
        assert_eq!(report["kraus"][name]["cols"], 3);
    }
    let e_c = &report["effective"]["e_c"];
    let center = &e_c["entries"][1][1];
    assert!((center["re"].as_f64().unwrap() - 0.25).abs() < 1e-12);
    assert_eq!(center["im"].as_f64().unwrap(), 0.0);
    let weights = report["effective"]["dropped_two_weight"].as_array().unwrap();
    let total: f64 = weights.iter().map(|w| w.as_f64().unwrap()).sum();
    assert!((total - 1.0).abs() < 1e-12);
}

#[test]
fn config_values_fill_in_and_flags_override_them() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("run.conf");
    std::fs::write(&path, "q1 = 0.3\nm-list = 0\n# trailing comment\n").unwrap();
    let path_str = path.display().to_string();

    let from_config = uqsd(&["--config", &path_str, "table"]);
    assert_eq!(exit_code(&from_config), 0);
    assert!(stdout_str(&from_config).contains("0,1.515041,"));

    let overridden = uqsd(&["--config", &path_str, "table", "--q1", "0.5"]);
    assert_eq!(exit_code(&overridden), 0);
    assert!(stdout_str(&overridden).contains("0,1.482569,"));
}

#[test]
fn config_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.conf");
    std::fs::write(&path, "qq1 = 0.5\n").unwrap();
    let out = uqsd(&["--config", &path.display().to_string(), "table", "--q1", "0.5"]);
    assert_eq!(exit_code(&out), 2);
    assert!(stderr_str(&out).contains("unknown key"));
}

#[test]
fn baseline_reports_the_bound_gap_only_for_equal_priors() {
    let equal = uqsd(&["baseline", "--q1", "0.5", "--m", "1"]);
    assert_eq!(exit_code(&equal), 0);
    let text = stdout_str(&equal);
    assert!(text.contains("projective baseline p_s = 0.250000"));
    assert!(text.contains("advantage over baseline = 0.014533"));
    assert!(text.contains("gap below reference bound = 0.027467"));

    let skewed = uqsd(&["baseline", "--q1", "0.3"]);
    assert_eq!(exit_code(&skewed), 0);
    let text = stdout_str(&skewed);
    assert!(text.contains("projective baseline p_s = 0.350000"));
    assert!(!text.contains("reference bound"));
}

#[test]
fn usage_errors_exit_with_code_two() {
    assert_eq!(exit_code(&uqsd(&["table", "--q1", "0.5", "--bogus"])), 2);
    assert_eq!(exit_code(&uqsd(&["nonsense"])), 2);
    assert_eq!(exit_code(&uqsd(&["verify"])), 2);
    assert_eq!(exit_code(&uqsd(&["verify", "--m", "1", "--theta", "0.5"])), 2);
    assert_eq!(exit_code(&uqsd(&["simulate", "--m", "1", "--kappa", "4.5", "--trials", "0"])), 2);
}
