//! End-to-end checks of the binary: output formats, exit codes, and
//! byte-level determinism.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apcharge"))
        .args(args)
        .env_remove("APCHARGE_THREADS")
        .output()
        .expect("binary runs")
}

#[test]
fn norm_besicovitch_example() {
    let out = run(&["norm", "--poly", "1,0@1;1,0@-1", "--space", "b", "--q", "2"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "1.41421356237\n");
}

#[test]
fn gamma_example() {
    let out = run(&["gamma", "--set", "period=2;trace=[0,1)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8_lossy(&out.stdout), "0.5\n");
}

#[test]
fn verify_report_schema_and_exit() {
    let out = run(&[
        "verify", "--ineq", "hausdorff_young", "--q", "2", "--trials", "50", "--seed", "7",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("valid JSON");
    assert_eq!(report["name"], "hausdorff_young");
    assert_eq!(report["violations"], 0);
    assert_eq!(report["base_seed"], 7);
    assert_eq!(report["trials"], 50);
    for key in ["params", "skipped", "max_ratio", "mean_ratio", "empirical_constant", "note"] {
        assert!(report.get(key).is_some(), "missing {key}");
    }
    assert!(report["params"].get("q_prime").is_some());
}

#[test]
fn verify_csv_format() {
    let out = run(&[
        "verify", "--ineq", "paley", "--q", "1.5", "--trials", "10", "--seed", "3", "--format",
        "csv",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("seed,lhs,rhs,ratio,residual"));
    assert!(lines.count() <= 10);
}

#[test]
fn campaign_from_config_file() {
    let dir = std::env::temp_dir();
    let path = dir.join(format!("apcharge-config-{}.json", std::process::id()));
    std::fs::write(
        &path,
        r#"{"inequality":"bessel","q":2.0,"trials":15,"base_seed":5,"n_terms":4}"#,
    )
    .unwrap();
    let out = run(&["campaign", "--config", path.to_str().unwrap()]);
    std::fs::remove_file(&path).ok();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(report["name"], "bessel");
    assert_eq!(report["trials"], 15);
    assert_eq!(report["violations"], 0);
}

#[test]
fn coeffs_text_and_json() {
    let out = run(&["coeffs", "--poly", "3,0@1.5;0,2@-2"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8_lossy(&out.stdout);
    assert_eq!(text.lines().count(), 2);

    let out = run(&["coeffs", "--poly", "3,0@1.5", "--eta", "1.5", "--format", "json"]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["coefficients"][0]["re"], 3.0);
}

#[test]
fn embed_demo_reports_isometry() {
    let out = run(&["embed-demo"]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let entries: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let entries = entries.as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for entry in entries {
        for row in entry["report"]["rows"].as_array().unwrap() {
            let disc = row["discrepancy"].as_f64().unwrap();
            let residual = row["residual"].as_f64().unwrap();
            assert!(disc <= residual + 1e-9, "{entry}");
        }
    }
}

#[test]
fn usage_errors_exit_2() {
    let out = run(&["norm", "--poly", "not-a-poly", "--space", "b", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(!out.stderr.is_empty());

    let out = run(&["norm", "--poly", "1,0@1", "--space", "lorentz", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2), "lorentz without --p is a usage error");

    let out = run(&["verify", "--ineq", "no_such_inequality", "--q", "2"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));

    let out = run(&["gamma", "--set", "period=1;trace=[0,1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn numeric_contract_errors_exit_3() {
    // two stored frequencies 2e-12 apart: a query between them is ambiguous
    let out = run(&[
        "coeffs",
        "--poly",
        "1,0@1;1,0@1.000000000002",
        "--eta",
        "1.000000000001",
    ]);
    assert_eq!(out.status.code(), Some(3), "{}", String::from_utf8_lossy(&out.stderr));
    assert!(String::from_utf8_lossy(&out.stderr).contains("merge tolerance"));
}

#[test]
fn documented_invocations_are_deterministic() {
    let cases: Vec<Vec<&str>> = vec![
        vec!["norm", "--poly", "1,0@1;1,0@-1", "--space", "b", "--q", "2"],
        vec!["norm", "--poly", "1,0@1;1,0@-1", "--space", "lorentz", "--p", "2", "--q", "2"],
        vec!["gamma", "--set", "period=2;trace=[0,1)"],
        vec!["coeffs", "--poly", "1,0@1;1,0@-1"],
        vec![
            "verify", "--ineq", "hausdorff_young", "--q", "2", "--trials", "100", "--seed", "7",
        ],
        vec!["embed-demo"],
    ];
    for args in cases {
        let first = run(&args);
        let second = run(&args);
        assert_eq!(first.status.code(), second.status.code(), "{args:?}");
        assert_eq!(first.stdout, second.stdout, "non-deterministic output for {args:?}");
        assert_eq!(first.status.code(), Some(0), "{args:?}");
    }
}
