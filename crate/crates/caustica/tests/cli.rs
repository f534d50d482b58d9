//! Black-box tests of the `caustica` binary: exit codes, output formats,
//! config-file precedence, and CSV determinism.

use std::process::{Command, Output};

fn caustica(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_caustica"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let out = caustica(&["string", "--no-such-flag"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn unknown_subcommand_is_a_usage_error() {
    let out = caustica(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn missing_required_option_is_a_usage_error() {
    let out = caustica(&["string", "--curve", "circle:r=1"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("--p"), "error should name the missing option: {err}");
}

#[test]
fn malformed_curve_spec_is_a_usage_error() {
    let out = caustica(&["string", "--curve", "pentagon:n=5", "--p", "0.1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn passing_check_exits_zero_with_json_summary() {
    let out = caustica(&[
        "incidence",
        "--curve",
        "ellipse:a=2,b=1",
        "--params",
        "0.3,1.1,2.0",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let json_line = text
        .lines()
        .find(|l| l.starts_with('{'))
        .expect("summary JSON line");
    let v: serde_json::Value = serde_json::from_str(json_line).expect("valid JSON");
    for key in ["quantity", "value", "tolerance", "pass"] {
        assert!(v.get(key).is_some(), "summary is missing {key}");
    }
    assert_eq!(v["pass"], serde_json::Value::Bool(true));
}

#[test]
fn failing_check_exits_one() {
    // The quartic oval does not admit an invariant string parameter, so the
    // translation check must fail.
    let out = caustica(&[
        "poritsky-check",
        "--curve",
        "quartic",
        "--p",
        "1e-3",
        "--samples",
        "30",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("\"pass\":false"), "summary should record the failure: {text}");
}

#[test]
fn csv_has_schema_header_and_is_deterministic() {
    let dir = std::env::temp_dir();
    let p1 = dir.join("caustica_cli_det_1.csv");
    let p2 = dir.join("caustica_cli_det_2.csv");
    for p in [&p1, &p2] {
        let out = caustica(&[
            "string",
            "--curve",
            "ellipse:a=2,b=1",
            "--p",
            "0.3",
            "--anchors",
            "8",
            "--out",
            p.to_str().unwrap(),
        ]);
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(&p1).unwrap();
    let b = std::fs::read(&p2).unwrap();
    assert!(!a.is_empty());
    assert_eq!(a, b, "identical invocations must produce byte-identical CSV");
    let text = String::from_utf8(a).unwrap();
    assert!(
        text.starts_with("# schema: "),
        "CSV must start with a schema comment, got: {}",
        text.lines().next().unwrap_or("")
    );
    let _ = std::fs::remove_file(p1);
    let _ = std::fs::remove_file(p2);
}

#[test]
fn config_file_supplies_options_and_flags_win() {
    let dir = std::env::temp_dir();
    let cfg = dir.join("caustica_cli_cfg.ini");
    std::fs::write(&cfg, "curve = circle:r=1\np = 0.2\nanchors = 6\n").unwrap();
    let csv_a = dir.join("caustica_cli_cfg_a.csv");
    let csv_b = dir.join("caustica_cli_cfg_b.csv");

    // All options from the config file.
    let out = caustica(&[
        "string",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        csv_a.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    // The --anchors flag overrides the config value, changing the row count.
    let out = caustica(&[
        "string",
        "--config",
        cfg.to_str().unwrap(),
        "--anchors",
        "10",
        "--out",
        csv_b.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let rows = |p: &std::path::Path| {
        std::fs::read_to_string(p)
            .unwrap()
            .lines()
            .filter(|l| !l.starts_with('#'))
            .count()
    };
    assert_eq!(rows(&csv_a), 6);
    assert_eq!(rows(&csv_b), 10);
    for p in [cfg, csv_a, csv_b] {
        let _ = std::fs::remove_file(p);
    }
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = std::env::temp_dir();
    let cfg = dir.join("caustica_cli_badkey.ini");
    std::fs::write(&cfg, "frobnication = 7\n").unwrap();
    let out = caustica(&[
        "string",
        "--config",
        cfg.to_str().unwrap(),
        "--curve",
        "circle:r=1",
        "--p",
        "0.1",
    ]);
    assert_eq!(out.status.code(), Some(2));
    let _ = std::fs::remove_file(cfg);
}

#[test]
fn ceva_subcommand_accepts_point_lists() {
    let out = caustica(&[
        "ceva",
        "--surface",
        "euclidean",
        "--triangle",
        "0,0;2,0;0.5,1.5",
        "--feet",
        "1.25,0.75;0.25,0.75;1,0",
    ]);
    assert_eq!(out.status.code(), Some(0), "medians must be concurrent");
}

#[test]
fn thread_cap_env_var_is_accepted() {
    let out = Command::new(env!("CARGO_BIN_EXE_caustica"))
        .env("CAUSTICA_THREADS", "1")
        .args(["incidence", "--curve", "ellipse:a=2,b=1", "--params", "0.3,1.1,2.0"])
        .output()
        .expect("binary runs");
    assert_eq!(out.status.code(), Some(0));
}
