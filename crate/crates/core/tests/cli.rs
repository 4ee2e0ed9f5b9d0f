use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data").join(name)
}

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_banach-limits"));
    cmd.env_remove("BANACH_LIMITS_CAP_DIM");
    cmd
}

fn run(args: &[&str], file: &str) -> Output {
    bin().args(args).arg(data(file)).output().unwrap()
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).unwrap()
}

#[test]
fn exit_codes_per_example() {
    let cases = [
        ("validate", "l1_drop.json", 0),
        ("validate", "linf_pad.json", 0),
        ("validate", "random_quotient.json", 0),
        ("validate", "explicit.json", 0),
        ("validate", "corrupted_bond.json", 1),
        ("dualize", "l1_drop.json", 0),
        ("norms", "space.json", 0),
        ("opnorm", "map.json", 0),
        ("quotient-check", "map.json", 0),
        ("determine", "c0_query.json", 1),
        ("determine", "line_query.json", 0),
        ("determine", "l1_query.json", 0),
        ("gfda-check", "gfda_renorm.json", 1),
        ("anp-dp", "anp_dp_c0.json", 0),
    ];
    for (cmd, file, code) in cases {
        let out = run(&[cmd], file);
        assert_eq!(out.status.code(), Some(code), "{cmd} {file}: {}", String::from_utf8_lossy(&out.stderr));
        let report = stdout_json(&out);
        if cmd != "dualize" {
            assert_eq!(report["manifest"]["command"], cmd);
        }
    }
}

#[test]
fn determine_reports_verdicts() {
    let c0 = stdout_json(&run(&["determine"], "c0_query.json"));
    assert_eq!(c0["result"]["verdict"], "counterexample");
    let line = stdout_json(&run(&["determine"], "line_query.json"));
    assert_eq!(line["result"]["verdict"], "certificate");
}

#[test]
fn corrupted_bond_names_the_stage() {
    let report = stdout_json(&run(&["validate"], "corrupted_bond.json"));
    let failing: Vec<u64> = report["result"]["stages"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|s| s["pass"] == false)
        .map(|s| s["stage"].as_u64().unwrap())
        .collect();
    assert_eq!(failing, vec![2]);
}

#[test]
fn parse_errors_exit_3_with_location() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, "{\n  \"kind\": \"inverse\",\n  \"builtin\": \n").unwrap();
    let out = bin().arg("validate").arg(&bad).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("line"), "{err}");
}

#[test]
fn missing_input_exits_3() {
    let out = bin().args(["validate", "/nonexistent/system.json"]).output().unwrap();
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn identical_invocations_give_identical_reports() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let mut reports = Vec::new();
    for _ in 0..2 {
        let status = bin()
            .args(["--seed", "5", "--out"])
            .arg(&out)
            .arg("determine")
            .arg(data("c0_query.json"))
            .status()
            .unwrap();
        assert_eq!(status.code(), Some(1));
        reports.push(std::fs::read(&out).unwrap());
    }
    assert_eq!(reports[0], reports[1]);
    let report: serde_json::Value = serde_json::from_slice(&reports[0]).unwrap();
    assert_eq!(report["manifest"]["seed"], 5);
}

#[test]
fn double_dualize_is_identity() {
    let dir = tempfile::tempdir().unwrap();
    for file in ["l1_drop.json", "linf_pad.json", "random_quotient.json", "explicit.json"] {
        let mut outputs = Vec::new();
        let mut input = data(file);
        for step in 0..4 {
            let out = bin().arg("dualize").arg(&input).output().unwrap();
            assert!(out.status.success(), "{file}: {}", String::from_utf8_lossy(&out.stderr));
            input = dir.path().join(format!("{step}-{file}"));
            std::fs::write(&input, &out.stdout).unwrap();
            outputs.push(out.stdout);
        }
        assert_ne!(outputs[0], outputs[1], "{file}");
        assert_eq!(outputs[0], outputs[2], "{file}");
        assert_eq!(outputs[1], outputs[3], "{file}");
    }
}

#[test]
fn curves_writes_csv() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("curves.json");
    let status = bin().arg("--out").arg(&out).arg("curves").arg(data("curves.json")).status().unwrap();
    assert_eq!(status.code(), Some(0));
    let csv = std::fs::read_to_string(out.with_extension("csv")).unwrap();
    let mut lines = csv.lines();
    assert!(lines.next().unwrap().contains(','));
    assert!(lines.count() > 0);
}

#[test]
fn cap_dim_env_override() {
    let default = run(&["determine"], "l1_query.json");
    assert_eq!(default.status.code(), Some(0));
    let capped = bin()
        .env("BANACH_LIMITS_CAP_DIM", "1")
        .arg("determine")
        .arg(data("l1_query.json"))
        .output()
        .unwrap();
    assert_eq!(capped.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&capped.stderr).contains("cap 1"));
}

#[test]
fn max_stage_flag_overrides_eval_stage() {
    let report = stdout_json(&run(&["--max-stage", "15", "determine"], "c0_query.json"));
    assert_eq!(report["result"]["eval_stage"], 15);
}
