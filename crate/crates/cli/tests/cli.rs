use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn cfrank(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cfrank")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn construct_writes_params_and_certificates() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("a");
    let o = cfrank(&["construct", "--builder", "thm41", "--theta", "surd:-1,2,1", "--levels", "8", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(out.join("params.json").exists());
    assert!(out.join("certificates.json").exists());
}

#[test]
fn unknown_builder_is_a_usage_error() {
    let o = cfrank(&["construct", "--builder", "thm99", "--theta", "surd:-1,2,1"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn missing_subcommand_is_a_usage_error() {
    assert_eq!(code(&cfrank(&[])), 2);
}

#[test]
fn digit_cap_is_a_runtime_failure() {
    let dir = tempfile::tempdir().unwrap();
    let o = cfrank(&[
        "construct", "--builder", "thmB", "--theta", "surd:-1,5,2", "--levels", "12", "--digit-cap", "64", "--out",
        p(dir.path()),
    ]);
    assert_eq!(code(&o), 1);
    assert!(String::from_utf8_lossy(&o.stderr).contains("digit cap"));
}

#[test]
fn malformed_params_file_is_a_format_error() {
    let dir = tempfile::tempdir().unwrap();
    let f = dir.path().join("bad.json");
    fs::write(&f, "{\"h\": [").unwrap();
    let o = cfrank(&["verify", "--params", p(&f), "--theta", "surd:-1,5,2", "summability"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn torsion_on_zero_type_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c");
    let o = cfrank(&["construct", "--builder", "thmC", "--theta", "surd:-1,5,2", "--levels", "6", "--out", p(&out)]);
    assert_eq!(code(&o), 0);
    let o = cfrank(&[
        "verify",
        "--params",
        p(&out.join("params.json")),
        "--certificates",
        p(&out.join("certificates.json")),
        "torsion",
        "--p",
        "2",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["report"]["checks"][0]["verdict"], "pass");
}

#[test]
fn simulate_rigidity_and_empty_plan() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    assert_eq!(code(&cfrank(&["construct", "--builder", "thmB", "--theta", "surd:-1,5,2", "--levels", "7", "--out", p(&out)])), 0);
    let params = out.join("params.json");
    let certs = out.join("certificates.json");
    let o = cfrank(&["simulate", "--params", p(&params), "--certificates", p(&certs), "--rigidity"]);
    assert_eq!(code(&o), 0);
    let v: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    let rows = v["report"]["rigidity"].as_array().unwrap();
    assert_eq!(rows.len(), 5);
    assert!(rows.iter().all(|r| r["holds"] == true));
    let o = cfrank(&["simulate", "--params", p(&params), "--certificates", p(&certs)]);
    assert_eq!(code(&o), 0);
}

#[test]
fn report_is_byte_identical_on_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("exp.json");
    fs::write(
        &cfg,
        r#"{
  "theta": {"kind": "surd", "p": "-1", "d": "5", "q": "2"},
  "builder": "thmC",
  "build": {"levels": 4},
  "verify": {"checks": ["zerotype-shape", "torsion-obstruction"], "torsion_p": [2, 3], "replay": true},
  "simulate": {"decay": {"windows": [2], "extra": 8}, "eigen": {"samples": 50}, "correlations": [
     {"a": {"level": 1, "base": "0"}, "b": {"level": 1, "base": "0"}, "times": ["0", "5", "13"]}]},
  "seed": 3
}"#,
    )
    .unwrap();
    let run = |name: &str| {
        let out = dir.path().join(name);
        let o = cfrank(&["report", "--config", p(&cfg), "--out", p(&out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        out
    };
    let a = run("r1");
    let b = run("r2");
    for f in ["params.json", "certificates.json", "report.json", "correlation_0.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
    let csv = fs::read_to_string(a.join("correlation_0.csv")).unwrap();
    assert!(csv.starts_with("m,value_num,value_den,err_num,err_den\n"));
}

#[test]
fn verify_well_approximable_output() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w");
    let theta = format!("cf:{}", (0..=2000).map(|i| i.to_string()).collect::<Vec<_>>().join(","));
    let o = cfrank(&["construct", "--builder", "thm45", "--theta", &theta, "--levels", "2", "--out", p(&out)]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = cfrank(&[
        "verify",
        "--params",
        p(&out.join("params.json")),
        "--certificates",
        p(&out.join("certificates.json")),
        "--check",
        "summability,injectivity-arg",
        "--replay",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
}
