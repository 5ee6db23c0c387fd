use std::path::Path;
use std::process::Command;

const BIN: &str = env!("CARGO_BIN_EXE_pwcalc");

fn write_config(dir: &Path, name: &str, json: &str) -> std::path::PathBuf {
    let p = dir.join(name);
    std::fs::write(&p, json).unwrap();
    p
}

fn pwcalc(args: &[&str]) -> std::process::Output {
    Command::new(BIN).args(args).env("PWCALC_THREADS", "1").output().unwrap()
}

const SANDWICH: &str = r#"{"experiment":"sandwich","generator":{"kind":"wiener","horizon":1.0,"step":0.001},"ensemble_size":4,"m_range":[3,5],"seed":3}"#;

#[test]
fn runs_are_reproducible_and_write_all_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sandwich.json", SANDWICH);
    let (a, b) = (dir.path().join("a"), dir.path().join("b"));
    for out in [&a, &b] {
        let o = pwcalc(&["sandwich", "--config", cfg.to_str().unwrap(), "--out", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).contains("[PASS] acceptance:sandwich"));
    }
    for f in ["report.json", "metadata.json", "sandwich.csv"] {
        assert!(a.join(f).exists(), "missing {f}");
    }
    assert_eq!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(b.join("report.json")).unwrap());
    assert_eq!(std::fs::read(a.join("sandwich.csv")).unwrap(), std::fs::read(b.join("sandwich.csv")).unwrap());

    let c = dir.path().join("c");
    let o = pwcalc(&["sandwich", "--config", cfg.to_str().unwrap(), "--out", c.to_str().unwrap(), "--seed", "4"]);
    assert!(o.status.success());
    assert_ne!(std::fs::read(a.join("report.json")).unwrap(), std::fs::read(c.join("report.json")).unwrap());
}

#[test]
fn configuration_errors_exit_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "sandwich.json", SANDWICH);
    let o = pwcalc(&["qv-converge", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let bad = write_config(dir.path(), "bad.json", &SANDWICH.replace("\"seed\"", "\"sede\""));
    assert_eq!(pwcalc(&["sandwich", "--config", bad.to_str().unwrap()]).status.code(), Some(2));
    let invalid = write_config(dir.path(), "invalid.json", &SANDWICH.replace("[3,5]", "[2,5]"));
    assert_eq!(pwcalc(&["sandwich", "--config", invalid.to_str().unwrap()]).status.code(), Some(2));
    let missing = dir.path().join("missing.json");
    assert_eq!(pwcalc(&["sandwich", "--config", missing.to_str().unwrap()]).status.code(), Some(2));
    assert_ne!(pwcalc(&["bogus", "--config", cfg.to_str().unwrap()]).status.code(), Some(0));
}

#[test]
fn statistical_failures_only_fail_under_strict_mc() {
    // A coarse sampling step biases the fine-grid QV far below 1.
    let json = r#"{"experiment":"qv-converge","generator":{"kind":"wiener","horizon":1.0,"step":0.00390625},"ensemble_size":8,"m_range":[6,9],"seed":1}"#;
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "qv.json", json);
    let lax = pwcalc(&["qv-converge", "--config", cfg.to_str().unwrap()]);
    assert!(String::from_utf8_lossy(&lax.stdout).contains("[FAIL] acceptance:qv-mean"));
    assert_eq!(lax.status.code(), Some(0));
    let strict = pwcalc(&["qv-converge", "--config", cfg.to_str().unwrap(), "--strict-mc"]);
    assert_eq!(strict.status.code(), Some(1));
}
