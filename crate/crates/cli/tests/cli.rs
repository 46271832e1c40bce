use assert_cmd::Command;
use predicates::prelude::*;

fn bin() -> Command {
    Command::cargo_bin("rqc-moments").unwrap()
}

#[test]
fn moments_d0_row_is_exact_one() {
    let out = bin()
        .args(["moments", "--n", "2", "--t", "1", "--d", "0", "--trials", "50", "--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let row = text.lines().find(|l| l.starts_with("2,0,1,")).unwrap();
    assert!(row.contains("2,0,1,1.0,0.0"), "{row}");
}

#[test]
fn identical_config_and_seed_give_identical_bytes() {
    let run = |workers: &str| {
        bin()
            .args([
                "moments", "--n", "3", "--t", "2", "--d", "20", "--trials", "100", "--seed",
                "42", "--workers", workers, "--format", "json",
            ])
            .output()
            .unwrap()
            .stdout
    };
    let a = run("1");
    let b = run("4");
    assert_eq!(a, b, "output must not depend on worker count");
    let c = run("1");
    assert_eq!(a, c);
}

#[test]
fn ideal_walk_exact_column_matches_closed_form() {
    let out = bin()
        .args(["ideal-walk", "--n", "1", "--t", "1", "--trials", "10", "--format", "csv"])
        .output()
        .unwrap();
    let text = String::from_utf8(out.stdout).unwrap();
    // m=3 row: exact = 1/2 + 2^-4 = 0.5625
    let row = text.lines().find(|l| l.starts_with("1,1,3,")).unwrap();
    assert!(row.contains("0.5625"), "{row}");
}

#[test]
fn config_file_is_used_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"n": 1, "t": 1, "trials": 10, "m_max": 2, "seed": 9}"#).unwrap();
    let from_cfg = bin()
        .args(["ideal-walk", "--config"])
        .arg(&cfg)
        .arg("--format")
        .arg("csv")
        .output()
        .unwrap();
    let text = String::from_utf8(from_cfg.stdout).unwrap();
    assert!(text.contains("\"m_max\":2") || text.contains("m_max\":2"), "{text}");
    // flag overrides the config seed
    let overridden = bin()
        .args(["ideal-walk", "--config"])
        .arg(&cfg)
        .args(["--seed", "11", "--format", "csv"])
        .output()
        .unwrap();
    let text2 = String::from_utf8(overridden.stdout).unwrap();
    assert!(text2.contains("# seed=11"), "{text2}");
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"n": 2, "frobnicate": 1}"#).unwrap();
    bin()
        .args(["spectrum", "--config"])
        .arg(&cfg)
        .assert()
        .code(2)
        .stderr(predicate::str::contains("frobnicate"));
}

#[test]
fn capacity_and_usage_exit_codes() {
    bin().args(["moments", "--n", "99"]).assert().code(3);
    bin().args(["spectrum", "--n", "4", "--t", "9"]).assert().code(3);
    bin().arg("not-a-command").assert().code(2);
    bin()
        .args(["bounds", "--formula", "thm1-state", "--delta", "0.9"])
        .assert()
        .code(2);
}

#[test]
fn spectrum_reports_gap_eigenvalue() {
    bin()
        .args(["spectrum", "--n", "2", "--t", "2"])
        .assert()
        .success()
        .stdout(predicate::str::contains("\"second\": 0.75"));
}

#[test]
fn f2mix_tv_below_bound_when_nonvacuous() {
    let out = bin()
        .args(["f2mix", "--n", "2", "--config"])
        .arg(write_cfg(r#"{"k_max": 60, "k_step": 5}"#))
        .args(["--format", "csv"])
        .output()
        .unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for line in text.lines().filter(|l| !l.starts_with('#') && !l.starts_with("n,")) {
        let cols: Vec<&str> = line.split(',').collect();
        let tv: f64 = cols[2].parse().unwrap();
        let bound: f64 = cols[3].parse().unwrap();
        if bound <= 1.0 {
            assert!(tv <= bound, "{line}");
        }
    }
}

fn write_cfg(contents: &str) -> std::path::PathBuf {
    let dir = std::env::temp_dir();
    let path = dir.join(format!("rqc-cfg-{}.json", std::process::id()));
    std::fs::write(&path, contents).unwrap();
    path
}
