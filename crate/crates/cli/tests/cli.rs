use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn dbar(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dbar")).args(args).output().expect("spawn dbar")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn configs() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "toml"))
        .collect();
    v.sort();
    v
}

#[test]
fn shipped_configs_succeed() {
    let configs = configs();
    assert!(configs.len() >= 9);
    for cfg in configs {
        let out = tempfile::tempdir().unwrap();
        let o = dbar(&["run", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0, "{}\n{}{}", cfg.display(), stdout(&o), stderr(&o));
        let report: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
        assert!(report["checks"].as_array().unwrap().iter().all(|c| c["pass"] == true), "{}", cfg.display());
    }
}

#[test]
fn malformed_expression_reports_position() {
    let o = dbar(&["divide", "--f", "mul(z", "--g", "z", "--power", "2", "--class", "C0"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("position 5"), "{}", stderr(&o));
}

#[test]
fn violated_inequality_is_a_module_error() {
    let o = dbar(&["divide", "--f", "mul(2,z)", "--g", "z", "--power", "2", "--class", "C0"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("|f| <= |g|"), "{}", stderr(&o));
}

#[test]
fn unmet_expectation_exits_three() {
    let o = dbar(&["lconn", "--z0", "1,0", "--expect", "growing"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("[FAIL] verdict"), "{}", stdout(&o));
}

#[test]
fn faa_prints_the_table() {
    let o = dbar(&["faa", "--n", "3"]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    let table: Vec<&str> = s.lines().take(4).collect();
    assert_eq!(table, ["k,coefficient", "(3),1", "\"(2,1)\",3", "\"(1,1,1)\",1"]);
}

#[test]
fn outputs_are_deterministic() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/cauchy_disk.toml");
    let run = || {
        let out = tempfile::tempdir().unwrap();
        let o = dbar(&["run", "--config", cfg.to_str().unwrap(), "--out", out.path().to_str().unwrap()]);
        assert_eq!(code(&o), 0);
        ["verification.csv", "transform.csv", "report.json"].map(|f| std::fs::read(out.path().join(f)).unwrap())
    };
    assert_eq!(run(), run());
}

#[test]
fn sequential_and_parallel_agree() {
    let run = |threads: &str| {
        let out = tempfile::tempdir().unwrap();
        let o = dbar(&[
            "--threads",
            threads,
            "--out",
            out.path().to_str().unwrap(),
            "cauchy",
            "--f",
            "mul(z,zbar)",
            "--h",
            "1/32",
        ]);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        let text = std::fs::read_to_string(out.path().join("verification.csv")).unwrap();
        text.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse::<f64>().unwrap()
    };
    let (s, p) = (run("1"), run("4"));
    assert!((s - p).abs() <= 1e-12, "{s} vs {p}");
}

#[test]
fn levels_flag_builds_a_dyadic_ladder() {
    let out = tempfile::tempdir().unwrap();
    let o = dbar(&["--levels", "3", "--out", out.path().to_str().unwrap(), "cauchy", "--f", "zbar", "--h", "1/16"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.path().join("report.json")).unwrap()).unwrap();
    let hs: Vec<f64> = report["levels"].as_array().unwrap().iter().map(|l| l["h"].as_f64().unwrap()).collect();
    assert_eq!(hs, [1.0 / 16.0, 1.0 / 32.0, 1.0 / 64.0]);
    assert!(report["slopes"]["max_dev"].is_string());
}

#[test]
fn two_level_study_is_rejected() {
    let o = dbar(&["cauchy", "--f", "zbar", "--h", "1/16,1/32"]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("at least 3 levels"), "{}", stderr(&o));
}

#[test]
fn config_command_must_match() {
    let cfg = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/faa.toml");
    let o = dbar(&["cauchy", "--config", cfg.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
}

#[test]
fn unknown_config_keys_are_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.toml");
    std::fs::write(&p, "command = \"faa\"\n[faa]\norder = 3\n").unwrap();
    let o = dbar(&["run", "--config", p.to_str().unwrap()]);
    assert_eq!(code(&o), 1);
    assert!(stderr(&o).contains("order"), "{}", stderr(&o));
}
