use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_trotterlens"))
        .args(args)
        .output()
        .unwrap()
}

fn bundled(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs").join(name)
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("cfg.json");
    fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_string()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn sweep_writes_csv_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cfg = bundled("smoke.json");
    let o = run(&[
        "sweep",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(out.join("smoke.csv")).unwrap();
    assert!(csv.starts_with("t,empirical,interference_pf1,general,triangle\n"));
    assert_eq!(csv.lines().count(), 6);
    assert!(out.join("smoke.gp").exists());
    assert!(stdout(&o).contains("fit empirical: slope"));
}

#[test]
fn steps_and_inspection_commands() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = bundled("smoke.json");
    let cfg = cfg.to_str().unwrap();
    let out = dir.path().to_str().unwrap();

    let o = run(&["steps", "--config", cfg, "--out", out]);
    assert!(o.status.success());
    let csv = fs::read_to_string(dir.path().join("smoke_steps.csv")).unwrap();
    assert!(csv.starts_with("n,empirical,interference,triangle\n"));

    let o = run(&["model", "show", "--config", cfg]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("group 1:"));

    let o = run(&["check", "--config", cfg]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("orthogonal true"));

    let o = run(&["bounds", "--config", cfg]);
    assert!(o.status.success());
    let rep: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let empirical = rep["empirical"].as_f64().unwrap();
    for b in rep["bounds"].as_array().unwrap() {
        assert!(b[1].as_f64().unwrap() >= empirical - 1e-10, "{b}");
    }
}

#[test]
fn configuration_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(run(&["sweep", "--config", "/nonexistent.json"]).status.code(), Some(2));

    let cfg = write_config(dir.path(), "{ not json");
    assert_eq!(run(&["sweep", "--config", &cfg]).status.code(), Some(2));

    let cfg = write_config(
        dir.path(),
        r#"{"name":"x","model":{"model":"power_law","n":4,"couplings":{"alpha":-1}},
        "sweep":{"variable":"time","grid":[1,2],"r":10}}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(
        run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let ext = bundled("fig3_extended.json");
    let o = run(&["steps", "--config", ext.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("--extended"));
}

#[test]
fn oversized_model_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"name":"big","model":{"model":"tfi","n":16,"couplings":{"h":1}},
        "sweep":{"variable":"time","grid":[1,2],"r":10}}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(
        run(&["sweep", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(3)
    );
}

#[test]
fn exhausted_search_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"name":"cap","model":{"model":"tfi","n":3,"couplings":{"h":1}},
        "steps":{"sizes":[3,4],"t":5,"epsilon_target":1e-9,"methods":["triangle"],"r_max":16}}"#,
    );
    let out = dir.path().join("o");
    assert_eq!(
        run(&["steps", "--config", &cfg, "--out", out.to_str().unwrap()])
            .status
            .code(),
        Some(4)
    );
}
