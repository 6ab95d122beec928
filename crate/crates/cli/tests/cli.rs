use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn dgm(args: &[&str], cwd: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_dgm"))
        .args(args)
        .current_dir(cwd)
        .output()
        .unwrap()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    assert_eq!(code(&dgm(&["frobnicate"], tmp.path())), 1);
    assert_eq!(code(&dgm(&["run"], tmp.path())), 1);
    assert_eq!(code(&dgm(&["run", "--domain", "teapot"], tmp.path())), 1);
    assert_eq!(code(&dgm(&["--help"], tmp.path())), 0);
}

#[test]
fn run_replay_and_check() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let o = dgm(&["run", "--domain", "pipeline", "--seed", "2", "--out", "r"], t);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("switch after episode 0"));
    for f in ["config.json", "environment.json", "trace.jsonl", "report.json", "timing.json"] {
        assert!(t.join("r").join(f).is_file(), "{f}");
    }

    let o = dgm(&["replay", "r"], t);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).starts_with("replay matches"));

    let check = |cert: &str, state: &str| {
        code(&dgm(
            &["check", "--domain", "pipeline", "--certificate", cert, "--state", state],
            t,
        ))
    };
    assert_eq!(check("r/certificates/0000.json", "r/certificates/0000.basis.json"), 0);
    assert_eq!(check("r/certificates/0000.json", "r/snapshots/0000.json"), 2);
    assert_eq!(check("r/certificates/0009.json", "r/certificates/0000.basis.json"), 3);

    let text = fs::read_to_string(t.join("r/certificates/0000.json")).unwrap();
    fs::write(t.join("bad.json"), text.replacen("\"conclusion\": true", "\"conclusion\": false", 1)).unwrap();
    assert_eq!(check("bad.json", "r/certificates/0000.basis.json"), 2);

    let trace = fs::read_to_string(t.join("r/trace.jsonl")).unwrap();
    fs::write(t.join("r/trace.jsonl"), trace.replacen("\"round\":", "\"round\":9", 1)).unwrap();
    assert_eq!(code(&dgm(&["replay", "r"], t)), 2);
    assert_eq!(code(&dgm(&["replay", "nowhere"], t)), 3);
}

#[test]
fn shipped_config_runs_with_overrides() {
    let tmp = tempfile::tempdir().unwrap();
    let config = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs/pipeline.json");
    let o = dgm(
        &["run", "--config", config.to_str().unwrap(), "--seed", "4", "--out", "out"],
        tmp.path(),
    );
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let stored = fs::read_to_string(tmp.path().join("out/config.json")).unwrap();
    assert!(stored.contains("\"seed\": 4"));
    let o = dgm(
        &["run", "--config", config.to_str().unwrap(), "--domain", "circuit"],
        tmp.path(),
    );
    assert_eq!(code(&o), 1);
}

#[test]
fn certify_writes_a_checkable_certificate() {
    let tmp = tempfile::tempdir().unwrap();
    let t = tmp.path();
    let o = dgm(&["certify", "--domain", "pipeline", "--out", "c"], t);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let o = dgm(
        &["check", "--domain", "pipeline", "--certificate", "c/certificate.json", "--state", "c/basis.json"],
        t,
    );
    assert_eq!(code(&o), 0);
    let cert: serde_json::Value = serde_json::from_str(&fs::read_to_string(t.join("c/certificate.json")).unwrap()).unwrap();
    fs::write(t.join("p.json"), serde_json::to_string(&cert["proposal"]).unwrap()).unwrap();
    let o = dgm(&["certify", "--domain", "pipeline", "--proposal", "p.json", "--out", "d"], t);
    assert_eq!(code(&o), 0);
    assert_eq!(
        fs::read(t.join("d/certificate.json")).unwrap(),
        fs::read(t.join("c/certificate.json")).unwrap()
    );
    assert_eq!(code(&dgm(&["certify", "--domain", "pipeline", "--proposal", "none.json"], t)), 3);
}

#[test]
fn oracles_report_agreement() {
    let tmp = tempfile::tempdir().unwrap();
    let o = dgm(&["oracle", "enumerate", "--bound", "2"], tmp.path());
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("agree true"));
    let o = dgm(&["oracle", "truth-table"], tmp.path());
    assert!(stdout(&o).contains("correct rows 8/8"));
    let o = dgm(&["oracle", "equivalence"], tmp.path());
    assert!(stdout(&o).contains("engine true, oracle true"));
    let o = dgm(&["oracle", "enumerate", "--bound", "3", "--ceiling", "100"], tmp.path());
    assert_eq!(code(&o), 4);
}
