use std::fs;
use std::path::Path;

use dgm_core::environment::DomainKind;
use dgm_core::harness::{
    basis_path, certificate_path, cmd_replay, cmd_run, execute, read_json, HarnessError, LoopParams, RunConfig,
    TraceRecord, REPORT_FILE, TRACE_FILE,
};
use dgm_core::explore::MachineState;
use dgm_core::transform::{check_certificate, Certificate};

fn run(domain: DomainKind, seed: u64, dir: &Path) -> RunConfig {
    let config = RunConfig::defaults(domain, seed, dir);
    cmd_run(&config, 1).unwrap();
    config
}

fn records(dir: &Path) -> Vec<TraceRecord> {
    fs::read_to_string(dir.join(TRACE_FILE))
        .unwrap()
        .lines()
        .map(|l| serde_json::from_str(l).unwrap())
        .collect()
}

fn tree(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for sub in ["", "snapshots", "certificates"] {
        let d = dir.join(sub);
        let mut names: Vec<_> = fs::read_dir(&d).unwrap().map(|e| e.unwrap().path()).collect();
        names.sort();
        for p in names.into_iter().filter(|p| p.is_file()) {
            if p.file_name().unwrap() != "timing.json" {
                out.push((p.strip_prefix(dir).unwrap().display().to_string(), fs::read(&p).unwrap()));
            }
        }
    }
    out
}

#[test]
fn runs_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let config = run(DomainKind::Pipeline, 5, &dir);
    let first = tree(&dir);
    assert!(first.iter().any(|(n, _)| n.starts_with("certificates")));
    cmd_run(&config, 3).unwrap();
    assert_eq!(first, tree(&dir));
    let mut stored: RunConfig = read_json(&dir.join("config.json")).unwrap();
    stored.base = config.base.clone();
    assert_eq!(stored, config);
}

#[test]
fn replay_reproduces_and_detects_tampering() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    run(DomainKind::Pipeline, 1, &dir);
    let stored: dgm_core::harness::RunReport = read_json(&dir.join(REPORT_FILE)).unwrap();
    assert_eq!(cmd_replay(&dir.join(TRACE_FILE)).unwrap(), stored);
    assert_eq!(cmd_replay(&dir).unwrap(), stored);

    let trace = fs::read_to_string(dir.join(TRACE_FILE)).unwrap();
    let mut lines: Vec<String> = trace.lines().map(str::to_string).collect();
    lines[1] = lines[1].replacen("\"expansions\":", "\"expansions\":1", 1);
    fs::write(dir.join(TRACE_FILE), lines.join("\n") + "\n").unwrap();
    assert_eq!(
        cmd_replay(&dir).unwrap_err(),
        HarnessError::Mismatch {
            artifact: TRACE_FILE.into(),
            line: 2
        }
    );

    fs::write(dir.join(TRACE_FILE), trace).unwrap();
    fs::remove_file(dir.join("snapshots").join("0000.json")).unwrap();
    assert!(matches!(cmd_replay(&dir), Err(HarnessError::MissingArtifact(_))));
}

#[test]
fn switch_limit_zero_never_searches() {
    let env = DomainKind::Circuit.models();
    let params = LoopParams {
        episodes: 2,
        proposal_budget: 100,
        switch_limit: 0,
        workers: 1,
    };
    let art = execute(MachineState::initial(&env, 0), &env, &params).unwrap();
    assert!(art.report.switches.is_empty());
    assert!(art.certificates.is_empty());
    assert_eq!(art.report.episodes.len(), 2);
    assert!(art.report.episodes.iter().all(|e| e.submitted.is_some()));
    assert_eq!(art.snapshots.len(), 3);
}

#[test]
fn circuit_run_switches_monotonically_with_checkable_certificates() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let config = run(DomainKind::Circuit, 0, &dir);
    let report: dgm_core::harness::RunReport = read_json(&dir.join(REPORT_FILE)).unwrap();
    assert_eq!(report.switches.len(), config.switch_limit as usize);
    let mut last = f64::NEG_INFINITY;
    for s in &report.switches {
        assert!(s.min_after > s.min_before);
        assert!(s.min_after > last);
        last = s.min_after;
    }
    let env = config.environment().unwrap();
    for k in 0..report.switches.len() {
        let cert: Certificate = read_json(&certificate_path(&dir, k)).unwrap();
        let basis: MachineState = read_json(&basis_path(&dir, k)).unwrap();
        assert!(check_certificate(&cert, &basis, &env));
        assert_eq!(dgm_core::hash::content_hash(&cert), report.switches[k].certificate);
    }
    // The program changes only at switch records.
    let mut program = None;
    for r in records(&dir) {
        match r {
            TraceRecord::Episode { program: p, .. } => {
                if let Some(q) = &program {
                    assert_eq!(&p, q);
                }
                program = Some(p);
            }
            TraceRecord::Switch { program: p, .. } => {
                assert_ne!(Some(&p), program.as_ref());
                program = Some(p);
            }
            _ => {}
        }
    }
}

#[test]
fn missing_inputs_are_reported() {
    let tmp = tempfile::tempdir().unwrap();
    let mut config = RunConfig::defaults(DomainKind::Circuit, 0, tmp.path());
    config.rules = Some(tmp.path().join("absent.json"));
    let env = config.environment().unwrap();
    assert!(matches!(config.initial_state(&env), Err(HarnessError::MissingArtifact(_))));
    config.rules = None;
    config.environment = Some(DomainKind::Pipeline.to_string().into());
    assert!(matches!(config.environment(), Err(HarnessError::MissingArtifact(_))));
}

#[test]
fn environment_for_another_domain_is_refused() {
    let tmp = tempfile::tempdir().unwrap();
    let path = tmp.path().join("env.json");
    fs::write(&path, dgm_core::hash::to_text(&DomainKind::Pipeline.models())).unwrap();
    let mut config = RunConfig::defaults(DomainKind::Circuit, 0, tmp.path());
    config.environment = Some(path);
    assert!(matches!(config.environment(), Err(HarnessError::Config(_))));
}

#[test]
fn steps_precede_each_episode_and_sum_to_its_utility() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path().join("run");
    let config = run(DomainKind::Pipeline, 3, &dir);
    let horizon = config.environment().unwrap().horizon as usize;
    let mut steps = Vec::new();
    let mut episodes = 0;
    for r in records(&dir) {
        match r {
            TraceRecord::Step { episode, step, action, cumulative, .. } => {
                assert_eq!(episode, episodes);
                assert_eq!(step as usize, steps.len());
                steps.push((action, cumulative));
            }
            TraceRecord::Episode { index, round, utility, .. } => {
                assert_eq!(index, episodes);
                assert_eq!(steps.len(), horizon);
                assert!((steps[horizon - 1].1 - utility).abs() < 1e-9);
                let submits: Vec<usize> = (0..horizon).filter(|&k| steps[k].0 == "submit").collect();
                assert_eq!(submits, round.map(|r| r as usize).into_iter().collect::<Vec<_>>());
                steps.clear();
                episodes += 1;
            }
            _ => {}
        }
    }
    assert_eq!(episodes, config.episodes);
}
