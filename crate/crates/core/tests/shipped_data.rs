//! The JSON files under `data/` and `configs/` must equal what the builders
//! produce. Set `DGM_BLESS=1` to rewrite them.

use std::path::PathBuf;

use dgm_core::environment::DomainKind;
use dgm_core::explore::MachineState;
use dgm_core::harness::RunConfig;
use dgm_core::hash::to_text;

fn root() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../..")
}

fn expected(domain: DomainKind) -> Vec<(PathBuf, String)> {
    let env = domain.models();
    let state = MachineState::initial(&env, 0);
    let dir = PathBuf::from("data").join(domain.to_string());
    let mut config = RunConfig::defaults(domain, 0, &PathBuf::from(format!("../runs/{domain}")));
    config.rules = Some(PathBuf::from("..").join(&dir).join("rules.json"));
    config.policy = Some(PathBuf::from("..").join(&dir).join("policy.json"));
    config.environment = Some(PathBuf::from("..").join(&dir).join("environment.json"));
    vec![
        (dir.join("rules.json"), to_text(&state.rules)),
        (dir.join("policy.json"), to_text(&state.policy)),
        (dir.join("environment.json"), to_text(&env)),
        (PathBuf::from("configs").join(format!("{domain}.json")), to_text(&config)),
    ]
}

#[test]
fn shipped_files_match_builders() {
    let bless = std::env::var_os("DGM_BLESS").is_some();
    for domain in [DomainKind::Circuit, DomainKind::Pipeline] {
        for (rel, text) in expected(domain) {
            let path = root().join(&rel);
            if bless {
                std::fs::create_dir_all(path.parent().unwrap()).unwrap();
                std::fs::write(&path, &text).unwrap();
            }
            let stored = std::fs::read_to_string(&path).unwrap_or_default();
            assert!(stored == text, "{} is stale; rerun with DGM_BLESS=1", rel.display());
        }
    }
}

#[test]
fn shipped_config_loads_the_default_state() {
    for domain in [DomainKind::Circuit, DomainKind::Pipeline] {
        let config = RunConfig::load(&root().join("configs").join(format!("{domain}.json"))).unwrap();
        let env = config.environment().unwrap();
        assert_eq!(env, domain.models());
        let state = config.initial_state(&env).unwrap();
        assert_eq!(state, MachineState::initial(&env, 0));
    }
}
