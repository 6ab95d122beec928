use std::collections::BTreeSet;

use dgm_core::environment::{circuit, DomainKind, EnvironmentModel, ModelSet};
use dgm_core::explore::{run_episode, MachineState};
use dgm_core::language::{Concept, Wire};
use dgm_core::transform::{
    apply_proposal, certify, check_certificate, propose, search_certified, self_modify, switch, Certificate, Edit,
    EditKind, MetaUtility, RewriteProposal, TransformError,
};
use dgm_core::verification::{Location, RequirementSet};

fn circuit_state(seed: u64) -> (MachineState, ModelSet) {
    let env = DomainKind::Circuit.models();
    (MachineState::initial(&env, seed), env)
}

fn named(state: &MachineState, name: &str) -> RewriteProposal {
    propose(state, usize::MAX)
        .into_iter()
        .find(|p| p.name == name)
        .unwrap_or_else(|| panic!("no proposal {name}"))
}

/// The half adder with `extra` dangling NAND gates on the inputs.
fn padded_half_adder(extra: usize) -> Concept {
    let ha = circuit::half_adder();
    let ids: Vec<String> = (0..extra).map(|i| format!("pad{i}")).collect();
    let mut nodes: Vec<(&str, &str)> = ha.nodes().iter().map(|(id, n)| (id.as_str(), n.kind.as_str())).collect();
    nodes.extend(ids.iter().map(|id| (id.as_str(), "NAND")));
    let mut edges: Vec<Wire> = ha
        .edges()
        .iter()
        .map(|e| {
            (
                (e.from.node.as_str(), e.from.port.as_str()),
                (e.to.node.as_str(), e.to.port.as_str()),
            )
        })
        .collect();
    for id in &ids {
        edges.push((("a", "o"), (id.as_str(), "x")));
        edges.push((("b", "o"), (id.as_str(), "y")));
    }
    Concept::build(&nodes, &edges).unwrap()
}

#[test]
fn identity_proposal_is_rejected() {
    let (s, env) = circuit_state(0);
    let id = RewriteProposal::new("identity", vec![]);
    let cert = certify(&s, &id, &env).unwrap();
    assert_eq!(cert.successor, cert.basis);
    assert!(!cert.conclusion);
    assert_eq!(self_modify(&s, &id, &env).unwrap_err(), TransformError::NotImproving);
}

#[test]
fn deleting_submit_is_rejected() {
    let (s, env) = circuit_state(0);
    let p = named(&s, "drop-seq-submit");
    let next = apply_proposal(&s, &p).unwrap();
    let out = run_episode(&next, &env, 0).unwrap();
    assert!(out.submitted.is_none());
    assert!(out.utility_per_model.iter().all(|u| *u <= 0.0));
    let cert = certify(&s, &p, &env).unwrap();
    assert!(!cert.conclusion);
    assert!(cert.after.iter().zip(&cert.before).all(|(a, b)| a < b));
}

#[test]
fn improving_one_model_while_regressing_another_is_rejected() {
    let (s, mut env) = circuit_state(0);
    // A second world that pays for search effort instead of charging it.
    env.models = vec![
        env.models[0].clone(),
        EnvironmentModel {
            id: "lavish".into(),
            weight: 0.5,
            cost_per_kind: env.models[0].cost_per_kind.clone(),
            expansion_cost: -0.01,
        },
    ];
    env.validate().unwrap();
    let cert = certify(&s, &named(&s, "prune-NAND-gt-5"), &env).unwrap();
    assert!(cert.after[0] > cert.before[0]);
    assert!(cert.after[1] < cert.before[1]);
    assert!(!cert.conclusion);
}

#[test]
fn pruning_rule_certifies_and_switches() {
    let (s, env) = circuit_state(0);
    let p = named(&s, "prune-NAND-gt-5");
    let m = self_modify(&s, &p, &env).unwrap();
    assert!(m.certificate.conclusion);
    assert_eq!(m.state.hash(), m.certificate.successor);
    assert_eq!(m.event.successor, m.certificate.successor);
    let before = run_episode(&s, &env, 0).unwrap();
    let after = run_episode(&m.state, &env, 0).unwrap();
    assert!(after.expansions < before.expansions);
    assert_eq!(after.submitted.as_ref().map(|c| c.hash()), before.submitted.as_ref().map(|c| c.hash()));
}

#[test]
fn certificates_check_and_tampering_is_caught() {
    let (s, env) = circuit_state(3);
    let cert = certify(&s, &named(&s, "prune-NAND-gt-5"), &env).unwrap();
    assert!(check_certificate(&cert, &s, &env));

    let mut t = cert.clone();
    t.after[0] += 0.001;
    assert!(!check_certificate(&t, &s, &env));

    let mut t = cert.clone();
    t.before[1] = f64::from_bits(t.before[1].to_bits() + 1);
    assert!(!check_certificate(&t, &s, &env));

    let mut t = cert.clone();
    std::mem::swap(&mut t.basis, &mut t.successor);
    assert!(!check_certificate(&t, &s, &env));

    let mut t = cert.clone();
    t.checker = "other".into();
    assert!(!check_certificate(&t, &s, &env));

    let rejected = certify(&s, &RewriteProposal::new("identity", vec![]), &env).unwrap();
    let mut t = rejected.clone();
    t.conclusion = true;
    assert!(check_certificate(&rejected, &s, &env));
    assert!(!check_certificate(&t, &s, &env));
    assert_eq!(switch(&s, &t, &env).unwrap_err(), TransformError::InvalidCertificate);
    assert_eq!(switch(&s, &rejected, &env).unwrap_err(), TransformError::NotImproving);
}

#[test]
fn certificate_survives_serialization() {
    let (s, env) = circuit_state(0);
    let cert = certify(&s, &named(&s, "prune-NAND-gt-5"), &env).unwrap();
    let text = dgm_core::hash::to_text(&cert);
    let back: Certificate = dgm_core::hash::from_text(&text).unwrap();
    assert_eq!(back, cert);
    assert!(check_certificate(&back, &s, &env));
}

#[test]
fn stale_certificate_is_refused() {
    let (s, env) = circuit_state(0);
    let first = self_modify(&s, &named(&s, "prune-NAND-gt-5"), &env).unwrap();
    let cert = certify(&s, &named(&s, "beam-4"), &env).unwrap();
    assert_eq!(switch(&first.state, &cert, &env).unwrap_err(), TransformError::StaleBasis);
}

#[test]
fn switch_prunes_stored_concepts_the_new_rules_forbid() {
    let (mut s, env) = circuit_state(0);
    let six = padded_half_adder(1);
    let seven = padded_half_adder(2);
    s.concepts = vec![circuit::half_adder(), six.clone(), seven.clone()];
    for c in &s.concepts {
        assert!(s.rules.is_permissible(c).unwrap());
    }
    let m = self_modify(&s, &named(&s, "prune-NAND-gt-5"), &env).unwrap();
    assert_eq!(m.state.concepts, vec![circuit::half_adder()]);
    assert_eq!(m.event.pruned, vec![six.hash(), seven.hash()]);
}

#[test]
fn environment_edits_are_forbidden() {
    let (s, env) = circuit_state(0);
    let p = RewriteProposal::new(
        "rewrite-world",
        vec![Edit::SetEnvironment {
            models: Box::new(env.clone()),
        }],
    );
    assert!(matches!(certify(&s, &p, &env), Err(TransformError::ForbiddenEdit(_))));
    assert!(matches!(self_modify(&s, &p, &env), Err(TransformError::ForbiddenEdit(_))));

    let p = RewriteProposal::new(
        "rewrite-targets",
        vec![Edit::SetRequirements {
            requirements: env.requirements.clone(),
        }],
    );
    assert!(matches!(apply_proposal(&s, &p), Err(TransformError::ForbiddenEdit(_))));

    let own = RequirementSet::new(Location::MachineInternal, vec![]).unwrap();
    let p = RewriteProposal::new("forget", vec![Edit::SetRequirements { requirements: own }]);
    assert!(apply_proposal(&s, &p).is_ok());
}

#[test]
fn oversized_proposals_are_rejected() {
    let (s, _) = circuit_state(0);
    let a = named(&s, "drop-seq-submit");
    let b = named(&s, "prune-NAND-gt-5");
    let both = RewriteProposal::new("both", [a.edits, b.edits].concat());
    assert_eq!(
        apply_proposal(&s, &both).unwrap_err(),
        TransformError::TooLarge { edits: 2, limit: 1 }
    );
}

#[test]
fn propose_is_deterministic_and_bounded() {
    let (s, _) = circuit_state(0);
    let all = propose(&s, 100);
    assert_eq!(all, propose(&s, 100));
    assert!(all.len() <= 100);
    assert!(all.iter().all(|p| apply_proposal(&s, p).is_ok()));
    let names: BTreeSet<&str> = all.iter().map(|p| p.name.as_str()).collect();
    assert_eq!(names.len(), all.len());
    assert!(names.contains("prune-NAND-gt-6"));
    assert_eq!(propose(&s, 3), all[..3].to_vec());
}

#[test]
fn budget_one_over_rule_templates_yields_the_first() {
    let (mut s, _) = circuit_state(0);
    s.meta.enabled = [EditKind::AddRule].into();
    let all = propose(&s, usize::MAX);
    let mut names: Vec<&str> = all.iter().map(|p| p.name.as_str()).collect();
    names.sort();
    let one = propose(&s, 1);
    assert_eq!(one.len(), 1);
    assert_eq!(one[0].name, names[0]);
}

#[test]
fn disabling_every_edit_kind_proposes_nothing() {
    let (mut s, _) = circuit_state(0);
    s.meta.enabled.clear();
    assert!(propose(&s, 100).is_empty());
}

#[test]
fn workers_do_not_change_the_search() {
    let (s, env) = circuit_state(0);
    let proposals = propose(&s, 8);
    let one = search_certified(&s, &proposals, &env, 1).unwrap();
    let three = search_certified(&s, &proposals, &env, 3).unwrap();
    assert_eq!(one.certified, three.certified);
    assert_eq!(one.certified.unwrap().proposal.name, "prune-NAND-gt-5");
}

#[test]
fn shaped_meta_utility_picks_among_certified_rewrites() {
    let (mut s, env) = circuit_state(0);
    s.meta_utility = MetaUtility::ShapedOriginality { weight: 1.0 };
    let proposals = propose(&s, 6);
    let search = search_certified(&s, &proposals, &env, 1).unwrap();
    assert_eq!(search.tried, proposals.len());
    let chosen = search.certified.unwrap();
    assert!(chosen.conclusion);
    for p in &proposals {
        let c = certify(&s, p, &env).unwrap();
        if c.conclusion {
            assert!(c.originality <= chosen.originality);
        }
    }
    assert_eq!(MetaUtility::Indicator.value(true, 9.0), 1.0);
    assert_eq!(MetaUtility::Indicator.value(false, 9.0), 0.0);
}

/// Circuit basis missing `submit` and every S-wiring macro: restoring one of
/// them alone never submits, restoring a pair can.
fn crippled_circuit() -> (MachineState, ModelSet) {
    let (mut s, env) = circuit_state(0);
    s.policy.retain(|q| q.name != "submit" && !q.name.starts_with("s-from-"));
    s.meta.enabled = [EditKind::AddSequence, EditKind::SetMetaParam].into();
    (s, env)
}

#[test]
fn raising_the_edit_limit_certifies_when_only_pairs_help() {
    let (s, env) = crippled_circuit();
    let proposals = propose(&s, 100);
    assert!(proposals.iter().all(|p| p.edits.len() == 1));
    let search = search_certified(&s, &proposals, &env, 1).unwrap();
    let cert = search.certified.expect("a meta rewrite certifies");
    assert_eq!(cert.proposal.name, "max-edits-2");
    assert!(cert.lookahead);
    // Switching re-checks the certificate.
    let (next, _) = switch(&s, &cert, &env).unwrap();
    assert_eq!(next.meta.max_edits, 2);
    assert!(propose(&next, 100).iter().any(|p| p.edits.len() == 2));
}
