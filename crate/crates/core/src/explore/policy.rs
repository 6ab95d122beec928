use crate::environment::{circuit, DomainKind};
use crate::language::{Cmp, Constraint};
use crate::verification::RequirementSet;

use super::action::{DesignAction, DesignSequence, NodeSel, PortSel};

/// Largest gate index the circuit macros refer to.
pub const MAX_GATE_OPERAND: usize = 6;

fn operand_name(p: &PortSel) -> String {
    match &p.node {
        NodeSel::Nth { kind, index } => format!("{kind}{index}"),
        NodeSel::Newest => "new".to_string(),
    }
}

fn submit_sequence(requirements: &RequirementSet, guard: Constraint) -> DesignSequence {
    let mut actions: Vec<DesignAction> = requirements.requirements().iter().map(|r| DesignAction::verify(&r.id)).collect();
    actions.push(DesignAction::submit());
    actions[0] = actions[0].clone().guarded(guard);
    DesignSequence::new("submit", actions)
}

/// Gate macros over every pair of available signals, sink macros, and a
/// guarded submission.
pub fn circuit_policy(requirements: &RequirementSet) -> Vec<DesignSequence> {
    let mut operands: Vec<PortSel> = circuit::SOURCES
        .iter()
        .map(|s| PortSel::new(NodeSel::nth(s, 0), "o"))
        .collect();
    operands.extend((0..MAX_GATE_OPERAND).map(|k| PortSel::new(NodeSel::nth(circuit::GATE, k), "z")));
    let mut policy = vec![DesignSequence::new(
        "setup",
        circuit::SOURCES.iter().map(|s| DesignAction::instantiate(s)).collect(),
    )];
    for (i, p) in operands.iter().enumerate() {
        for q in &operands[i..] {
            policy.push(DesignSequence::new(
                &format!("nand-{}-{}", operand_name(p), operand_name(q)),
                vec![
                    DesignAction::instantiate(circuit::GATE),
                    DesignAction::connect(p.clone(), PortSel::new(NodeSel::Newest, "x")),
                    DesignAction::connect(q.clone(), PortSel::new(NodeSel::Newest, "y")),
                ],
            ));
        }
    }
    for sink in circuit::SINKS {
        for p in &operands {
            policy.push(DesignSequence::new(
                &format!("{}-from-{}", sink.to_lowercase(), operand_name(p)),
                vec![
                    DesignAction::instantiate(sink),
                    DesignAction::connect(p.clone(), PortSel::new(NodeSel::Newest, "i")),
                ],
            ));
        }
    }
    let ready = Constraint::All(circuit::SINKS.iter().map(|s| Constraint::count(s, Cmp::Ge, 1)).collect());
    policy.push(submit_sequence(requirements, ready));
    policy
}

/// Stages appended behind any earlier stage, then a guarded submission.
pub fn pipeline_policy(requirements: &RequirementSet) -> Vec<DesignSequence> {
    let preds: Vec<(&str, usize)> = vec![("source", 0), ("inc", 0), ("inc", 1), ("evens", 0), ("evens", 1), ("show", 0)];
    let mut policy = vec![DesignSequence::new("start", vec![DesignAction::instantiate("source")])];
    for kind in ["inc", "evens", "show", "sink"] {
        for (pk, pi) in &preds {
            policy.push(DesignSequence::new(
                &format!("{kind}-after-{pk}{pi}"),
                vec![
                    DesignAction::instantiate(kind),
                    DesignAction::connect(
                        PortSel::new(NodeSel::nth(pk, *pi), "o"),
                        PortSel::new(NodeSel::Newest, "i"),
                    ),
                ],
            ));
        }
    }
    policy.push(submit_sequence(requirements, Constraint::count("sink", Cmp::Ge, 1)));
    policy
}

pub fn default_policy(domain: DomainKind, requirements: &RequirementSet) -> Vec<DesignSequence> {
    match domain {
        DomainKind::Circuit => circuit_policy(requirements),
        DomainKind::Pipeline => pipeline_policy(requirements),
    }
}
