use std::collections::BTreeSet;

use super::edit::{Edit, RewriteProposal};
use super::meta::{EditKind, MetaRules};
use crate::explore::{default_policy, ExploreParams, MachineState};
use crate::language::{Cmp, Constraint, Rule, RuleCategory};

/// Largest count the pruning templates bound a component kind to.
pub const MAX_PRUNE_BOUND: usize = 8;

/// Tightest unconditional upper bound the rules already place on `kind`.
fn existing_bound(state: &MachineState, kind: &str) -> Option<usize> {
    state
        .rules
        .rules()
        .iter()
        .filter(|r| r.pattern == Constraint::True)
        .filter_map(|r| match &r.constraint {
            Constraint::NodeCount {
                kind: Some(k),
                cmp: Cmp::Le,
                value,
            } if k == kind => Some(*value),
            _ => None,
        })
        .min()
}

fn add_rule(state: &MachineState) -> Vec<RewriteProposal> {
    let mut out = Vec::new();
    for kind in state.rules.alphabet().component_kinds() {
        let limit = existing_bound(state, kind).unwrap_or(usize::MAX);
        for g in 1..=MAX_PRUNE_BOUND.min(limit.saturating_sub(1)) {
            let id = format!("prune-{kind}-gt-{g}");
            if state.rules.rule(&id).is_some() {
                continue;
            }
            let rule = Rule::new(&id, RuleCategory::Conceptual, Constraint::count(kind, Cmp::Le, g));
            out.push(RewriteProposal::new(&id, vec![Edit::AddRule { rule }]));
        }
    }
    out
}

fn set_explore(state: &MachineState) -> Vec<RewriteProposal> {
    let w = state.explore.beam_width;
    let mut out = Vec::new();
    for next in [w / 2, w * 2] {
        if next >= 1 && next != w {
            out.push(RewriteProposal::new(
                &format!("beam-{next}"),
                vec![Edit::SetExplore {
                    params: ExploreParams {
                        beam_width: next,
                        ..state.explore.clone()
                    },
                }],
            ));
        }
    }
    out
}

fn set_utility(state: &MachineState) -> Vec<RewriteProposal> {
    let mut out = Vec::new();
    for (name, v) in &state.utility.weights {
        for (tag, f) in [("double", 2.0), ("halve", 0.5)] {
            out.push(RewriteProposal::new(
                &format!("{tag}-{name}"),
                vec![Edit::SetUtilityParam {
                    name: name.clone(),
                    value: v * f,
                }],
            ));
        }
    }
    out
}

fn remove_rule(state: &MachineState) -> Vec<RewriteProposal> {
    state
        .rules
        .rules()
        .iter()
        .map(|r| RewriteProposal::new(&format!("drop-rule-{}", r.id), vec![Edit::RemoveRule { id: r.id.clone() }]))
        .collect()
}

fn remove_sequence(state: &MachineState) -> Vec<RewriteProposal> {
    state
        .policy
        .iter()
        .map(|s| RewriteProposal::new(&format!("drop-seq-{}", s.name), vec![Edit::RemoveSequence { name: s.name.clone() }]))
        .collect()
}

fn add_sequence(state: &MachineState) -> Vec<RewriteProposal> {
    let present: BTreeSet<&str> = state.policy.iter().map(|s| s.name.as_str()).collect();
    default_policy(state.domain, &state.requirements)
        .into_iter()
        .filter(|s| !present.contains(s.name.as_str()))
        .map(|s| RewriteProposal::new(&format!("restore-seq-{}", s.name), vec![Edit::AddSequence { sequence: s }]))
        .collect()
}

fn set_meta(state: &MachineState) -> Vec<RewriteProposal> {
    let m = &state.meta;
    let mut out = vec![RewriteProposal::new(
        &format!("max-edits-{}", m.max_edits + 1),
        vec![Edit::SetMetaRules {
            rules: MetaRules {
                max_edits: m.max_edits + 1,
                ..m.clone()
            },
        }],
    )];
    if m.max_edits > 1 {
        out.push(RewriteProposal::new(
            &format!("max-edits-{}", m.max_edits - 1),
            vec![Edit::SetMetaRules {
                rules: MetaRules {
                    max_edits: m.max_edits - 1,
                    ..m.clone()
                },
            }],
        ));
    }
    out
}

/// Pairs of single-edit proposals from the same family.
fn pairs(singles: &[RewriteProposal]) -> Vec<RewriteProposal> {
    let mut out = Vec::new();
    for (i, a) in singles.iter().enumerate() {
        for b in &singles[i + 1..] {
            let mut edits = a.edits.clone();
            edits.extend(b.edits.iter().cloned());
            out.push(RewriteProposal::new(&format!("{}+{}", a.name, b.name), edits));
        }
    }
    out
}

type Family = fn(&MachineState) -> Vec<RewriteProposal>;

/// Candidate rewrites, grouped by edit family and sorted by name within a
/// family, limited to the enabled families, the size limit, and `budget`.
pub fn propose(state: &MachineState, budget: usize) -> Vec<RewriteProposal> {
    let families: [(EditKind, Family); 7] = [
        (EditKind::AddRule, add_rule),
        (EditKind::SetExploreParam, set_explore),
        (EditKind::SetUtilityParam, set_utility),
        (EditKind::RemoveRule, remove_rule),
        (EditKind::RemoveSequence, remove_sequence),
        (EditKind::AddSequence, add_sequence),
        (EditKind::SetMetaParam, set_meta),
    ];
    let mut out = Vec::new();
    for (kind, generate) in families {
        if !state.meta.enabled.contains(&kind) {
            continue;
        }
        let mut singles = generate(state);
        singles.sort_by(|a, b| a.name.cmp(&b.name));
        let mut group = singles.clone();
        if state.meta.max_edits >= 2 && matches!(kind, EditKind::AddSequence | EditKind::RemoveSequence) {
            group.extend(pairs(&singles));
        }
        out.extend(group);
    }
    out.truncate(budget.min(state.meta.max_proposals));
    out
}
