use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::environment::{compile_concept, scenario_holds, Compiled, ModelSet};
use crate::hash::{content_hash, ContentHash};
use crate::language::{Concept, Constraint, Edge, Node, PortRef, RuleSet};
use crate::verification::RequirementSet;

/// Picks a node of the concept being edited.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NodeSel {
    /// The `index`-th node of `kind`, in id order.
    Nth { kind: String, index: usize },
    /// The node most recently instantiated by the running sequence.
    Newest,
}

impl NodeSel {
    pub fn nth(kind: &str, index: usize) -> Self {
        NodeSel::Nth {
            kind: kind.to_string(),
            index,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortSel {
    pub node: NodeSel,
    pub port: String,
}

impl PortSel {
    pub fn new(node: NodeSel, port: &str) -> Self {
        PortSel {
            node,
            port: port.to_string(),
        }
    }
}

/// Attaches one port of a replaced node to a port inside its refinement.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Binding {
    pub port: String,
    pub inner: PortRef,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "op", rename_all = "kebab-case")]
pub enum ActionKind {
    Instantiate {
        kind: String,
        #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
        props: BTreeMap<String, i64>,
    },
    Connect { from: PortSel, to: PortSel },
    /// Disjoint union with another concept.
    ComposeProduct { with: Concept },
    /// A connection that closes a directed cycle.
    ComposeFeedback { from: PortSel, to: PortSel },
    /// Replaces a node by a sub-concept; every wired port must be bound.
    Refine {
        node: NodeSel,
        into: Concept,
        bindings: Vec<Binding>,
    },
    /// Removes a node and its connections.
    Abstract { node: NodeSel },
    SetProperty { node: NodeSel, property: String, value: i64 },
    /// Continues only if the concept meets the named internal requirement.
    Verify { requirement: String },
    Submit,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DesignAction {
    #[serde(flatten)]
    pub kind: ActionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub guard: Option<Constraint>,
}

impl From<ActionKind> for DesignAction {
    fn from(kind: ActionKind) -> Self {
        DesignAction { kind, guard: None }
    }
}

impl DesignAction {
    pub fn instantiate(kind: &str) -> Self {
        ActionKind::Instantiate {
            kind: kind.to_string(),
            props: BTreeMap::new(),
        }
        .into()
    }

    pub fn connect(from: PortSel, to: PortSel) -> Self {
        ActionKind::Connect { from, to }.into()
    }

    pub fn verify(requirement: &str) -> Self {
        ActionKind::Verify {
            requirement: requirement.to_string(),
        }
        .into()
    }

    pub fn submit() -> Self {
        ActionKind::Submit.into()
    }

    pub fn guarded(mut self, guard: Constraint) -> Self {
        self.guard = Some(guard);
        self
    }
}

/// An ordered list of actions applied atomically.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct DesignSequence {
    pub name: String,
    pub actions: Vec<DesignAction>,
}

impl DesignSequence {
    pub fn new(name: &str, actions: Vec<DesignAction>) -> Self {
        DesignSequence {
            name: name.to_string(),
            actions,
        }
    }

    pub fn id(&self) -> ContentHash {
        content_hash(self)
    }

    pub fn submits(&self) -> bool {
        self.actions.iter().any(|a| a.kind == ActionKind::Submit)
    }
}

/// Everything an action may consult besides the concept.
pub struct ActionContext<'a> {
    pub rules: &'a RuleSet,
    pub requirements: &'a RequirementSet,
    pub env: &'a ModelSet,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ActionOutcome {
    Changed(Concept),
    /// Rejected, or nothing to do; the concept stays as it was.
    NoChange,
    /// Verification passed; the concept is unchanged.
    Passed,
    Submitted,
}

struct Editing {
    concept: Concept,
    newest: Option<String>,
    compiled: Option<Option<Compiled>>,
}

impl Editing {
    fn node(&self, sel: &NodeSel) -> Option<String> {
        match sel {
            NodeSel::Newest => self.newest.clone(),
            NodeSel::Nth { kind, index } => self.concept.ids_of_kind(kind).nth(*index).map(str::to_string),
        }
    }

    fn port(&self, sel: &PortSel) -> Option<PortRef> {
        Some(PortRef::new(&self.node(&sel.node)?, &sel.port))
    }
}

fn reaches(c: &Concept, from: &str, to: &str) -> bool {
    let mut seen = std::collections::BTreeSet::new();
    let mut stack = vec![from.to_string()];
    while let Some(n) = stack.pop() {
        if n == to {
            return true;
        }
        if seen.insert(n.clone()) {
            stack.extend(c.edges().iter().filter(|e| e.from.node == n).map(|e| e.to.node.clone()));
        }
    }
    false
}

/// Applies one action; the result is either a permissible concept or no
/// change at all.
pub fn apply_action(c: &Concept, a: &DesignAction, ctx: &ActionContext) -> ActionOutcome {
    let mut ed = Editing {
        concept: c.clone(),
        newest: None,
        compiled: None,
    };
    match step(&mut ed, a, ctx) {
        Step::Edited => ActionOutcome::Changed(ed.concept),
        Step::Reject => ActionOutcome::NoChange,
        Step::Passed => ActionOutcome::Passed,
        Step::Submitted => ActionOutcome::Submitted,
    }
}

enum Step {
    Edited,
    Passed,
    Submitted,
    Reject,
}

fn step(ed: &mut Editing, a: &DesignAction, ctx: &ActionContext) -> Step {
    if let Some(g) = &a.guard {
        if !g.evaluate(&ed.concept) {
            return Step::Reject;
        }
    }
    let mut next = ed.concept.clone();
    match &a.kind {
        ActionKind::Instantiate { kind, props } => {
            let id = next.insert_node(Node {
                kind: kind.clone(),
                props: props.clone(),
            });
            ed.newest = Some(id);
        }
        ActionKind::Connect { from, to } => {
            let (Some(f), Some(t)) = (ed.port(from), ed.port(to)) else {
                return Step::Reject;
            };
            if !matches!(next.insert_edge(Edge { from: f, to: t }), Ok(true)) {
                return Step::Reject;
            }
        }
        ActionKind::ComposeProduct { with } => {
            if with.is_empty() {
                return Step::Reject;
            }
            next.absorb(with);
        }
        ActionKind::ComposeFeedback { from, to } => {
            let (Some(f), Some(t)) = (ed.port(from), ed.port(to)) else {
                return Step::Reject;
            };
            if !reaches(&next, &t.node, &f.node) {
                return Step::Reject;
            }
            if !matches!(next.insert_edge(Edge { from: f, to: t }), Ok(true)) {
                return Step::Reject;
            }
        }
        ActionKind::Refine { node, into, bindings } => {
            let Some(id) = ed.node(node) else {
                return Step::Reject;
            };
            let bound: BTreeMap<&str, &PortRef> = bindings.iter().map(|b| (b.port.as_str(), &b.inner)).collect();
            let touching: Vec<Edge> = next
                .edges()
                .iter()
                .filter(|e| e.from.node == id || e.to.node == id)
                .cloned()
                .collect();
            let rename = next.absorb(into);
            let inner = |port: &str| -> Option<PortRef> {
                let p = bound.get(port)?;
                Some(PortRef::new(rename.get(&p.node)?, &p.port))
            };
            let mut redirected = Vec::new();
            for e in &touching {
                let from = if e.from.node == id { inner(&e.from.port) } else { Some(e.from.clone()) };
                let to = if e.to.node == id { inner(&e.to.port) } else { Some(e.to.clone()) };
                match (from, to) {
                    (Some(from), Some(to)) => redirected.push(Edge { from, to }),
                    _ => return Step::Reject,
                }
            }
            next.remove_node(&id);
            for e in redirected {
                if next.insert_edge(e).is_err() {
                    return Step::Reject;
                }
            }
        }
        ActionKind::Abstract { node } => {
            let Some(id) = ed.node(node) else {
                return Step::Reject;
            };
            next.remove_node(&id);
            if ed.newest.as_deref() == Some(id.as_str()) {
                ed.newest = None;
            }
        }
        ActionKind::SetProperty { node, property, value } => {
            let Some(id) = ed.node(node) else {
                return Step::Reject;
            };
            let n = next.node_mut(&id).expect("selected node exists");
            if n.props.get(property) == Some(value) {
                return Step::Reject;
            }
            n.props.insert(property.clone(), *value);
        }
        ActionKind::Verify { requirement } => {
            // A requirement the machine no longer holds constrains nothing.
            let Some(req) = ctx.requirements.get(requirement) else {
                return Step::Passed;
            };
            let compiled = ed
                .compiled
                .get_or_insert_with(|| compile_concept(&ed.concept, ctx.env.domain, ctx.env.time()).ok());
            return match compiled {
                Some(c) if scenario_holds(c, &req.scenario) => Step::Passed,
                _ => Step::Reject,
            };
        }
        ActionKind::Submit => {
            return if ed.concept.is_empty() { Step::Reject } else { Step::Submitted };
        }
    }
    if !matches!(ctx.rules.is_permissible(&next), Ok(true)) {
        return Step::Reject;
    }
    ed.concept = next;
    ed.compiled = None;
    Step::Edited
}

/// Result of running a whole sequence on one concept.
#[derive(Debug, Clone, PartialEq)]
pub struct SequenceOutcome {
    /// The edited concept, if the sequence ran to completion and changed it.
    pub concept: Option<Concept>,
    pub submitted: bool,
}

impl SequenceOutcome {
    fn rejected() -> Self {
        SequenceOutcome {
            concept: None,
            submitted: false,
        }
    }
}

/// Runs every action in order. Any rejection discards the whole sequence.
pub fn apply_sequence(c: &Concept, seq: &DesignSequence, ctx: &ActionContext) -> SequenceOutcome {
    let mut ed = Editing {
        concept: c.clone(),
        newest: None,
        compiled: None,
    };
    let mut changed = false;
    let mut submitted = false;
    for a in &seq.actions {
        match step(&mut ed, a, ctx) {
            Step::Edited => changed = true,
            Step::Passed => {}
            Step::Submitted => submitted = true,
            Step::Reject => return SequenceOutcome::rejected(),
        }
    }
    SequenceOutcome {
        concept: changed.then_some(ed.concept),
        submitted,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{circuit, DomainKind};

    fn with_ctx<T>(f: impl FnOnce(&ActionContext) -> T) -> T {
        let rules = circuit::rules();
        let env = DomainKind::Circuit.models();
        let reqs = env.requirements.internal_copy();
        f(&ActionContext {
            rules: &rules,
            requirements: &reqs,
            env: &env,
        })
    }

    #[test]
    fn instantiate_on_empty_gives_one_node() {
        with_ctx(|ctx| match apply_action(&Concept::empty(), &DesignAction::instantiate("NAND"), ctx) {
            ActionOutcome::Changed(c) => {
                assert_eq!(c.node_count(), 1);
                assert_eq!(c.count_kind("NAND"), 1);
            }
            other => panic!("unexpected {other:?}"),
        });
    }

    #[test]
    fn false_guard_means_no_change() {
        with_ctx(|ctx| {
            let a = DesignAction::instantiate("NAND").guarded(Constraint::False);
            assert_eq!(apply_action(&Concept::empty(), &a, ctx), ActionOutcome::NoChange);
        });
    }

    #[test]
    fn impermissible_result_is_rejected() {
        with_ctx(|ctx| {
            // A sink needs both sources.
            assert_eq!(
                apply_action(&Concept::empty(), &DesignAction::instantiate("S"), ctx),
                ActionOutcome::NoChange
            );
        });
    }

    #[test]
    fn final_wire_completes_the_half_adder() {
        let full = circuit::half_adder();
        let mut partial = full.clone();
        let last = full.drivers("c", "i").next().unwrap().clone();
        partial = Concept::from_parts(
            partial.nodes().clone(),
            partial.edges().iter().filter(|e| **e != last).cloned(),
        )
        .unwrap();
        with_ctx(|ctx| {
            let a = DesignAction::connect(
                PortSel::new(NodeSel::nth("NAND", 4), "z"),
                PortSel::new(NodeSel::nth("C", 0), "i"),
            );
            match apply_action(&partial, &a, ctx) {
                ActionOutcome::Changed(c) => assert_eq!(c, full),
                other => panic!("unexpected {other:?}"),
            }
        });
    }

    #[test]
    fn sequences_are_atomic() {
        with_ctx(|ctx| {
            let seq = DesignSequence::new(
                "half-done",
                vec![DesignAction::instantiate("NAND"), DesignAction::instantiate("S")],
            );
            assert_eq!(apply_sequence(&Concept::empty(), &seq, ctx).concept, None);
        });
    }

    #[test]
    fn verify_gates_submission() {
        with_ctx(|ctx| {
            let mut actions: Vec<DesignAction> = ctx
                .requirements
                .requirements()
                .iter()
                .map(|r| DesignAction::verify(&r.id))
                .collect();
            actions.push(DesignAction::submit());
            let seq = DesignSequence::new("submit", actions);
            let ok = apply_sequence(&circuit::half_adder(), &seq, ctx);
            assert!(ok.submitted);
            assert_eq!(ok.concept, None);
            let lone = Concept::build(&[("g", "NAND")], &[]).unwrap();
            assert!(!apply_sequence(&lone, &seq, ctx).submitted);
        });
    }

    #[test]
    fn feedback_must_close_a_cycle() {
        let rules = crate::language::RuleSet::new(circuit::alphabet(), vec![]).unwrap();
        let env = DomainKind::Circuit.models();
        let reqs = env.requirements.internal_copy();
        let ctx = ActionContext {
            rules: &rules,
            requirements: &reqs,
            env: &env,
        };
        let chain = Concept::build(&[("g", "NAND"), ("h", "NAND")], &[(("g", "z"), ("h", "x"))]).unwrap();
        let back = |from: usize, to: usize| ActionKind::ComposeFeedback {
            from: PortSel::new(NodeSel::nth("NAND", from), "z"),
            to: PortSel::new(NodeSel::nth("NAND", to), "y"),
        };
        assert!(matches!(apply_action(&chain, &back(1, 0).into(), &ctx), ActionOutcome::Changed(_)));
        assert_eq!(apply_action(&chain, &back(0, 1).into(), &ctx), ActionOutcome::NoChange);
        // The shipped circuit rules forbid loops altogether.
        with_ctx(|ctx| assert_eq!(apply_action(&chain, &back(1, 0).into(), ctx), ActionOutcome::NoChange));
    }

    #[test]
    fn refine_replaces_a_node_by_its_parts() {
        with_ctx(|ctx| {
            // An AND placeholder realised as NAND followed by an inverter.
            let c = Concept::build(&[("a", "A"), ("g", "NAND")], &[(("a", "o"), ("g", "x"))]).unwrap();
            let into = Concept::build(
                &[("p", "NAND"), ("q", "NAND")],
                &[(("p", "z"), ("q", "x")), (("p", "z"), ("q", "y"))],
            )
            .unwrap();
            let a: DesignAction = ActionKind::Refine {
                node: NodeSel::nth("NAND", 0),
                into,
                bindings: vec![
                    Binding { port: "x".into(), inner: PortRef::new("p", "x") },
                    Binding { port: "z".into(), inner: PortRef::new("q", "z") },
                ],
            }
            .into();
            match apply_action(&c, &a, ctx) {
                ActionOutcome::Changed(r) => {
                    assert_eq!(r.count_kind("NAND"), 2);
                    assert_eq!(r.edges().len(), 3);
                }
                other => panic!("unexpected {other:?}"),
            }
        });
    }

    #[test]
    fn sequence_id_is_stable() {
        let s = DesignSequence::new("one", vec![DesignAction::instantiate("NAND")]);
        assert_eq!(s.id(), s.clone().id());
        let back: DesignSequence = crate::hash::from_text(&crate::hash::to_text(&s)).unwrap();
        assert_eq!(back.id(), s.id());
    }
}
