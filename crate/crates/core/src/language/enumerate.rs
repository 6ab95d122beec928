//! Bounded enumeration of permissible concepts.

use std::collections::{BTreeMap, BTreeSet};

use super::alphabet::{Alphabet, Direction};
use super::canon::canonical_form;
use super::concept::{node_id, Concept, Edge, Node, PortRef};
use super::rules::RuleSet;
use super::LanguageError;
use crate::hash::to_text;

/// Default ceiling on generated candidate graphs.
pub const DEFAULT_EXPANSION_CEILING: u64 = 50_000_000;

/// Widest edge universe the enumerator accepts for one node multiset.
const MAX_EDGE_SLOTS: usize = 30;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enumeration {
    pub concepts: Vec<Concept>,
    /// Candidate graphs generated, permissible or not.
    pub expansions: u64,
}

/// Every well-typed node variant: a component kind with one value per
/// required property.
pub(crate) fn node_variants(alphabet: &Alphabet) -> Vec<Node> {
    let mut out = Vec::new();
    for kind in alphabet.component_kinds() {
        let spec = alphabet.component(kind).expect("listed kind");
        let mut partial = vec![Node::new(kind)];
        for prop in &spec.properties {
            let domain = alphabet.property_domain(prop).expect("validated alphabet");
            partial = partial
                .into_iter()
                .flat_map(|n| {
                    domain.iter().map(move |&v| {
                        let mut n = n.clone();
                        n.props.insert(prop.clone(), v);
                        n
                    })
                })
                .collect();
        }
        out.extend(partial);
    }
    out.sort();
    out
}

/// All permissible concepts with at most `size_bound` nodes, canonicalized,
/// deduplicated, and ordered by (node count, canonical text). Includes the
/// empty concept.
pub fn interpret(rules: &RuleSet, size_bound: usize) -> Result<Vec<Concept>, LanguageError> {
    interpret_with_ceiling(rules, size_bound, DEFAULT_EXPANSION_CEILING).map(|e| e.concepts)
}

pub fn interpret_with_ceiling(
    rules: &RuleSet,
    size_bound: usize,
    ceiling: u64,
) -> Result<Enumeration, LanguageError> {
    let alphabet = rules.alphabet();
    let variants = node_variants(alphabet);
    let mut found: BTreeMap<(usize, String), Concept> = BTreeMap::new();
    found.insert((0, to_text(&Concept::empty())), Concept::empty());
    let mut expansions = 1u64;

    for k in 1..=size_bound {
        let mut multiset = vec![0usize; k];
        loop {
            let nodes: Vec<&Node> = multiset.iter().map(|&i| &variants[i]).collect();
            enumerate_wirings(rules, &nodes, &mut found, &mut expansions, ceiling)?;
            if !next_multiset(&mut multiset, variants.len()) {
                break;
            }
        }
    }
    Ok(Enumeration {
        concepts: found.into_values().collect(),
        expansions,
    })
}

/// Advances a non-decreasing index vector; false when exhausted.
fn next_multiset(m: &mut [usize], n: usize) -> bool {
    let k = m.len();
    for i in (0..k).rev() {
        if m[i] + 1 < n {
            m[i] += 1;
            let v = m[i];
            for x in &mut m[i + 1..] {
                *x = v;
            }
            return true;
        }
    }
    false
}

fn enumerate_wirings(
    rules: &RuleSet,
    nodes: &[&Node],
    found: &mut BTreeMap<(usize, String), Concept>,
    expansions: &mut u64,
    ceiling: u64,
) -> Result<(), LanguageError> {
    let alphabet = rules.alphabet();
    let ids: Vec<String> = (0..nodes.len()).map(node_id).collect();
    let mut slots: Vec<Edge> = Vec::new();
    for (i, from) in nodes.iter().enumerate() {
        let from_spec = alphabet.component(&from.kind).expect("variant of alphabet");
        for out in from_spec.ports.iter().filter(|p| p.direction == Direction::Out) {
            for (j, to) in nodes.iter().enumerate() {
                let to_spec = alphabet.component(&to.kind).expect("variant of alphabet");
                for inp in to_spec.ports.iter().filter(|p| p.direction == Direction::In) {
                    slots.push(Edge {
                        from: PortRef::new(&ids[i], &out.name),
                        to: PortRef::new(&ids[j], &inp.name),
                    });
                }
            }
        }
    }
    if slots.len() > MAX_EDGE_SLOTS {
        return Err(LanguageError::BudgetExceeded { ceiling });
    }
    let node_map: BTreeMap<String, Node> = ids
        .iter()
        .cloned()
        .zip(nodes.iter().map(|n| (*n).clone()))
        .collect();
    for mask in 0u64..(1u64 << slots.len()) {
        *expansions += 1;
        if *expansions > ceiling {
            return Err(LanguageError::BudgetExceeded { ceiling });
        }
        let edges: BTreeSet<Edge> = slots
            .iter()
            .enumerate()
            .filter(|(b, _)| mask >> b & 1 == 1)
            .map(|(_, e)| e.clone())
            .collect();
        let c = Concept::from_parts(node_map.clone(), edges).expect("slots reference nodes");
        if rules.admits(&c) {
            let canon = canonical_form(&c);
            found
                .entry((canon.node_count(), to_text(&canon)))
                .or_insert(canon);
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::alphabet::AlphabetBuilder;
    use crate::language::rules::{Cmp, Constraint, Rule, RuleCategory};

    fn nand_alphabet() -> Alphabet {
        AlphabetBuilder::new()
            .connective("wire")
            .component(
                "NAND",
                &[
                    ("x", Direction::In, false),
                    ("y", Direction::In, false),
                    ("z", Direction::Out, false),
                ],
                &[],
            )
            .build()
            .unwrap()
    }

    #[test]
    fn bound_zero_yields_only_empty() {
        let rs = RuleSet::new(nand_alphabet(), vec![]).unwrap();
        assert_eq!(interpret(&rs, 0).unwrap(), vec![Concept::empty()]);
    }

    #[test]
    fn nand_only_no_edges_bound_one() {
        let rs = RuleSet::new(
            nand_alphabet(),
            vec![Rule::new(
                "no-wires",
                RuleCategory::Formal,
                Constraint::EdgeCount { cmp: Cmp::Eq, value: 0 },
            )],
        )
        .unwrap();
        let got = interpret(&rs, 1).unwrap();
        assert_eq!(got.len(), 2);
        assert!(got[0].is_empty());
        assert_eq!(got[1].node_count(), 1);
        assert!(got.iter().all(|c| rs.is_permissible(c).unwrap()));
    }

    #[test]
    fn ceiling_is_enforced() {
        let rs = RuleSet::new(nand_alphabet(), vec![]).unwrap();
        assert!(matches!(
            interpret_with_ceiling(&rs, 2, 10),
            Err(LanguageError::BudgetExceeded { ceiling: 10 })
        ));
    }

    #[test]
    fn single_nand_unconstrained_counts_self_loops() {
        // One NAND has two wiring slots: z->x and z->y.
        let rs = RuleSet::new(nand_alphabet(), vec![]).unwrap();
        let got = interpret(&rs, 1).unwrap();
        // empty, bare, z->x, z->y, both.
        assert_eq!(got.len(), 5);
    }

    #[test]
    fn multiset_iteration_covers_combinations_with_repetition() {
        let mut m = vec![0, 0];
        let mut seen = vec![m.clone()];
        while next_multiset(&mut m, 3) {
            seen.push(m.clone());
        }
        assert_eq!(seen.len(), 6);
    }
}
