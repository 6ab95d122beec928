//! Rules and the restricted constraint language.
//!
//! Constraints are boolean combinations of structural atoms. The only
//! quantification is over the nodes and edges of the concept under test, so
//! evaluation always terminates.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::alphabet::Alphabet;
use super::concept::Concept;
use super::LanguageError;
use crate::hash::{content_hash, ContentHash};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Cmp {
    Lt,
    Le,
    Eq,
    Ne,
    Ge,
    Gt,
}

impl Cmp {
    pub fn holds<T: Ord>(self, lhs: T, rhs: T) -> bool {
        match self {
            Cmp::Lt => lhs < rhs,
            Cmp::Le => lhs <= rhs,
            Cmp::Eq => lhs == rhs,
            Cmp::Ne => lhs != rhs,
            Cmp::Ge => lhs >= rhs,
            Cmp::Gt => lhs > rhs,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Constraint {
    True,
    False,
    Not(Box<Constraint>),
    All(Vec<Constraint>),
    Any(Vec<Constraint>),
    /// Number of nodes (of `kind`, or of any kind) compared against `value`.
    NodeCount {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kind: Option<String>,
        cmp: Cmp,
        value: usize,
    },
    EdgeCount { cmp: Cmp, value: usize },
    /// Some edge matches every given endpoint field.
    EdgeExists {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from_kind: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        from_port: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        to_kind: Option<String>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        to_port: Option<String>,
    },
    /// Every node has one of the listed kinds.
    OnlyKinds(Vec<String>),
    /// Every node (of `kind`) carries `property` and its value satisfies `cmp value`.
    Property {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        kind: Option<String>,
        property: String,
        cmp: Cmp,
        value: i64,
    },
    /// Every input port is driven by at most `n` edges.
    MaxFanIn(usize),
    /// The edge relation has no directed cycle.
    Acyclic,
    /// Every node of kind `whole` is edge-connected to a node of kind `part`.
    HasPart { whole: String, part: String },
}

impl Constraint {
    pub fn negate(c: Constraint) -> Self {
        Constraint::Not(Box::new(c))
    }

    pub fn count(kind: &str, cmp: Cmp, value: usize) -> Self {
        Constraint::NodeCount {
            kind: Some(kind.to_string()),
            cmp,
            value,
        }
    }

    pub fn evaluate(&self, c: &Concept) -> bool {
        match self {
            Constraint::True => true,
            Constraint::False => false,
            Constraint::Not(inner) => !inner.evaluate(c),
            Constraint::All(items) => items.iter().all(|i| i.evaluate(c)),
            Constraint::Any(items) => items.iter().any(|i| i.evaluate(c)),
            Constraint::NodeCount { kind, cmp, value } => {
                let n = match kind {
                    Some(k) => c.count_kind(k),
                    None => c.node_count(),
                };
                cmp.holds(n, *value)
            }
            Constraint::EdgeCount { cmp, value } => cmp.holds(c.edges().len(), *value),
            Constraint::EdgeExists {
                from_kind,
                from_port,
                to_kind,
                to_port,
            } => {
                let matches = |want: &Option<String>, have: &str| {
                    want.as_deref().is_none_or(|w| w == have)
                };
                c.edges().iter().any(|e| {
                    matches(from_kind, &c.nodes()[&e.from.node].kind)
                        && matches(from_port, &e.from.port)
                        && matches(to_kind, &c.nodes()[&e.to.node].kind)
                        && matches(to_port, &e.to.port)
                })
            }
            Constraint::OnlyKinds(kinds) => c.nodes().values().all(|n| kinds.contains(&n.kind)),
            Constraint::Property {
                kind,
                property,
                cmp,
                value,
            } => c
                .nodes()
                .values()
                .filter(|n| kind.as_deref().is_none_or(|k| k == n.kind))
                .all(|n| n.props.get(property).is_some_and(|v| cmp.holds(*v, *value))),
            Constraint::MaxFanIn(limit) => {
                let mut fan_in: BTreeMap<(&str, &str), usize> = BTreeMap::new();
                for e in c.edges() {
                    *fan_in.entry((&e.to.node, &e.to.port)).or_default() += 1;
                }
                fan_in.values().all(|&n| n <= *limit)
            }
            Constraint::Acyclic => is_acyclic(c),
            Constraint::HasPart { whole, part } => c
                .nodes()
                .iter()
                .filter(|(_, n)| &n.kind == whole)
                .all(|(id, _)| {
                    c.edges().iter().any(|e| {
                        (e.from.node == *id && c.nodes()[&e.to.node].kind == *part)
                            || (e.to.node == *id && c.nodes()[&e.from.node].kind == *part)
                    })
                }),
        }
    }

    /// Every alphabet symbol the constraint mentions.
    pub fn symbols(&self) -> BTreeSet<&str> {
        let mut out = BTreeSet::new();
        self.collect_symbols(&mut out);
        out
    }

    fn collect_symbols<'a>(&'a self, out: &mut BTreeSet<&'a str>) {
        match self {
            Constraint::True
            | Constraint::False
            | Constraint::EdgeCount { .. }
            | Constraint::MaxFanIn(_)
            | Constraint::Acyclic => {}
            Constraint::Not(inner) => inner.collect_symbols(out),
            Constraint::All(items) | Constraint::Any(items) => {
                items.iter().for_each(|i| i.collect_symbols(out))
            }
            Constraint::NodeCount { kind, .. } => out.extend(kind.as_deref()),
            Constraint::EdgeExists {
                from_kind,
                from_port,
                to_kind,
                to_port,
            } => {
                for s in [from_kind, from_port, to_kind, to_port] {
                    out.extend(s.as_deref());
                }
            }
            Constraint::OnlyKinds(kinds) => out.extend(kinds.iter().map(String::as_str)),
            Constraint::Property { kind, property, .. } => {
                out.extend(kind.as_deref());
                out.insert(property);
            }
            Constraint::HasPart { whole, part } => {
                out.insert(whole);
                out.insert(part);
            }
        }
    }
}

fn is_acyclic(c: &Concept) -> bool {
    // Kahn's algorithm over node ids.
    let mut indegree: BTreeMap<&str, usize> = c.nodes().keys().map(|k| (k.as_str(), 0)).collect();
    let mut succ: BTreeMap<&str, Vec<&str>> = BTreeMap::new();
    let mut seen_pairs = BTreeSet::new();
    for e in c.edges() {
        if seen_pairs.insert((e.from.node.as_str(), e.to.node.as_str())) {
            *indegree.get_mut(e.to.node.as_str()).expect("edge endpoints exist") += 1;
            succ.entry(&e.from.node).or_default().push(&e.to.node);
        }
    }
    let mut ready: Vec<&str> = indegree
        .iter()
        .filter(|(_, &d)| d == 0)
        .map(|(k, _)| *k)
        .collect();
    let mut visited = 0;
    while let Some(n) = ready.pop() {
        visited += 1;
        for &m in succ.get(n).map(Vec::as_slice).unwrap_or_default() {
            let d = indegree.get_mut(m).expect("edge endpoints exist");
            *d -= 1;
            if *d == 0 {
                ready.push(m);
            }
        }
    }
    visited == c.node_count()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleCategory {
    /// Well-formedness of the modeling language.
    Formal,
    /// Domain knowledge about particular concepts (part-whole and the like).
    Conceptual,
}

/// A rule holds on a concept when its pattern does not match, or its
/// constraint is satisfied.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Rule {
    pub id: String,
    pub category: RuleCategory,
    #[serde(default = "always")]
    pub pattern: Constraint,
    pub constraint: Constraint,
}

fn always() -> Constraint {
    Constraint::True
}

impl Rule {
    pub fn new(id: &str, category: RuleCategory, constraint: Constraint) -> Self {
        Rule {
            id: id.to_string(),
            category,
            pattern: Constraint::True,
            constraint,
        }
    }

    pub fn when(mut self, pattern: Constraint) -> Self {
        self.pattern = pattern;
        self
    }

    pub fn holds(&self, c: &Concept) -> bool {
        !self.pattern.evaluate(c) || self.constraint.evaluate(c)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawRuleSet")]
pub struct RuleSet {
    alphabet: Alphabet,
    rules: Vec<Rule>,
}

#[derive(Deserialize)]
struct RawRuleSet {
    alphabet: Alphabet,
    rules: Vec<Rule>,
}

impl TryFrom<RawRuleSet> for RuleSet {
    type Error = LanguageError;

    fn try_from(raw: RawRuleSet) -> Result<Self, Self::Error> {
        RuleSet::new(raw.alphabet, raw.rules)
    }
}

impl RuleSet {
    pub fn new(alphabet: Alphabet, rules: Vec<Rule>) -> Result<Self, LanguageError> {
        let mut ids = BTreeSet::new();
        for rule in &rules {
            if !ids.insert(rule.id.as_str()) {
                return Err(LanguageError::DuplicateRule(rule.id.clone()));
            }
            for sym in rule.pattern.symbols().into_iter().chain(rule.constraint.symbols()) {
                if !alphabet.contains(sym) {
                    return Err(LanguageError::UnknownSymbol(sym.to_string()));
                }
            }
        }
        Ok(RuleSet { alphabet, rules })
    }

    pub fn alphabet(&self) -> &Alphabet {
        &self.alphabet
    }

    pub fn rules(&self) -> &[Rule] {
        &self.rules
    }

    pub fn rule(&self, id: &str) -> Option<&Rule> {
        self.rules.iter().find(|r| r.id == id)
    }

    pub fn hash(&self) -> ContentHash {
        content_hash(self)
    }

    pub fn with_rule(&self, rule: Rule) -> Result<Self, LanguageError> {
        let mut rules = self.rules.clone();
        rules.push(rule);
        RuleSet::new(self.alphabet.clone(), rules)
    }

    pub fn without_rule(&self, id: &str) -> Result<Self, LanguageError> {
        if self.rule(id).is_none() {
            return Err(LanguageError::UnknownReference(id.to_string()));
        }
        let rules = self.rules.iter().filter(|r| r.id != id).cloned().collect();
        RuleSet::new(self.alphabet.clone(), rules)
    }

    pub fn replacing_rule(&self, rule: Rule) -> Result<Self, LanguageError> {
        let pos = self
            .rules
            .iter()
            .position(|r| r.id == rule.id)
            .ok_or_else(|| LanguageError::UnknownReference(rule.id.clone()))?;
        let mut rules = self.rules.clone();
        rules[pos] = rule;
        RuleSet::new(self.alphabet.clone(), rules)
    }

    /// Membership test of the interpretation function. The empty concept is
    /// always permissible.
    pub fn is_permissible(&self, c: &Concept) -> Result<bool, LanguageError> {
        c.validate(&self.alphabet)?;
        Ok(self.admits(c))
    }

    /// Rule check only; the caller guarantees `c` is valid for the alphabet.
    pub(crate) fn admits(&self, c: &Concept) -> bool {
        c.is_empty() || self.rules.iter().all(|r| r.holds(c))
    }

    /// Ids of rules violated by `c`.
    pub fn violations(&self, c: &Concept) -> Vec<&str> {
        if c.is_empty() {
            return Vec::new();
        }
        self.rules
            .iter()
            .filter(|r| !r.holds(c))
            .map(|r| r.id.as_str())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::language::alphabet::{AlphabetBuilder, Direction};

    fn car_alphabet() -> Alphabet {
        AlphabetBuilder::new()
            .component("car", &[("mount", Direction::In, false)], &[])
            .component("motor", &[("shaft", Direction::Out, false)], &[])
            .component("wheel", &[("hub", Direction::Out, false)], &[])
            .build()
            .unwrap()
    }

    #[test]
    fn has_part_requires_a_connected_part() {
        let rule = Rule::new(
            "car-has-motor",
            RuleCategory::Conceptual,
            Constraint::HasPart {
                whole: "car".into(),
                part: "motor".into(),
            },
        );
        let rs = RuleSet::new(car_alphabet(), vec![rule]).unwrap();
        let bare = Concept::build(&[("c", "car"), ("m", "motor")], &[]).unwrap();
        let built =
            Concept::build(&[("c", "car"), ("m", "motor")], &[(("m", "shaft"), ("c", "mount"))])
                .unwrap();
        let wheel_only =
            Concept::build(&[("c", "car"), ("w", "wheel")], &[(("w", "hub"), ("c", "mount"))])
                .unwrap();
        assert!(!rs.is_permissible(&bare).unwrap());
        assert!(rs.is_permissible(&built).unwrap());
        assert!(!rs.is_permissible(&wheel_only).unwrap());
        assert!(rs.is_permissible(&Concept::empty()).unwrap());
    }

    #[test]
    fn unknown_symbols_are_rejected() {
        let rs = RuleSet::new(car_alphabet(), vec![]).unwrap();
        let alien = Concept::build(&[("x", "boat")], &[]).unwrap();
        assert!(matches!(
            rs.is_permissible(&alien),
            Err(LanguageError::UnknownSymbol(s)) if s == "boat"
        ));
        let bad_rule = Rule::new("r", RuleCategory::Formal, Constraint::count("boat", Cmp::Eq, 0));
        assert!(matches!(
            RuleSet::new(car_alphabet(), vec![bad_rule]),
            Err(LanguageError::UnknownSymbol(_))
        ));
    }

    #[test]
    fn duplicate_rule_ids_rejected() {
        let r = Rule::new("r", RuleCategory::Formal, Constraint::True);
        assert!(matches!(
            RuleSet::new(car_alphabet(), vec![r.clone(), r]),
            Err(LanguageError::DuplicateRule(_))
        ));
    }

    #[test]
    fn acyclicity_detects_loops() {
        let a = AlphabetBuilder::new()
            .component("g", &[("i", Direction::In, false), ("o", Direction::Out, false)], &[])
            .build()
            .unwrap();
        let rs = RuleSet::new(a, vec![Rule::new("dag", RuleCategory::Formal, Constraint::Acyclic)])
            .unwrap();
        let chain = Concept::build(&[("a", "g"), ("b", "g")], &[(("a", "o"), ("b", "i"))]).unwrap();
        let ring = Concept::build(
            &[("a", "g"), ("b", "g")],
            &[(("a", "o"), ("b", "i")), (("b", "o"), ("a", "i"))],
        )
        .unwrap();
        let self_loop = Concept::build(&[("a", "g")], &[(("a", "o"), ("a", "i"))]).unwrap();
        assert!(rs.is_permissible(&chain).unwrap());
        assert!(!rs.is_permissible(&ring).unwrap());
        assert!(!rs.is_permissible(&self_loop).unwrap());
    }

    #[test]
    fn pattern_guards_constraint() {
        let rule = Rule::new("motors-cap", RuleCategory::Conceptual, Constraint::count("motor", Cmp::Le, 1))
            .when(Constraint::count("car", Cmp::Ge, 1));
        let two_motors = Concept::build(&[("a", "motor"), ("b", "motor")], &[]).unwrap();
        assert!(rule.holds(&two_motors));
        let with_car = Concept::build(&[("a", "motor"), ("b", "motor"), ("c", "car")], &[]).unwrap();
        assert!(!rule.holds(&with_car));
    }
}
