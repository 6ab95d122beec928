use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::alphabet::{Alphabet, Direction};
use super::LanguageError;
use crate::hash::{content_hash, ContentHash};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Node {
    pub kind: String,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub props: BTreeMap<String, i64>,
}

impl Node {
    pub fn new(kind: &str) -> Self {
        Node {
            kind: kind.to_string(),
            props: BTreeMap::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortRef {
    pub node: String,
    pub port: String,
}

impl PortRef {
    pub fn new(node: &str, port: &str) -> Self {
        PortRef {
            node: node.to_string(),
            port: port.to_string(),
        }
    }
}

impl fmt::Display for PortRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}.{}", self.node, self.port)
    }
}

/// A directed connection from an output port to an input port.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Edge {
    pub from: PortRef,
    pub to: PortRef,
}

impl Edge {
    pub fn new(from: (&str, &str), to: (&str, &str)) -> Self {
        Edge {
            from: PortRef::new(from.0, from.1),
            to: PortRef::new(to.0, to.1),
        }
    }
}

/// `((from_id, from_port), (to_id, to_port))` as accepted by [`Concept::build`].
pub type Wire<'a> = ((&'a str, &'a str), (&'a str, &'a str));

/// A typed component graph. The concept with no nodes is the empty concept.
///
/// Edges always reference existing nodes; this is enforced on construction
/// and on load.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(try_from = "RawConcept")]
pub struct Concept {
    nodes: BTreeMap<String, Node>,
    edges: BTreeSet<Edge>,
}

#[derive(Deserialize)]
struct RawConcept {
    #[serde(default)]
    nodes: BTreeMap<String, Node>,
    #[serde(default)]
    edges: BTreeSet<Edge>,
}

impl TryFrom<RawConcept> for Concept {
    type Error = LanguageError;

    fn try_from(raw: RawConcept) -> Result<Self, Self::Error> {
        Concept::from_parts(raw.nodes, raw.edges)
    }
}

impl Concept {
    /// The empty concept.
    pub fn empty() -> Self {
        Concept::default()
    }

    pub fn from_parts(
        nodes: BTreeMap<String, Node>,
        edges: impl IntoIterator<Item = Edge>,
    ) -> Result<Self, LanguageError> {
        let edges: BTreeSet<Edge> = edges.into_iter().collect();
        for id in nodes.keys() {
            if id.is_empty() {
                return Err(LanguageError::Invalid("empty instance id".into()));
            }
        }
        for e in &edges {
            for end in [&e.from, &e.to] {
                if !nodes.contains_key(&end.node) {
                    return Err(LanguageError::UnknownReference(end.to_string()));
                }
            }
        }
        Ok(Concept { nodes, edges })
    }

    /// Convenience constructor: `nodes` are `(id, kind)` pairs and `edges`
    /// are `((from_id, from_port), (to_id, to_port))`.
    pub fn build(nodes: &[(&str, &str)], edges: &[Wire]) -> Result<Self, LanguageError> {
        let mut map = BTreeMap::new();
        for &(id, kind) in nodes {
            if map.insert(id.to_string(), Node::new(kind)).is_some() {
                return Err(LanguageError::Invalid(format!("duplicate instance id {id}")));
            }
        }
        Concept::from_parts(map, edges.iter().map(|&(f, t)| Edge::new(f, t)))
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &BTreeMap<String, Node> {
        &self.nodes
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn node(&self, id: &str) -> Option<&Node> {
        self.nodes.get(id)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn count_kind(&self, kind: &str) -> usize {
        self.nodes.values().filter(|n| n.kind == kind).count()
    }

    /// Ids of nodes of `kind`, in id order.
    pub fn ids_of_kind<'a>(&'a self, kind: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.nodes
            .iter()
            .filter(move |(_, n)| n.kind == kind)
            .map(|(id, _)| id.as_str())
    }

    /// Edges driving the given input port.
    pub fn drivers<'a>(&'a self, node: &'a str, port: &'a str) -> impl Iterator<Item = &'a Edge> {
        self.edges
            .iter()
            .filter(move |e| e.to.node == node && e.to.port == port)
    }

    pub fn hash(&self) -> ContentHash {
        content_hash(self)
    }

    /// Checks every symbol and port reference against `alphabet`.
    pub fn validate(&self, alphabet: &Alphabet) -> Result<(), LanguageError> {
        for node in self.nodes.values() {
            let spec = alphabet
                .component(&node.kind)
                .ok_or_else(|| LanguageError::UnknownSymbol(node.kind.clone()))?;
            for (prop, value) in &node.props {
                let domain = alphabet
                    .property_domain(prop)
                    .ok_or_else(|| LanguageError::UnknownSymbol(prop.clone()))?;
                if !domain.contains(value) {
                    return Err(LanguageError::Invalid(format!(
                        "value {value} outside domain of {prop}"
                    )));
                }
            }
            for prop in &spec.properties {
                if !node.props.contains_key(prop) {
                    return Err(LanguageError::Invalid(format!(
                        "{} node lacks property {prop}",
                        node.kind
                    )));
                }
            }
        }
        for e in &self.edges {
            for (end, dir) in [(&e.from, Direction::Out), (&e.to, Direction::In)] {
                let kind = &self.nodes[&end.node].kind;
                let spec = alphabet.component(kind).expect("checked above");
                match spec.port(&end.port) {
                    Some(p) if p.direction == dir => {}
                    Some(_) => {
                        return Err(LanguageError::Invalid(format!(
                            "port {end} used in the wrong direction"
                        )))
                    }
                    None if alphabet.contains(&end.port) => {
                        return Err(LanguageError::UnknownReference(end.to_string()))
                    }
                    None => return Err(LanguageError::UnknownSymbol(end.port.clone())),
                }
            }
        }
        Ok(())
    }

    pub(crate) fn fresh_id(&self) -> String {
        (self.nodes.len()..)
            .map(node_id)
            .find(|id| !self.nodes.contains_key(id))
            .expect("unbounded id supply")
    }

    pub(crate) fn insert_node(&mut self, node: Node) -> String {
        let id = self.fresh_id();
        self.nodes.insert(id.clone(), node);
        id
    }

    pub(crate) fn node_mut(&mut self, id: &str) -> Option<&mut Node> {
        self.nodes.get_mut(id)
    }

    /// Returns false when the edge already exists.
    pub(crate) fn insert_edge(&mut self, edge: Edge) -> Result<bool, LanguageError> {
        for end in [&edge.from, &edge.to] {
            if !self.nodes.contains_key(&end.node) {
                return Err(LanguageError::UnknownReference(end.to_string()));
            }
        }
        Ok(self.edges.insert(edge))
    }

    pub(crate) fn remove_node(&mut self, id: &str) -> bool {
        if self.nodes.remove(id).is_none() {
            return false;
        }
        self.edges.retain(|e| e.from.node != id && e.to.node != id);
        true
    }

    /// Disjoint union; ids of `other` are renamed to fresh ids.
    pub(crate) fn absorb(&mut self, other: &Concept) -> BTreeMap<String, String> {
        let mut rename = BTreeMap::new();
        for (id, node) in &other.nodes {
            let fresh = self.insert_node(node.clone());
            rename.insert(id.clone(), fresh);
        }
        for e in &other.edges {
            self.edges.insert(Edge {
                from: PortRef::new(&rename[&e.from.node], &e.from.port),
                to: PortRef::new(&rename[&e.to.node], &e.to.port),
            });
        }
        rename
    }
}

/// Instance ids used for canonical and freshly created nodes.
pub fn node_id(index: usize) -> String {
    format!("n{index:03}")
}
