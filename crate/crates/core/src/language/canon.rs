//! Graph canonicalization for concepts.
//!
//! Color refinement partitions the nodes by an isomorphism-invariant
//! signature; remaining ties are broken by individualizing each candidate of
//! the first non-singleton cell and recursing. The canonical labeling is the
//! one whose relabeled graph is lexicographically smallest. Branches that only
//! differ by swapping structural twins are skipped, since the swap is an
//! automorphism.

use std::collections::{BTreeMap, BTreeSet};

use super::concept::{node_id, Concept, Edge, Node, PortRef};

type IdxEdge<'a> = (usize, &'a str, usize, &'a str);
type Signature<'a> = (usize, Vec<(u8, &'a str, &'a str, usize)>);

struct Indexed<'a> {
    nodes: Vec<&'a Node>,
    edges: Vec<IdxEdge<'a>>,
    edge_set: BTreeSet<IdxEdge<'a>>,
    /// Per node: (direction, own port, other port, other node).
    incident: Vec<Vec<(u8, &'a str, &'a str, usize)>>,
}

impl<'a> Indexed<'a> {
    fn new(c: &'a Concept) -> Self {
        let index: BTreeMap<&str, usize> = c
            .nodes()
            .keys()
            .enumerate()
            .map(|(i, k)| (k.as_str(), i))
            .collect();
        let nodes: Vec<&Node> = c.nodes().values().collect();
        let mut incident = vec![Vec::new(); nodes.len()];
        let mut edges = Vec::with_capacity(c.edges().len());
        for e in c.edges() {
            let f = index[e.from.node.as_str()];
            let t = index[e.to.node.as_str()];
            edges.push((f, e.from.port.as_str(), t, e.to.port.as_str()));
            incident[f].push((0u8, e.from.port.as_str(), e.to.port.as_str(), t));
            incident[t].push((1u8, e.to.port.as_str(), e.from.port.as_str(), f));
        }
        let edge_set = edges.iter().copied().collect();
        Indexed {
            nodes,
            edges,
            edge_set,
            incident,
        }
    }

    fn refine(&self, colors: &mut Vec<usize>) {
        let mut classes = count_classes(colors);
        loop {
            let sigs: Vec<Signature> = (0..colors.len())
                .map(|v| {
                    let mut nb: Vec<_> = self.incident[v]
                        .iter()
                        .map(|&(d, p, q, u)| (d, p, q, colors[u]))
                        .collect();
                    nb.sort_unstable();
                    (colors[v], nb)
                })
                .collect();
            *colors = rank(&sigs);
            let now = count_classes(colors);
            if now == classes {
                return;
            }
            classes = now;
        }
    }

    fn is_twin(&self, u: usize, v: usize) -> bool {
        let swap = |x: usize| {
            if x == u {
                v
            } else if x == v {
                u
            } else {
                x
            }
        };
        self.edges
            .iter()
            .all(|&(f, p, t, q)| self.edge_set.contains(&(swap(f), p, swap(t), q)))
    }

    fn key(&self, order: &[usize]) -> (Vec<&'a Node>, Vec<IdxEdge<'a>>) {
        let mut pos = vec![0; order.len()];
        for (i, &v) in order.iter().enumerate() {
            pos[v] = i;
        }
        let nodes = order.iter().map(|&v| self.nodes[v]).collect();
        let mut edges: Vec<_> = self
            .edges
            .iter()
            .map(|&(f, p, t, q)| (pos[f], p, pos[t], q))
            .collect();
        edges.sort_unstable();
        (nodes, edges)
    }

    fn search(&self, colors: Vec<usize>, best: &mut Option<(Vec<&'a Node>, Vec<IdxEdge<'a>>)>) {
        let mut sizes = BTreeMap::new();
        for &c in &colors {
            *sizes.entry(c).or_insert(0usize) += 1;
        }
        let target = sizes.iter().find(|(_, &n)| n > 1).map(|(&c, _)| c);
        let Some(target) = target else {
            let mut order: Vec<usize> = (0..colors.len()).collect();
            order.sort_by_key(|&v| colors[v]);
            let key = self.key(&order);
            if best.as_ref().is_none_or(|b| key < *b) {
                *best = Some(key);
            }
            return;
        };
        let cell: Vec<usize> = (0..colors.len()).filter(|&v| colors[v] == target).collect();
        let mut reps: Vec<usize> = Vec::new();
        for &v in &cell {
            if reps.iter().any(|&r| self.is_twin(r, v)) {
                continue;
            }
            reps.push(v);
            let sigs: Vec<(usize, bool)> = (0..colors.len())
                .map(|u| (colors[u], u != v))
                .collect();
            let mut next = rank(&sigs);
            self.refine(&mut next);
            self.search(next, best);
        }
    }
}

fn rank<T: Ord>(sigs: &[T]) -> Vec<usize> {
    let mut sorted: Vec<&T> = sigs.iter().collect();
    sorted.sort_unstable();
    sorted.dedup();
    sigs.iter()
        .map(|s| sorted.binary_search(&s).expect("present"))
        .collect()
}

fn count_classes(colors: &[usize]) -> usize {
    colors.iter().collect::<BTreeSet<_>>().len()
}

/// Relabels `c` so that isomorphic concepts become identical values.
pub fn canonical_form(c: &Concept) -> Concept {
    if c.is_empty() {
        return Concept::empty();
    }
    let g = Indexed::new(c);
    let mut colors = rank(&g.nodes);
    g.refine(&mut colors);
    let mut best = None;
    g.search(colors, &mut best);
    let (nodes, edges) = best.expect("non-empty concept has a labeling");
    let nodes: BTreeMap<String, Node> = nodes
        .into_iter()
        .enumerate()
        .map(|(i, n)| (node_id(i), n.clone()))
        .collect();
    let edges = edges.into_iter().map(|(f, p, t, q)| Edge {
        from: PortRef::new(&node_id(f), p),
        to: PortRef::new(&node_id(t), q),
    });
    Concept::from_parts(nodes, edges).expect("relabeling preserves references")
}

/// Node and edge insertions and deletions separating the canonical forms
/// of `a` and `b`, aligned by canonical node id.
pub fn edit_distance(a: &Concept, b: &Concept) -> usize {
    let (a, b) = (canonical_form(a), canonical_form(b));
    let nodes = |c: &Concept| c.nodes().iter().map(|(k, v)| (k.clone(), v.clone())).collect::<BTreeSet<_>>();
    let (na, nb) = (nodes(&a), nodes(&b));
    na.symmetric_difference(&nb).count() + a.edges().symmetric_difference(b.edges()).count()
}
