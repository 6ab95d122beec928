use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::environment::{circuit, compile_concept, scenario_holds, DomainKind, ModelSet};
use crate::language::{Concept, Edge, Node};
use crate::verification::{RequirementSet, Scenario};

/// Feature weights of the ranking handle. Unknown names weigh zero.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct UtilityParams {
    pub weights: BTreeMap<String, f64>,
}

impl UtilityParams {
    pub fn for_domain(domain: DomainKind) -> Self {
        let w: &[(&str, f64)] = match domain {
            DomainKind::Circuit => &[
                ("complete", 1.0),
                ("gates", -0.1),
                ("locked", -1.0),
                ("lookahead-discount", 0.3),
                ("potential", 1.0),
            ],
            DomainKind::Pipeline => &[("potential", 1.0), ("satisfied", 1.0), ("stages", -0.1)],
        };
        UtilityParams {
            weights: w.iter().map(|(k, v)| (k.to_string(), *v)).collect(),
        }
    }

    pub fn weight(&self, feature: &str) -> f64 {
        self.weights.get(feature).copied().unwrap_or(0.0)
    }
}

/// A truth-table row one sink is expected to show, as a bit of the
/// four-row signal tables.
struct Row {
    sink: String,
    bit: u8,
    value: bool,
    weight: f64,
}

/// Scores concepts by how promising they look under the machine's own
/// requirements.
pub struct Ranker {
    domain: DomainKind,
    params: UtilityParams,
    requirements: RequirementSet,
    env: ModelSet,
    rows: Vec<Row>,
}

impl Ranker {
    pub fn new(params: &UtilityParams, requirements: &RequirementSet, env: &ModelSet) -> Self {
        let mut rows = Vec::new();
        for r in requirements.requirements() {
            let Scenario::TruthRow { inputs, outputs } = &r.scenario else {
                continue;
            };
            let (Some(a), Some(b)) = (inputs.get("A"), inputs.get("B")) else {
                continue;
            };
            if inputs.len() != 2 || !(0..2).contains(a) || !(0..2).contains(b) {
                continue;
            }
            for (sink, v) in outputs {
                rows.push(Row {
                    sink: sink.clone(),
                    bit: (2 * a + b) as u8,
                    value: *v == 1,
                    weight: r.weight,
                });
            }
        }
        Ranker {
            domain: env.domain,
            params: params.clone(),
            requirements: requirements.clone(),
            env: env.clone(),
            rows,
        }
    }

    pub fn features(&self, c: &Concept) -> BTreeMap<&'static str, f64> {
        match self.domain {
            DomainKind::Circuit => self.circuit_features(c),
            DomainKind::Pipeline => self.pipeline_features(c),
        }
    }

    pub fn score(&self, c: &Concept) -> f64 {
        self.features(c)
            .iter()
            .map(|(k, v)| self.params.weight(k) * v)
            .sum()
    }

    fn matched(&self, sink: &str, mask: u8) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.sink == sink && ((mask >> r.bit) & 1 == 1) == r.value)
            .map(|r| r.weight)
            .sum()
    }

    /// Cheapest NAND tree over the existing signals reaching each of the
    /// sixteen two-input functions, counting gates without sharing.
    fn tree_costs(pool: &BTreeSet<u8>) -> [Option<u32>; 16] {
        let mut cost = [None; 16];
        for m in pool {
            cost[*m as usize] = Some(0);
        }
        loop {
            let mut changed = false;
            for x in 0..16u8 {
                for y in x..16u8 {
                    let (Some(cx), Some(cy)) = (cost[x as usize], cost[y as usize]) else {
                        continue;
                    };
                    let m = (!(x & y) & 0xF) as usize;
                    let c = if x == y { cx + 1 } else { cx + cy + 1 };
                    if cost[m].is_none_or(|old| c < old) {
                        cost[m] = Some(c);
                        changed = true;
                    }
                }
            }
            if !changed {
                return cost;
            }
        }
    }

    fn circuit_features(&self, c: &Concept) -> BTreeMap<&'static str, f64> {
        let mut f = BTreeMap::new();
        let Some(signals) = circuit::signals(c) else {
            f.insert("potential", f64::MIN);
            return f;
        };
        let sinks: BTreeSet<&str> = circuit::SINKS.into_iter().collect();
        let mut pool: BTreeSet<u8> = BTreeSet::new();
        let mut gate_masks: BTreeSet<u8> = BTreeSet::new();
        for (id, mask) in &signals {
            let kind = c.nodes()[id].kind.as_str();
            if !sinks.contains(kind) {
                pool.insert(*mask);
            }
            if kind == circuit::GATE {
                gate_masks.insert(*mask);
            }
        }
        let costs = Self::tree_costs(&pool);
        let discount = self.params.weight("lookahead-discount");
        let (mut complete, mut locked, mut potential) = (0.0, 0.0, 0.0);
        for sink in circuit::SINKS {
            let full = self.matched(sink, 0) + self.matched(sink, 0xF);
            let wired: Option<f64> = c
                .ids_of_kind(sink)
                .filter_map(|id| signals.get(id))
                .map(|m| self.matched(sink, *m))
                .reduce(f64::max);
            match wired {
                Some(v) => {
                    potential += v;
                    if v >= full {
                        complete += 1.0;
                    } else {
                        locked += 1.0;
                    }
                }
                None => {
                    potential += (0..16u8)
                        .filter_map(|m| costs[m as usize].map(|k| self.matched(sink, m) - discount * k as f64))
                        .fold(f64::MIN, f64::max)
                }
            }
        }
        f.insert("complete", complete);
        f.insert("gates", c.count_kind(circuit::GATE) as f64);
        f.insert("locked", locked);
        f.insert("novelty", gate_masks.len() as f64);
        f.insert("potential", potential);
        f
    }

    fn satisfied(&self, c: &Concept) -> f64 {
        match compile_concept(c, self.domain, self.env.time()) {
            Ok(compiled) => self
                .requirements
                .requirements()
                .iter()
                .filter(|r| scenario_holds(&compiled, &r.scenario))
                .map(|r| r.weight)
                .sum(),
            Err(_) => 0.0,
        }
    }

    /// Best score among the concept itself and its completions by a
    /// rendering stage and a sink behind any stage nothing reads from.
    fn pipeline_features(&self, c: &Concept) -> BTreeMap<&'static str, f64> {
        let satisfied = self.satisfied(c);
        let mut potential = satisfied;
        let read: BTreeSet<&str> = c.edges().iter().map(|e| e.from.node.as_str()).collect();
        for (id, node) in c.nodes() {
            if read.contains(id.as_str()) || node.kind == "sink" {
                continue;
            }
            let tail: &[&str] = if node.kind == "show" { &["sink"] } else { &["show", "sink"] };
            let mut done = c.clone();
            let mut prev = id.clone();
            for kind in tail {
                let next = done.insert_node(Node::new(kind));
                done.insert_edge(Edge::new((&prev, "o"), (&next, "i"))).expect("fresh nodes");
                prev = next;
            }
            potential = potential.max(self.satisfied(&done));
        }
        [("potential", potential), ("satisfied", satisfied), ("stages", c.node_count() as f64)].into()
    }
}
