use std::collections::{BTreeMap, HashMap};

use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::action::{apply_sequence, ActionContext, DesignSequence};
use super::rank::Ranker;
use super::ExploreError;
use crate::hash::to_text;
use crate::language::{canonical_form, Concept};

/// Default ceiling on expansions per episode.
pub const DEFAULT_EXPANSION_CEILING: u64 = 100_000;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExploreParams {
    /// Concepts kept per round; 0 keeps all of them.
    pub beam_width: usize,
    /// Apply only this many randomly chosen sequences to each concept.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sample: Option<usize>,
    pub ceiling: u64,
}

impl Default for ExploreParams {
    fn default() -> Self {
        ExploreParams {
            beam_width: 8,
            sample: None,
            ceiling: DEFAULT_EXPANSION_CEILING,
        }
    }
}

struct Expanded {
    children: Vec<Concept>,
    submitted: bool,
}

/// Memo of expansions and scores for one fixed policy and ranking.
#[derive(Default)]
pub struct ExpansionCache {
    expanded: HashMap<Concept, Expanded>,
    scores: HashMap<Concept, f64>,
    texts: HashMap<Concept, String>,
    /// Expansions charged so far.
    pub spent: u64,
}

impl ExpansionCache {
    pub fn new() -> Self {
        Self::default()
    }

    fn score(&mut self, ranker: &Ranker, c: &Concept) -> f64 {
        if let Some(s) = self.scores.get(c) {
            return *s;
        }
        let s = ranker.score(c);
        self.scores.insert(c.clone(), s);
        s
    }

    fn text(&mut self, c: &Concept) -> String {
        self.texts.entry(c.clone()).or_insert_with(|| to_text(c)).clone()
    }

    /// Orders concepts best first; ties go to the smaller canonical text.
    pub fn rank(&mut self, ranker: &Ranker, concepts: Vec<Concept>) -> Vec<Concept> {
        let mut keyed: Vec<(f64, String, Concept)> = concepts
            .into_iter()
            .map(|c| (self.score(ranker, &c), self.text(&c), c))
            .collect();
        keyed.sort_by(|a, b| b.0.total_cmp(&a.0).then_with(|| a.1.cmp(&b.1)));
        keyed.into_iter().map(|k| k.2).collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RoundResult {
    /// Retained concepts, best first.
    pub concepts: Vec<Concept>,
    /// Input concepts some submitting sequence accepted, best first.
    pub submitted: Vec<Concept>,
    /// Expansions charged in this round.
    pub expansions: u64,
}

fn stream_seed(seed: u64, c: &Concept) -> u64 {
    let h = c.hash();
    u64::from_str_radix(&h[..16], 16).expect("hex digest") ^ seed
}

/// One round of exploration. Every sequence is applied to every input
/// concept; inputs stay in the pool, so a concept nothing applies to is kept.
/// The pool is deduplicated by canonical form and cut to the beam width.
/// An expansion is a new permissible concept produced by a sequence
/// application that was not already memoized.
pub fn apply_interpreter(
    c_in: &[Concept],
    ctx: &ActionContext,
    policy: &[DesignSequence],
    ranker: &Ranker,
    params: &ExploreParams,
    seed: u64,
    cache: &mut ExpansionCache,
) -> Result<RoundResult, ExploreError> {
    let mut pool: BTreeMap<Concept, ()> = BTreeMap::new();
    let mut submitted = Vec::new();
    let before = cache.spent;
    for c in c_in {
        let c = canonical_form(c);
        if !cache.expanded.contains_key(&c) {
            let chosen: Vec<usize> = match params.sample {
                Some(m) if m < policy.len() => {
                    let mut rng = ChaCha8Rng::seed_from_u64(stream_seed(seed, &c));
                    let mut v = sample(&mut rng, policy.len(), m).into_vec();
                    v.sort_unstable();
                    v
                }
                _ => (0..policy.len()).collect(),
            };
            let mut children: BTreeMap<Concept, ()> = BTreeMap::new();
            let mut sub = false;
            for i in chosen {
                let out = apply_sequence(&c, &policy[i], ctx);
                sub |= out.submitted;
                if let Some(n) = out.concept {
                    children.insert(canonical_form(&n), ());
                }
            }
            children.remove(&c);
            cache.spent += children.len() as u64;
            if cache.spent > params.ceiling {
                return Err(ExploreError::BudgetExceeded { ceiling: params.ceiling });
            }
            cache.expanded.insert(
                c.clone(),
                Expanded {
                    children: children.into_keys().collect(),
                    submitted: sub,
                },
            );
        }
        let e = &cache.expanded[&c];
        if e.submitted {
            submitted.push(c.clone());
        }
        for n in &e.children {
            pool.insert(n.clone(), ());
        }
        pool.insert(c, ());
    }
    let mut concepts = cache.rank(ranker, pool.into_keys().collect());
    if params.beam_width > 0 {
        concepts.truncate(params.beam_width);
    }
    let submitted = cache.rank(ranker, submitted);
    Ok(RoundResult {
        concepts,
        submitted,
        expansions: cache.spent - before,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::environment::{DomainKind, ModelSet};
    use crate::explore::{DesignAction, MachineState};
    use crate::language::RuleSet;
    use crate::verification::RequirementSet;

    struct Fixture {
        state: MachineState,
        env: ModelSet,
    }

    impl Fixture {
        fn new() -> Self {
            let env = DomainKind::Circuit.models();
            Fixture {
                state: MachineState::initial(&env, 0),
                env,
            }
        }

        fn round(&self, c_in: &[Concept], policy: &[DesignSequence], params: &ExploreParams) -> Result<RoundResult, ExploreError> {
            let ctx = self.ctx(&self.state.rules, &self.state.requirements);
            let ranker = Ranker::new(&self.state.utility, &self.state.requirements, &self.env);
            apply_interpreter(c_in, &ctx, policy, &ranker, params, 0, &mut ExpansionCache::new())
        }

        fn ctx<'a>(&'a self, rules: &'a RuleSet, requirements: &'a RequirementSet) -> ActionContext<'a> {
            ActionContext {
                rules,
                requirements,
                env: &self.env,
            }
        }
    }

    #[test]
    fn empty_policy_is_a_fixpoint() {
        let f = Fixture::new();
        let c_in = vec![Concept::empty(), crate::environment::circuit::half_adder()];
        let out = f.round(&c_in, &[], &ExploreParams::default()).unwrap();
        assert_eq!(out.concepts.len(), 2);
        assert_eq!(out.expansions, 0);
        for c in &c_in {
            assert!(out.concepts.contains(&canonical_form(c)));
        }
    }

    #[test]
    fn one_instantiation_keeps_the_empty_concept() {
        let f = Fixture::new();
        let policy = vec![DesignSequence::new("one", vec![DesignAction::instantiate("NAND")])];
        let out = f.round(&[Concept::empty()], &policy, &ExploreParams::default()).unwrap();
        assert_eq!(out.concepts.len(), 2);
        assert!(out.concepts.contains(&Concept::empty()));
        assert!(out.concepts.iter().any(|c| c.count_kind("NAND") == 1));
        assert_eq!(out.expansions, 1);
    }

    #[test]
    fn beam_keeps_the_best_concepts() {
        let f = Fixture::new();
        let start = vec![canonical_form(&Concept::build(&[("a", "A"), ("b", "B")], &[]).unwrap())];
        let all = f
            .round(&start, &f.state.policy, &ExploreParams { beam_width: 0, ..Default::default() })
            .unwrap();
        let top = f
            .round(&start, &f.state.policy, &ExploreParams { beam_width: 3, ..Default::default() })
            .unwrap();
        assert_eq!(top.concepts, all.concepts[..3].to_vec());
        assert!(all.concepts.len() > 3);
    }

    #[test]
    fn ceiling_stops_the_round() {
        let f = Fixture::new();
        let start = vec![canonical_form(&Concept::build(&[("a", "A"), ("b", "B")], &[]).unwrap())];
        let params = ExploreParams { ceiling: 5, ..Default::default() };
        assert_eq!(
            f.round(&start, &f.state.policy, &params),
            Err(ExploreError::BudgetExceeded { ceiling: 5 })
        );
    }

    #[test]
    fn memoized_concepts_cost_nothing() {
        let f = Fixture::new();
        let ctx = f.ctx(&f.state.rules, &f.state.requirements);
        let ranker = Ranker::new(&f.state.utility, &f.state.requirements, &f.env);
        let mut cache = ExpansionCache::new();
        let params = ExploreParams::default();
        let first = apply_interpreter(&[Concept::empty()], &ctx, &f.state.policy, &ranker, &params, 0, &mut cache).unwrap();
        let again = apply_interpreter(&[Concept::empty()], &ctx, &f.state.policy, &ranker, &params, 0, &mut cache).unwrap();
        assert!(first.expansions > 0);
        assert_eq!(again.expansions, 0);
        assert_eq!(first.concepts, again.concepts);
    }

    #[test]
    fn sampling_is_seeded() {
        let f = Fixture::new();
        let ctx = f.ctx(&f.state.rules, &f.state.requirements);
        let ranker = Ranker::new(&f.state.utility, &f.state.requirements, &f.env);
        let start = vec![canonical_form(&Concept::build(&[("a", "A"), ("b", "B")], &[]).unwrap())];
        let params = ExploreParams { sample: Some(5), beam_width: 0, ..Default::default() };
        let run = |seed| {
            apply_interpreter(&start, &ctx, &f.state.policy, &ranker, &params, seed, &mut ExpansionCache::new()).unwrap()
        };
        assert_eq!(run(7), run(7));
        assert!(run(7).concepts.len() <= 6);
    }
}
