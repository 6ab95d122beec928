use serde::{Deserialize, Serialize};

use super::action::ActionContext;
use super::interpreter::{apply_interpreter, ExpansionCache};
use super::rank::Ranker;
use super::state::MachineState;
use super::ExploreError;
use crate::environment::{spread, terminal_reward, ModelSet};
use crate::language::Concept;

/// What one episode did and what every model paid for it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeOutcome {
    pub seed: u64,
    pub submitted: Option<Concept>,
    pub submitted_round: Option<u32>,
    pub expansions: u64,
    pub expansions_per_round: Vec<u64>,
    pub frontier_sizes: Vec<usize>,
    /// Per executed round: the submitted concept, else the best retained one.
    pub leaders: Vec<Option<Concept>>,
    /// Reward stream per model, in model order.
    pub rewards: Vec<Vec<f64>>,
    /// Summed reward per model.
    pub utility_per_model: Vec<f64>,
    /// Model-weighted utility.
    pub utility: f64,
}

/// Explores from the empty concept for at most `env.horizon` rounds and
/// stops at the first round in which a concept is submitted. Each model
/// charges its expansion cost per round and pays the submission's reward.
pub fn run_episode(state: &MachineState, env: &ModelSet, seed: u64) -> Result<EpisodeOutcome, ExploreError> {
    let ctx = ActionContext {
        rules: &state.rules,
        requirements: &state.requirements,
        env,
    };
    let ranker = Ranker::new(&state.utility, &state.requirements, env);
    let mut cache = ExpansionCache::new();
    let mut frontier = vec![Concept::empty()];
    let mut per_round = Vec::new();
    let mut sizes = Vec::new();
    let mut leaders = Vec::new();
    let mut submitted = None;
    for round in 0..env.horizon {
        let res = apply_interpreter(&frontier, &ctx, &state.policy, &ranker, &state.explore, seed, &mut cache)?;
        per_round.push(res.expansions);
        sizes.push(res.concepts.len());
        if let Some(best) = res.submitted.into_iter().next() {
            leaders.push(Some(best.clone()));
            submitted = Some((round, best));
            break;
        }
        leaders.push(res.concepts.first().cloned());
        frontier = res.concepts;
    }
    per_round.resize(env.horizon as usize, 0);
    let mut rewards = Vec::new();
    for m in &env.models {
        let mut stream: Vec<f64> = per_round.iter().map(|e| -m.expansion_cost * *e as f64).collect();
        if let Some((round, c)) = &submitted {
            let r = terminal_reward(env, m, c)?;
            for (s, v) in stream.iter_mut().zip(spread(env, r, *round)) {
                *s += v;
            }
        }
        rewards.push(stream);
    }
    let utility_per_model: Vec<f64> = rewards.iter().map(|s| s.iter().sum()).collect();
    Ok(EpisodeOutcome {
        seed,
        submitted_round: submitted.as_ref().map(|s| s.0),
        submitted: submitted.map(|s| s.1),
        expansions: cache.spent,
        expansions_per_round: per_round,
        frontier_sizes: sizes,
        leaders,
        utility: env.expectation(&utility_per_model),
        rewards,
        utility_per_model,
    })
}
