use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::edit::{apply_proposal, RewriteProposal};
use super::meta::Criterion;
use super::propose::propose;
use super::TransformError;
use crate::environment::ModelSet;
use crate::explore::{run_episode, MachineState};
use crate::hash::{content_hash, ContentHash};
use crate::language::{edit_distance, Concept};

/// Version tag of the checker; certificates from other versions never check.
pub const CHECKER_VERSION: &str = "dgm-checker/1";

/// Replayable evidence that a rewrite strictly improves expected utility
/// under every environment model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Certificate {
    pub proposal: RewriteProposal,
    pub basis: ContentHash,
    pub successor: ContentHash,
    pub environment: ContentHash,
    pub horizon: u32,
    /// Episode seeds of the evaluation suite.
    pub seeds: Vec<u64>,
    /// Whether both sides were valued by the rewrite they lead to next.
    pub lookahead: bool,
    pub models: Vec<String>,
    /// Per-model utility of the basis, in model order.
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub criterion: Criterion,
    pub conclusion: bool,
    /// Mean edit distance from the successor's submissions to the basis's
    /// archive.
    pub originality: f64,
    pub checker: String,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seeds of the evaluation suite, fixed by the basis.
pub fn suite_seeds(basis: &MachineState) -> Vec<u64> {
    (0..basis.meta.suite as u64).map(|k| splitmix(basis.seed ^ k)).collect()
}

/// Mean per-model utility of `state` over the seeded episode suite.
pub fn evaluate(state: &MachineState, env: &ModelSet, seeds: &[u64]) -> Result<Vec<f64>, TransformError> {
    Ok(run_suite(state, env, seeds)?.0)
}

fn run_suite(
    state: &MachineState,
    env: &ModelSet,
    seeds: &[u64],
) -> Result<(Vec<f64>, Vec<Option<Concept>>), TransformError> {
    let mut total = vec![0.0; env.models.len()];
    let mut submitted = Vec::new();
    for seed in seeds {
        let out = run_episode(state, env, *seed)?;
        for (t, u) in total.iter_mut().zip(&out.utility_per_model) {
            *t += u;
        }
        submitted.push(out.submitted);
    }
    Ok((total.into_iter().map(|t| t / seeds.len() as f64).collect(), submitted))
}

/// Mean over `submitted` of the distance to the nearest archived concept
/// (to the empty concept when the archive is empty); missing submissions
/// count 0.
pub fn originality(archive: &[Concept], submitted: &[Option<Concept>]) -> f64 {
    if submitted.is_empty() {
        return 0.0;
    }
    let total: usize = submitted
        .iter()
        .flatten()
        .map(|c| {
            archive
                .iter()
                .map(|a| edit_distance(a, c))
                .min()
                .unwrap_or_else(|| edit_distance(&Concept::empty(), c))
        })
        .sum();
    total as f64 / submitted.len() as f64
}

/// Certifies proposals against one basis, evaluating the basis once.
#[derive(Clone)]
pub struct Certifier<'a> {
    basis: &'a MachineState,
    env: &'a ModelSet,
    seeds: Vec<u64>,
    plain: Option<Vec<f64>>,
    ahead: Option<Vec<f64>>,
    /// Suite results keyed by the parts of a state exploration reads.
    memo: BTreeMap<ContentHash, Suite>,
}

type Suite = (Vec<f64>, Vec<Option<Concept>>);

impl<'a> Certifier<'a> {
    pub fn new(basis: &'a MachineState, env: &'a ModelSet) -> Self {
        Certifier {
            basis,
            env,
            seeds: suite_seeds(basis),
            plain: None,
            ahead: None,
            memo: BTreeMap::new(),
        }
    }

    fn suite(&mut self, state: &MachineState) -> Result<Suite, TransformError> {
        let key = content_hash(&(&state.rules, &state.policy, &state.explore, &state.utility, &state.requirements));
        if let Some(hit) = self.memo.get(&key) {
            return Ok(hit.clone());
        }
        let out = run_suite(state, self.env, &self.seeds)?;
        self.memo.insert(key, out.clone());
        Ok(out)
    }

    /// Value of a state as the state its next certified object-level
    /// rewrite would produce, or the state itself when none certifies.
    fn lookahead_value(&mut self, state: &MachineState, base: Vec<f64>) -> Result<Vec<f64>, TransformError> {
        for p in propose(state, state.meta.max_proposals) {
            if p.is_meta() {
                continue;
            }
            let Ok(next) = apply_proposal(state, &p) else {
                continue;
            };
            let v = self.suite(&next)?.0;
            if state.meta.criterion.improves(&base, &v, self.env) {
                return Ok(v);
            }
        }
        Ok(base)
    }

    pub fn basis_value(&mut self, lookahead: bool) -> Result<Vec<f64>, TransformError> {
        let cached = if lookahead { &self.ahead } else { &self.plain };
        if let Some(v) = cached {
            return Ok(v.clone());
        }
        let base = self.suite(self.basis)?.0;
        let v = if lookahead {
            self.lookahead_value(self.basis, base)?
        } else {
            base
        };
        *(if lookahead { &mut self.ahead } else { &mut self.plain }) = Some(v.clone());
        Ok(v)
    }

    pub fn certify(&mut self, p: &RewriteProposal) -> Result<Certificate, TransformError> {
        let successor = apply_proposal(self.basis, p)?;
        let lookahead = p.is_meta();
        let before = self.basis_value(lookahead)?;
        let (plain, submitted) = self.suite(&successor)?;
        let after = if lookahead {
            self.lookahead_value(&successor, plain)?
        } else {
            plain
        };
        let criterion = self.basis.meta.criterion;
        Ok(Certificate {
            proposal: p.clone(),
            basis: self.basis.hash(),
            successor: successor.hash(),
            environment: self.env.hash(),
            horizon: self.env.horizon,
            seeds: self.seeds.clone(),
            lookahead,
            models: self.env.models.iter().map(|m| m.id.clone()).collect(),
            conclusion: criterion.improves(&before, &after, self.env),
            originality: originality(&self.basis.concepts, &submitted),
            criterion,
            before,
            after,
            checker: CHECKER_VERSION.to_string(),
        })
    }
}

/// Runs the evaluation suite for basis and successor and records whether
/// the successor is strictly better under the basis's criterion.
pub fn certify(basis: &MachineState, p: &RewriteProposal, env: &ModelSet) -> Result<Certificate, TransformError> {
    Certifier::new(basis, env).certify(p)
}

fn same(a: &[f64], b: &[f64]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| x.to_bits() == y.to_bits())
}

/// Replays a certificate from the basis and reports whether every recorded
/// value matches bit for bit.
pub fn check_certificate(cert: &Certificate, basis: &MachineState, env: &ModelSet) -> bool {
    if cert.checker != CHECKER_VERSION
        || cert.basis != basis.hash()
        || cert.environment != env.hash()
        || cert.horizon != env.horizon
        || cert.seeds != suite_seeds(basis)
        || cert.models != env.models.iter().map(|m| m.id.clone()).collect::<Vec<_>>()
        || cert.lookahead != cert.proposal.is_meta()
        || cert.criterion != basis.meta.criterion
    {
        return false;
    }
    match certify(basis, &cert.proposal, env) {
        Ok(fresh) => {
            fresh.successor == cert.successor
                && same(&fresh.before, &cert.before)
                && same(&fresh.after, &cert.after)
                && fresh.originality.to_bits() == cert.originality.to_bits()
                && fresh.conclusion == cert.conclusion
        }
        Err(_) => false,
    }
}
