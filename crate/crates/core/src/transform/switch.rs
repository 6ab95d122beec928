use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::certify::{check_certificate, Certificate, Certifier};
use super::edit::{apply_proposal, RewriteProposal};
use super::meta::MetaUtility;
use super::TransformError;
use crate::environment::ModelSet;
use crate::explore::MachineState;
use crate::hash::ContentHash;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchEvent {
    pub step: u64,
    pub proposal: String,
    pub basis: ContentHash,
    pub successor: ContentHash,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    /// Hashes of stored concepts the new rules no longer admit.
    pub pruned: Vec<ContentHash>,
}

/// Replaces the basis by the certified successor and logs the stored
/// concepts the successor's rules dropped.
pub fn switch(
    basis: &MachineState,
    cert: &Certificate,
    env: &ModelSet,
) -> Result<(MachineState, SwitchEvent), TransformError> {
    if cert.basis != basis.hash() {
        return Err(TransformError::StaleBasis);
    }
    if !check_certificate(cert, basis, env) {
        return Err(TransformError::InvalidCertificate);
    }
    if !cert.conclusion {
        return Err(TransformError::NotImproving);
    }
    let next = apply_proposal(basis, &cert.proposal)?;
    let pruned = basis
        .concepts
        .iter()
        .filter(|c| !next.concepts.contains(c))
        .map(|c| c.hash())
        .collect();
    let event = SwitchEvent {
        step: basis.step,
        proposal: cert.proposal.name.clone(),
        basis: cert.basis.clone(),
        successor: next.hash(),
        before: cert.before.clone(),
        after: cert.after.clone(),
        pruned,
    };
    Ok((next, event))
}

/// A rewrite the machine certified and switched to.
#[derive(Debug, Clone, PartialEq)]
pub struct SelfModification {
    pub state: MachineState,
    pub certificate: Certificate,
    pub event: SwitchEvent,
}

/// Certifies a proposal against the basis and switches if it strictly
/// improves every model.
pub fn self_modify(basis: &MachineState, p: &RewriteProposal, env: &ModelSet) -> Result<SelfModification, TransformError> {
    p.admissible(basis)?;
    let certificate = Certifier::new(basis, env).certify(p)?;
    if !certificate.conclusion {
        return Err(TransformError::NotImproving);
    }
    let (state, event) = switch(basis, &certificate, env)?;
    Ok(SelfModification {
        state,
        certificate,
        event,
    })
}

/// Outcome of trying proposals in order.
#[derive(Debug, Clone, PartialEq)]
pub struct Search {
    /// Certificate of the chosen proposal, if any certified.
    pub certified: Option<Certificate>,
    /// Proposals certified or rejected before stopping.
    pub tried: usize,
}

struct Best<'m> {
    meta: &'m MetaUtility,
    shaped: bool,
    best: Option<(f64, Certificate)>,
}

impl Best<'_> {
    /// Records a certificate; true when the search can stop.
    fn offer(&mut self, c: Certificate) -> bool {
        if !c.conclusion {
            return false;
        }
        if !self.shaped {
            self.best = Some((1.0, c));
            return true;
        }
        let v = self.meta.value(c.conclusion, c.originality);
        if self.best.as_ref().is_none_or(|(b, _)| v > *b) {
            self.best = Some((v, c));
        }
        false
    }
}

/// Certifies proposals in order. Under the indicator meta-utility the first
/// certified proposal wins; under a shaped one every proposal is certified
/// and the highest valued wins, earliest first on ties. With more than one
/// worker, proposals are certified in parallel batches with the same answer.
pub fn search_certified(
    basis: &MachineState,
    proposals: &[RewriteProposal],
    env: &ModelSet,
    workers: usize,
) -> Result<Search, TransformError> {
    let mut certifier = Certifier::new(basis, env);
    let mut best = Best {
        meta: &basis.meta_utility,
        shaped: basis.meta_utility.is_shaped(),
        best: None,
    };
    // Inadmissible or inapplicable proposals are skipped, not fatal.
    let usable = |r: Result<Certificate, TransformError>| match r {
        Ok(c) => Ok(Some(c)),
        Err(TransformError::Explore(e)) => Err(TransformError::Explore(e)),
        Err(_) => Ok(None),
    };
    let mut tried = 0;
    if workers <= 1 {
        for p in proposals {
            tried += 1;
            if let Some(c) = usable(certifier.certify(p))? {
                if best.offer(c) {
                    break;
                }
            }
        }
    } else {
        certifier.basis_value(false)?;
        if proposals.iter().any(RewriteProposal::is_meta) {
            certifier.basis_value(true)?;
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| TransformError::Inapplicable(e.to_string()))?;
        'chunks: for chunk in proposals.chunks(workers) {
            let results: Vec<Result<Option<Certificate>, TransformError>> = pool.install(|| {
                chunk
                    .par_iter()
                    .map(|p| usable(certifier.clone().certify(p)))
                    .collect()
            });
            for r in results {
                tried += 1;
                if let Some(c) = r? {
                    if best.offer(c) {
                        break 'chunks;
                    }
                }
            }
        }
    }
    Ok(Search {
        certified: best.best.map(|(_, c)| c),
        tried,
    })
}
