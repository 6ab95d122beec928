use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::config::{read_json, read_text, RunConfig};
use super::HarnessError;
use crate::environment::{terminal_reward, DomainKind, ModelSet};
use crate::explore::{run_episode, MachineState};
use crate::hash::{content_hash, sha256_hex, to_text, ContentHash};
use crate::language::canonical_form;
use crate::transform::{search_certified, propose, switch, Certificate};
use crate::verification::revise_requirements;

/// One line of the trace. Fields serialize in declaration order, with the
/// record tag first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "record", rename_all = "kebab-case")]
pub enum TraceRecord {
    Start {
        domain: DomainKind,
        seed: u64,
        environment: ContentHash,
        state: ContentHash,
    },
    /// One interpreter round of an episode. `reward` is model-weighted and
    /// `cumulative` sums it over the episode so far.
    Step {
        episode: u32,
        step: u32,
        action: String,
        concept: Option<ContentHash>,
        expansions: u64,
        reward: f64,
        cumulative: f64,
    },
    Episode {
        index: u32,
        seed: u64,
        submitted: Option<ContentHash>,
        round: Option<u32>,
        expansions: u64,
        utility_per_model: Vec<f64>,
        utility: f64,
        dropped: Vec<String>,
        program: ContentHash,
        state: ContentHash,
    },
    Search {
        index: u32,
        proposals: usize,
        tried: usize,
        certified: Option<String>,
    },
    Switch {
        index: u32,
        proposal: String,
        certificate: ContentHash,
        before: Vec<f64>,
        after: Vec<f64>,
        pruned: Vec<ContentHash>,
        program: ContentHash,
        state: ContentHash,
    },
    End {
        episodes: u32,
        switches: u32,
        state: ContentHash,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRow {
    pub index: u32,
    pub seed: u64,
    pub utility: f64,
    pub utility_per_model: Vec<f64>,
    pub expansions: u64,
    pub submitted: Option<ContentHash>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SwitchRow {
    /// Episode after which the switch happened.
    pub episode: u32,
    pub proposal: String,
    pub certificate: ContentHash,
    pub before: Vec<f64>,
    pub after: Vec<f64>,
    pub min_before: f64,
    pub min_after: f64,
}

/// Summary of a run; every number is recomputable from the trace and
/// snapshots. Wall-clock time is kept apart in `timing.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub domain: DomainKind,
    pub seed: u64,
    pub episodes: Vec<EpisodeRow>,
    pub switches: Vec<SwitchRow>,
    pub total_expansions: u64,
    pub final_state: ContentHash,
}

/// Every artifact a run writes, held in memory.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifacts {
    pub trace: Vec<String>,
    /// Snapshot texts: the initial state, then the state after each episode.
    pub snapshots: Vec<String>,
    pub certificates: Vec<String>,
    /// The state each certificate was issued against.
    pub bases: Vec<String>,
    pub report: RunReport,
}

/// Loop knobs that are not part of the machine state.
#[derive(Debug, Clone, PartialEq)]
pub struct LoopParams {
    pub episodes: u32,
    pub proposal_budget: usize,
    pub switch_limit: u32,
    /// Affects wall-clock only.
    pub workers: usize,
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    let mut z = x;
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn episode_seed(run_seed: u64, index: u32) -> u64 {
    splitmix(run_seed.rotate_left(17) ^ u64::from(index))
}

fn line(r: &TraceRecord) -> String {
    serde_json::to_string(r).expect("trace records serialize")
}

fn min(v: &[f64]) -> f64 {
    v.iter().copied().fold(f64::INFINITY, f64::min)
}

/// Runs episodes, revising requirements after each submission and trying
/// one certified rewrite after each episode until the switch limit.
pub fn execute(initial: MachineState, env: &ModelSet, params: &LoopParams) -> Result<Artifacts, HarnessError> {
    let mut state = initial;
    let mut trace = vec![line(&TraceRecord::Start {
        domain: env.domain,
        seed: state.seed,
        environment: env.hash(),
        state: state.hash(),
    })];
    let mut snapshots = vec![to_text(&state)];
    let mut certificates = Vec::new();
    let mut bases = Vec::new();
    let mut episodes = Vec::new();
    let mut switches = Vec::new();
    for index in 0..params.episodes {
        let seed = episode_seed(state.seed, index);
        let out = run_episode(&state, env, seed)?;
        let mut dropped = Vec::new();
        if let Some(c) = &out.submitted {
            let c = canonical_form(c);
            let per_model = env
                .models
                .iter()
                .map(|m| terminal_reward(env, m, &c))
                .collect::<Result<Vec<_>, _>>()?;
            let revised = revise_requirements(&state.requirements, env.expectation(&per_model), &c, env)?;
            dropped = state
                .requirements
                .requirements()
                .iter()
                .filter(|r| revised.get(&r.id).is_none())
                .map(|r| r.id.clone())
                .collect();
            state.requirements = revised;
            if !state.concepts.contains(&c) {
                state.concepts.push(c);
            }
        }
        state.step += 1;
        state.reward += out.utility;
        let mut cumulative = 0.0;
        for step in 0..env.horizon as usize {
            let leader = out.leaders.get(step);
            let action = match leader {
                None => "idle",
                Some(_) if out.submitted_round == Some(step as u32) => "submit",
                Some(_) => "expand",
            };
            let reward = env.expectation(&out.rewards.iter().map(|s| s[step]).collect::<Vec<_>>());
            cumulative += reward;
            trace.push(line(&TraceRecord::Step {
                episode: index,
                step: step as u32,
                action: action.into(),
                concept: leader.and_then(|c| c.as_ref()).map(|c| canonical_form(c).hash()),
                expansions: out.expansions_per_round[step],
                reward,
                cumulative,
            }));
        }
        let submitted = out.submitted.as_ref().map(|c| canonical_form(c).hash());
        trace.push(line(&TraceRecord::Episode {
            index,
            seed,
            submitted: submitted.clone(),
            round: out.submitted_round,
            expansions: out.expansions,
            utility_per_model: out.utility_per_model.clone(),
            utility: out.utility,
            dropped,
            program: state.program_hash(),
            state: state.hash(),
        }));
        episodes.push(EpisodeRow {
            index,
            seed,
            utility: out.utility,
            utility_per_model: out.utility_per_model,
            expansions: out.expansions,
            submitted,
        });
        if (switches.len() as u32) < params.switch_limit {
            let proposals = propose(&state, params.proposal_budget);
            let search = search_certified(&state, &proposals, env, params.workers)?;
            trace.push(line(&TraceRecord::Search {
                index,
                proposals: proposals.len(),
                tried: search.tried,
                certified: search.certified.as_ref().map(|c| c.proposal.name.clone()),
            }));
            if let Some(cert) = search.certified {
                let (next, event) = switch(&state, &cert, env)?;
                let cert_hash = content_hash(&cert);
                trace.push(line(&TraceRecord::Switch {
                    index,
                    proposal: event.proposal.clone(),
                    certificate: cert_hash.clone(),
                    before: event.before.clone(),
                    after: event.after.clone(),
                    pruned: event.pruned.clone(),
                    program: next.program_hash(),
                    state: next.hash(),
                }));
                switches.push(SwitchRow {
                    episode: index,
                    proposal: event.proposal,
                    certificate: cert_hash,
                    min_before: min(&cert.before),
                    min_after: min(&cert.after),
                    before: cert.before.clone(),
                    after: cert.after.clone(),
                });
                certificates.push(to_text(&cert));
                bases.push(to_text(&state));
                state = next;
            }
        }
        snapshots.push(to_text(&state));
    }
    trace.push(line(&TraceRecord::End {
        episodes: params.episodes,
        switches: switches.len() as u32,
        state: state.hash(),
    }));
    let report = RunReport {
        domain: env.domain,
        seed: state.seed,
        total_expansions: episodes.iter().map(|e| e.expansions).sum(),
        episodes,
        switches,
        final_state: state.hash(),
    };
    Ok(Artifacts {
        trace,
        snapshots,
        certificates,
        bases,
        report,
    })
}

pub const TRACE_FILE: &str = "trace.jsonl";
pub const REPORT_FILE: &str = "report.json";
pub const CONFIG_FILE: &str = "config.json";
pub const ENVIRONMENT_FILE: &str = "environment.json";
pub const TIMING_FILE: &str = "timing.json";

fn snapshot_path(dir: &Path, k: usize) -> PathBuf {
    dir.join("snapshots").join(format!("{k:04}.json"))
}

/// Where the `k`-th certificate of a run directory lives.
pub fn certificate_path(dir: &Path, k: usize) -> PathBuf {
    dir.join("certificates").join(format!("{k:04}.json"))
}

/// Where the state the `k`-th certificate was issued against lives.
pub fn basis_path(dir: &Path, k: usize) -> PathBuf {
    dir.join("certificates").join(format!("{k:04}.basis.json"))
}

fn write(path: &Path, text: &str) -> Result<(), HarnessError> {
    if let Some(parent) = path.parent() {
        fs::create_dir_all(parent).map_err(|e| HarnessError::Io(format!("{}: {e}", parent.display())))?;
    }
    fs::write(path, text).map_err(|e| HarnessError::Io(format!("{}: {e}", path.display())))
}

fn trace_text(lines: &[String]) -> String {
    let mut s = lines.join("\n");
    s.push('\n');
    s
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct Timing {
    wall_clock_ms: u128,
    workers: usize,
}

/// Runs a configuration and writes every artifact under its output
/// directory.
pub fn cmd_run(config: &RunConfig, workers: usize) -> Result<RunReport, HarnessError> {
    let started = Instant::now();
    let env = config.environment()?;
    let initial = config.initial_state(&env)?;
    let params = LoopParams {
        episodes: config.episodes,
        proposal_budget: config.proposal_budget,
        switch_limit: config.switch_limit,
        workers,
    };
    let art = execute(initial, &env, &params)?;
    let dir = config.out_dir();
    write(&dir.join(CONFIG_FILE), &to_text(config))?;
    write(&dir.join(ENVIRONMENT_FILE), &to_text(&env))?;
    for (k, s) in art.snapshots.iter().enumerate() {
        write(&snapshot_path(&dir, k), s)?;
    }
    for (k, c) in art.certificates.iter().enumerate() {
        write(&certificate_path(&dir, k), c)?;
    }
    for (k, b) in art.bases.iter().enumerate() {
        write(&basis_path(&dir, k), b)?;
    }
    write(&dir.join(TRACE_FILE), &trace_text(&art.trace))?;
    write(&dir.join(REPORT_FILE), &to_text(&art.report))?;
    let timing = Timing {
        wall_clock_ms: started.elapsed().as_millis(),
        workers,
    };
    write(&dir.join(TIMING_FILE), &to_text(&timing))?;
    Ok(art.report)
}

fn compare(artifact: &str, stored: &str, fresh: &str) -> Result<(), HarnessError> {
    if stored == fresh {
        return Ok(());
    }
    let line = stored
        .lines()
        .zip(fresh.lines())
        .position(|(a, b)| a != b)
        .unwrap_or_else(|| stored.lines().count().min(fresh.lines().count()))
        + 1;
    Err(HarnessError::Mismatch {
        artifact: artifact.to_string(),
        line,
    })
}

/// Re-executes the run stored next to `trace` from its first snapshot and
/// checks that the trace, snapshots, certificates, and report match.
pub fn cmd_replay(trace: &Path) -> Result<RunReport, HarnessError> {
    let owned;
    let trace = if trace.is_dir() {
        owned = trace.join(TRACE_FILE);
        owned.as_path()
    } else {
        trace
    };
    let dir = trace.parent().map(Path::to_path_buf).unwrap_or_default();
    let stored_trace = read_text(trace)?;
    let config: RunConfig = read_json(&dir.join(CONFIG_FILE))?;
    let env: ModelSet = read_json(&dir.join(ENVIRONMENT_FILE))?;
    let initial: MachineState = read_json(&snapshot_path(&dir, 0))?;
    let stored_report = read_text(&dir.join(REPORT_FILE))?;
    let params = LoopParams {
        episodes: config.episodes,
        proposal_budget: config.proposal_budget,
        switch_limit: config.switch_limit,
        workers: 1,
    };
    let art = execute(initial, &env, &params)?;
    compare(TRACE_FILE, &stored_trace, &trace_text(&art.trace))?;
    for (k, s) in art.snapshots.iter().enumerate() {
        let p = snapshot_path(&dir, k);
        compare(&p.display().to_string(), &read_text(&p)?, s)?;
    }
    for (k, c) in art.certificates.iter().enumerate() {
        let p = certificate_path(&dir, k);
        compare(&p.display().to_string(), &read_text(&p)?, c)?;
    }
    for (k, b) in art.bases.iter().enumerate() {
        let p = basis_path(&dir, k);
        compare(&p.display().to_string(), &read_text(&p)?, b)?;
    }
    compare(REPORT_FILE, &stored_report, &to_text(&art.report))?;
    Ok(art.report)
}

/// Loads a certificate and the state it was issued for.
pub fn load_certificate(path: &Path) -> Result<Certificate, HarnessError> {
    read_json(path)
}

/// Digest of a file's bytes, for comparing artifacts.
pub fn file_digest(path: &Path) -> Result<ContentHash, HarnessError> {
    Ok(sha256_hex(read_text(path)?.as_bytes()))
}
