use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dgm_core::environment::{circuit, DomainKind, ModelSet};
use dgm_core::explore::MachineState;
use dgm_core::harness::{cmd_replay, cmd_run, read_json, HarnessError, RunConfig};
use dgm_core::hash::to_text;
use dgm_core::language::{interpret_with_ceiling, Concept};
use dgm_core::oracle::{self, OracleError};
use dgm_core::system::{self, TimeScale};
use dgm_core::transform::{check_certificate, search_certified, propose, Certificate, RewriteProposal, TransformError};
use dgm_core::verification::verify_external;

const USAGE: u8 = 1;
const INVALID: u8 = 2;
const MISSING: u8 = 3;
const BUDGET: u8 = 4;

#[derive(Parser)]
#[command(name = "dgm", version, about = "Certified self-rewriting design search")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Run configuration (JSON).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    domain: Option<DomainKind>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Run episodes and the certify-and-switch loop.
    Run {
        #[command(flatten)]
        common: Common,
        /// Threads used for certification; results do not depend on it.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Certify a proposal (or the first one that certifies) against a state.
    Certify {
        #[command(flatten)]
        common: Common,
        /// Machine snapshot to certify against; defaults to the initial state.
        #[arg(long)]
        state: Option<PathBuf>,
        /// Proposal to certify; defaults to the proposer's candidates.
        #[arg(long)]
        proposal: Option<PathBuf>,
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
    /// Re-check a certificate against the snapshot it was issued for.
    Check {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        certificate: PathBuf,
        #[arg(long)]
        state: PathBuf,
        /// Environment models; defaults to the domain's shipped models.
        #[arg(long)]
        environment: Option<PathBuf>,
    },
    /// Recompute a run from its trace directory and compare every artifact.
    Replay {
        trace: PathBuf,
    },
    /// Run a brute-force oracle.
    Oracle {
        kind: OracleKind,
        /// Size bound for enumeration.
        #[arg(long, default_value_t = 2)]
        bound: usize,
        #[arg(long, default_value_t = 1 << 26)]
        ceiling: u64,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum OracleKind {
    Enumerate,
    TruthTable,
    Equivalence,
    Reward,
}

enum Failure {
    Usage(String),
    Invalid(String),
    Missing(String),
    Budget(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => USAGE,
            Failure::Invalid(_) => INVALID,
            Failure::Missing(_) => MISSING,
            Failure::Budget(_) => BUDGET,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Invalid(m) | Failure::Missing(m) | Failure::Budget(m) => m,
        }
    }
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        let m = e.to_string();
        if e.is_budget() {
            return Failure::Budget(m);
        }
        match e {
            HarnessError::MissingArtifact(_) => Failure::Missing(m),
            HarnessError::Mismatch { .. } | HarnessError::Transform(TransformError::InvalidCertificate) => {
                Failure::Invalid(m)
            }
            _ => Failure::Usage(m),
        }
    }
}

impl From<TransformError> for Failure {
    fn from(e: TransformError) -> Self {
        HarnessError::from(e).into()
    }
}

impl From<OracleError> for Failure {
    fn from(e: OracleError) -> Self {
        match e {
            OracleError::BudgetExceeded { .. } => Failure::Budget(e.to_string()),
            OracleError::UnknownKind(_) => Failure::Usage(e.to_string()),
        }
    }
}

fn config(common: &Common) -> Result<RunConfig, Failure> {
    let mut c = match (&common.config, common.domain) {
        (Some(p), _) => RunConfig::load(p)?,
        (None, Some(d)) => RunConfig::defaults(d, 0, Path::new("dgm-out")),
        (None, None) => return Err(Failure::Usage("either --config or --domain is required".into())),
    };
    if let Some(d) = common.domain {
        if common.config.is_some() && d != c.domain {
            return Err(Failure::Usage(format!("--domain {d} contradicts the config's {}", c.domain)));
        }
    }
    if let Some(s) = common.seed {
        c.seed = s;
    }
    if let Some(o) = &common.out {
        c.out = if common.config.is_some() {
            std::env::current_dir().map_err(|e| Failure::Usage(e.to_string()))?.join(o)
        } else {
            o.clone()
        };
    }
    Ok(c)
}

fn run(command: Command) -> Result<(), Failure> {
    match command {
        Command::Run { common, workers } => {
            let cfg = config(&common)?;
            let report = cmd_run(&cfg, workers)?;
            for e in &report.episodes {
                println!(
                    "episode {} utility {:.6} expansions {} submitted {}",
                    e.index,
                    e.utility,
                    e.expansions,
                    e.submitted.as_deref().unwrap_or("-")
                );
            }
            for s in &report.switches {
                println!(
                    "switch after episode {}: {} min utility {:.6} -> {:.6}",
                    s.episode, s.proposal, s.min_before, s.min_after
                );
            }
            println!("wrote {}", cfg.out_dir().display());
        }
        Command::Certify {
            common,
            state,
            proposal,
            workers,
        } => {
            let cfg = config(&common)?;
            let env = cfg.environment()?;
            let basis: MachineState = match &state {
                Some(p) => read_json(p)?,
                None => cfg.initial_state(&env)?,
            };
            let proposals = match &proposal {
                Some(p) => vec![read_json::<RewriteProposal>(p)?],
                None => propose(&basis, cfg.proposal_budget),
            };
            let search = search_certified(&basis, &proposals, &env, workers)?;
            match search.certified {
                Some(cert) => {
                    let path = cfg.out_dir().join("certificate.json");
                    let io = |e: std::io::Error| Failure::Usage(e.to_string());
                    std::fs::create_dir_all(cfg.out_dir()).map_err(io)?;
                    std::fs::write(&path, to_text(&cert)).map_err(io)?;
                    std::fs::write(cfg.out_dir().join("basis.json"), to_text(&basis)).map_err(io)?;
                    println!("certified {} after {} proposals; wrote {}", cert.proposal.name, search.tried, path.display());
                }
                None => println!("none of {} proposals certified", proposals.len()),
            }
        }
        Command::Check {
            common,
            certificate,
            state,
            environment,
        } => {
            let cert: Certificate = read_json(&certificate)?;
            let basis: MachineState = read_json(&state)?;
            let env: ModelSet = match (&environment, &common.config) {
                (Some(p), _) => read_json(p)?,
                (None, Some(_)) => config(&common)?.environment()?,
                (None, None) => common.domain.unwrap_or(basis.domain).models(),
            };
            if !check_certificate(&cert, &basis, &env) {
                return Err(Failure::Invalid(format!("certificate {} does not check", certificate.display())));
            }
            println!("certificate checks; conclusion {}", cert.conclusion);
        }
        Command::Replay { trace } => {
            let report = cmd_replay(&trace)?;
            println!(
                "replay matches: {} episodes, {} switches, final state {}",
                report.episodes.len(),
                report.switches.len(),
                report.final_state
            );
        }
        Command::Oracle { kind, bound, ceiling } => println!("{}", oracle_report(kind, bound, ceiling)?),
    }
    Ok(())
}

fn oracle_report(kind: OracleKind, bound: usize, ceiling: u64) -> Result<String, Failure> {
    let rules = DomainKind::Circuit.rules();
    let lines = match kind {
        OracleKind::Enumerate => {
            let engine = interpret_with_ceiling(&rules, bound, ceiling)
                .map_err(|e| Failure::Budget(e.to_string()))?
                .concepts
                .len();
            let brute = oracle::enumerate_count(&rules, bound, ceiling)?;
            vec![
                format!("bound {bound}"),
                format!("interpret {engine}"),
                format!("oracle {brute}"),
                format!("agree {}", engine == brute),
            ]
        }
        OracleKind::TruthTable => {
            let table = oracle::truth_table(&circuit::half_adder()).ok_or_else(|| Failure::Usage("not a closed circuit".into()))?;
            let mut out = Vec::new();
            let mut correct = 0;
            for ((a, b), outs) in table {
                let (s, c) = (outs["S"], outs["C"]);
                correct += usize::from(s == a ^ b) + usize::from(c == a & b);
                out.push(format!("A={a} B={b} S={s} C={c}"));
            }
            out.push(format!("correct rows {correct}/8"));
            out
        }
        OracleKind::Equivalence => {
            let ts = TimeScale::new(4).expect("positive");
            let and = system::library::and(ts);
            let not = system::library::not(ts);
            let nand = system::library::nand(ts);
            let composed = system::connect(&nand, &not, &system::Wiring::Identity).map_err(|e| Failure::Usage(e.to_string()))?;
            let engine = system::equivalent(&and, &composed, 4).map_err(|e| Failure::Usage(e.to_string()))?;
            let brute = oracle::streams_equivalent(&and, &composed, 4, ceiling)?;
            vec![format!("and vs not after nand: engine {engine}, oracle {brute}")]
        }
        OracleKind::Reward => {
            let env = DomainKind::Circuit.models();
            let concepts = interpret_with_ceiling(&rules, bound, ceiling)
                .map_err(|e| Failure::Budget(e.to_string()))?
                .concepts;
            let mut agree = 0;
            for c in &concepts {
                agree += usize::from(reward_agrees(c, &env)?);
            }
            vec![format!("bound {bound}"), format!("concepts {}", concepts.len()), format!("agree {agree}")]
        }
    };
    Ok(lines.join("\n"))
}

fn reward_agrees(c: &Concept, env: &ModelSet) -> Result<bool, Failure> {
    for m in &env.models {
        let engine = verify_external(c, &env.requirements, env, m).ok();
        let brute = oracle::circuit_reward(c, &env.requirements, m)?;
        if engine != brute {
            return Ok(false);
        }
    }
    Ok(true)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("dgm: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
