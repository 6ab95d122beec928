use std::fs;
use std::path::{Path, PathBuf};

use serde::{de::DeserializeOwned, Deserialize, Serialize};

use super::HarnessError;
use crate::environment::{DomainKind, ModelSet};
use crate::explore::{DesignSequence, MachineState};
use crate::hash::from_text;
use crate::language::RuleSet;

/// Settings of one batch run. Relative paths resolve against `base`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub domain: DomainKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rules: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub policy: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub environment: Option<PathBuf>,
    pub seed: u64,
    /// Episodes to run.
    pub episodes: u32,
    pub proposal_budget: usize,
    pub switch_limit: u32,
    pub out: PathBuf,
    #[serde(skip)]
    pub base: PathBuf,
}

impl RunConfig {
    /// Shipped defaults for `domain`, writing to `out`.
    pub fn defaults(domain: DomainKind, seed: u64, out: &Path) -> Self {
        RunConfig {
            domain,
            rules: None,
            policy: None,
            environment: None,
            seed,
            episodes: 4,
            proposal_budget: 100,
            switch_limit: 3,
            out: out.to_path_buf(),
            base: PathBuf::from("."),
        }
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let mut c: RunConfig = read_json(path)?;
        c.base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(c)
    }

    fn resolve(&self, p: &Path) -> PathBuf {
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            self.base.join(p)
        }
    }

    pub fn out_dir(&self) -> PathBuf {
        self.resolve(&self.out)
    }

    pub fn environment(&self) -> Result<ModelSet, HarnessError> {
        let env = match &self.environment {
            Some(p) => read_json::<ModelSet>(&self.resolve(p))?,
            None => self.domain.models(),
        };
        if env.domain != self.domain {
            return Err(HarnessError::Config(format!(
                "environment is for {}, config selects {}",
                env.domain, self.domain
            )));
        }
        Ok(env)
    }

    /// The machine's starting state.
    pub fn initial_state(&self, env: &ModelSet) -> Result<MachineState, HarnessError> {
        let mut s = MachineState::initial(env, self.seed);
        if let Some(p) = &self.rules {
            let rules: RuleSet = read_json(&self.resolve(p))?;
            if rules.alphabet() != &self.domain.alphabet() {
                return Err(HarnessError::Config("rules use a different alphabet".into()));
            }
            s.rules = rules;
        }
        if let Some(p) = &self.policy {
            s.policy = read_json::<Vec<DesignSequence>>(&self.resolve(p))?;
        }
        Ok(s)
    }
}

pub(crate) fn read_text(path: &Path) -> Result<String, HarnessError> {
    fs::read_to_string(path).map_err(|e| match e.kind() {
        std::io::ErrorKind::NotFound => HarnessError::MissingArtifact(path.to_path_buf()),
        _ => HarnessError::Io(format!("{}: {e}", path.display())),
    })
}

pub fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    let text = read_text(path)?;
    from_text(&text).map_err(|e| HarnessError::Parse {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}
