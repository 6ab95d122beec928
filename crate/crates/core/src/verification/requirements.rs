use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::system::Value;

/// What a requirement checks on a compiled concept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Scenario {
    /// One combinational row: source kinds driven to the given bits must
    /// make the named sink kinds show the given bits, whatever the value of
    /// every other open input.
    TruthRow {
        inputs: BTreeMap<String, i64>,
        outputs: BTreeMap<String, i64>,
    },
    /// Feeding `inputs` to every source yields `expected` at every sink.
    Stream { inputs: Vec<Value>, expected: Vec<Value> },
    /// Summed stage cost stays within `max`.
    CostBound { max: f64 },
    /// The concept compiles and has at least one source and one sink.
    TypeSafe,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Requirement {
    pub id: String,
    pub scenario: Scenario,
    pub weight: f64,
    #[serde(default)]
    pub score: i64,
}

impl Requirement {
    pub fn new(id: &str, scenario: Scenario, weight: f64) -> Self {
        Requirement {
            id: id.to_string(),
            scenario,
            weight,
            score: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Location {
    EnvironmentHeld,
    MachineInternal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRequirementSet")]
pub struct RequirementSet {
    location: Location,
    requirements: Vec<Requirement>,
}

#[derive(Deserialize)]
struct RawRequirementSet {
    location: Location,
    requirements: Vec<Requirement>,
}

impl TryFrom<RawRequirementSet> for RequirementSet {
    type Error = String;
    fn try_from(raw: RawRequirementSet) -> Result<Self, String> {
        RequirementSet::new(raw.location, raw.requirements)
    }
}

impl RequirementSet {
    pub fn new(location: Location, requirements: Vec<Requirement>) -> Result<Self, String> {
        let mut ids = BTreeSet::new();
        for r in &requirements {
            if !ids.insert(r.id.as_str()) {
                return Err(format!("duplicate requirement id {}", r.id));
            }
            if !(r.weight >= 0.0 && r.weight.is_finite()) {
                return Err(format!("requirement {} has invalid weight {}", r.id, r.weight));
            }
        }
        Ok(RequirementSet {
            location,
            requirements,
        })
    }

    pub fn empty(location: Location) -> Self {
        RequirementSet {
            location,
            requirements: Vec::new(),
        }
    }

    pub fn location(&self) -> Location {
        self.location
    }

    pub fn requirements(&self) -> &[Requirement] {
        &self.requirements
    }

    pub fn get(&self, id: &str) -> Option<&Requirement> {
        self.requirements.iter().find(|r| r.id == id)
    }

    pub fn is_empty(&self) -> bool {
        self.requirements.is_empty()
    }

    pub fn len(&self) -> usize {
        self.requirements.len()
    }

    /// Copy held by the machine; scores start at zero.
    pub fn internal_copy(&self) -> RequirementSet {
        RequirementSet {
            location: Location::MachineInternal,
            requirements: self
                .requirements
                .iter()
                .map(|r| Requirement { score: 0, ..r.clone() })
                .collect(),
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.requirements.iter().map(|r| r.weight).sum()
    }

    pub(crate) fn requirements_mut(&mut self) -> &mut Vec<Requirement> {
        &mut self.requirements
    }

    /// Same set with every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> RequirementSet {
        RequirementSet {
            location: self.location,
            requirements: self
                .requirements
                .iter()
                .map(|r| Requirement { weight: r.weight * factor, ..r.clone() })
                .collect(),
        }
    }

    pub fn without(&self, id: &str) -> RequirementSet {
        RequirementSet {
            location: self.location,
            requirements: self.requirements.iter().filter(|r| r.id != id).cloned().collect(),
        }
    }
}
