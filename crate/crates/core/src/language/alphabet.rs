use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::LanguageError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SymbolKind {
    ComponentKind,
    Port,
    Connective,
    Property,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Symbol {
    pub name: String,
    pub kind: SymbolKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Direction {
    In,
    Out,
}

/// A port slot on a component kind.
///
/// Open (non-mandatory) input ports may stay unwired; what that means is up to
/// the domain compiling the concept. Mandatory input ports must be driven.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct PortSpec {
    pub name: String,
    pub direction: Direction,
    #[serde(default)]
    pub mandatory: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ComponentSpec {
    pub ports: Vec<PortSpec>,
    /// Properties every node of this kind must carry.
    #[serde(default)]
    pub properties: Vec<String>,
}

impl ComponentSpec {
    pub fn port(&self, name: &str) -> Option<&PortSpec> {
        self.ports.iter().find(|p| p.name == name)
    }

    pub fn inputs(&self) -> impl Iterator<Item = &PortSpec> {
        self.ports.iter().filter(|p| p.direction == Direction::In)
    }

    pub fn outputs(&self) -> impl Iterator<Item = &PortSpec> {
        self.ports.iter().filter(|p| p.direction == Direction::Out)
    }
}

/// The symbol inventory of a design language plus the typing of component
/// kinds (which ports and properties each kind carries).
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "RawAlphabet", into = "RawAlphabet")]
pub struct Alphabet {
    symbols: BTreeMap<String, Symbol>,
    components: BTreeMap<String, ComponentSpec>,
    property_values: BTreeMap<String, Vec<i64>>,
}

#[derive(Serialize, Deserialize)]
struct RawAlphabet {
    symbols: Vec<Symbol>,
    components: BTreeMap<String, ComponentSpec>,
    #[serde(default)]
    property_values: BTreeMap<String, Vec<i64>>,
}

impl TryFrom<RawAlphabet> for Alphabet {
    type Error = LanguageError;

    fn try_from(raw: RawAlphabet) -> Result<Self, Self::Error> {
        Alphabet::new(raw.symbols, raw.components, raw.property_values)
    }
}

impl From<Alphabet> for RawAlphabet {
    fn from(a: Alphabet) -> Self {
        RawAlphabet {
            symbols: a.symbols.into_values().collect(),
            components: a.components,
            property_values: a.property_values,
        }
    }
}

impl Alphabet {
    pub fn new(
        symbols: Vec<Symbol>,
        components: BTreeMap<String, ComponentSpec>,
        property_values: BTreeMap<String, Vec<i64>>,
    ) -> Result<Self, LanguageError> {
        let mut table = BTreeMap::new();
        for sym in symbols {
            if sym.name.is_empty() {
                return Err(LanguageError::Invalid("empty symbol name".into()));
            }
            if table.insert(sym.name.clone(), sym.clone()).is_some() {
                return Err(LanguageError::DuplicateSymbol(sym.name));
            }
        }
        let expect = |name: &str, kind: SymbolKind| match table.get(name) {
            Some(s) if s.kind == kind => Ok(()),
            _ => Err(LanguageError::UnknownSymbol(name.to_string())),
        };
        for (kind, spec) in &components {
            expect(kind, SymbolKind::ComponentKind)?;
            let mut seen = std::collections::BTreeSet::new();
            for p in &spec.ports {
                expect(&p.name, SymbolKind::Port)?;
                if !seen.insert(&p.name) {
                    return Err(LanguageError::Invalid(format!(
                        "port {} declared twice on {kind}",
                        p.name
                    )));
                }
            }
            for prop in &spec.properties {
                expect(prop, SymbolKind::Property)?;
                if !property_values.contains_key(prop) {
                    return Err(LanguageError::Invalid(format!(
                        "property {prop} has no value domain"
                    )));
                }
            }
        }
        for (prop, values) in &property_values {
            expect(prop, SymbolKind::Property)?;
            if values.is_empty() {
                return Err(LanguageError::Invalid(format!("property {prop} has empty domain")));
            }
        }
        for sym in table.values() {
            if sym.kind == SymbolKind::ComponentKind && !components.contains_key(&sym.name) {
                return Err(LanguageError::Invalid(format!(
                    "component kind {} has no port declaration",
                    sym.name
                )));
            }
        }
        let property_values = property_values
            .into_iter()
            .map(|(k, mut v)| {
                v.sort_unstable();
                v.dedup();
                (k, v)
            })
            .collect();
        Ok(Alphabet {
            symbols: table,
            components,
            property_values,
        })
    }

    pub fn symbol(&self, name: &str) -> Option<&Symbol> {
        self.symbols.get(name)
    }

    pub fn symbols(&self) -> impl Iterator<Item = &Symbol> {
        self.symbols.values()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.symbols.contains_key(name)
    }

    pub fn component(&self, kind: &str) -> Option<&ComponentSpec> {
        self.components.get(kind)
    }

    /// Component kinds in sorted order.
    pub fn component_kinds(&self) -> impl Iterator<Item = &str> {
        self.components.keys().map(String::as_str)
    }

    pub fn property_domain(&self, prop: &str) -> Option<&[i64]> {
        self.property_values.get(prop).map(Vec::as_slice)
    }

    pub fn word(&self, names: &[&str]) -> Result<Word, LanguageError> {
        names
            .iter()
            .map(|n| {
                if self.contains(n) {
                    Ok(n.to_string())
                } else {
                    Err(LanguageError::UnknownSymbol(n.to_string()))
                }
            })
            .collect::<Result<Vec<_>, _>>()
            .map(Word)
    }
}

/// A finite string of symbols drawn from one alphabet.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Word(pub Vec<String>);

impl Word {
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Small builder used by the shipped domains and by tests.
#[derive(Debug, Default)]
pub struct AlphabetBuilder {
    symbols: Vec<Symbol>,
    components: BTreeMap<String, ComponentSpec>,
    property_values: BTreeMap<String, Vec<i64>>,
}

impl AlphabetBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    fn ensure(&mut self, name: &str, kind: SymbolKind) {
        if !self.symbols.iter().any(|s| s.name == name) {
            self.symbols.push(Symbol {
                name: name.to_string(),
                kind,
            });
        }
    }

    pub fn connective(mut self, name: &str) -> Self {
        self.ensure(name, SymbolKind::Connective);
        self
    }

    pub fn property(mut self, name: &str, values: &[i64]) -> Self {
        self.ensure(name, SymbolKind::Property);
        self.property_values.insert(name.to_string(), values.to_vec());
        self
    }

    /// `ports` entries are `(name, direction, mandatory)`.
    pub fn component(
        mut self,
        kind: &str,
        ports: &[(&str, Direction, bool)],
        properties: &[&str],
    ) -> Self {
        self.ensure(kind, SymbolKind::ComponentKind);
        let ports = ports
            .iter()
            .map(|&(name, direction, mandatory)| {
                self.ensure(name, SymbolKind::Port);
                PortSpec {
                    name: name.to_string(),
                    direction,
                    mandatory,
                }
            })
            .collect();
        self.components.insert(
            kind.to_string(),
            ComponentSpec {
                ports,
                properties: properties.iter().map(|s| s.to_string()).collect(),
            },
        );
        self
    }

    pub fn build(self) -> Result<Alphabet, LanguageError> {
        Alphabet::new(self.symbols, self.components, self.property_values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hash::{from_text, to_text};

    fn sample() -> Alphabet {
        AlphabetBuilder::new()
            .connective("wire")
            .property("size", &[1, 2])
            .component(
                "AND",
                &[("a", Direction::In, false), ("y", Direction::Out, false)],
                &["size"],
            )
            .build()
            .unwrap()
    }

    #[test]
    fn serialization_round_trip() {
        let a = sample();
        let back: Alphabet = from_text(&to_text(&a)).unwrap();
        assert_eq!(a, back);
    }

    #[test]
    fn rejects_duplicate_symbols() {
        let err = Alphabet::new(
            vec![
                Symbol { name: "x".into(), kind: SymbolKind::Port },
                Symbol { name: "x".into(), kind: SymbolKind::Property },
            ],
            BTreeMap::new(),
            BTreeMap::new(),
        )
        .unwrap_err();
        assert!(matches!(err, LanguageError::DuplicateSymbol(_)));
    }

    #[test]
    fn words_only_use_known_symbols() {
        let a = sample();
        assert_eq!(a.word(&["AND", "wire", "AND"]).unwrap().len(), 3);
        assert!(matches!(
            a.word(&["OR"]),
            Err(LanguageError::UnknownSymbol(s)) if s == "OR"
        ));
    }
}
