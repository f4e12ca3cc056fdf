//! Propositional encodings of the benchmark problems.
//!
//! An encoding is built once for every configuration a stream can reach.
//! Stream atoms (`zone_off_z1`, `queen_3_5`, ...) resolve through a
//! [`SelectorMap`] to solver literals that are toggled as assumptions.

pub mod card;
pub mod pup;
pub mod qc;

use std::collections::BTreeMap;

use crate::clause::{Clause, Literal};

pub use card::CnfBuilder;

/// Maps stream atom names to the literal assumed while the atom is true.
/// While the atom is false the complement is assumed.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SelectorMap {
    map: BTreeMap<String, Literal>,
}

impl SelectorMap {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn insert(&mut self, name: impl Into<String>, lit: Literal) {
        self.map.insert(name.into(), lit);
    }

    pub fn get(&self, name: &str) -> Option<Literal> {
        self.map.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.map.contains_key(name)
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, Literal)> {
        self.map.iter().map(|(k, v)| (k.as_str(), *v))
    }
}

/// A ground program plus everything a session needs to drive it.
#[derive(Debug, Clone, Default)]
pub struct EncodedProblem {
    pub clauses: Vec<Clause>,
    pub atom_count: u32,
    pub selectors: SelectorMap,
    /// `symbols[i]` names atom `i + 1`.
    pub symbols: Vec<String>,
    /// Truth of every stream atom before the first delta.
    pub initial_truth: BTreeMap<String, bool>,
}

impl EncodedProblem {
    /// The empty program with no stream atoms.
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn symbol(&self, atom: u32) -> &str {
        &self.symbols[atom as usize - 1]
    }

    /// Atom id by symbol name. Linear scan; meant for tests and tooling.
    pub fn atom(&self, name: &str) -> Option<u32> {
        self.symbols
            .iter()
            .position(|s| s == name)
            .map(|i| i as u32 + 1)
    }

    pub(crate) fn from_builder(
        builder: CnfBuilder,
        selectors: SelectorMap,
        initial_truth: BTreeMap<String, bool>,
    ) -> Self {
        let (clauses, symbols) = builder.finish();
        EncodedProblem {
            atom_count: symbols.len() as u32,
            clauses,
            selectors,
            symbols,
            initial_truth,
        }
    }
}
