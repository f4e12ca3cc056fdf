//! Literals, canonical clauses and content-derived clause keys.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};

use serde::{Deserialize, Serialize};
use xxhash_rust::xxh3::Xxh3;

use crate::error::ClauseError;

/// A propositional literal over a dense, 1-based atom identifier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Literal {
    atom: u32,
    positive: bool,
}

impl Literal {
    /// Panics if `atom` is zero.
    pub fn new(atom: u32, positive: bool) -> Self {
        assert!(atom >= 1, "atom identifiers start at 1");
        Literal { atom, positive }
    }

    pub fn pos(atom: u32) -> Self {
        Literal::new(atom, true)
    }

    pub fn neg(atom: u32) -> Self {
        Literal::new(atom, false)
    }

    /// Converts a non-zero DIMACS-style integer.
    pub fn from_dimacs(value: i32) -> Self {
        assert!(value != 0, "0 is the DIMACS clause terminator");
        Literal::new(value.unsigned_abs(), value > 0)
    }

    pub fn to_dimacs(self) -> i64 {
        if self.positive {
            self.atom as i64
        } else {
            -(self.atom as i64)
        }
    }

    #[inline]
    pub fn atom(self) -> u32 {
        self.atom
    }

    #[inline]
    pub fn is_positive(self) -> bool {
        self.positive
    }

    #[inline]
    pub fn complement(self) -> Self {
        Literal {
            atom: self.atom,
            positive: !self.positive,
        }
    }

    /// Whether the literal is true under a total assignment indexed by atom - 1.
    #[inline]
    pub fn holds(self, assignment: &[bool]) -> bool {
        assignment[self.atom as usize - 1] == self.positive
    }
}

impl std::ops::Not for Literal {
    type Output = Literal;

    fn not(self) -> Literal {
        self.complement()
    }
}

impl fmt::Display for Literal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.positive {
            write!(f, "x{}", self.atom)
        } else {
            write!(f, "¬x{}", self.atom)
        }
    }
}

/// A clause in canonical form: literals sorted by (atom, polarity), no
/// duplicates, no complementary pair.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "Vec<Literal>", into = "Vec<Literal>")]
pub struct Clause {
    literals: Vec<Literal>,
}

/// Result of canonicalizing a literal sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Canonical {
    Clause(Clause),
    Tautology,
}

impl Canonical {
    pub fn into_clause(self) -> Option<Clause> {
        match self {
            Canonical::Clause(c) => Some(c),
            Canonical::Tautology => None,
        }
    }

    pub fn is_tautology(&self) -> bool {
        matches!(self, Canonical::Tautology)
    }
}

/// Sorts and deduplicates `lits`. Returns [`Canonical::Tautology`] when a
/// literal and its complement both occur.
pub fn canonicalize<I>(lits: I) -> Result<Canonical, ClauseError>
where
    I: IntoIterator<Item = Literal>,
{
    let mut literals: Vec<Literal> = lits.into_iter().collect();
    if literals.is_empty() {
        return Err(ClauseError::EmptyClause);
    }
    // negative sorts before positive for the same atom
    literals.sort_unstable();
    literals.dedup();
    if literals.windows(2).any(|w| w[0].atom == w[1].atom) {
        return Ok(Canonical::Tautology);
    }
    Ok(Canonical::Clause(Clause { literals }))
}

impl Clause {
    /// Builds a canonical clause, rejecting tautologies as an error.
    pub fn new<I>(lits: I) -> Result<Self, ClauseError>
    where
        I: IntoIterator<Item = Literal>,
    {
        canonicalize(lits)?
            .into_clause()
            .ok_or(ClauseError::Tautology)
    }

    /// Wraps literals that are already sorted, distinct and free of
    /// complementary pairs.
    pub(crate) fn from_canonical(literals: Vec<Literal>) -> Self {
        debug_assert!(literals.windows(2).all(|w| w[0].atom < w[1].atom));
        Clause { literals }
    }

    pub fn from_dimacs(values: &[i32]) -> Result<Self, ClauseError> {
        Clause::new(values.iter().map(|&v| Literal::from_dimacs(v)))
    }

    pub fn literals(&self) -> &[Literal] {
        &self.literals
    }

    pub fn len(&self) -> usize {
        self.literals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.literals.is_empty()
    }

    pub fn max_atom(&self) -> u32 {
        // literals are sorted by atom
        self.literals.last().map_or(0, |l| l.atom)
    }

    /// Evaluates the clause under a total assignment (index = atom - 1).
    pub fn satisfied_by(&self, assignment: &[bool]) -> bool {
        self.literals.iter().any(|l| l.holds(assignment))
    }

    pub fn key(&self) -> ClauseKey {
        clause_key(self)
    }
}

impl TryFrom<Vec<Literal>> for Clause {
    type Error = ClauseError;

    fn try_from(value: Vec<Literal>) -> Result<Self, Self::Error> {
        Clause::new(value)
    }
}

impl From<Clause> for Vec<Literal> {
    fn from(c: Clause) -> Self {
        c.literals
    }
}

impl fmt::Display for Clause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[")?;
        for (i, l) in self.literals.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "{l}")?;
        }
        write!(f, "]")
    }
}

/// Identity of a clause by content. Two canonical clauses have equal keys
/// iff they have the same literals (up to digest collisions over 128 bits).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ClauseKey(u128);

impl ClauseKey {
    pub fn as_u128(self) -> u128 {
        self.0
    }
}

impl fmt::Display for ClauseKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:032x}", self.0)
    }
}

impl Serialize for ClauseKey {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ClauseKey {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        u128::from_str_radix(&s, 16)
            .map(ClauseKey)
            .map_err(serde::de::Error::custom)
    }
}

/// Hasher for collections keyed by [`ClauseKey`]. The key is already a
/// uniform digest, so it is folded instead of hashed again.
#[derive(Debug, Default, Clone, Copy)]
pub struct KeyHasher(u64);

impl Hasher for KeyHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for &b in bytes {
            self.0 = self.0.rotate_left(8) ^ b as u64;
        }
    }

    fn write_u128(&mut self, v: u128) {
        self.0 ^= v as u64 ^ (v >> 64) as u64;
    }
}

pub type KeyMap<V> = HashMap<ClauseKey, V, BuildHasherDefault<KeyHasher>>;
pub type KeySet = HashSet<ClauseKey, BuildHasherDefault<KeyHasher>>;

/// XXH3-128 over the canonical literal sequence. Seedless, so keys are
/// stable across processes and platforms.
pub fn clause_key(c: &Clause) -> ClauseKey {
    let mut hasher = Xxh3::new();
    for l in &c.literals {
        hasher.update(&l.atom.to_le_bytes());
        hasher.update(&[l.positive as u8]);
    }
    ClauseKey(hasher.digest128())
}
