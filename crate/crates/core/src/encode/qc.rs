//! n-queens completion.
//!
//! Atom naming: `q_<r>_<c>` places a queen (1-based, row 1 at the top);
//! the stream atom `queen_<r>_<c>` selects its own atom `queen_<r>_<c>`,
//! which implies `q_<r>_<c>`.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::{CnfBuilder, EncodedProblem, SelectorMap};
use crate::clause::Literal;
use crate::error::StreamError;

pub type Square = (u32, u32);

pub fn queen(r: u32, c: u32) -> String {
    format!("queen_{r}_{c}")
}

/// Parses a `queen_<r>_<c>` stream atom.
pub fn parse_queen(name: &str) -> Option<Square> {
    let rest = name.strip_prefix("queen_")?;
    let (r, c) = rest.split_once('_')?;
    Some((r.parse().ok()?, c.parse().ok()?))
}

pub fn attacks(a: Square, b: Square) -> bool {
    let (dr, dc) = (a.0.abs_diff(b.0), a.1.abs_diff(b.1));
    a != b && (dr == 0 || dc == 0 || dr == dc)
}

/// Counterclockwise quarter turn with row 1 at the top.
pub fn rotate(n: u32, (r, c): Square) -> Square {
    (n + 1 - c, r)
}

/// On-disk form of a completion instance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcInstanceFile {
    pub n: u32,
    pub placed: Vec<Square>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QcInstance {
    pub n: u32,
    pub placed: BTreeSet<Square>,
    /// A complete placement extending `placed`.
    pub hidden_solution: Vec<Square>,
    pub rotation_count: u8,
}

impl QcInstance {
    pub fn validate(&self) -> Result<(), StreamError> {
        validate_placement(self.n, &self.placed)?;
        if !self.hidden_solution.is_empty() {
            if !check_qc(self.n, &self.hidden_solution) {
                return Err(StreamError::InvalidInstance("hidden solution is not a solution".into()));
            }
            let hidden: BTreeSet<Square> = self.hidden_solution.iter().copied().collect();
            if !self.placed.is_subset(&hidden) {
                return Err(StreamError::InvalidInstance("placement is not part of the hidden solution".into()));
            }
        }
        Ok(())
    }

    pub fn file(&self) -> QcInstanceFile {
        QcInstanceFile {
            n: self.n,
            placed: self.placed.iter().copied().collect(),
        }
    }
}

fn validate_placement(n: u32, placed: &BTreeSet<Square>) -> Result<(), StreamError> {
    if n == 0 {
        return Err(StreamError::InvalidInstance("board size must be positive".into()));
    }
    for &(r, c) in placed {
        if r == 0 || c == 0 || r > n || c > n {
            return Err(StreamError::InvalidInstance(format!("queen ({r}, {c}) is off the board")));
        }
    }
    let v: Vec<Square> = placed.iter().copied().collect();
    for i in 0..v.len() {
        for j in i + 1..v.len() {
            if attacks(v[i], v[j]) {
                return Err(StreamError::InvalidInstance(format!(
                    "queens {:?} and {:?} attack each other",
                    v[i], v[j]
                )));
            }
        }
    }
    Ok(())
}

impl QcInstanceFile {
    pub fn from_json(text: &str) -> Result<Self, StreamError> {
        let f: QcInstanceFile =
            serde_json::from_str(text).map_err(|e| StreamError::InvalidInstance(e.to_string()))?;
        validate_placement(f.n, &f.placed.iter().copied().collect())?;
        Ok(f)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }
}

/// Encodes the `n x n` board. `placed` only sets the initial selector
/// truth values; the clauses are the same for every placement.
pub fn encode_qc(n: u32, placed: &BTreeSet<Square>) -> EncodedProblem {
    let mut b = CnfBuilder::new();
    let mut q = vec![vec![Literal::pos(1); n as usize + 1]; n as usize + 1];
    for r in 1..=n {
        for c in 1..=n {
            q[r as usize][c as usize] = Literal::pos(b.atom(format!("q_{r}_{c}")));
        }
    }
    let mut selectors = SelectorMap::new();
    let mut initial = BTreeMap::new();
    for r in 1..=n {
        for c in 1..=n {
            let name = queen(r, c);
            let sel = Literal::pos(b.atom(name.clone()));
            b.clause([!sel, q[r as usize][c as usize]]);
            initial.insert(name.clone(), placed.contains(&(r, c)));
            selectors.insert(name, sel);
        }
    }
    let at = |r: u32, c: u32| q[r as usize][c as usize];
    for r in 1..=n {
        let row: Vec<Literal> = (1..=n).map(|c| at(r, c)).collect();
        b.at_least_one(&row);
        b.at_most_one_pairwise(&row);
    }
    for c in 1..=n {
        let col: Vec<Literal> = (1..=n).map(|r| at(r, c)).collect();
        b.at_most_one_pairwise(&col);
    }
    let n_i = n as i64;
    for d in -(n_i - 1)..n_i {
        let diag: Vec<Literal> = (1..=n_i)
            .filter(|r| (1..=n_i).contains(&(r - d)))
            .map(|r| at(r as u32, (r - d) as u32))
            .collect();
        b.at_most_one_pairwise(&diag);
    }
    for s in 2..=2 * n_i {
        let anti: Vec<Literal> = (1..=n_i)
            .filter(|r| (1..=n_i).contains(&(s - r)))
            .map(|r| at(r as u32, (s - r) as u32))
            .collect();
        b.at_most_one_pairwise(&anti);
    }
    EncodedProblem::from_builder(b, selectors, initial)
}

/// Queens placed by a model of [`encode_qc`].
pub fn decode_qc(model: &[bool], problem: &EncodedProblem) -> Vec<Square> {
    problem
        .symbols
        .iter()
        .zip(model)
        .filter(|(_, &v)| v)
        .filter_map(|(name, _)| {
            let (r, c) = name.strip_prefix("q_")?.split_once('_')?;
            Some((r.parse().ok()?, c.parse().ok()?))
        })
        .collect()
}

/// Exactly `n` queens on the board, no two sharing a row, column or
/// diagonal.
pub fn check_qc(n: u32, queens: &[Square]) -> bool {
    if queens.len() != n as usize {
        return false;
    }
    if queens
        .iter()
        .any(|&(r, c)| r < 1 || c < 1 || r > n || c > n)
    {
        return false;
    }
    for (i, a) in queens.iter().enumerate() {
        for b in &queens[i + 1..] {
            let same_row = a.0 == b.0;
            let same_col = a.1 == b.1;
            let diag = (a.0 as i64 - b.0 as i64).abs() == (a.1 as i64 - b.1 as i64).abs();
            if same_row || same_col || diag {
                return false;
            }
        }
    }
    true
}

/// Assumption literals for a placement.
pub fn assumptions_for(problem: &EncodedProblem, placed: &BTreeSet<Square>) -> Vec<Literal> {
    problem
        .selectors
        .iter()
        .map(|(name, lit)| {
            let on = parse_queen(name).is_some_and(|sq| placed.contains(&sq));
            if on {
                lit
            } else {
                !lit
            }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, EngineConfig};
    use std::collections::HashSet;

    fn engine_for(problem: &EncodedProblem) -> Engine {
        Engine::load_program(&problem.clauses, problem.atom_count, EngineConfig::default()).unwrap()
    }

    #[test]
    fn four_queens_has_two_models() {
        let problem = encode_qc(4, &BTreeSet::new());
        let mut engine = engine_for(&problem);
        let mut blocked: Vec<(crate::clause::ClauseKey, crate::clause::Clause)> = Vec::new();
        let mut found = Vec::new();
        let base = assumptions_for(&problem, &BTreeSet::new());
        // enumerate by blocking each model's queens
        loop {
            let out = engine.solve(&base, &blocked, &HashSet::new()).unwrap();
            let Some(model) = out.status.model() else { break };
            let queens = decode_qc(model, &problem);
            assert!(check_qc(4, &queens));
            let block = crate::clause::Clause::new(queens.iter().map(|&(r, c)| {
                Literal::neg(problem.atom(&format!("q_{r}_{c}")).unwrap())
            }))
            .unwrap();
            blocked.push((block.key(), block));
            found.push(queens);
            assert!(found.len() <= 2);
        }
        assert_eq!(found.len(), 2);
    }

    #[test]
    fn checker_examples() {
        assert!(check_qc(4, &[(1, 2), (2, 4), (3, 1), (4, 3)]));
        assert!(!check_qc(4, &[(1, 1), (2, 1), (3, 1), (4, 1)]));
        assert!(!check_qc(4, &[(1, 2), (2, 4), (3, 3), (4, 3)]));
        assert!(!check_qc(4, &[(1, 2), (2, 4), (3, 1)]));
    }

    #[test]
    fn full_solution_as_assumptions_is_satisfiable() {
        let sol: BTreeSet<Square> = [(1, 2), (2, 4), (3, 1), (4, 3)].into_iter().collect();
        let problem = encode_qc(4, &sol);
        let out = engine_for(&problem)
            .solve(&assumptions_for(&problem, &sol), &[], &HashSet::new())
            .unwrap();
        let mut queens = decode_qc(out.status.model().unwrap(), &problem);
        queens.sort();
        assert_eq!(queens, sol.iter().copied().collect::<Vec<_>>());
    }

    #[test]
    fn attacking_queens_are_incoherent() {
        let placed: BTreeSet<Square> = [(1, 1), (2, 2)].into_iter().collect();
        let problem = encode_qc(5, &placed);
        let out = engine_for(&problem)
            .solve(&assumptions_for(&problem, &placed), &[], &HashSet::new())
            .unwrap();
        assert!(!out.status.is_model());
    }

    #[test]
    fn rotation_has_order_four() {
        for n in 4..=9 {
            for r in 1..=n {
                for c in 1..=n {
                    let mut sq = (r, c);
                    for _ in 0..4 {
                        sq = rotate(n, sq);
                    }
                    assert_eq!(sq, (r, c));
                }
            }
        }
        assert_eq!(rotate(4, (1, 1)), (4, 1));
    }

    #[test]
    fn queen_names_round_trip() {
        assert_eq!(parse_queen(&queen(12, 3)), Some((12, 3)));
        assert_eq!(parse_queen("queen_x_3"), None);
        assert_eq!(parse_queen("zone_off_z1"), None);
    }

    #[test]
    fn instance_file_validation() {
        let ok = QcInstanceFile { n: 6, placed: vec![(1, 2), (2, 4)] };
        assert_eq!(QcInstanceFile::from_json(&ok.to_json()).unwrap(), ok);
        let bad = QcInstanceFile { n: 6, placed: vec![(1, 1), (3, 3)] };
        assert!(QcInstanceFile::from_json(&bad.to_json()).is_err());
        let off = QcInstanceFile { n: 6, placed: vec![(7, 1)] };
        assert!(QcInstanceFile::from_json(&off.to_json()).is_err());
    }
}
