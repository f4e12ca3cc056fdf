//! Clause builder with named atoms and cardinality helpers.

use crate::clause::{Canonical, Clause, Literal};

#[derive(Debug, Default)]
pub struct CnfBuilder {
    names: Vec<String>,
    clauses: Vec<Clause>,
    aux: usize,
}

impl CnfBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    /// Allocates a named atom.
    pub fn atom(&mut self, name: impl Into<String>) -> u32 {
        self.names.push(name.into());
        self.names.len() as u32
    }

    fn aux(&mut self) -> u32 {
        self.aux += 1;
        let name = format!("aux_{}", self.aux);
        self.atom(name)
    }

    pub fn atom_count(&self) -> u32 {
        self.names.len() as u32
    }

    /// Adds a clause; tautologies are dropped. Panics on an empty clause.
    pub fn clause<I: IntoIterator<Item = Literal>>(&mut self, lits: I) {
        match crate::clause::canonicalize(lits).expect("encoders never emit empty clauses") {
            Canonical::Clause(c) => self.clauses.push(c),
            Canonical::Tautology => {}
        }
    }

    pub fn at_least_one(&mut self, xs: &[Literal]) {
        self.clause(xs.iter().copied());
    }

    pub fn at_most_one_pairwise(&mut self, xs: &[Literal]) {
        for i in 0..xs.len() {
            for j in i + 1..xs.len() {
                self.clause([!xs[i], !xs[j]]);
            }
        }
    }

    /// Sequential-counter encoding of `sum(xs) <= k`.
    pub fn at_most_k(&mut self, xs: &[Literal], k: usize) {
        let n = xs.len();
        if n <= k {
            return;
        }
        if k == 0 {
            for &x in xs {
                self.clause([!x]);
            }
            return;
        }
        // s[i][j]: at least j+1 of xs[0..=i] are true
        let s: Vec<Vec<u32>> = (0..n - 1)
            .map(|_| (0..k).map(|_| self.aux()).collect())
            .collect();
        let sl = |i: usize, j: usize| Literal::pos(s[i][j]);
        self.clause([!xs[0], sl(0, 0)]);
        for j in 1..k {
            self.clause([!sl(0, j)]);
        }
        for i in 1..n - 1 {
            self.clause([!xs[i], sl(i, 0)]);
            self.clause([!sl(i - 1, 0), sl(i, 0)]);
            for j in 1..k {
                self.clause([!xs[i], !sl(i - 1, j - 1), sl(i, j)]);
                self.clause([!sl(i - 1, j), sl(i, j)]);
            }
            self.clause([!xs[i], !sl(i - 1, k - 1)]);
        }
        self.clause([!xs[n - 1], !sl(n - 2, k - 1)]);
    }

    pub fn finish(self) -> (Vec<Clause>, Vec<String>) {
        (self.clauses, self.names)
    }
}
