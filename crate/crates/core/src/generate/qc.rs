//! n-queens completion streams.
//!
//! A complete placement is drawn first and kept hidden; the instance
//! reveals `floor(0.4 n)` of its queens. Rotations turn both the revealed
//! queens and the hidden placement, and reveals only ever uncover hidden
//! queens, so every tick stays completable.

use std::collections::{BTreeSet, HashSet};

use rand::seq::IteratorRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::zipf::ZipfSampler;
use super::{Mutation, Schema};
use crate::encode::qc::{assumptions_for, decode_qc, encode_qc, queen, rotate, QcInstance, Square};
use crate::engine::{Engine, EngineConfig};
use crate::stream::Delta;

/// A complete placement found by the engine with randomized branching.
/// Panics for boards without solutions (`n` in 2..=3).
pub fn hidden_solution(n: u32, seed: u64) -> Vec<Square> {
    let problem = encode_qc(n, &BTreeSet::new());
    let config = EngineConfig {
        seed: seed.max(1),
        ..EngineConfig::default()
    };
    let mut engine = Engine::load_program(&problem.clauses, problem.atom_count, config)
        .expect("encoding is well formed");
    let out = engine
        .solve(&assumptions_for(&problem, &BTreeSet::new()), &[], &HashSet::new())
        .expect("valid assumptions");
    let mut queens = decode_qc(out.status.model().expect("board has a solution"), &problem);
    queens.sort();
    queens
}

#[derive(Debug, Clone)]
pub struct QcStream {
    n: u32,
    schema: Schema,
    p_restore: f64,
    rng: ChaCha8Rng,
    columns: ZipfSampler,
    initial_placed: BTreeSet<Square>,
    initial_hidden: Vec<Square>,
    placed: BTreeSet<Square>,
    hidden: Vec<Square>,
    rotation: u8,
    step: u64,
}

impl QcStream {
    /// Panics if `n < 4`.
    pub fn new(n: u32, alpha: f64, p_restore: f64, schema: Schema, seed: u64) -> Self {
        assert!(n >= 4, "boards below 4x4 have no usable solutions");
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let hidden = hidden_solution(n, rng.gen());
        let reveal = (2 * n / 5) as usize;
        let mut placed: BTreeSet<Square> = hidden.iter().copied().choose_multiple(&mut rng, reveal).into_iter().collect();
        if placed.len() != reveal {
            placed = hidden.iter().copied().take(reveal).collect();
        }
        let columns = ZipfSampler::new(n as usize, alpha, &mut rng);
        QcStream {
            n,
            schema,
            p_restore,
            rng,
            columns,
            initial_placed: placed.clone(),
            initial_hidden: hidden.clone(),
            placed,
            hidden,
            rotation: 0,
            step: 0,
        }
    }

    pub fn instance(&self) -> QcInstance {
        QcInstance {
            n: self.n,
            placed: self.initial_placed.clone(),
            hidden_solution: self.initial_hidden.clone(),
            rotation_count: 0,
        }
    }

    pub fn placed(&self) -> &BTreeSet<Square> {
        &self.placed
    }

    /// The hidden placement in the current orientation.
    pub fn hidden(&self) -> &[Square] {
        &self.hidden
    }

    pub fn rotation(&self) -> u8 {
        self.rotation
    }

    pub fn next_delta(&mut self) -> Delta {
        let mutation = self.schema.at(self.step);
        self.step += 1;
        let tick = self.step;
        let target = match mutation {
            Mutation::M1 => {
                let n = self.n;
                self.hidden = self.hidden.iter().map(|&q| rotate(n, q)).collect();
                self.hidden.sort();
                self.rotation = (self.rotation + 1) % 4;
                self.placed.iter().map(|&q| rotate(n, q)).collect()
            }
            Mutation::M2 => {
                let mut next = self.placed.clone();
                for _ in 0..self.n {
                    let col = self.columns.sample(&mut self.rng) as u32 + 1;
                    let q = *self.hidden.iter().find(|q| q.1 == col).expect("one queen per column");
                    if !self.placed.contains(&q) {
                        next.insert(q);
                        break;
                    }
                }
                next
            }
            Mutation::M3 => {
                if !self.rng.gen_bool(self.p_restore) {
                    return Delta::empty(tick);
                }
                self.hidden = self.initial_hidden.clone();
                self.rotation = 0;
                self.initial_placed.clone()
            }
        };
        let add = target.difference(&self.placed).map(|&(r, c)| queen(r, c)).collect();
        let remove = self.placed.difference(&target).map(|&(r, c)| queen(r, c)).collect();
        self.placed = target;
        Delta { tick, add, remove }
    }
}

/// Base instance plus `ticks` deltas.
pub fn gen_qc_stream(
    n: u32,
    ticks: u64,
    alpha: f64,
    p_restore: f64,
    schema: Schema,
    seed: u64,
) -> (QcInstance, Vec<Delta>) {
    let mut s = QcStream::new(n, alpha, p_restore, schema, seed);
    let deltas = (0..ticks).map(|_| s.next_delta()).collect();
    (s.instance(), deltas)
}
