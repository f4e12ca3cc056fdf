//! Conflict-driven clause learning over a fixed program, solved repeatedly
//! under changing assumptions and caller-supplied learned constraints.
//!
//! Each [`Engine::solve`] call attaches the supplied constraints, assigns
//! the assumptions as forced decisions at levels `1..=|A|`, and runs the
//! usual propagate / decide / analyze loop. Everything learned during the
//! call is reported back in the [`SolveOutcome`] and detached again when
//! the call returns; only the program, variable activities and saved
//! phases survive between calls.
//!
//! Supplied constraints stay physically attached while consecutive calls
//! keep supplying them, and are detached lazily once a call omits them.
//! This only saves work: a constraint takes part in a call exactly when
//! that call supplies it.

mod config;
pub mod dimacs;
mod order;

use std::collections::{BTreeMap, HashSet};
use std::hash::BuildHasher;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};

pub use config::{luby, EngineConfig, InCallDeletion, RestartPolicy};
use order::VarOrder;

use crate::clause::{Clause, ClauseKey, KeyMap, Literal};
use crate::error::EngineError;

const NO_REASON: u32 = u32::MAX;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct Lit(u32);

impl Lit {
    #[inline]
    fn from_literal(l: Literal) -> Lit {
        Lit(((l.atom() - 1) << 1) | (!l.is_positive()) as u32)
    }

    #[inline]
    fn var(self) -> usize {
        (self.0 >> 1) as usize
    }

    #[inline]
    fn negated(self) -> bool {
        self.0 & 1 == 1
    }

    #[inline]
    fn not(self) -> Lit {
        Lit(self.0 ^ 1)
    }

    #[inline]
    fn idx(self) -> usize {
        self.0 as usize
    }

    fn to_literal(self) -> Literal {
        Literal::new((self.0 >> 1) + 1, !self.negated())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Origin {
    Program,
    Supplied(u32),
    Learned(u32),
}

#[derive(Debug, Clone)]
struct StoredClause {
    lits: Vec<Lit>,
    origin: Origin,
    deleted: bool,
    /// Last call that supplied this clause.
    call: u32,
    /// Where the next search for a replacement watch starts.
    search: u32,
}

#[derive(Debug, Clone, Copy)]
struct Watcher {
    cref: u32,
    blocker: Lit,
}

/// A clause learned during one solve call.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LearnedClause {
    pub key: ClauseKey,
    pub clause: Clause,
    /// Distinct decision levels among the literals when the clause was learned.
    pub lbd: u32,
}

/// Per supplied constraint: whether the call used it, and its LBD if the
/// constraint took part in conflict analysis.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstraintUsage {
    pub key: ClauseKey,
    pub used: bool,
    pub refreshed_lbd: Option<u32>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SolveStatus {
    /// Total assignment, indexed by `atom - 1`.
    Model(Vec<bool>),
    Incoherent,
    /// The deadline passed before the search finished.
    Timeout,
}

impl SolveStatus {
    pub fn model(&self) -> Option<&[bool]> {
        match self {
            SolveStatus::Model(m) => Some(m),
            _ => None,
        }
    }

    pub fn is_model(&self) -> bool {
        matches!(self, SolveStatus::Model(_))
    }

    pub fn label(&self) -> &'static str {
        match self {
            SolveStatus::Model(_) => "model",
            SolveStatus::Incoherent => "incoherent",
            SolveStatus::Timeout => "timeout",
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub conflicts: u64,
    pub decisions: u64,
    pub propagations: u64,
    pub restarts: u64,
    /// Learned clauses dropped by in-call deletion.
    pub deleted: u64,
    pub wall_time: Duration,
}

#[derive(Debug, Clone)]
pub struct SolveOutcome {
    pub status: SolveStatus,
    /// Clauses learned in this call that survived in-call deletion.
    pub new_learned: Vec<LearnedClause>,
    /// One entry per supplied constraint, in the order they were supplied.
    pub usage: Vec<ConstraintUsage>,
    /// Learned clauses whose key was in the frozen set, with their LBD.
    pub rediscovered: BTreeMap<ClauseKey, u32>,
    pub stats: SolveStats,
}

#[derive(Debug, Clone)]
struct LearnedRecord {
    key: ClauseKey,
    clause: Clause,
    lbd: u32,
    cref: Option<u32>,
    deleted: bool,
}

/// Solver state for one loaded program.
#[derive(Debug, Clone)]
pub struct Engine {
    config: EngineConfig,
    num_vars: usize,
    clauses: Vec<StoredClause>,
    program_len: usize,
    program_units: Vec<Lit>,
    watches: Vec<Vec<Watcher>>,

    values: Vec<i8>,
    level: Vec<u32>,
    reason: Vec<u32>,
    trail: Vec<Lit>,
    trail_lim: Vec<usize>,
    qhead: usize,

    order: VarOrder,
    saved_phase: Vec<Option<bool>>,
    default_phase: Vec<bool>,

    seen: Vec<bool>,
    level_stamp: Vec<u64>,
    stamp: u64,

    /// Supplied constraints still attached, by key.
    resident: KeyMap<u32>,
    /// Detached clauses whose storage and watchers are not reclaimed yet.
    garbage: usize,
    /// Clauses at or beyond this index were created by the current call.
    call_base: usize,
    assumed: Vec<u32>,
    assume_stamp: u32,
    call_id: u32,

    // per-call state
    supplied_used: Vec<bool>,
    supplied_lbd: Vec<Option<u32>>,
    learned: Vec<LearnedRecord>,
    learned_index: KeyMap<usize>,
    stats: SolveStats,
}

enum Step {
    Continue,
    Done(SolveStatus),
}

impl Engine {
    /// Loads a program. Program clauses are permanent.
    pub fn load_program(
        clauses: &[Clause],
        atom_count: u32,
        config: EngineConfig,
    ) -> Result<Engine, EngineError> {
        config.validate().map_err(EngineError::InvalidConfig)?;
        let n = atom_count as usize;
        for c in clauses {
            check_range(c, atom_count)?;
        }
        let (activity, default_phase) = if config.seed == 0 {
            (vec![0.0; n], vec![false; n])
        } else {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(config.seed);
            let act = (0..n).map(|_| rng.gen::<f64>() * 1e-3).collect();
            let ph = (0..n).map(|_| rng.gen::<bool>()).collect();
            (act, ph)
        };
        let mut engine = Engine {
            config,
            num_vars: n,
            clauses: Vec::with_capacity(clauses.len()),
            program_len: 0,
            program_units: Vec::new(),
            watches: vec![Vec::new(); 2 * n],
            values: vec![0; n],
            level: vec![0; n],
            reason: vec![NO_REASON; n],
            trail: Vec::with_capacity(n),
            trail_lim: Vec::new(),
            qhead: 0,
            order: VarOrder::with_activities(activity),
            saved_phase: vec![None; n],
            default_phase,
            seen: vec![false; n],
            level_stamp: vec![0; n + 2],
            stamp: 0,
            resident: KeyMap::default(),
            garbage: 0,
            call_base: 0,
            assumed: vec![0; n],
            assume_stamp: 0,
            call_id: 0,
            supplied_used: Vec::new(),
            supplied_lbd: Vec::new(),
            learned: Vec::new(),
            learned_index: KeyMap::default(),
            stats: SolveStats::default(),
        };
        for c in clauses {
            let lits: Vec<Lit> = c.literals().iter().map(|&l| Lit::from_literal(l)).collect();
            if lits.len() == 1 {
                engine.program_units.push(lits[0]);
            } else {
                engine.attach(lits, Origin::Program);
            }
        }
        engine.program_len = engine.clauses.len();
        Ok(engine)
    }

    pub fn atom_count(&self) -> u32 {
        self.num_vars as u32
    }

    pub fn config(&self) -> &EngineConfig {
        &self.config
    }

    /// Saved polarity of `atom` from an earlier assignment, if any.
    pub fn saved_phase(&self, atom: u32) -> Option<bool> {
        self.saved_phase[atom as usize - 1]
    }

    pub fn activity(&self, atom: u32) -> f64 {
        self.order.activity[atom as usize - 1]
    }

    /// Number of saved phases; zero on a fresh engine.
    pub fn saved_phase_count(&self) -> usize {
        self.saved_phase.iter().filter(|p| p.is_some()).count()
    }

    /// The literal the branching heuristic would pick next: an unassigned
    /// atom of maximal activity (lowest id on ties) with its saved phase, or
    /// the default polarity. `None` when every atom is assigned.
    pub fn choose_literal(&mut self) -> Option<Literal> {
        while let Some(v) = self.order.peek() {
            if self.values[v as usize] == 0 {
                let v = v as usize;
                return Some(Literal::new(v as u32 + 1, self.polarity(v)));
            }
            self.order.pop();
        }
        None
    }

    pub fn solve<S: BuildHasher>(
        &mut self,
        assumptions: &[Literal],
        active: &[(ClauseKey, Clause)],
        frozen: &HashSet<ClauseKey, S>,
    ) -> Result<SolveOutcome, EngineError> {
        self.solve_with_deadline(assumptions, active, frozen, None)
    }

    pub fn solve_with_deadline<S: BuildHasher>(
        &mut self,
        assumptions: &[Literal],
        active: &[(ClauseKey, Clause)],
        frozen: &HashSet<ClauseKey, S>,
        deadline: Option<Instant>,
    ) -> Result<SolveOutcome, EngineError> {
        let atom_count = self.num_vars as u32;
        // stamp encodes polarity in its low bit
        self.assume_stamp = self.assume_stamp.wrapping_add(2).max(2);
        let stamp = self.assume_stamp;
        for &a in assumptions {
            if a.atom() > atom_count {
                return Err(EngineError::OutOfRange {
                    atom: a.atom(),
                    atom_count,
                });
            }
            let mark = stamp | a.is_positive() as u32;
            let slot = &mut self.assumed[a.atom() as usize - 1];
            if *slot & !1 == stamp && *slot != mark {
                return Err(EngineError::ComplementaryAssumptions(a.atom()));
            }
            *slot = mark;
        }
        for (_, c) in active {
            check_range(c, atom_count)?;
        }

        let start = Instant::now();
        self.begin_call(active.len());
        let assumptions: Vec<Lit> = assumptions.iter().map(|&l| Lit::from_literal(l)).collect();

        let status = self.run(&assumptions, active, frozen, deadline);

        if status.is_model() && self.config.phase_saving {
            // every atom keeps its model polarity
            for v in 0..self.num_vars {
                self.saved_phase[v] = Some(self.values[v] > 0);
            }
        }
        self.end_call();
        self.stats.wall_time = start.elapsed();

        let usage = active
            .iter()
            .enumerate()
            .map(|(i, (key, _))| ConstraintUsage {
                key: *key,
                used: self.supplied_used[i],
                refreshed_lbd: self.supplied_lbd[i],
            })
            .collect();
        let mut rediscovered = BTreeMap::new();
        for rec in &self.learned {
            if frozen.contains(&rec.key) {
                rediscovered.entry(rec.key).or_insert(rec.lbd);
            }
        }
        let new_learned = self
            .learned
            .iter()
            .filter(|r| !r.deleted)
            .map(|r| LearnedClause {
                key: r.key,
                clause: r.clause.clone(),
                lbd: r.lbd,
            })
            .collect();
        Ok(SolveOutcome {
            status,
            new_learned,
            usage,
            rediscovered,
            stats: std::mem::take(&mut self.stats),
        })
    }

    fn begin_call(&mut self, supplied: usize) {
        debug_assert!(self.trail.is_empty());
        if self.garbage > 1024 && 4 * self.garbage > self.clauses.len() {
            self.collect_garbage();
        }
        self.call_base = self.clauses.len();
        self.supplied_used = vec![false; supplied];
        self.supplied_lbd = vec![None; supplied];
        self.learned.clear();
        self.learned_index.clear();
        self.stats = SolveStats::default();
    }

    fn end_call(&mut self) {
        self.clear_trail();
        for c in &mut self.clauses[self.call_base..] {
            if !c.deleted {
                c.deleted = true;
                self.garbage += 1;
            }
        }
    }

    fn detach(&mut self, cref: u32) {
        let c = &mut self.clauses[cref as usize];
        if !c.deleted {
            c.deleted = true;
            self.garbage += 1;
        }
    }

    /// Makes exactly the supplied constraints live: keeps those already
    /// attached, attaches new ones and detaches the rest. Unit constraints
    /// are returned for assignment at level 0.
    fn attach_supplied(&mut self, active: &[(ClauseKey, Clause)]) -> Vec<(usize, Lit)> {
        self.call_id = self.call_id.wrapping_add(1);
        let call = self.call_id;
        let mut units = Vec::new();
        let mut duplicates = Vec::new();
        for (i, (key, c)) in active.iter().enumerate() {
            if c.len() == 1 {
                units.push((i, Lit::from_literal(c.literals()[0])));
                continue;
            }
            match self.resident.get(key) {
                Some(&cref) if self.clauses[cref as usize].call == call => duplicates.push(i),
                Some(&cref) => {
                    let stored = &mut self.clauses[cref as usize];
                    stored.origin = Origin::Supplied(i as u32);
                    stored.call = call;
                }
                None => {
                    let lits = c.literals().iter().map(|&l| Lit::from_literal(l)).collect();
                    let cref = self.attach(lits, Origin::Supplied(i as u32));
                    self.resident.insert(*key, cref);
                }
            }
        }
        let mut dropped = Vec::new();
        self.resident.retain(|_, &mut cref| {
            let keep = self.clauses[cref as usize].call == call;
            if !keep {
                dropped.push(cref);
            }
            keep
        });
        for cref in dropped {
            self.detach(cref);
        }
        self.call_base = self.clauses.len();
        // repeated keys get a private copy that dies with the call
        for i in duplicates {
            let lits = active[i].1.literals().iter().map(|&l| Lit::from_literal(l)).collect();
            self.attach(lits, Origin::Supplied(i as u32));
        }
        units
    }

    /// Drops detached clauses from storage and watch lists. Only valid
    /// with an empty trail.
    fn collect_garbage(&mut self) {
        debug_assert!(self.trail.is_empty());
        let mut remap = vec![u32::MAX; self.clauses.len()];
        let mut next = 0u32;
        for (i, c) in self.clauses.iter().enumerate() {
            if !c.deleted {
                remap[i] = next;
                next += 1;
            }
        }
        self.clauses.retain(|c| !c.deleted);
        for ws in &mut self.watches {
            ws.retain_mut(|w| {
                let to = remap[w.cref as usize];
                w.cref = to;
                to != u32::MAX
            });
        }
        for cref in self.resident.values_mut() {
            *cref = remap[*cref as usize];
        }
        self.garbage = 0;
        self.call_base = self.clauses.len();
    }

    fn run<S: BuildHasher>(
        &mut self,
        assumptions: &[Lit],
        active: &[(ClauseKey, Clause)],
        frozen: &HashSet<ClauseKey, S>,
        deadline: Option<Instant>,
    ) -> SolveStatus {
        let supplied_units = self.attach_supplied(active);
        // level-0 facts: program units, then supplied constraints
        for i in 0..self.program_units.len() {
            let u = self.program_units[i];
            match self.lit_value(u) {
                0 => self.enqueue(u, NO_REASON),
                v if v < 0 => return SolveStatus::Incoherent,
                _ => {}
            }
        }
        for (i, lit) in supplied_units {
            match self.lit_value(lit) {
                0 => {
                    self.supplied_used[i] = true;
                    self.enqueue(lit, NO_REASON);
                }
                v if v < 0 => {
                    self.supplied_used[i] = true;
                    return SolveStatus::Incoherent;
                }
                _ => {}
            }
        }

        let mut conflicts_since_restart = 0u64;
        let mut restart_index = 0u64;
        let mut restart_limit = self.config.restart_limit(restart_index);
        let mut conflicts_since_reduce = 0u64;

        loop {
            if let Some(confl) = self.propagate() {
                self.stats.conflicts += 1;
                conflicts_since_restart += 1;
                conflicts_since_reduce += 1;
                let conflict_level = self.decision_level();
                if conflict_level == 0 {
                    self.note_participation(confl);
                    return SolveStatus::Incoherent;
                }
                let (learnt, backjump, lbd) = self.analyze(confl);
                self.cancel_until(backjump);
                self.record_learned(learnt, lbd, frozen);
                self.order.decay(self.config.var_decay);
                // every decision so far was an assumption
                if conflict_level as usize <= assumptions.len() {
                    return SolveStatus::Incoherent;
                }
                if let Some(d) = deadline {
                    if Instant::now() >= d {
                        return SolveStatus::Timeout;
                    }
                }
                continue;
            }

            if let Some(limit) = restart_limit {
                if conflicts_since_restart >= limit {
                    self.cancel_until(0);
                    self.stats.restarts += 1;
                    restart_index += 1;
                    restart_limit = self.config.restart_limit(restart_index);
                    conflicts_since_restart = 0;
                }
            }
            if let InCallDeletion::LbdHalving { interval_conflicts } = self.config.in_call_deletion {
                if conflicts_since_reduce >= interval_conflicts {
                    self.reduce_learned();
                    conflicts_since_reduce = 0;
                }
            }

            match self.decide(assumptions) {
                Step::Continue => {}
                Step::Done(status) => return status,
            }
            if let Some(d) = deadline {
                if self.stats.decisions % 1024 == 0 && Instant::now() >= d {
                    return SolveStatus::Timeout;
                }
            }
        }
    }

    fn decide(&mut self, assumptions: &[Lit]) -> Step {
        let level = self.decision_level() as usize;
        if level < assumptions.len() {
            let p = assumptions[level];
            match self.lit_value(p) {
                v if v > 0 => self.trail_lim.push(self.trail.len()),
                v if v < 0 => return Step::Done(SolveStatus::Incoherent),
                _ => {
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(p, NO_REASON);
                }
            }
            return Step::Continue;
        }
        if self.trail.len() == self.num_vars {
            return Step::Done(SolveStatus::Model(self.values.iter().map(|&v| v > 0).collect()));
        }
        loop {
            match self.order.pop() {
                None => {
                    let model = self.values.iter().map(|&v| v > 0).collect();
                    return Step::Done(SolveStatus::Model(model));
                }
                Some(v) if self.values[v as usize] == 0 => {
                    let v = v as usize;
                    let lit = Lit(((v as u32) << 1) | (!self.polarity(v)) as u32);
                    self.stats.decisions += 1;
                    self.trail_lim.push(self.trail.len());
                    self.enqueue(lit, NO_REASON);
                    return Step::Continue;
                }
                Some(_) => {}
            }
        }
    }

    #[inline]
    fn polarity(&self, v: usize) -> bool {
        if self.config.phase_saving {
            if let Some(p) = self.saved_phase[v] {
                return p;
            }
        }
        self.default_phase[v]
    }

    #[inline]
    fn decision_level(&self) -> u32 {
        self.trail_lim.len() as u32
    }

    #[inline]
    fn lit_value(&self, l: Lit) -> i8 {
        let v = self.values[l.var()];
        if l.negated() {
            -v
        } else {
            v
        }
    }

    fn attach(&mut self, lits: Vec<Lit>, origin: Origin) -> u32 {
        debug_assert!(lits.len() >= 2);
        let cref = self.clauses.len() as u32;
        self.watches[lits[0].idx()].push(Watcher {
            cref,
            blocker: lits[1],
        });
        self.watches[lits[1].idx()].push(Watcher {
            cref,
            blocker: lits[0],
        });
        self.clauses.push(StoredClause {
            lits,
            origin,
            deleted: false,
            call: self.call_id,
            search: 2,
        });
        cref
    }

    fn enqueue(&mut self, lit: Lit, reason: u32) {
        let v = lit.var();
        debug_assert_eq!(self.values[v], 0);
        self.values[v] = if lit.negated() { -1 } else { 1 };
        self.level[v] = self.decision_level();
        self.reason[v] = reason;
        self.trail.push(lit);
        if reason != NO_REASON {
            if let Origin::Supplied(i) = self.clauses[reason as usize].origin {
                self.supplied_used[i as usize] = true;
            }
        }
    }

    /// Unit propagation over two watched literals. Returns the conflicting
    /// clause, if any.
    fn propagate(&mut self) -> Option<u32> {
        let mut conflict = None;
        while self.qhead < self.trail.len() {
            let p = self.trail[self.qhead];
            self.qhead += 1;
            self.stats.propagations += 1;
            let false_lit = p.not();
            let mut ws = std::mem::take(&mut self.watches[false_lit.idx()]);
            let mut i = 0;
            let mut j = 0;
            while i < ws.len() {
                let w = ws[i];
                i += 1;
                if self.lit_value(w.blocker) > 0 {
                    ws[j] = w;
                    j += 1;
                    continue;
                }
                let cref = w.cref as usize;
                if self.clauses[cref].deleted {
                    continue;
                }
                let first = {
                    let lits = &mut self.clauses[cref].lits;
                    if lits[0] == false_lit {
                        lits.swap(0, 1);
                    }
                    lits[0]
                };
                if first != w.blocker && self.lit_value(first) > 0 {
                    ws[j] = Watcher {
                        cref: w.cref,
                        blocker: first,
                    };
                    j += 1;
                    continue;
                }
                // resume the replacement search where the last one stopped
                let len = self.clauses[cref].lits.len();
                let start = self.clauses[cref].search as usize;
                let mut found = None;
                for k in (start..len).chain(2..start) {
                    if self.lit_value(self.clauses[cref].lits[k]) >= 0 {
                        found = Some(k);
                        break;
                    }
                }
                if let Some(k) = found {
                    let c = &mut self.clauses[cref];
                    c.lits.swap(1, k);
                    c.search = k as u32;
                    let l = c.lits[1];
                    self.watches[l.idx()].push(Watcher {
                        cref: w.cref,
                        blocker: first,
                    });
                    continue;
                }
                ws[j] = Watcher {
                    cref: w.cref,
                    blocker: first,
                };
                j += 1;
                if self.lit_value(first) < 0 {
                    conflict = Some(w.cref);
                    while i < ws.len() {
                        ws[j] = ws[i];
                        j += 1;
                        i += 1;
                    }
                } else {
                    self.enqueue(first, w.cref);
                }
            }
            ws.truncate(j);
            self.watches[false_lit.idx()] = ws;
            if conflict.is_some() {
                self.qhead = self.trail.len();
                break;
            }
        }
        conflict
    }

    fn distinct_levels(&mut self, lits: &[Lit]) -> u32 {
        self.stamp += 1;
        let mut count = 0;
        for &l in lits {
            let lvl = self.level[l.var()] as usize;
            if lvl >= self.level_stamp.len() {
                self.level_stamp.resize(lvl + 1, 0);
            }
            if self.level_stamp[lvl] != self.stamp {
                self.level_stamp[lvl] = self.stamp;
                count += 1;
            }
        }
        count
    }

    /// Marks a clause taking part in conflict analysis; supplied constraints
    /// get their LBD recomputed.
    fn note_participation(&mut self, cref: u32) {
        if let Origin::Supplied(i) = self.clauses[cref as usize].origin {
            self.supplied_used[i as usize] = true;
            let lits = std::mem::take(&mut self.clauses[cref as usize].lits);
            let lbd = self.distinct_levels(&lits);
            self.clauses[cref as usize].lits = lits;
            self.supplied_lbd[i as usize] = Some(lbd.max(1));
        }
    }

    /// First-UIP conflict analysis. Returns the learned clause with the
    /// asserting literal first and a literal of the backjump level second.
    fn analyze(&mut self, confl: u32) -> (Vec<Lit>, u32, u32) {
        let current = self.decision_level();
        let mut learnt: Vec<Lit> = vec![Lit(0)];
        let mut path = 0usize;
        let mut index = self.trail.len();
        let mut confl = confl;
        let mut asserting: Option<Lit> = None;

        loop {
            self.note_participation(confl);
            let start = if asserting.is_some() { 1 } else { 0 };
            let len = self.clauses[confl as usize].lits.len();
            for k in start..len {
                let q = self.clauses[confl as usize].lits[k];
                let v = q.var();
                if !self.seen[v] && self.level[v] > 0 {
                    self.seen[v] = true;
                    self.order.bump(v as u32);
                    if self.level[v] >= current {
                        path += 1;
                    } else {
                        learnt.push(q);
                    }
                }
            }
            loop {
                index -= 1;
                if self.seen[self.trail[index].var()] {
                    break;
                }
            }
            let p = self.trail[index];
            self.seen[p.var()] = false;
            path -= 1;
            asserting = Some(p);
            if path == 0 {
                break;
            }
            confl = self.reason[p.var()];
            debug_assert_ne!(confl, NO_REASON);
        }
        learnt[0] = asserting.expect("conflict above level 0").not();
        let mut learnt = self.minimize(learnt);

        let backjump = if learnt.len() == 1 {
            0
        } else {
            let mut best = 1;
            for k in 2..learnt.len() {
                if self.level[learnt[k].var()] > self.level[learnt[best].var()] {
                    best = k;
                }
            }
            learnt.swap(1, best);
            self.level[learnt[1].var()]
        };
        let lbd = self.distinct_levels(&learnt);
        (learnt, backjump, lbd)
    }

    /// Recursive minimization: drops every non-asserting literal whose
    /// reason is covered by the rest of the clause. Expects `seen` set for
    /// the literals of `learnt[1..]` and leaves it cleared.
    fn minimize(&mut self, learnt: Vec<Lit>) -> Vec<Lit> {
        let levels = learnt[1..]
            .iter()
            .fold(0u64, |acc, l| acc | self.abstract_level(l.var()));
        let mut out = Vec::with_capacity(learnt.len());
        out.push(learnt[0]);
        let mut cleared: Vec<usize> = learnt[1..].iter().map(|l| l.var()).collect();
        for &l in &learnt[1..] {
            if self.reason[l.var()] == NO_REASON || !self.redundant(l, levels, &mut cleared) {
                out.push(l);
            }
        }
        for v in cleared {
            self.seen[v] = false;
        }
        out
    }

    fn abstract_level(&self, v: usize) -> u64 {
        1 << (self.level[v] & 63)
    }

    fn redundant(&mut self, lit: Lit, levels: u64, cleared: &mut Vec<usize>) -> bool {
        let mut stack = vec![lit];
        let top = cleared.len();
        while let Some(p) = stack.pop() {
            let cref = self.reason[p.var()] as usize;
            for k in 0..self.clauses[cref].lits.len() {
                let q = self.clauses[cref].lits[k];
                let v = q.var();
                if v == p.var() || self.seen[v] || self.level[v] == 0 {
                    continue;
                }
                if self.reason[v] != NO_REASON && self.abstract_level(v) & levels != 0 {
                    self.seen[v] = true;
                    stack.push(q);
                    cleared.push(v);
                } else {
                    for &u in &cleared[top..] {
                        self.seen[u] = false;
                    }
                    cleared.truncate(top);
                    return false;
                }
            }
        }
        true
    }

    fn record_learned<S: BuildHasher>(&mut self, learnt: Vec<Lit>, lbd: u32, frozen: &HashSet<ClauseKey, S>) {
        // first-UIP clauses mention each variable once
        let mut codes: Vec<u32> = learnt.iter().map(|l| l.0).collect();
        codes.sort_unstable();
        let clause = Clause::from_canonical(codes.into_iter().map(|c| Lit(c).to_literal()).collect());
        let key = clause.key();
        let asserting = learnt[0];
        let record_idx = self.learned.len() as u32;
        let cref = if learnt.len() == 1 {
            self.enqueue(asserting, NO_REASON);
            None
        } else {
            let cref = self.attach(learnt, Origin::Learned(record_idx));
            self.enqueue(asserting, cref);
            Some(cref)
        };
        if frozen.contains(&key) {
            log::trace!("rediscovered frozen constraint {key}");
        }
        match self.learned_index.get(&key) {
            Some(&i) if !self.learned[i].deleted => {
                // live duplicate: keep the copy attached, report the clause once
                if let Some(c) = cref {
                    self.clauses[c as usize].origin = Origin::Learned(i as u32);
                }
            }
            _ => {
                self.learned_index.insert(key, self.learned.len());
                self.learned.push(LearnedRecord {
                    key,
                    clause,
                    lbd,
                    cref,
                    deleted: false,
                });
            }
        }
    }

    fn locked(&self, cref: u32) -> bool {
        let first = self.clauses[cref as usize].lits[0];
        self.lit_value(first) > 0 && self.reason[first.var()] == cref
    }

    /// Drops the worse half (highest LBD, then longest) of the unlocked
    /// clauses learned during this call.
    fn reduce_learned(&mut self) {
        let mut candidates: Vec<usize> = self
            .learned
            .iter()
            .enumerate()
            .filter(|(_, r)| !r.deleted)
            .filter_map(|(i, r)| r.cref.map(|c| (i, c)))
            .filter(|&(_, c)| !self.locked(c))
            .map(|(i, _)| i)
            .collect();
        candidates.sort_by(|&a, &b| {
            let (ra, rb) = (&self.learned[a], &self.learned[b]);
            rb.lbd
                .cmp(&ra.lbd)
                .then(rb.clause.len().cmp(&ra.clause.len()))
        });
        let drop = candidates.len() / 2;
        for &i in &candidates[..drop] {
            let cref = self.learned[i].cref.expect("attached") as usize;
            self.clauses[cref].deleted = true;
            self.garbage += 1;
            self.learned[i].deleted = true;
            self.stats.deleted += 1;
        }
        log::trace!("in-call deletion dropped {drop} learned clauses");
    }

    fn cancel_until(&mut self, level: u32) {
        if self.decision_level() <= level {
            return;
        }
        let stop = self.trail_lim[level as usize];
        self.unassign_from(stop);
        self.trail_lim.truncate(level as usize);
    }

    fn clear_trail(&mut self) {
        self.unassign_from(0);
        self.trail_lim.clear();
    }

    fn unassign_from(&mut self, stop: usize) {
        for i in (stop..self.trail.len()).rev() {
            let lit = self.trail[i];
            let v = lit.var();
            if self.config.phase_saving {
                self.saved_phase[v] = Some(!lit.negated());
            }
            self.values[v] = 0;
            self.reason[v] = NO_REASON;
            self.order.insert(v as u32);
        }
        self.trail.truncate(stop);
        self.qhead = self.qhead.min(stop);
    }
}

fn check_range(c: &Clause, atom_count: u32) -> Result<(), EngineError> {
    let max = c.max_atom();
    if max > atom_count {
        return Err(EngineError::OutOfRange {
            atom: max,
            atom_count,
        });
    }
    Ok(())
}

#[cfg(test)]
mod tests;
