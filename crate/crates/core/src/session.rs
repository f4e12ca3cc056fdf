//! One stream, one solver: assumptions, cache and engine advanced tick by
//! tick.

use std::collections::BTreeMap;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::cache::{BanditPolicy, ConstraintCache, EntryStatus, Partition};
use crate::clause::Literal;
use crate::encode::{EncodedProblem, SelectorMap};
use crate::engine::{Engine, EngineConfig, SolveOutcome, SolveStatus};
use crate::error::StreamError;
use crate::stream::Delta;

/// Truth values of the stream atoms, persistent across ticks.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AssumptionState {
    pub truth: BTreeMap<String, bool>,
}

impl AssumptionState {
    pub fn new(initial: BTreeMap<String, bool>) -> Self {
        AssumptionState { truth: initial }
    }

    /// Applies a delta: added atoms become true, removed ones false.
    pub fn apply(&mut self, delta: &Delta, selectors: &SelectorMap) -> Result<(), StreamError> {
        delta.validate()?;
        for name in delta.add.iter().chain(&delta.remove) {
            if !selectors.contains(name) {
                return Err(StreamError::UnknownAtom(name.clone()));
            }
        }
        for name in &delta.add {
            self.truth.insert(name.clone(), true);
        }
        for name in &delta.remove {
            self.truth.insert(name.clone(), false);
        }
        Ok(())
    }

    /// One literal per selector: the selector literal for true atoms, its
    /// complement otherwise. Atoms never mentioned count as false.
    ///
    /// False atoms come first. The engine assigns assumptions one level
    /// each, and the few true atoms are the ones conflicts depend on, so
    /// backjumps then rarely have to redo the long inert prefix.
    pub fn literals(&self, selectors: &SelectorMap) -> Vec<Literal> {
        let mut off = Vec::with_capacity(selectors.len());
        let mut on = Vec::new();
        for (name, lit) in selectors.iter() {
            if self.truth.get(name).copied().unwrap_or(false) {
                on.push(lit);
            } else {
                off.push(!lit);
            }
        }
        off.extend(on);
        off
    }
}

/// Returns the updated state and the assumption literals for the engine.
pub fn update_assumptions(
    delta: &Delta,
    state: &AssumptionState,
    selectors: &SelectorMap,
) -> Result<(AssumptionState, Vec<Literal>), StreamError> {
    let mut next = state.clone();
    next.apply(delta, selectors)?;
    let lits = next.literals(selectors);
    Ok((next, lits))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum Strategy {
    /// Fresh engine every tick; nothing carried over.
    MRestart,
    /// Bandit cache plus phase saving.
    Rl(BanditPolicy),
    /// Phase saving only: every cached constraint stays frozen.
    PsOnly(BanditPolicy),
    /// Bandit cache without phase saving.
    COnly(BanditPolicy),
}

impl Strategy {
    pub fn name(&self) -> &'static str {
        match self {
            Strategy::MRestart => "mrestart",
            Strategy::Rl(_) => "rl",
            Strategy::PsOnly(_) => "ps",
            Strategy::COnly(_) => "c",
        }
    }

    /// Builds a strategy from its short name.
    pub fn from_name(name: &str, policy: BanditPolicy) -> Option<Self> {
        Some(match name {
            "mrestart" => Strategy::MRestart,
            "rl" => Strategy::Rl(policy),
            "ps" => Strategy::PsOnly(policy),
            "c" => Strategy::COnly(policy),
            _ => return None,
        })
    }

    /// The policy the cache actually runs with.
    pub fn policy(&self) -> Option<BanditPolicy> {
        match *self {
            Strategy::MRestart => None,
            Strategy::Rl(p) | Strategy::COnly(p) => Some(p),
            Strategy::PsOnly(p) => Some(BanditPolicy { k: 0, ..p }),
        }
    }

    pub fn lambda(&self) -> Option<f64> {
        self.policy().map(|p| p.lambda)
    }

    pub fn phase_saving(&self) -> bool {
        matches!(self, Strategy::Rl(_) | Strategy::PsOnly(_))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TickResult {
    pub tick: u64,
    pub status: SolveStatus,
    /// Wall-clock time of the solve call alone.
    pub wall_time: Duration,
    pub conflicts: u64,
    pub decisions: u64,
    pub active: usize,
    pub frozen: usize,
    pub deleted: usize,
    pub new_learned: usize,
}

pub struct Session {
    problem: Arc<EncodedProblem>,
    strategy: Strategy,
    config: EngineConfig,
    engine: Engine,
    cache: ConstraintCache,
    state: AssumptionState,
    timeout: Option<Duration>,
    ticks: u64,
}

impl Session {
    /// Loads the program once. `seed` seeds the engine's initial activities
    /// and polarities; 0 keeps them neutral.
    pub fn open(
        problem: Arc<EncodedProblem>,
        strategy: Strategy,
        seed: u64,
    ) -> Result<Session, StreamError> {
        if let Some(p) = strategy.policy() {
            p.validate()?;
        }
        let config = EngineConfig {
            phase_saving: strategy.phase_saving(),
            seed,
            ..EngineConfig::default()
        };
        let engine = Engine::load_program(&problem.clauses, problem.atom_count, config.clone())?;
        let state = AssumptionState::new(problem.initial_truth.clone());
        Ok(Session {
            problem,
            strategy,
            config,
            engine,
            cache: ConstraintCache::new(),
            state,
            timeout: None,
            ticks: 0,
        })
    }

    /// Caps each solve call; a capped call reports `Timeout`.
    pub fn with_timeout(mut self, timeout: Option<Duration>) -> Self {
        self.timeout = timeout;
        self
    }

    pub fn strategy(&self) -> &Strategy {
        &self.strategy
    }

    pub fn problem(&self) -> &EncodedProblem {
        &self.problem
    }

    pub fn engine(&self) -> &Engine {
        &self.engine
    }

    pub fn cache(&self) -> &ConstraintCache {
        &self.cache
    }

    pub fn state(&self) -> &AssumptionState {
        &self.state
    }

    pub fn ticks_processed(&self) -> u64 {
        self.ticks
    }

    /// Runs one tick. An unknown atom leaves the session untouched.
    pub fn process_tick(&mut self, delta: &Delta) -> Result<TickResult, StreamError> {
        let (state, assumptions) = update_assumptions(delta, &self.state, &self.problem.selectors)?;
        self.state = state;
        self.ticks += 1;

        let Some(policy) = self.strategy.policy() else {
            self.engine =
                Engine::load_program(&self.problem.clauses, self.problem.atom_count, self.config.clone())?;
            let (outcome, wall) = self.solve(&assumptions, &[], &Partition::default())?;
            return Ok(self.result(delta.tick, outcome, wall, 0, 0, 0));
        };

        let partition = self.cache.select_for_tick(&policy);
        let active = self.cache.active_constraints(&partition);
        let (outcome, wall) = self.solve(&assumptions, &active, &partition)?;
        let summary = self
            .cache
            .update_weights(&outcome, &partition, &policy, delta.tick)?;
        log::debug!(
            "tick {} {}: {} conflicts, {} learned, cache {}",
            delta.tick,
            outcome.status.label(),
            outcome.stats.conflicts,
            outcome.new_learned.len(),
            self.cache.len()
        );
        Ok(self.result(
            delta.tick,
            outcome,
            wall,
            partition.active.len(),
            partition.frozen.len(),
            partition.deleted.len() + summary.trimmed,
        ))
    }

    fn solve(
        &mut self,
        assumptions: &[Literal],
        active: &[(crate::clause::ClauseKey, crate::clause::Clause)],
        partition: &Partition,
    ) -> Result<(SolveOutcome, Duration), StreamError> {
        let start = Instant::now();
        let deadline = self.timeout.map(|t| start + t);
        let outcome =
            self.engine
                .solve_with_deadline(assumptions, active, &partition.frozen, deadline)?;
        Ok((outcome, start.elapsed()))
    }

    fn result(
        &self,
        tick: u64,
        outcome: SolveOutcome,
        wall_time: Duration,
        active: usize,
        frozen: usize,
        deleted: usize,
    ) -> TickResult {
        TickResult {
            tick,
            wall_time,
            conflicts: outcome.stats.conflicts,
            decisions: outcome.stats.decisions,
            active,
            frozen,
            deleted,
            new_learned: outcome.new_learned.len(),
            status: outcome.status,
        }
    }

    /// Current cache contents split by status.
    pub fn cache_sizes(&self) -> (usize, usize) {
        (
            self.cache.count(EntryStatus::Active),
            self.cache.count(EntryStatus::Frozen),
        )
    }
}
