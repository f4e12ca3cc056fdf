//! Bandit-managed cache of learned constraints.
//!
//! Every cached constraint carries a weight, an estimate of the reward for
//! activating it. Before each solve the cache is ranked by weight: the top
//! `k` entries are handed to the engine, the next `n_store - k` are kept
//! frozen, and the rest are dropped. After the solve each entry receives a
//! reward built from its LBD and how the call treated it, and its weight
//! moves towards that reward by the learning rate:
//!
//! ```text
//! R = a * (1 - 2*lbd + ua - uf - 0.25*nf)
//! w <- w + lambda * (R - w)          (existing entries)
//! w <- w1 + lambda * R               (newly learned entries)
//! ```
//!
//! With `w1` far above any attainable reward (the maximum is 0) new
//! constraints are tried before the estimates settle.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::clause::{Clause, ClauseKey, KeyMap, KeySet};
use crate::engine::SolveOutcome;
use crate::error::CacheError;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BanditPolicy {
    /// Learning rate in (0, 1].
    pub lambda: f64,
    /// Optimistic initial weight.
    pub w1: f64,
    /// Reward scale.
    pub a: f64,
    /// Constraints activated per solve.
    pub k: usize,
    /// Total cache capacity (active + frozen).
    pub n_store: usize,
}

impl BanditPolicy {
    pub const DEFAULT_A: f64 = 20.0;
    pub const DEFAULT_K: usize = 3000;

    /// Defaults: `a = 20`, `w1 = 2a`, `k = 3000`, `n_store = 2k`.
    pub fn new(lambda: f64) -> Self {
        BanditPolicy {
            lambda,
            w1: 2.0 * Self::DEFAULT_A,
            a: Self::DEFAULT_A,
            k: Self::DEFAULT_K,
            n_store: 2 * Self::DEFAULT_K,
        }
    }

    pub fn with_capacity(mut self, k: usize, n_store: usize) -> Self {
        self.k = k;
        self.n_store = n_store;
        self
    }

    pub fn validate(&self) -> Result<(), CacheError> {
        if !(self.lambda > 0.0 && self.lambda <= 1.0) {
            return Err(CacheError::InvalidPolicy(format!(
                "lambda must be in (0,1], got {}",
                self.lambda
            )));
        }
        if self.k > self.n_store {
            return Err(CacheError::InvalidPolicy(format!(
                "k = {} exceeds n_store = {}",
                self.k, self.n_store
            )));
        }
        if self.n_store == 0 {
            return Err(CacheError::InvalidPolicy("n_store must be positive".into()));
        }
        if !(self.w1 > 0.0) {
            return Err(CacheError::InvalidPolicy(format!(
                "w1 must be positive, got {}",
                self.w1
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryStatus {
    Active,
    Frozen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CacheEntry {
    pub key: ClauseKey,
    pub clause: Clause,
    pub lbd: u32,
    pub weight: f64,
    pub status: EntryStatus,
    pub birth_tick: u64,
    pub last_reward_tick: u64,
}

/// Reward indicators for one entry after one call. At most one flag is set;
/// none set means "active but unused" (or a freshly learned clause).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct CallEvidence {
    pub ua: bool,
    pub uf: bool,
    pub nf: bool,
    pub lbd_now: u32,
}

impl CallEvidence {
    pub fn used_active(lbd: u32) -> Self {
        CallEvidence {
            ua: true,
            lbd_now: lbd,
            ..Default::default()
        }
    }

    pub fn idle_active(lbd: u32) -> Self {
        CallEvidence {
            lbd_now: lbd,
            ..Default::default()
        }
    }

    pub fn rediscovered(lbd: u32) -> Self {
        CallEvidence {
            uf: true,
            lbd_now: lbd,
            ..Default::default()
        }
    }

    pub fn idle_frozen(lbd: u32) -> Self {
        CallEvidence {
            nf: true,
            lbd_now: lbd,
            ..Default::default()
        }
    }
}

pub fn reward(evidence: &CallEvidence, policy: &BanditPolicy) -> Result<f64, CacheError> {
    if evidence.lbd_now < 1 {
        return Err(CacheError::InvalidLbd(evidence.lbd_now));
    }
    let flags = evidence.ua as u8 + evidence.uf as u8 + evidence.nf as u8;
    if flags > 1 {
        return Err(CacheError::InconsistentEvidence);
    }
    let ind = |b: bool| if b { 1.0 } else { 0.0 };
    Ok(policy.a
        * (1.0 - 2.0 * evidence.lbd_now as f64 + ind(evidence.ua)
            - ind(evidence.uf)
            - 0.25 * ind(evidence.nf)))
}

/// One step of the exponential recency-weighted average.
#[inline]
pub fn update_weight(weight: f64, reward: f64, lambda: f64) -> f64 {
    weight + lambda * (reward - weight)
}

/// The partition chosen for one tick.
#[derive(Debug, Clone, Default)]
pub struct Partition {
    /// Keys handed to the engine, best first.
    pub active: Vec<ClauseKey>,
    pub frozen: KeySet,
    /// Entries dropped from the cache at selection time.
    pub deleted: Vec<CacheEntry>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UpdateSummary {
    pub inserted: usize,
    pub rewarded: usize,
    /// Entries dropped to restore capacity after insertion.
    pub trimmed: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct SnapshotEntry {
    pub key: ClauseKey,
    pub lbd: u32,
    pub weight: f64,
    pub status: EntryStatus,
    pub birth_tick: u64,
}

#[derive(Debug, Clone, Default)]
pub struct ConstraintCache {
    entries: KeyMap<CacheEntry>,
}

fn rank(a: &CacheEntry, b: &CacheEntry) -> Ordering {
    b.weight
        .total_cmp(&a.weight)
        .then(a.lbd.cmp(&b.lbd))
        .then(a.birth_tick.cmp(&b.birth_tick))
        .then(a.key.cmp(&b.key))
}

impl ConstraintCache {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &ClauseKey) -> Option<&CacheEntry> {
        self.entries.get(key)
    }

    pub fn contains(&self, key: &ClauseKey) -> bool {
        self.entries.contains_key(key)
    }

    pub fn insert(&mut self, entry: CacheEntry) {
        self.entries.insert(entry.key, entry);
    }

    pub fn count(&self, status: EntryStatus) -> usize {
        self.entries.values().filter(|e| e.status == status).count()
    }

    /// Entries in rank order: weight descending, then LBD ascending, then
    /// older first, then key.
    pub fn ranked(&self) -> Vec<&CacheEntry> {
        let mut all: Vec<&CacheEntry> = self.entries.values().collect();
        all.sort_by(|a, b| rank(a, b));
        all
    }

    /// Ranks the cache, activates the first `k`, freezes the next
    /// `n_store - k` and removes the remainder.
    pub fn select_for_tick(&mut self, policy: &BanditPolicy) -> Partition {
        let order: Vec<ClauseKey> = self.ranked().into_iter().map(|e| e.key).collect();
        let mut partition = Partition::default();
        for (i, key) in order.into_iter().enumerate() {
            if i < policy.k {
                self.entries.get_mut(&key).expect("ranked key").status = EntryStatus::Active;
                partition.active.push(key);
            } else if i < policy.n_store {
                self.entries.get_mut(&key).expect("ranked key").status = EntryStatus::Frozen;
                partition.frozen.insert(key);
            } else {
                partition
                    .deleted
                    .push(self.entries.remove(&key).expect("ranked key"));
            }
        }
        partition
    }

    /// The active constraints of `partition`, in the form the engine takes.
    pub fn active_constraints(&self, partition: &Partition) -> Vec<(ClauseKey, Clause)> {
        partition
            .active
            .iter()
            .map(|k| (*k, self.entries[k].clause.clone()))
            .collect()
    }

    /// Derives the reward indicators of every entry in `partition` from a
    /// solve outcome.
    pub fn ingest_evidence(
        &self,
        outcome: &SolveOutcome,
        partition: &Partition,
    ) -> BTreeMap<ClauseKey, CallEvidence> {
        let mut evidence = BTreeMap::new();
        let usage: KeyMap<(bool, Option<u32>)> = outcome
            .usage
            .iter()
            .map(|u| (u.key, (u.used, u.refreshed_lbd)))
            .collect();
        for key in &partition.active {
            let Some(entry) = self.entries.get(key) else { continue };
            let (used, fresh) = usage.get(key).copied().unwrap_or((false, None));
            let lbd = fresh.unwrap_or(entry.lbd);
            let ev = if used {
                CallEvidence::used_active(lbd)
            } else {
                CallEvidence::idle_active(lbd)
            };
            evidence.insert(*key, ev);
        }
        for key in &partition.frozen {
            let Some(entry) = self.entries.get(key) else { continue };
            let ev = match outcome.rediscovered.get(key) {
                Some(&lbd) => CallEvidence::rediscovered(lbd),
                None => CallEvidence::idle_frozen(entry.lbd),
            };
            evidence.insert(*key, ev);
        }
        evidence
    }

    /// Applies one tick of rewards: existing entries move towards their
    /// reward, newly learned clauses enter with `w1 + lambda * R`, and the
    /// cache is trimmed back to `n_store`.
    pub fn update_weights(
        &mut self,
        outcome: &SolveOutcome,
        partition: &Partition,
        policy: &BanditPolicy,
        tick: u64,
    ) -> Result<UpdateSummary, CacheError> {
        let evidence = self.ingest_evidence(outcome, partition);
        let mut summary = UpdateSummary::default();
        for (key, ev) in &evidence {
            let r = reward(ev, policy)?;
            let entry = self.entries.get_mut(key).expect("evidence for cached key");
            entry.weight = update_weight(entry.weight, r, policy.lambda);
            entry.lbd = ev.lbd_now;
            entry.last_reward_tick = tick;
            summary.rewarded += 1;
        }
        for learned in &outcome.new_learned {
            if self.entries.contains_key(&learned.key) {
                continue;
            }
            let r = reward(&CallEvidence::idle_active(learned.lbd), policy)?;
            self.entries.insert(
                learned.key,
                CacheEntry {
                    key: learned.key,
                    clause: learned.clause.clone(),
                    lbd: learned.lbd,
                    weight: policy.w1 + policy.lambda * r,
                    status: EntryStatus::Frozen,
                    birth_tick: tick,
                    last_reward_tick: tick,
                },
            );
            summary.inserted += 1;
        }
        summary.trimmed = self.trim(policy.n_store).len();
        Ok(summary)
    }

    /// Removes the lowest-ranked entries beyond `capacity`.
    pub fn trim(&mut self, capacity: usize) -> Vec<CacheEntry> {
        if self.entries.len() <= capacity {
            return Vec::new();
        }
        let order: Vec<ClauseKey> = self.ranked().into_iter().map(|e| e.key).collect();
        order[capacity..]
            .iter()
            .map(|k| self.entries.remove(k).expect("ranked key"))
            .collect()
    }

    pub fn snapshot(&self) -> Vec<SnapshotEntry> {
        self.ranked()
            .into_iter()
            .map(|e| SnapshotEntry {
                key: e.key,
                lbd: e.lbd,
                weight: e.weight,
                status: e.status,
                birth_tick: e.birth_tick,
            })
            .collect()
    }

    pub fn snapshot_json(&self) -> serde_json::Result<String> {
        serde_json::to_string_pretty(&self.snapshot())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clause::Literal;
    use crate::engine::{ConstraintUsage, LearnedClause, SolveStats, SolveStatus};
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn clause(i: u32) -> Clause {
        Clause::new([Literal::pos(i), Literal::neg(i + 1)]).unwrap()
    }

    fn entry(i: u32, weight: f64, lbd: u32, birth: u64) -> CacheEntry {
        let c = clause(i);
        CacheEntry {
            key: c.key(),
            clause: c,
            lbd,
            weight,
            status: EntryStatus::Frozen,
            birth_tick: birth,
            last_reward_tick: birth,
        }
    }

    fn outcome() -> SolveOutcome {
        SolveOutcome {
            status: SolveStatus::Incoherent,
            new_learned: Vec::new(),
            usage: Vec::new(),
            rediscovered: BTreeMap::new(),
            stats: SolveStats::default(),
        }
    }

    fn policy(lambda: f64, k: usize, n: usize) -> BanditPolicy {
        BanditPolicy::new(lambda).with_capacity(k, n)
    }

    #[test]
    fn empty_cache_selects_nothing() {
        let p = ConstraintCache::new().select_for_tick(&policy(0.5, 2, 4));
        assert!(p.active.is_empty() && p.frozen.is_empty() && p.deleted.is_empty());
    }

    #[test]
    fn selection_orders_by_weight_then_lbd() {
        let mut cache = ConstraintCache::new();
        let entries = [
            entry(1, 9.0, 4, 0),
            entry(2, 7.0, 3, 0),
            entry(3, 7.0, 2, 0),
            entry(4, 3.0, 1, 0),
            entry(5, 1.0, 1, 0),
        ];
        for e in entries.iter().cloned() {
            cache.insert(e);
        }
        let p = cache.select_for_tick(&policy(0.5, 2, 4));
        assert_eq!(p.active, vec![entries[0].key, entries[2].key]);
        let frozen: KeySet = [entries[1].key, entries[3].key].into_iter().collect();
        assert_eq!(p.frozen, frozen);
        assert_eq!(p.deleted.len(), 1);
        assert_eq!(p.deleted[0].key, entries[4].key);
        assert_eq!(cache.len(), 4);
        assert_eq!(cache.count(EntryStatus::Active), 2);
    }

    #[test]
    fn ties_fall_back_to_birth_then_key() {
        let mut cache = ConstraintCache::new();
        let young = entry(1, 5.0, 2, 3);
        let old = entry(2, 5.0, 2, 1);
        cache.insert(young.clone());
        cache.insert(old.clone());
        let p = cache.select_for_tick(&policy(0.5, 1, 2));
        assert_eq!(p.active, vec![old.key]);
    }

    #[test]
    fn under_full_cache_is_all_active() {
        let mut cache = ConstraintCache::new();
        for i in 0..3 {
            cache.insert(entry(i + 1, i as f64, 1, 0));
        }
        let p = cache.select_for_tick(&policy(0.5, 5, 10));
        assert_eq!(p.active.len(), 3);
        assert!(p.frozen.is_empty() && p.deleted.is_empty());
    }

    #[test]
    fn reward_values() {
        let p = BanditPolicy::new(0.5);
        assert_eq!(reward(&CallEvidence::used_active(1), &p).unwrap(), 0.0);
        assert_eq!(reward(&CallEvidence::rediscovered(3), &p).unwrap(), -120.0);
        assert_eq!(reward(&CallEvidence::idle_frozen(2), &p).unwrap(), -65.0);
        assert_eq!(reward(&CallEvidence::idle_active(2), &p).unwrap(), -60.0);
        assert_eq!(
            reward(&CallEvidence::used_active(0), &p),
            Err(CacheError::InvalidLbd(0))
        );
        let bad = CallEvidence {
            ua: true,
            nf: true,
            lbd_now: 1,
            uf: false,
        };
        assert_eq!(reward(&bad, &p), Err(CacheError::InconsistentEvidence));
    }

    #[test]
    fn weight_update_rule() {
        assert_eq!(update_weight(40.0, -40.0, 0.1), 32.0);
        assert_eq!(update_weight(40.0, -73.5, 1.0), -73.5);
    }

    #[test]
    fn constant_reward_matches_closed_form() {
        for &lambda in &[0.01, 0.1, 0.5, 1.0] {
            let (w1, r) = (40.0, -25.0);
            let mut w = w1;
            for t in 1..=60 {
                w = update_weight(w, r, lambda);
                let decay = (1.0f64 - lambda).powi(t);
                let closed = decay * w1 + (1.0 - decay) * r;
                assert!((w - closed).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn evidence_classes() {
        let mut cache = ConstraintCache::new();
        let (a, b, c, d) = (entry(1, 9.0, 2, 0), entry(3, 8.0, 3, 0), entry(5, 7.0, 4, 0), entry(7, 6.0, 5, 0));
        for e in [&a, &b, &c, &d] {
            cache.insert((*e).clone());
        }
        let p = cache.select_for_tick(&policy(0.5, 2, 4));
        let mut out = outcome();
        out.usage = vec![
            ConstraintUsage { key: a.key, used: true, refreshed_lbd: Some(1) },
            ConstraintUsage { key: b.key, used: false, refreshed_lbd: None },
        ];
        out.rediscovered.insert(c.key, 2);
        let ev = cache.ingest_evidence(&out, &p);
        assert_eq!(ev[&a.key], CallEvidence::used_active(1));
        assert_eq!(ev[&b.key], CallEvidence::idle_active(3));
        assert_eq!(ev[&c.key], CallEvidence::rediscovered(2));
        assert_eq!(ev[&d.key], CallEvidence::idle_frozen(5));
    }

    #[test]
    fn rediscovered_frozen_entry_keeps_one_slot() {
        let mut cache = ConstraintCache::new();
        let e = entry(1, 10.0, 4, 0);
        cache.insert(e.clone());
        let pol = policy(0.5, 0, 4);
        let p = cache.select_for_tick(&pol);
        let mut out = outcome();
        out.rediscovered.insert(e.key, 2);
        out.new_learned.push(LearnedClause { key: e.key, clause: e.clause.clone(), lbd: 2 });
        let s = cache.update_weights(&out, &p, &pol, 1).unwrap();
        assert_eq!(s.inserted, 0);
        assert_eq!(cache.len(), 1);
        let got = cache.get(&e.key).unwrap();
        assert_eq!(got.lbd, 2);
        // R = 20 * (1 - 4 - 1) = -80
        assert_eq!(got.weight, 10.0 + 0.5 * (-80.0 - 10.0));
    }

    #[test]
    fn new_constraints_enter_optimistically() {
        let mut cache = ConstraintCache::new();
        let pol = policy(0.5, 2, 4);
        let p = cache.select_for_tick(&pol);
        let mut out = outcome();
        let c = clause(1);
        out.new_learned.push(LearnedClause { key: c.key(), clause: c.clone(), lbd: 3 });
        cache.update_weights(&out, &p, &pol, 7).unwrap();
        let got = cache.get(&c.key()).unwrap();
        assert_eq!(got.weight, 40.0 + 0.5 * 20.0 * (1.0 - 6.0));
        assert_eq!(got.birth_tick, 7);
    }

    #[test]
    fn optimism_beats_worn_down_entries() {
        for &lambda in &[0.01, 0.1, 0.5, 1.0] {
            let pol = BanditPolicy::new(lambda);
            let steps = ((pol.w1 / pol.a).ln() / lambda).ceil() as i32;
            for lbd in 1..=10 {
                let fresh = pol.w1 + lambda * reward(&CallEvidence::idle_active(lbd), &pol).unwrap();
                let worst = reward(&CallEvidence::rediscovered(lbd), &pol).unwrap();
                let mut w = pol.w1;
                for _ in 0..steps {
                    w = update_weight(w, worst, lambda);
                }
                assert!(fresh > w, "lambda={lambda} lbd={lbd}: {fresh} <= {w}");
            }
        }
    }

    #[test]
    fn idle_frozen_entry_decays_and_is_evicted() {
        let pol = policy(0.1, 2, 4);
        let mut cache = ConstraintCache::new();
        let idle = entry(100, pol.w1, 3, 0);
        cache.insert(idle.clone());
        let mut last = f64::INFINITY;
        let mut evicted_at = None;
        for tick in 1..=200u64 {
            let p = cache.select_for_tick(&pol);
            let mut out = outcome();
            // the active constraints are used every call
            out.usage = p
                .active
                .iter()
                .map(|k| ConstraintUsage { key: *k, used: true, refreshed_lbd: Some(1) })
                .collect();
            if tick <= 4 {
                let c = clause(tick as u32 * 2);
                out.new_learned.push(LearnedClause { key: c.key(), clause: c, lbd: 1 });
            }
            cache.update_weights(&out, &p, &pol, tick).unwrap();
            match cache.get(&idle.key) {
                Some(e) => {
                    if p.frozen.contains(&idle.key) {
                        assert!(e.weight < last);
                    }
                    last = e.weight;
                }
                None => {
                    evicted_at = Some(tick);
                    break;
                }
            }
        }
        assert!(evicted_at.is_some(), "idle entry never evicted");
    }

    #[test]
    fn snapshot_is_ranked_json() {
        let mut cache = ConstraintCache::new();
        cache.insert(entry(1, 1.0, 1, 0));
        cache.insert(entry(3, 2.0, 1, 0));
        let snap = cache.snapshot();
        assert!(snap[0].weight > snap[1].weight);
        let parsed: Vec<SnapshotEntry> = serde_json::from_str(&cache.snapshot_json().unwrap()).unwrap();
        assert_eq!(parsed, snap);
    }

    #[test]
    fn policy_validation() {
        assert!(BanditPolicy::new(0.5).validate().is_ok());
        assert!(BanditPolicy::new(0.0).validate().is_err());
        assert!(BanditPolicy::new(1.5).validate().is_err());
        assert!(BanditPolicy::new(0.5).with_capacity(5, 4).validate().is_err());
    }

    proptest! {
        #[test]
        fn capacity_holds_after_every_tick(seed in any::<u64>(), k in 0usize..6, extra in 1usize..6) {
            let pol = policy(0.5, k, k + extra);
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut cache = ConstraintCache::new();
            let mut next = 1u32;
            for tick in 0..30u64 {
                let p = cache.select_for_tick(&pol);
                prop_assert!(cache.count(EntryStatus::Active) <= pol.k);
                prop_assert!(cache.len() <= pol.n_store);
                let mut out = outcome();
                out.usage = p.active.iter().map(|key| ConstraintUsage {
                    key: *key, used: rng.gen(), refreshed_lbd: None,
                }).collect();
                for key in &p.frozen {
                    if rng.gen_bool(0.2) {
                        out.rediscovered.insert(*key, rng.gen_range(1..5));
                    }
                }
                for _ in 0..rng.gen_range(0..4) {
                    let c = clause(next);
                    next += 2;
                    out.new_learned.push(LearnedClause { key: c.key(), clause: c, lbd: rng.gen_range(1..6) });
                }
                cache.update_weights(&out, &p, &pol, tick).unwrap();
                prop_assert!(cache.count(EntryStatus::Active) <= pol.k);
                prop_assert!(cache.len() <= pol.n_store);
            }
        }
    }
}
