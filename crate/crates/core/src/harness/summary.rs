//! Box-plot statistics over per-tick solve times.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::ResultRow;
use crate::error::HarnessError;

/// Quantile with linear interpolation between order statistics
/// (`h = (n - 1) p`). `sorted` must be ascending and non-empty.
pub fn quantile(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoxStats {
    pub count: usize,
    pub min: f64,
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
    pub max: f64,
    pub mean: f64,
    /// Values beyond 1.5 IQR from the box.
    pub outliers: Vec<f64>,
}

impl BoxStats {
    pub fn from_values(values: &[f64]) -> Option<BoxStats> {
        if values.is_empty() {
            return None;
        }
        let mut v = values.to_vec();
        v.sort_by(f64::total_cmp);
        let (q1, median, q3) = (quantile(&v, 0.25), quantile(&v, 0.5), quantile(&v, 0.75));
        let iqr = q3 - q1;
        let (lo, hi) = (q1 - 1.5 * iqr, q3 + 1.5 * iqr);
        Some(BoxStats {
            count: v.len(),
            min: v[0],
            q1,
            median,
            q3,
            max: v[v.len() - 1],
            mean: v.iter().sum::<f64>() / v.len() as f64,
            outliers: v.iter().copied().filter(|&x| x < lo || x > hi).collect(),
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SummaryRow {
    pub strategy: String,
    pub lambda: Option<f64>,
    pub wall_ms: BoxStats,
    pub conflicts: BoxStats,
    /// Solve times of the first tick of each run, which starts from an
    /// empty cache and a cold engine.
    pub first_tick_ms: Vec<f64>,
    pub timeouts: usize,
    pub incoherent: usize,
    /// Mean program load time, when build times are known.
    pub mean_build_ms: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub rows: Vec<SummaryRow>,
}

impl Summary {
    pub fn find(&self, strategy: &str, lambda: Option<f64>) -> Option<&SummaryRow> {
        self.rows
            .iter()
            .find(|r| r.strategy == strategy && r.lambda == lambda)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("summary serializes")
    }
}

/// Groups rows by strategy and learning rate. `build_ms` maps the same
/// groups to measured load times.
pub fn summarize_rows(
    rows: &[ResultRow],
    build_ms: &BTreeMap<(String, Option<u64>), Vec<f64>>,
) -> Result<Summary, HarnessError> {
    if rows.is_empty() {
        return Err(HarnessError::EmptyInput);
    }
    // lambda keyed by its bit pattern so groups stay in a BTreeMap
    let mut groups: BTreeMap<(String, Option<u64>), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.strategy.clone(), r.lambda.map(f64::to_bits)))
            .or_default()
            .push(r);
    }
    let mut out = Vec::new();
    for ((strategy, lambda), group) in groups {
        let walls: Vec<f64> = group.iter().map(|r| r.wall_ms).collect();
        let conflicts: Vec<f64> = group.iter().map(|r| r.conflicts as f64).collect();
        let first_tick = group.iter().map(|r| r.tick).min().unwrap_or(0);
        let builds = build_ms.get(&(strategy.clone(), lambda));
        out.push(SummaryRow {
            lambda: lambda.map(f64::from_bits),
            wall_ms: BoxStats::from_values(&walls).expect("group is non-empty"),
            conflicts: BoxStats::from_values(&conflicts).expect("group is non-empty"),
            first_tick_ms: group.iter().filter(|r| r.tick == first_tick).map(|r| r.wall_ms).collect(),
            timeouts: group.iter().filter(|r| r.status == "timeout").count(),
            incoherent: group.iter().filter(|r| r.status == "incoherent").count(),
            mean_build_ms: builds
                .filter(|b| !b.is_empty())
                .map(|b| b.iter().sum::<f64>() / b.len() as f64),
            strategy,
        });
    }
    Ok(Summary { rows: out })
}

pub fn summarize(rows: &[ResultRow]) -> Result<Summary, HarnessError> {
    summarize_rows(rows, &BTreeMap::new())
}
