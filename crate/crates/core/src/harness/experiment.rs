//! Strategy x learning-rate grids over generated streams.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::sync::Arc;
use std::time::Duration;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{run_stream, save_results, ResultRow, RunOptions};
use crate::cache::BanditPolicy;
use crate::error::HarnessError;
use crate::generate::{generate, ProblemSpec, Schema, StreamSpec};
use crate::session::Strategy;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProblemKind {
    Pup,
    Qc,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub problem: ProblemKind,
    /// PUP row lengths or QC board sizes.
    pub sizes: Vec<usize>,
    /// Any of `mrestart`, `rl`, `ps`, `c`.
    pub strategies: Vec<String>,
    pub lambdas: Vec<f64>,
    pub ticks: u64,
    /// Defaults per problem when unset.
    pub alpha: Option<f64>,
    pub p_restore: Option<f64>,
    pub schema: Option<Schema>,
    pub seeds: Vec<u64>,
    pub timeout_ms: Option<u64>,
    pub k: usize,
    pub n_store: usize,
    pub output_dir: PathBuf,
    /// Worker threads; 1 runs sessions one after another.
    pub jobs: usize,
}

impl ExperimentConfig {
    /// The full PUP grid: row lengths 6..=11, every strategy, four
    /// learning rates, one seed.
    pub fn pup_default(output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            problem: ProblemKind::Pup,
            sizes: (6..=11).collect(),
            strategies: vec!["mrestart".into(), "rl".into(), "ps".into(), "c".into()],
            lambdas: vec![0.01, 0.1, 0.5, 1.0],
            ticks: 256,
            alpha: None,
            p_restore: None,
            schema: None,
            seeds: vec![0],
            timeout_ms: None,
            k: BanditPolicy::DEFAULT_K,
            n_store: 2 * BanditPolicy::DEFAULT_K,
            output_dir: output_dir.into(),
            jobs: 1,
        }
    }

    /// The full QC grid: n in {14, 18, 22, 26, 30}.
    pub fn qc_default(output_dir: impl Into<PathBuf>) -> Self {
        ExperimentConfig {
            problem: ProblemKind::Qc,
            sizes: vec![14, 18, 22, 26, 30],
            ..Self::pup_default(output_dir)
        }
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: String| Err(HarnessError::InvalidConfig(m));
        if self.sizes.is_empty() || self.strategies.is_empty() || self.seeds.is_empty() {
            return bad("sizes, strategies and seeds must be non-empty".into());
        }
        if self.ticks == 0 {
            return bad("ticks must be positive".into());
        }
        let needs_lambda = self.strategies.iter().any(|s| s != "mrestart");
        if needs_lambda && self.lambdas.is_empty() {
            return bad("cache strategies need at least one lambda".into());
        }
        for s in &self.strategies {
            if Strategy::from_name(s, BanditPolicy::new(0.5)).is_none() {
                return bad(format!("unknown strategy `{s}`"));
            }
        }
        for &l in &self.lambdas {
            self.policy(l)
                .validate()
                .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        }
        for &size in &self.sizes {
            self.stream_spec(size, 0)
                .validate()
                .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        }
        Ok(())
    }

    fn policy(&self, lambda: f64) -> BanditPolicy {
        BanditPolicy::new(lambda).with_capacity(self.k, self.n_store)
    }

    pub fn stream_spec(&self, size: usize, seed: u64) -> StreamSpec {
        let mut spec = match self.problem {
            ProblemKind::Pup => StreamSpec::pup(size, seed),
            ProblemKind::Qc => StreamSpec::qc(size as u32, seed),
        };
        spec.ticks = self.ticks;
        if let Some(a) = self.alpha {
            spec.alpha = a;
        }
        if let Some(p) = self.p_restore {
            spec.p_restore = p;
        }
        if let Some(s) = &self.schema {
            spec.schema = s.clone();
        }
        spec
    }

    /// Strategies in run order; `mrestart` runs once, the others once per
    /// learning rate.
    pub fn strategy_grid(&self) -> Vec<Strategy> {
        let mut out = Vec::new();
        for name in &self.strategies {
            if name == "mrestart" {
                out.push(Strategy::MRestart);
            } else {
                for &l in &self.lambdas {
                    out.push(Strategy::from_name(name, self.policy(l)).expect("validated"));
                }
            }
        }
        out
    }

    pub fn csv_path(&self, size: usize) -> PathBuf {
        let tag = match self.problem {
            ProblemKind::Pup => "pup",
            ProblemKind::Qc => "qc",
        };
        self.output_dir.join(format!("{tag}_{size}.csv"))
    }
}

/// Per-session metadata written next to each CSV.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SessionRecord {
    pub size: usize,
    pub seed: u64,
    pub strategy: String,
    pub lambda: Option<f64>,
    /// Encoding time for the stream's instance.
    pub encode_ms: f64,
    /// Program load time of the session.
    pub build_ms: f64,
    /// Rows of this session in the CSV, 0-based and half-open.
    pub rows: (usize, usize),
}

#[derive(Debug, Clone)]
pub struct ExperimentOutput {
    pub csv_files: Vec<PathBuf>,
    pub sessions: Vec<SessionRecord>,
    pub rows: BTreeMap<usize, Vec<ResultRow>>,
}

fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("sessions.json")
}

/// Runs the grid and writes one CSV per size plus a `.sessions.json`
/// sidecar. Every strategy of a (size, seed) cell replays the same stream.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutput, HarnessError> {
    config.validate()?;
    std::fs::create_dir_all(&config.output_dir).map_err(|source| HarnessError::Io {
        path: config.output_dir.clone(),
        source,
    })?;
    let strategies = config.strategy_grid();
    let options = |seed| RunOptions {
        seed,
        timeout: config.timeout_ms.map(Duration::from_millis),
        verify: false,
    };
    let mut out = ExperimentOutput {
        csv_files: Vec::new(),
        sessions: Vec::new(),
        rows: BTreeMap::new(),
    };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs.max(1))
        .build()
        .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;

    for &size in &config.sizes {
        let mut rows = Vec::new();
        let mut records = Vec::new();
        for &seed in &config.seeds {
            let generated = generate(&config.stream_spec(size, seed))?;
            let start = std::time::Instant::now();
            let problem = Arc::new(generated.instance.encode());
            let encode_ms = start.elapsed().as_secs_f64() * 1e3;
            log::info!(
                "size {size} seed {seed}: {} atoms, {} clauses",
                problem.atom_count,
                problem.clauses.len()
            );
            let runs: Vec<_> = pool.install(|| {
                strategies
                    .par_iter()
                    .map(|st| {
                        run_stream(
                            &generated.instance,
                            problem.clone(),
                            &generated.deltas,
                            *st,
                            options(0),
                        )
                    })
                    .collect()
            });
            for (st, run) in strategies.iter().zip(runs) {
                let run = run?;
                let first = rows.len();
                rows.extend(run.ticks.iter().map(|t| ResultRow::from_tick(st, t)));
                records.push(SessionRecord {
                    size,
                    seed,
                    strategy: st.name().into(),
                    lambda: st.lambda(),
                    encode_ms,
                    build_ms: run.build_time.as_secs_f64() * 1e3,
                    rows: (first, rows.len()),
                });
            }
        }
        let path = config.csv_path(size);
        save_results(&path, &rows)?;
        let side = sidecar_path(&path);
        std::fs::write(&side, serde_json::to_string_pretty(&records)?).map_err(|source| {
            HarnessError::Io { path: side.clone(), source }
        })?;
        out.csv_files.push(path);
        out.sessions.extend(records);
        out.rows.insert(size, rows);
    }
    Ok(out)
}

/// Reads a CSV's sidecar into build times grouped by strategy and lambda.
pub fn load_build_times(csv: &Path) -> Result<BTreeMap<(String, Option<u64>), Vec<f64>>, HarnessError> {
    let side = sidecar_path(csv);
    let mut out: BTreeMap<(String, Option<u64>), Vec<f64>> = BTreeMap::new();
    if !side.exists() {
        return Ok(out);
    }
    let text = std::fs::read_to_string(&side).map_err(|source| HarnessError::Io {
        path: side.clone(),
        source,
    })?;
    let records: Vec<SessionRecord> = serde_json::from_str(&text)?;
    for r in records {
        out.entry((r.strategy, r.lambda.map(f64::to_bits)))
            .or_default()
            .push(r.encode_ms + r.build_ms);
    }
    Ok(out)
}

impl ProblemSpec {
    pub fn kind(&self) -> ProblemKind {
        match self {
            ProblemSpec::Pup { .. } => ProblemKind::Pup,
            ProblemSpec::Qc { .. } => ProblemKind::Qc,
        }
    }
}
