//! Experiment driver: replays generated streams under each strategy,
//! records per-tick measurements as CSV and summarizes them.

pub mod experiment;
pub mod summary;

use std::collections::BTreeSet;
use std::io::{Read, Write};
use std::path::Path;
use std::sync::Arc;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use crate::encode::pup::{check_pup_with, decode_pup};
use crate::encode::qc::{check_qc, decode_qc, parse_queen};
use crate::encode::EncodedProblem;
use crate::error::HarnessError;
use crate::generate::Instance;
use crate::session::{AssumptionState, Session, Strategy, TickResult};
use crate::stream::Delta;

pub use experiment::{run_experiment, ExperimentConfig, ExperimentOutput, ProblemKind};
pub use summary::{quantile, summarize, summarize_rows, BoxStats, Summary, SummaryRow};

pub const CSV_HEADER: &str =
    "tick,strategy,lambda,status,wall_ms,conflicts,decisions,active,frozen,deleted,new_learned";

/// One CSV data row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub tick: u64,
    pub strategy: String,
    pub lambda: Option<f64>,
    pub status: String,
    pub wall_ms: f64,
    pub conflicts: u64,
    pub decisions: u64,
    pub active: usize,
    pub frozen: usize,
    pub deleted: usize,
    pub new_learned: usize,
}

impl ResultRow {
    pub fn from_tick(strategy: &Strategy, r: &TickResult) -> Self {
        ResultRow {
            tick: r.tick,
            strategy: strategy.name().to_string(),
            lambda: strategy.lambda(),
            status: r.status.label().to_string(),
            wall_ms: r.wall_time.as_secs_f64() * 1e3,
            conflicts: r.conflicts,
            decisions: r.decisions,
            active: r.active,
            frozen: r.frozen,
            deleted: r.deleted,
            new_learned: r.new_learned,
        }
    }
}

pub fn write_results<W: Write>(rows: &[ResultRow], out: W) -> Result<(), HarnessError> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|source| HarnessError::Io {
        path: "<results>".into(),
        source,
    })?;
    Ok(())
}

/// Parses results CSV, insisting on the exact header.
pub fn read_results<R: Read>(input: R) -> Result<Vec<ResultRow>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(input);
    let header: Vec<String> = rdr.headers()?.iter().map(str::to_string).collect();
    if header.join(",") != CSV_HEADER {
        return Err(HarnessError::BadRow {
            row: 0,
            msg: format!("unexpected header `{}`", header.join(",")),
        });
    }
    let mut rows = Vec::new();
    for (i, rec) in rdr.deserialize().enumerate() {
        let row: ResultRow = rec.map_err(|e| HarnessError::BadRow {
            row: i + 1,
            msg: e.to_string(),
        })?;
        if !row.wall_ms.is_finite() || row.wall_ms < 0.0 {
            return Err(HarnessError::BadRow {
                row: i + 1,
                msg: format!("wall_ms must be a non-negative number, got {}", row.wall_ms),
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

pub fn save_results(path: &Path, rows: &[ResultRow]) -> Result<(), HarnessError> {
    let file = std::fs::File::create(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    write_results(rows, std::io::BufWriter::new(file))
}

pub fn load_results(path: &Path) -> Result<Vec<ResultRow>, HarnessError> {
    let file = std::fs::File::open(path).map_err(|source| HarnessError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_results(std::io::BufReader::new(file))
}

/// Checks a model against the current stream state with the independent
/// checkers. For completion instances the revealed queens must be kept.
pub fn verify_model(
    instance: &Instance,
    problem: &EncodedProblem,
    state: &AssumptionState,
    model: &[bool],
) -> bool {
    let on = |prefix: &str| -> BTreeSet<String> {
        state
            .truth
            .iter()
            .filter(|(_, &v)| v)
            .filter_map(|(k, _)| k.strip_prefix(prefix).map(str::to_string))
            .collect()
    };
    match instance {
        Instance::Pup(inst) => {
            let sol = decode_pup(model, problem);
            check_pup_with(inst, &on("zone_off_"), &on("sensor_off_"), &sol)
        }
        Instance::Qc(inst) => {
            let queens = decode_qc(model, problem);
            let placed = state
                .truth
                .iter()
                .filter(|(_, &v)| v)
                .filter_map(|(k, _)| parse_queen(k));
            let have: BTreeSet<_> = queens.iter().copied().collect();
            check_qc(inst.n, &queens) && placed.into_iter().all(|q| have.contains(&q))
        }
    }
}

/// Everything measured while replaying one stream under one strategy.
#[derive(Debug, Clone)]
pub struct StreamRun {
    pub ticks: Vec<TickResult>,
    /// Time to load the program into the engine.
    pub build_time: Duration,
    /// Models rejected by the checker; only counted when verification is on.
    pub invalid_models: usize,
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    pub seed: u64,
    pub timeout: Option<Duration>,
    pub verify: bool,
}

/// Replays `deltas` in one fresh session.
pub fn run_stream(
    instance: &Instance,
    problem: Arc<EncodedProblem>,
    deltas: &[Delta],
    strategy: Strategy,
    options: RunOptions,
) -> Result<StreamRun, HarnessError> {
    let start = Instant::now();
    let mut session = Session::open(problem.clone(), strategy, options.seed)?.with_timeout(options.timeout);
    let build_time = start.elapsed();
    let mut ticks = Vec::with_capacity(deltas.len());
    let mut invalid_models = 0;
    for d in deltas {
        let r = session.process_tick(d)?;
        if options.verify {
            if let Some(model) = r.status.model() {
                if !verify_model(instance, &problem, session.state(), model) {
                    invalid_models += 1;
                }
            }
        }
        ticks.push(r);
    }
    Ok(StreamRun {
        ticks,
        build_time,
        invalid_models,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(tick: u64, strategy: &str, lambda: Option<f64>, wall: f64) -> ResultRow {
        ResultRow {
            tick,
            strategy: strategy.into(),
            lambda,
            status: "model".into(),
            wall_ms: wall,
            conflicts: 3,
            decisions: 7,
            active: 1,
            frozen: 2,
            deleted: 0,
            new_learned: 4,
        }
    }

    #[test]
    fn csv_round_trip_with_exact_header() {
        let rows = vec![row(1, "rl", Some(0.5), 1.25), row(1, "mrestart", None, 2.0)];
        let mut buf = Vec::new();
        write_results(&rows, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next().unwrap(), CSV_HEADER);
        assert_eq!(text.lines().nth(2).unwrap(), "1,mrestart,,model,2.0,3,7,1,2,0,4");
        assert_eq!(read_results(buf.as_slice()).unwrap(), rows);
    }

    #[test]
    fn bad_csv_is_rejected() {
        assert!(read_results("a,b\n1,2\n".as_bytes()).is_err());
        let bad = format!("{CSV_HEADER}\n1,rl,0.5,model,oops,1,1,1,1,1,1\n");
        assert!(matches!(read_results(bad.as_bytes()), Err(HarnessError::BadRow { row: 1, .. })));
        let neg = format!("{CSV_HEADER}\n1,rl,0.5,model,-1,1,1,1,1,1,1\n");
        assert!(read_results(neg.as_bytes()).is_err());
    }
}
