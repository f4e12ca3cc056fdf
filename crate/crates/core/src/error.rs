use std::path::PathBuf;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ClauseError {
    #[error("empty clause")]
    EmptyClause,
    #[error("clause contains a literal and its complement")]
    Tautology,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EngineError {
    #[error("clause references atom {atom} but the program has {atom_count} atoms")]
    OutOfRange { atom: u32, atom_count: u32 },
    #[error("invalid engine configuration: {0}")]
    InvalidConfig(String),
    #[error("assumptions contain both polarities of atom {0}")]
    ComplementaryAssumptions(u32),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum CacheError {
    #[error("LBD must be at least 1, got {0}")]
    InvalidLbd(u32),
    #[error("invalid bandit policy: {0}")]
    InvalidPolicy(String),
    #[error("reward evidence sets more than one indicator")]
    InconsistentEvidence,
}

#[derive(Debug, Error)]
pub enum StreamError {
    #[error("unknown stream atom `{0}`")]
    UnknownAtom(String),
    #[error("delta at tick {tick} both adds and removes `{atom}`")]
    Overlap { tick: u64, atom: String },
    #[error("line {line}: {source}")]
    Parse {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error(transparent)]
    Engine(#[from] EngineError),
    #[error(transparent)]
    Cache(#[from] CacheError),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("no data rows in results")]
    EmptyInput,
    #[error("invalid experiment config: {0}")]
    InvalidConfig(String),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("results csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("results csv row {row}: {msg}")]
    BadRow { row: usize, msg: String },
    #[error(transparent)]
    Stream(#[from] StreamError),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
