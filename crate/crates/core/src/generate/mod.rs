//! Benchmark stream generation: mutation schemas applied to a base
//! instance, with components picked by Zipf rank.

pub mod pup;
pub mod qc;
pub mod zipf;

use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::encode::pup::{encode_pup, PupInstance};
use crate::encode::qc::{encode_qc, QcInstance};
use crate::encode::EncodedProblem;
use crate::error::StreamError;
use crate::stream::Delta;

pub use pup::{gen_double_pup, gen_double_pup_with_entrances, PupStream};
pub use qc::{gen_qc_stream, QcStream};
pub use zipf::ZipfSampler;

/// Zipf exponents used by the benchmark families.
pub const ALPHA_PRESETS: [f64; 4] = [0.7, 1.35, 2.2, 3.64];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Mutation {
    /// Disable a zone (PUP) or rotate the board (QC).
    M1,
    /// Disable a sensor (PUP) or reveal a queen (QC).
    M2,
    /// Restore the base instance, gated by a Bernoulli draw.
    M3,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Schema(pub Vec<Mutation>);

impl Schema {
    pub fn pup_default() -> Self {
        Schema(vec![Mutation::M1, Mutation::M3, Mutation::M2, Mutation::M3])
    }

    pub fn qc_default() -> Self {
        Schema(vec![Mutation::M1, Mutation::M2, Mutation::M1, Mutation::M3])
    }

    /// The mutation applied at 0-based step `i`.
    pub fn at(&self, i: u64) -> Mutation {
        self.0[(i % self.0.len() as u64) as usize]
    }
}

impl FromStr for Schema {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let steps = s
            .split(',')
            .map(|t| match t.trim() {
                "m1" => Ok(Mutation::M1),
                "m2" => Ok(Mutation::M2),
                "m3" => Ok(Mutation::M3),
                other => Err(format!("unknown mutation `{other}`")),
            })
            .collect::<Result<Vec<_>, _>>()?;
        if steps.is_empty() {
            return Err("empty schema".into());
        }
        Ok(Schema(steps))
    }
}

impl TryFrom<String> for Schema {
    type Error = String;
    fn try_from(s: String) -> Result<Self, String> {
        s.parse()
    }
}

impl From<Schema> for String {
    fn from(s: Schema) -> String {
        s.to_string()
    }
}

impl fmt::Display for Schema {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<&str> = self
            .0
            .iter()
            .map(|m| match m {
                Mutation::M1 => "m1",
                Mutation::M2 => "m2",
                Mutation::M3 => "m3",
            })
            .collect();
        write!(f, "{}", parts.join(","))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemSpec {
    Pup { row_length: usize },
    Qc { n: u32 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamSpec {
    pub problem: ProblemSpec,
    pub ticks: u64,
    pub alpha: f64,
    pub p_restore: f64,
    pub schema: Schema,
    pub seed: u64,
}

impl StreamSpec {
    /// Row-length `n` double instance, schema `[m1,m3,m2,m3]`, p = 0.8,
    /// alpha = 2.2, 256 ticks.
    pub fn pup(row_length: usize, seed: u64) -> Self {
        StreamSpec {
            problem: ProblemSpec::Pup { row_length },
            ticks: 256,
            alpha: 2.2,
            p_restore: 0.8,
            schema: Schema::pup_default(),
            seed,
        }
    }

    /// `n x n` completion, schema `[m1,m2,m1,m3]`, p = 0.95, alpha = 1.35,
    /// 256 ticks.
    pub fn qc(n: u32, seed: u64) -> Self {
        StreamSpec {
            problem: ProblemSpec::Qc { n },
            ticks: 256,
            alpha: 1.35,
            p_restore: 0.95,
            schema: Schema::qc_default(),
            seed,
        }
    }

    pub fn with_ticks(mut self, ticks: u64) -> Self {
        self.ticks = ticks;
        self
    }

    pub fn validate(&self) -> Result<(), StreamError> {
        let bad = |m: &str| Err(StreamError::InvalidInstance(m.into()));
        if self.ticks == 0 {
            return bad("ticks must be at least 1");
        }
        if !(self.alpha > 0.0) {
            return bad("alpha must be positive");
        }
        if !(0.0..=1.0).contains(&self.p_restore) {
            return bad("restore probability must be in [0, 1]");
        }
        match self.problem {
            ProblemSpec::Pup { row_length } if row_length < 2 => bad("row length must be at least 2"),
            ProblemSpec::Qc { n } if n < 4 => bad("board size must be at least 4"),
            _ => Ok(()),
        }
    }
}

/// The base instance a stream mutates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "problem", rename_all = "snake_case")]
pub enum Instance {
    Pup(PupInstance),
    Qc(QcInstance),
}

impl Instance {
    pub fn encode(&self) -> EncodedProblem {
        match self {
            Instance::Pup(p) => encode_pup(p),
            Instance::Qc(q) => encode_qc(q.n, &q.placed),
        }
    }

    pub fn from_json(text: &str) -> Result<Self, StreamError> {
        let inst: Instance =
            serde_json::from_str(text).map_err(|e| StreamError::InvalidInstance(e.to_string()))?;
        match &inst {
            Instance::Pup(p) => p.validate()?,
            Instance::Qc(q) => q.validate()?,
        }
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn load(path: &Path) -> Result<Self, StreamError> {
        let text = std::fs::read_to_string(path).map_err(|source| StreamError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_json(&text)
    }

    pub fn save(&self, path: &Path) -> Result<(), StreamError> {
        std::fs::write(path, self.to_json()).map_err(|source| StreamError::Io {
            path: path.to_path_buf(),
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedStream {
    pub instance: Instance,
    pub deltas: Vec<Delta>,
}

/// Generates a full stream. Deterministic in `spec`.
pub fn generate(spec: &StreamSpec) -> Result<GeneratedStream, StreamError> {
    spec.validate()?;
    match spec.problem {
        ProblemSpec::Pup { row_length } => {
            let inst = gen_double_pup(row_length);
            let mut s = PupStream::new(inst.clone(), spec.alpha, spec.p_restore, spec.schema.clone(), spec.seed);
            let deltas = (0..spec.ticks).map(|_| s.next_delta()).collect();
            Ok(GeneratedStream {
                instance: Instance::Pup(inst),
                deltas,
            })
        }
        ProblemSpec::Qc { n } => {
            let (inst, deltas) = gen_qc_stream(n, spec.ticks, spec.alpha, spec.p_restore, spec.schema.clone(), spec.seed);
            Ok(GeneratedStream {
                instance: Instance::Qc(inst),
                deltas,
            })
        }
    }
}
