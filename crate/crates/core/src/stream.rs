//! Stream deltas and their JSON Lines form.
//!
//! One object per line: `{"tick": 3, "add": ["zone_off_z4"], "remove": []}`.

use std::collections::BTreeSet;
use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::StreamError;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Delta {
    pub tick: u64,
    #[serde(default)]
    pub add: Vec<String>,
    #[serde(default)]
    pub remove: Vec<String>,
}

impl Delta {
    pub fn new(tick: u64, add: Vec<String>, remove: Vec<String>) -> Result<Self, StreamError> {
        let d = Delta { tick, add, remove };
        d.validate()?;
        Ok(d)
    }

    pub fn empty(tick: u64) -> Self {
        Delta {
            tick,
            add: Vec::new(),
            remove: Vec::new(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.add.is_empty() && self.remove.is_empty()
    }

    /// Rejects atoms that are both added and removed.
    pub fn validate(&self) -> Result<(), StreamError> {
        let add: BTreeSet<&str> = self.add.iter().map(String::as_str).collect();
        if let Some(atom) = self.remove.iter().find(|a| add.contains(a.as_str())) {
            return Err(StreamError::Overlap {
                tick: self.tick,
                atom: atom.clone(),
            });
        }
        Ok(())
    }

    pub fn to_line(&self) -> String {
        serde_json::to_string(self).expect("delta serializes")
    }
}

/// Parses one stream line; `line` is the 1-based position for errors.
pub fn parse_delta_line(text: &str, line: usize) -> Result<Delta, StreamError> {
    let d: Delta =
        serde_json::from_str(text).map_err(|source| StreamError::Parse { line, source })?;
    d.validate()?;
    Ok(d)
}

/// Parses a whole stream, skipping blank lines.
pub fn read_stream<R: BufRead>(reader: R) -> Result<Vec<Delta>, StreamError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| StreamError::Io {
            path: "<stream>".into(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        out.push(parse_delta_line(&line, i + 1)?);
    }
    Ok(out)
}

pub fn write_stream<W: Write>(deltas: &[Delta], mut out: W) -> std::io::Result<()> {
    for d in deltas {
        writeln!(out, "{}", d.to_line())?;
    }
    Ok(())
}

pub fn load_stream(path: &Path) -> Result<Vec<Delta>, StreamError> {
    let file = std::fs::File::open(path).map_err(|source| StreamError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    read_stream(std::io::BufReader::new(file))
}

pub fn save_stream(path: &Path, deltas: &[Delta]) -> Result<(), StreamError> {
    let io = |source| StreamError::Io {
        path: path.to_path_buf(),
        source,
    };
    let file = std::fs::File::create(path).map_err(io)?;
    let mut w = std::io::BufWriter::new(file);
    write_stream(deltas, &mut w).map_err(io)?;
    w.flush().map_err(io)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn line_format_is_stable() {
        let d = Delta::new(3, vec!["zone_off_z4".into()], vec![]).unwrap();
        assert_eq!(d.to_line(), r#"{"tick":3,"add":["zone_off_z4"],"remove":[]}"#);
        assert_eq!(parse_delta_line(&d.to_line(), 1).unwrap(), d);
    }

    #[test]
    fn overlap_is_rejected() {
        let err = parse_delta_line(r#"{"tick":1,"add":["a"],"remove":["a"]}"#, 1).unwrap_err();
        assert!(matches!(err, StreamError::Overlap { tick: 1, .. }));
    }

    #[test]
    fn malformed_line_reports_position() {
        let text = "{\"tick\":1,\"add\":[],\"remove\":[]}\n\nnot json\n";
        let err = read_stream(text.as_bytes()).unwrap_err();
        assert!(matches!(err, StreamError::Parse { line: 3, .. }));
    }

    #[test]
    fn file_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("s.jsonl");
        let deltas = vec![
            Delta::new(1, vec!["queen_1_2".into()], vec![]).unwrap(),
            Delta::empty(2),
            Delta::new(3, vec![], vec!["queen_1_2".into()]).unwrap(),
        ];
        save_stream(&path, &deltas).unwrap();
        assert_eq!(load_stream(&path).unwrap(), deltas);
        assert!(matches!(
            load_stream(&dir.path().join("missing.jsonl")),
            Err(StreamError::Io { .. })
        ));
    }

    proptest! {
        #[test]
        fn serialization_round_trips(tick in any::<u64>(), add in proptest::collection::btree_set("[a-z_0-9]{1,8}", 0..5), remove in proptest::collection::btree_set("[A-Z]{1,8}", 0..5)) {
            let d = Delta::new(tick, add.into_iter().collect(), remove.into_iter().collect()).unwrap();
            let mut buf = Vec::new();
            write_stream(std::slice::from_ref(&d), &mut buf).unwrap();
            prop_assert_eq!(read_stream(buf.as_slice()).unwrap(), vec![d]);
        }
    }
}
