//! Per-item embedding records exchanged between pipeline stages.
//!
//! The knowledge channel writes these after training; text and propagation
//! embeddings arrive from external tools in the same format. Files are
//! JSON lines with a single header object up front carrying the format
//! name and the config hash of the run that produced them.

use serde::{Deserialize, Serialize};
use std::collections::HashSet;
use std::fmt;
use std::io::{BufRead, BufReader};
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

use crate::config::atomic_write;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("malformed embedding record at {locus}: {message}")]
    MalformedRecord { locus: String, message: String },
    #[error("record for item {item_id} has dimension {found}, expected {expected}")]
    DimInconsistent {
        item_id: String,
        expected: usize,
        found: usize,
    },
    #[error("non-finite value in embedding for item {item_id}")]
    NonFinite { item_id: String },
    #[error("duplicate record for item {item_id} modality {modality}")]
    DuplicateItem { item_id: String, modality: Modality },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which channel an embedding came from: knowledge subgraphs, text, or the
/// propagation network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Modality {
    K,
    T,
    P,
}

impl fmt::Display for Modality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modality::K => write!(f, "K"),
            Modality::T => write!(f, "T"),
            Modality::P => write!(f, "P"),
        }
    }
}

impl FromStr for Modality {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "K" | "k" => Ok(Modality::K),
            "T" | "t" => Ok(Modality::T),
            "P" | "p" => Ok(Modality::P),
            other => Err(format!("unknown modality '{other}', expected K, T, or P")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingRecord {
    pub item_id: String,
    pub modality: Modality,
    pub vector: Vec<f64>,
    /// True when the item had no usable input in this channel (for the
    /// knowledge channel: no surviving entities); the vector is all zero.
    #[serde(default)]
    pub empty: bool,
}

#[derive(Serialize, Deserialize)]
struct Header {
    format: String,
    version: u32,
    config_hash: String,
}

const FORMAT: &str = "newsgraph-embeddings";

/// Checks that every record is finite and that dimensions agree within
/// each modality, and that no (item, modality) pair repeats.
pub fn validate_records(records: &[EmbeddingRecord]) -> Result<(), EmbeddingError> {
    let mut dims: Vec<(Modality, usize)> = Vec::new();
    let mut seen: HashSet<(&str, Modality)> = HashSet::new();
    for r in records {
        if !seen.insert((r.item_id.as_str(), r.modality)) {
            return Err(EmbeddingError::DuplicateItem {
                item_id: r.item_id.clone(),
                modality: r.modality,
            });
        }
        if r.vector.iter().any(|x| !x.is_finite()) {
            return Err(EmbeddingError::NonFinite {
                item_id: r.item_id.clone(),
            });
        }
        match dims.iter().find(|(m, _)| *m == r.modality) {
            Some(&(_, expected)) if expected != r.vector.len() => {
                return Err(EmbeddingError::DimInconsistent {
                    item_id: r.item_id.clone(),
                    expected,
                    found: r.vector.len(),
                });
            }
            Some(_) => {}
            None => dims.push((r.modality, r.vector.len())),
        }
    }
    Ok(())
}

pub fn write_embeddings(
    path: &Path,
    records: &[EmbeddingRecord],
    config_hash: &str,
) -> Result<(), EmbeddingError> {
    validate_records(records)?;
    let mut out = String::new();
    let header = Header {
        format: FORMAT.to_string(),
        version: 1,
        config_hash: config_hash.to_string(),
    };
    out.push_str(&serde_json::to_string(&header).expect("header serializes"));
    out.push('\n');
    for r in records {
        out.push_str(&serde_json::to_string(r).expect("record serializes"));
        out.push('\n');
    }
    atomic_write(path, out.as_bytes())?;
    Ok(())
}

/// Loads and validates an embedding file, returning the records and the
/// config hash from the header (None for bare files written by hand).
pub fn read_embeddings(path: &Path) -> Result<(Vec<EmbeddingRecord>, Option<String>), EmbeddingError> {
    let file = std::fs::File::open(path)?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    let mut hash = None;
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        if lineno == 0 {
            if let Ok(header) = serde_json::from_str::<Header>(&line) {
                if header.format != FORMAT {
                    return Err(EmbeddingError::MalformedRecord {
                        locus: format!("{}:1", path.display()),
                        message: format!("unexpected format '{}'", header.format),
                    });
                }
                hash = Some(header.config_hash);
                continue;
            }
        }
        let record: EmbeddingRecord =
            serde_json::from_str(&line).map_err(|e| EmbeddingError::MalformedRecord {
                locus: format!("{}:{}", path.display(), lineno + 1),
                message: e.to_string(),
            })?;
        records.push(record);
    }
    validate_records(&records)?;
    Ok((records, hash))
}
