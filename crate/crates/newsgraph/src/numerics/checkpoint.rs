use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{NumericsError, ParamSet};

const FORMAT: &str = "newsgraph-params";
const VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    params: ParamSet,
}

/// Serializes a parameter set to versioned JSON.
pub fn save_params(path: &Path, params: &ParamSet) -> Result<(), NumericsError> {
    let file = CheckpointFile {
        format: FORMAT.to_string(),
        version: VERSION,
        params: params.clone(),
    };
    let body = serde_json::to_string_pretty(&file)
        .map_err(|e| NumericsError::Checkpoint(e.to_string()))?;
    std::fs::write(path, body).map_err(|e| NumericsError::Checkpoint(e.to_string()))
}

pub fn load_params(path: &Path) -> Result<ParamSet, NumericsError> {
    let body =
        std::fs::read_to_string(path).map_err(|e| NumericsError::Checkpoint(e.to_string()))?;
    let file: CheckpointFile =
        serde_json::from_str(&body).map_err(|e| NumericsError::Checkpoint(e.to_string()))?;
    if file.format != FORMAT {
        return Err(NumericsError::Checkpoint(format!("unexpected format '{}'", file.format)));
    }
    if file.version != VERSION {
        return Err(NumericsError::Checkpoint(format!("unsupported version {}", file.version)));
    }
    Ok(file.params)
}
