//! Run configuration, seed derivation, and artifact hashing.
//!
//! Every pipeline stage stamps its outputs with a short hash of the
//! configuration that produced them, and every stage that needs randomness
//! derives its seed from one root seed plus a stage label. Reproducing a
//! run therefore takes exactly one number and one config file.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::io;
use std::path::Path;
use thiserror::Error;

use crate::corpus::{Ratios, SplitMode, SynthSpec};
use crate::fusion::{FusionConfig, ModalityMask};
use crate::subgnn::SubgnnConfig;
use crate::transe::TranseConfig;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("unknown config key '{key}'")]
    UnknownKey { key: String },
    #[error("invalid value for '{key}': {message}")]
    InvalidValue { key: String, message: String },
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// First 16 hex characters of the SHA-256 digest; collision-safe enough
/// for lineage checks while staying readable in logs and file headers.
pub fn short_hash(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

/// Derives a stage seed from the root seed and a stable label, so stages
/// are decorrelated but the whole run reproduces from one number.
pub fn seed_for(root_seed: u64, label: &str) -> u64 {
    let mut hasher = Sha256::new();
    hasher.update(root_seed.to_le_bytes());
    hasher.update(b":");
    hasher.update(label.as_bytes());
    let digest = hasher.finalize();
    u64::from_le_bytes(digest[..8].try_into().expect("digest is 32 bytes"))
}

/// Writes through a sibling temp file and renames, so readers never see a
/// half-written artifact. Creates parent directories as needed.
pub fn atomic_write(path: &Path, bytes: &[u8]) -> io::Result<()> {
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut tmp_name = path
        .file_name()
        .map(|n| n.to_os_string())
        .unwrap_or_else(|| "artifact".into());
    tmp_name.push(".tmp");
    let tmp = path.with_file_name(tmp_name);
    std::fs::write(&tmp, bytes)?;
    std::fs::rename(&tmp, path)
}

/// Everything a pipeline run needs: input paths, the root seed, split
/// policy, the active masks, and all module hyperparameters.
///
/// Loads from a flat `key = value` file or, by extension, from JSON.
/// Missing keys keep their defaults; unknown keys are errors in both
/// formats.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Corpus path: `.jsonl` documents or a `.conllu` file (with an
    /// optional coref sidecar).
    pub corpus: Option<String>,
    /// Coreference sidecar for CoNLL-U corpora.
    pub coref: Option<String>,
    /// Additional embedding-record files merged into every evaluation,
    /// e.g. externally produced text and propagation vectors.
    pub extra_embeddings: Vec<String>,
    /// Directory where every stage reads and writes its artifacts.
    pub output_dir: String,
    /// Root seed; each stage derives its own via [`seed_for`].
    pub seed: u64,
    pub ratios: Ratios,
    pub split_mode: SplitMode,
    /// Mask used by the fuse and time-sensitivity commands.
    pub mask: ModalityMask,
    /// Masks evaluated by the experiment matrix.
    pub masks: Vec<ModalityMask>,
    pub include_baselines: bool,
    pub subgnn: SubgnnConfig,
    pub transe: TranseConfig,
    pub fusion: FusionConfig,
    pub synth: SynthSpec,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            corpus: None,
            coref: None,
            extra_embeddings: Vec::new(),
            output_dir: "out".to_string(),
            seed: 17,
            ratios: Ratios::default(),
            split_mode: SplitMode::Random,
            mask: ModalityMask::new(true, false, false).expect("K mask"),
            masks: ModalityMask::seven().to_vec(),
            include_baselines: true,
            subgnn: SubgnnConfig::default(),
            transe: TranseConfig::default(),
            fusion: FusionConfig::default(),
            synth: SynthSpec::default(),
        }
    }
}

fn bad_value(key: &str, message: impl ToString) -> ConfigError {
    ConfigError::InvalidValue { key: key.to_string(), message: message.to_string() }
}

fn scalar<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.parse().map_err(|e: T::Err| bad_value(key, e))
}

fn scalar_list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError>
where
    T::Err: std::fmt::Display,
{
    value.split(',').map(|part| scalar(key, part.trim())).collect()
}

fn mask_value(key: &str, value: &str) -> Result<ModalityMask, ConfigError> {
    ModalityMask::parse(value).map_err(|e| bad_value(key, e))
}

impl RunConfig {
    /// Applies one `key = value` assignment.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match key {
            "corpus" => self.corpus = Some(value.to_string()),
            "coref" => self.coref = Some(value.to_string()),
            "extra_embeddings" => {
                self.extra_embeddings =
                    value.split(',').map(|p| p.trim().to_string()).collect();
            }
            "output_dir" => self.output_dir = value.to_string(),
            "seed" => self.seed = scalar(key, value)?,
            "ratios" => {
                let parts: Vec<f64> = scalar_list(key, value)?;
                if parts.len() != 3 {
                    return Err(bad_value(key, "expected train,validation,test"));
                }
                self.ratios = Ratios::new(parts[0], parts[1], parts[2]);
            }
            "split_mode" => {
                self.split_mode = match value {
                    "random" => SplitMode::Random,
                    "temporal" => SplitMode::Temporal,
                    other => {
                        return Err(bad_value(key, format!(
                            "unknown mode '{other}', expected random or temporal"
                        )))
                    }
                };
            }
            "mask" => self.mask = mask_value(key, value)?,
            "masks" => {
                self.masks = value
                    .split(',')
                    .map(|part| mask_value(key, part.trim()))
                    .collect::<Result<_, _>>()?;
            }
            "include_baselines" => self.include_baselines = scalar(key, value)?,
            "subgnn.layers" => self.subgnn.layers = scalar(key, value)?,
            "subgnn.hidden_dim" => self.subgnn.hidden_dim = scalar(key, value)?,
            "subgnn.n_anchors" => self.subgnn.n_anchors = scalar(key, value)?,
            "subgnn.walk_len" => self.subgnn.walk_len = scalar(key, value)?,
            "subgnn.p_tri" => self.subgnn.p_tri = scalar(key, value)?,
            "subgnn.dropout" => self.subgnn.dropout = scalar(key, value)?,
            "subgnn.c_max" => self.subgnn.c_max = scalar(key, value)?,
            "subgnn.s_max" => self.subgnn.s_max = scalar(key, value)?,
            "subgnn.learning_rate" => self.subgnn.learning_rate = scalar(key, value)?,
            "subgnn.batch_size" => self.subgnn.batch_size = scalar(key, value)?,
            "subgnn.epochs" => self.subgnn.epochs = scalar(key, value)?,
            "transe.dimension" => self.transe.dimension = scalar(key, value)?,
            "transe.margin" => self.transe.margin = scalar(key, value)?,
            "transe.learning_rate" => self.transe.learning_rate = scalar(key, value)?,
            "transe.epochs" => self.transe.epochs = scalar(key, value)?,
            "transe.aggregate" => {
                self.transe.aggregate = value.parse().map_err(|e: String| bad_value(key, e))?;
            }
            "fusion.hidden_dims" => self.fusion.hidden_dims = scalar_list(key, value)?,
            "fusion.dropout" => self.fusion.dropout = scalar(key, value)?,
            "fusion.learning_rate" => self.fusion.learning_rate = scalar(key, value)?,
            "fusion.batch_size" => self.fusion.batch_size = scalar(key, value)?,
            "fusion.epochs" => self.fusion.epochs = scalar(key, value)?,
            "synth.size" => self.synth.size = scalar(key, value)?,
            "synth.signal_strength" => self.synth.signal_strength = scalar(key, value)?,
            "synth.seed" => self.synth.seed = scalar(key, value)?,
            "synth.fake_fraction" => self.synth.fake_fraction = scalar(key, value)?,
            "synth.coref_fraction" => self.synth.coref_fraction = scalar(key, value)?,
            "synth.start_timestamp" => self.synth.start_timestamp = scalar(key, value)?,
            "synth.timestamp_step" => self.synth.timestamp_step = scalar(key, value)?,
            _ => return Err(ConfigError::UnknownKey { key: key.to_string() }),
        }
        Ok(())
    }

    /// Parses the flat format: one `key = value` per line, `#` comments,
    /// blank lines ignored.
    pub fn parse_flat(text: &str) -> Result<RunConfig, ConfigError> {
        let mut config = RunConfig::default();
        for (index, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| ConfigError::Parse {
                line: index + 1,
                message: format!("expected 'key = value', got '{line}'"),
            })?;
            config.set(key.trim(), value.trim())?;
        }
        Ok(config)
    }

    /// Canonical flat rendering; parsing it back reproduces the config.
    pub fn render_flat(&self) -> String {
        let mut out = String::new();
        let mut line = |key: &str, value: String| {
            out.push_str(key);
            out.push_str(" = ");
            out.push_str(&value);
            out.push('\n');
        };
        if let Some(corpus) = &self.corpus {
            line("corpus", corpus.clone());
        }
        if let Some(coref) = &self.coref {
            line("coref", coref.clone());
        }
        if !self.extra_embeddings.is_empty() {
            line("extra_embeddings", self.extra_embeddings.join(","));
        }
        line("output_dir", self.output_dir.clone());
        line("seed", self.seed.to_string());
        line(
            "ratios",
            format!("{},{},{}", self.ratios.train, self.ratios.validation, self.ratios.test),
        );
        line("split_mode", self.split_mode.to_string());
        line("mask", self.mask.label());
        line(
            "masks",
            self.masks.iter().map(|m| m.label()).collect::<Vec<_>>().join(","),
        );
        line("include_baselines", self.include_baselines.to_string());
        line("subgnn.layers", self.subgnn.layers.to_string());
        line("subgnn.hidden_dim", self.subgnn.hidden_dim.to_string());
        line("subgnn.n_anchors", self.subgnn.n_anchors.to_string());
        line("subgnn.walk_len", self.subgnn.walk_len.to_string());
        line("subgnn.p_tri", self.subgnn.p_tri.to_string());
        line("subgnn.dropout", self.subgnn.dropout.to_string());
        line("subgnn.c_max", self.subgnn.c_max.to_string());
        line("subgnn.s_max", self.subgnn.s_max.to_string());
        line("subgnn.learning_rate", self.subgnn.learning_rate.to_string());
        line("subgnn.batch_size", self.subgnn.batch_size.to_string());
        line("subgnn.epochs", self.subgnn.epochs.to_string());
        line("transe.dimension", self.transe.dimension.to_string());
        line("transe.margin", self.transe.margin.to_string());
        line("transe.learning_rate", self.transe.learning_rate.to_string());
        line("transe.epochs", self.transe.epochs.to_string());
        line("transe.aggregate", self.transe.aggregate.to_string());
        line(
            "fusion.hidden_dims",
            self.fusion
                .hidden_dims
                .iter()
                .map(|d| d.to_string())
                .collect::<Vec<_>>()
                .join(","),
        );
        line("fusion.dropout", self.fusion.dropout.to_string());
        line("fusion.learning_rate", self.fusion.learning_rate.to_string());
        line("fusion.batch_size", self.fusion.batch_size.to_string());
        line("fusion.epochs", self.fusion.epochs.to_string());
        line("synth.size", self.synth.size.to_string());
        line("synth.signal_strength", self.synth.signal_strength.to_string());
        line("synth.seed", self.synth.seed.to_string());
        line("synth.fake_fraction", self.synth.fake_fraction.to_string());
        line("synth.coref_fraction", self.synth.coref_fraction.to_string());
        line("synth.start_timestamp", self.synth.start_timestamp.to_string());
        line("synth.timestamp_step", self.synth.timestamp_step.to_string());
        out
    }

    /// Checks cross-field rules and delegates to each module's validator.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.ratios
            .validate(self.split_mode)
            .map_err(|e| bad_value("ratios", e))?;
        if self.masks.is_empty() && !self.include_baselines {
            return Err(bad_value(
                "masks",
                "no masks requested and baselines disabled; nothing to evaluate",
            ));
        }
        let mut seen = std::collections::HashSet::new();
        for mask in &self.masks {
            if !seen.insert(mask.label()) {
                return Err(bad_value("masks", format!("mask {} listed twice", mask.label())));
            }
        }
        self.subgnn.validate().map_err(|e| bad_value("subgnn", e))?;
        self.transe.validate().map_err(|e| bad_value("transe", e))?;
        self.fusion.validate().map_err(|e| bad_value("fusion", e))?;
        self.synth.validate().map_err(|e| bad_value("synth", e))?;
        Ok(())
    }
}

/// Loads a config file, picking the format by extension: `.json` parses as
/// JSON, everything else as the flat `key = value` format.
pub fn load_config(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| ConfigError::Parse {
            line: e.line(),
            message: e.to_string(),
        })
    } else {
        RunConfig::parse_flat(&text)
    }
}

/// Short digest of the canonical JSON form; artifacts carry this so a
/// later stage can refuse inputs produced under a different configuration.
pub fn config_hash(config: &RunConfig) -> String {
    let bytes = serde_json::to_vec(config).expect("config serialization");
    short_hash(&bytes)
}
