//! Late fusion: concatenate per-item channel embeddings and train an MLP.
//!
//! Knowledge, text, and propagation vectors are concatenated in that fixed
//! order (restricted to the active modality mask), standardized per input
//! dimension with statistics fitted on the training split only, and fed to
//! a small feed-forward classifier over {Real, Fake}.

use rand::SeedableRng;
use rand::seq::SliceRandom;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::path::Path;
use thiserror::Error;

use crate::config::atomic_write;
use crate::corpus::Splits;
use crate::embedding::{validate_records, EmbeddingError, EmbeddingRecord, Modality};
use crate::numerics::{
    dropout_mask, softmax, value_and_grad, Adam, AdamConfig, Graph, NumericsError, ParamSet,
    Tensor, Var,
};

#[derive(Debug, Error)]
pub enum FusionError {
    #[error("a required {modality} vector is missing")]
    MissingModality { modality: Modality },
    #[error("item '{item_id}' lacks a required {modality} vector")]
    MissingModalityForItem { item_id: String, modality: Modality },
    #[error("input has dimension {found}, the model expects {expected}")]
    DimInconsistent { expected: usize, found: usize },
    #[error("training set contains a single class; need both Real and Fake examples")]
    SingleClassTrainingSet,
    #[error("item {item_id} has no label but appears in a training or validation split")]
    MissingLabel { item_id: String },
    #[error("invalid modality mask: {0}")]
    InvalidMask(String),
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint problem: {0}")]
    Checkpoint(String),
    #[error(transparent)]
    Embedding(#[from] EmbeddingError),
    #[error("numerics error: {0}")]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Which of the three channels feed the classifier.
///
/// Serializes as its canonical label ("K+P"), so masks read the same in
/// config files, checkpoints, and reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ModalityMask {
    pub k: bool,
    pub t: bool,
    pub p: bool,
}

impl Serialize for ModalityMask {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.label())
    }
}

impl<'de> Deserialize<'de> for ModalityMask {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let text = String::deserialize(deserializer)?;
        ModalityMask::parse(&text).map_err(serde::de::Error::custom)
    }
}

impl ModalityMask {
    pub fn new(k: bool, t: bool, p: bool) -> Result<ModalityMask, FusionError> {
        if !(k || t || p) {
            return Err(FusionError::InvalidMask(
                "at least one modality must be active".into(),
            ));
        }
        Ok(ModalityMask { k, t, p })
    }

    /// Parses labels like "K", "T+P", "K+T+P" (case-insensitive, any order).
    pub fn parse(text: &str) -> Result<ModalityMask, FusionError> {
        let mut mask = ModalityMask { k: false, t: false, p: false };
        for part in text.split('+') {
            let modality: Modality = part
                .trim()
                .parse()
                .map_err(FusionError::InvalidMask)?;
            let slot = match modality {
                Modality::K => &mut mask.k,
                Modality::T => &mut mask.t,
                Modality::P => &mut mask.p,
            };
            if *slot {
                return Err(FusionError::InvalidMask(format!(
                    "modality {modality} listed twice in '{text}'"
                )));
            }
            *slot = true;
        }
        ModalityMask::new(mask.k, mask.t, mask.p)
    }

    /// Canonical label in fixed K, T, P order.
    pub fn label(&self) -> String {
        let mut parts = Vec::new();
        if self.k {
            parts.push("K");
        }
        if self.t {
            parts.push("T");
        }
        if self.p {
            parts.push("P");
        }
        parts.join("+")
    }

    pub fn active(&self) -> Vec<Modality> {
        let mut out = Vec::new();
        if self.k {
            out.push(Modality::K);
        }
        if self.t {
            out.push(Modality::T);
        }
        if self.p {
            out.push(Modality::P);
        }
        out
    }

    pub fn contains(&self, modality: Modality) -> bool {
        match modality {
            Modality::K => self.k,
            Modality::T => self.t,
            Modality::P => self.p,
        }
    }

    /// The seven single- and multi-channel configurations, in report order.
    pub fn seven() -> [ModalityMask; 7] {
        let m = |k, t, p| ModalityMask { k, t, p };
        [
            m(true, false, false),
            m(false, true, false),
            m(false, false, true),
            m(true, true, false),
            m(false, true, true),
            m(true, false, true),
            m(true, true, true),
        ]
    }
}

/// Concatenates the active channels in K, T, P order.
pub fn fuse(
    h_k: Option<&[f64]>,
    h_t: Option<&[f64]>,
    h_p: Option<&[f64]>,
    mask: ModalityMask,
) -> Result<Vec<f64>, FusionError> {
    let mut out = Vec::new();
    for modality in mask.active() {
        let part = match modality {
            Modality::K => h_k,
            Modality::T => h_t,
            Modality::P => h_p,
        }
        .ok_or(FusionError::MissingModality { modality })?;
        out.extend_from_slice(part);
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FusionConfig {
    /// Hidden layer widths; one to three entries, so the network has two
    /// to four affine layers including the output.
    pub hidden_dims: Vec<usize>,
    pub dropout: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for FusionConfig {
    fn default() -> Self {
        FusionConfig {
            hidden_dims: vec![32],
            dropout: 0.1,
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 60,
        }
    }
}

impl FusionConfig {
    fn layer_count(&self) -> usize {
        self.hidden_dims.len() + 1
    }

    pub fn validate(&self) -> Result<(), FusionError> {
        if self.hidden_dims.is_empty() || self.hidden_dims.len() > 3 {
            return Err(FusionError::InvalidConfig(format!(
                "hidden_dims must have 1 to 3 entries, got {}",
                self.hidden_dims.len()
            )));
        }
        if self.hidden_dims.iter().any(|&d| d == 0) {
            return Err(FusionError::InvalidConfig("hidden dims must be positive".into()));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return Err(FusionError::InvalidConfig(format!(
                "dropout {} must lie in [0, 1)",
                self.dropout
            )));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return Err(FusionError::InvalidConfig(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return Err(FusionError::InvalidConfig(
                "batch_size and epochs must be positive".into(),
            ));
        }
        for &d in &self.hidden_dims {
            if !(8..=64).contains(&d) {
                log::warn!("hidden dim {d} is outside the tuned range [8, 64]");
            }
        }
        if self.dropout > 0.2 {
            log::warn!("dropout = {} is outside the tuned range [0, 0.2]", self.dropout);
        }
        Ok(())
    }
}

/// Per-dimension affine normalization fitted on the training split.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
}

impl Standardization {
    fn fit(vectors: &[&[f64]], dim: usize) -> Standardization {
        let n = vectors.len().max(1) as f64;
        let mut mean = vec![0.0; dim];
        for v in vectors {
            for (m, x) in mean.iter_mut().zip(v.iter()) {
                *m += x;
            }
        }
        for m in mean.iter_mut() {
            *m /= n;
        }
        let mut var = vec![0.0; dim];
        for v in vectors {
            for i in 0..dim {
                let d = v[i] - mean[i];
                var[i] += d * d;
            }
        }
        let std = var
            .into_iter()
            .map(|s| {
                let sd = (s / n).sqrt();
                // A constant dimension carries no signal; dividing by one
                // leaves it harmlessly constant instead of exploding.
                if sd < 1e-12 {
                    1.0
                } else {
                    sd
                }
            })
            .collect();
        Standardization { mean, std }
    }

    pub fn apply(&self, vector: &[f64]) -> Vec<f64> {
        vector
            .iter()
            .zip(self.mean.iter().zip(self.std.iter()))
            .map(|(x, (m, s))| (x - m) / s)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct FusionModel {
    pub config: FusionConfig,
    pub mask: ModalityMask,
    pub input_dim: usize,
    pub standardization: Standardization,
    pub params: ParamSet,
    /// Hash of the run configuration that trained this model, if known.
    pub config_hash: Option<String>,
}

/// One item's fused raw (unstandardized) input vector.
#[derive(Debug, Clone, PartialEq)]
pub struct FusedItem {
    pub item_id: String,
    pub vector: Vec<f64>,
    pub label: Option<u8>,
}

/// Builds fused vectors for the given item ids from per-modality records.
/// Labels come from the map where present.
pub fn assemble_items(
    records: &[EmbeddingRecord],
    ids: &[String],
    labels: &HashMap<String, u8>,
    mask: ModalityMask,
) -> Result<Vec<FusedItem>, FusionError> {
    validate_records(records)?;
    let mut by_item: HashMap<&str, [Option<&[f64]>; 3]> = HashMap::new();
    for r in records {
        let slot = match r.modality {
            Modality::K => 0,
            Modality::T => 1,
            Modality::P => 2,
        };
        by_item.entry(r.item_id.as_str()).or_default()[slot] = Some(r.vector.as_slice());
    }
    ids.iter()
        .map(|id| {
            let parts = by_item.get(id.as_str()).copied().unwrap_or_default();
            for modality in mask.active() {
                let slot = match modality {
                    Modality::K => 0,
                    Modality::T => 1,
                    Modality::P => 2,
                };
                if parts[slot].is_none() {
                    return Err(FusionError::MissingModalityForItem {
                        item_id: id.clone(),
                        modality,
                    });
                }
            }
            Ok(FusedItem {
                item_id: id.clone(),
                vector: fuse(parts[0], parts[1], parts[2], mask)?,
                label: labels.get(id).copied(),
            })
        })
        .collect()
}

fn logits_var(
    g: &mut Graph,
    input: Tensor,
    layer_count: usize,
    dropout: &mut Option<(f64, &mut ChaCha8Rng)>,
) -> Result<Var, NumericsError> {
    let mut h = g.constant(input);
    for layer in 0..layer_count {
        let w = g.param(&format!("w{layer}"))?;
        let b = g.param(&format!("b{layer}"))?;
        let affine = g.matmul(w, h)?;
        h = g.add(affine, b)?;
        if layer + 1 < layer_count {
            h = g.relu(h);
            if let Some((rate, rng)) = dropout.as_mut() {
                h = dropout_mask(g, h, *rate, *rng)?;
            }
        }
    }
    Ok(h)
}

/// Mean cross-entropy over a batch of standardized inputs; the training
/// objective, public so gradient checks can target it.
pub fn build_batch_loss(
    g: &mut Graph,
    batch: &[(&[f64], u8)],
    config: &FusionConfig,
) -> Result<Var, NumericsError> {
    batch_loss_impl(g, batch, config, &mut None)
}

fn batch_loss_impl(
    g: &mut Graph,
    batch: &[(&[f64], u8)],
    config: &FusionConfig,
    dropout: &mut Option<(f64, &mut ChaCha8Rng)>,
) -> Result<Var, NumericsError> {
    if batch.is_empty() {
        return Err(NumericsError::InvalidTensor("empty batch".into()));
    }
    let mut per_item = Vec::with_capacity(batch.len());
    for (vector, label) in batch {
        let logits = logits_var(
            g,
            Tensor::from_vec(vector.to_vec()),
            config.layer_count(),
            dropout,
        )?;
        per_item.push(g.softmax_cross_entropy(logits, *label as usize)?);
    }
    let total = g.add_n(&per_item)?;
    Ok(g.scale(total, 1.0 / batch.len() as f64))
}

fn init_params(
    config: &FusionConfig,
    input_dim: usize,
    rng: &mut ChaCha8Rng,
) -> Result<ParamSet, NumericsError> {
    let mut params = ParamSet::new();
    let mut sizes = vec![input_dim];
    sizes.extend_from_slice(&config.hidden_dims);
    sizes.push(2);
    for layer in 0..sizes.len() - 1 {
        params.insert(
            &format!("w{layer}"),
            Tensor::glorot(sizes[layer + 1], sizes[layer], rng),
        )?;
        params.insert(&format!("b{layer}"), Tensor::zeros(vec![sizes[layer + 1]]))?;
    }
    Ok(params)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
}

fn accuracy(
    params: &ParamSet,
    items: &[(Vec<f64>, u8)],
    config: &FusionConfig,
) -> Result<f64, FusionError> {
    let mut correct = 0usize;
    for (vector, label) in items {
        let mut g = Graph::new(params);
        let logits = logits_var(
            &mut g,
            Tensor::from_vec(vector.clone()),
            config.layer_count(),
            &mut None,
        )?;
        let data = g.value(logits).data();
        let pred: u8 = if data[1] > data[0] { 1 } else { 0 };
        if pred == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / items.len().max(1) as f64)
}

/// Trains the fusion MLP on pre-assembled records.
///
/// Standardization statistics come from the training split alone and are
/// stored on the model. The parameters of the epoch with the best
/// validation accuracy are returned (train accuracy stands in when the
/// validation split is empty; the earliest best epoch wins ties).
pub fn train_fusion(
    records: &[EmbeddingRecord],
    labels: &HashMap<String, u8>,
    splits: &Splits,
    mask: ModalityMask,
    config: &FusionConfig,
    seed: u64,
) -> Result<(FusionModel, Vec<EpochStats>), FusionError> {
    config.validate()?;
    let require_labels = |items: Vec<FusedItem>| -> Result<Vec<(Vec<f64>, u8)>, FusionError> {
        items
            .into_iter()
            .map(|item| {
                let label = item
                    .label
                    .ok_or(FusionError::MissingLabel { item_id: item.item_id })?;
                Ok((item.vector, label))
            })
            .collect()
    };
    let train_raw = require_labels(assemble_items(records, &splits.train, labels, mask)?)?;
    let val_raw = require_labels(assemble_items(records, &splits.validation, labels, mask)?)?;

    let classes: HashSet<u8> = train_raw.iter().map(|(_, l)| *l).collect();
    if classes.len() < 2 {
        return Err(FusionError::SingleClassTrainingSet);
    }
    let input_dim = train_raw[0].0.len();

    let train_vectors: Vec<&[f64]> = train_raw.iter().map(|(v, _)| v.as_slice()).collect();
    let standardization = Standardization::fit(&train_vectors, input_dim);
    let standardize = |raw: &[(Vec<f64>, u8)]| -> Vec<(Vec<f64>, u8)> {
        raw.iter()
            .map(|(v, l)| (standardization.apply(v), *l))
            .collect()
    };
    let train_items = standardize(&train_raw);
    let val_items = standardize(&val_raw);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = init_params(config, input_dim, &mut rng)?;
    let mut adam = Adam::new(AdamConfig {
        learning_rate: config.learning_rate,
        ..AdamConfig::default()
    });

    let mut history = Vec::with_capacity(config.epochs);
    let mut best_params = params.clone();
    let mut best_metric = f64::NEG_INFINITY;
    let mut order: Vec<usize> = (0..train_items.len()).collect();

    for epoch in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for chunk in order.chunks(config.batch_size) {
            let batch: Vec<(&[f64], u8)> = chunk
                .iter()
                .map(|&i| (train_items[i].0.as_slice(), train_items[i].1))
                .collect();
            let (loss, grads) = value_and_grad(&params, |g| {
                let mut dropout = Some((config.dropout, &mut rng));
                batch_loss_impl(g, &batch, config, &mut dropout)
            })?;
            adam.step(&mut params, &grads)?;
            loss_sum += loss * batch.len() as f64;
        }
        let train_loss = loss_sum / train_items.len() as f64;
        let train_accuracy = accuracy(&params, &train_items, config)?;
        let validation_accuracy = if val_items.is_empty() {
            None
        } else {
            Some(accuracy(&params, &val_items, config)?)
        };
        let metric = validation_accuracy.unwrap_or(train_accuracy);
        if metric > best_metric {
            best_metric = metric;
            best_params = params.clone();
        }
        history.push(EpochStats {
            epoch,
            train_loss,
            train_accuracy,
            validation_accuracy,
        });
    }

    Ok((
        FusionModel {
            config: config.clone(),
            mask,
            input_dim,
            standardization,
            params: best_params,
            config_hash: None,
        },
        history,
    ))
}

/// Classifies one raw (unstandardized) fused vector. Ties go to Real.
pub fn predict(model: &FusionModel, fused: &[f64]) -> Result<(u8, [f64; 2]), FusionError> {
    if fused.len() != model.input_dim {
        return Err(FusionError::DimInconsistent {
            expected: model.input_dim,
            found: fused.len(),
        });
    }
    let standardized = model.standardization.apply(fused);
    let mut g = Graph::new(&model.params);
    let logits = logits_var(
        &mut g,
        Tensor::from_vec(standardized),
        model.config.layer_count(),
        &mut None,
    )?;
    let probs = softmax(g.value(logits).data());
    let label = if probs[1] > probs[0] { 1 } else { 0 };
    Ok((label, [probs[0], probs[1]]))
}

/// One row of the fused-prediction report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusedPrediction {
    pub item_id: String,
    pub label: u8,
    /// Probability of the predicted label.
    pub probability: f64,
    pub mask: String,
}

pub fn predict_items(
    model: &FusionModel,
    items: &[FusedItem],
) -> Result<Vec<FusedPrediction>, FusionError> {
    items
        .iter()
        .map(|item| {
            let (label, probs) = predict(model, &item.vector)?;
            Ok(FusedPrediction {
                item_id: item.item_id.clone(),
                label,
                probability: probs[label as usize],
                mask: model.mask.label(),
            })
        })
        .collect()
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    #[serde(default)]
    config_hash: Option<String>,
    config: FusionConfig,
    mask: ModalityMask,
    input_dim: usize,
    standardization: Standardization,
    params: ParamSet,
}

const CHECKPOINT_FORMAT: &str = "newsgraph-fusion";

pub fn save_fusion(path: &Path, model: &FusionModel) -> Result<(), FusionError> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        version: 1,
        config_hash: model.config_hash.clone(),
        config: model.config.clone(),
        mask: model.mask,
        input_dim: model.input_dim,
        standardization: model.standardization.clone(),
        params: model.params.clone(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| FusionError::Checkpoint(e.to_string()))?;
    atomic_write(path, json.as_bytes())?;
    Ok(())
}

pub fn load_fusion(path: &Path) -> Result<FusionModel, FusionError> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| FusionError::Checkpoint(e.to_string()))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(FusionError::Checkpoint(format!(
            "expected format {CHECKPOINT_FORMAT}, found {}",
            file.format
        )));
    }
    if file.version != 1 {
        return Err(FusionError::Checkpoint(format!(
            "unsupported version {}",
            file.version
        )));
    }
    Ok(FusionModel {
        config: file.config,
        mask: file.mask,
        input_dim: file.input_dim,
        standardization: file.standardization,
        params: file.params,
        config_hash: file.config_hash,
    })
}
