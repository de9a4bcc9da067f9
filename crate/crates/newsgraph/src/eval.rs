//! Evaluation: binary classification metrics, the modality-mask experiment
//! matrix, and the weekly time-sensitivity analysis.
//!
//! Fake (label 1) is the positive class throughout. Precision and recall
//! fall back to 0 when their denominator is 0; the report records when that
//! convention fired so degenerate rows are visible.

use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

use crate::config::{seed_for, short_hash};
use crate::corpus::Splits;
use crate::embedding::{EmbeddingRecord, Modality};
use crate::fusion::{
    assemble_items, predict, train_fusion, FusionConfig, FusionError, ModalityMask,
};
use crate::relex::Triple;
use crate::transe::{classify_bias, train_transe, BiasAggregate, TranseConfig, TranseError};

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("predictions and labels differ in length ({predictions} vs {labels})")]
    LengthMismatch { predictions: usize, labels: usize },
    #[error("cannot compute metrics over an empty prediction set")]
    EmptyInput,
    #[error("class value {value} is not a valid binary label")]
    InvalidLabel { value: u8 },
    #[error(
        "item '{item_id}' at {timestamp} predates the last training item at {last_train_timestamp}"
    )]
    NegativeDelta {
        item_id: String,
        timestamp: i64,
        last_train_timestamp: i64,
    },
    #[error("item '{item_id}' has no label, required for evaluation")]
    MissingLabel { item_id: String },
    #[error("invalid evaluation configuration: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Fusion(#[from] FusionError),
    #[error("baseline failed: {0}")]
    Transe(#[from] TranseError),
}

pub const WEEKS: usize = 26;
pub const SECONDS_PER_WEEK: i64 = 7 * 86_400;

/// Confusion counts and the four derived scores, with Fake (1) positive.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Metrics {
    pub accuracy: f64,
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
    pub true_positives: usize,
    pub false_positives: usize,
    pub false_negatives: usize,
    pub true_negatives: usize,
    /// Set when precision's denominator (predicted positives) was 0.
    pub undefined_precision: bool,
    /// Set when recall's denominator (actual positives) was 0.
    pub undefined_recall: bool,
}

impl Metrics {
    pub fn from_counts(tp: usize, fp: usize, fn_: usize, tn: usize) -> Metrics {
        let total = tp + fp + fn_ + tn;
        let accuracy = if total == 0 {
            0.0
        } else {
            (tp + tn) as f64 / total as f64
        };
        let undefined_precision = tp + fp == 0;
        let precision = if undefined_precision {
            0.0
        } else {
            tp as f64 / (tp + fp) as f64
        };
        let undefined_recall = tp + fn_ == 0;
        let recall = if undefined_recall {
            0.0
        } else {
            tp as f64 / (tp + fn_) as f64
        };
        let f1 = if precision + recall == 0.0 {
            0.0
        } else {
            2.0 * precision * recall / (precision + recall)
        };
        Metrics {
            accuracy,
            precision,
            recall,
            f1,
            true_positives: tp,
            false_positives: fp,
            false_negatives: fn_,
            true_negatives: tn,
            undefined_precision,
            undefined_recall,
        }
    }

    pub fn total(&self) -> usize {
        self.true_positives + self.false_positives + self.false_negatives + self.true_negatives
    }
}

pub fn compute_metrics(predictions: &[u8], labels: &[u8]) -> Result<Metrics, EvalError> {
    if predictions.len() != labels.len() {
        return Err(EvalError::LengthMismatch {
            predictions: predictions.len(),
            labels: labels.len(),
        });
    }
    if predictions.is_empty() {
        return Err(EvalError::EmptyInput);
    }
    if let Some(&value) = predictions.iter().chain(labels.iter()).find(|&&v| v > 1) {
        return Err(EvalError::InvalidLabel { value });
    }
    let mut tp = 0;
    let mut fp = 0;
    let mut fn_ = 0;
    let mut tn = 0;
    for (&pred, &label) in predictions.iter().zip(labels.iter()) {
        match (pred, label) {
            (1, 1) => tp += 1,
            (1, 0) => fp += 1,
            (0, 1) => fn_ += 1,
            _ => tn += 1,
        }
    }
    Ok(Metrics::from_counts(tp, fp, fn_, tn))
}

/// One scored test item with its publication time.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimedPrediction {
    pub item_id: String,
    pub timestamp: i64,
    pub prediction: u8,
    pub label: u8,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeekRow {
    /// 1-based week index.
    pub week: usize,
    pub count: usize,
    /// Absent for weeks with no test items.
    pub metrics: Option<Metrics>,
}

/// Weekly performance over the 26 weeks after the last training item.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WeeklyReport {
    #[serde(default)]
    pub config_hash: Option<String>,
    pub last_train_timestamp: i64,
    /// Always exactly 26 rows, weeks 1 through 26.
    pub weeks: Vec<WeekRow>,
    pub retained: usize,
    /// Test items falling after week 26, excluded from the rows.
    pub dropped_late: usize,
}

/// Buckets test items by whole weeks elapsed since the last training item
/// (week 1 starts at zero elapsed time) and scores each bucket.
pub fn weekly_buckets(
    items: &[TimedPrediction],
    last_train_timestamp: i64,
) -> Result<WeeklyReport, EvalError> {
    let mut buckets: Vec<Vec<usize>> = vec![Vec::new(); WEEKS];
    let mut dropped_late = 0usize;
    for (index, item) in items.iter().enumerate() {
        let delta = item.timestamp - last_train_timestamp;
        if delta < 0 {
            return Err(EvalError::NegativeDelta {
                item_id: item.item_id.clone(),
                timestamp: item.timestamp,
                last_train_timestamp,
            });
        }
        let week = (delta / SECONDS_PER_WEEK) as usize + 1;
        if week > WEEKS {
            dropped_late += 1;
        } else {
            buckets[week - 1].push(index);
        }
    }
    let mut weeks = Vec::with_capacity(WEEKS);
    let mut retained = 0usize;
    for (i, bucket) in buckets.iter().enumerate() {
        retained += bucket.len();
        let metrics = if bucket.is_empty() {
            None
        } else {
            let preds: Vec<u8> = bucket.iter().map(|&j| items[j].prediction).collect();
            let labels: Vec<u8> = bucket.iter().map(|&j| items[j].label).collect();
            Some(compute_metrics(&preds, &labels)?)
        };
        weeks.push(WeekRow {
            week: i + 1,
            count: bucket.len(),
            metrics,
        });
    }
    Ok(WeeklyReport {
        config_hash: None,
        last_train_timestamp,
        weeks,
        retained,
        dropped_late,
    })
}

/// Everything run_matrix needs: per-item channel embeddings, labels, the
/// split assignment, and raw triples for the bias baselines.
pub struct MatrixInputs<'a> {
    pub records: &'a [EmbeddingRecord],
    pub labels: &'a HashMap<String, u8>,
    pub splits: &'a Splits,
    pub item_triples: &'a [(String, Vec<Triple>)],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixConfig {
    pub masks: Vec<ModalityMask>,
    pub include_baselines: bool,
    pub fusion: FusionConfig,
    pub transe: TranseConfig,
    pub seed: u64,
}

impl Default for MatrixConfig {
    fn default() -> Self {
        MatrixConfig {
            masks: ModalityMask::seven().to_vec(),
            include_baselines: true,
            fusion: FusionConfig::default(),
            transe: TranseConfig::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixRow {
    pub name: String,
    pub metrics: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatrixReport {
    /// Hash of the run configuration behind every row, when run through
    /// the pipeline.
    #[serde(default)]
    pub config_hash: Option<String>,
    pub rows: Vec<MatrixRow>,
    /// Digest of the knowledge-channel embeddings every row consumed; two
    /// reports built from the same K vectors carry the same value.
    pub k_embedding_hash: String,
    pub seed: u64,
    /// Baseline test items with no extracted triples, scored as Real.
    pub baseline_items_without_triples: Option<usize>,
}

/// Digest over the knowledge-channel records, order-independent.
pub fn k_embedding_digest(records: &[EmbeddingRecord]) -> String {
    let mut k_rows: Vec<(&str, &[f64])> = records
        .iter()
        .filter(|r| r.modality == Modality::K)
        .map(|r| (r.item_id.as_str(), r.vector.as_slice()))
        .collect();
    k_rows.sort_by(|a, b| a.0.cmp(b.0));
    let bytes = serde_json::to_vec(&k_rows).expect("digest serialization");
    short_hash(&bytes)
}

fn test_labels(inputs: &MatrixInputs) -> Result<Vec<u8>, EvalError> {
    inputs
        .splits
        .test
        .iter()
        .map(|id| {
            inputs
                .labels
                .get(id)
                .copied()
                .ok_or_else(|| EvalError::MissingLabel { item_id: id.clone() })
        })
        .collect()
}

fn fusion_row(
    inputs: &MatrixInputs,
    mask: ModalityMask,
    fusion: &FusionConfig,
    seed: u64,
    truth: &[u8],
) -> Result<MatrixRow, EvalError> {
    let (model, _) = train_fusion(
        inputs.records,
        inputs.labels,
        inputs.splits,
        mask,
        fusion,
        seed,
    )?;
    let test_items = assemble_items(inputs.records, &inputs.splits.test, inputs.labels, mask)?;
    let mut predictions = Vec::with_capacity(test_items.len());
    for item in &test_items {
        let (label, _) = predict(&model, &item.vector)?;
        predictions.push(label);
    }
    Ok(MatrixRow {
        name: mask.label(),
        metrics: compute_metrics(&predictions, truth)?,
    })
}

fn baseline_rows(
    inputs: &MatrixInputs,
    transe: &TranseConfig,
    seed: u64,
    truth: &[u8],
) -> Result<(Vec<MatrixRow>, usize), EvalError> {
    let train_ids: HashSet<&str> = inputs.splits.train.iter().map(String::as_str).collect();
    let mut real_triples = Vec::new();
    let mut fake_triples = Vec::new();
    let mut by_id: HashMap<&str, &[Triple]> = HashMap::new();
    for (item_id, triples) in inputs.item_triples {
        by_id.insert(item_id.as_str(), triples.as_slice());
        if train_ids.contains(item_id.as_str()) {
            let label = inputs
                .labels
                .get(item_id)
                .copied()
                .ok_or_else(|| EvalError::MissingLabel { item_id: item_id.clone() })?;
            let sink = if label == 1 { &mut fake_triples } else { &mut real_triples };
            sink.extend(triples.iter().cloned());
        }
    }
    let (model_real, _) = train_transe(&real_triples, transe, seed_for(seed, "transe:real"))?;
    let (model_fake, _) = train_transe(&fake_triples, transe, seed_for(seed, "transe:fake"))?;

    let mut no_triples = 0usize;
    let mut predict_all = |aggregate: BiasAggregate| -> Result<Vec<u8>, EvalError> {
        inputs
            .splits
            .test
            .iter()
            .map(|id| {
                let triples = by_id.get(id.as_str()).copied().unwrap_or(&[]);
                if triples.is_empty() {
                    // Nothing extractable carries no bias signal either way;
                    // score it as Real, consistent with tie-breaking.
                    no_triples += 1;
                    Ok(0)
                } else {
                    Ok(classify_bias(&model_real, &model_fake, triples, aggregate)?)
                }
            })
            .collect()
    };
    let avg_preds = predict_all(BiasAggregate::Avg)?;
    let max_preds = predict_all(BiasAggregate::Max)?;
    // Both passes walk the same items; count each absence once.
    no_triples /= 2;

    Ok((
        vec![
            MatrixRow {
                name: "TransE avg-bias".into(),
                metrics: compute_metrics(&avg_preds, truth)?,
            },
            MatrixRow {
                name: "TransE max-bias".into(),
                metrics: compute_metrics(&max_preds, truth)?,
            },
        ],
        no_triples,
    ))
}

/// Trains and scores every requested modality mask plus, optionally, the
/// two translation-bias baselines, all on the same split assignment.
pub fn run_matrix(inputs: &MatrixInputs, config: &MatrixConfig) -> Result<MatrixReport, EvalError> {
    if config.masks.is_empty() && !config.include_baselines {
        return Err(EvalError::InvalidConfig(
            "no masks requested and baselines disabled; nothing to evaluate".into(),
        ));
    }
    let mut seen = HashSet::new();
    for mask in &config.masks {
        if !seen.insert(mask.label()) {
            return Err(EvalError::InvalidConfig(format!(
                "mask {} listed twice",
                mask.label()
            )));
        }
    }
    let truth = test_labels(inputs)?;
    let mut rows = Vec::new();
    for &mask in &config.masks {
        let row_seed = seed_for(config.seed, &format!("fusion:{}", mask.label()));
        rows.push(fusion_row(inputs, mask, &config.fusion, row_seed, &truth)?);
    }
    let baseline_items_without_triples = if config.include_baselines {
        let (baselines, no_triples) = baseline_rows(inputs, &config.transe, config.seed, &truth)?;
        rows.extend(baselines);
        Some(no_triples)
    } else {
        None
    };
    Ok(MatrixReport {
        config_hash: None,
        rows,
        k_embedding_hash: k_embedding_digest(inputs.records),
        seed: config.seed,
        baseline_items_without_triples,
    })
}

fn format_score(value: f64, flag: bool) -> String {
    if flag {
        format!("{value:.4}*")
    } else {
        format!("{value:.4}")
    }
}

pub fn render_matrix_json(report: &MatrixReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serialization");
    out.push('\n');
    out
}

pub fn render_matrix_text(report: &MatrixReport) -> String {
    let name_width = report
        .rows
        .iter()
        .map(|r| r.name.len())
        .chain(std::iter::once("configuration".len()))
        .max()
        .unwrap_or(0);
    let mut out = format!(
        "{:<name_width$}  {:>9}  {:>10}  {:>9}  {:>9}  {:>6}\n",
        "configuration", "accuracy", "precision", "recall", "f1", "items"
    );
    let mut any_flag = false;
    for row in &report.rows {
        let m = &row.metrics;
        any_flag |= m.undefined_precision || m.undefined_recall;
        out.push_str(&format!(
            "{:<name_width$}  {:>9}  {:>10}  {:>9}  {:>9}  {:>6}\n",
            row.name,
            format_score(m.accuracy, false),
            format_score(m.precision, m.undefined_precision),
            format_score(m.recall, m.undefined_recall),
            format_score(m.f1, false),
            m.total(),
        ));
    }
    if any_flag {
        out.push_str("* zero denominator; score is 0 by convention\n");
    }
    if let Some(hash) = &report.config_hash {
        out.push_str(&format!("config_hash: {hash}\n"));
    }
    out.push_str(&format!("k_embedding_hash: {}\n", report.k_embedding_hash));
    out.push_str(&format!("seed: {}\n", report.seed));
    if let Some(n) = report.baseline_items_without_triples {
        out.push_str(&format!("baseline items without triples: {n}\n"));
    }
    out
}

pub fn render_matrix_csv(report: &MatrixReport) -> String {
    let mut out =
        String::from("configuration,accuracy,precision,recall,f1,tp,fp,fn,tn\n");
    for row in &report.rows {
        let m = &row.metrics;
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{}\n",
            row.name,
            m.accuracy,
            m.precision,
            m.recall,
            m.f1,
            m.true_positives,
            m.false_positives,
            m.false_negatives,
            m.true_negatives,
        ));
    }
    out
}

pub fn render_weekly_json(report: &WeeklyReport) -> String {
    let mut out = serde_json::to_string_pretty(report).expect("report serialization");
    out.push('\n');
    out
}

pub fn render_weekly_text(report: &WeeklyReport) -> String {
    let mut out = format!(
        "{:>4}  {:>5}  {:>9}  {:>10}  {:>9}  {:>9}\n",
        "week", "count", "accuracy", "precision", "recall", "f1"
    );
    let mut any_flag = false;
    for row in &report.weeks {
        match &row.metrics {
            Some(m) => {
                any_flag |= m.undefined_precision || m.undefined_recall;
                out.push_str(&format!(
                    "{:>4}  {:>5}  {:>9}  {:>10}  {:>9}  {:>9}\n",
                    row.week,
                    row.count,
                    format_score(m.accuracy, false),
                    format_score(m.precision, m.undefined_precision),
                    format_score(m.recall, m.undefined_recall),
                    format_score(m.f1, false),
                ));
            }
            None => {
                out.push_str(&format!(
                    "{:>4}  {:>5}  {:>9}  {:>10}  {:>9}  {:>9}\n",
                    row.week, 0, "-", "-", "-", "-"
                ));
            }
        }
    }
    if any_flag {
        out.push_str("* zero denominator; score is 0 by convention\n");
    }
    if let Some(hash) = &report.config_hash {
        out.push_str(&format!("config_hash: {hash}\n"));
    }
    out.push_str(&format!(
        "last_train_timestamp: {}\nretained: {}\ndropped beyond week {}: {}\n",
        report.last_train_timestamp, report.retained, WEEKS, report.dropped_late
    ));
    out
}

pub fn render_weekly_csv(report: &WeeklyReport) -> String {
    let mut out = String::from("week,count,accuracy,precision,recall,f1,tp,fp,fn,tn\n");
    for row in &report.weeks {
        match &row.metrics {
            Some(m) => out.push_str(&format!(
                "{},{},{},{},{},{},{},{},{},{}\n",
                row.week,
                row.count,
                m.accuracy,
                m.precision,
                m.recall,
                m.f1,
                m.true_positives,
                m.false_positives,
                m.false_negatives,
                m.true_negatives,
            )),
            None => out.push_str(&format!("{},0,,,,,,,,\n", row.week)),
        }
    }
    out
}
