//! Training loop, accuracy bookkeeping, and checkpointing.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use std::path::Path;

use super::model::{batch_loss_impl, init_params, logits_var, DropoutCtx};
use super::{
    prepare_subgraphs, sample_anchor_patches, AnchorPatch, PreparedSubgraph, StructModel,
    SubgnnConfig, SubgnnError,
};
use crate::config::atomic_write;
use crate::corpus::Splits;
use crate::kgraph::{KnowledgeGraph, Subgraph};
use crate::numerics::{value_and_grad, Adam, AdamConfig, Graph, ParamSet};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochStats {
    pub epoch: usize,
    pub train_loss: f64,
    pub train_accuracy: f64,
    pub validation_accuracy: Option<f64>,
}

fn labeled_items<'a>(
    by_id: &HashMap<&str, &'a Subgraph>,
    ids: &[String],
) -> Result<Vec<(&'a Subgraph, u8)>, SubgnnError> {
    ids.iter()
        .map(|id| {
            let sg = by_id
                .get(id.as_str())
                .ok_or_else(|| SubgnnError::UnknownItem { item_id: id.clone() })?;
            let label = sg
                .label
                .ok_or_else(|| SubgnnError::MissingLabel { item_id: id.clone() })?;
            Ok((*sg, label))
        })
        .collect()
}

fn split_accuracy(
    params: &ParamSet,
    items: &[(PreparedSubgraph, u8)],
    config: &SubgnnConfig,
) -> Result<f64, SubgnnError> {
    let mut correct = 0usize;
    for (item, label) in items {
        let mut g = Graph::new(params);
        let logits = logits_var(&mut g, item, config, &mut DropoutCtx::off())?;
        let data = g.value(logits).data();
        let pred: u8 = if data[1] > data[0] { 1 } else { 0 };
        if pred == *label {
            correct += 1;
        }
    }
    Ok(correct as f64 / items.len().max(1) as f64)
}

/// Trains the structure-channel classifier.
///
/// Anchors are sampled once up front from `seed` and stay fixed for the
/// whole run; the same seed also drives parameter init, batch shuffling,
/// and dropout masks. The returned model carries the parameters of the
/// epoch with the best validation accuracy (train accuracy stands in when
/// the validation split is empty; the earliest best epoch wins ties).
pub fn train(
    kg: &KnowledgeGraph,
    subgraphs: &[Subgraph],
    splits: &Splits,
    config: &SubgnnConfig,
    seed: u64,
) -> Result<(StructModel, Vec<EpochStats>), SubgnnError> {
    config.validate()?;
    let anchors = sample_anchor_patches(
        kg,
        config.n_anchors,
        config.walk_len,
        config.p_tri,
        config.s_max,
        seed,
    )?;

    let by_id: HashMap<&str, &Subgraph> =
        subgraphs.iter().map(|sg| (sg.item_id.as_str(), sg)).collect();
    let train_raw = labeled_items(&by_id, &splits.train)?;
    let val_raw = labeled_items(&by_id, &splits.validation)?;

    let classes: HashSet<u8> = train_raw.iter().map(|(_, l)| *l).collect();
    if classes.len() < 2 {
        return Err(SubgnnError::SingleClassTrainingSet);
    }

    let prepare = |raw: &[(&Subgraph, u8)]| -> Result<Vec<(PreparedSubgraph, u8)>, SubgnnError> {
        let sgs: Vec<Subgraph> = raw.iter().map(|(sg, _)| (*sg).clone()).collect();
        let prepared = prepare_subgraphs(kg, &sgs, &anchors, config)?;
        Ok(prepared
            .into_iter()
            .zip(raw.iter().map(|(_, l)| *l))
            .collect())
    };
    let train_items = prepare(&train_raw)?;
    let val_items = prepare(&val_raw)?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut params = init_params(config, &mut rng)?;
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
            let batch: Vec<(&PreparedSubgraph, u8)> = chunk
                .iter()
                .map(|&i| (&train_items[i].0, train_items[i].1))
                .collect();
            let (loss, grads) = value_and_grad(&params, |g| {
                let mut dropout = DropoutCtx {
                    rate: config.dropout,
                    rng: Some(&mut rng),
                };
                batch_loss_impl(g, &batch, config, &mut dropout)
            })?;
            adam.step(&mut params, &grads)?;
            loss_sum += loss * batch.len() as f64;
        }
        let train_loss = loss_sum / train_items.len() as f64;
        let train_accuracy = split_accuracy(&params, &train_items, config)?;
        let validation_accuracy = if val_items.is_empty() {
            None
        } else {
            Some(split_accuracy(&params, &val_items, config)?)
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

    let model = StructModel {
        config: config.clone(),
        params: best_params,
        anchors,
        anchor_seed: seed,
        config_hash: None,
    };
    Ok((model, history))
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    #[serde(default)]
    config_hash: Option<String>,
    config: SubgnnConfig,
    anchor_seed: u64,
    anchors: Vec<AnchorPatch>,
    params: ParamSet,
}

const CHECKPOINT_FORMAT: &str = "newsgraph-subgnn";

pub fn save_model(path: &Path, model: &StructModel) -> Result<(), SubgnnError> {
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        version: 1,
        config_hash: model.config_hash.clone(),
        config: model.config.clone(),
        anchor_seed: model.anchor_seed,
        anchors: model.anchors.clone(),
        params: model.params.clone(),
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| SubgnnError::Checkpoint(e.to_string()))?;
    atomic_write(path, json.as_bytes())?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<StructModel, SubgnnError> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| SubgnnError::Checkpoint(e.to_string()))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(SubgnnError::Checkpoint(format!(
            "expected format {CHECKPOINT_FORMAT}, found {}",
            file.format
        )));
    }
    if file.version != 1 {
        return Err(SubgnnError::Checkpoint(format!(
            "unsupported version {}",
            file.version
        )));
    }
    Ok(StructModel {
        config: file.config,
        params: file.params,
        anchors: file.anchors,
        anchor_seed: file.anchor_seed,
        config_hash: file.config_hash,
    })
}
