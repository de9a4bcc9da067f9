//! Translation-embedding baseline.
//!
//! Two models are trained independently, one on the triples of real items
//! and one on the triples of fake items. A triple (s, p, o) is scored by
//! its bias ‖s + p − o‖², and an item is labeled by whichever model finds
//! its triples less surprising: Real when the real-side aggregate bias is
//! strictly smaller, Fake otherwise. Aggregation is the mean or the max
//! over the item's triples.

use rand::Rng;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use thiserror::Error;

use crate::config::atomic_write;
use crate::numerics::{value_and_grad, NumericsError, ParamSet, Tensor};
use crate::relex::Triple;

#[derive(Debug, Error)]
pub enum TranseError {
    #[error("cannot train on an empty triple list")]
    EmptyTriples,
    #[error("item has no extracted triples to score")]
    NoTriples,
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint problem: {0}")]
    Checkpoint(String),
    #[error("numerics error: {0}")]
    Numerics(#[from] NumericsError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BiasAggregate {
    Avg,
    Max,
}

impl fmt::Display for BiasAggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BiasAggregate::Avg => write!(f, "avg"),
            BiasAggregate::Max => write!(f, "max"),
        }
    }
}

impl FromStr for BiasAggregate {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "avg" => Ok(BiasAggregate::Avg),
            "max" => Ok(BiasAggregate::Max),
            other => Err(format!("unknown aggregate '{other}', expected avg or max")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TranseConfig {
    pub dimension: usize,
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub aggregate: BiasAggregate,
}

impl Default for TranseConfig {
    fn default() -> Self {
        TranseConfig {
            dimension: 40,
            margin: 1.0,
            learning_rate: 0.01,
            epochs: 100,
            aggregate: BiasAggregate::Avg,
        }
    }
}

impl TranseConfig {
    pub fn validate(&self) -> Result<(), TranseError> {
        if self.dimension == 0 {
            return Err(TranseError::InvalidConfig("dimension must be positive".into()));
        }
        if self.epochs == 0 {
            return Err(TranseError::InvalidConfig("epochs must be positive".into()));
        }
        if !(self.margin > 0.0 && self.margin.is_finite()) {
            return Err(TranseError::InvalidConfig(format!(
                "margin {} must be positive",
                self.margin
            )));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return Err(TranseError::InvalidConfig(format!(
                "learning_rate {} must be positive",
                self.learning_rate
            )));
        }
        if !(30..=100).contains(&self.dimension) {
            log::warn!(
                "dimension = {} is outside the tuned range [30, 100]",
                self.dimension
            );
        }
        Ok(())
    }
}

/// Entity and predicate tables with name lookups. Entity rows are kept
/// L2-normalized by training; unseen symbols resolve to a frozen zero
/// vector so any triple can be scored.
#[derive(Debug, Clone, PartialEq)]
pub struct TranseModel {
    pub dimension: usize,
    /// Hash of the run configuration that trained this model, if known.
    pub config_hash: Option<String>,
    entity_names: Vec<String>,
    predicate_names: Vec<String>,
    entity_index: HashMap<String, usize>,
    predicate_index: HashMap<String, usize>,
    /// Shape (entities, dimension).
    entities: Tensor,
    /// Shape (predicates, dimension).
    predicates: Tensor,
}

fn build_index(names: &[String]) -> HashMap<String, usize> {
    names
        .iter()
        .enumerate()
        .map(|(i, n)| (n.clone(), i))
        .collect()
}

impl TranseModel {
    /// Builds a model from explicit vectors; handy for fixtures and for
    /// reconstructing checkpoints. Rows are taken as given, unnormalized.
    pub fn from_parts(
        dimension: usize,
        entities: Vec<(String, Vec<f64>)>,
        predicates: Vec<(String, Vec<f64>)>,
    ) -> Result<TranseModel, TranseError> {
        let check = |rows: &[(String, Vec<f64>)]| -> Result<(), TranseError> {
            for (name, v) in rows {
                if v.len() != dimension {
                    return Err(TranseError::InvalidConfig(format!(
                        "vector for '{name}' has length {}, expected {dimension}",
                        v.len()
                    )));
                }
            }
            Ok(())
        };
        check(&entities)?;
        check(&predicates)?;
        let entity_names: Vec<String> = entities.iter().map(|(n, _)| n.clone()).collect();
        let predicate_names: Vec<String> = predicates.iter().map(|(n, _)| n.clone()).collect();
        let flat = |rows: Vec<(String, Vec<f64>)>| -> Vec<f64> {
            rows.into_iter().flat_map(|(_, v)| v).collect()
        };
        let n_e = entity_names.len();
        let n_p = predicate_names.len();
        Ok(TranseModel {
            dimension,
            config_hash: None,
            entity_index: build_index(&entity_names),
            predicate_index: build_index(&predicate_names),
            entity_names,
            predicate_names,
            entities: Tensor::new(vec![n_e, dimension], flat(entities))
                .map_err(TranseError::Numerics)?,
            predicates: Tensor::new(vec![n_p, dimension], flat(predicates))
                .map_err(TranseError::Numerics)?,
        })
    }

    pub fn entity_count(&self) -> usize {
        self.entity_names.len()
    }

    pub fn predicate_count(&self) -> usize {
        self.predicate_names.len()
    }

    fn entity_row(&self, index: usize) -> &[f64] {
        &self.entities.data()[index * self.dimension..(index + 1) * self.dimension]
    }

    fn predicate_row(&self, index: usize) -> &[f64] {
        &self.predicates.data()[index * self.dimension..(index + 1) * self.dimension]
    }

    /// Vector for an entity, or None when the symbol is unseen.
    pub fn entity_vector(&self, name: &str) -> Option<&[f64]> {
        self.entity_index.get(name).map(|&i| self.entity_row(i))
    }

    pub fn predicate_vector(&self, name: &str) -> Option<&[f64]> {
        self.predicate_index.get(name).map(|&i| self.predicate_row(i))
    }
}

/// Squared translation error ‖s + p − o‖²; unseen symbols contribute the
/// zero vector, which keeps every triple scorable without favoring either
/// model systematically.
pub fn triple_bias(model: &TranseModel, triple: &Triple) -> f64 {
    let zero = vec![0.0; model.dimension];
    let s = model.entity_vector(&triple.subject).unwrap_or(&zero);
    let p = model.predicate_vector(&triple.predicate).unwrap_or(&zero);
    let o = model.entity_vector(&triple.object).unwrap_or(&zero);
    let mut bias = 0.0;
    for i in 0..model.dimension {
        let delta = s[i] + p[i] - o[i];
        bias += delta * delta;
    }
    bias
}

fn normalize_row(data: &mut [f64]) {
    let norm: f64 = data.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        for x in data.iter_mut() {
            *x /= norm;
        }
    }
}

/// Trains translation embeddings with margin ranking loss, plain SGD, one
/// uniform head-or-tail corruption per positive per epoch, and entity
/// renormalization after every touched update. Returns the model and the
/// mean epoch losses.
pub fn train_transe(
    triples: &[Triple],
    config: &TranseConfig,
    seed: u64,
) -> Result<(TranseModel, Vec<f64>), TranseError> {
    config.validate()?;
    if triples.is_empty() {
        return Err(TranseError::EmptyTriples);
    }
    let d = config.dimension;

    let mut entity_names: Vec<String> = Vec::new();
    let mut predicate_names: Vec<String> = Vec::new();
    let mut entity_index: HashMap<String, usize> = HashMap::new();
    let mut predicate_index: HashMap<String, usize> = HashMap::new();
    let intern = |name: &str, names: &mut Vec<String>, index: &mut HashMap<String, usize>| {
        if let Some(&i) = index.get(name) {
            i
        } else {
            let i = names.len();
            names.push(name.to_string());
            index.insert(name.to_string(), i);
            i
        }
    };
    let indexed: Vec<(usize, usize, usize)> = triples
        .iter()
        .map(|t| {
            let s = intern(&t.subject, &mut entity_names, &mut entity_index);
            let p = intern(&t.predicate, &mut predicate_names, &mut predicate_index);
            let o = intern(&t.object, &mut entity_names, &mut entity_index);
            (s, p, o)
        })
        .collect();
    let n_entities = entity_names.len();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let bound = 6.0 / (d as f64).sqrt();
    let mut entities = Tensor::rand_uniform(vec![n_entities, d], -bound, bound, &mut rng);
    let mut predicates =
        Tensor::rand_uniform(vec![predicate_names.len(), d], -bound, bound, &mut rng);
    for r in 0..n_entities {
        normalize_row(&mut entities.data_mut()[r * d..(r + 1) * d]);
    }
    for r in 0..predicate_names.len() {
        normalize_row(&mut predicates.data_mut()[r * d..(r + 1) * d]);
    }

    let mut order: Vec<usize> = (0..indexed.len()).collect();
    let mut history = Vec::with_capacity(config.epochs);
    for _ in 0..config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for &ti in &order {
            let (s, p, o) = indexed[ti];
            let corrupt_head = rng.gen::<bool>();
            let replaced = if corrupt_head { s } else { o };
            let corrupted = loop {
                let candidate = rng.gen_range(0..n_entities);
                if candidate != replaced || n_entities == 1 {
                    break candidate;
                }
            };

            let row = |t: &Tensor, r: usize| Tensor::from_vec(t.data()[r * d..(r + 1) * d].to_vec());
            let mut params = ParamSet::new();
            params.insert("s", row(&entities, s))?;
            params.insert("p", row(&predicates, p))?;
            params.insert("o", row(&entities, o))?;
            params.insert("c", row(&entities, corrupted))?;

            let margin = config.margin;
            let (loss, grads) = value_and_grad(&params, |g| {
                let sv = g.param("s")?;
                let pv = g.param("p")?;
                let ov = g.param("o")?;
                let cv = g.param("c")?;
                let shift = g.add(sv, pv)?;
                let true_delta = g.sub(shift, ov)?;
                let true_bias = g.sum_squares(true_delta);
                let corrupt_delta = if corrupt_head {
                    let shift = g.add(cv, pv)?;
                    g.sub(shift, ov)?
                } else {
                    let shift = g.add(sv, pv)?;
                    g.sub(shift, cv)?
                };
                let corrupt_bias = g.sum_squares(corrupt_delta);
                let gap = g.sub(true_bias, corrupt_bias)?;
                let shifted = g.add_scalar(gap, margin);
                Ok(g.relu(shifted))
            })?;
            loss_sum += loss;

            if loss > 0.0 {
                let lr = config.learning_rate;
                let apply = |table: &mut Tensor, r: usize, grad: &Tensor| {
                    let rowslice = &mut table.data_mut()[r * d..(r + 1) * d];
                    for (x, g) in rowslice.iter_mut().zip(grad.data()) {
                        *x -= lr * g;
                    }
                };
                apply(&mut entities, s, grads.get("s")?);
                apply(&mut predicates, p, grads.get("p")?);
                apply(&mut entities, o, grads.get("o")?);
                apply(&mut entities, corrupted, grads.get("c")?);
                for r in [s, o, corrupted] {
                    normalize_row(&mut entities.data_mut()[r * d..(r + 1) * d]);
                }
            }
        }
        history.push(loss_sum / indexed.len() as f64);
    }

    let model = TranseModel {
        dimension: d,
        config_hash: None,
        entity_index,
        predicate_index,
        entity_names,
        predicate_names,
        entities,
        predicates,
    };
    Ok((model, history))
}

/// Labels one item from its triples: Real (0) when the real-side aggregate
/// bias is strictly smaller, Fake (1) otherwise, ties included.
pub fn classify_bias(
    model_real: &TranseModel,
    model_fake: &TranseModel,
    item_triples: &[Triple],
    aggregate: BiasAggregate,
) -> Result<u8, TranseError> {
    let (agg_real, agg_fake) = aggregate_biases(model_real, model_fake, item_triples, aggregate)?;
    Ok(if agg_real < agg_fake { 0 } else { 1 })
}

/// Both models' aggregate biases for one item.
pub fn aggregate_biases(
    model_real: &TranseModel,
    model_fake: &TranseModel,
    item_triples: &[Triple],
    aggregate: BiasAggregate,
) -> Result<(f64, f64), TranseError> {
    if item_triples.is_empty() {
        return Err(TranseError::NoTriples);
    }
    let agg = |model: &TranseModel| -> f64 {
        let biases = item_triples.iter().map(|t| triple_bias(model, t));
        match aggregate {
            BiasAggregate::Avg => biases.sum::<f64>() / item_triples.len() as f64,
            BiasAggregate::Max => biases.fold(f64::NEG_INFINITY, f64::max),
        }
    };
    Ok((agg(model_real), agg(model_fake)))
}

/// One scored item in the classification report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ItemBias {
    pub item_id: String,
    pub bias_real_model: f64,
    pub bias_fake_model: f64,
    pub aggregate: BiasAggregate,
    pub label: u8,
}

/// Scores a batch of items; items with no triples are skipped and their
/// ids returned separately so reports can account for them.
pub fn classify_items(
    model_real: &TranseModel,
    model_fake: &TranseModel,
    items: &[(String, Vec<Triple>)],
    aggregate: BiasAggregate,
) -> (Vec<ItemBias>, Vec<String>) {
    let mut scored = Vec::new();
    let mut skipped = Vec::new();
    for (item_id, triples) in items {
        match aggregate_biases(model_real, model_fake, triples, aggregate) {
            Ok((bias_real_model, bias_fake_model)) => scored.push(ItemBias {
                item_id: item_id.clone(),
                bias_real_model,
                bias_fake_model,
                aggregate,
                label: if bias_real_model < bias_fake_model { 0 } else { 1 },
            }),
            Err(_) => skipped.push(item_id.clone()),
        }
    }
    (scored, skipped)
}

#[derive(Serialize, Deserialize)]
struct CheckpointFile {
    format: String,
    version: u32,
    #[serde(default)]
    config_hash: Option<String>,
    dimension: usize,
    entity_names: Vec<String>,
    predicate_names: Vec<String>,
    params: ParamSet,
}

const CHECKPOINT_FORMAT: &str = "newsgraph-transe";

pub fn save_transe(path: &Path, model: &TranseModel) -> Result<(), TranseError> {
    let mut params = ParamSet::new();
    params.insert("entities", model.entities.clone())?;
    params.insert("predicates", model.predicates.clone())?;
    let file = CheckpointFile {
        format: CHECKPOINT_FORMAT.to_string(),
        version: 1,
        config_hash: model.config_hash.clone(),
        dimension: model.dimension,
        entity_names: model.entity_names.clone(),
        predicate_names: model.predicate_names.clone(),
        params,
    };
    let json = serde_json::to_string_pretty(&file)
        .map_err(|e| TranseError::Checkpoint(e.to_string()))?;
    atomic_write(path, json.as_bytes())?;
    Ok(())
}

pub fn load_transe(path: &Path) -> Result<TranseModel, TranseError> {
    let text = std::fs::read_to_string(path)?;
    let file: CheckpointFile =
        serde_json::from_str(&text).map_err(|e| TranseError::Checkpoint(e.to_string()))?;
    if file.format != CHECKPOINT_FORMAT {
        return Err(TranseError::Checkpoint(format!(
            "expected format {CHECKPOINT_FORMAT}, found {}",
            file.format
        )));
    }
    if file.version != 1 {
        return Err(TranseError::Checkpoint(format!(
            "unsupported version {}",
            file.version
        )));
    }
    let entities = file.params.get("entities")?.clone();
    let predicates = file.params.get("predicates")?.clone();
    let expect_shape = |t: &Tensor, rows: usize, what: &str| -> Result<(), TranseError> {
        if t.shape() != [rows, file.dimension] {
            return Err(TranseError::Checkpoint(format!(
                "{what} table shape {:?} does not match {} names x dimension {}",
                t.shape(),
                rows,
                file.dimension
            )));
        }
        Ok(())
    };
    expect_shape(&entities, file.entity_names.len(), "entity")?;
    expect_shape(&predicates, file.predicate_names.len(), "predicate")?;
    Ok(TranseModel {
        dimension: file.dimension,
        config_hash: file.config_hash,
        entity_index: build_index(&file.entity_names),
        predicate_index: build_index(&file.predicate_names),
        entity_names: file.entity_names,
        predicate_names: file.predicate_names,
        entities,
        predicates,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn triple(s: &str, p: &str, o: &str) -> Triple {
        Triple {
            subject: s.into(),
            predicate: p.into(),
            object: o.into(),
            doc_id: "d".into(),
            sentence_id: 0,
        }
    }

    /// A small two-cluster KG: people work at places, places sit in cities.
    fn toy_triples() -> Vec<Triple> {
        let mut out = Vec::new();
        for (i, name) in ["ada", "ben", "cle", "dan", "eva"].iter().enumerate() {
            out.push(triple(name, "works_at", ["mill", "forge"][i % 2]));
            out.push(triple(name, "lives_in", ["north", "south"][i % 2]));
        }
        out.push(triple("mill", "sits_in", "north"));
        out.push(triple("forge", "sits_in", "south"));
        out.push(triple("north", "borders", "south"));
        out.push(triple("ada", "knows", "ben"));
        out.push(triple("ben", "knows", "cle"));
        out.push(triple("cle", "knows", "dan"));
        out.push(triple("dan", "knows", "eva"));
        out.push(triple("eva", "knows", "ada"));
        out.push(triple("mill", "rivals", "forge"));
        out.push(triple("south", "borders", "north"));
        out
    }

    fn quick_config() -> TranseConfig {
        TranseConfig {
            dimension: 8,
            epochs: 80,
            learning_rate: 0.05,
            ..TranseConfig::default()
        }
    }

    #[test]
    fn bias_examples_are_exact() {
        let model = TranseModel::from_parts(
            2,
            vec![
                ("a".into(), vec![1.0, 0.0]),
                ("b".into(), vec![0.0, 0.0]),
                ("c".into(), vec![1.0, 1.0]),
            ],
            vec![("r".into(), vec![0.0, 1.0])],
        )
        .unwrap();
        // s + p = o exactly.
        assert_eq!(triple_bias(&model, &triple("a", "r", "c")), 0.0);
        // (1,0) + (0,1) - (0,0) has squared norm 2.
        assert!((triple_bias(&model, &triple("a", "r", "b")) - 2.0).abs() < 1e-12);

        let half = TranseModel::from_parts(
            1,
            vec![("x".into(), vec![0.5])],
            vec![("r".into(), vec![0.5])],
        )
        .unwrap();
        assert!((triple_bias(&half, &triple("x", "r", "x")) - 0.25).abs() < 1e-12);
    }

    #[test]
    fn unseen_symbols_score_through_zero_vectors() {
        let model = TranseModel::from_parts(
            2,
            vec![("a".into(), vec![1.0, 0.0])],
            vec![],
        )
        .unwrap();
        assert_eq!(triple_bias(&model, &triple("ghost", "r", "phantom")), 0.0);
        assert_eq!(triple_bias(&model, &triple("a", "r", "phantom")), 1.0);
    }

    #[test]
    fn training_orders_true_below_corrupted() {
        let triples = toy_triples();
        let (model, history) = train_transe(&triples, &quick_config(), 13).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        let names: Vec<&str> = ["ada", "ben", "cle", "dan", "eva", "mill", "forge", "north", "south"].to_vec();
        let mut true_sum = 0.0;
        let mut corrupt_sum = 0.0;
        for t in &triples {
            true_sum += triple_bias(&model, t);
            let mut corrupted = t.clone();
            corrupted.object = names[rng.gen_range(0..names.len())].to_string();
            corrupt_sum += triple_bias(&model, &corrupted);
        }
        let n = triples.len() as f64;
        assert!(
            true_sum / n < corrupt_sum / n,
            "true mean {} should be below corrupted mean {}",
            true_sum / n,
            corrupt_sum / n
        );
        // Margin losses are non-negative and fall over training (smoothed).
        assert!(history.iter().all(|&l| l >= 0.0));
        let first: f64 = history[..5].iter().sum::<f64>() / 5.0;
        let last: f64 = history[history.len() - 5..].iter().sum::<f64>() / 5.0;
        assert!(last < first);
    }

    #[test]
    fn entity_rows_stay_normalized() {
        let (model, _) = train_transe(&toy_triples(), &quick_config(), 5).unwrap();
        for r in 0..model.entity_count() {
            let norm: f64 = model.entity_row(r).iter().map(|x| x * x).sum::<f64>().sqrt();
            assert!((norm - 1.0).abs() < 1e-9, "row {r} has norm {norm}");
        }
    }

    #[test]
    fn same_seed_reproduces_embeddings() {
        let (a, ha) = train_transe(&toy_triples(), &quick_config(), 21).unwrap();
        let (b, hb) = train_transe(&toy_triples(), &quick_config(), 21).unwrap();
        assert_eq!(a, b);
        assert_eq!(ha, hb);
        let (c, _) = train_transe(&toy_triples(), &quick_config(), 22).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn empty_triples_are_rejected() {
        assert!(matches!(
            train_transe(&[], &quick_config(), 0),
            Err(TranseError::EmptyTriples)
        ));
    }

    #[test]
    fn bias_is_rotation_invariant() {
        let theta: f64 = 0.7;
        let rotate = |v: &[f64]| -> Vec<f64> {
            vec![
                v[0] * theta.cos() - v[1] * theta.sin(),
                v[0] * theta.sin() + v[1] * theta.cos(),
            ]
        };
        let entities = vec![
            ("a".to_string(), vec![0.3, -0.8]),
            ("b".to_string(), vec![-0.5, 0.2]),
        ];
        let predicates = vec![("r".to_string(), vec![0.9, 0.4])];
        let plain = TranseModel::from_parts(2, entities.clone(), predicates.clone()).unwrap();
        let spun = TranseModel::from_parts(
            2,
            entities.iter().map(|(n, v)| (n.clone(), rotate(v))).collect(),
            predicates.iter().map(|(n, v)| (n.clone(), rotate(v))).collect(),
        )
        .unwrap();
        let t = triple("a", "r", "b");
        assert!((triple_bias(&plain, &t) - triple_bias(&spun, &t)).abs() < 1e-9);
    }

    fn model_with_biases(d1: f64, d2: f64) -> TranseModel {
        // Gives triple (a, r, b) bias d1 and (c, r, d) bias d2 in dimension 1
        // by placing objects at minus the square roots.
        TranseModel::from_parts(
            1,
            vec![
                ("a".into(), vec![0.0]),
                ("b".into(), vec![-d1.sqrt()]),
                ("c".into(), vec![0.0]),
                ("d".into(), vec![-d2.sqrt()]),
            ],
            vec![("r".into(), vec![0.0])],
        )
        .unwrap()
    }

    #[test]
    fn classification_follows_the_smaller_aggregate() {
        let item = vec![triple("a", "r", "b"), triple("c", "r", "d")];
        let real = model_with_biases(0.0, 4.0);
        let fake = model_with_biases(1.5, 3.0);
        // Averages: real 2.0 vs fake 2.25 -> Real. Maxima: 4.0 vs 3.0 -> Fake.
        assert_eq!(classify_bias(&real, &fake, &item, BiasAggregate::Avg).unwrap(), 0);
        assert_eq!(classify_bias(&real, &fake, &item, BiasAggregate::Max).unwrap(), 1);
    }

    #[test]
    fn ties_classify_as_fake() {
        let item = vec![triple("a", "r", "b")];
        let real = model_with_biases(1.0, 0.0);
        let fake = model_with_biases(1.0, 0.0);
        assert_eq!(classify_bias(&real, &fake, &item, BiasAggregate::Avg).unwrap(), 1);
        assert_eq!(classify_bias(&real, &fake, &item, BiasAggregate::Max).unwrap(), 1);
    }

    #[test]
    fn items_without_triples_are_skipped_and_reported() {
        let real = model_with_biases(0.0, 0.0);
        let fake = model_with_biases(1.0, 1.0);
        let items = vec![
            ("scored".to_string(), vec![triple("a", "r", "b")]),
            ("bare".to_string(), vec![]),
        ];
        let (scored, skipped) = classify_items(&real, &fake, &items, BiasAggregate::Avg);
        assert_eq!(scored.len(), 1);
        assert_eq!(scored[0].item_id, "scored");
        assert_eq!(scored[0].label, 0);
        assert_eq!(skipped, vec!["bare".to_string()]);
        assert!(matches!(
            aggregate_biases(&real, &fake, &[], BiasAggregate::Avg),
            Err(TranseError::NoTriples)
        ));
    }

    #[test]
    fn checkpoint_roundtrip_is_exact() {
        let (model, _) = train_transe(&toy_triples(), &quick_config(), 3).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("transe.json");
        save_transe(&path, &model).unwrap();
        let loaded = load_transe(&path).unwrap();
        assert_eq!(model, loaded);
    }

    #[test]
    fn wrong_checkpoint_format_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.json");
        std::fs::write(&path, r#"{"format":"nope","version":1,"dimension":2,"entity_names":[],"predicate_names":[],"params":{"params":{}}}"#).unwrap();
        assert!(matches!(load_transe(&path), Err(TranseError::Checkpoint(_))));
    }
}
