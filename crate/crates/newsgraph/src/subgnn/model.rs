//! Model definition, similarity precomputation, and the forward pass.

use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

use super::dtw::similarity;
use super::{AnchorPatch, SubgnnError};
use crate::kgraph::{degree_sequence, DegreeMode, KnowledgeGraph, NodeId, Subgraph};
use crate::numerics::{softmax, Graph, NumericsError, ParamSet, Tensor, Var};

/// Length of the per-component structural feature vector: node count,
/// internal edges, border edges, mean internal degree, density.
const FEATURE_DIM: usize = 5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SubgnnConfig {
    pub layers: usize,
    pub hidden_dim: usize,
    pub n_anchors: usize,
    pub walk_len: usize,
    pub p_tri: f64,
    pub dropout: f64,
    /// Component slots per item; smaller components beyond this are dropped.
    pub c_max: usize,
    /// Degree sequences are truncated to this many entries before DTW.
    pub s_max: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub epochs: usize,
}

impl Default for SubgnnConfig {
    fn default() -> Self {
        SubgnnConfig {
            layers: 2,
            hidden_dim: 32,
            n_anchors: 20,
            walk_len: 8,
            p_tri: 0.8,
            dropout: 0.1,
            c_max: 4,
            s_max: 32,
            learning_rate: 1e-3,
            batch_size: 64,
            epochs: 40,
        }
    }
}

impl SubgnnConfig {
    /// Final embedding length: internal + border states per slot.
    pub fn embedding_len(&self) -> usize {
        2 * self.hidden_dim * self.c_max
    }

    /// Rejects unusable values and warns about values outside the tuned
    /// ranges (which stay usable, just unadvised).
    pub fn validate(&self) -> Result<(), SubgnnError> {
        let bad = |msg: String| Err(SubgnnError::InvalidConfig(msg));
        if self.layers == 0 {
            return bad("layers must be at least 1".into());
        }
        if self.hidden_dim == 0 || self.n_anchors == 0 || self.walk_len == 0 {
            return bad("hidden_dim, n_anchors, and walk_len must be positive".into());
        }
        if self.c_max == 0 || self.s_max == 0 {
            return bad("c_max and s_max must be positive".into());
        }
        if self.batch_size == 0 || self.epochs == 0 {
            return bad("batch_size and epochs must be positive".into());
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad(format!("dropout {} must lie in [0, 1)", self.dropout));
        }
        if !(0.0..=1.0).contains(&self.p_tri) {
            return bad(format!("p_tri {} must lie in [0, 1]", self.p_tri));
        }
        if self.learning_rate <= 0.0 || !self.learning_rate.is_finite() {
            return bad(format!("learning_rate {} must be positive", self.learning_rate));
        }
        if self.layers > 4 {
            log::warn!("layers = {} is outside the tuned range [1, 4]", self.layers);
        }
        if !(15..=45).contains(&self.n_anchors) {
            log::warn!(
                "n_anchors = {} is outside the tuned range [15, 45]",
                self.n_anchors
            );
        }
        if !(32..=64).contains(&self.hidden_dim) {
            log::warn!(
                "hidden_dim = {} is outside the tuned range [32, 64]",
                self.hidden_dim
            );
        }
        if self.dropout > 0.4 {
            log::warn!("dropout = {} is outside the tuned range [0, 0.4]", self.dropout);
        }
        if !(64..=128).contains(&self.batch_size) {
            log::warn!(
                "batch_size = {} is outside the tuned range [64, 128]",
                self.batch_size
            );
        }
        Ok(())
    }
}

/// A component with everything the forward pass needs, precomputed once.
/// Similarities depend only on degree sequences, never on parameters, so
/// training loops over these without touching the graph again.
#[derive(Debug, Clone, PartialEq)]
pub struct PreparedComponent {
    pub features: Tensor,
    /// Similarity to each anchor under internal degrees, shape (n_anchors).
    pub gamma_internal: Tensor,
    /// Similarity to each anchor under full-graph degrees.
    pub gamma_border: Tensor,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PreparedSubgraph {
    pub item_id: String,
    pub label: Option<u8>,
    /// Largest components first, truncated to `c_max`.
    pub components: Vec<PreparedComponent>,
    pub empty: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgraphEmbedding {
    pub item_id: String,
    pub vector: Vec<f64>,
    /// True when the item had no surviving entities; the vector is all zero.
    pub empty: bool,
}

#[derive(Debug, Clone)]
pub struct StructModel {
    pub config: SubgnnConfig,
    pub params: ParamSet,
    pub anchors: Vec<AnchorPatch>,
    pub anchor_seed: u64,
    /// Hash of the run configuration that trained this model, if known.
    pub config_hash: Option<String>,
}

impl StructModel {
    pub fn prepare(
        &self,
        kg: &KnowledgeGraph,
        sg: &Subgraph,
    ) -> Result<PreparedSubgraph, SubgnnError> {
        prepare_subgraph(kg, sg, &self.anchors, &self.config)
    }
}

fn structural_features(kg: &KnowledgeGraph, component: &[NodeId]) -> Tensor {
    let set: HashSet<NodeId> = component.iter().copied().collect();
    let internal_degree_sum: usize = component
        .iter()
        .map(|&u| kg.neighbors(u).iter().filter(|v| set.contains(v)).count())
        .sum();
    let full_degree_sum: usize = component.iter().map(|&u| kg.degree(u)).sum();
    let n = component.len() as f64;
    let internal_edges = internal_degree_sum as f64 / 2.0;
    let border_edges = (full_degree_sum - internal_degree_sum) as f64;
    let mean_internal_degree = internal_degree_sum as f64 / n;
    let density = if component.len() > 1 {
        internal_edges / (n * (n - 1.0) / 2.0)
    } else {
        0.0
    };
    Tensor::from_vec(vec![
        n,
        internal_edges,
        border_edges,
        mean_internal_degree,
        density,
    ])
}

/// Precomputes features and anchor similarities for one assigned subgraph.
pub fn prepare_subgraph(
    kg: &KnowledgeGraph,
    sg: &Subgraph,
    anchors: &[AnchorPatch],
    config: &SubgnnConfig,
) -> Result<PreparedSubgraph, SubgnnError> {
    let mut components = Vec::new();
    for comp in sg.components.iter().take(config.c_max) {
        let internal = degree_sequence(kg, comp, DegreeMode::Internal, config.s_max)?;
        let border = degree_sequence(kg, comp, DegreeMode::Border, config.s_max)?;
        let gamma_internal: Vec<f64> = anchors
            .iter()
            .map(|a| similarity(&internal, &a.internal_degrees))
            .collect::<Result<_, _>>()?;
        let gamma_border: Vec<f64> = anchors
            .iter()
            .map(|a| similarity(&border, &a.border_degrees))
            .collect::<Result<_, _>>()?;
        components.push(PreparedComponent {
            features: structural_features(kg, comp),
            gamma_internal: Tensor::from_vec(gamma_internal),
            gamma_border: Tensor::from_vec(gamma_border),
        });
    }
    Ok(PreparedSubgraph {
        item_id: sg.item_id.clone(),
        label: sg.label,
        components,
        empty: sg.empty,
    })
}

pub fn prepare_subgraphs(
    kg: &KnowledgeGraph,
    subgraphs: &[Subgraph],
    anchors: &[AnchorPatch],
    config: &SubgnnConfig,
) -> Result<Vec<PreparedSubgraph>, SubgnnError> {
    subgraphs
        .iter()
        .map(|sg| prepare_subgraph(kg, sg, anchors, config))
        .collect()
}

/// Inverted dropout: masks are sampled only while a training rng is
/// attached; inference paths pass an empty context and stay deterministic.
pub(super) struct DropoutCtx<'a> {
    pub rate: f64,
    pub rng: Option<&'a mut ChaCha8Rng>,
}

impl DropoutCtx<'_> {
    pub fn off() -> DropoutCtx<'static> {
        DropoutCtx { rate: 0.0, rng: None }
    }

    fn apply(&mut self, g: &mut Graph, h: Var) -> Result<Var, NumericsError> {
        match self.rng.as_deref_mut() {
            Some(rng) => crate::numerics::dropout_mask(g, h, self.rate, rng),
            None => Ok(h),
        }
    }
}

fn component_var(
    g: &mut Graph,
    comp: &PreparedComponent,
    config: &SubgnnConfig,
    dropout: &mut DropoutCtx,
) -> Result<Var, NumericsError> {
    let w_in = g.param("w_in")?;
    let b_in = g.param("b_in")?;
    let anchor_table = g.param("anchors")?;
    let features = g.constant(comp.features.clone());
    let proj = g.matmul(w_in, features)?;
    let h0 = g.add(proj, b_in)?;

    // The anchor message is the similarity-weighted sum of anchor columns,
    // which is exactly the table times the similarity vector.
    let gamma_int = g.constant(comp.gamma_internal.clone());
    let gamma_bor = g.constant(comp.gamma_border.clone());
    let msg_int = g.matmul(anchor_table, gamma_int)?;
    let msg_bor = g.matmul(anchor_table, gamma_bor)?;

    let mut h_int = h0;
    let mut h_bor = h0;
    for k in 0..config.layers {
        let m_int = g.param(&format!("m_int_{k}"))?;
        let cat = g.concat(&[h_int, msg_int])?;
        let pre = g.matmul(m_int, cat)?;
        let act = g.relu(pre);
        h_int = dropout.apply(g, act)?;

        let m_bor = g.param(&format!("m_bor_{k}"))?;
        let cat = g.concat(&[h_bor, msg_bor])?;
        let pre = g.matmul(m_bor, cat)?;
        let act = g.relu(pre);
        h_bor = dropout.apply(g, act)?;
    }
    g.concat(&[h_int, h_bor])
}

pub(super) fn embedding_var(
    g: &mut Graph,
    item: &PreparedSubgraph,
    config: &SubgnnConfig,
    dropout: &mut DropoutCtx,
) -> Result<Var, NumericsError> {
    let slot_len = 2 * config.hidden_dim;
    let mut slots = Vec::with_capacity(config.c_max);
    for comp in &item.components {
        slots.push(component_var(g, comp, config, dropout)?);
    }
    while slots.len() < config.c_max {
        slots.push(g.constant(Tensor::zeros(vec![slot_len])));
    }
    g.concat(&slots)
}

pub(super) fn logits_var(
    g: &mut Graph,
    item: &PreparedSubgraph,
    config: &SubgnnConfig,
    dropout: &mut DropoutCtx,
) -> Result<Var, NumericsError> {
    let emb = embedding_var(g, item, config, dropout)?;
    let w_head = g.param("w_head")?;
    let b_head = g.param("b_head")?;
    let affine = g.matmul(w_head, emb)?;
    g.add(affine, b_head)
}

pub(super) fn batch_loss_impl(
    g: &mut Graph,
    batch: &[(&PreparedSubgraph, u8)],
    config: &SubgnnConfig,
    dropout: &mut DropoutCtx,
) -> Result<Var, NumericsError> {
    if batch.is_empty() {
        return Err(NumericsError::InvalidTensor("empty batch".into()));
    }
    let mut per_item = Vec::with_capacity(batch.len());
    for (item, label) in batch {
        let logits = logits_var(g, item, config, dropout)?;
        per_item.push(g.softmax_cross_entropy(logits, *label as usize)?);
    }
    let total = g.add_n(&per_item)?;
    Ok(g.scale(total, 1.0 / batch.len() as f64))
}

/// Mean cross-entropy of a labeled batch, dropout disabled. This is the
/// exact objective the trainer differentiates (minus dropout masks), kept
/// public so gradient checks can target it directly.
pub fn build_batch_loss(
    g: &mut Graph,
    batch: &[(&PreparedSubgraph, u8)],
    config: &SubgnnConfig,
) -> Result<Var, NumericsError> {
    batch_loss_impl(g, batch, config, &mut DropoutCtx::off())
}

pub(super) fn init_params(
    config: &SubgnnConfig,
    rng: &mut ChaCha8Rng,
) -> Result<ParamSet, NumericsError> {
    let d = config.hidden_dim;
    let mut params = ParamSet::new();
    params.insert("w_in", Tensor::glorot(d, FEATURE_DIM, rng))?;
    params.insert("b_in", Tensor::zeros(vec![d]))?;
    params.insert("anchors", Tensor::glorot(d, config.n_anchors, rng))?;
    for k in 0..config.layers {
        params.insert(&format!("m_int_{k}"), Tensor::glorot(d, 2 * d, rng))?;
        params.insert(&format!("m_bor_{k}"), Tensor::glorot(d, 2 * d, rng))?;
    }
    params.insert("w_head", Tensor::glorot(2, config.embedding_len(), rng))?;
    params.insert("b_head", Tensor::zeros(vec![2]))?;
    Ok(params)
}

/// Runs the full forward pass without dropout. Returns the pre-head
/// embedding and softmax probabilities over (Real, Fake). An empty item
/// gets the zero embedding and the head's response to it.
pub fn forward(
    model: &StructModel,
    item: &PreparedSubgraph,
) -> Result<(SubgraphEmbedding, [f64; 2]), SubgnnError> {
    let mut g = Graph::new(&model.params);
    let mut off = DropoutCtx::off();
    let emb = embedding_var(&mut g, item, &model.config, &mut off)?;
    let w_head = g.param("w_head")?;
    let b_head = g.param("b_head")?;
    let affine = g.matmul(w_head, emb)?;
    let logits = g.add(affine, b_head)?;
    let probs = softmax(g.value(logits).data());
    let embedding = SubgraphEmbedding {
        item_id: item.item_id.clone(),
        vector: g.value(emb).data().to_vec(),
        empty: item.empty,
    };
    Ok((embedding, [probs[0], probs[1]]))
}

pub fn embed(model: &StructModel, item: &PreparedSubgraph) -> Result<SubgraphEmbedding, SubgnnError> {
    Ok(forward(model, item)?.0)
}

/// Predicted label (0 Real, 1 Fake; ties go to Real) with probabilities.
pub fn predict(model: &StructModel, item: &PreparedSubgraph) -> Result<(u8, [f64; 2]), SubgnnError> {
    let (_, probs) = forward(model, item)?;
    let label = if probs[1] > probs[0] { 1 } else { 0 };
    Ok((label, probs))
}
