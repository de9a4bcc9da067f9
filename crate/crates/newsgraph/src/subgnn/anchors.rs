//! Anchor patch sampling via triangular random walks.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

use super::SubgnnError;
use crate::kgraph::{degree_sequence, DegreeMode, KnowledgeGraph, NodeId};

/// A reference structure sampled from the knowledge graph. The trainable
/// embedding lives in the model's parameter table (one column per patch);
/// the patch itself only records which nodes the walk visited and the two
/// degree sequences similarity scoring needs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorPatch {
    pub id: usize,
    /// Distinct nodes visited by the walk, ascending.
    pub node_ids: Vec<NodeId>,
    /// Descending degrees counting only edges inside the patch.
    pub internal_degrees: Vec<f64>,
    /// Descending degrees in the full graph.
    pub border_degrees: Vec<f64>,
}

/// Samples `n_anchors` patches with triangular random walks.
///
/// A walk visits `walk_len` nodes (so `walk_len` 1 takes no steps). After
/// the first move, each step flips a `p_tri` coin: on success it goes to a
/// uniformly chosen neighbor that closes a triangle with the previous node,
/// falling back to a plain uniform neighbor when no such node exists; on
/// failure it takes a plain uniform neighbor. A node without neighbors ends
/// the walk early.
pub fn sample_anchor_patches(
    kg: &KnowledgeGraph,
    n_anchors: usize,
    walk_len: usize,
    p_tri: f64,
    s_max: usize,
    seed: u64,
) -> Result<Vec<AnchorPatch>, SubgnnError> {
    if kg.node_count() == 0 {
        return Err(SubgnnError::EmptyGraph);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut patches = Vec::with_capacity(n_anchors);
    for id in 0..n_anchors {
        let start = rng.gen_range(0..kg.node_count());
        let mut visited: BTreeSet<NodeId> = BTreeSet::new();
        visited.insert(start);
        let mut previous: Option<NodeId> = None;
        let mut current = start;
        for _ in 1..walk_len {
            let neighbors = kg.neighbors(current);
            if neighbors.is_empty() {
                break;
            }
            let next = match previous {
                Some(prev) if rng.gen::<f64>() < p_tri => {
                    let closing: Vec<NodeId> = neighbors
                        .iter()
                        .copied()
                        .filter(|&w| w != prev && kg.has_edge(prev, w))
                        .collect();
                    if closing.is_empty() {
                        neighbors[rng.gen_range(0..neighbors.len())]
                    } else {
                        closing[rng.gen_range(0..closing.len())]
                    }
                }
                _ => neighbors[rng.gen_range(0..neighbors.len())],
            };
            visited.insert(next);
            previous = Some(current);
            current = next;
        }
        let node_ids: Vec<NodeId> = visited.into_iter().collect();
        let internal_degrees = degree_sequence(kg, &node_ids, DegreeMode::Internal, s_max)?;
        let border_degrees = degree_sequence(kg, &node_ids, DegreeMode::Border, s_max)?;
        patches.push(AnchorPatch {
            id,
            node_ids,
            internal_degrees,
            border_degrees,
        });
    }
    Ok(patches)
}
