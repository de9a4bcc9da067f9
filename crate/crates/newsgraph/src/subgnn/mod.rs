//! Structure-channel subgraph classifier.
//!
//! A news item is represented by the subgraph its entities induce in the
//! shared knowledge graph. Each connected component of that subgraph is
//! embedded by message passing against a set of globally sampled anchor
//! patches, where the message weight is a degree-sequence similarity
//! (1 / (1 + DTW)). Internal and border subchannels see the same anchors
//! through different degree sequences: internal degrees count only edges
//! inside the component, border degrees count all edges in the full graph.
//! Component embeddings are concatenated (largest components first, fixed
//! slot count, zero padding) and fed to an affine head over {Real, Fake}.

mod anchors;
mod dtw;
mod model;
mod train;

pub use anchors::{sample_anchor_patches, AnchorPatch};
pub use dtw::{dtw_distance, similarity};
pub use model::{
    build_batch_loss, embed, forward, predict, prepare_subgraph, prepare_subgraphs,
    PreparedComponent, PreparedSubgraph, StructModel, SubgnnConfig, SubgraphEmbedding,
};
pub use train::{load_model, save_model, train, EpochStats};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SubgnnError {
    #[error("cannot sample anchor patches from an empty graph")]
    EmptyGraph,
    #[error("DTW distance is undefined for an empty sequence")]
    EmptySequence,
    #[error("training set contains a single class; need both Real and Fake examples")]
    SingleClassTrainingSet,
    #[error("item {item_id} has no label but appears in a training or validation split")]
    MissingLabel { item_id: String },
    #[error("split references item {item_id} but no subgraph was assigned for it")]
    UnknownItem { item_id: String },
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("checkpoint problem: {0}")]
    Checkpoint(String),
    #[error("numerics error: {0}")]
    Numerics(#[from] crate::numerics::NumericsError),
    #[error("graph error: {0}")]
    Kgraph(#[from] crate::kgraph::KgraphError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
