//! Dense f64 tensors with a reverse-mode differentiation tape.
//!
//! Everything trained in this crate (the structure-channel classifier, the
//! fusion MLP, the translational baseline) expresses its loss through
//! [`Graph`] and gets gradients from [`value_and_grad`]. The op set is small
//! on purpose: elementwise add/sub/mul, matmul, concatenation, ReLU, sigmoid,
//! a fused softmax + cross-entropy, squared L2 norm, and scalar ops.

mod adam;
mod checkpoint;
mod graph;
mod params;
mod tensor;

pub use adam::{Adam, AdamConfig};
pub use checkpoint::{load_params, save_params};
pub use graph::{dropout_mask, evaluate, finite_diff_check, softmax, value_and_grad, Graph, Var};
pub use params::ParamSet;
pub use tensor::Tensor;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum NumericsError {
    #[error("shape mismatch: {0}")]
    ShapeMismatch(String),
    #[error("objective must be a scalar, got shape {0:?}")]
    NonScalarObjective(Vec<usize>),
    #[error("unknown parameter '{0}'")]
    UnknownParam(String),
    #[error("duplicate parameter '{0}'")]
    DuplicateParam(String),
    #[error("invalid tensor: {0}")]
    InvalidTensor(String),
    #[error("checkpoint error: {0}")]
    Checkpoint(String),
}
