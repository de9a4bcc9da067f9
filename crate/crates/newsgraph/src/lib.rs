//! Knowledge-graph based news verification.
//!
//! The crate turns dependency-parsed news text into subject-predicate-object
//! triples, assembles one global knowledge graph from them, and classifies each
//! news item by the structure of its subgraph inside that global graph. A
//! translational embedding baseline and a late-fusion classifier over
//! knowledge, text, and propagation embeddings round out the pipeline.
//!
//! The intended entry point is the `examples/` directory; each example is a
//! runnable walkthrough of one capability:
//!
//! ```text
//! cargo run --example <name>
//!
//! extract_relations      verb-centered triple extraction from parsed text
//! knowledge_graph        global graph construction, LCC, per-item subgraphs
//! autodiff_basics        the reverse-mode tape behind every trained model
//! synthetic_corpus       corpus generation with planted class signals
//! structure_classifier   training the structure-channel subgraph classifier
//! transe_baseline        translational bias scoring of real/fake models
//! multimodal_fusion      fusing knowledge/text/propagation embeddings
//! evaluation_matrix      the full modality-mask evaluation table
//! time_sensitivity       weekly accuracy after the training cutoff
//! ```
//!
//! A thin `newsgraph` binary exposes the same pipeline as subcommands; file
//! formats and config keys are documented in `FORMATS.md` at the repo root.

pub mod config;
pub mod corpus;
pub mod embedding;
pub mod eval;
pub mod fusion;
pub mod kgraph;
pub mod numerics;
pub mod pipeline;
pub mod relex;
pub mod subgnn;
pub mod transe;

pub use corpus::{AnnotatedDocument, Corpus, SplitMode, Splits, Token};
pub use kgraph::{KnowledgeGraph, Subgraph};
pub use relex::Triple;
