//! Batch pipeline commands: each reads its declared inputs, writes
//! artifacts atomically into the output directory, and stamps everything
//! it produces with the run's config hash.
//!
//! Later stages check those stamps. Most commands only warn when an input
//! artifact came from a different configuration; `evaluate` and
//! `time-sensitivity` refuse, since a mixed-lineage report is meaningless.

use serde::Serialize;
use std::collections::HashMap;
use std::path::{Path, PathBuf};
use thiserror::Error;

use crate::config::{atomic_write, config_hash, seed_for, RunConfig};
use crate::corpus::{
    apply_coref, generate_synthetic_corpus, load_conllu, load_jsonl, make_splits, write_jsonl,
    Corpus, CorpusError, SplitMode, Splits,
};
use crate::embedding::{read_embeddings, write_embeddings, EmbeddingRecord, Modality};
use crate::eval::{
    render_matrix_csv, render_matrix_json, render_matrix_text, render_weekly_csv,
    render_weekly_json, render_weekly_text, run_matrix, weekly_buckets, EvalError, MatrixConfig,
    MatrixInputs, TimedPrediction,
};
use crate::fusion::{
    assemble_items, load_fusion, predict_items, save_fusion, train_fusion, FusionError,
};
use crate::kgraph::{
    assign_subgraphs, build_kg, read_graph_file, read_subgraph_file, write_graph_file,
    write_subgraph_file, KgraphError, KnowledgeGraph, Subgraph,
};
use crate::relex::{extract_relations, read_triples_file, write_triples_file, RelexError, Triple};
use crate::subgnn::{
    embed, prepare_subgraphs, save_model, train as train_structure, SubgnnError,
};
use crate::transe::{classify_items, save_transe, train_transe, TranseError};

/// The eight batch entry points.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Extract,
    BuildKg,
    TrainKb,
    TrainTranse,
    Fuse,
    Evaluate,
    TimeSensitivity,
    Synth,
}

impl Command {
    pub const ALL: [Command; 8] = [
        Command::Extract,
        Command::BuildKg,
        Command::TrainKb,
        Command::TrainTranse,
        Command::Fuse,
        Command::Evaluate,
        Command::TimeSensitivity,
        Command::Synth,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Command::Extract => "extract",
            Command::BuildKg => "build-kg",
            Command::TrainKb => "train-kb",
            Command::TrainTranse => "train-transe",
            Command::Fuse => "fuse",
            Command::Evaluate => "evaluate",
            Command::TimeSensitivity => "time-sensitivity",
            Command::Synth => "synth",
        }
    }
}

impl std::fmt::Display for Command {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Command {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Command::ALL
            .iter()
            .find(|c| c.name() == s)
            .copied()
            .ok_or_else(|| {
                let names: Vec<&str> = Command::ALL.iter().map(|c| c.name()).collect();
                format!("unknown command '{s}', expected one of: {}", names.join(", "))
            })
    }
}

/// Failures sorted by whose fault they are; [`exit_code`](PipelineError::exit_code)
/// maps them onto the process exit convention (1 usage/config, 2 data,
/// 3 internal).
#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("config: {0}")]
    Config(String),
    #[error("data: {0}")]
    Data(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl PipelineError {
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::Config(_) => 1,
            PipelineError::Data(_) => 2,
            PipelineError::Internal(_) => 3,
        }
    }
}

fn config_err(e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Config(e.to_string())
}

fn data(module: &'static str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Data(format!("{module}: {e}"))
}

fn internal(module: &'static str, e: impl std::fmt::Display) -> PipelineError {
    PipelineError::Internal(format!("{module}: {e}"))
}

fn corpus_err(e: CorpusError) -> PipelineError {
    match e {
        CorpusError::InvalidSpec(_) | CorpusError::InvalidRatios(_) => config_err(format!("corpus: {e}")),
        other => data("corpus", other),
    }
}

fn relex_err(e: RelexError) -> PipelineError {
    data("relex", e)
}

fn kgraph_err(e: KgraphError) -> PipelineError {
    data("kgraph", e)
}

fn subgnn_err(e: SubgnnError) -> PipelineError {
    match e {
        SubgnnError::Numerics(inner) => internal("subgnn", inner),
        SubgnnError::InvalidConfig(_) => config_err(format!("subgnn: {e}")),
        other => data("subgnn", other),
    }
}

fn transe_err(e: TranseError) -> PipelineError {
    match e {
        TranseError::Numerics(inner) => internal("transe", inner),
        TranseError::InvalidConfig(_) => config_err(format!("transe: {e}")),
        other => data("transe", other),
    }
}

fn fusion_err(e: FusionError) -> PipelineError {
    match e {
        FusionError::Numerics(inner) => internal("fusion", inner),
        FusionError::InvalidConfig(_) | FusionError::InvalidMask(_) => {
            config_err(format!("fusion: {e}"))
        }
        other => data("fusion", other),
    }
}

fn eval_err(e: EvalError) -> PipelineError {
    match e {
        EvalError::Fusion(inner) => fusion_err(inner),
        EvalError::Transe(inner) => transe_err(inner),
        EvalError::InvalidConfig(_) => config_err(format!("eval: {e}")),
        other => data("eval", other),
    }
}

// Fixed artifact names inside the output directory. Commands that consume
// an artifact look it up here; only the corpus and any externally supplied
// embedding files live elsewhere.
pub const CORPUS_FILE: &str = "corpus.jsonl";
pub const SYNTH_META_FILE: &str = "synth_meta.json";
pub const TRIPLES_FILE: &str = "triples.tsv";
pub const GRAPH_FILE: &str = "kg.json";
pub const SUBGRAPHS_FILE: &str = "subgraphs.json";
pub const SUBGNN_MODEL_FILE: &str = "subgnn.json";
pub const SUBGNN_HISTORY_FILE: &str = "subgnn_history.json";
pub const K_EMBEDDINGS_FILE: &str = "embeddings_k.jsonl";
pub const TRANSE_REAL_FILE: &str = "transe_real.json";
pub const TRANSE_FAKE_FILE: &str = "transe_fake.json";
pub const BIAS_REPORT_FILE: &str = "bias_report.jsonl";
pub const FUSION_MODEL_FILE: &str = "fusion.json";
pub const FUSION_HISTORY_FILE: &str = "fusion_history.json";
pub const PREDICTIONS_FILE: &str = "predictions.jsonl";
pub const MATRIX_JSON_FILE: &str = "matrix.json";
pub const MATRIX_TEXT_FILE: &str = "matrix.txt";
pub const MATRIX_CSV_FILE: &str = "matrix.csv";
pub const WEEKLY_JSON_FILE: &str = "weekly.json";
pub const WEEKLY_TEXT_FILE: &str = "weekly.txt";
pub const WEEKLY_CSV_FILE: &str = "weekly.csv";

struct Ctx {
    config: RunConfig,
    hash: String,
    out: PathBuf,
}

impl Ctx {
    fn new(config: &RunConfig) -> Ctx {
        Ctx {
            config: config.clone(),
            hash: config_hash(config),
            out: PathBuf::from(&config.output_dir),
        }
    }

    fn artifact(&self, name: &str) -> PathBuf {
        self.out.join(name)
    }

    /// The corpus path: explicit config entry, or the synthesized corpus
    /// in the output directory.
    fn corpus_path(&self) -> Result<PathBuf, PipelineError> {
        if let Some(path) = &self.config.corpus {
            return Ok(PathBuf::from(path));
        }
        let fallback = self.artifact(CORPUS_FILE);
        if fallback.exists() {
            Ok(fallback)
        } else {
            Err(config_err(
                "no corpus configured; set `corpus = <path>` or run `synth` first",
            ))
        }
    }

    fn load_corpus(&self) -> Result<Corpus, PipelineError> {
        let path = self.corpus_path()?;
        let corpus = match path.extension().and_then(|e| e.to_str()) {
            Some("jsonl") => load_jsonl(&path).map_err(corpus_err)?,
            Some("conllu") | Some("conll") => {
                let sidecar = self.config.coref.as_ref().map(PathBuf::from);
                load_conllu(&path, sidecar.as_deref()).map_err(corpus_err)?
            }
            _ => {
                return Err(config_err(format!(
                    "cannot tell the corpus format of '{}'; expected .jsonl or .conllu",
                    path.display()
                )))
            }
        };
        log::info!("loaded corpus '{}' with {} documents", corpus.name, corpus.len());
        Ok(corpus)
    }

    fn splits(&self, corpus: &Corpus, mode: SplitMode) -> Result<Splits, PipelineError> {
        let splits = make_splits(corpus, self.config.ratios, mode, seed_for(self.config.seed, "splits"))
            .map_err(corpus_err)?;
        log::info!(
            "split {} documents into {} train / {} validation / {} test ({mode})",
            corpus.len(),
            splits.train.len(),
            splits.validation.len(),
            splits.test.len(),
        );
        Ok(splits)
    }

    fn labels(&self, corpus: &Corpus) -> HashMap<String, u8> {
        corpus
            .documents
            .iter()
            .filter_map(|d| d.label.map(|l| (d.id.clone(), l)))
            .collect()
    }

    /// Raises on a foreign or missing stamp when `strict`, warns otherwise.
    fn check_lineage(
        &self,
        artifact: &str,
        found: Option<&str>,
        strict: bool,
    ) -> Result<(), PipelineError> {
        let verdict = match found {
            Some(hash) if hash == self.hash => return Ok(()),
            Some(hash) => format!(
                "{artifact} was produced under config {hash}, current config is {}",
                self.hash
            ),
            None => format!("{artifact} carries no config hash"),
        };
        if strict {
            Err(PipelineError::Data(format!(
                "{verdict}; regenerate it under the current config"
            )))
        } else {
            log::warn!("{verdict}");
            Ok(())
        }
    }

    /// Per-document triples in corpus order, read back from the extract
    /// stage's output.
    fn load_item_triples(
        &self,
        corpus: &Corpus,
        strict: bool,
    ) -> Result<Vec<(String, Vec<Triple>)>, PipelineError> {
        let path = self.artifact(TRIPLES_FILE);
        let (triples, stamp) = read_triples_file(&path).map_err(relex_err)?;
        self.check_lineage(TRIPLES_FILE, stamp.as_deref(), strict)?;
        let mut grouped: HashMap<String, Vec<Triple>> = HashMap::new();
        for t in triples {
            grouped.entry(t.doc_id.clone()).or_default().push(t);
        }
        Ok(corpus
            .documents
            .iter()
            .map(|d| (d.id.clone(), grouped.remove(&d.id).unwrap_or_default()))
            .collect())
    }

    /// Merges the pipeline's knowledge embeddings (when present) with any
    /// externally supplied record files.
    fn load_embeddings(&self, strict: bool) -> Result<Vec<EmbeddingRecord>, PipelineError> {
        let mut records = Vec::new();
        let k_path = self.artifact(K_EMBEDDINGS_FILE);
        if k_path.exists() {
            let (rows, stamp) = read_embeddings(&k_path).map_err(|e| data("embedding", e))?;
            self.check_lineage(K_EMBEDDINGS_FILE, stamp.as_deref(), strict)?;
            records.extend(rows);
        }
        for extra in &self.config.extra_embeddings {
            let (rows, _) = read_embeddings(Path::new(extra)).map_err(|e| data("embedding", e))?;
            records.extend(rows);
        }
        if records.is_empty() {
            return Err(PipelineError::Data(
                "no embeddings found; run `train-kb` or list files under `extra_embeddings`"
                    .into(),
            ));
        }
        Ok(records)
    }

    fn write_json<T: Serialize>(&self, name: &str, payload: &T) -> Result<(), PipelineError> {
        let mut text = serde_json::to_string_pretty(payload)
            .map_err(|e| internal("pipeline", e))?;
        text.push('\n');
        atomic_write(&self.artifact(name), text.as_bytes())
            .map_err(|e| data("pipeline", e))?;
        log::info!("wrote {}", self.artifact(name).display());
        Ok(())
    }

    fn write_text(&self, name: &str, text: &str) -> Result<(), PipelineError> {
        atomic_write(&self.artifact(name), text.as_bytes())
            .map_err(|e| data("pipeline", e))?;
        log::info!("wrote {}", self.artifact(name).display());
        Ok(())
    }
}

/// Validates the config, logs the resolved settings, and dispatches.
pub fn run(command: Command, config: &RunConfig) -> Result<(), PipelineError> {
    config.validate().map_err(config_err)?;
    let ctx = Ctx::new(config);
    std::fs::create_dir_all(&ctx.out)
        .map_err(|e| config_err(format!("cannot create output directory '{}': {e}", ctx.out.display())))?;
    log::info!("command: {command}");
    log::info!("config hash: {}", ctx.hash);
    log::debug!("resolved config:\n{}", config.render_flat());
    match command {
        Command::Extract => cmd_extract(&ctx),
        Command::BuildKg => cmd_build_kg(&ctx),
        Command::TrainKb => cmd_train_kb(&ctx),
        Command::TrainTranse => cmd_train_transe(&ctx),
        Command::Fuse => cmd_fuse(&ctx),
        Command::Evaluate => cmd_evaluate(&ctx),
        Command::TimeSensitivity => cmd_time_sensitivity(&ctx),
        Command::Synth => cmd_synth(&ctx),
    }
}

fn cmd_extract(ctx: &Ctx) -> Result<(), PipelineError> {
    let corpus = ctx.load_corpus()?;
    let mut triples = Vec::new();
    for doc in &corpus.documents {
        let resolved = apply_coref(doc).map_err(corpus_err)?;
        triples.extend(extract_relations(&resolved));
    }
    log::info!("extracted {} triples from {} documents", triples.len(), corpus.len());
    write_triples_file(&ctx.artifact(TRIPLES_FILE), &triples, &ctx.hash).map_err(relex_err)?;
    log::info!("wrote {}", ctx.artifact(TRIPLES_FILE).display());
    Ok(())
}

fn cmd_build_kg(ctx: &Ctx) -> Result<(), PipelineError> {
    let corpus = ctx.load_corpus()?;
    let item_triples = ctx.load_item_triples(&corpus, false)?;
    let all: Vec<Triple> = item_triples.iter().flat_map(|(_, ts)| ts.iter().cloned()).collect();
    let kg = build_kg(&all);
    log::info!(
        "knowledge graph: {} entities, {} edges after largest-component restriction",
        kg.node_count(),
        kg.structural_edge_count(),
    );
    let items: Vec<(String, Vec<Triple>, Option<u8>)> = item_triples
        .into_iter()
        .map(|(id, ts)| {
            let label = corpus.document(&id).and_then(|d| d.label);
            (id, ts, label)
        })
        .collect();
    let subgraphs = assign_subgraphs(&kg, &items);
    let empty = subgraphs.iter().filter(|s| s.empty).count();
    log::info!("assigned {} item subgraphs ({empty} empty)", subgraphs.len());
    write_graph_file(&ctx.artifact(GRAPH_FILE), &kg, &ctx.hash).map_err(kgraph_err)?;
    write_subgraph_file(&ctx.artifact(SUBGRAPHS_FILE), &subgraphs, &ctx.hash)
        .map_err(kgraph_err)?;
    log::info!("wrote {} and {}", ctx.artifact(GRAPH_FILE).display(), ctx.artifact(SUBGRAPHS_FILE).display());
    Ok(())
}

fn load_graph_artifacts(ctx: &Ctx) -> Result<(KnowledgeGraph, Vec<Subgraph>), PipelineError> {
    let (kg, graph_stamp) = read_graph_file(&ctx.artifact(GRAPH_FILE)).map_err(kgraph_err)?;
    ctx.check_lineage(GRAPH_FILE, Some(&graph_stamp), false)?;
    let (subgraphs, sub_stamp) =
        read_subgraph_file(&ctx.artifact(SUBGRAPHS_FILE)).map_err(kgraph_err)?;
    ctx.check_lineage(SUBGRAPHS_FILE, Some(&sub_stamp), false)?;
    Ok((kg, subgraphs))
}

fn cmd_train_kb(ctx: &Ctx) -> Result<(), PipelineError> {
    let corpus = ctx.load_corpus()?;
    let (kg, subgraphs) = load_graph_artifacts(ctx)?;
    let splits = ctx.splits(&corpus, ctx.config.split_mode)?;
    let (mut model, history) = train_structure(
        &kg,
        &subgraphs,
        &splits,
        &ctx.config.subgnn,
        seed_for(ctx.config.seed, "subgnn"),
    )
    .map_err(subgnn_err)?;
    if let Some(last) = history.last() {
        log::info!(
            "training finished: loss {:.4}, train accuracy {:.4}, validation accuracy {}",
            last.train_loss,
            last.train_accuracy,
            last.validation_accuracy
                .map_or("n/a".to_string(), |a| format!("{a:.4}")),
        );
    }
    model.config_hash = Some(ctx.hash.clone());
    save_model(&ctx.artifact(SUBGNN_MODEL_FILE), &model).map_err(subgnn_err)?;
    log::info!("wrote {}", ctx.artifact(SUBGNN_MODEL_FILE).display());
    ctx.write_json(SUBGNN_HISTORY_FILE, &history)?;

    let prepared = prepare_subgraphs(&kg, &subgraphs, &model.anchors, &model.config)
        .map_err(subgnn_err)?;
    let records: Vec<EmbeddingRecord> = prepared
        .iter()
        .map(|item| {
            embed(&model, item).map(|e| EmbeddingRecord {
                item_id: e.item_id,
                modality: Modality::K,
                vector: e.vector,
                empty: e.empty,
            })
        })
        .collect::<Result<_, _>>()
        .map_err(subgnn_err)?;
    write_embeddings(&ctx.artifact(K_EMBEDDINGS_FILE), &records, &ctx.hash)
        .map_err(|e| data("embedding", e))?;
    log::info!(
        "wrote {} knowledge embeddings to {}",
        records.len(),
        ctx.artifact(K_EMBEDDINGS_FILE).display(),
    );
    Ok(())
}

fn partition_train_triples(
    item_triples: &[(String, Vec<Triple>)],
    labels: &HashMap<String, u8>,
    splits: &Splits,
) -> Result<(Vec<Triple>, Vec<Triple>), PipelineError> {
    let mut real = Vec::new();
    let mut fake = Vec::new();
    let by_id: HashMap<&str, &[Triple]> = item_triples
        .iter()
        .map(|(id, ts)| (id.as_str(), ts.as_slice()))
        .collect();
    for id in &splits.train {
        let label = labels
            .get(id)
            .copied()
            .ok_or_else(|| data("transe", format!("training item '{id}' has no label")))?;
        let triples = by_id.get(id.as_str()).copied().unwrap_or(&[]);
        let sink = if label == 1 { &mut fake } else { &mut real };
        sink.extend(triples.iter().cloned());
    }
    Ok((real, fake))
}

fn cmd_train_transe(ctx: &Ctx) -> Result<(), PipelineError> {
    let corpus = ctx.load_corpus()?;
    let labels = ctx.labels(&corpus);
    let splits = ctx.splits(&corpus, ctx.config.split_mode)?;
    let item_triples = ctx.load_item_triples(&corpus, false)?;
    let (real, fake) = partition_train_triples(&item_triples, &labels, &splits)?;
    log::info!(
        "training translation models on {} real / {} fake triples",
        real.len(),
        fake.len(),
    );
    let (mut model_real, history_real) = train_transe(
        &real,
        &ctx.config.transe,
        seed_for(ctx.config.seed, "transe:real"),
    )
    .map_err(transe_err)?;
    let (mut model_fake, history_fake) = train_transe(
        &fake,
        &ctx.config.transe,
        seed_for(ctx.config.seed, "transe:fake"),
    )
    .map_err(transe_err)?;
    if let (Some(r), Some(f)) = (history_real.last(), history_fake.last()) {
        log::info!("final margin losses: real-model {r:.4}, fake-model {f:.4}");
    }
    model_real.config_hash = Some(ctx.hash.clone());
    model_fake.config_hash = Some(ctx.hash.clone());
    save_transe(&ctx.artifact(TRANSE_REAL_FILE), &model_real).map_err(transe_err)?;
    save_transe(&ctx.artifact(TRANSE_FAKE_FILE), &model_fake).map_err(transe_err)?;
    log::info!(
        "wrote {} and {}",
        ctx.artifact(TRANSE_REAL_FILE).display(),
        ctx.artifact(TRANSE_FAKE_FILE).display(),
    );

    let test_items: Vec<(String, Vec<Triple>)> = {
        let by_id: HashMap<&str, &Vec<Triple>> =
            item_triples.iter().map(|(id, ts)| (id.as_str(), ts)).collect();
        splits
            .test
            .iter()
            .map(|id| (id.clone(), by_id.get(id.as_str()).map(|ts| (*ts).clone()).unwrap_or_default()))
            .collect()
    };
    let (biases, skipped) = classify_items(
        &model_real,
        &model_fake,
        &test_items,
        ctx.config.transe.aggregate,
    );
    if !skipped.is_empty() {
        log::warn!("{} test items had no triples and were skipped", skipped.len());
    }
    let mut report = format!(
        "{}\n",
        serde_json::json!({
            "format": "newsgraph-bias-report",
            "version": 1,
            "config_hash": ctx.hash,
            "aggregate": ctx.config.transe.aggregate,
            "skipped": skipped,
        })
    );
    for bias in &biases {
        report.push_str(&serde_json::to_string(bias).map_err(|e| internal("pipeline", e))?);
        report.push('\n');
    }
    ctx.write_text(BIAS_REPORT_FILE, &report)?;
    Ok(())
}

fn cmd_fuse(ctx: &Ctx) -> Result<(), PipelineError> {
    let corpus = ctx.load_corpus()?;
    let labels = ctx.labels(&corpus);
    let splits = ctx.splits(&corpus, ctx.config.split_mode)?;
    let records = ctx.load_embeddings(false)?;
    let mask = ctx.config.mask;
    let (mut model, history) = train_fusion(
        &records,
        &labels,
        &splits,
        mask,
        &ctx.config.fusion,
        seed_for(ctx.config.seed, &format!("fusion:{}", mask.label())),
    )
    .map_err(fusion_err)?;
    if let Some(last) = history.last() {
        log::info!(
            "fusion training finished: loss {:.4}, train accuracy {:.4}",
            last.train_loss,
            last.train_accuracy,
        );
    }
    model.config_hash = Some(ctx.hash.clone());
    save_fusion(&ctx.artifact(FUSION_MODEL_FILE), &model).map_err(fusion_err)?;
    log::info!("wrote {}", ctx.artifact(FUSION_MODEL_FILE).display());
    ctx.write_json(FUSION_HISTORY_FILE, &history)?;

    let test_items =
        assemble_items(&records, &splits.test, &labels, mask).map_err(fusion_err)?;
    let predictions = predict_items(&model, &test_items).map_err(fusion_err)?;
    let mut out = format!(
        "{}\n",
        serde_json::json!({
            "format": "newsgraph-predictions",
            "version": 1,
            "config_hash": ctx.hash,
            "mask": mask.label(),
        })
    );
    for p in &predictions {
        out.push_str(&serde_json::to_string(p).map_err(|e| internal("pipeline", e))?);
        out.push('\n');
    }
    ctx.write_text(PREDICTIONS_FILE, &out)?;
    Ok(())
}

fn cmd_evaluate(ctx: &Ctx) -> Result<(), PipelineError> {
    let corpus = ctx.load_corpus()?;
    let labels = ctx.labels(&corpus);
    let splits = ctx.splits(&corpus, ctx.config.split_mode)?;
    let records = ctx.load_embeddings(true)?;
    let item_triples = if ctx.config.include_baselines {
        ctx.load_item_triples(&corpus, true)?
    } else {
        Vec::new()
    };
    let inputs = MatrixInputs {
        records: &records,
        labels: &labels,
        splits: &splits,
        item_triples: &item_triples,
    };
    let matrix_config = MatrixConfig {
        masks: ctx.config.masks.clone(),
        include_baselines: ctx.config.include_baselines,
        fusion: ctx.config.fusion.clone(),
        transe: ctx.config.transe.clone(),
        seed: ctx.config.seed,
    };
    let mut report = run_matrix(&inputs, &matrix_config).map_err(eval_err)?;
    report.config_hash = Some(ctx.hash.clone());
    let text = render_matrix_text(&report);
    log::info!("evaluation matrix:\n{text}");
    ctx.write_text(MATRIX_JSON_FILE, &render_matrix_json(&report))?;
    ctx.write_text(MATRIX_TEXT_FILE, &text)?;
    ctx.write_text(MATRIX_CSV_FILE, &render_matrix_csv(&report))?;
    Ok(())
}

fn cmd_time_sensitivity(ctx: &Ctx) -> Result<(), PipelineError> {
    let corpus = ctx.load_corpus()?;
    let labels = ctx.labels(&corpus);
    if ctx.config.split_mode != SplitMode::Temporal {
        log::warn!("time-sensitivity always uses temporal splits; ignoring split_mode = {}", ctx.config.split_mode);
    }
    let splits = ctx.splits(&corpus, SplitMode::Temporal)?;
    let records = ctx.load_embeddings(true)?;
    let mask = ctx.config.mask;
    let (model, _) = train_fusion(
        &records,
        &labels,
        &splits,
        mask,
        &ctx.config.fusion,
        seed_for(ctx.config.seed, &format!("time-sensitivity:{}", mask.label())),
    )
    .map_err(fusion_err)?;

    let timestamp_of = |id: &str| -> Result<i64, PipelineError> {
        corpus
            .document(id)
            .and_then(|d| d.timestamp)
            .ok_or_else(|| data("corpus", format!("document '{id}' has no timestamp")))
    };
    let last_train_timestamp = splits
        .train
        .iter()
        .map(|id| timestamp_of(id))
        .try_fold(i64::MIN, |acc, ts| ts.map(|t| acc.max(t)))?;

    let test_items =
        assemble_items(&records, &splits.test, &labels, mask).map_err(fusion_err)?;
    let mut timed = Vec::with_capacity(test_items.len());
    for item in &test_items {
        let (prediction, _) = crate::fusion::predict(&model, &item.vector).map_err(fusion_err)?;
        timed.push(TimedPrediction {
            item_id: item.item_id.clone(),
            timestamp: timestamp_of(&item.item_id)?,
            prediction,
            label: item.label.ok_or_else(|| {
                data("eval", format!("test item '{}' has no label", item.item_id))
            })?,
        });
    }
    let mut report = weekly_buckets(&timed, last_train_timestamp).map_err(eval_err)?;
    report.config_hash = Some(ctx.hash.clone());
    log::info!(
        "weekly report: {} retained, {} dropped beyond the window",
        report.retained,
        report.dropped_late,
    );
    ctx.write_text(WEEKLY_JSON_FILE, &render_weekly_json(&report))?;
    ctx.write_text(WEEKLY_TEXT_FILE, &render_weekly_text(&report))?;
    ctx.write_text(WEEKLY_CSV_FILE, &render_weekly_csv(&report))?;
    Ok(())
}

fn cmd_synth(ctx: &Ctx) -> Result<(), PipelineError> {
    let corpus = generate_synthetic_corpus(&ctx.config.synth).map_err(corpus_err)?;
    let fake = corpus.documents.iter().filter(|d| d.label == Some(1)).count();
    log::info!(
        "generated {} documents ({fake} fake, {} real)",
        corpus.len(),
        corpus.len() - fake,
    );
    write_jsonl(&ctx.artifact(CORPUS_FILE), &corpus).map_err(corpus_err)?;
    log::info!("wrote {}", ctx.artifact(CORPUS_FILE).display());
    ctx.write_json(
        SYNTH_META_FILE,
        &serde_json::json!({
            "format": "newsgraph-synth-meta",
            "version": 1,
            "config_hash": ctx.hash,
            "spec": ctx.config.synth,
        }),
    )?;
    Ok(())
}

/// Reads back a fusion checkpoint and refuses one from another lineage;
/// used by tooling that loads models outside the training command.
pub fn load_fusion_checked(ctx_config: &RunConfig, path: &Path) -> Result<crate::fusion::FusionModel, PipelineError> {
    let model = load_fusion(path).map_err(fusion_err)?;
    let expected = config_hash(ctx_config);
    if let Some(found) = &model.config_hash {
        if *found != expected {
            return Err(PipelineError::Data(format!(
                "fusion model at {} was trained under config {found}, current config is {expected}",
                path.display()
            )));
        }
    }
    Ok(model)
}
