//! Corpus model and ingestion.
//!
//! A corpus is a list of dependency-parsed documents, each with optional
//! coreference clusters, an optional binary label (0 = real, 1 = fake), and an
//! optional unix timestamp. Two on-disk formats are supported: line-delimited
//! JSON (one document per line) and CoNLL-U with a JSON sidecar carrying
//! labels, timestamps, and coreference clusters. Field-by-field format notes
//! live in `FORMATS.md`.

mod conllu;
mod coref;
mod json;
mod splits;
mod synth;

pub use conllu::load_conllu;
pub use coref::apply_coref;
pub use json::{load_jsonl, load_jsonl_reader, write_jsonl};
pub use splits::{make_splits, Ratios, SplitMode, Splits};
pub use synth::{generate_synthetic_corpus, SynthSpec};

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("malformed input at {locus}: {message}")]
    MalformedInput { locus: String, message: String },
    #[error("duplicate document id '{0}'")]
    DuplicateId(String),
    #[error("document '{doc}': head {head} out of range at token {token}")]
    HeadOutOfRange { doc: String, token: usize, head: usize },
    #[error("clusters overlap at token {token} of document '{doc}'")]
    OverlappingClusters { doc: String, token: usize },
    #[error("corpus is empty")]
    EmptyCorpus,
    #[error("document '{0}' has no timestamp, required for temporal splits")]
    MissingTimestamps(String),
    #[error("invalid split ratios: {0}")]
    InvalidRatios(String),
    #[error("invalid synthesis spec: {0}")]
    InvalidSpec(String),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

/// Syntactic head of a token: another token of the same sentence, or the
/// token itself for sentence roots.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Head {
    Root,
    Token(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Token {
    pub index: usize,
    pub surface: String,
    pub lemma: String,
    pub pos: String,
    pub head: Head,
    pub deprel: String,
    pub sentence_id: usize,
}

/// Token span, `start` inclusive, `end` exclusive.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }

    pub fn contains(&self, index: usize) -> bool {
        index >= self.start && index < self.end
    }

    pub fn overlaps(&self, other: &Span) -> bool {
        self.start < other.end && other.start < self.end
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CorefCluster {
    pub mentions: Vec<Span>,
    /// Index into `mentions`; when absent, the first mention containing a
    /// proper-noun token is used, falling back to the first mention.
    pub main_mention: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedDocument {
    pub id: String,
    pub tokens: Vec<Token>,
    pub clusters: Vec<CorefCluster>,
    /// 0 = real, 1 = fake; absent for unlabeled items.
    pub label: Option<u8>,
    /// Unix seconds.
    pub timestamp: Option<i64>,
}

impl AnnotatedDocument {
    /// Tokens of one sentence, in order.
    pub fn sentence(&self, sentence_id: usize) -> impl Iterator<Item = &Token> {
        self.tokens.iter().filter(move |t| t.sentence_id == sentence_id)
    }

    pub fn sentence_count(&self) -> usize {
        self.tokens.last().map(|t| t.sentence_id + 1).unwrap_or(0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub name: String,
    pub documents: Vec<AnnotatedDocument>,
}

impl Corpus {
    pub fn new(name: &str, documents: Vec<AnnotatedDocument>) -> Self {
        Corpus { name: name.to_string(), documents }
    }

    pub fn document(&self, id: &str) -> Option<&AnnotatedDocument> {
        self.documents.iter().find(|d| d.id == id)
    }

    pub fn len(&self) -> usize {
        self.documents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.documents.is_empty()
    }
}

/// Structural checks every ingested document must pass.
pub fn validate_document(doc: &AnnotatedDocument) -> Result<(), CorpusError> {
    let n = doc.tokens.len();
    let locus = |msg: String| CorpusError::MalformedInput { locus: format!("document '{}'", doc.id), message: msg };
    if doc.id.is_empty() {
        return Err(locus("empty document id".into()));
    }
    if let Some(label) = doc.label {
        if label > 1 {
            return Err(locus(format!("label {label} is not 0 or 1")));
        }
    }
    let mut prev_sentence = 0usize;
    for (i, tok) in doc.tokens.iter().enumerate() {
        if tok.index != i {
            return Err(locus(format!("token {i} carries index {}", tok.index)));
        }
        if tok.pos.is_empty() || tok.deprel.is_empty() {
            return Err(locus(format!("token {i} has an empty pos or deprel")));
        }
        if tok.sentence_id < prev_sentence || tok.sentence_id > prev_sentence + 1 {
            return Err(locus(format!(
                "sentence ids must be contiguous and non-decreasing, token {i} jumps {} -> {}",
                prev_sentence, tok.sentence_id
            )));
        }
        if i == 0 && tok.sentence_id != 0 {
            return Err(locus("first sentence id must be 0".into()));
        }
        prev_sentence = tok.sentence_id;
        if let Head::Token(h) = tok.head {
            if h >= n {
                return Err(CorpusError::HeadOutOfRange { doc: doc.id.clone(), token: i, head: h });
            }
            if doc.tokens[h].sentence_id != tok.sentence_id {
                return Err(CorpusError::HeadOutOfRange { doc: doc.id.clone(), token: i, head: h });
            }
        }
    }
    for (ci, cluster) in doc.clusters.iter().enumerate() {
        if cluster.mentions.is_empty() {
            return Err(locus(format!("cluster {ci} has no mentions")));
        }
        if let Some(main) = cluster.main_mention {
            if main >= cluster.mentions.len() {
                return Err(locus(format!("cluster {ci} main mention {main} out of range")));
            }
        }
        for (mi, span) in cluster.mentions.iter().enumerate() {
            if span.is_empty() || span.end > n {
                return Err(locus(format!("cluster {ci} mention {mi} span out of bounds")));
            }
            for other in &cluster.mentions[mi + 1..] {
                if span.overlaps(other) {
                    return Err(locus(format!("cluster {ci} has overlapping mentions")));
                }
            }
        }
    }
    Ok(())
}

/// Validates every document and checks id uniqueness.
pub fn validate_corpus(corpus: &Corpus) -> Result<(), CorpusError> {
    let mut seen = std::collections::HashSet::new();
    for doc in &corpus.documents {
        if !seen.insert(doc.id.clone()) {
            return Err(CorpusError::DuplicateId(doc.id.clone()));
        }
        validate_document(doc)?;
    }
    Ok(())
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::*;

    /// Compact token builder for fixtures: (surface, lemma, pos, head, deprel).
    /// `head` is the in-sentence token offset, or `usize::MAX` for root.
    pub fn sentence(doc: &mut AnnotatedDocument, words: &[(&str, &str, &str, usize, &str)]) {
        let base = doc.tokens.len();
        let sid = doc.tokens.last().map(|t| t.sentence_id + 1).unwrap_or(0);
        for (i, &(surface, lemma, pos, head, deprel)) in words.iter().enumerate() {
            doc.tokens.push(Token {
                index: base + i,
                surface: surface.to_string(),
                lemma: lemma.to_string(),
                pos: pos.to_string(),
                head: if head == usize::MAX { Head::Root } else { Head::Token(base + head) },
                deprel: deprel.to_string(),
                sentence_id: sid,
            });
        }
    }

    pub fn doc(id: &str) -> AnnotatedDocument {
        AnnotatedDocument { id: id.to_string(), tokens: Vec::new(), clusters: Vec::new(), label: None, timestamp: None }
    }
}

#[cfg(test)]
mod tests {
    use super::testutil::*;
    use super::*;

    #[test]
    fn head_out_of_range_is_caught() {
        let mut d = doc("d1");
        sentence(&mut d, &[("runs", "run", "VERB", usize::MAX, "root")]);
        d.tokens[0].head = Head::Token(5);
        assert!(matches!(
            validate_document(&d),
            Err(CorpusError::HeadOutOfRange { head: 5, .. })
        ));
    }

    #[test]
    fn cross_sentence_head_is_caught() {
        let mut d = doc("d1");
        sentence(&mut d, &[("runs", "run", "VERB", usize::MAX, "root")]);
        sentence(&mut d, &[("jumps", "jump", "VERB", usize::MAX, "root")]);
        d.tokens[1].head = Head::Token(0);
        assert!(matches!(validate_document(&d), Err(CorpusError::HeadOutOfRange { .. })));
    }

    #[test]
    fn duplicate_ids_are_caught() {
        let mut a = doc("same");
        sentence(&mut a, &[("runs", "run", "VERB", usize::MAX, "root")]);
        let corpus = Corpus::new("c", vec![a.clone(), a]);
        assert!(matches!(validate_corpus(&corpus), Err(CorpusError::DuplicateId(_))));
    }

    #[test]
    fn bad_label_is_caught() {
        let mut d = doc("d1");
        sentence(&mut d, &[("runs", "run", "VERB", usize::MAX, "root")]);
        d.label = Some(2);
        assert!(validate_document(&d).is_err());
    }

    #[test]
    fn overlapping_mentions_within_cluster_are_caught() {
        let mut d = doc("d1");
        sentence(&mut d, &[
            ("Ana", "ana", "PROPN", 1, "nsubj"),
            ("runs", "run", "VERB", usize::MAX, "root"),
            ("home", "home", "NOUN", 1, "dobj"),
        ]);
        d.clusters.push(CorefCluster {
            mentions: vec![Span::new(0, 2), Span::new(1, 3)],
            main_mention: Some(0),
        });
        assert!(validate_document(&d).is_err());
    }
}
