//! Line-delimited JSON corpus format: one document object per line.

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    validate_corpus, AnnotatedDocument, CorefCluster, Corpus, CorpusError, Head, Span, Token,
};

#[derive(Serialize, Deserialize)]
struct JsonToken {
    surface: String,
    lemma: String,
    pos: String,
    /// Document-level index of the head token; `null` marks a sentence root.
    head: Option<usize>,
    deprel: String,
    sentence: usize,
}

#[derive(Serialize, Deserialize)]
struct JsonCluster {
    /// `[start, end)` token index pairs.
    mentions: Vec<[usize; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    main: Option<usize>,
}

#[derive(Serialize, Deserialize)]
struct JsonDocument {
    id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<u8>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    timestamp: Option<i64>,
    tokens: Vec<JsonToken>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    clusters: Vec<JsonCluster>,
}

impl From<&AnnotatedDocument> for JsonDocument {
    fn from(doc: &AnnotatedDocument) -> Self {
        JsonDocument {
            id: doc.id.clone(),
            label: doc.label,
            timestamp: doc.timestamp,
            tokens: doc
                .tokens
                .iter()
                .map(|t| JsonToken {
                    surface: t.surface.clone(),
                    lemma: t.lemma.clone(),
                    pos: t.pos.clone(),
                    head: match t.head {
                        Head::Root => None,
                        Head::Token(h) => Some(h),
                    },
                    deprel: t.deprel.clone(),
                    sentence: t.sentence_id,
                })
                .collect(),
            clusters: doc
                .clusters
                .iter()
                .map(|c| JsonCluster {
                    mentions: c.mentions.iter().map(|s| [s.start, s.end]).collect(),
                    main: c.main_mention,
                })
                .collect(),
        }
    }
}

fn into_document(jd: JsonDocument) -> AnnotatedDocument {
    AnnotatedDocument {
        id: jd.id,
        label: jd.label,
        timestamp: jd.timestamp,
        tokens: jd
            .tokens
            .into_iter()
            .enumerate()
            .map(|(i, t)| Token {
                index: i,
                surface: t.surface,
                lemma: t.lemma,
                pos: t.pos,
                head: match t.head {
                    // A token listed as its own head is also a root.
                    Some(h) if h == i => Head::Root,
                    Some(h) => Head::Token(h),
                    None => Head::Root,
                },
                deprel: t.deprel,
                sentence_id: t.sentence,
            })
            .collect(),
        clusters: jd
            .clusters
            .into_iter()
            .map(|c| CorefCluster {
                mentions: c.mentions.iter().map(|m| Span::new(m[0], m[1])).collect(),
                main_mention: c.main,
            })
            .collect(),
    }
}

pub fn load_jsonl_reader<R: BufRead>(name: &str, reader: R) -> Result<Corpus, CorpusError> {
    let mut documents = Vec::new();
    for (lineno, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let jd: JsonDocument =
            serde_json::from_str(&line).map_err(|e| CorpusError::MalformedInput {
                locus: format!("{}:{}", name, lineno + 1),
                message: e.to_string(),
            })?;
        documents.push(into_document(jd));
    }
    let corpus = Corpus::new(name, documents);
    validate_corpus(&corpus)?;
    Ok(corpus)
}

pub fn load_jsonl(path: &Path) -> Result<Corpus, CorpusError> {
    let file = std::fs::File::open(path)?;
    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus").to_string();
    load_jsonl_reader(&name, std::io::BufReader::new(file))
}

pub fn write_jsonl(path: &Path, corpus: &Corpus) -> Result<(), CorpusError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    for doc in &corpus.documents {
        let jd = JsonDocument::from(doc);
        let line = serde_json::to_string(&jd).expect("document serialization cannot fail");
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}
