//! Verb-centered relation extraction over dependency parses.
//!
//! Every token tagged `VERB` becomes a candidate predicate (its lemma,
//! prefixed with `not_` when a negation dependent is attached). Direct
//! dependents supply the arguments: `nsubj` dependents collect on the left,
//! `dobj`/`iobj`/`attr`/`xcomp` dependents on the right, and the cartesian
//! product of the two sides is emitted as subject-predicate-object triples.
//! Argument tokens expand to multi-word entities through their contiguous
//! `compound`/`flat` dependents, so "Warner" surfaces as "David Warner".

use std::io::{BufRead, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{AnnotatedDocument, Head, Token};

#[derive(Debug, Error)]
pub enum RelexError {
    #[error("malformed triples file at {locus}: {message}")]
    MalformedFile { locus: String, message: String },
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Triple {
    pub subject: String,
    pub predicate: String,
    pub object: String,
    pub doc_id: String,
    pub sentence_id: usize,
}

const RIGHT_DEPRELS: &[&str] = &["dobj", "iobj", "attr", "xcomp"];

/// Expands an argument token to its entity string: the token plus its direct
/// `compound`/`flat` dependents, restricted to the run of consecutive indices
/// around the token, in surface order. Proper nouns keep their surface form;
/// everything else contributes its lowercased lemma.
fn entity_string(doc: &AnnotatedDocument, token: &Token) -> String {
    let mut indices: Vec<usize> = doc
        .tokens
        .iter()
        .filter(|t| {
            t.head == Head::Token(token.index) && (t.deprel == "compound" || t.deprel == "flat")
        })
        .map(|t| t.index)
        .collect();
    indices.push(token.index);
    indices.sort_unstable();

    let anchor = indices.iter().position(|&i| i == token.index).expect("token present");
    let mut lo = anchor;
    while lo > 0 && indices[lo - 1] + 1 == indices[lo] {
        lo -= 1;
    }
    let mut hi = anchor;
    while hi + 1 < indices.len() && indices[hi] + 1 == indices[hi + 1] {
        hi += 1;
    }

    indices[lo..=hi]
        .iter()
        .map(|&i| {
            let t = &doc.tokens[i];
            if t.pos == "PROPN" {
                t.surface.clone()
            } else {
                t.lemma.to_lowercase()
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// Extracts triples from one document, in document order: verbs by token
/// index, and per verb the left-right cartesian product with both sides in
/// token order. Coreference should already be applied; clusters are ignored.
pub fn extract_relations(doc: &AnnotatedDocument) -> Vec<Triple> {
    let mut triples = Vec::new();
    for verb in doc.tokens.iter().filter(|t| t.pos == "VERB") {
        let mut negated = false;
        let mut left: Vec<&Token> = Vec::new();
        let mut right: Vec<&Token> = Vec::new();
        for dep in doc.tokens.iter().filter(|t| t.head == Head::Token(verb.index)) {
            if dep.lemma == "not" || dep.deprel == "neg" {
                negated = true;
            } else if dep.deprel == "nsubj" {
                left.push(dep);
            } else if RIGHT_DEPRELS.contains(&dep.deprel.as_str()) {
                right.push(dep);
            }
        }
        if left.is_empty() || right.is_empty() {
            continue;
        }
        let mut predicate = verb.lemma.to_lowercase();
        if negated {
            predicate.insert_str(0, "not_");
        }
        for l in &left {
            for r in &right {
                triples.push(Triple {
                    subject: entity_string(doc, l),
                    predicate: predicate.clone(),
                    object: entity_string(doc, r),
                    doc_id: doc.id.clone(),
                    sentence_id: verb.sentence_id,
                });
            }
        }
    }
    triples
}

/// Tab-separated export: doc_id, sentence_id, subject, predicate, object.
/// Lines starting with `#` are header comments.
pub fn write_triples<W: Write>(out: &mut W, triples: &[Triple], config_hash: &str) -> Result<(), RelexError> {
    writeln!(out, "# config_hash={config_hash}")?;
    for t in triples {
        writeln!(out, "{}\t{}\t{}\t{}\t{}", t.doc_id, t.sentence_id, t.subject, t.predicate, t.object)?;
    }
    Ok(())
}

pub fn write_triples_file(path: &Path, triples: &[Triple], config_hash: &str) -> Result<(), RelexError> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    write_triples(&mut out, triples, config_hash)?;
    out.flush()?;
    Ok(())
}

/// Reads a triples file back; returns the triples and the embedded config
/// hash, if any.
pub fn read_triples_file(path: &Path) -> Result<(Vec<Triple>, Option<String>), RelexError> {
    let file = std::fs::File::open(path)?;
    let mut triples = Vec::new();
    let mut config_hash = None;
    for (lineno, line) in std::io::BufReader::new(file).lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(hash) = comment.trim().strip_prefix("config_hash=") {
                config_hash = Some(hash.to_string());
            }
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 5 {
            return Err(RelexError::MalformedFile {
                locus: format!("{}:{}", path.display(), lineno + 1),
                message: format!("expected 5 tab-separated fields, got {}", fields.len()),
            });
        }
        let sentence_id: usize = fields[1].parse().map_err(|_| RelexError::MalformedFile {
            locus: format!("{}:{}", path.display(), lineno + 1),
            message: format!("bad sentence id '{}'", fields[1]),
        })?;
        triples.push(Triple {
            doc_id: fields[0].to_string(),
            sentence_id,
            subject: fields[2].to_string(),
            predicate: fields[3].to_string(),
            object: fields[4].to_string(),
        });
    }
    Ok((triples, config_hash))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::testutil::*;

    fn spo(t: &Triple) -> (String, String, String) {
        (t.subject.clone(), t.predicate.clone(), t.object.clone())
    }

    #[test]
    fn compound_names_form_multiword_entities() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("David", "david", "PROPN", 1, "compound"),
            ("Warner", "warner", "PROPN", 2, "nsubj"),
            ("trolls", "troll", "VERB", usize::MAX, "root"),
            ("Virat", "virat", "PROPN", 4, "compound"),
            ("Kohli", "kohli", "PROPN", 2, "dobj"),
        ]);
        let triples = extract_relations(&d);
        assert_eq!(triples.len(), 1);
        assert_eq!(
            spo(&triples[0]),
            ("David Warner".into(), "troll".into(), "Virat Kohli".into())
        );
        assert_eq!(triples[0].sentence_id, 0);
    }

    #[test]
    fn negation_prefixes_the_predicate_once() {
        // "Fans do not care to respond": care has a negation dependent and an
        // xcomp dependent.
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Fans", "fan", "NOUN", 3, "nsubj"),
            ("do", "do", "AUX", 3, "aux"),
            ("not", "not", "PART", 3, "neg"),
            ("care", "care", "VERB", usize::MAX, "root"),
            ("to", "to", "PART", 5, "mark"),
            ("respond", "respond", "VERB", 3, "xcomp"),
        ]);
        let triples = extract_relations(&d);
        assert_eq!(triples.len(), 1);
        assert_eq!(spo(&triples[0]), ("fan".into(), "not_care".into(), "respond".into()));
    }

    #[test]
    fn double_negation_still_yields_one_prefix() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("She", "she", "PRON", 3, "nsubj"),
            ("not", "not", "PART", 3, "neg"),
            ("never", "not", "PART", 3, "neg"),
            ("sleeps", "sleep", "VERB", usize::MAX, "root"),
            ("here", "here", "NOUN", 3, "dobj"),
        ]);
        let triples = extract_relations(&d);
        assert_eq!(triples.len(), 1);
        assert_eq!(triples[0].predicate, "not_sleep");
    }

    #[test]
    fn cartesian_product_of_two_by_two() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Ana", "ana", "PROPN", 2, "nsubj"),
            ("Bo", "bo", "PROPN", 2, "nsubj"),
            ("greets", "greet", "VERB", usize::MAX, "root"),
            ("Cy", "cy", "PROPN", 2, "dobj"),
            ("Di", "di", "PROPN", 2, "iobj"),
        ]);
        let triples = extract_relations(&d);
        let got: Vec<_> = triples.iter().map(spo).collect();
        assert_eq!(got, vec![
            ("Ana".into(), "greet".into(), "Cy".into()),
            ("Ana".into(), "greet".into(), "Di".into()),
            ("Bo".into(), "greet".into(), "Cy".into()),
            ("Bo".into(), "greet".into(), "Di".into()),
        ]);
    }

    #[test]
    fn aux_and_passive_subjects_are_ignored() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Votes", "vote", "NOUN", 2, "nsubjpass"),
            ("were", "be", "AUX", 2, "auxpass"),
            ("counted", "count", "VERB", usize::MAX, "root"),
            ("today", "today", "NOUN", 2, "dobj"),
        ]);
        assert!(extract_relations(&d).is_empty());
    }

    #[test]
    fn verb_without_object_yields_nothing() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Ana", "ana", "PROPN", 1, "nsubj"),
            ("sleeps", "sleep", "VERB", usize::MAX, "root"),
        ]);
        assert!(extract_relations(&d).is_empty());
    }

    #[test]
    fn document_without_verbs_yields_nothing() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Quiet", "quiet", "ADJ", 1, "amod"),
            ("morning", "morning", "NOUN", usize::MAX, "root"),
        ]);
        assert!(extract_relations(&d).is_empty());
    }

    #[test]
    fn non_adjacent_compound_is_not_merged() {
        // "Budget" is a compound dependent of "report" but separated from it,
        // so it stays out of the entity string.
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Budget", "budget", "NOUN", 3, "compound"),
            ("the", "the", "DET", 3, "det"),
            ("annual", "annual", "ADJ", 3, "amod"),
            ("report", "report", "NOUN", 4, "nsubj"),
            ("passes", "pass", "VERB", usize::MAX, "root"),
            ("review", "review", "NOUN", 4, "dobj"),
        ]);
        let triples = extract_relations(&d);
        assert_eq!(triples.len(), 1);
        assert_eq!(triples[0].subject, "report");
    }

    #[test]
    fn triples_file_roundtrip() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("triples.tsv");
        let triples = vec![
            Triple {
                subject: "David Warner".into(),
                predicate: "troll".into(),
                object: "Virat Kohli".into(),
                doc_id: "n1".into(),
                sentence_id: 0,
            },
            Triple {
                subject: "fan".into(),
                predicate: "not_care".into(),
                object: "respond".into(),
                doc_id: "n1".into(),
                sentence_id: 1,
            },
        ];
        write_triples_file(&path, &triples, "abc123").unwrap();
        let (read, hash) = read_triples_file(&path).unwrap();
        assert_eq!(read, triples);
        assert_eq!(hash.as_deref(), Some("abc123"));
    }
}
