//! CoNLL-U ingestion. Documents are delimited by `# newdoc id = <id>`
//! comments; a file without them is read as one document named after the
//! file stem. Labels, timestamps, and coreference clusters ride in an
//! optional JSON sidecar keyed by document id.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use super::{
    validate_corpus, AnnotatedDocument, CorefCluster, Corpus, CorpusError, Head, Span, Token,
};

#[derive(Deserialize, Default)]
struct SidecarEntry {
    #[serde(default)]
    label: Option<u8>,
    #[serde(default)]
    timestamp: Option<i64>,
    #[serde(default)]
    clusters: Vec<SidecarCluster>,
}

#[derive(Deserialize)]
struct SidecarCluster {
    mentions: Vec<[usize; 2]>,
    #[serde(default)]
    main: Option<usize>,
}

struct Row {
    id: usize,
    form: String,
    lemma: String,
    upos: String,
    head: usize,
    deprel: String,
}

fn malformed(path: &Path, lineno: usize, message: String) -> CorpusError {
    CorpusError::MalformedInput {
        locus: format!("{}:{}", path.display(), lineno),
        message,
    }
}

fn parse_row(path: &Path, lineno: usize, line: &str) -> Result<Option<Row>, CorpusError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(malformed(path, lineno, format!("expected 10 columns, got {}", cols.len())));
    }
    // Multiword-token ranges (1-2) and empty nodes (1.1) carry no parse edges.
    if cols[0].contains('-') || cols[0].contains('.') {
        return Ok(None);
    }
    let id: usize = cols[0]
        .parse()
        .map_err(|_| malformed(path, lineno, format!("bad token id '{}'", cols[0])))?;
    let head: usize = cols[6]
        .parse()
        .map_err(|_| malformed(path, lineno, format!("bad head '{}'", cols[6])))?;
    if cols[3] == "_" || cols[7] == "_" {
        return Err(malformed(path, lineno, "missing UPOS or DEPREL".into()));
    }
    let lemma = if cols[2] == "_" { cols[1].to_lowercase() } else { cols[2].to_string() };
    Ok(Some(Row {
        id,
        form: cols[1].to_string(),
        lemma,
        upos: cols[3].to_string(),
        head,
        deprel: cols[7].to_string(),
    }))
}

fn flush_sentence(
    path: &Path,
    lineno: usize,
    rows: &mut Vec<Row>,
    tokens: &mut Vec<Token>,
    next_sentence: &mut usize,
) -> Result<(), CorpusError> {
    if rows.is_empty() {
        return Ok(());
    }
    let base = tokens.len();
    let count = rows.len();
    for (offset, row) in rows.drain(..).enumerate() {
        if row.id != offset + 1 {
            return Err(malformed(path, lineno, format!("token ids must count from 1, got {}", row.id)));
        }
        let head = if row.head == 0 {
            Head::Root
        } else if row.head <= count {
            Head::Token(base + row.head - 1)
        } else {
            return Err(malformed(path, lineno, format!("head {} beyond sentence of {count} tokens", row.head)));
        };
        tokens.push(Token {
            index: base + offset,
            surface: row.form,
            lemma: row.lemma,
            pos: row.upos,
            head,
            deprel: row.deprel,
            sentence_id: *next_sentence,
        });
    }
    *next_sentence += 1;
    Ok(())
}

pub fn load_conllu(path: &Path, sidecar: Option<&Path>) -> Result<Corpus, CorpusError> {
    let body = std::fs::read_to_string(path)?;
    let default_id = path.file_stem().and_then(|s| s.to_str()).unwrap_or("document").to_string();

    let mut documents: Vec<AnnotatedDocument> = Vec::new();
    let mut current_id: Option<String> = None;
    let mut tokens: Vec<Token> = Vec::new();
    let mut rows: Vec<Row> = Vec::new();
    let mut next_sentence = 0usize;

    let finish_document =
        |id: Option<String>, tokens: &mut Vec<Token>, documents: &mut Vec<AnnotatedDocument>| {
            if let Some(id) = id {
                documents.push(AnnotatedDocument {
                    id,
                    tokens: std::mem::take(tokens),
                    clusters: Vec::new(),
                    label: None,
                    timestamp: None,
                });
            }
        };

    for (i, raw) in body.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() {
            flush_sentence(path, lineno, &mut rows, &mut tokens, &mut next_sentence)?;
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            let comment = comment.trim();
            if let Some(rest) = comment.strip_prefix("newdoc") {
                flush_sentence(path, lineno, &mut rows, &mut tokens, &mut next_sentence)?;
                finish_document(current_id.take(), &mut tokens, &mut documents);
                let id = rest
                    .trim()
                    .strip_prefix("id")
                    .map(|r| r.trim_start_matches(['=', ' ']).trim().to_string())
                    .filter(|s| !s.is_empty())
                    .ok_or_else(|| malformed(path, lineno, "newdoc without an id".into()))?;
                current_id = Some(id);
                next_sentence = 0;
            }
            continue;
        }
        if current_id.is_none() {
            current_id = Some(default_id.clone());
        }
        if let Some(row) = parse_row(path, lineno, line)? {
            rows.push(row);
        }
    }
    flush_sentence(path, body.lines().count(), &mut rows, &mut tokens, &mut next_sentence)?;
    finish_document(current_id.take(), &mut tokens, &mut documents);

    if let Some(sidecar_path) = sidecar {
        let sidecar_body = std::fs::read_to_string(sidecar_path)?;
        let entries: BTreeMap<String, SidecarEntry> = serde_json::from_str(&sidecar_body)
            .map_err(|e| CorpusError::MalformedInput {
                locus: sidecar_path.display().to_string(),
                message: e.to_string(),
            })?;
        for doc in &mut documents {
            if let Some(entry) = entries.get(&doc.id) {
                doc.label = entry.label;
                doc.timestamp = entry.timestamp;
                doc.clusters = entry
                    .clusters
                    .iter()
                    .map(|c| CorefCluster {
                        mentions: c.mentions.iter().map(|m| Span::new(m[0], m[1])).collect(),
                        main_mention: c.main,
                    })
                    .collect();
            }
        }
    }

    let name = path.file_stem().and_then(|s| s.to_str()).unwrap_or("corpus").to_string();
    let corpus = Corpus::new(&name, documents);
    validate_corpus(&corpus)?;
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# newdoc id = n1
# sent_id = 1
1\tDavid\tDavid\tPROPN\tNNP\t_\t2\tcompound\t_\t_
2\tWarner\tWarner\tPROPN\tNNP\t_\t3\tnsubj\t_\t_
3\ttrolls\ttroll\tVERB\tVBZ\t_\t0\troot\t_\t_
4\tKohli\tKohli\tPROPN\tNNP\t_\t3\tdobj\t_\t_

1\tFans\tfan\tNOUN\tNNS\t_\t2\tnsubj\t_\t_
2\tlaugh\tlaugh\tVERB\tVBP\t_\t0\troot\t_\t_

# newdoc id = n2
1\tIt\tit\tPRON\tPRP\t_\t2\tnsubj\t_\t_
2\trains\train\tVERB\tVBZ\t_\t0\troot\t_\t_
";

    fn write_temp(dir: &tempfile::TempDir, name: &str, body: &str) -> std::path::PathBuf {
        let path = dir.path().join(name);
        std::fs::write(&path, body).unwrap();
        path
    }

    #[test]
    fn parses_documents_sentences_and_heads() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_temp(&dir, "sample.conllu", SAMPLE);
        let corpus = load_conllu(&path, None).unwrap();
        assert_eq!(corpus.documents.len(), 2);
        let d1 = &corpus.documents[0];
        assert_eq!(d1.id, "n1");
        assert_eq!(d1.tokens.len(), 6);
        assert_eq!(d1.tokens[0].head, Head::Token(1));
        assert_eq!(d1.tokens[2].head, Head::Root);
        // Second sentence heads are document-level.
        assert_eq!(d1.tokens[4].head, Head::Token(5));
        assert_eq!(d1.tokens[4].sentence_id, 1);
        assert_eq!(corpus.documents[1].tokens.len(), 2);
    }

    #[test]
    fn sidecar_attaches_labels_and_clusters() {
        let dir = tempfile::tempdir().unwrap();
        let path = write_temp(&dir, "sample.conllu", SAMPLE);
        let sidecar = write_temp(
            &dir,
            "sample.meta.json",
            r#"{"n1": {"label": 1, "timestamp": 1600000000, "clusters": [{"mentions": [[0,2],[3,4]], "main": 0}]}}"#,
        );
        let corpus = load_conllu(&path, Some(&sidecar)).unwrap();
        let d1 = &corpus.documents[0];
        assert_eq!(d1.label, Some(1));
        assert_eq!(d1.timestamp, Some(1_600_000_000));
        assert_eq!(d1.clusters.len(), 1);
        assert_eq!(d1.clusters[0].mentions[1], Span::new(3, 4));
        assert_eq!(corpus.documents[1].label, None);
    }

    #[test]
    fn multiword_ranges_are_skipped() {
        let body = "\
1-2\tcannot\t_\t_\t_\t_\t_\t_\t_\t_
1\tcan\tcan\tAUX\tMD\t_\t3\taux\t_\t_
2\tnot\tnot\tPART\tRB\t_\t3\tneg\t_\t_
3\tgo\tgo\tVERB\tVB\t_\t0\troot\t_\t_
";
        let dir = tempfile::tempdir().unwrap();
        let path = write_temp(&dir, "mwt.conllu", body);
        let corpus = load_conllu(&path, None).unwrap();
        assert_eq!(corpus.documents.len(), 1);
        assert_eq!(corpus.documents[0].id, "mwt");
        assert_eq!(corpus.documents[0].tokens.len(), 3);
    }

    #[test]
    fn head_beyond_sentence_is_rejected() {
        let body = "1\tx\tx\tNOUN\t_\t_\t4\tdep\t_\t_\n";
        let dir = tempfile::tempdir().unwrap();
        let path = write_temp(&dir, "bad.conllu", body);
        assert!(load_conllu(&path, None).is_err());
    }

    #[test]
    fn underscore_lemma_falls_back_to_lowercased_form() {
        let body = "1\tRuns\t_\tVERB\t_\t_\t0\troot\t_\t_\n";
        let dir = tempfile::tempdir().unwrap();
        let path = write_temp(&dir, "lemma.conllu", body);
        let corpus = load_conllu(&path, None).unwrap();
        assert_eq!(corpus.documents[0].tokens[0].lemma, "runs");
    }
}
