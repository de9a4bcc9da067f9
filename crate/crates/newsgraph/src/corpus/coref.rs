//! Coreference substitution: every non-main mention is replaced by the
//! tokens of its cluster's main mention, so downstream extraction sees one
//! canonical string per entity.

use super::{AnnotatedDocument, CorpusError, Head, Span};

/// Offset within the span of its syntactic head: the token whose head lies
/// outside the span (or is a sentence root). Falls back to the first token
/// when the span has no such token.
fn span_head_offset(doc: &AnnotatedDocument, span: Span) -> usize {
    for (off, tok) in doc.tokens[span.start..span.end].iter().enumerate() {
        match tok.head {
            Head::Root => return off,
            Head::Token(h) if !span.contains(h) => return off,
            _ => {}
        }
    }
    0
}

fn crosses_sentences(doc: &AnnotatedDocument, span: Span) -> bool {
    let first = doc.tokens[span.start].sentence_id;
    doc.tokens[span.start..span.end].iter().any(|t| t.sentence_id != first)
}

fn resolve_main(doc: &AnnotatedDocument, cluster: &super::CorefCluster) -> usize {
    if let Some(main) = cluster.main_mention {
        return main;
    }
    cluster
        .mentions
        .iter()
        .position(|span| doc.tokens[span.start..span.end].iter().any(|t| t.pos == "PROPN"))
        .unwrap_or(0)
}

struct Substitution {
    site: Span,
    main: Span,
}

enum PendingHead {
    /// Head taken from the original document, to be remapped.
    MapOld(Head),
    /// Head at a known position in the rebuilt document.
    FixedNew(usize),
}

/// Rewrites every non-main mention to the main mention's tokens. The
/// rewritten span keeps the original mention's sentence and its external
/// `(head, deprel)` attachment on the copied span's syntactic head; heads
/// everywhere else are remapped to the new indices. Mentions that cross
/// sentence boundaries are left untouched. The result carries no clusters, so
/// applying the function twice equals applying it once.
pub fn apply_coref(doc: &AnnotatedDocument) -> Result<AnnotatedDocument, CorpusError> {
    let mut out = doc.clone();
    if doc.clusters.is_empty() {
        return Ok(out);
    }

    let mut subs: Vec<Substitution> = Vec::new();
    for cluster in &doc.clusters {
        let main_idx = resolve_main(doc, cluster);
        let main = cluster.mentions[main_idx];
        if crosses_sentences(doc, main) {
            log::debug!("document '{}': main mention spans sentences, cluster skipped", doc.id);
            continue;
        }
        for (mi, &site) in cluster.mentions.iter().enumerate() {
            if mi == main_idx || site == main {
                continue;
            }
            if crosses_sentences(doc, site) {
                log::debug!(
                    "document '{}': mention {}..{} spans sentences, left as-is",
                    doc.id,
                    site.start,
                    site.end
                );
                continue;
            }
            subs.push(Substitution { site, main });
        }
    }
    subs.sort_by_key(|s| s.site.start);
    for pair in subs.windows(2) {
        if pair[0].site.overlaps(&pair[1].site) {
            return Err(CorpusError::OverlappingClusters {
                doc: doc.id.clone(),
                token: pair[1].site.start,
            });
        }
    }

    let n = doc.tokens.len();
    let mut map_old_new = vec![0usize; n];
    let mut new_tokens = Vec::with_capacity(n);
    let mut pending: Vec<PendingHead> = Vec::with_capacity(n);
    let mut deprels: Vec<String> = Vec::with_capacity(n);

    let mut sub_iter = subs.iter().peekable();
    let mut i = 0usize;
    while i < n {
        if let Some(sub) = sub_iter.peek() {
            if sub.site.start == i {
                let sub = sub_iter.next().unwrap();
                let copy_base = new_tokens.len();
                let main_head_off = span_head_offset(doc, sub.main);
                let site_head_off = span_head_offset(doc, sub.site);
                let site_head_tok = &doc.tokens[sub.site.start + site_head_off];
                let site_sentence = doc.tokens[sub.site.start].sentence_id;

                for off in 0..sub.main.len() {
                    let src = &doc.tokens[sub.main.start + off];
                    let mut tok = src.clone();
                    tok.sentence_id = site_sentence;
                    if off == main_head_off {
                        pending.push(PendingHead::MapOld(site_head_tok.head));
                        deprels.push(site_head_tok.deprel.clone());
                    } else {
                        match src.head {
                            Head::Token(h) if sub.main.contains(h) => {
                                pending.push(PendingHead::FixedNew(copy_base + (h - sub.main.start)));
                            }
                            // Irregular internal structure: attach to the copy's head.
                            _ => pending.push(PendingHead::FixedNew(copy_base + main_head_off)),
                        }
                        deprels.push(src.deprel.clone());
                    }
                    new_tokens.push(tok);
                }
                for old in sub.site.start..sub.site.end {
                    map_old_new[old] = copy_base + main_head_off;
                }
                i = sub.site.end;
                continue;
            }
        }
        map_old_new[i] = new_tokens.len();
        let tok = &doc.tokens[i];
        pending.push(PendingHead::MapOld(tok.head));
        deprels.push(tok.deprel.clone());
        new_tokens.push(tok.clone());
        i += 1;
    }

    for (idx, tok) in new_tokens.iter_mut().enumerate() {
        tok.index = idx;
        tok.deprel = std::mem::take(&mut deprels[idx]);
        let head = match pending[idx] {
            PendingHead::MapOld(Head::Root) => Head::Root,
            PendingHead::MapOld(Head::Token(h)) => Head::Token(map_old_new[h]),
            PendingHead::FixedNew(h) => Head::Token(h),
        };
        // A remap can land a token on itself; treat that as a root.
        tok.head = if head == Head::Token(idx) { Head::Root } else { head };
    }

    out.tokens = new_tokens;
    out.clusters = Vec::new();
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::super::{validate_document, CorefCluster};
    use super::*;

    /// "Virat Kohli plays well. He scores runs." with He -> Virat Kohli.
    fn pronoun_doc() -> AnnotatedDocument {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Virat", "virat", "PROPN", 1, "compound"),
            ("Kohli", "kohli", "PROPN", 2, "nsubj"),
            ("plays", "play", "VERB", usize::MAX, "root"),
            ("well", "well", "ADV", 2, "advmod"),
        ]);
        sentence(&mut d, &[
            ("He", "he", "PRON", 1, "nsubj"),
            ("scores", "score", "VERB", usize::MAX, "root"),
            ("runs", "run", "NOUN", 1, "dobj"),
        ]);
        d.clusters.push(CorefCluster {
            mentions: vec![Span::new(0, 2), Span::new(4, 5)],
            main_mention: Some(0),
        });
        d
    }

    #[test]
    fn pronoun_is_replaced_by_main_mention() {
        let out = apply_coref(&pronoun_doc()).unwrap();
        let surfaces: Vec<&str> = out.tokens.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(surfaces, vec!["Virat", "Kohli", "plays", "well", "Virat", "Kohli", "scores", "runs"]);
        // Copied span: internal compound points at the copy, head token takes
        // the pronoun's attachment.
        assert_eq!(out.tokens[4].head, Head::Token(5));
        assert_eq!(out.tokens[4].deprel, "compound");
        assert_eq!(out.tokens[5].head, Head::Token(6));
        assert_eq!(out.tokens[5].deprel, "nsubj");
        assert_eq!(out.tokens[5].sentence_id, 1);
        // Token count change equals main_len - mention_len.
        assert_eq!(out.tokens.len(), 7 + (2 - 1));
        validate_document(&out).unwrap();
        assert!(out.clusters.is_empty());
    }

    #[test]
    fn no_clusters_is_identity() {
        let mut d = pronoun_doc();
        d.clusters.clear();
        let out = apply_coref(&d).unwrap();
        assert_eq!(out, d);
    }

    #[test]
    fn applying_twice_equals_once() {
        let once = apply_coref(&pronoun_doc()).unwrap();
        let twice = apply_coref(&once).unwrap();
        assert_eq!(once, twice);
    }

    #[test]
    fn overlapping_clusters_are_an_error() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Ana", "ana", "PROPN", 3, "nsubj"),
            ("and", "and", "CCONJ", 2, "cc"),
            ("Bo", "bo", "PROPN", 0, "conj"),
            ("sing", "sing", "VERB", usize::MAX, "root"),
            ("today", "today", "NOUN", 3, "obl"),
        ]);
        sentence(&mut d, &[
            ("They", "they", "PRON", 1, "nsubj"),
            ("rest", "rest", "VERB", usize::MAX, "root"),
        ]);
        d.clusters.push(CorefCluster { mentions: vec![Span::new(0, 1), Span::new(5, 6)], main_mention: Some(0) });
        d.clusters.push(CorefCluster { mentions: vec![Span::new(2, 3), Span::new(5, 6)], main_mention: Some(0) });
        let err = apply_coref(&d).unwrap_err();
        assert!(matches!(err, CorpusError::OverlappingClusters { token: 5, .. }));
    }

    #[test]
    fn cross_sentence_mention_is_left_untouched() {
        let mut d = pronoun_doc();
        // A bogus mention spanning the sentence break.
        d.clusters[0].mentions.push(Span::new(3, 5));
        let out = apply_coref(&d).unwrap();
        // The in-sentence pronoun is still substituted; the crossing span is not.
        assert_eq!(out.tokens.len(), 8);
        assert_eq!(out.tokens[3].surface, "well");
    }

    #[test]
    fn outside_token_pointing_into_a_replaced_span_is_remapped() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("Ravi", "ravi", "PROPN", 1, "compound"),
            ("Kumar", "kumar", "PROPN", 2, "nsubj"),
            ("waves", "wave", "VERB", usize::MAX, "root"),
        ]);
        sentence(&mut d, &[
            ("Angry", "angry", "ADJ", 1, "amod"),
            ("he", "he", "PRON", 2, "nsubj"),
            ("shouts", "shout", "VERB", usize::MAX, "root"),
        ]);
        d.clusters.push(CorefCluster {
            mentions: vec![Span::new(0, 2), Span::new(4, 5)],
            main_mention: Some(0),
        });
        let out = apply_coref(&d).unwrap();
        let surfaces: Vec<&str> = out.tokens.iter().map(|t| t.surface.as_str()).collect();
        assert_eq!(surfaces, vec!["Ravi", "Kumar", "waves", "Angry", "Ravi", "Kumar", "shouts"]);
        // "Angry" followed its pronoun into the copy's head token.
        assert_eq!(out.tokens[3].head, Head::Token(5));
        validate_document(&out).unwrap();
    }

    #[test]
    fn main_defaults_to_first_proper_noun_mention() {
        let mut d = doc("n1");
        sentence(&mut d, &[
            ("She", "she", "PRON", 1, "nsubj"),
            ("won", "win", "VERB", usize::MAX, "root"),
        ]);
        sentence(&mut d, &[
            ("Mary", "mary", "PROPN", 1, "nsubj"),
            ("celebrated", "celebrate", "VERB", usize::MAX, "root"),
        ]);
        d.clusters.push(CorefCluster {
            mentions: vec![Span::new(0, 1), Span::new(2, 3)],
            main_mention: None,
        });
        let out = apply_coref(&d).unwrap();
        assert_eq!(out.tokens[0].surface, "Mary");
        assert_eq!(out.tokens[2].surface, "Mary");
    }
}
