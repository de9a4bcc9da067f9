//! Synthetic corpus generation with planted, tunable class signals.
//!
//! Three signals separate the classes as `signal_strength` rises from 0 to 1:
//! verb vocabulary (disjoint pools at 1.0), negation rate, and subgraph shape.
//! Real items arrange their entities in a star around one center, fake items
//! in a chain, so the two classes induce different degree sequences in the
//! knowledge graph while sharing node and edge counts. Every document also
//! links into a small cycle of hub entities, which keeps the whole corpus in
//! one connected component.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{AnnotatedDocument, CorefCluster, Corpus, CorpusError, Head, Span, Token};

const REAL_VERBS: &[&str] = &[
    "confirm", "announce", "report", "approve", "publish", "verify", "support", "sign", "launch",
    "fund",
];
const FAKE_VERBS: &[&str] = &[
    "fabricate", "distort", "exaggerate", "invent", "deny", "twist", "spoof", "mislead", "forge",
    "stage",
];
const SHARED_VERBS: &[&str] = &["say", "see", "meet", "visit", "join", "lead"];

const HUBS: &[(&str, &str)] = &[
    ("United", "Nations"),
    ("World", "Bank"),
    ("Central", "Office"),
    ("National", "Press"),
    ("State", "House"),
    ("City", "Hall"),
];

const FIRST_NAMES: &[&str] = &[
    "Alma", "Boris", "Clara", "Dario", "Edith", "Felix", "Greta", "Hugo", "Iris", "Jonas",
    "Katya", "Lars", "Mona", "Nils", "Orla", "Pavel", "Quinn", "Rosa", "Sven", "Tessa",
];
const SYLLABLES: &[&str] = &[
    "bar", "den", "fel", "gor", "hal", "jin", "kor", "lam", "mir", "nor", "pol", "quil", "ros",
    "sten", "tor", "ulm", "ven", "wex", "yor", "zan",
];

/// Largest corpus the unique-entity name pool supports.
pub const MAX_SYNTH_SIZE: usize = 1200;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    /// Number of documents, 2..=MAX_SYNTH_SIZE.
    pub size: usize,
    /// 0.0 = statistically identical classes, 1.0 = fully separated signals.
    pub signal_strength: f64,
    pub seed: u64,
    /// Fraction of fake documents, strictly between 0 and 1.
    pub fake_fraction: f64,
    /// Fraction of documents that carry a coreference cluster.
    pub coref_fraction: f64,
    /// Timestamp of the first document, unix seconds.
    pub start_timestamp: i64,
    /// Seconds between consecutive documents.
    pub timestamp_step: i64,
}

impl Default for SynthSpec {
    fn default() -> Self {
        SynthSpec {
            size: 200,
            signal_strength: 1.0,
            seed: 17,
            fake_fraction: 0.5,
            coref_fraction: 0.3,
            // 2020-01-01, spaced so a few hundred documents span ~26 weeks.
            start_timestamp: 1_577_836_800,
            timestamp_step: 40_000,
        }
    }
}

impl SynthSpec {
    pub fn validate(&self) -> Result<(), CorpusError> {
        if self.size < 2 || self.size > MAX_SYNTH_SIZE {
            return Err(CorpusError::InvalidSpec(format!(
                "size must be in 2..={MAX_SYNTH_SIZE}, got {}",
                self.size
            )));
        }
        if !(0.0..=1.0).contains(&self.signal_strength) {
            return Err(CorpusError::InvalidSpec("signal_strength must be in [0, 1]".into()));
        }
        if self.fake_fraction <= 0.0 || self.fake_fraction >= 1.0 {
            return Err(CorpusError::InvalidSpec(
                "fake_fraction must leave both classes represented".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.coref_fraction) {
            return Err(CorpusError::InvalidSpec("coref_fraction must be in [0, 1]".into()));
        }
        if self.timestamp_step <= 0 {
            return Err(CorpusError::InvalidSpec("timestamp_step must be positive".into()));
        }
        Ok(())
    }
}

/// Entity surface form: two proper-noun tokens.
#[derive(Clone)]
struct Entity {
    first: String,
    last: String,
}

/// Deterministic unique name source; index order never repeats a pair.
fn entity(index: usize) -> Entity {
    let first = FIRST_NAMES[index % FIRST_NAMES.len()];
    let rest = index / FIRST_NAMES.len();
    let a = SYLLABLES[rest % SYLLABLES.len()];
    let b = SYLLABLES[(rest / SYLLABLES.len()) % SYLLABLES.len()];
    let mut last = String::with_capacity(a.len() + b.len());
    last.push_str(a);
    last.push_str(b);
    let mut chars = last.chars();
    let capped: String = chars.next().map(|c| c.to_ascii_uppercase()).into_iter().chain(chars).collect();
    Entity { first: first.to_string(), last: capped }
}

struct DocBuilder {
    tokens: Vec<Token>,
    clusters: Vec<CorefCluster>,
    sentence: usize,
}

impl DocBuilder {
    fn new() -> Self {
        DocBuilder { tokens: Vec::new(), clusters: Vec::new(), sentence: 0 }
    }

    fn push(&mut self, surface: &str, lemma: &str, pos: &str, head: Head, deprel: &str) -> usize {
        let index = self.tokens.len();
        self.tokens.push(Token {
            index,
            surface: surface.to_string(),
            lemma: lemma.to_string(),
            pos: pos.to_string(),
            head,
            deprel: deprel.to_string(),
            sentence_id: self.sentence,
        });
        index
    }

    /// "First Last [not] verbs First Last". Returns the span of the subject.
    fn svo(&mut self, subj: &Entity, verb: &str, obj: &Entity, negated: bool) -> Span {
        let base = self.tokens.len();
        let verb_index = base + if negated { 3 } else { 2 };
        self.push(&subj.first, &subj.first.to_lowercase(), "PROPN", Head::Token(base + 1), "compound");
        self.push(&subj.last, &subj.last.to_lowercase(), "PROPN", Head::Token(verb_index), "nsubj");
        if negated {
            self.push("not", "not", "PART", Head::Token(verb_index), "neg");
        }
        let mut surface = verb.to_string();
        surface.push('s');
        self.push(&surface, verb, "VERB", Head::Root, "root");
        self.push(&obj.first, &obj.first.to_lowercase(), "PROPN", Head::Token(verb_index + 2), "compound");
        self.push(&obj.last, &obj.last.to_lowercase(), "PROPN", Head::Token(verb_index), "dobj");
        self.sentence += 1;
        Span::new(base, base + 2)
    }

    /// "Last verbs First Last": a bare surname subject for coref exercises.
    fn surname_svo(&mut self, subj: &Entity, verb: &str, obj: &Entity) -> Span {
        let base = self.tokens.len();
        self.push(&subj.last, &subj.last.to_lowercase(), "PROPN", Head::Token(base + 1), "nsubj");
        let mut surface = verb.to_string();
        surface.push('s');
        self.push(&surface, verb, "VERB", Head::Root, "root");
        self.push(&obj.first, &obj.first.to_lowercase(), "PROPN", Head::Token(base + 3), "compound");
        self.push(&obj.last, &obj.last.to_lowercase(), "PROPN", Head::Token(base + 1), "dobj");
        self.sentence += 1;
        Span::new(base, base + 1)
    }
}

fn pick<'a, R: Rng>(rng: &mut R, pool: &[&'a str]) -> &'a str {
    pool[rng.gen_range(0..pool.len())]
}

/// Deterministic corpus with both classes spread evenly over time.
pub fn generate_synthetic_corpus(spec: &SynthSpec) -> Result<Corpus, CorpusError> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let signal = spec.signal_strength;
    let mut next_entity = 0usize;
    let mut take_entity = || {
        let e = entity(next_entity);
        next_entity += 1;
        e
    };

    let hubs: Vec<Entity> = HUBS
        .iter()
        .map(|&(a, b)| Entity { first: a.to_string(), last: b.to_string() })
        .collect();

    let mut documents = Vec::with_capacity(spec.size);
    for i in 0..spec.size {
        // Bresenham-style interleave keeps both classes present in any prefix.
        let fake = ((i + 1) as f64 * spec.fake_fraction).floor()
            > (i as f64 * spec.fake_fraction).floor();
        let label = u8::from(fake);

        let class_pool: &[&str] = if fake { FAKE_VERBS } else { REAL_VERBS };
        let verb = |rng: &mut ChaCha8Rng| -> String {
            let pool = if rng.gen_bool(signal) { class_pool } else { SHARED_VERBS };
            pick(rng, pool).to_string()
        };
        let neg_prob = if fake { 0.05 + 0.35 * signal } else { 0.05 };

        let mut b = DocBuilder::new();
        let hub_a = &hubs[i % hubs.len()];
        let hub_b = &hubs[(i + 1) % hubs.len()];

        // Hub cycle edge: identical contribution for both classes.
        let v = verb(&mut rng);
        b.svo(hub_a, &v, hub_b, false);

        let m = rng.gen_range(3..=5usize);
        let star = if rng.gen_bool(signal) { !fake } else { rng.gen_bool(0.5) };

        let members: Vec<Entity> = (0..=m).map(|_| take_entity()).collect();
        let anchor = &members[0];

        // Attach the local structure to this document's hub. The subject span
        // here is the anchor's first full appearance.
        let v = verb(&mut rng);
        let anchor_span = b.svo(anchor, &v, hub_a, false);

        if star {
            for leaf in &members[1..] {
                let v = verb(&mut rng);
                let neg = rng.gen_bool(neg_prob);
                b.svo(anchor, &v, leaf, neg);
            }
        } else {
            for pair in members.windows(2) {
                let v = verb(&mut rng);
                let neg = rng.gen_bool(neg_prob);
                b.svo(&pair[0], &v, &pair[1], neg);
            }
        }

        if rng.gen_bool(spec.coref_fraction) {
            // Mention the anchor by surname only; coref substitution against
            // the main mention restores the full name.
            let v = verb(&mut rng);
            let mention = b.surname_svo(anchor, &v, hub_b);
            b.clusters.push(CorefCluster {
                mentions: vec![anchor_span, mention],
                main_mention: Some(0),
            });
        }

        documents.push(AnnotatedDocument {
            id: format!("synth-{i:04}"),
            tokens: b.tokens,
            clusters: b.clusters,
            label: Some(label),
            timestamp: Some(spec.start_timestamp + i as i64 * spec.timestamp_step),
        });
    }

    let corpus = Corpus::new("synthetic", documents);
    super::validate_corpus(&corpus).expect("generator must produce valid documents");
    Ok(corpus)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    #[test]
    fn deterministic_for_a_seed() {
        let spec = SynthSpec { size: 40, ..SynthSpec::default() };
        let a = generate_synthetic_corpus(&spec).unwrap();
        let b = generate_synthetic_corpus(&spec).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn both_classes_present_and_sized() {
        let spec = SynthSpec { size: 51, fake_fraction: 0.4, ..SynthSpec::default() };
        let c = generate_synthetic_corpus(&spec).unwrap();
        assert_eq!(c.len(), 51);
        let fakes = c.documents.iter().filter(|d| d.label == Some(1)).count();
        assert!(fakes > 0 && fakes < 51);
        assert!((fakes as f64 - 51.0 * 0.4).abs() <= 1.0);
    }

    #[test]
    fn full_signal_keeps_verb_vocabularies_disjoint() {
        let spec = SynthSpec { size: 120, signal_strength: 1.0, ..SynthSpec::default() };
        let c = generate_synthetic_corpus(&spec).unwrap();
        let verbs = |label: u8| -> BTreeSet<String> {
            c.documents
                .iter()
                .filter(|d| d.label == Some(label))
                .flat_map(|d| d.tokens.iter())
                .filter(|t| t.pos == "VERB")
                .map(|t| t.lemma.clone())
                .collect()
        };
        let real = verbs(0);
        let fake = verbs(1);
        assert!(real.is_disjoint(&fake), "overlap: {:?}", real.intersection(&fake).collect::<Vec<_>>());
    }

    #[test]
    fn timestamps_increase_monotonically() {
        let spec = SynthSpec { size: 30, ..SynthSpec::default() };
        let c = generate_synthetic_corpus(&spec).unwrap();
        let ts: Vec<i64> = c.documents.iter().map(|d| d.timestamp.unwrap()).collect();
        assert!(ts.windows(2).all(|w| w[0] < w[1]));
    }

    #[test]
    fn invalid_specs_are_rejected() {
        let bad_size = SynthSpec { size: 1, ..SynthSpec::default() };
        assert!(generate_synthetic_corpus(&bad_size).is_err());
        let bad_signal = SynthSpec { signal_strength: 1.5, ..SynthSpec::default() };
        assert!(generate_synthetic_corpus(&bad_signal).is_err());
        let one_class = SynthSpec { fake_fraction: 0.0, ..SynthSpec::default() };
        assert!(generate_synthetic_corpus(&one_class).is_err());
    }

    #[test]
    fn entity_names_never_repeat() {
        let mut seen = BTreeSet::new();
        for i in 0..(MAX_SYNTH_SIZE * 6) {
            let e = entity(i);
            assert!(seen.insert(format!("{} {}", e.first, e.last)), "repeat at {i}");
        }
    }

    #[test]
    fn coref_clusters_point_at_real_mentions() {
        let spec = SynthSpec { size: 80, coref_fraction: 1.0, ..SynthSpec::default() };
        let c = generate_synthetic_corpus(&spec).unwrap();
        let with_clusters = c.documents.iter().filter(|d| !d.clusters.is_empty()).count();
        assert_eq!(with_clusters, 80);
        for d in &c.documents {
            for cluster in &d.clusters {
                let main = cluster.mentions[cluster.main_mention.unwrap()];
                let surname = &d.tokens[cluster.mentions[1].start].surface;
                assert_eq!(&d.tokens[main.end - 1].surface, surname);
            }
        }
    }
}
