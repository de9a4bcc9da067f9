//! Train two translation-embedding models - one on triples from real news,
//! one on triples from fake news - then classify an unseen item by which
//! model finds its triples less surprising.
//!
//!     cargo run --example transe_baseline

use newsgraph::relex::Triple;
use newsgraph::transe::{
    aggregate_biases, classify_bias, train_transe, BiasAggregate, TranseConfig,
};

fn triples(doc: &str, rows: &[(&str, &str, &str)]) -> Vec<Triple> {
    rows.iter()
        .map(|&(s, p, o)| Triple {
            subject: s.to_string(),
            predicate: p.to_string(),
            object: o.to_string(),
            doc_id: doc.to_string(),
            sentence_id: 0,
        })
        .collect()
}

fn main() {
    // The two worlds share entities but wire them up differently, so the
    // models learn incompatible translations for the same symbols.
    let real_graph = triples(
        "real-news",
        &[
            ("mayor", "open", "bridge"),
            ("mayor", "fund", "school"),
            ("school", "host", "election"),
            ("reporter", "cover", "election"),
            ("reporter", "interview", "mayor"),
            ("council", "approve", "bridge"),
        ],
    );
    let fake_graph = triples(
        "fake-news",
        &[
            ("mayor", "hide", "bridge"),
            ("school", "fund", "mayor"),
            ("election", "host", "school"),
            ("reporter", "invent", "election"),
            ("mayor", "silence", "reporter"),
            ("bridge", "approve", "council"),
        ],
    );

    let config = TranseConfig { dimension: 16, epochs: 150, ..TranseConfig::default() };
    let (model_real, hist_r) = train_transe(&real_graph, &config, 42).unwrap();
    let (model_fake, hist_f) = train_transe(&fake_graph, &config, 43).unwrap();
    println!(
        "trained: real-model loss {:.4}, fake-model loss {:.4}",
        hist_r.last().unwrap(),
        hist_f.last().unwrap()
    );

    // A claim consistent with the real wiring.
    let claim = triples("claim", &[("mayor", "fund", "school"), ("reporter", "cover", "election")]);
    let (bias_real, bias_fake) =
        aggregate_biases(&model_real, &model_fake, &claim, BiasAggregate::Avg).unwrap();
    println!("\nconsistent claim: bias under real-model {bias_real:.4}, under fake-model {bias_fake:.4}");

    for agg in [BiasAggregate::Avg, BiasAggregate::Max] {
        let label = classify_bias(&model_real, &model_fake, &claim, agg).unwrap();
        println!("  {agg} aggregation -> label {label} ({})", if label == 0 { "real" } else { "fake" });
    }

    // The same entities arranged the fake way.
    let hoax = triples("hoax", &[("school", "fund", "mayor"), ("mayor", "hide", "bridge")]);
    let (bias_real, bias_fake) =
        aggregate_biases(&model_real, &model_fake, &hoax, BiasAggregate::Avg).unwrap();
    println!("\ninverted claim: bias under real-model {bias_real:.4}, under fake-model {bias_fake:.4}");
    let label = classify_bias(&model_real, &model_fake, &hoax, BiasAggregate::Avg).unwrap();
    println!("  avg aggregation -> label {label} ({})", if label == 0 { "real" } else { "fake" });
}
