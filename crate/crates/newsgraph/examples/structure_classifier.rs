//! The knowledge channel end to end: synthesize a corpus, extract triples,
//! build the graph, train the structure classifier, and read out test
//! accuracy plus the embeddings the fusion stage would consume.
//!
//!     cargo run --example structure_classifier

use newsgraph::corpus::{generate_synthetic_corpus, make_splits, Ratios, SplitMode, SynthSpec};
use newsgraph::kgraph::{assign_subgraphs, build_kg};
use newsgraph::relex::extract_relations;
use newsgraph::subgnn::{embed, predict, prepare_subgraphs, train, SubgnnConfig};

fn main() {
    let spec = SynthSpec {
        size: 120,
        signal_strength: 1.0,
        seed: 3,
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic_corpus(&spec).unwrap();

    let mut items = Vec::new();
    let mut all_triples = Vec::new();
    for doc in &corpus.documents {
        let triples = extract_relations(doc);
        all_triples.extend(triples.iter().cloned());
        items.push((doc.id.clone(), triples, doc.label));
    }
    let kg = build_kg(&all_triples);
    let subgraphs = assign_subgraphs(&kg, &items);
    println!(
        "{} triples -> graph with {} entities; {} item subgraphs",
        all_triples.len(),
        kg.node_count(),
        subgraphs.len()
    );

    let splits = make_splits(&corpus, Ratios::default(), SplitMode::Random, 11).unwrap();
    let config = SubgnnConfig { epochs: 30, ..SubgnnConfig::default() };
    let (model, history) = train(&kg, &subgraphs, &splits, &config, 11).unwrap();

    for stats in history.iter().step_by(10) {
        println!(
            "epoch {:2}  loss {:.4}  train acc {:.3}  val acc {:.3}",
            stats.epoch,
            stats.train_loss,
            stats.train_accuracy,
            stats.validation_accuracy.unwrap_or(f64::NAN)
        );
    }

    // Anchor patches were sampled once at the start of training; every
    // subgraph is described by DTW similarity to those same patches.
    let prepared = prepare_subgraphs(&kg, &subgraphs, &model.anchors, &model.config).unwrap();
    let mut correct = 0;
    let mut total = 0;
    for item in &prepared {
        let Some(doc) = corpus.document(&item.item_id) else { continue };
        if !splits.test.contains(&item.item_id) {
            continue;
        }
        let (label, probs) = predict(&model, item).unwrap();
        total += 1;
        if Some(label) == doc.label {
            correct += 1;
        }
        if total <= 3 {
            println!(
                "  {}  true={}  predicted={}  p(fake)={:.3}",
                item.item_id,
                doc.label.unwrap(),
                label,
                probs[1]
            );
        }
    }
    println!("test accuracy: {correct}/{total}");

    let first = embed(&model, &prepared[0]).unwrap();
    println!(
        "embedding for {}: {} dims, first values {:?}",
        first.item_id,
        first.vector.len(),
        &first.vector[..4.min(first.vector.len())]
    );
}
