//! How does a detector age? Split a timestamped corpus temporally, train on
//! the past, and bucket test performance by weeks since the last training
//! item.
//!
//!     cargo run --example time_sensitivity

use std::collections::HashMap;

use newsgraph::corpus::{generate_synthetic_corpus, make_splits, Ratios, SplitMode, SynthSpec};
use newsgraph::embedding::{EmbeddingRecord, Modality};
use newsgraph::eval::{render_weekly_text, weekly_buckets, TimedPrediction, SECONDS_PER_WEEK};
use newsgraph::fusion::{assemble_items, predict, train_fusion, FusionConfig, ModalityMask};

fn main() {
    // Spread 160 documents over ~30 weeks so the test slice spans several
    // weekly buckets.
    let spec = SynthSpec {
        size: 160,
        signal_strength: 1.0,
        seed: 9,
        timestamp_step: SECONDS_PER_WEEK / 6,
        ..SynthSpec::default()
    };
    let corpus = generate_synthetic_corpus(&spec).unwrap();
    let splits = make_splits(&corpus, Ratios::default(), SplitMode::Temporal, 0).unwrap();

    // Stand-in knowledge embeddings: separable, with drift that grows over
    // time so late weeks degrade - the effect this report exists to show.
    let horizon = spec.start_timestamp + 160 * spec.timestamp_step;
    let mut records = Vec::new();
    let mut labels = HashMap::new();
    for doc in &corpus.documents {
        let label = doc.label.unwrap();
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let age = (doc.timestamp.unwrap() - spec.start_timestamp) as f64
            / (horizon - spec.start_timestamp) as f64;
        let wobble = (doc.timestamp.unwrap() as f64 * 0.001).sin();
        records.push(EmbeddingRecord {
            item_id: doc.id.clone(),
            modality: Modality::K,
            vector: vec![sign * (1.2 - age) + wobble * age * 1.5, sign * 0.4],
            empty: false,
        });
        labels.insert(doc.id.clone(), label);
    }

    let mask = ModalityMask::parse("K").unwrap();
    let config = FusionConfig { epochs: 50, dropout: 0.0, ..FusionConfig::default() };
    let (model, _) = train_fusion(&records, &labels, &splits, mask, &config, 33).unwrap();

    let last_train_timestamp = splits
        .train
        .iter()
        .filter_map(|id| corpus.document(id).unwrap().timestamp)
        .max()
        .unwrap();

    let test_items = assemble_items(&records, &splits.test, &labels, mask).unwrap();
    let timed: Vec<TimedPrediction> = test_items
        .iter()
        .map(|item| {
            let (prediction, _) = predict(&model, &item.vector).unwrap();
            TimedPrediction {
                item_id: item.item_id.clone(),
                timestamp: corpus.document(&item.item_id).unwrap().timestamp.unwrap(),
                prediction,
                label: item.label.unwrap(),
            }
        })
        .collect();

    let report = weekly_buckets(&timed, last_train_timestamp).unwrap();
    println!(
        "{} test items, {} within the 26-week window\n",
        timed.len(),
        report.retained
    );
    // Empty weeks stay in the table; the window is always 26 rows.
    print!("{}", render_weekly_text(&report));
}
