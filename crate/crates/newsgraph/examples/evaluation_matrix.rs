//! Score every modality combination plus the translation-bias baselines on
//! one shared split, and render the comparison table all three ways.
//!
//!     cargo run --example evaluation_matrix

use std::collections::HashMap;

use newsgraph::corpus::{SplitMode, Splits};
use newsgraph::embedding::{EmbeddingRecord, Modality};
use newsgraph::eval::{render_matrix_csv, render_matrix_text, run_matrix, MatrixConfig, MatrixInputs};
use newsgraph::fusion::FusionConfig;
use newsgraph::relex::Triple;
use newsgraph::transe::TranseConfig;

fn main() {
    // K separates cleanly, T is noisy, P is pure noise; the baselines see
    // label-correlated subjects. A small world, but every row differs.
    let mut records = Vec::new();
    let mut labels = HashMap::new();
    let mut ids = Vec::new();
    let mut item_triples = Vec::new();
    for i in 0..120 {
        let label = (i % 2) as u8;
        let sign = if label == 1 { 1.0 } else { -1.0 };
        let noise = (i as f64 * 0.73).sin();
        let id = format!("doc-{i:03}");
        records.push(EmbeddingRecord {
            item_id: id.clone(),
            modality: Modality::K,
            vector: vec![sign + 0.3 * noise, -sign * 0.8],
            empty: false,
        });
        records.push(EmbeddingRecord {
            item_id: id.clone(),
            modality: Modality::T,
            vector: vec![sign * 0.4 + 0.9 * noise],
            empty: false,
        });
        records.push(EmbeddingRecord {
            item_id: id.clone(),
            modality: Modality::P,
            vector: vec![noise, (i as f64 * 1.31).cos()],
            empty: false,
        });
        let subject = if label == 1 { "charlatan" } else { "laureate" };
        item_triples.push((
            id.clone(),
            vec![Triple {
                subject: subject.to_string(),
                predicate: "address".to_string(),
                object: format!("crowd-{}", i % 5),
                doc_id: id.clone(),
                sentence_id: 0,
            }],
        ));
        labels.insert(id.clone(), label);
        ids.push(id);
    }

    let splits = Splits {
        train: ids[..84].to_vec(),
        validation: ids[84..102].to_vec(),
        test: ids[102..].to_vec(),
        mode: SplitMode::Random,
        seed: 0,
    };

    let inputs = MatrixInputs {
        records: &records,
        labels: &labels,
        splits: &splits,
        item_triples: &item_triples,
    };
    let config = MatrixConfig {
        fusion: FusionConfig { epochs: 40, dropout: 0.0, ..FusionConfig::default() },
        transe: TranseConfig { dimension: 12, epochs: 80, ..TranseConfig::default() },
        seed: 21,
        ..MatrixConfig::default()
    };

    // Seven masks + two baselines = nine rows, all on the same test items.
    let report = run_matrix(&inputs, &config).unwrap();
    print!("{}", render_matrix_text(&report));

    println!("\nsame report as csv:");
    print!("{}", render_matrix_csv(&report));
}
