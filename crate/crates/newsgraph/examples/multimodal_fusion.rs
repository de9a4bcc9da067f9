//! Late fusion over modality embeddings. The toy data is built so that no
//! single modality separates the classes but their concatenation does,
//! which is the situation fusion exists for.
//!
//!     cargo run --example multimodal_fusion

use std::collections::HashMap;

use newsgraph::corpus::{SplitMode, Splits};
use newsgraph::embedding::{EmbeddingRecord, Modality};
use newsgraph::fusion::{
    assemble_items, predict, train_fusion, FusionConfig, ModalityMask,
};

fn main() {
    // Label = K-sign XOR T-sign. Either channel alone is a coin flip.
    let mut records = Vec::new();
    let mut labels = HashMap::new();
    let mut ids = Vec::new();
    for i in 0..160 {
        let k_sign = if (i / 2) % 2 == 0 { 1.0 } else { -1.0 };
        let t_sign = if i % 2 == 0 { 1.0 } else { -1.0 };
        let label = u8::from((k_sign > 0.0) != (t_sign > 0.0));
        let jitter = (i as f64 * 0.37).sin() * 0.2;
        let id = format!("item-{i:03}");
        records.push(EmbeddingRecord {
            item_id: id.clone(),
            modality: Modality::K,
            vector: vec![k_sign + jitter, k_sign * 0.5],
            empty: false,
        });
        records.push(EmbeddingRecord {
            item_id: id.clone(),
            modality: Modality::T,
            vector: vec![t_sign - jitter],
            empty: false,
        });
        labels.insert(id.clone(), label);
        ids.push(id);
    }

    let splits = Splits {
        train: ids[..120].to_vec(),
        validation: ids[120..140].to_vec(),
        test: ids[140..].to_vec(),
        mode: SplitMode::Random,
        seed: 0,
    };

    let config = FusionConfig { epochs: 80, dropout: 0.0, ..FusionConfig::default() };
    for mask in [ModalityMask::parse("K").unwrap(), ModalityMask::parse("T").unwrap(), ModalityMask::parse("K+T").unwrap()] {
        let (model, history) =
            train_fusion(&records, &labels, &splits, mask, &config, 7).unwrap();
        let test_items = assemble_items(&records, &splits.test, &labels, mask).unwrap();
        let mut correct = 0;
        for item in &test_items {
            let (label, _) = predict(&model, &item.vector).unwrap();
            if Some(label) == item.label {
                correct += 1;
            }
        }
        println!(
            "{:4}  input dim {}  final train acc {:.3}  test {:2}/{}",
            mask.label(),
            model.input_dim,
            history.last().unwrap().train_accuracy,
            correct,
            test_items.len()
        );
    }
    // Expected shape of the output: K and T hover near 0.5, K+T goes to 1.
}
