//! Train/validation/test partitioning.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Corpus, CorpusError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SplitMode {
    /// Seeded shuffle, then partition by ratio.
    Random,
    /// Sort by timestamp ascending; the earliest fraction trains.
    Temporal,
}

impl std::fmt::Display for SplitMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SplitMode::Random => write!(f, "random"),
            SplitMode::Temporal => write!(f, "temporal"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ratios {
    pub train: f64,
    pub validation: f64,
    pub test: f64,
}

impl Ratios {
    pub fn new(train: f64, validation: f64, test: f64) -> Self {
        Ratios { train, validation, test }
    }

    pub fn validate(&self, mode: SplitMode) -> Result<(), CorpusError> {
        let sum = self.train + self.validation + self.test;
        if (sum - 1.0).abs() > 1e-9 {
            return Err(CorpusError::InvalidRatios(format!("ratios sum to {sum}, expected 1")));
        }
        if self.train <= 0.0 || self.test <= 0.0 {
            return Err(CorpusError::InvalidRatios("train and test ratios must be positive".into()));
        }
        let val_ok = match mode {
            SplitMode::Random => self.validation > 0.0,
            SplitMode::Temporal => self.validation >= 0.0,
        };
        if !val_ok {
            return Err(CorpusError::InvalidRatios(
                "validation ratio must be positive in random mode".into(),
            ));
        }
        Ok(())
    }
}

impl Default for Ratios {
    fn default() -> Self {
        Ratios { train: 0.7, validation: 0.15, test: 0.15 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<String>,
    pub validation: Vec<String>,
    pub test: Vec<String>,
    pub mode: SplitMode,
    pub seed: u64,
}

impl Splits {
    pub fn len(&self) -> usize {
        self.train.len() + self.validation.len() + self.test.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

/// Partitions document ids. Validation and test sizes are the floored
/// fractions; the remainder goes to train.
pub fn make_splits(
    corpus: &Corpus,
    ratios: Ratios,
    mode: SplitMode,
    seed: u64,
) -> Result<Splits, CorpusError> {
    if corpus.is_empty() {
        return Err(CorpusError::EmptyCorpus);
    }
    ratios.validate(mode)?;

    let mut ids: Vec<(String, Option<i64>)> =
        corpus.documents.iter().map(|d| (d.id.clone(), d.timestamp)).collect();

    match mode {
        SplitMode::Random => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            ids.shuffle(&mut rng);
        }
        SplitMode::Temporal => {
            for (id, ts) in &ids {
                if ts.is_none() {
                    return Err(CorpusError::MissingTimestamps(id.clone()));
                }
            }
            ids.sort_by(|a, b| a.1.cmp(&b.1).then_with(|| a.0.cmp(&b.0)));
        }
    }

    let n = ids.len();
    let n_val = (n as f64 * ratios.validation).floor() as usize;
    let n_test = (n as f64 * ratios.test).floor() as usize;
    let n_train = n - n_val - n_test;

    let names: Vec<String> = ids.into_iter().map(|(id, _)| id).collect();
    Ok(Splits {
        train: names[..n_train].to_vec(),
        validation: names[n_train..n_train + n_val].to_vec(),
        test: names[n_train + n_val..].to_vec(),
        mode,
        seed,
    })
}
