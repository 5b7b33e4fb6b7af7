//! Flat `key = value` run configuration. Every key is optional and falls
//! back to the defaults below.
//!
//! ```toml
//! dataset = "PF"
//! num_filters = 10
//! dropout = 0.2
//! seed = 0
//! ```

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::corpus::{PreprocessOptions, SplitPart, SplitRatios, Vocabulary};
use crate::echograph::{EceOptions, EXTERNAL_THRESHOLD, MAX_DISTANCE, MIN_PAIRS, PAIR_CAP};
use crate::error::{Error, Result};
use crate::harness::TrainConfig;
use crate::model::{ModelConfig, Setup};
use crate::nn::{AdamConfig, EMBEDDING_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub dataset: String,
    pub setup: Option<Setup>,
    pub seed: u64,

    pub min_count: usize,
    pub max_users: usize,
    pub train_ratio: f64,
    pub val_ratio: f64,
    pub test_ratio: f64,

    pub num_filters: usize,
    pub dropout: f64,
    pub embedding_dim: usize,

    pub batch_size: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub patience: usize,
    pub max_epochs: usize,

    pub seeds: usize,
    pub baseline_trials: usize,

    pub analysis_split: String,
    pub compare_floor: f64,

    pub external_threshold: u64,
    pub min_pairs: usize,
    pub max_distance: usize,
    pub pair_cap: usize,
}

impl Default for Config {
    fn default() -> Self {
        let adam = AdamConfig::default();
        let train = TrainConfig::default();
        let ratios = SplitRatios::default();
        let pre = PreprocessOptions::default();
        Self {
            dataset: "dataset".into(),
            setup: None,
            seed: 0,
            min_count: pre.min_count,
            max_users: pre.max_users,
            train_ratio: ratios.train,
            val_ratio: ratios.val,
            test_ratio: ratios.test,
            num_filters: 10,
            dropout: 0.0,
            embedding_dim: EMBEDDING_DIM,
            batch_size: train.batch_size,
            learning_rate: adam.lr,
            beta1: adam.beta1,
            beta2: adam.beta2,
            epsilon: adam.eps,
            patience: train.patience,
            max_epochs: train.max_epochs,
            seeds: 5,
            baseline_trials: 10_000,
            analysis_split: "test".into(),
            compare_floor: 0.0,
            external_threshold: EXTERNAL_THRESHOLD,
            min_pairs: MIN_PAIRS,
            max_distance: MAX_DISTANCE,
            pair_cap: PAIR_CAP,
        }
    }
}

impl Config {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Config(m.to_string()));
        if self.batch_size == 0 {
            return bad("batch_size must be at least 1");
        }
        if self.patience == 0 {
            return bad("patience must be at least 1");
        }
        if self.num_filters == 0 || self.embedding_dim == 0 {
            return bad("num_filters and embedding_dim must be positive");
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return bad("dropout must be in [0, 1)");
        }
        if self.seeds == 0 || self.baseline_trials == 0 {
            return bad("seeds and baseline_trials must be at least 1");
        }
        self.split_part()?;
        Ok(())
    }

    pub fn split_part(&self) -> Result<SplitPart> {
        match self.analysis_split.as_str() {
            "train" => Ok(SplitPart::Train),
            "val" => Ok(SplitPart::Val),
            "test" => Ok(SplitPart::Test),
            other => Err(Error::Config(format!(
                "analysis_split must be train, val or test, not {other:?}"
            ))),
        }
    }

    pub fn preprocess_options(&self) -> PreprocessOptions {
        PreprocessOptions {
            dataset: self.dataset.clone(),
            min_count: self.min_count,
            max_users: self.max_users,
            ratios: SplitRatios {
                train: self.train_ratio,
                val: self.val_ratio,
                test: self.test_ratio,
            },
            seed: self.seed,
        }
    }

    pub fn model_config(&self, setup: Setup, vocab: &Vocabulary) -> ModelConfig {
        ModelConfig {
            setup,
            num_filters: self.num_filters,
            embedding_dim: self.embedding_dim,
            dropout: self.dropout,
            seed: self.seed,
            vocab_size: vocab.len(),
        }
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            batch_size: self.batch_size,
            adam: AdamConfig {
                lr: self.learning_rate,
                beta1: self.beta1,
                beta2: self.beta2,
                eps: self.epsilon,
            },
            patience: self.patience,
            max_epochs: self.max_epochs,
            seed: self.seed,
        }
    }

    pub fn ece_options(&self) -> EceOptions {
        EceOptions {
            min_pairs: self.min_pairs,
            max_distance: self.max_distance,
            pair_cap: self.pair_cap,
            seed: self.seed,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_round_trip() {
        let c = Config::default();
        assert_eq!(Config::from_toml(&c.to_toml()).unwrap(), c);
        assert_eq!(Config::from_toml("").unwrap(), c);
    }

    #[test]
    fn partial_file() {
        let c = Config::from_toml("setup = \"N+TL\"\ndropout = 0.4\n").unwrap();
        assert_eq!(c.setup, Some(Setup::NewsTl));
        assert_eq!(c.dropout, 0.4);
        assert_eq!(c.batch_size, 8);
    }

    #[test]
    fn rejects_bad_values() {
        assert!(Config::from_toml("batch_size = 0").is_err());
        assert!(Config::from_toml("unknown_key = 1").is_err());
        assert!(Config::from_toml("setup = \"NEWS+TL\"").is_err());
        assert!(Config::from_toml("analysis_split = \"dev\"").is_err());
    }
}
