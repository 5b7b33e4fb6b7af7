use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{evaluate, Metrics};
use crate::error::{Error, Result};
use crate::model::{EncodedInstance, FakeNewsModel};
use crate::nn::{adam_step, AdamConfig, ParamStore};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub batch_size: usize,
    pub adam: AdamConfig,
    pub patience: usize,
    pub max_epochs: usize,
    /// Seeds shuffling and dropout.
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            batch_size: 8,
            adam: AdamConfig::default(),
            patience: 10,
            max_epochs: 200,
            seed: 0,
        }
    }
}

/// Patience counter over a score where larger is better. Only a strictly
/// greater score counts as an improvement.
#[derive(Debug, Clone, PartialEq)]
pub struct EarlyStopping {
    pub patience: usize,
    best: Option<f64>,
    best_epoch: usize,
    since_best: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StopDecision {
    pub improved: bool,
    pub stop: bool,
}

impl EarlyStopping {
    pub fn new(patience: usize) -> Self {
        Self {
            patience,
            best: None,
            best_epoch: 0,
            since_best: 0,
        }
    }

    pub fn observe(&mut self, epoch: usize, score: f64) -> StopDecision {
        let improved = self.best.is_none_or(|b| score > b);
        if improved {
            self.best = Some(score);
            self.best_epoch = epoch;
            self.since_best = 0;
        } else {
            self.since_best += 1;
        }
        StopDecision {
            improved,
            stop: self.since_best >= self.patience,
        }
    }

    pub fn best(&self) -> Option<f64> {
        self.best
    }

    pub fn best_epoch(&self) -> usize {
        self.best_epoch
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub train_loss: f64,
    pub val: Metrics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub epochs: Vec<EpochRecord>,
    /// 1-based epoch whose parameters were kept.
    pub best_epoch: usize,
    pub best_val: Metrics,
    pub test: Option<Metrics>,
}

impl RunResult {
    pub fn best_val_f(&self) -> f64 {
        self.best_val.f1
    }
}

/// One pass over `train` in a shuffled order. `before_step` sees the store
/// after each batch's gradients are accumulated and before Adam applies them.
pub fn run_epoch<F>(
    model: &mut FakeNewsModel,
    train: &[EncodedInstance],
    cfg: &TrainConfig,
    rng: &mut ChaCha8Rng,
    mut before_step: F,
) -> Result<f64>
where
    F: FnMut(&ParamStore),
{
    if train.is_empty() {
        return Err(Error::EmptySplit);
    }
    if cfg.batch_size == 0 {
        return Err(Error::InvalidArgument("batch size must be at least 1".into()));
    }
    let mut order: Vec<usize> = (0..train.len()).collect();
    order.shuffle(rng);
    let mut total = 0.0;
    for batch in order.chunks(cfg.batch_size) {
        let weight = 1.0 / batch.len() as f64;
        for &i in batch {
            total += model.accumulate_gradients(&train[i], weight, rng)?;
        }
        before_step(&model.store);
        adam_step(&mut model.store, &cfg.adam);
    }
    Ok(total / train.len() as f64)
}

/// Mini-batch Adam with early stopping on validation F. The parameters of
/// the best epoch are restored before returning.
pub fn train(
    model: &mut FakeNewsModel,
    train_set: &[EncodedInstance],
    val: &[EncodedInstance],
    cfg: &TrainConfig,
) -> Result<RunResult> {
    if val.is_empty() {
        return Err(Error::EmptySplit);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(5);
    let mut stopper = EarlyStopping::new(cfg.patience);
    let mut best_params = model.store.snapshot();
    let mut best_val = evaluate(model, val)?;
    let mut epochs = Vec::new();
    for epoch in 1..=cfg.max_epochs {
        let train_loss = run_epoch(model, train_set, cfg, &mut rng, |_| {})?;
        if !train_loss.is_finite() || !model.store.all_finite() {
            return Err(Error::Diverged { epoch });
        }
        let metrics = evaluate(model, val)?;
        epochs.push(EpochRecord {
            epoch,
            train_loss,
            val: metrics,
        });
        let decision = stopper.observe(epoch, metrics.f1);
        if decision.improved {
            best_params = model.store.snapshot();
            best_val = metrics;
        }
        if decision.stop {
            break;
        }
    }
    model.store.restore(&best_params);
    Ok(RunResult {
        epochs,
        best_epoch: stopper.best_epoch(),
        best_val,
        test: None,
    })
}

/// [`train`] followed by one evaluation of the restored model on `test`.
pub fn train_and_test(
    model: &mut FakeNewsModel,
    train_set: &[EncodedInstance],
    val: &[EncodedInstance],
    test: &[EncodedInstance],
    cfg: &TrainConfig,
) -> Result<RunResult> {
    let mut run = train(model, train_set, val, cfg)?;
    run.test = Some(evaluate(model, test)?);
    Ok(run)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stops_after_patience_without_strict_gain() {
        let mut es = EarlyStopping::new(3);
        assert!(es.observe(1, 0.5).improved);
        assert!(!es.observe(2, 0.5).improved);
        assert!(!es.observe(3, 0.4).stop);
        let d = es.observe(4, 0.5);
        assert!(d.stop && !d.improved);
        assert_eq!(es.best_epoch(), 1);
    }

    #[test]
    fn improvement_resets_counter() {
        let mut es = EarlyStopping::new(2);
        es.observe(1, 0.1);
        es.observe(2, 0.1);
        assert!(es.observe(3, 0.2).improved);
        assert!(!es.observe(4, 0.2).stop);
        assert!(es.observe(5, 0.0).stop);
        assert_eq!(es.best(), Some(0.2));
    }
}
