use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::metrics::Metrics;
use crate::corpus::Label;
use crate::error::{Error, Result};

/// Mean binary F over `trials` runs of a classifier that labels each test
/// item fake with probability equal to the fake share of `train`.
pub fn frequency_random_baseline(train: &[Label], test: &[Label], trials: usize, seed: u64) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if train.is_empty() || test.is_empty() {
        return Err(Error::EmptySplit);
    }
    let p = train.iter().filter(|l| l.is_fake()).count() as f64 / train.len() as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut total = 0.0;
    for _ in 0..trials {
        let (mut tp, mut fp, mut fn_, mut tn) = (0, 0, 0, 0);
        for gold in test {
            let fake = rng.gen::<f64>() < p;
            match (gold.is_fake(), fake) {
                (true, true) => tp += 1,
                (false, true) => fp += 1,
                (true, false) => fn_ += 1,
                (false, false) => tn += 1,
            }
        }
        total += Metrics::from_counts(tp, fp, fn_, tn).f1;
    }
    Ok(total / trials as f64)
}

/// `fake` fake labels followed by `real` real ones.
pub fn labels_with_counts(fake: usize, real: usize) -> Vec<Label> {
    let mut v = vec![Label::Fake; fake];
    v.extend(std::iter::repeat_n(Label::Real, real));
    v
}
