//! Seeded synthetic corpora and graph fixtures for tests, demos and the
//! acceptance suite.

use std::collections::BTreeMap;
use std::f64::consts::FRAC_PI_2;
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use crate::corpus::{
    parse_raw_news, parse_raw_users, EncodedRetweet, EncodedUser, Label, PreprocessOptions, ProcessedDataset,
    SplitPart, NEWS_FILE, USERS_FILE,
};
use crate::error::{Error, Result};
use crate::model::{build_instances, EncodedInstance, Setup};

const FAKE_WORDS: [&str; 12] = [
    "shocking",
    "hoax",
    "secret",
    "exposed",
    "miracle",
    "conspiracy",
    "banned",
    "truth",
    "wake",
    "agenda",
    "rigged",
    "coverup",
];
const REAL_WORDS: [&str; 12] = [
    "report",
    "official",
    "according",
    "study",
    "announced",
    "minister",
    "percent",
    "data",
    "court",
    "agency",
    "statement",
    "budget",
];
const NEUTRAL_WORDS: [&str; 16] = [
    "the", "a", "of", "to", "in", "and", "today", "people", "new", "said", "city", "year", "time", "more", "about",
    "after",
];
const FAKE_STYLE: [&str; 4] = ["#wakeup", "😱", "WAKE", "!!!"];
const REAL_STYLE: [&str; 4] = ["#news", "via", "https://example.org/a", ":"];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthOptions {
    pub news: usize,
    pub users_per_news: usize,
    /// Share of users with a profile description.
    pub description_fraction: f64,
    /// Probability that a sampled word carries the class signal.
    pub signal: f64,
    pub seed: u64,
}

impl Default for SynthOptions {
    fn default() -> Self {
        Self {
            news: 40,
            users_per_news: 3,
            description_fraction: 1.0,
            signal: 0.3,
            seed: 0,
        }
    }
}

/// Raw `news.jsonl` and `users.jsonl` contents.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RawCorpus {
    pub news_jsonl: String,
    pub users_jsonl: String,
}

impl RawCorpus {
    pub fn write(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        for (name, body) in [(NEWS_FILE, &self.news_jsonl), (USERS_FILE, &self.users_jsonl)] {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
        }
        Ok(())
    }

    pub fn build(&self, opts: &PreprocessOptions) -> Result<ProcessedDataset> {
        ProcessedDataset::build(
            parse_raw_news(&self.news_jsonl)?,
            &parse_raw_users(&self.users_jsonl)?,
            opts,
        )
    }
}

fn words<R: Rng>(rng: &mut R, n: usize, label: Label, signal: f64, style: bool) -> String {
    let (class, extra) = match label {
        Label::Fake => (&FAKE_WORDS, &FAKE_STYLE),
        Label::Real => (&REAL_WORDS, &REAL_STYLE),
    };
    (0..n)
        .map(|_| {
            let r = rng.gen::<f64>();
            if r < signal {
                if style && rng.gen::<f64>() < 0.25 {
                    *extra.choose(rng).expect("non-empty")
                } else {
                    *class.choose(rng).expect("non-empty")
                }
            } else {
                *NEUTRAL_WORDS.choose(rng).expect("non-empty")
            }
        })
        .collect::<Vec<_>>()
        .join(" ")
}

/// A balanced corpus whose classes use disjoint signal words in news titles,
/// bodies, user timelines and descriptions. Users retweet spreaders of the
/// same class.
pub fn synthetic_corpus(opts: &SynthOptions) -> RawCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut news = String::new();
    let mut users = String::new();
    let labels: Vec<Label> = (0..opts.news)
        .map(|i| if i % 2 == 0 { Label::Fake } else { Label::Real })
        .collect();
    let user_id = |i: usize, k: usize| format!("u{i:04}_{k}");
    for (i, &label) in labels.iter().enumerate() {
        let spreaders: Vec<String> = (0..opts.users_per_news).map(|k| user_id(i, k)).collect();
        let line = json!({
            "id": format!("n{i:04}"),
            "title": words(&mut rng, 6, label, opts.signal, false),
            "body": words(&mut rng, 40, label, opts.signal, false),
            "label": label,
            "tweet_user_ids": spreaders,
        });
        news.push_str(&line.to_string());
        news.push('\n');
    }
    for (i, &label) in labels.iter().enumerate() {
        for k in 0..opts.users_per_news {
            let tweets: Vec<String> = (0..4).map(|_| words(&mut rng, 10, label, opts.signal, true)).collect();
            let description = (rng.gen::<f64>() < opts.description_fraction)
                .then(|| words(&mut rng, 8, label, (opts.signal * 2.0).min(1.0), true));
            let mut retweets = Vec::new();
            for _ in 0..3 {
                let j = 2 * rng.gen_range(0..opts.news.div_ceil(2)) + usize::from(label == Label::Real);
                if j < opts.news && j != i {
                    retweets.push(json!({"user_id": user_id(j, rng.gen_range(0..opts.users_per_news)), "count": 1}));
                }
            }
            let popular = if label == Label::Fake { "ext_fake" } else { "ext_real" };
            retweets.push(json!({"user_id": popular, "count": 5}));
            let line = json!({
                "id": user_id(i, k),
                "tweets": tweets,
                "description": description,
                "retweets": retweets,
            });
            users.push_str(&line.to_string());
            users.push('\n');
        }
    }
    RawCorpus {
        news_jsonl: news,
        users_jsonl: users,
    }
}

/// The synthetic corpus preprocessed with a vocabulary cut-off of 1.
pub fn synthetic_dataset(opts: &SynthOptions) -> Result<ProcessedDataset> {
    synthetic_corpus(opts).build(&PreprocessOptions {
        dataset: "synthetic".into(),
        min_count: 1,
        seed: opts.seed,
        ..PreprocessOptions::default()
    })
}

/// Every instance of `ds` for `setup`, across all splits.
pub fn all_instances(ds: &ProcessedDataset, setup: Setup) -> Vec<EncodedInstance> {
    [SplitPart::Train, SplitPart::Val, SplitPart::Test]
        .into_iter()
        .flat_map(|part| build_instances(ds, setup, part))
        .collect()
}

/// Users and topic vectors with a planted echo chamber.
#[derive(Debug, Clone, PartialEq)]
pub struct EchoFixture {
    pub users: Vec<EncodedUser>,
    pub vectors: BTreeMap<String, Vec<f64>>,
}

impl EchoFixture {
    pub fn users_jsonl(&self) -> Result<String> {
        let mut out = String::new();
        for u in &self.users {
            out.push_str(&serde_json::to_string(u)?);
            out.push('\n');
        }
        Ok(out)
    }

    pub fn vectors_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&self.vectors)? + "\n")
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EchoFixtureOptions {
    pub blocks: usize,
    pub block_size: usize,
    /// Uniform angular jitter added to every vector, in radians.
    pub noise: f64,
    /// Permute vectors across users, destroying the planted structure.
    pub shuffled: bool,
    pub seed: u64,
}

impl Default for EchoFixtureOptions {
    fn default() -> Self {
        Self {
            blocks: 40,
            block_size: 50,
            noise: 0.02,
            shuffled: false,
            seed: 0,
        }
    }
}

/// A chain of cliques: every block is complete and adjacent blocks are
/// completely joined, so users in blocks `i ≠ j` sit `|i − j|` hops apart.
/// Block `i` holds topic vectors at angle `(π/2)·i/(blocks−1)`, so
/// similarity falls with distance.
pub fn planted_echo_fixture(opts: &EchoFixtureOptions) -> EchoFixture {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let id = |b: usize, k: usize| format!("b{b:03}_{k:03}");
    let steps = opts.blocks.saturating_sub(1).max(1) as f64;
    let mut users = Vec::with_capacity(opts.blocks * opts.block_size);
    let mut vectors = Vec::with_capacity(users.capacity());
    for b in 0..opts.blocks {
        for k in 0..opts.block_size {
            let mut retweets: Vec<EncodedRetweet> = (k + 1..opts.block_size)
                .map(|j| EncodedRetweet {
                    user_id: id(b, j),
                    count: 1,
                })
                .collect();
            if b + 1 < opts.blocks {
                retweets.extend((0..opts.block_size).map(|j| EncodedRetweet {
                    user_id: id(b + 1, j),
                    count: 1,
                }));
            }
            users.push(EncodedUser {
                id: id(b, k),
                timeline: Vec::new(),
                description: None,
                retweets,
            });
            let jitter = if opts.noise > 0.0 {
                rng.gen_range(-opts.noise..opts.noise)
            } else {
                0.0
            };
            let angle = (FRAC_PI_2 * b as f64 / steps + jitter).clamp(0.0, FRAC_PI_2);
            vectors.push(vec![angle.cos(), angle.sin()]);
        }
    }
    if opts.shuffled {
        vectors.shuffle(&mut rng);
    }
    let vectors = users.iter().map(|u| u.id.clone()).zip(vectors).collect();
    EchoFixture { users, vectors }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn corpus_is_deterministic_and_balanced() {
        let opts = SynthOptions::default();
        assert_eq!(synthetic_corpus(&opts), synthetic_corpus(&opts));
        let ds = synthetic_dataset(&opts).unwrap();
        assert_eq!(ds.stats.news, 40);
        assert_eq!(ds.stats.fake, 20);
        assert_eq!(ds.stats.users, 120);
        assert_eq!(all_instances(&ds, Setup::NewsTlDe).len(), 40);
    }

    #[test]
    fn fixture_shape() {
        let f = planted_echo_fixture(&EchoFixtureOptions {
            blocks: 3,
            block_size: 4,
            ..EchoFixtureOptions::default()
        });
        assert_eq!(f.users.len(), 12);
        assert_eq!(f.vectors.len(), 12);
        // 3 cliques of 6 edges plus 2 joins of 16
        let edges: usize = f.users.iter().map(|u| u.retweets.len()).sum();
        assert_eq!(edges, 3 * 6 + 2 * 16);
    }
}
