//! Raw record ingestion, the unique-spreader and sampling rules, splits,
//! and the on-disk processed dataset layout.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufRead, BufReader};
use std::path::{Path, PathBuf};

use rand::seq::index;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::text::{self, TextKind};
use super::vocab::Vocabulary;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Label {
    Real,
    Fake,
}

impl Label {
    /// Class index used by the classifier: real = 0, fake = 1.
    pub fn index(self) -> usize {
        match self {
            Label::Real => 0,
            Label::Fake => 1,
        }
    }

    pub fn from_index(i: usize) -> Self {
        if i == 1 {
            Label::Fake
        } else {
            Label::Real
        }
    }

    pub fn is_fake(self) -> bool {
        self == Label::Fake
    }
}

/// Ids show up as JSON strings or numbers depending on the exporter.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RawId {
    Str(String),
    Num(u64),
}

impl From<RawId> for String {
    fn from(id: RawId) -> String {
        match id {
            RawId::Str(s) => s,
            RawId::Num(n) => n.to_string(),
        }
    }
}

#[derive(Debug, Deserialize)]
struct RawNews {
    id: RawId,
    #[serde(default)]
    title: String,
    #[serde(default)]
    body: String,
    label: Label,
    #[serde(default)]
    tweet_user_ids: Vec<RawId>,
}

#[derive(Debug, Deserialize)]
struct RawRetweet {
    user_id: RawId,
    count: u32,
}

#[derive(Debug, Deserialize)]
struct RawUser {
    id: RawId,
    #[serde(default)]
    tweets: Vec<String>,
    #[serde(default)]
    description: Option<String>,
    #[serde(default)]
    retweets: Option<Vec<RawRetweet>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewsRecord {
    pub id: String,
    pub title: Vec<String>,
    pub body: Vec<String>,
    pub label: Label,
    pub spreader_ids: Vec<String>,
}

impl NewsRecord {
    /// News text = title followed by body.
    pub fn text(&self) -> Vec<String> {
        self.title.iter().chain(&self.body).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct UserRecord {
    pub id: String,
    pub timeline: Vec<String>,
    pub description: Option<Vec<String>>,
    pub retweets: Vec<(String, u32)>,
}

fn parse_jsonl<T, R>(content: impl BufRead, path: &Path, mut each: impl FnMut(T) -> R) -> Result<Vec<R>>
where
    T: for<'de> Deserialize<'de>,
{
    let mut out = Vec::new();
    for (i, line) in content.lines().enumerate() {
        let line = line.map_err(|e| Error::io(path, e))?;
        if line.trim().is_empty() {
            continue;
        }
        let rec: T = serde_json::from_str(&line).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: i + 1,
            message: e.to_string(),
        })?;
        out.push(each(rec));
    }
    Ok(out)
}

fn read_jsonl<T, R>(path: &Path, each: impl FnMut(T) -> R) -> Result<Vec<R>>
where
    T: for<'de> Deserialize<'de>,
{
    let file = fs::File::open(path).map_err(|e| Error::io(path, e))?;
    parse_jsonl(BufReader::new(file), path, each)
}

fn news_from_raw(r: RawNews) -> NewsRecord {
    NewsRecord {
        id: r.id.into(),
        title: text::prepare(&r.title, TextKind::Title),
        body: text::prepare(&r.body, TextKind::Body),
        label: r.label,
        spreader_ids: r.tweet_user_ids.into_iter().map(String::from).collect(),
    }
}

fn user_from_raw(r: RawUser) -> UserRecord {
    let description = r
        .description
        .filter(|d| !d.trim().is_empty())
        .map(|d| text::prepare(&d, TextKind::Description));
    let retweets = match r.retweets {
        Some(list) => list
            .into_iter()
            .filter(|rt| rt.count >= 1)
            .map(|rt| (String::from(rt.user_id), rt.count))
            .collect(),
        None => text::retweets_from_timeline(&r.tweets),
    };
    UserRecord {
        id: r.id.into(),
        timeline: text::prepare_timeline(&r.tweets),
        description,
        retweets,
    }
}

fn users_by_id(users: Vec<UserRecord>) -> BTreeMap<String, UserRecord> {
    users.into_iter().map(|u| (u.id.clone(), u)).collect()
}

pub fn load_raw_news(path: &Path) -> Result<Vec<NewsRecord>> {
    read_jsonl(path, news_from_raw)
}

pub fn load_raw_users(path: &Path) -> Result<BTreeMap<String, UserRecord>> {
    read_jsonl(path, user_from_raw).map(users_by_id)
}

/// [`load_raw_news`] over in-memory JSON lines.
pub fn parse_raw_news(jsonl: &str) -> Result<Vec<NewsRecord>> {
    parse_jsonl(jsonl.as_bytes(), Path::new(NEWS_FILE), news_from_raw)
}

/// [`load_raw_users`] over in-memory JSON lines.
pub fn parse_raw_users(jsonl: &str) -> Result<BTreeMap<String, UserRecord>> {
    parse_jsonl(jsonl.as_bytes(), Path::new(USERS_FILE), user_from_raw).map(users_by_id)
}

#[derive(Debug, Clone, PartialEq)]
pub struct FilteredCorpus {
    pub news: Vec<NewsRecord>,
    pub users: BTreeMap<String, UserRecord>,
}

/// Keeps only users who spread exactly one news, drops news left without
/// spreaders, then samples at most `max_users` spreaders per news without
/// replacement. Spreaders with no user record are treated as unretrievable.
pub fn filter_and_sample(
    news: Vec<NewsRecord>,
    users: &BTreeMap<String, UserRecord>,
    max_users: usize,
    seed: u64,
) -> FilteredCorpus {
    let mut spread_count: BTreeMap<&str, usize> = BTreeMap::new();
    for n in &news {
        let unique: BTreeSet<&str> = n.spreader_ids.iter().map(String::as_str).collect();
        for id in unique {
            *spread_count.entry(id).or_insert(0) += 1;
        }
    }
    let keep: BTreeSet<String> = spread_count
        .into_iter()
        .filter(|&(id, c)| c == 1 && users.contains_key(id))
        .map(|(id, _)| id.to_string())
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(1);
    let mut out_news = Vec::new();
    let mut out_users = BTreeMap::new();
    for mut n in news {
        let mut seen = BTreeSet::new();
        let spreaders: Vec<String> = n
            .spreader_ids
            .iter()
            .filter(|id| keep.contains(*id) && seen.insert(id.as_str()))
            .cloned()
            .collect();
        if spreaders.is_empty() {
            continue;
        }
        n.spreader_ids = if spreaders.len() > max_users {
            let mut picked = index::sample(&mut rng, spreaders.len(), max_users).into_vec();
            picked.sort_unstable();
            picked.into_iter().map(|i| spreaders[i].clone()).collect()
        } else {
            spreaders
        };
        for id in &n.spreader_ids {
            out_users.insert(id.clone(), users[id].clone());
        }
        out_news.push(n);
    }
    FilteredCorpus {
        news: out_news,
        users: out_users,
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitRatios {
    pub train: f64,
    pub val: f64,
    pub test: f64,
}

impl Default for SplitRatios {
    fn default() -> Self {
        Self {
            train: 0.8,
            val: 0.1,
            test: 0.1,
        }
    }
}

/// Record ids per split, each list in shuffled order.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Splits {
    pub train: Vec<String>,
    pub val: Vec<String>,
    pub test: Vec<String>,
}

impl Splits {
    pub fn get(&self, part: SplitPart) -> &[String] {
        match part {
            SplitPart::Train => &self.train,
            SplitPart::Val => &self.val,
            SplitPart::Test => &self.test,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SplitPart {
    Train,
    Val,
    Test,
}

/// Validation and test sizes are `round(ratio · n)` (at least one each);
/// whatever remains goes to train.
pub fn split_sizes(n: usize, ratios: SplitRatios) -> Result<(usize, usize, usize)> {
    if n < 3 {
        return Err(Error::TooFewRecords(n));
    }
    let part = |r: f64| ((r * n as f64).round() as usize).max(1);
    let val = part(ratios.val);
    let test = part(ratios.test);
    if val + test >= n {
        return Err(Error::InvalidArgument(format!(
            "split ratios leave no training data for n = {n}"
        )));
    }
    Ok((n - val - test, val, test))
}

pub fn split(ids: &[String], ratios: SplitRatios, seed: u64) -> Result<Splits> {
    let (n_train, n_val, _) = split_sizes(ids.len(), ratios)?;
    let mut order: Vec<String> = ids.to_vec();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    order.shuffle(&mut rng);
    let test = order.split_off(n_train + n_val);
    let val = order.split_off(n_train);
    Ok(Splits {
        train: order,
        val,
        test,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedNews {
    pub id: String,
    pub label: Label,
    pub text: Vec<usize>,
    pub spreaders: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedRetweet {
    pub user_id: String,
    pub count: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EncodedUser {
    pub id: String,
    pub timeline: Vec<usize>,
    pub description: Option<Vec<usize>>,
    pub retweets: Vec<EncodedRetweet>,
}

/// The Table 1 style summary written next to a processed dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DatasetStats {
    pub dataset: String,
    pub news: usize,
    pub fake: usize,
    pub real: usize,
    pub users: usize,
    pub description_fraction: f64,
    pub avg_users_per_news: f64,
    pub vocab_size: usize,
    pub train: usize,
    pub val: usize,
    pub test: usize,
}

#[derive(Debug, Clone)]
pub struct PreprocessOptions {
    pub dataset: String,
    pub min_count: usize,
    pub max_users: usize,
    pub ratios: SplitRatios,
    pub seed: u64,
}

impl Default for PreprocessOptions {
    fn default() -> Self {
        Self {
            dataset: "dataset".into(),
            min_count: 10,
            max_users: 50,
            ratios: SplitRatios::default(),
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProcessedDataset {
    pub vocab: Vocabulary,
    pub news: Vec<EncodedNews>,
    pub users: BTreeMap<String, EncodedUser>,
    pub splits: Splits,
    pub stats: DatasetStats,
}

pub const VOCAB_FILE: &str = "vocab.tsv";
pub const NEWS_FILE: &str = "news.jsonl";
pub const USERS_FILE: &str = "users.jsonl";
pub const SPLITS_FILE: &str = "splits.json";
pub const STATS_FILE: &str = "stats.json";

/// Files of a processed dataset directory, in write order.
pub fn dataset_files() -> [&'static str; 5] {
    [VOCAB_FILE, NEWS_FILE, USERS_FILE, SPLITS_FILE, STATS_FILE]
}

impl ProcessedDataset {
    /// Full preprocessing from normalized raw records. The vocabulary is
    /// built from training-split texts only.
    pub fn build(
        news: Vec<NewsRecord>,
        users: &BTreeMap<String, UserRecord>,
        opts: &PreprocessOptions,
    ) -> Result<Self> {
        let filtered = filter_and_sample(news, users, opts.max_users, opts.seed);
        let ids: Vec<String> = filtered.news.iter().map(|n| n.id.clone()).collect();
        let splits = split(&ids, opts.ratios, opts.seed)?;

        let train_ids: BTreeSet<&str> = splits.train.iter().map(String::as_str).collect();
        let mut train_docs: Vec<Vec<String>> = Vec::new();
        for n in filtered.news.iter().filter(|n| train_ids.contains(n.id.as_str())) {
            train_docs.push(n.text());
            for uid in &n.spreader_ids {
                let u = &filtered.users[uid];
                train_docs.push(u.timeline.clone());
                if let Some(d) = &u.description {
                    train_docs.push(d.clone());
                }
            }
        }
        let vocab = Vocabulary::build(train_docs, opts.min_count)?;

        let news: Vec<EncodedNews> = filtered
            .news
            .iter()
            .map(|n| EncodedNews {
                id: n.id.clone(),
                label: n.label,
                text: vocab.encode(&n.text()),
                spreaders: n.spreader_ids.clone(),
            })
            .collect();
        let users: BTreeMap<String, EncodedUser> = filtered
            .users
            .values()
            .map(|u| {
                let e = EncodedUser {
                    id: u.id.clone(),
                    timeline: vocab.encode(&u.timeline),
                    description: u.description.as_ref().map(|d| vocab.encode(d)),
                    retweets: u
                        .retweets
                        .iter()
                        .map(|(id, c)| EncodedRetweet {
                            user_id: id.clone(),
                            count: *c,
                        })
                        .collect(),
                };
                (u.id.clone(), e)
            })
            .collect();

        let fake = news.iter().filter(|n| n.label.is_fake()).count();
        let with_desc = users.values().filter(|u| u.description.is_some()).count();
        let spreader_total: usize = news.iter().map(|n| n.spreaders.len()).sum();
        let stats = DatasetStats {
            dataset: opts.dataset.clone(),
            news: news.len(),
            fake,
            real: news.len() - fake,
            users: users.len(),
            description_fraction: ratio(with_desc, users.len()),
            avg_users_per_news: ratio(spreader_total, news.len()),
            vocab_size: vocab.len(),
            train: splits.train.len(),
            val: splits.val.len(),
            test: splits.test.len(),
        };
        Ok(Self {
            vocab,
            news,
            users,
            splits,
            stats,
        })
    }

    /// Reads `news.jsonl` and `users.jsonl` from a raw directory and runs
    /// [`ProcessedDataset::build`].
    pub fn from_raw_dir(dir: &Path, opts: &PreprocessOptions) -> Result<Self> {
        let news = load_raw_news(&dir.join(NEWS_FILE))?;
        let users = load_raw_users(&dir.join(USERS_FILE))?;
        Self::build(news, &users, opts)
    }

    pub fn news_by_id(&self) -> BTreeMap<&str, &EncodedNews> {
        self.news.iter().map(|n| (n.id.as_str(), n)).collect()
    }

    /// News records in a split, in split order.
    pub fn split_news(&self, part: SplitPart) -> Vec<&EncodedNews> {
        let by_id = self.news_by_id();
        self.splits
            .get(part)
            .iter()
            .filter_map(|id| by_id.get(id.as_str()).copied())
            .collect()
    }

    /// Renders every output file; returned in a fixed order for writing and
    /// hashing.
    pub fn render(&self) -> Result<Vec<(&'static str, String)>> {
        let mut news = String::new();
        for n in &self.news {
            news.push_str(&serde_json::to_string(n)?);
            news.push('\n');
        }
        let mut users = String::new();
        for u in self.users.values() {
            users.push_str(&serde_json::to_string(u)?);
            users.push('\n');
        }
        Ok(vec![
            (VOCAB_FILE, self.vocab.to_tsv()),
            (NEWS_FILE, news),
            (USERS_FILE, users),
            (SPLITS_FILE, serde_json::to_string_pretty(&self.splits)? + "\n"),
            (STATS_FILE, serde_json::to_string_pretty(&self.stats)? + "\n"),
        ])
    }

    pub fn write(&self, dir: &Path) -> Result<Vec<PathBuf>> {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        let mut written = Vec::new();
        for (name, body) in self.render()? {
            let path = dir.join(name);
            fs::write(&path, body).map_err(|e| Error::io(&path, e))?;
            written.push(path);
        }
        Ok(written)
    }

    pub fn load(dir: &Path) -> Result<Self> {
        let need = |name: &str| -> Result<PathBuf> {
            let p = dir.join(name);
            if p.is_file() {
                Ok(p)
            } else {
                Err(Error::MissingArtifact(p))
            }
        };
        let read = |p: &Path| fs::read_to_string(p).map_err(|e| Error::io(p, e));
        let stats: DatasetStats = serde_json::from_str(&read(&need(STATS_FILE)?)?)?;
        let vocab = Vocabulary::from_tsv(&read(&need(VOCAB_FILE)?)?, 0)?;
        let splits: Splits = serde_json::from_str(&read(&need(SPLITS_FILE)?)?)?;
        let news = read_jsonl(&need(NEWS_FILE)?, |n: EncodedNews| n)?;
        let users = read_jsonl(&need(USERS_FILE)?, |u: EncodedUser| u)?
            .into_iter()
            .map(|u| (u.id.clone(), u))
            .collect();
        Ok(Self {
            vocab,
            news,
            users,
            splits,
            stats,
        })
    }
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}
