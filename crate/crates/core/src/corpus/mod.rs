//! Ingestion and preprocessing of news and user records.

mod dataset;
pub mod text;
mod vocab;

pub use dataset::{
    dataset_files, filter_and_sample, load_raw_news, load_raw_users, parse_raw_news, parse_raw_users, split,
    split_sizes, DatasetStats, EncodedNews, EncodedRetweet, EncodedUser, FilteredCorpus, Label, NewsRecord,
    PreprocessOptions, ProcessedDataset, SplitPart, SplitRatios, Splits, UserRecord, NEWS_FILE, SPLITS_FILE,
    STATS_FILE, USERS_FILE, VOCAB_FILE,
};
pub use text::{normalize, tokenize, TextKind};
pub use vocab::{Vocabulary, PAD_ID, UNK_ID};
