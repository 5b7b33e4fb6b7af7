//! Filter attribution and linguistic-category analysis.
//!
//! Every filter contributes its pooled activation `v` to the classifier.
//! With `W_f0` and `W_f1` the two classifier weights on that coordinate,
//! the n-gram that won the max-pool gets `R = v·W_f0` toward the real class
//! and `F = v·W_f1` toward the fake class. Summed per n-gram and filtered
//! by the mean-plus-one-deviation rule on `|R − F|`, the surviving n-grams
//! are grouped into lexicon categories.

mod extract;
mod lexicon;
mod report;

pub use extract::{
    attribute, extract_relevant_ngrams, filter_polarity, filter_role, score_ngrams, select_salient, Attribution,
    FilterRole, Modality, NgramAttribution, RelevantNgram,
};
pub use lexicon::{categorize, Category, CategoryLexicon};
pub use report::{
    category_importance, compare_reports, surface, CategoryScore, InterpretReport, NgramDetail, ReportComparison,
};
