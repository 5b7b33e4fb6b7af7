use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::extract::{Modality, NgramAttribution};
use super::lexicon::{categorize, CategoryLexicon};
use crate::corpus::Vocabulary;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CategoryScore {
    pub category: String,
    pub real: f64,
    pub fake: f64,
}

impl CategoryScore {
    pub fn gap(&self) -> f64 {
        (self.fake - self.real).abs()
    }
}

pub fn surface(ngram: &[usize], vocab: &Vocabulary) -> Vec<String> {
    vocab.decode(ngram)
}

/// Sums R and F of the member n-grams of every category. Sorted by
/// `|F − R|` descending, then by name.
pub fn category_importance(
    salient: &[NgramAttribution],
    vocab: &Vocabulary,
    lexicon: &CategoryLexicon,
) -> Vec<CategoryScore> {
    let mut sums: BTreeMap<String, (f64, f64)> = BTreeMap::new();
    for a in salient {
        for c in categorize(&surface(&a.ngram, vocab), lexicon) {
            let e = sums.entry(c.to_string()).or_insert((0.0, 0.0));
            e.0 += a.real;
            e.1 += a.fake;
        }
    }
    let mut out: Vec<CategoryScore> = sums
        .into_iter()
        .map(|(category, (real, fake))| CategoryScore { category, real, fake })
        .collect();
    out.sort_by(|a, b| b.gap().total_cmp(&a.gap()).then_with(|| a.category.cmp(&b.category)));
    out
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportComparison {
    pub shared: BTreeSet<String>,
    pub a_only: BTreeSet<String>,
    pub b_only: BTreeSet<String>,
}

/// Set comparison of the categories whose `|F − R|` exceeds `floor`.
pub fn compare_reports(a: &[CategoryScore], b: &[CategoryScore], floor: f64) -> ReportComparison {
    let names = |r: &[CategoryScore]| -> BTreeSet<String> {
        r.iter()
            .filter(|c| c.gap() > floor)
            .map(|c| c.category.clone())
            .collect()
    };
    let (a, b) = (names(a), names(b));
    ReportComparison {
        shared: a.intersection(&b).cloned().collect(),
        a_only: a.difference(&b).cloned().collect(),
        b_only: b.difference(&a).cloned().collect(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramDetail {
    pub ngram: Vec<String>,
    pub real: f64,
    pub fake: f64,
    pub salient: bool,
    /// The class the n-gram leans to, by the sign of `F − R`.
    pub leans: String,
    pub categories: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterpretReport {
    pub setup: String,
    pub modality: Modality,
    pub documents: usize,
    pub categories: Vec<CategoryScore>,
    pub ngrams: Vec<NgramDetail>,
}

impl InterpretReport {
    pub fn build(
        setup: &str,
        modality: Modality,
        documents: usize,
        scored: &[NgramAttribution],
        salient: &[NgramAttribution],
        vocab: &Vocabulary,
        lexicon: &CategoryLexicon,
    ) -> Self {
        let salient_set: BTreeSet<&[usize]> = salient.iter().map(|a| a.ngram.as_slice()).collect();
        let ngrams = scored
            .iter()
            .map(|a| {
                let tokens = surface(&a.ngram, vocab);
                NgramDetail {
                    categories: categorize(&tokens, lexicon).iter().map(ToString::to_string).collect(),
                    ngram: tokens,
                    real: a.real,
                    fake: a.fake,
                    salient: salient_set.contains(a.ngram.as_slice()),
                    leans: if a.fake > a.real { "fake" } else { "real" }.to_string(),
                }
            })
            .collect();
        Self {
            setup: setup.to_string(),
            modality,
            documents,
            categories: category_importance(salient, vocab, lexicon),
            ngrams,
        }
    }

    /// `category,class,score` with one line per category and class.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("category,class,score\n");
        for c in &self.categories {
            out.push_str(&format!("{},real,{}\n", c.category, c.real));
            out.push_str(&format!("{},fake,{}\n", c.category, c.fake));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn score(name: &str, real: f64, fake: f64) -> CategoryScore {
        CategoryScore {
            category: name.into(),
            real,
            fake,
        }
    }

    #[test]
    fn comparison_examples() {
        let a = vec![score("war", 0.0, 1.0), score("faith", 0.0, 1.0)];
        let b = vec![score("war", 0.0, 1.0)];
        let c = compare_reports(&a, &b, 0.0);
        assert_eq!(c.shared, BTreeSet::from(["war".to_string()]));
        assert_eq!(c.a_only, BTreeSet::from(["faith".to_string()]));
        assert!(c.b_only.is_empty());
        assert!(compare_reports(&a, &a, 0.0).a_only.is_empty());
        let d = vec![score("money", 1.0, 0.0)];
        assert!(compare_reports(&a, &d, 0.0).shared.is_empty());
        assert!(compare_reports(&a, &b, 1.0).shared.is_empty());
    }
}
