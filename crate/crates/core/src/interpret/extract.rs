use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::PAD_ID;
use crate::error::{Error, Result};
use crate::model::{EncodedInstance, Encoder, FakeNewsModel};
use crate::nn::{conv_relu_pool, Matrix};
use crate::stats::mean_std;

/// Which encoder of a model is analysed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Modality {
    News,
    Users,
}

impl Modality {
    fn encoder(self, model: &FakeNewsModel) -> &Encoder {
        match self {
            Modality::News => &model.arch.news,
            Modality::Users => &model.arch.users,
        }
    }

    /// Offset of this modality's block in the classifier input.
    pub fn block_offset(self, model: &FakeNewsModel) -> usize {
        match self {
            Modality::Users if model.setup().uses_news() => model.num_filters(),
            _ => 0,
        }
    }

    /// The modality a single-modality setup is analysed through.
    pub fn primary(model: &FakeNewsModel) -> Self {
        if model.setup().uses_users() {
            Modality::Users
        } else {
            Modality::News
        }
    }

    /// Documents the encoder sees for `instances`: the news text, or every
    /// spreader document.
    pub fn documents(self, instances: &[EncodedInstance]) -> Vec<&[usize]> {
        match self {
            Modality::News => instances.iter().filter_map(|i| i.news.as_deref()).collect(),
            Modality::Users => instances
                .iter()
                .flat_map(|i| i.users.iter().map(Vec::as_slice))
                .collect(),
        }
    }
}

/// The winning n-gram of one filter on one document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RelevantNgram {
    /// Token ids; positions past the document end are `<PAD>`.
    pub ngram: Vec<usize>,
    pub filter: usize,
    pub activation: f64,
    pub document: usize,
    pub start: usize,
}

/// Max-pool winners of every filter on every document, dropping filters
/// whose pooled activation is zero. Output is ordered by document, then
/// filter.
pub fn extract_relevant_ngrams(model: &FakeNewsModel, modality: Modality, docs: &[&[usize]]) -> Vec<RelevantNgram> {
    let encoder = modality.encoder(model);
    let emb = model.store.value(encoder.embeddings);
    docs.par_iter()
        .enumerate()
        .map(|(document, doc)| {
            let doc: &[usize] = if doc.is_empty() { &[PAD_ID] } else { doc };
            let pooled = conv_relu_pool(doc, emb, &encoder.bank, &model.store);
            (0..encoder.bank.num_filters)
                .filter(|&f| pooled.values[f] > 0.0)
                .map(|f| {
                    let width = encoder.bank.width_of(f).expect("filter in bank");
                    let start = pooled.argmax[f];
                    let ngram = (start..start + width)
                        .map(|p| doc.get(p).copied().unwrap_or(PAD_ID))
                        .collect();
                    RelevantNgram {
                        ngram,
                        filter: f,
                        activation: pooled.values[f],
                        document,
                        start,
                    }
                })
                .collect::<Vec<_>>()
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect()
}

/// `(W_f0, W_f1)`: the classifier weights on pooled coordinate `offset + f`.
pub fn filter_polarity(classifier: &Matrix, offset: usize, filter: usize) -> Result<(f64, f64)> {
    let row = offset + filter;
    if row >= classifier.rows() || classifier.cols() != 2 {
        return Err(Error::OutOfRange {
            index: row,
            len: classifier.rows(),
        });
    }
    Ok((classifier.get(row, 0), classifier.get(row, 1)))
}

/// Qualitative reading of a filter's two weights.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FilterRole {
    Real,
    Fake,
    Both,
    Neither,
}

pub fn filter_role(w0: f64, w1: f64) -> FilterRole {
    match (w0 > 0.0, w1 > 0.0) {
        (true, false) if w1 < 0.0 => FilterRole::Real,
        (false, true) if w0 < 0.0 => FilterRole::Fake,
        (true, true) => FilterRole::Both,
        _ => FilterRole::Neither,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NgramAttribution {
    pub ngram: Vec<usize>,
    pub real: f64,
    pub fake: f64,
}

impl NgramAttribution {
    pub fn delta(&self) -> f64 {
        (self.real - self.fake).abs()
    }
}

/// `R = v·W_f0`, `F = v·W_f1` per occurrence, summed per distinct n-gram.
/// Output is ordered by n-gram.
pub fn score_ngrams(relevant: &[RelevantNgram], classifier: &Matrix, offset: usize) -> Result<Vec<NgramAttribution>> {
    let mut sums: BTreeMap<&[usize], (f64, f64)> = BTreeMap::new();
    for r in relevant {
        let (w0, w1) = filter_polarity(classifier, offset, r.filter)?;
        let e = sums.entry(&r.ngram).or_insert((0.0, 0.0));
        e.0 += r.activation * w0;
        e.1 += r.activation * w1;
    }
    Ok(sums
        .into_iter()
        .map(|(ngram, (real, fake))| NgramAttribution {
            ngram: ngram.to_vec(),
            real,
            fake,
        })
        .collect())
}

/// Keeps attributions whose `|R − F|` exceeds the mean plus one sample
/// standard deviation of all `|R − F|`.
pub fn select_salient(attributions: &[NgramAttribution]) -> Result<Vec<NgramAttribution>> {
    if attributions.len() < 2 {
        return Err(Error::TooFew {
            needed: 2,
            got: attributions.len(),
        });
    }
    let deltas: Vec<f64> = attributions.iter().map(NgramAttribution::delta).collect();
    let (mu, sigma) = mean_std(&deltas)?;
    let threshold = mu + sigma;
    Ok(attributions.iter().filter(|a| a.delta() > threshold).cloned().collect())
}

/// Extract, score and select in one pass over `docs`.
pub fn attribute(model: &FakeNewsModel, modality: Modality, docs: &[&[usize]]) -> Result<Attribution> {
    let relevant = extract_relevant_ngrams(model, modality, docs);
    let classifier = model.store.value(model.arch.classifier);
    let scored = score_ngrams(&relevant, classifier, modality.block_offset(model))?;
    let salient = select_salient(&scored)?;
    Ok(Attribution {
        relevant,
        scored,
        salient,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Attribution {
    pub relevant: Vec<RelevantNgram>,
    pub scored: Vec<NgramAttribution>,
    pub salient: Vec<NgramAttribution>,
}
