use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::graph::{NodeRole, SocialGraph, MAX_DISTANCE};
use crate::corpus::Vocabulary;
use crate::error::{Error, Result};
use crate::interpret::{extract_relevant_ngrams, CategoryLexicon, Modality, RelevantNgram};
use crate::model::FakeNewsModel;
use crate::stats::{spearman_rho, welch_t_test, SpearmanReport, TestReport};

pub const MIN_PAIRS: usize = 100;
pub const PAIR_CAP: usize = 1_000_000;
pub const SIGNIFICANCE: f64 = 0.005;
pub const RHO_THRESHOLD: f64 = -0.9;
/// Consecutive-distance tests run for pairs (k, k+1) with k + 1 up to this.
pub const WELCH_UP_TO: usize = 4;

/// `t_i = Σ v` over relevant n-grams containing a word of topic `i`.
pub fn topic_vector_from_relevant(
    relevant: &[RelevantNgram],
    vocab: &Vocabulary,
    lexicon: &CategoryLexicon,
) -> Vec<f64> {
    let mut t = vec![0.0; lexicon.topics.len()];
    for r in relevant {
        let mut topics: Vec<usize> = r
            .ngram
            .iter()
            .flat_map(|&id| lexicon.topics_of(vocab.token(id)))
            .collect();
        topics.sort_unstable();
        topics.dedup();
        for i in topics {
            t[i] += r.activation;
        }
    }
    t
}

/// Topic vector of one user document under a trained model. Empty
/// documents give the zero vector.
pub fn topic_vector(
    model: &FakeNewsModel,
    modality: Modality,
    doc: &[usize],
    vocab: &Vocabulary,
    lexicon: &CategoryLexicon,
) -> Vec<f64> {
    if doc.is_empty() {
        return vec![0.0; lexicon.topics.len()];
    }
    topic_vector_from_relevant(&extract_relevant_ngrams(model, modality, &[doc]), vocab, lexicon)
}

pub fn cosine(a: &[f64], b: &[f64]) -> Option<f64> {
    let dot: f64 = a.iter().zip(b).map(|(x, y)| x * y).sum();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    if na == 0.0 || nb == 0.0 {
        None
    } else {
        Some(dot / (na * nb))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct EceOptions {
    pub min_pairs: usize,
    pub max_distance: usize,
    pub pair_cap: usize,
    pub seed: u64,
}

impl Default for EceOptions {
    fn default() -> Self {
        Self {
            min_pairs: MIN_PAIRS,
            max_distance: MAX_DISTANCE,
            pair_cap: PAIR_CAP,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistancePoint {
    pub distance: usize,
    pub mean_cosine: f64,
    /// Every pair at this distance, before any subsampling.
    pub pairs: usize,
    #[serde(skip)]
    pub sample: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EceCurve {
    pub points: Vec<DistancePoint>,
}

impl EceCurve {
    pub fn to_csv(&self) -> String {
        let mut out = String::from("distance,mean_cosine,pairs\n");
        for p in &self.points {
            out.push_str(&format!("{},{},{}\n", p.distance, p.mean_cosine, p.pairs));
        }
        out
    }

    pub fn point(&self, distance: usize) -> Option<&DistancePoint> {
        self.points.iter().find(|p| p.distance == distance)
    }
}

struct Reservoir {
    seen: usize,
    sample: Vec<f64>,
}

const SOURCE_CHUNK: usize = 64;

/// Mean cosine similarity between dataset users at each exact hop distance.
/// External nodes relay paths but are never endpoints, and users whose
/// vector is missing or zero are skipped. Distances with more than
/// `pair_cap` pairs are uniformly subsampled with a seeded reservoir.
pub fn ece_curve(graph: &SocialGraph, vectors: &BTreeMap<String, Vec<f64>>, opts: &EceOptions) -> Result<EceCurve> {
    let max_d = opts.max_distance;
    let endpoint: Vec<Option<&[f64]>> = (0..graph.len())
        .map(|v| {
            if graph.role(v) != NodeRole::Dataset {
                return None;
            }
            vectors
                .get(graph.id(v))
                .map(Vec::as_slice)
                .filter(|x| x.iter().any(|&c| c != 0.0))
        })
        .collect();
    let sources: Vec<usize> = (0..graph.len()).filter(|&v| endpoint[v].is_some()).collect();

    let mut reservoirs: Vec<Reservoir> = (0..=max_d)
        .map(|_| Reservoir {
            seen: 0,
            sample: Vec::new(),
        })
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    rng.set_stream(6);
    for chunk in sources.chunks(SOURCE_CHUNK) {
        let found: Vec<Vec<(usize, f64)>> = chunk
            .par_iter()
            .map(|&s| {
                let a = endpoint[s].expect("source is an endpoint");
                graph
                    .distances_from(s, max_d)
                    .into_iter()
                    .enumerate()
                    .filter(|&(t, d)| t > s && d.is_some_and(|d| d >= 1))
                    .filter_map(|(t, d)| {
                        let b = endpoint[t]?;
                        Some((d.expect("filtered"), cosine(a, b).expect("nonzero vectors")))
                    })
                    .collect()
            })
            .collect();
        for (d, c) in found.into_iter().flatten() {
            let r = &mut reservoirs[d];
            r.seen += 1;
            if r.sample.len() < opts.pair_cap {
                r.sample.push(c);
            } else {
                let j = rng.gen_range(0..r.seen);
                if j < opts.pair_cap {
                    r.sample[j] = c;
                }
            }
        }
    }

    let points: Vec<DistancePoint> = reservoirs
        .into_iter()
        .enumerate()
        .skip(1)
        .filter(|(_, r)| r.seen >= opts.min_pairs && !r.sample.is_empty())
        .map(|(distance, r)| DistancePoint {
            distance,
            mean_cosine: r.sample.iter().sum::<f64>() / r.sample.len() as f64,
            pairs: r.seen,
            sample: r.sample,
        })
        .collect();
    if points.is_empty() {
        return Err(Error::GraphTooSparse);
    }
    Ok(EceCurve { points })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsecutiveTest {
    pub from: usize,
    pub to: usize,
    /// Welch test of the later distance's sample against the earlier one, so
    /// a drop in similarity gives a negative statistic. Absent when either
    /// sample is degenerate.
    pub report: Option<TestReport>,
    pub negative: bool,
    pub significant: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EceAssessment {
    /// Absent when the curve is constant.
    pub spearman: Option<SpearmanReport>,
    pub consecutive: Vec<ConsecutiveTest>,
    #[serde(rename = "ECE detected")]
    pub detected: bool,
    pub verdict: String,
}

/// Spearman correlation of distance against mean similarity plus Welch tests
/// between consecutive distances up to [`WELCH_UP_TO`].
pub fn ece_assess(curve: &EceCurve) -> Result<EceAssessment> {
    if curve.points.len() < 3 {
        return Err(Error::TooFew {
            needed: 3,
            got: curve.points.len(),
        });
    }
    let x: Vec<f64> = curve.points.iter().map(|p| p.distance as f64).collect();
    let y: Vec<f64> = curve.points.iter().map(|p| p.mean_cosine).collect();
    let spearman = match spearman_rho(&x, &y) {
        Ok(r) => Some(r),
        Err(Error::ZeroRankVariance) => None,
        Err(e) => return Err(e),
    };

    let mut consecutive = Vec::new();
    let mut all_required = true;
    for from in 1..WELCH_UP_TO {
        let (Some(a), Some(b)) = (curve.point(from), curve.point(from + 1)) else {
            all_required = false;
            continue;
        };
        let report = welch_t_test(&b.sample, &a.sample).ok();
        let negative = report.is_some_and(|r| r.statistic < 0.0);
        let significant = report.is_some_and(|r| r.p_value < SIGNIFICANCE);
        all_required &= negative && significant;
        consecutive.push(ConsecutiveTest {
            from,
            to: from + 1,
            report,
            negative,
            significant,
        });
    }

    let monotone = spearman.is_some_and(|s| s.rho <= RHO_THRESHOLD && s.p_value < SIGNIFICANCE);
    let detected = monotone && all_required;
    Ok(EceAssessment {
        spearman,
        consecutive,
        detected,
        verdict: if detected { "ECE detected" } else { "ECE not detected" }.to_string(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn curve(means: &[f64]) -> EceCurve {
        EceCurve {
            points: means
                .iter()
                .enumerate()
                .map(|(i, &m)| DistancePoint {
                    distance: i + 1,
                    mean_cosine: m,
                    pairs: 200,
                    sample: (0..200).map(|j| m + 0.001 * ((j % 7) as f64 - 3.0)).collect(),
                })
                .collect(),
        }
    }

    #[test]
    fn decreasing_curve_is_detected() {
        let a = ece_assess(&curve(&[0.9, 0.8, 0.7, 0.6, 0.5, 0.4, 0.3])).unwrap();
        assert_eq!(a.spearman.unwrap().rho, -1.0);
        assert!(a.detected);
        assert_eq!(a.consecutive.len(), 3);
    }

    #[test]
    fn constant_curve_is_not_detected() {
        let a = ece_assess(&curve(&[0.5; 7])).unwrap();
        assert!(a.spearman.is_none());
        assert!(!a.detected);
    }

    #[test]
    fn short_curve_rejected() {
        assert!(ece_assess(&curve(&[0.9, 0.8])).is_err());
    }

    #[test]
    fn cosine_basics() {
        assert_eq!(cosine(&[1.0, 0.0], &[0.0, 2.0]), Some(0.0));
        assert!((cosine(&[1.0, 1.0], &[2.0, 2.0]).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(cosine(&[0.0, 0.0], &[1.0, 0.0]), None);
    }
}
