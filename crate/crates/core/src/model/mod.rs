//! The gated dual-module classifier.
//!
//! A news encoder and a user encoder each turn a document into a vector of
//! max-pooled filter activations (`d` = number of filters). The user module
//! encodes every spreader text, scores each with a sigmoid gate
//! `s_i = σ(u_i · W_g)` and sums the gated vectors into `u`. Each active
//! modality vector is then scaled by its own scalar gate `σ(w·x + b)`, the
//! results are concatenated (news first) and a linear layer produces the two
//! logits `[real, fake]`.

mod checkpoint;
mod instance;
mod setup;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use checkpoint::{read_checkpoint, write_checkpoint, CHECKPOINT_MAGIC};
pub use instance::{build_instances, user_document, EncodedInstance};
pub use setup::{Setup, UserText};

use crate::corpus::{Label, PAD_ID};
use crate::error::{Error, Result};
use crate::nn::{glorot, random_embeddings, ConvBank, Matrix, NodeId, ParamId, ParamStore, Tape, EMBEDDING_DIM};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub setup: Setup,
    /// Total filter count `d`, shared round-robin by widths 1, 2, 3.
    pub num_filters: usize,
    pub embedding_dim: usize,
    pub dropout: f64,
    pub seed: u64,
    pub vocab_size: usize,
}

impl ModelConfig {
    pub fn new(setup: Setup, vocab_size: usize) -> Self {
        Self {
            setup,
            num_filters: 10,
            embedding_dim: EMBEDDING_DIM,
            dropout: 0.0,
            seed: 0,
            vocab_size,
        }
    }
}

/// Embedding table plus filters.
#[derive(Debug, Clone, PartialEq)]
pub struct Encoder {
    pub embeddings: ParamId,
    pub bank: ConvBank,
}

impl Encoder {
    pub fn params(&self) -> Vec<ParamId> {
        std::iter::once(self.embeddings).chain(self.bank.params()).collect()
    }
}

/// Weight and bias of a scalar sigmoid gate over a `d`-vector.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModalityGate {
    pub weight: ParamId,
    pub bias: ParamId,
}

/// Parameter handles; the values live in the model's [`ParamStore`].
#[derive(Debug, Clone, PartialEq)]
pub struct Architecture {
    pub news: Encoder,
    pub users: Encoder,
    /// `d × 1`, no bias.
    pub user_gate: ParamId,
    pub news_modality_gate: ModalityGate,
    pub user_modality_gate: ModalityGate,
    /// `(d · modalities) × 2`.
    pub classifier: ParamId,
    pub classifier_bias: ParamId,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FakeNewsModel {
    pub config: ModelConfig,
    pub arch: Architecture,
    pub store: ParamStore,
}

/// Per-user gate values and vectors behind an aggregated user vector.
#[derive(Debug, Clone, PartialEq)]
pub struct AggregationTrace {
    pub gates: Vec<f64>,
    pub user_vectors: Vec<Vec<f64>>,
    pub aggregate: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub label: Label,
    pub p_fake: f64,
}

/// Recorded forward pass.
pub struct Forward<'a> {
    pub tape: Tape<'a>,
    pub news: Option<NodeId>,
    pub users: Vec<NodeId>,
    pub user_gates: Vec<NodeId>,
    pub aggregate: Option<NodeId>,
    pub logits: NodeId,
}

static PAD_DOC: [usize; 1] = [PAD_ID];

fn doc_or_pad(doc: &[usize]) -> &[usize] {
    if doc.is_empty() {
        &PAD_DOC
    } else {
        doc
    }
}

impl Architecture {
    fn build<R: Rng>(config: &ModelConfig, table: &Matrix, store: &mut ParamStore, rng: &mut R) -> Self {
        let d = config.num_filters;
        let dim = config.embedding_dim;
        let news_emb = store.add("news.embeddings", table.clone());
        let news_bank = ConvBank::new(store, "news", d, dim, rng);
        let user_emb = store.add("users.embeddings", table.clone());
        let user_bank = ConvBank::new(store, "users", d, dim, rng);
        let user_gate = store.add("users.gate.weight", glorot(d, 1, d, 1, rng));
        let mut gate = |store: &mut ParamStore, name: &str| ModalityGate {
            weight: store.add(format!("{name}.modality_gate.weight"), glorot(d, 1, d, 1, rng)),
            bias: store.add(format!("{name}.modality_gate.bias"), Matrix::zeros(1, 1)),
        };
        let news_modality_gate = gate(store, "news");
        let user_modality_gate = gate(store, "users");
        let width = d * config.setup.modalities();
        let classifier = store.add("classifier.weight", glorot(width, 2, width, 2, rng));
        let classifier_bias = store.add("classifier.bias", Matrix::zeros(2, 1));
        Self {
            news: Encoder {
                embeddings: news_emb,
                bank: news_bank,
            },
            users: Encoder {
                embeddings: user_emb,
                bank: user_bank,
            },
            user_gate,
            news_modality_gate,
            user_modality_gate,
            classifier,
            classifier_bias,
        }
    }

    pub fn news_params(&self) -> Vec<ParamId> {
        let mut p = self.news.params();
        p.extend([self.news_modality_gate.weight, self.news_modality_gate.bias]);
        p
    }

    pub fn user_params(&self) -> Vec<ParamId> {
        let mut p = self.users.params();
        p.extend([
            self.user_gate,
            self.user_modality_gate.weight,
            self.user_modality_gate.bias,
        ]);
        p
    }

    /// Records the full forward pass for `inst` on a fresh tape.
    pub fn forward<'a, R: Rng>(
        &'a self,
        config: &ModelConfig,
        store: &ParamStore,
        inst: &'a EncodedInstance,
        training: bool,
        rng: &mut R,
    ) -> Result<Forward<'a>> {
        let setup = config.setup;
        let mut tape = Tape::new();

        let news = if setup.uses_news() {
            let doc = inst.news.as_deref().ok_or(Error::MissingModality {
                setup: setup.name(),
                modality: "news",
            })?;
            let n = tape.conv_pool(store, self.news.embeddings, &self.news.bank, doc_or_pad(doc));
            Some(tape.dropout(n, config.dropout, training, rng)?)
        } else {
            None
        };

        let mut users = Vec::new();
        let mut user_gates = Vec::new();
        let aggregate = if setup.uses_users() {
            if inst.users.is_empty() {
                return Err(Error::NoUserTexts);
            }
            let mut gated = Vec::with_capacity(inst.users.len());
            for doc in &inst.users {
                let u = tape.conv_pool(store, self.users.embeddings, &self.users.bank, doc_or_pad(doc));
                let u = tape.dropout(u, config.dropout, training, rng)?;
                let s = tape.linear(store, u, self.user_gate, None)?;
                let s = tape.sigmoid(s);
                gated.push(tape.scale(u, s)?);
                users.push(u);
                user_gates.push(s);
            }
            Some(tape.sum(&gated)?)
        } else {
            None
        };

        let logits = self.fuse(&mut tape, store, setup, news, aggregate)?;
        Ok(Forward {
            tape,
            news,
            users,
            user_gates,
            aggregate,
            logits,
        })
    }

    fn fuse(
        &self,
        tape: &mut Tape<'_>,
        store: &ParamStore,
        setup: Setup,
        news: Option<NodeId>,
        users: Option<NodeId>,
    ) -> Result<NodeId> {
        let mut parts = Vec::with_capacity(2);
        let gate = |tape: &mut Tape<'_>, x: NodeId, g: ModalityGate| -> Result<NodeId> {
            let s = tape.linear(store, x, g.weight, Some(g.bias))?;
            let s = tape.sigmoid(s);
            tape.scale(x, s)
        };
        if setup.uses_news() {
            let n = news.ok_or(Error::MissingModality {
                setup: setup.name(),
                modality: "news",
            })?;
            parts.push(gate(tape, n, self.news_modality_gate)?);
        }
        if setup.uses_users() {
            let u = users.ok_or(Error::MissingModality {
                setup: setup.name(),
                modality: "users",
            })?;
            parts.push(gate(tape, u, self.user_modality_gate)?);
        }
        let joined = if parts.len() == 1 {
            parts[0]
        } else {
            tape.concat(&parts)
        };
        tape.linear(store, joined, self.classifier, Some(self.classifier_bias))
    }
}

impl FakeNewsModel {
    /// Fresh model. `embeddings` (if given) initializes both embedding
    /// tables; otherwise rows are drawn from uniform(−0.05, 0.05).
    pub fn new(config: ModelConfig, embeddings: Option<&Matrix>) -> Result<Self> {
        if config.num_filters == 0 {
            return Err(Error::InvalidArgument("num_filters must be positive".into()));
        }
        if !(0.0..1.0).contains(&config.dropout) {
            return Err(Error::InvalidArgument(format!(
                "dropout {} outside [0, 1)",
                config.dropout
            )));
        }
        let table = match embeddings {
            Some(t) => {
                if t.shape() != (config.vocab_size, config.embedding_dim) {
                    return Err(Error::Shape(format!(
                        "embedding table {:?}, config wants {}x{}",
                        t.shape(),
                        config.vocab_size,
                        config.embedding_dim
                    )));
                }
                t.clone()
            }
            None => random_embeddings(config.vocab_size, config.embedding_dim, config.seed),
        };
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(4);
        let mut store = ParamStore::new();
        let arch = Architecture::build(&config, &table, &mut store, &mut rng);
        Ok(Self { config, arch, store })
    }

    pub fn num_filters(&self) -> usize {
        self.config.num_filters
    }

    pub fn setup(&self) -> Setup {
        self.config.setup
    }

    /// Evaluation-mode forward pass (dropout off).
    pub fn forward_eval<'a>(&'a self, inst: &'a EncodedInstance) -> Result<Forward<'a>> {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        self.arch.forward(&self.config, &self.store, inst, false, &mut rng)
    }

    /// Forward + backward for one instance. Gradients are scaled by `weight`
    /// (e.g. `1/batch`) and added to the store. Returns the unscaled loss.
    pub fn accumulate_gradients<R: Rng>(&mut self, inst: &EncodedInstance, weight: f64, rng: &mut R) -> Result<f64> {
        let fwd = self.arch.forward(&self.config, &self.store, inst, true, rng)?;
        let mut tape = fwd.tape;
        let loss = tape.softmax_xent(fwd.logits, inst.label.index())?;
        let value = tape.value(loss)[0];
        tape.backward_scaled(loss, weight, &mut self.store)?;
        Ok(value)
    }

    /// Loss of one instance in evaluation mode.
    pub fn loss(&self, inst: &EncodedInstance) -> Result<f64> {
        let fwd = self.forward_eval(inst)?;
        let mut tape = fwd.tape;
        let loss = tape.softmax_xent(fwd.logits, inst.label.index())?;
        Ok(tape.value(loss)[0])
    }

    pub fn logits(&self, inst: &EncodedInstance) -> Result<[f64; 2]> {
        let fwd = self.forward_eval(inst)?;
        let o = fwd.tape.value(fwd.logits);
        Ok([o[0], o[1]])
    }

    pub fn predict(&self, inst: &EncodedInstance) -> Result<Prediction> {
        Ok(prediction_from_logits(self.logits(inst)?))
    }

    /// `n` for a news document (evaluation mode).
    pub fn encode_news(&self, doc: &[usize]) -> Vec<f64> {
        let mut tape = Tape::new();
        let n = tape.conv_pool(
            &self.store,
            self.arch.news.embeddings,
            &self.arch.news.bank,
            doc_or_pad(doc),
        );
        tape.value(n).to_vec()
    }

    /// Pooled vector of one user document (evaluation mode).
    pub fn encode_user(&self, doc: &[usize]) -> Vec<f64> {
        let mut tape = Tape::new();
        let u = tape.conv_pool(
            &self.store,
            self.arch.users.embeddings,
            &self.arch.users.bank,
            doc_or_pad(doc),
        );
        tape.value(u).to_vec()
    }

    /// Gated sum of the user vectors (evaluation mode).
    pub fn aggregate_users(&self, docs: &[Vec<usize>]) -> Result<AggregationTrace> {
        if docs.is_empty() {
            return Err(Error::NoUserTexts);
        }
        let user_vectors: Vec<Vec<f64>> = docs.iter().map(|d| self.encode_user(d)).collect();
        aggregate_with_gate(&user_vectors, self.store.value(self.arch.user_gate).as_slice())
    }

    /// Applies the modality gates and the classifier to precomputed vectors.
    pub fn fuse_and_classify(&self, news: Option<&[f64]>, users: Option<&[f64]>) -> Result<[f64; 2]> {
        let mut tape = Tape::new();
        let n = news.map(|v| tape.input(v.to_vec()));
        let u = users.map(|v| tape.input(v.to_vec()));
        let o = self.arch.fuse(&mut tape, &self.store, self.config.setup, n, u)?;
        let o = tape.value(o);
        Ok([o[0], o[1]])
    }
}

/// `s_i = σ(u_i · w)`, `u = Σ s_i u_i` summed in input order.
pub fn aggregate_with_gate(user_vectors: &[Vec<f64>], gate: &[f64]) -> Result<AggregationTrace> {
    if user_vectors.is_empty() {
        return Err(Error::NoUserTexts);
    }
    let d = gate.len();
    let mut aggregate = vec![0.0; d];
    let mut gates = Vec::with_capacity(user_vectors.len());
    for u in user_vectors {
        if u.len() != d {
            return Err(Error::Shape(format!(
                "user vector of length {} against gate {d}",
                u.len()
            )));
        }
        let s = crate::nn::sigmoid(u.iter().zip(gate).map(|(a, b)| a * b).sum());
        for (acc, x) in aggregate.iter_mut().zip(u) {
            *acc += s * x;
        }
        gates.push(s);
    }
    Ok(AggregationTrace {
        gates,
        user_vectors: user_vectors.to_vec(),
        aggregate,
    })
}

/// Fake only when its logit is strictly larger; ties go to real.
pub fn prediction_from_logits(o: [f64; 2]) -> Prediction {
    let (_, probs) = crate::nn::softmax_xent(&o, 0);
    Prediction {
        label: if o[1] > o[0] { Label::Fake } else { Label::Real },
        p_fake: probs[1],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny(setup: Setup, d: usize) -> FakeNewsModel {
        let cfg = ModelConfig {
            setup,
            num_filters: d,
            embedding_dim: 4,
            dropout: 0.0,
            seed: 5,
            vocab_size: 12,
        };
        FakeNewsModel::new(cfg, None).unwrap()
    }

    #[test]
    fn news_vector_shape_and_zero_filters() {
        let mut m = tiny(Setup::News, 6);
        assert_eq!(m.encode_news(&[7, 8, 9]).len(), 6);
        for g in m.arch.news.bank.groups.clone() {
            m.store.value_mut(g.weight).fill(0.0);
            m.store.value_mut(g.bias).fill(0.0);
        }
        assert_eq!(m.encode_news(&[7, 8, 9]), vec![0.0; 6]);
        // empty doc encodes like a single <PAD>
        assert_eq!(m.encode_news(&[]), m.encode_news(&[PAD_ID]));
    }

    #[test]
    fn zero_user_gate_halves() {
        let mut m = tiny(Setup::Tl, 3);
        m.store.value_mut(m.arch.user_gate).fill(0.0);
        let docs = vec![vec![7, 8], vec![9, 10, 11]];
        let tr = m.aggregate_users(&docs).unwrap();
        assert_eq!(tr.gates, vec![0.5, 0.5]);
        for k in 0..3 {
            let expect = 0.5 * (tr.user_vectors[0][k] + tr.user_vectors[1][k]);
            assert!((tr.aggregate[k] - expect).abs() < 1e-15);
        }
        assert!(matches!(m.aggregate_users(&[]), Err(Error::NoUserTexts)));
    }

    #[test]
    fn two_user_hand_aggregation() {
        // U = [[1,2],[3,0]], W_g = [0.5,-0.5]
        let users = vec![vec![1.0, 2.0], vec![3.0, 0.0]];
        let tr = aggregate_with_gate(&users, &[0.5, -0.5]).unwrap();
        let s1 = 1.0 / (1.0 + 0.5f64.exp());
        let s2 = 1.0 / (1.0 + (-1.5f64).exp());
        assert!((tr.gates[0] - s1).abs() < 1e-15);
        assert!((tr.gates[1] - s2).abs() < 1e-15);
        assert!((tr.aggregate[0] - (s1 + 3.0 * s2)).abs() < 1e-15);
        assert!((tr.aggregate[1] - 2.0 * s1).abs() < 1e-15);
        let single = aggregate_with_gate(&users[..1], &[0.5, -0.5]).unwrap();
        assert!((single.aggregate[0] - s1).abs() < 1e-15 && (single.aggregate[1] - 2.0 * s1).abs() < 1e-15);
    }

    #[test]
    fn closed_user_gate_equals_zero_user_vector() {
        let mut m = tiny(Setup::NewsTl, 3);
        m.store.value_mut(m.arch.user_modality_gate.bias).fill(-1e4);
        let n = [0.3, 0.0, 1.2];
        let a = m.fuse_and_classify(Some(&n), Some(&[2.0, 1.0, 0.5])).unwrap();
        let b = m.fuse_and_classify(Some(&n), Some(&[0.0, 0.0, 0.0])).unwrap();
        assert_eq!(a, b);
        assert!(matches!(
            m.fuse_and_classify(Some(&n), None),
            Err(Error::MissingModality { .. })
        ));
    }

    #[test]
    fn hand_fused_logits() {
        // News setup, d = 2: g = σ(w·n + b), o = Wᵀ(g n) + c
        let mut m = tiny(Setup::News, 2);
        *m.store.value_mut(m.arch.news_modality_gate.weight) = Matrix::from_vec(2, 1, vec![1.0, -1.0]).unwrap();
        *m.store.value_mut(m.arch.news_modality_gate.bias) = Matrix::from_vec(1, 1, vec![0.5]).unwrap();
        *m.store.value_mut(m.arch.classifier) = Matrix::from_rows(&[vec![1.0, 2.0], vec![-1.0, 0.5]]).unwrap();
        *m.store.value_mut(m.arch.classifier_bias) = Matrix::from_vec(2, 1, vec![0.1, -0.1]).unwrap();
        let n = [2.0, 1.0];
        let g = 1.0 / (1.0 + (-1.5f64).exp());
        let o = m.fuse_and_classify(Some(&n), None).unwrap();
        assert!((o[0] - (g * (2.0 - 1.0) + 0.1)).abs() < 1e-14);
        assert!((o[1] - (g * (4.0 + 0.5) - 0.1)).abs() < 1e-14);
        assert_eq!(m.store.value(m.arch.classifier).rows(), 2);
    }

    #[test]
    fn classifier_width_tracks_modalities() {
        assert_eq!(
            tiny(Setup::News, 4)
                .store
                .value(tiny(Setup::News, 4).arch.classifier)
                .rows(),
            4
        );
        let m = tiny(Setup::NewsTlDe, 4);
        assert_eq!(m.store.value(m.arch.classifier).shape(), (8, 2));
    }

    #[test]
    fn predict_tie_break() {
        assert_eq!(prediction_from_logits([3.0, -3.0]).label, Label::Real);
        assert_eq!(prediction_from_logits([-3.0, 3.0]).label, Label::Fake);
        assert_eq!(prediction_from_logits([0.0, 0.0]).label, Label::Real);
        assert_eq!(prediction_from_logits([0.0, 0.0]).p_fake, 0.5);
    }
}
