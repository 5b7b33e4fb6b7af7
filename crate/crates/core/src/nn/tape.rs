//! Reverse-mode differentiation over vector-valued nodes.
//!
//! A [`Tape`] records every operation of one forward pass together with its
//! output. [`Tape::backward`] walks the record in reverse, propagating
//! adjoints between nodes and accumulating parameter gradients into the
//! [`ParamStore`]. The operation set is exactly what the classifier needs.

use rand::Rng;

use super::conv::{conv_pool_backward, conv_relu_pool, ConvBank, Pooled};
use super::param::{ParamId, ParamStore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct NodeId(usize);

#[derive(Debug)]
enum Op<'a> {
    Input,
    ConvPool {
        doc: &'a [usize],
        emb: ParamId,
        bank: &'a ConvBank,
        pooled: Pooled,
    },
    Linear {
        x: NodeId,
        weight: ParamId,
        bias: Option<ParamId>,
    },
    Sigmoid(NodeId),
    Scale {
        x: NodeId,
        s: NodeId,
    },
    Sum(Vec<NodeId>),
    Concat(Vec<NodeId>),
    Mask {
        x: NodeId,
        mask: Vec<f64>,
    },
    SoftmaxXent {
        logits: NodeId,
        target: usize,
        probs: Vec<f64>,
    },
}

#[derive(Debug)]
struct Node<'a> {
    value: Vec<f64>,
    op: Op<'a>,
}

#[derive(Debug, Default)]
pub struct Tape<'a> {
    nodes: Vec<Node<'a>>,
}

impl<'a> Tape<'a> {
    pub fn new() -> Self {
        Self { nodes: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    fn push(&mut self, value: Vec<f64>, op: Op<'a>) -> NodeId {
        self.nodes.push(Node { value, op });
        NodeId(self.nodes.len() - 1)
    }

    pub fn value(&self, id: NodeId) -> &[f64] {
        &self.nodes[id.0].value
    }

    /// Pooled record of a convolution node, if `id` is one.
    pub fn pooled(&self, id: NodeId) -> Option<&Pooled> {
        match &self.nodes[id.0].op {
            Op::ConvPool { pooled, .. } => Some(pooled),
            _ => None,
        }
    }

    /// Softmax probabilities of a cross-entropy node.
    pub fn probabilities(&self, id: NodeId) -> Option<&[f64]> {
        match &self.nodes[id.0].op {
            Op::SoftmaxXent { probs, .. } => Some(probs),
            _ => None,
        }
    }

    pub fn input(&mut self, values: Vec<f64>) -> NodeId {
        self.push(values, Op::Input)
    }

    pub fn conv_pool(&mut self, store: &ParamStore, emb: ParamId, bank: &'a ConvBank, doc: &'a [usize]) -> NodeId {
        let pooled = conv_relu_pool(doc, store.value(emb), bank, store);
        self.push(pooled.values.clone(), Op::ConvPool { doc, emb, bank, pooled })
    }

    /// `Wᵀx + b` with `W` of shape `in × out` and `b` of shape `out × 1`.
    pub fn linear(&mut self, store: &ParamStore, x: NodeId, weight: ParamId, bias: Option<ParamId>) -> Result<NodeId> {
        let w = store.value(weight);
        let xv = self.value(x);
        if w.rows() != xv.len() {
            return Err(Error::Shape(format!(
                "linear: input of length {} against weight {}x{}",
                xv.len(),
                w.rows(),
                w.cols()
            )));
        }
        let mut out = match bias {
            Some(b) => {
                let b = store.value(b);
                if b.len() != w.cols() {
                    return Err(Error::Shape(format!(
                        "linear: bias of length {} for {} outputs",
                        b.len(),
                        w.cols()
                    )));
                }
                b.as_slice().to_vec()
            }
            None => vec![0.0; w.cols()],
        };
        for (i, &xi) in xv.iter().enumerate() {
            for (o, &wij) in out.iter_mut().zip(w.row(i)) {
                *o += wij * xi;
            }
        }
        Ok(self.push(out, Op::Linear { x, weight, bias }))
    }

    pub fn sigmoid(&mut self, x: NodeId) -> NodeId {
        let out = self.value(x).iter().map(|&v| sigmoid(v)).collect();
        self.push(out, Op::Sigmoid(x))
    }

    /// Multiply vector `x` by the scalar node `s`.
    pub fn scale(&mut self, x: NodeId, s: NodeId) -> Result<NodeId> {
        let sv = self.value(s);
        if sv.len() != 1 {
            return Err(Error::Shape(format!("scale: gate has length {}", sv.len())));
        }
        let c = sv[0];
        let out = self.value(x).iter().map(|v| v * c).collect();
        Ok(self.push(out, Op::Scale { x, s }))
    }

    /// Elementwise sum, accumulated in the order given.
    pub fn sum(&mut self, xs: &[NodeId]) -> Result<NodeId> {
        let first = xs.first().ok_or_else(|| Error::Shape("sum of nothing".into()))?;
        let n = self.value(*first).len();
        let mut out = vec![0.0; n];
        for &x in xs {
            let v = self.value(x);
            if v.len() != n {
                return Err(Error::Shape(format!("sum: lengths {n} and {}", v.len())));
            }
            for (o, a) in out.iter_mut().zip(v) {
                *o += a;
            }
        }
        Ok(self.push(out, Op::Sum(xs.to_vec())))
    }

    pub fn concat(&mut self, xs: &[NodeId]) -> NodeId {
        let out = xs.iter().flat_map(|&x| self.value(x).iter().copied()).collect();
        self.push(out, Op::Concat(xs.to_vec()))
    }

    /// Inverted dropout; identity outside training.
    pub fn dropout<R: Rng>(&mut self, x: NodeId, rate: f64, training: bool, rng: &mut R) -> Result<NodeId> {
        let mask = dropout_mask(self.value(x).len(), rate, training, rng)?;
        let out = self.value(x).iter().zip(&mask).map(|(v, m)| v * m).collect();
        Ok(self.push(out, Op::Mask { x, mask }))
    }

    /// Cross-entropy of softmax(logits) against `target`; the node value is
    /// the scalar loss.
    pub fn softmax_xent(&mut self, logits: NodeId, target: usize) -> Result<NodeId> {
        let o = self.value(logits);
        if target >= o.len() {
            return Err(Error::OutOfRange {
                index: target,
                len: o.len(),
            });
        }
        let (loss, probs) = softmax_xent(o, target);
        Ok(self.push(vec![loss], Op::SoftmaxXent { logits, target, probs }))
    }

    /// Back-propagate from scalar node `loss`, adding `seed · ∂loss/∂θ` into
    /// each parameter's gradient.
    pub fn backward_scaled(&self, loss: NodeId, seed: f64, store: &mut ParamStore) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::NoForwardPass);
        }
        if self.value(loss).len() != 1 {
            return Err(Error::Shape("backward needs a scalar loss".into()));
        }
        let mut adj: Vec<Vec<f64>> = self.nodes.iter().map(|n| vec![0.0; n.value.len()]).collect();
        adj[loss.0][0] = seed;

        for i in (0..=loss.0).rev() {
            let g = std::mem::take(&mut adj[i]);
            if g.iter().all(|&v| v == 0.0) {
                continue;
            }
            let node = &self.nodes[i];
            match &node.op {
                Op::Input => {}
                Op::ConvPool { doc, emb, bank, pooled } => {
                    conv_pool_backward(doc, *emb, bank, pooled, &g, store);
                }
                Op::Linear { x, weight, bias } => {
                    let xv = &self.nodes[x.0].value;
                    let cols = store.value(*weight).cols();
                    {
                        let w = store.value(*weight);
                        let ax = &mut adj[x.0];
                        for (r, a) in ax.iter_mut().enumerate() {
                            *a += w.row(r).iter().zip(&g).map(|(w, g)| w * g).sum::<f64>();
                        }
                    }
                    let gw = store.grad_mut(*weight);
                    for (r, &xr) in xv.iter().enumerate() {
                        if xr == 0.0 {
                            continue;
                        }
                        let row = gw.row_mut(r);
                        for c in 0..cols {
                            row[c] += xr * g[c];
                        }
                    }
                    if let Some(b) = bias {
                        for (gb, gv) in store.grad_mut(*b).as_mut_slice().iter_mut().zip(&g) {
                            *gb += gv;
                        }
                    }
                }
                Op::Sigmoid(x) => {
                    for ((a, &y), gv) in adj[x.0].iter_mut().zip(&node.value).zip(&g) {
                        *a += gv * y * (1.0 - y);
                    }
                }
                Op::Scale { x, s } => {
                    let c = self.nodes[s.0].value[0];
                    let xv = &self.nodes[x.0].value;
                    let ds: f64 = xv.iter().zip(&g).map(|(a, b)| a * b).sum();
                    for (a, gv) in adj[x.0].iter_mut().zip(&g) {
                        *a += c * gv;
                    }
                    adj[s.0][0] += ds;
                }
                Op::Sum(xs) => {
                    for x in xs {
                        for (a, gv) in adj[x.0].iter_mut().zip(&g) {
                            *a += gv;
                        }
                    }
                }
                Op::Concat(xs) => {
                    let mut off = 0;
                    for x in xs {
                        let n = self.nodes[x.0].value.len();
                        for (a, gv) in adj[x.0].iter_mut().zip(&g[off..off + n]) {
                            *a += gv;
                        }
                        off += n;
                    }
                }
                Op::Mask { x, mask } => {
                    for ((a, m), gv) in adj[x.0].iter_mut().zip(mask).zip(&g) {
                        *a += m * gv;
                    }
                }
                Op::SoftmaxXent { logits, target, probs } => {
                    for (k, (a, p)) in adj[logits.0].iter_mut().zip(probs).enumerate() {
                        let onehot = if k == *target { 1.0 } else { 0.0 };
                        *a += g[0] * (p - onehot);
                    }
                }
            }
        }
        Ok(())
    }

    pub fn backward(&self, loss: NodeId, store: &mut ParamStore) -> Result<()> {
        self.backward_scaled(loss, 1.0, store)
    }
}

#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `(−log softmax(o)[target], softmax(o))`, computed stably.
pub fn softmax_xent(logits: &[f64], target: usize) -> (f64, Vec<f64>) {
    let m = logits.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let exps: Vec<f64> = logits.iter().map(|&o| (o - m).exp()).collect();
    let z: f64 = exps.iter().sum();
    let probs = exps.iter().map(|e| e / z).collect();
    let loss = z.ln() + (m - logits[target]);
    (loss, probs)
}

/// Keep-mask for inverted dropout: survivors carry `1/(1−rate)`.
pub fn dropout_mask<R: Rng>(n: usize, rate: f64, training: bool, rng: &mut R) -> Result<Vec<f64>> {
    if !(0.0..1.0).contains(&rate) {
        return Err(Error::InvalidArgument(format!("dropout rate {rate} outside [0, 1)")));
    }
    if !training || rate == 0.0 {
        return Ok(vec![1.0; n]);
    }
    let keep = 1.0 / (1.0 - rate);
    Ok((0..n)
        .map(|_| if rng.gen::<f64>() < rate { 0.0 } else { keep })
        .collect())
}

pub fn dropout<R: Rng>(x: &[f64], rate: f64, training: bool, rng: &mut R) -> Result<Vec<f64>> {
    let mask = dropout_mask(x.len(), rate, training, rng)?;
    Ok(x.iter().zip(mask).map(|(v, m)| v * m).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::Matrix;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn linear_examples() {
        let mut store = ParamStore::new();
        let w = store.add("w", Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]).unwrap());
        let b = store.add("b", Matrix::zeros(2, 1));
        let mut tape = Tape::new();
        let x = tape.input(vec![1.0, 1.0]);
        let y = tape.linear(&store, x, w, Some(b)).unwrap();
        assert_eq!(tape.value(y), &[4.0, 6.0]);

        let eye = store.add("eye", Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap());
        let x2 = tape.input(vec![0.3, -2.0]);
        let y2 = tape.linear(&store, x2, eye, Some(b)).unwrap();
        assert_eq!(tape.value(y2), &[0.3, -2.0]);

        let zero = store.add("zero", Matrix::zeros(2, 2));
        let bias = store.add("bias", Matrix::from_vec(2, 1, vec![0.5, -0.5]).unwrap());
        let y3 = tape.linear(&store, x2, zero, Some(bias)).unwrap();
        assert_eq!(tape.value(y3), &[0.5, -0.5]);

        let x3 = tape.input(vec![1.0, 2.0, 3.0]);
        assert!(matches!(tape.linear(&store, x3, w, None), Err(Error::Shape(_))));
    }

    #[test]
    fn softmax_xent_examples() {
        let (loss, p) = softmax_xent(&[0.0, 0.0], 1);
        assert!((loss - std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(p, vec![0.5, 0.5]);
        let (loss, p) = softmax_xent(&[10.0, -10.0], 0);
        let expected = (1.0 + (-20.0f64).exp()).ln();
        assert!((loss - expected).abs() < 1e-15);
        assert!((loss - 2.06e-9).abs() < 1e-11);
        assert!((p[0] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn dropout_examples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = vec![1.0; 10_000];
        assert_eq!(dropout(&x, 0.0, true, &mut rng).unwrap(), x);
        assert_eq!(dropout(&x, 0.6, false, &mut rng).unwrap(), x);
        let y = dropout(&x, 0.5, true, &mut rng).unwrap();
        let mean = y.iter().sum::<f64>() / y.len() as f64;
        assert!((mean - 1.0).abs() < 0.05, "mean {mean}");
        assert!(y.iter().all(|&v| v == 0.0 || v == 2.0));
        assert!(dropout(&x, 1.0, true, &mut rng).is_err());
    }

    #[test]
    fn backward_before_forward_errors() {
        let tape = Tape::new();
        let mut store = ParamStore::new();
        assert!(matches!(
            tape.backward(NodeId(0), &mut store),
            Err(Error::NoForwardPass)
        ));
    }

    #[test]
    fn gate_chain_matches_finite_difference() {
        // s = σ(wᵀx); y = s·x; loss = xent(y, 1)
        let mut store = ParamStore::new();
        let w = store.add("w", Matrix::from_vec(2, 1, vec![0.3, -0.7]).unwrap());
        let loss_of = |store: &ParamStore| {
            let mut t = Tape::new();
            let x = t.input(vec![1.5, -0.5]);
            let s = t.linear(store, x, w, None).unwrap();
            let s = t.sigmoid(s);
            let y = t.scale(x, s).unwrap();
            let l = t.softmax_xent(y, 1).unwrap();
            (t.value(l)[0], t, l)
        };
        let (_, t, l) = loss_of(&store);
        let mut grads = store.clone();
        t.backward(l, &mut grads).unwrap();
        for k in 0..2 {
            let h = 1e-6;
            let mut plus = store.clone();
            plus.value_mut(w).as_mut_slice()[k] += h;
            let mut minus = store.clone();
            minus.value_mut(w).as_mut_slice()[k] -= h;
            let fd = (loss_of(&plus).0 - loss_of(&minus).0) / (2.0 * h);
            let an = grads.grad(w).as_slice()[k];
            assert!((fd - an).abs() < 1e-7, "{fd} vs {an}");
        }
    }
}
