//! One-layer text convolution: each filter slides over the n-grams of a
//! document (n = filter width), applies ReLU, and keeps the maximum over
//! positions. The winning position identifies the filter's relevant n-gram.

use rand::Rng;

use super::matrix::Matrix;
use super::param::{glorot, ParamId, ParamStore};
use crate::corpus::PAD_ID;

pub const FILTER_WIDTHS: [usize; 3] = [1, 2, 3];

/// Filters of a single width, stored as one `n × (width·dim)` weight matrix
/// and an `n × 1` bias.
#[derive(Debug, Clone, PartialEq)]
pub struct FilterGroup {
    pub width: usize,
    pub weight: ParamId,
    pub bias: ParamId,
    /// Global filter index of each row.
    pub filters: Vec<usize>,
}

/// All filters of one encoder. Filter `j` has width `FILTER_WIDTHS[j % 3]`,
/// so `d = 10` yields 4/3/3 filters of widths 1/2/3.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvBank {
    pub groups: Vec<FilterGroup>,
    pub num_filters: usize,
    pub dim: usize,
}

/// Where a filter's max-pool landed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FilterLocation {
    pub group: usize,
    pub row: usize,
    pub width: usize,
}

impl ConvBank {
    pub fn new<R: Rng>(store: &mut ParamStore, prefix: &str, num_filters: usize, dim: usize, rng: &mut R) -> Self {
        let mut groups = Vec::new();
        for (g, &width) in FILTER_WIDTHS.iter().enumerate() {
            let filters: Vec<usize> = (0..num_filters).filter(|j| j % FILTER_WIDTHS.len() == g).collect();
            if filters.is_empty() {
                continue;
            }
            let n = filters.len();
            let weight = store.add(
                format!("{prefix}.conv{width}.weight"),
                glorot(n, width * dim, width * dim, n, rng),
            );
            let bias = store.add(format!("{prefix}.conv{width}.bias"), Matrix::zeros(n, 1));
            groups.push(FilterGroup {
                width,
                weight,
                bias,
                filters,
            });
        }
        Self {
            groups,
            num_filters,
            dim,
        }
    }

    pub fn params(&self) -> impl Iterator<Item = ParamId> + '_ {
        self.groups.iter().flat_map(|g| [g.weight, g.bias])
    }

    pub fn locate(&self, filter: usize) -> Option<FilterLocation> {
        self.groups.iter().enumerate().find_map(|(gi, g)| {
            g.filters.iter().position(|&f| f == filter).map(|row| FilterLocation {
                group: gi,
                row,
                width: g.width,
            })
        })
    }

    pub fn width_of(&self, filter: usize) -> Option<usize> {
        self.locate(filter).map(|l| l.width)
    }
}

/// Output of [`conv_relu_pool`]: pooled value and winning window start per
/// filter, in global filter order.
#[derive(Debug, Clone, PartialEq)]
pub struct Pooled {
    pub values: Vec<f64>,
    pub argmax: Vec<usize>,
}

/// Number of windows a filter of `width` sees on a document of `len`
/// tokens. Documents shorter than the width are padded up to it.
pub fn window_count(len: usize, width: usize) -> usize {
    len.max(width) - width + 1
}

/// Embedding row of the token at `pos`, or `None` for padding. `<PAD>`
/// tokens and positions past the end are zero rows.
#[inline]
fn token_row<'a>(doc: &[usize], pos: usize, emb: &'a Matrix) -> Option<&'a [f64]> {
    match doc.get(pos) {
        Some(&id) if id != PAD_ID => Some(emb.row(id)),
        _ => None,
    }
}

/// Pre-activation ⟨filter, window⟩ + bias for every window position.
pub fn filter_preactivations(doc: &[usize], emb: &Matrix, weight: &[f64], bias: f64, width: usize) -> Vec<f64> {
    let dim = emb.cols();
    (0..window_count(doc.len(), width))
        .map(|t| {
            let mut acc = bias;
            for k in 0..width {
                if let Some(row) = token_row(doc, t + k, emb) {
                    let w = &weight[k * dim..(k + 1) * dim];
                    acc += row.iter().zip(w).map(|(a, b)| a * b).sum::<f64>();
                }
            }
            acc
        })
        .collect()
}

/// Convolution + ReLU + max-pool over time for every filter of `bank`.
/// Ties in the max resolve to the earliest position.
pub fn conv_relu_pool(doc: &[usize], emb: &Matrix, bank: &ConvBank, store: &ParamStore) -> Pooled {
    let mut values = vec![0.0; bank.num_filters];
    let mut argmax = vec![0; bank.num_filters];
    for g in &bank.groups {
        let weight = store.value(g.weight);
        let bias = store.value(g.bias);
        for (row, &f) in g.filters.iter().enumerate() {
            let pre = filter_preactivations(doc, emb, weight.row(row), bias.get(row, 0), g.width);
            let mut best = f64::NEG_INFINITY;
            let mut best_t = 0;
            for (t, &p) in pre.iter().enumerate() {
                let a = p.max(0.0);
                if a > best {
                    best = a;
                    best_t = t;
                }
            }
            values[f] = best;
            argmax[f] = best_t;
        }
    }
    Pooled { values, argmax }
}

/// Accumulate gradients for one pooled output. `upstream[f]` is ∂L/∂pooled_f.
/// Gradient flows only through the winning window and only when its
/// activation is strictly positive.
pub(crate) fn conv_pool_backward(
    doc: &[usize],
    emb_id: ParamId,
    bank: &ConvBank,
    pooled: &Pooled,
    upstream: &[f64],
    store: &mut ParamStore,
) {
    let dim = bank.dim;
    for g in &bank.groups {
        for (row, &f) in g.filters.iter().enumerate() {
            let up = upstream[f];
            if up == 0.0 || pooled.values[f] <= 0.0 {
                continue;
            }
            let t = pooled.argmax[f];
            store.grad_mut(g.bias).as_mut_slice()[row] += up;
            for k in 0..g.width {
                let pos = t + k;
                let id = match doc.get(pos) {
                    Some(&id) if id != PAD_ID => id,
                    _ => continue,
                };
                // weight gradient needs the embedding row, embedding gradient
                // needs the filter slice; copy one side to satisfy the borrow
                let w_slice: Vec<f64> = store.value(g.weight).row(row)[k * dim..(k + 1) * dim].to_vec();
                let e_row: Vec<f64> = store.value(emb_id).row(id).to_vec();
                let gw = &mut store.grad_mut(g.weight).row_mut(row)[k * dim..(k + 1) * dim];
                for (gw, e) in gw.iter_mut().zip(&e_row) {
                    *gw += up * e;
                }
                let ge = store.grad_mut(emb_id).row_mut(id);
                for (ge, w) in ge.iter_mut().zip(&w_slice) {
                    *ge += up * w;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn bank_with(store: &mut ParamStore, d: usize, dim: usize) -> ConvBank {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        ConvBank::new(store, "t", d, dim, &mut rng)
    }

    #[test]
    fn round_robin_widths() {
        let mut store = ParamStore::new();
        let bank = bank_with(&mut store, 10, 4);
        let sizes: Vec<usize> = bank.groups.iter().map(|g| g.filters.len()).collect();
        assert_eq!(sizes, vec![4, 3, 3]);
        assert_eq!(bank.width_of(0), Some(1));
        assert_eq!(bank.width_of(4), Some(2));
        assert_eq!(bank.width_of(8), Some(3));
    }

    #[test]
    fn hand_computed_width_one() {
        // filter [1,0] over rows (2,5),(3,1) → activations 2,3
        let mut store = ParamStore::new();
        let bank = bank_with(&mut store, 1, 2);
        *store.value_mut(bank.groups[0].weight) = Matrix::from_vec(1, 2, vec![1.0, 0.0]).unwrap();
        let emb = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![2.0, 5.0], vec![3.0, 1.0]]).unwrap();
        let out = conv_relu_pool(&[2, 3], &emb, &bank, &store);
        assert_eq!(out.values, vec![3.0]);
        assert_eq!(out.argmax, vec![1]);
    }

    #[test]
    fn relu_floor_and_padding() {
        let mut store = ParamStore::new();
        let bank = bank_with(&mut store, 3, 2);
        for g in &bank.groups {
            store.value_mut(g.weight).fill(-1.0);
        }
        let emb = Matrix::from_rows(&[vec![0.0, 0.0], vec![0.0, 0.0], vec![1.0, 1.0]]).unwrap();
        let out = conv_relu_pool(&[2], &emb, &bank, &store);
        assert_eq!(out.values, vec![0.0, 0.0, 0.0]);
        // width-3 filter on a length-1 doc sees exactly one padded window
        assert_eq!(window_count(1, 3), 1);
        let pre = filter_preactivations(&[2], &emb, &[1.0; 6], 0.5, 3);
        assert_eq!(pre, vec![2.5]);
    }
}
