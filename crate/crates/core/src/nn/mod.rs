//! Numerical core: dense matrices, learnable parameters, the text
//! convolution, a small reverse-mode tape, and Adam.

mod conv;
mod embeddings;
mod matrix;
mod optim;
mod param;
mod tape;

pub use conv::{
    conv_relu_pool, filter_preactivations, window_count, ConvBank, FilterGroup, FilterLocation, Pooled, FILTER_WIDTHS,
};
pub use embeddings::{load_embeddings, random_embeddings, EMBEDDING_DIM, INIT_BOUND};
pub use matrix::Matrix;
pub use optim::{adam_step, AdamConfig};
pub use param::{glorot, uniform, ParamId, ParamStore, Parameter};
pub use tape::{dropout, dropout_mask, sigmoid, softmax_xent, NodeId, Tape};
