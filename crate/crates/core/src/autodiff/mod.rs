//! Reverse-mode automatic differentiation over dense [`Tensor`]s.
//!
//! A [`Tape`] records each primitive with its cached forward value. The
//! primitive set is closed: matrix products, elementwise arithmetic and
//! activations, row normalizations, and scalar reductions. That is enough to
//! differentiate the autoencoder losses through cosine similarity, graph
//! blending, row normalization, and repeated aggregation.
//!
//! [`Tensor`]: crate::tensor::Tensor

mod adam;
mod tape;

pub use adam::{adam_step, AdamConfig, AdamMoments};
pub use tape::{
    row_l2_normalize, row_sum_normalize, sigmoid, Gradients, NodeId, Tape, EPS_LOG, EPS_NORM,
};
