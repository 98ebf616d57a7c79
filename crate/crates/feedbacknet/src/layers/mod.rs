//! Differentiable building blocks. Every forward operation here has a
//! hand-derived backward partner, and each pair is checked against the
//! finite-difference oracle in its unit tests.

mod conv;
mod dense;
mod dropout;
mod embed;
mod gru;
mod pool;

pub use conv::{conv_backward, conv_forward, ConvFilterBank, ConvGradients, ConvLayer, ConvMap};
pub use dense::{DenseGradients, DenseSoftmaxLayer};
pub use dropout::{dropout_apply, DropoutMask, DropoutMode};
pub use embed::{embed_backward, embed_sentence};
pub use gru::{
    bigru_backward, bigru_encode, gru_step, gru_step_backward, BigruCache, GruParameters,
    GruStepCache,
};
pub use pool::{
    max_over_columns, max_over_columns_backward, max_over_time, temporal_max_pool,
    temporal_max_pool_backward, PooledMap, TemporalPool,
};

/// Uniform init half-width that keeps activations variance-stable:
/// `sqrt(6 / (fan_in + fan_out))`.
pub fn glorot_scale(fan_in: usize, fan_out: usize) -> f64 {
    assert!(fan_in > 0 && fan_out > 0);
    (6.0 / (fan_in + fan_out) as f64).sqrt()
}
