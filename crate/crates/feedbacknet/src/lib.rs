//! From-scratch neural text classification for customer feedback.
//!
//! `feedbacknet` implements two sentence classifiers without any machine
//! learning framework: a multi-window convolutional network and a
//! convolutional-recurrent hybrid built on bidirectional GRUs. Every layer
//! carries a hand-derived backward pass, and every gradient in the crate is
//! verifiable against a central finite-difference oracle.
//!
//! The crate is organized as a library with runnable examples (see
//! `examples/`) plus one thin command-line binary. The major pieces:
//!
//! - [`numerics`]: dense `f64` matrices/vectors, activations, softmax, the
//!   seeded RNG, and the finite-difference gradient oracle.
//! - [`corpus`]: feedback records, tokenization, vocabularies, padding and
//!   encoding, embedding-file loading, and synthetic dataset generation.
//! - [`layers`]: embedding lookup, convolution + max-over-time pooling,
//!   dropout, the dense softmax head, and the GRU cell, each with forward
//!   and backward passes.
//! - [`models`]: the two assembled classifiers, loss, and prediction.
//! - [`training`]: deterministic mini-batch SGD with dev-set monitoring and
//!   the whole-model gradient-check harness.
//! - [`evaluation`]: per-tag precision/recall/F1 with `-1` sentinels and
//!   exact accuracy under multi-label gold sets.
//! - [`checkpoint`]: versioned binary parameter snapshots and the model
//!   manifest; round-trips are bit-exact.
//!
//! Training runs are bitwise reproducible: all randomness flows from one
//! explicitly seeded generator, and batch gradients accumulate in example
//! index order.

pub mod checkpoint;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod evaluation;
pub mod layers;
pub mod models;
pub mod numerics;
pub mod training;

pub use error::{Error, Result};
