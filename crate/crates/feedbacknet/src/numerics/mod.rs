//! Dense 64-bit matrix/vector arithmetic, activation functions, and the
//! finite-difference gradient oracle.
//!
//! Everything here is deliberately plain: row-major `Vec<f64>` storage, no
//! SIMD, no sparsity. Gradient-check tolerances of 1e-4..1e-6 are unreliable
//! in 32-bit floats, so all arithmetic is `f64`.

mod activation;
mod gradcheck;
mod matrix;
mod rng;

pub use activation::{softmax, softmax_in_place, Activation};
pub use gradcheck::{finite_difference_gradient, relative_error};
pub use matrix::{random_uniform_init, Matrix, Vector};
pub use rng::Rng;
