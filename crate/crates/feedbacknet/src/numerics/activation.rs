//! Elementwise activation functions with paired derivatives, and softmax.

use crate::numerics::Vector;

/// Activation kind. All three are total functions on finite inputs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Activation {
    Relu,
    Sigmoid,
    Tanh,
}

impl Activation {
    pub fn apply_scalar(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    x
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => 1.0 / (1.0 + (-x).exp()),
            Activation::Tanh => x.tanh(),
        }
    }

    /// Derivative evaluated at the input `x` (not at the output). The ReLU
    /// derivative at exactly 0 is defined as 0, matching the forward zero
    /// branch.
    pub fn derivative_scalar(self, x: f64) -> f64 {
        match self {
            Activation::Relu => {
                if x > 0.0 {
                    1.0
                } else {
                    0.0
                }
            }
            Activation::Sigmoid => {
                let s = self.apply_scalar(x);
                s * (1.0 - s)
            }
            Activation::Tanh => {
                let t = x.tanh();
                1.0 - t * t
            }
        }
    }

    pub fn apply(self, x: &Vector) -> Vector {
        let mut out = x.clone();
        for v in out.data_mut() {
            *v = self.apply_scalar(*v);
        }
        out
    }

    pub fn derivative(self, x: &Vector) -> Vector {
        let mut out = x.clone();
        for v in out.data_mut() {
            *v = self.derivative_scalar(*v);
        }
        out
    }
}

/// Numerically stable softmax: subtracts the max logit before
/// exponentiating, so unbounded logit magnitudes during training cannot
/// overflow.
pub fn softmax(logits: &Vector) -> Vector {
    let mut out = logits.clone();
    softmax_in_place(&mut out);
    out
}

pub fn softmax_in_place(logits: &mut Vector) {
    assert!(!logits.is_empty(), "softmax of empty vector");
    let max = logits
        .data()
        .iter()
        .fold(f64::NEG_INFINITY, |a, &b| a.max(b));
    let mut sum = 0.0;
    for v in logits.data_mut() {
        *v = (*v - max).exp();
        sum += *v;
    }
    for v in logits.data_mut() {
        *v /= sum;
    }
}
