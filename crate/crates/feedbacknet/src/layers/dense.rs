//! Final projection: feature vector to class probabilities through a dense
//! layer and softmax, with the fused cross-entropy backward.

use crate::layers::glorot_scale;
use crate::numerics::{random_uniform_init, softmax, Matrix, Rng, Vector};

/// Dense weights stored `feature_dim x classes`, so logits are `W^T p + b`.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseSoftmaxLayer {
    weights: Matrix,
    bias: Vector,
}

impl DenseSoftmaxLayer {
    pub fn new(feature_dim: usize, classes: usize, rng: &mut Rng) -> DenseSoftmaxLayer {
        assert!(feature_dim >= 1 && classes >= 2);
        let scale = glorot_scale(feature_dim, classes);
        DenseSoftmaxLayer {
            weights: random_uniform_init(feature_dim, classes, scale, rng),
            bias: Vector::zeros(classes),
        }
    }

    pub fn from_parts(weights: Matrix, bias: Vector) -> DenseSoftmaxLayer {
        assert_eq!(weights.cols(), bias.len(), "one bias per class");
        DenseSoftmaxLayer { weights, bias }
    }

    pub fn feature_dim(&self) -> usize {
        self.weights.rows()
    }

    pub fn classes(&self) -> usize {
        self.weights.cols()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    pub fn bias(&self) -> &Vector {
        &self.bias
    }

    pub fn bias_mut(&mut self) -> &mut Vector {
        &mut self.bias
    }

    /// Simultaneous mutable access to both parameter tensors.
    pub fn parts_mut(&mut self) -> (&mut Matrix, &mut Vector) {
        (&mut self.weights, &mut self.bias)
    }

    /// Class probabilities for one feature vector.
    pub fn forward(&self, features: &Vector) -> Vector {
        assert_eq!(features.len(), self.feature_dim(), "feature width");
        let mut logits = self.weights.tmatvec(features);
        logits.add_scaled(&self.bias, 1.0);
        softmax(&logits)
    }

    /// Gradient of cross-entropy loss on the softmax output for the gold
    /// `label`: the logit gradient collapses to `probs - onehot(label)`.
    /// Accumulates parameter gradients and returns the feature gradient.
    pub fn backward(
        &self,
        features: &Vector,
        probs: &Vector,
        label: usize,
        grads: &mut DenseGradients,
    ) -> Vector {
        assert!(label < self.classes(), "label {label} out of range");
        assert_eq!(probs.len(), self.classes(), "probability width");
        let mut d_logits = probs.clone();
        d_logits.set(label, d_logits.get(label) - 1.0);

        grads.weights.add_outer(features, &d_logits);
        grads.bias.add_scaled(&d_logits, 1.0);
        self.weights.matvec(&d_logits)
    }
}

/// Parameter gradients for the dense layer.
#[derive(Debug, Clone)]
pub struct DenseGradients {
    pub weights: Matrix,
    pub bias: Vector,
}

impl DenseGradients {
    pub fn zeros(layer: &DenseSoftmaxLayer) -> DenseGradients {
        DenseGradients {
            weights: Matrix::zeros(layer.feature_dim(), layer.classes()),
            bias: Vector::zeros(layer.classes()),
        }
    }
}
