//! Inverted dropout on the penultimate feature vector. Surviving entries
//! are scaled by `1/keep_prob` at train time so inference needs no
//! rescaling and is the identity.

use crate::numerics::{Rng, Vector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DropoutMode {
    Train,
    Infer,
}

/// A sampled mask: each entry is either `0` or `1/keep_prob`. Forward and
/// backward are the same elementwise product, so one mask serves both.
#[derive(Debug, Clone)]
pub struct DropoutMask {
    scales: Vec<f64>,
}

impl DropoutMask {
    pub fn sample(len: usize, keep_prob: f64, mode: DropoutMode, rng: &mut Rng) -> DropoutMask {
        assert!(
            keep_prob > 0.0 && keep_prob <= 1.0,
            "keep_prob must be in (0, 1], got {keep_prob}"
        );
        let scales = match mode {
            DropoutMode::Infer => vec![1.0; len],
            DropoutMode::Train => {
                let boost = 1.0 / keep_prob;
                (0..len)
                    .map(|_| if rng.chance(keep_prob) { boost } else { 0.0 })
                    .collect()
            }
        };
        DropoutMask { scales }
    }

    pub fn identity(len: usize) -> DropoutMask {
        DropoutMask { scales: vec![1.0; len] }
    }

    pub fn apply(&self, v: &Vector) -> Vector {
        assert_eq!(v.len(), self.scales.len(), "mask length");
        let mut out = v.clone();
        for (o, &s) in out.data_mut().iter_mut().zip(&self.scales) {
            *o *= s;
        }
        out
    }

    /// The layer is elementwise linear, so the backward pass reuses the
    /// forward scaling.
    pub fn backward(&self, d_out: &Vector) -> Vector {
        self.apply(d_out)
    }

    pub fn scales(&self) -> &[f64] {
        &self.scales
    }
}

/// Samples a mask and applies it, returning both so the caller can reuse
/// the mask in the backward pass.
pub fn dropout_apply(
    v: &Vector,
    keep_prob: f64,
    mode: DropoutMode,
    rng: &mut Rng,
) -> (Vector, DropoutMask) {
    let mask = DropoutMask::sample(v.len(), keep_prob, mode, rng);
    (mask.apply(v), mask)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn keep_prob_one_is_identity_in_both_modes() {
        let v = Vector::from_slice(&[1.0, -2.0, 0.5]);
        let mut rng = Rng::new(1);
        let (train, _) = dropout_apply(&v, 1.0, DropoutMode::Train, &mut rng);
        let (infer, _) = dropout_apply(&v, 1.0, DropoutMode::Infer, &mut rng);
        assert_eq!(train, v);
        assert_eq!(infer, v);
    }

    #[test]
    fn infer_mode_is_identity_at_any_keep_prob() {
        let v = Vector::from_slice(&[3.0, 4.0]);
        let mut rng = Rng::new(2);
        let (out, _) = dropout_apply(&v, 0.5, DropoutMode::Infer, &mut rng);
        assert_eq!(out, v);
    }

    #[test]
    fn train_mode_zeroes_or_doubles_at_half_keep() {
        let v = Vector::from_slice(&[1.0; 64]);
        let mut rng = Rng::new(3);
        let (out, mask) = dropout_apply(&v, 0.5, DropoutMode::Train, &mut rng);
        for (&o, &s) in out.data().iter().zip(mask.scales()) {
            assert!(o == 0.0 || o == 2.0);
            assert_eq!(o, s);
        }
        assert!(out.data().contains(&0.0));
        assert!(out.data().contains(&2.0));
    }

    #[test]
    fn inverted_scaling_is_unbiased() {
        // Monte Carlo estimate of E[dropout(1.0)] over 10^5 trials.
        let mut rng = Rng::new(4);
        let trials = 100_000;
        let mut total = 0.0;
        for _ in 0..trials {
            let mask = DropoutMask::sample(1, 0.5, DropoutMode::Train, &mut rng);
            total += mask.scales()[0];
        }
        let mean = total / trials as f64;
        assert!((0.98..=1.02).contains(&mean), "mean {mean}");
    }

    #[test]
    fn backward_uses_the_same_mask() {
        let v = Vector::from_slice(&[1.0, 1.0, 1.0, 1.0]);
        let mut rng = Rng::new(5);
        let (_, mask) = dropout_apply(&v, 0.5, DropoutMode::Train, &mut rng);
        let d = mask.backward(&Vector::from_slice(&[1.0, 2.0, 3.0, 4.0]));
        for (i, &s) in mask.scales().iter().enumerate() {
            assert_eq!(d.get(i), s * (i as f64 + 1.0));
        }
    }

    #[test]
    #[should_panic(expected = "keep_prob")]
    fn zero_keep_prob_is_rejected() {
        DropoutMask::sample(3, 0.0, DropoutMode::Train, &mut Rng::new(6));
    }
}
