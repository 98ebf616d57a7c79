//! Convolution over sentence matrices: a filter of width `h` slides down
//! the rows, taking a dot product with each `h x k` window, plus bias and
//! ReLU.

use crate::layers::glorot_scale;
use crate::numerics::{random_uniform_init, Activation, Matrix, Rng, Vector};

/// Filters of one region width. Each filter is stored as a flattened
/// `width * k` row, so a window dot product is a single slice dot.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvLayer {
    width: usize,
    input_cols: usize,
    weights: Matrix,
    bias: Vector,
}

impl ConvLayer {
    pub fn new(width: usize, input_cols: usize, filters: usize, rng: &mut Rng) -> ConvLayer {
        assert!(width >= 1 && input_cols >= 1 && filters >= 1);
        let scale = glorot_scale(width * input_cols, filters);
        ConvLayer {
            width,
            input_cols,
            weights: random_uniform_init(filters, width * input_cols, scale, rng),
            bias: Vector::zeros(filters),
        }
    }

    pub fn from_parts(width: usize, input_cols: usize, weights: Matrix, bias: Vector) -> ConvLayer {
        assert_eq!(weights.cols(), width * input_cols, "flattened window width");
        assert_eq!(weights.rows(), bias.len(), "one bias per filter");
        ConvLayer { width, input_cols, weights, bias }
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn input_cols(&self) -> usize {
        self.input_cols
    }

    pub fn filters(&self) -> usize {
        self.weights.rows()
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
}

/// One [`ConvLayer`] per region width, all over the same input columns.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvFilterBank {
    layers: Vec<ConvLayer>,
}

impl ConvFilterBank {
    pub fn new(
        region_widths: &[usize],
        filters_per_width: usize,
        input_cols: usize,
        rng: &mut Rng,
    ) -> ConvFilterBank {
        assert!(!region_widths.is_empty(), "need at least one region width");
        let layers = region_widths
            .iter()
            .map(|&w| ConvLayer::new(w, input_cols, filters_per_width, rng))
            .collect();
        ConvFilterBank { layers }
    }

    pub fn from_layers(layers: Vec<ConvLayer>) -> ConvFilterBank {
        assert!(!layers.is_empty());
        ConvFilterBank { layers }
    }

    pub fn layers(&self) -> &[ConvLayer] {
        &self.layers
    }

    pub fn layers_mut(&mut self) -> &mut [ConvLayer] {
        &mut self.layers
    }

    pub fn max_width(&self) -> usize {
        self.layers.iter().map(ConvLayer::width).max().unwrap()
    }

    /// Total pooled feature width: one value per filter.
    pub fn feature_width(&self) -> usize {
        self.layers.iter().map(ConvLayer::filters).sum()
    }
}

/// Forward result: pre-activation kept for the ReLU derivative.
#[derive(Debug, Clone)]
pub struct ConvMap {
    pub pre_activation: Matrix,
    pub activated: Matrix,
}

/// Slides every filter down the sentence. Output has `n - width + 1` rows
/// and one column per filter.
pub fn conv_forward(sentence: &Matrix, layer: &ConvLayer) -> ConvMap {
    assert_eq!(sentence.cols(), layer.input_cols(), "embedding width");
    let n = sentence.rows();
    let h = layer.width();
    assert!(n >= h, "sentence of {n} rows is shorter than filter width {h}");
    let positions = n - h + 1;
    let filters = layer.filters();

    let mut pre = Matrix::zeros(positions, filters);
    for i in 0..positions {
        let window = sentence.row_band(i, i + h);
        let out = pre.row_mut(i);
        for (f, slot) in out.iter_mut().enumerate().take(filters) {
            let mut acc = layer.bias().get(f);
            for (w, x) in layer.weights().row(f).iter().zip(window) {
                acc += w * x;
            }
            *slot = acc;
        }
    }
    let mut activated = pre.clone();
    for v in activated.data_mut() {
        *v = Activation::Relu.apply_scalar(*v);
    }
    ConvMap { pre_activation: pre, activated }
}

/// Parameter gradients for one conv layer.
#[derive(Debug, Clone)]
pub struct ConvGradients {
    pub weights: Matrix,
    pub bias: Vector,
}

impl ConvGradients {
    pub fn zeros(layer: &ConvLayer) -> ConvGradients {
        ConvGradients {
            weights: Matrix::zeros(layer.weights().rows(), layer.weights().cols()),
            bias: Vector::zeros(layer.bias().len()),
        }
    }
}

/// Backward pass. `d_activated` is the loss gradient at the post-ReLU map;
/// returns the sentence gradient and accumulates parameter gradients.
pub fn conv_backward(
    sentence: &Matrix,
    layer: &ConvLayer,
    map: &ConvMap,
    d_activated: &Matrix,
    grads: &mut ConvGradients,
) -> Matrix {
    assert_eq!(d_activated.shape(), map.activated.shape(), "upstream shape");
    let h = layer.width();
    let positions = map.activated.rows();
    let mut d_sentence = Matrix::zeros(sentence.rows(), sentence.cols());

    for i in 0..positions {
        let window = sentence.row_band(i, i + h);
        for f in 0..layer.filters() {
            // ReLU derivative at exactly 0 is 0.
            if map.pre_activation.get(i, f) <= 0.0 {
                continue;
            }
            let g = d_activated.get(i, f);
            if g == 0.0 {
                continue;
            }
            grads.bias.set(f, grads.bias.get(f) + g);
            for (wg, &x) in grads.weights.row_mut(f).iter_mut().zip(window) {
                *wg += g * x;
            }
            let band = d_sentence.row_band_mut(i, i + h);
            for (d, &w) in band.iter_mut().zip(layer.weights().row(f)) {
                *d += g * w;
            }
        }
    }
    d_sentence
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{finite_difference_gradient, relative_error};

    /// Independent sliding-window oracle: explicit loops over filters,
    /// positions, window rows, and columns.
    fn conv_oracle(sentence: &Matrix, layer: &ConvLayer) -> Matrix {
        let h = layer.width();
        let k = layer.input_cols();
        let positions = sentence.rows() - h + 1;
        let mut out = Matrix::zeros(positions, layer.filters());
        for f in 0..layer.filters() {
            for i in 0..positions {
                let mut acc = layer.bias().get(f);
                for dr in 0..h {
                    for c in 0..k {
                        acc += layer.weights().get(f, dr * k + c) * sentence.get(i + dr, c);
                    }
                }
                out.set(i, f, acc.max(0.0));
            }
        }
        out
    }

    fn identity_pair_filter() -> ConvLayer {
        // w = [[1,0],[0,1]] flattened over a 2x2 window.
        ConvLayer::from_parts(
            2,
            2,
            Matrix::from_rows(&[vec![1.0, 0.0, 0.0, 1.0]]).unwrap(),
            Vector::zeros(1),
        )
    }

    #[test]
    fn known_windows_dot_products() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let map = conv_forward(&s, &identity_pair_filter());
        assert_eq!(map.pre_activation.data(), &[5.0, 9.0]);
        assert_eq!(map.activated.data(), &[5.0, 9.0]);
    }

    #[test]
    fn negative_bias_clips_through_relu() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0], vec![5.0, 6.0]]).unwrap();
        let mut layer = identity_pair_filter();
        layer.bias_mut().set(0, -6.0);
        let map = conv_forward(&s, &layer);
        assert_eq!(map.pre_activation.data(), &[-1.0, 3.0]);
        assert_eq!(map.activated.data(), &[0.0, 3.0]);
    }

    #[test]
    fn full_width_filter_gives_single_position() {
        let mut rng = Rng::new(3);
        let s = random_uniform_init(4, 3, 1.0, &mut rng);
        let layer = ConvLayer::new(4, 3, 2, &mut rng);
        let map = conv_forward(&s, &layer);
        assert_eq!(map.activated.shape(), (1, 2));
    }

    #[test]
    fn matches_naive_oracle_on_random_pairs() {
        let mut rng = Rng::new(17);
        for _ in 0..50 {
            let k = 1 + rng.below(6);
            let h = 1 + rng.below(3);
            let n = h + rng.below(6);
            let filters = 1 + rng.below(4);
            let s = random_uniform_init(n, k, 1.0, &mut rng);
            let layer = ConvLayer::new(h, k, filters, &mut rng);
            let got = conv_forward(&s, &layer);
            let want = conv_oracle(&s, &layer);
            for (g, w) in got.activated.data().iter().zip(want.data()) {
                assert!((g - w).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn zero_window_contributes_only_bias() {
        let s = Matrix::zeros(5, 3);
        let mut rng = Rng::new(9);
        let mut layer = ConvLayer::new(2, 3, 2, &mut rng);
        layer.bias_mut().set(0, 0.25);
        layer.bias_mut().set(1, -0.25);
        let map = conv_forward(&s, &layer);
        for i in 0..map.pre_activation.rows() {
            assert_eq!(map.pre_activation.get(i, 0), 0.25);
            assert_eq!(map.pre_activation.get(i, 1), -0.25);
            assert_eq!(map.activated.get(i, 1), 0.0);
        }
    }

    #[test]
    fn init_scale_follows_fan_in_fan_out() {
        let mut rng = Rng::new(4);
        let layer = ConvLayer::new(3, 8, 4, &mut rng);
        let bound = (6.0_f64 / (3.0 * 8.0 + 4.0)).sqrt();
        assert!(layer.weights().data().iter().all(|v| v.abs() <= bound));
        assert!(layer.bias().data().iter().all(|&v| v == 0.0));
    }

    /// Packs (sentence, weights, bias) into one parameter vector, scores the
    /// activated map against fixed coefficients, and compares the analytic
    /// gradient of every coordinate with the finite-difference oracle.
    #[test]
    fn gradients_match_finite_differences() {
        let mut rng = Rng::new(31);
        let mut checked = 0;
        while checked < 20 {
            let k = 1 + rng.below(4);
            let h = 1 + rng.below(3);
            let n = h + rng.below(4);
            let filters = 1 + rng.below(4);
            let sentence = random_uniform_init(n, k, 1.0, &mut rng);
            let layer = ConvLayer::new(h, k, filters, &mut rng);

            // Resample configurations whose pre-activations sit near the ReLU
            // kink, where the central difference is meaningless.
            let probe = conv_forward(&sentence, &layer);
            if probe.pre_activation.data().iter().any(|v| v.abs() < 1e-3) {
                continue;
            }
            checked += 1;

            let coeffs = random_uniform_init(n - h + 1, filters, 1.0, &mut rng);
            let n_s = sentence.data().len();
            let n_w = layer.weights().data().len();
            let mut theta: Vec<f64> = Vec::new();
            theta.extend_from_slice(sentence.data());
            theta.extend_from_slice(layer.weights().data());
            theta.extend_from_slice(layer.bias().data());

            let loss = |t: &[f64]| {
                let s = Matrix::from_vec(n, k, t[..n_s].to_vec()).unwrap();
                let l = ConvLayer::from_parts(
                    h,
                    k,
                    Matrix::from_vec(filters, h * k, t[n_s..n_s + n_w].to_vec()).unwrap(),
                    Vector::from_slice(&t[n_s + n_w..]),
                );
                let map = conv_forward(&s, &l);
                map.activated
                    .data()
                    .iter()
                    .zip(coeffs.data())
                    .map(|(a, c)| a * c)
                    .sum()
            };
            let numeric = finite_difference_gradient(loss, &theta, 1e-4).unwrap();

            let mut grads = ConvGradients::zeros(&layer);
            let d_sentence = conv_backward(&sentence, &layer, &probe, &coeffs, &mut grads);
            let mut analytic: Vec<f64> = Vec::new();
            analytic.extend_from_slice(d_sentence.data());
            analytic.extend_from_slice(grads.weights.data());
            analytic.extend_from_slice(grads.bias.data());

            for (i, (&a, &n_)) in analytic.iter().zip(numeric.data()).enumerate() {
                let err = relative_error(a, n_);
                assert!(err < 1e-4, "coordinate {i}: analytic {a}, numeric {n_}, err {err}");
            }
        }
    }
}
