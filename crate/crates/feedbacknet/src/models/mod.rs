//! The two end-to-end classifiers and their shared surface: prediction,
//! cross-entropy loss, gradient containers, and uniform named-tensor access
//! for the optimizer, the checkpoint format, and the gradient-check
//! harness.

mod cnn;
mod cnn_gru;

pub use cnn::{CnnForward, CnnGradients, CnnModel};
pub use cnn_gru::{CnnGruForward, CnnGruGradients, CnnGruModel};

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::corpus::{EmbeddingTable, Tag, TAG_COUNT};
use crate::error::{Error, Result};
use crate::layers::{DropoutMask, GruParameters};
use crate::numerics::{Matrix, Vector};

/// Which classifier a model or checkpoint is.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Architecture {
    Cnn,
    CnnGru,
}

impl fmt::Display for Architecture {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Architecture::Cnn => "cnn",
            Architecture::CnnGru => "cnn_gru",
        })
    }
}

impl FromStr for Architecture {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Architecture, String> {
        match s {
            "cnn" => Ok(Architecture::Cnn),
            "cnn_gru" => Ok(Architecture::CnnGru),
            other => Err(format!("unknown architecture {other:?}, expected cnn or cnn_gru")),
        }
    }
}

/// The winning class with its probability and the full distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub label: Tag,
    pub confidence: f64,
    pub distribution: Vector,
}

/// Argmax over a class distribution, lowest index winning ties. Rejects
/// inputs that are not a probability distribution.
pub fn predict(probs: &Vector) -> Result<Prediction> {
    if probs.len() != TAG_COUNT {
        return Err(Error::Numeric(format!(
            "expected {TAG_COUNT} class probabilities, got {}",
            probs.len()
        )));
    }
    let sum = probs.sum();
    if !sum.is_finite() || (sum - 1.0).abs() > 1e-6 {
        return Err(Error::Numeric(format!("distribution sums to {sum}, not 1")));
    }
    let mut best = 0;
    for i in 1..probs.len() {
        if probs.get(i) > probs.get(best) {
            best = i;
        }
    }
    Ok(Prediction {
        label: Tag::from_index(best).expect("index < TAG_COUNT"),
        confidence: probs.get(best),
        distribution: probs.clone(),
    })
}

/// `-ln(probs[gold])`, with the probability clamped at 1e-12 so the loss
/// stays finite.
pub fn cross_entropy_loss(probs: &Vector, gold: usize) -> f64 {
    assert!(gold < probs.len(), "gold label {gold} out of range");
    -probs.get(gold).max(1e-12).ln()
}

/// Either classifier behind one training/inference surface.
#[derive(Debug, Clone, PartialEq)]
// Few instances ever exist and both variants keep their bulk on the heap,
// so the stack-size spread between them is irrelevant.
#[allow(clippy::large_enum_variant)]
pub enum Model {
    Cnn(CnnModel),
    CnnGru(CnnGruModel),
}

/// Forward caches matching the model variant.
#[derive(Debug, Clone)]
pub enum ForwardCache {
    Cnn(CnnForward),
    CnnGru(CnnGruForward),
}

impl ForwardCache {
    pub fn probs(&self) -> &Vector {
        match self {
            ForwardCache::Cnn(f) => &f.probs,
            ForwardCache::CnnGru(f) => &f.probs,
        }
    }

    /// True when the forward pass stayed clear of every piecewise kink:
    /// all conv pre-activations off the ReLU hinge and all pooling maxima
    /// with a clear margin over their runner-up. Finite differences only
    /// approximate the analytic gradient on smooth neighborhoods, so the
    /// gradient-check harnesses resample inputs until this holds.
    pub fn fd_smooth(&self) -> bool {
        let off_kink = |m: &crate::layers::ConvMap| {
            m.pre_activation.data().iter().all(|v| v.abs() > 1e-3)
        };
        match self {
            ForwardCache::Cnn(f) => {
                f.maps.iter().all(off_kink)
                    && f.maps.iter().all(|m| columns_have_clear_maxima(&m.activated))
            }
            ForwardCache::CnnGru(f) => {
                if !off_kink(&f.map) {
                    return false;
                }
                let act = &f.map.activated;
                for i in 0..f.pool.pooled.rows() {
                    let top = 2 * i;
                    let bottom = (top + 1).min(act.rows() - 1);
                    if top == bottom {
                        continue;
                    }
                    for c in 0..act.cols() {
                        let (a, b) = (act.get(top, c), act.get(bottom, c));
                        if a.max(b) > 0.0 && (a - b).abs() < 1e-3 {
                            return false;
                        }
                    }
                }
                true
            }
        }
    }
}

fn columns_have_clear_maxima(activated: &Matrix) -> bool {
    for f in 0..activated.cols() {
        let mut top = f64::NEG_INFINITY;
        let mut second = f64::NEG_INFINITY;
        for r in 0..activated.rows() {
            let v = activated.get(r, f);
            if v > top {
                second = top;
                top = v;
            } else if v > second {
                second = v;
            }
        }
        // A zero max is flat under small perturbations; a positive max
        // needs a clear margin over the runner-up.
        if top > 0.0 && activated.rows() > 1 && top - second < 1e-3 {
            return false;
        }
    }
    true
}

/// Gradients matching the model variant.
#[derive(Debug, Clone)]
#[allow(clippy::large_enum_variant)]
pub enum ModelGradients {
    Cnn(CnnGradients),
    CnnGru(CnnGruGradients),
}

/// A read-only view of one named parameter tensor. Vectors report one row.
pub struct TensorView<'a> {
    pub name: String,
    pub rows: usize,
    pub cols: usize,
    pub data: &'a [f64],
}

fn gru_tensor_views<'a>(prefix: &str, p: &'a GruParameters) -> Vec<TensorView<'a>> {
    let mut out = Vec::with_capacity(9);
    for (n, m) in [
        ("w_z", &p.w_z),
        ("w_r", &p.w_r),
        ("w_c", &p.w_c),
        ("v_z", &p.v_z),
        ("v_r", &p.v_r),
        ("v_c", &p.v_c),
    ] {
        out.push(TensorView {
            name: format!("{prefix}.{n}"),
            rows: m.rows(),
            cols: m.cols(),
            data: m.data(),
        });
    }
    for (n, v) in [("b_z", &p.b_z), ("b_r", &p.b_r), ("b_c", &p.b_c)] {
        out.push(TensorView { name: format!("{prefix}.{n}"), rows: 1, cols: v.len(), data: v.data() });
    }
    out
}

fn gru_tensors_mut<'a>(prefix: &str, p: &'a mut GruParameters) -> Vec<(String, &'a mut [f64])> {
    let GruParameters { w_z, w_r, w_c, v_z, v_r, v_c, b_z, b_r, b_c } = p;
    vec![
        (format!("{prefix}.w_z"), w_z.data_mut()),
        (format!("{prefix}.w_r"), w_r.data_mut()),
        (format!("{prefix}.w_c"), w_c.data_mut()),
        (format!("{prefix}.v_z"), v_z.data_mut()),
        (format!("{prefix}.v_r"), v_r.data_mut()),
        (format!("{prefix}.v_c"), v_c.data_mut()),
        (format!("{prefix}.b_z"), b_z.data_mut()),
        (format!("{prefix}.b_r"), b_r.data_mut()),
        (format!("{prefix}.b_c"), b_c.data_mut()),
    ]
}

impl Model {
    pub fn architecture(&self) -> Architecture {
        match self {
            Model::Cnn(_) => Architecture::Cnn,
            Model::CnnGru(_) => Architecture::CnnGru,
        }
    }

    pub fn keep_prob(&self) -> f64 {
        match self {
            Model::Cnn(m) => m.keep_prob,
            Model::CnnGru(m) => m.keep_prob,
        }
    }

    pub fn embedding(&self) -> &EmbeddingTable {
        match self {
            Model::Cnn(m) => &m.embedding,
            Model::CnnGru(m) => &m.embedding,
        }
    }

    /// Scales every trainable embedding row, keeping the padding row
    /// frozen at zero. The gradient-check harnesses use this to move conv
    /// pre-activations away from the ReLU hinge, where finite differences
    /// are meaningless.
    pub fn scale_embeddings(&mut self, factor: f64) {
        let table = match self {
            Model::Cnn(m) => &mut m.embedding,
            Model::CnnGru(m) => &mut m.embedding,
        };
        table.weights_mut().scale(factor);
        table.refreeze_pad();
    }

    /// Width of the feature vector entering the output layer.
    pub fn penultimate_width(&self) -> usize {
        match self {
            Model::Cnn(m) => m.penultimate_width(),
            Model::CnnGru(m) => m.penultimate_width(),
        }
    }

    /// Minimum number of (padded) tokens a sentence must have.
    pub fn min_tokens(&self) -> usize {
        match self {
            Model::Cnn(m) => m.bank.max_width(),
            Model::CnnGru(m) => m.conv.width(),
        }
    }

    pub fn forward(&self, indices: &[usize], mask: &DropoutMask) -> ForwardCache {
        match self {
            Model::Cnn(m) => ForwardCache::Cnn(m.forward(indices, mask)),
            Model::CnnGru(m) => ForwardCache::CnnGru(m.forward(indices, mask)),
        }
    }

    /// Deterministic inference: dropout is the identity and no randomness
    /// is consulted.
    pub fn infer(&self, indices: &[usize]) -> Vector {
        match self {
            Model::Cnn(m) => m.infer(indices),
            Model::CnnGru(m) => m.infer(indices),
        }
    }

    pub fn backward(&self, cache: &ForwardCache, gold: usize, grads: &mut ModelGradients) {
        match (self, cache, grads) {
            (Model::Cnn(m), ForwardCache::Cnn(f), ModelGradients::Cnn(g)) => {
                m.backward(f, gold, g)
            }
            (Model::CnnGru(m), ForwardCache::CnnGru(f), ModelGradients::CnnGru(g)) => {
                m.backward(f, gold, g)
            }
            _ => panic!("mismatched model, cache, and gradient variants"),
        }
    }

    pub fn zero_gradients(&self) -> ModelGradients {
        match self {
            Model::Cnn(m) => ModelGradients::Cnn(CnnGradients::zeros(m)),
            Model::CnnGru(m) => ModelGradients::CnnGru(CnnGruGradients::zeros(m)),
        }
    }

    /// `theta += factor * grad` across every trainable tensor. The padding
    /// embedding row stays pinned at zero.
    pub fn apply_update(&mut self, grads: &ModelGradients, factor: f64) {
        match (self, grads) {
            (Model::Cnn(m), ModelGradients::Cnn(g)) => {
                m.embedding.weights_mut().add_scaled(&g.embedding, factor);
                m.embedding.refreeze_pad();
                for (layer, lg) in m.bank.layers_mut().iter_mut().zip(&g.conv) {
                    let (w, b) = layer.parts_mut();
                    w.add_scaled(&lg.weights, factor);
                    b.add_scaled(&lg.bias, factor);
                }
                let (w, b) = m.output.parts_mut();
                w.add_scaled(&g.output.weights, factor);
                b.add_scaled(&g.output.bias, factor);
            }
            (Model::CnnGru(m), ModelGradients::CnnGru(g)) => {
                m.embedding.weights_mut().add_scaled(&g.embedding, factor);
                m.embedding.refreeze_pad();
                let (w, b) = m.conv.parts_mut();
                w.add_scaled(&g.conv.weights, factor);
                b.add_scaled(&g.conv.bias, factor);
                m.gru_fwd.add_scaled(&g.gru_fwd, factor);
                m.gru_bwd.add_scaled(&g.gru_bwd, factor);
                let (w, b) = m.output.parts_mut();
                w.add_scaled(&g.output.weights, factor);
                b.add_scaled(&g.output.bias, factor);
            }
            _ => panic!("mismatched model and gradient variants"),
        }
    }

    /// Named parameter tensors in a fixed, documented order: embedding,
    /// conv stages, recurrent stages, output.
    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        let mut out = Vec::new();
        match self {
            Model::Cnn(m) => {
                let e = m.embedding.weights();
                out.push(TensorView {
                    name: "embedding".into(),
                    rows: e.rows(),
                    cols: e.cols(),
                    data: e.data(),
                });
                for layer in m.bank.layers() {
                    let w = layer.weights();
                    out.push(TensorView {
                        name: format!("conv{}.weights", layer.width()),
                        rows: w.rows(),
                        cols: w.cols(),
                        data: w.data(),
                    });
                    out.push(TensorView {
                        name: format!("conv{}.bias", layer.width()),
                        rows: 1,
                        cols: layer.bias().len(),
                        data: layer.bias().data(),
                    });
                }
                let w = m.output.weights();
                out.push(TensorView {
                    name: "output.weights".into(),
                    rows: w.rows(),
                    cols: w.cols(),
                    data: w.data(),
                });
                out.push(TensorView {
                    name: "output.bias".into(),
                    rows: 1,
                    cols: m.output.bias().len(),
                    data: m.output.bias().data(),
                });
            }
            Model::CnnGru(m) => {
                let e = m.embedding.weights();
                out.push(TensorView {
                    name: "embedding".into(),
                    rows: e.rows(),
                    cols: e.cols(),
                    data: e.data(),
                });
                let w = m.conv.weights();
                out.push(TensorView {
                    name: format!("conv{}.weights", m.conv.width()),
                    rows: w.rows(),
                    cols: w.cols(),
                    data: w.data(),
                });
                out.push(TensorView {
                    name: format!("conv{}.bias", m.conv.width()),
                    rows: 1,
                    cols: m.conv.bias().len(),
                    data: m.conv.bias().data(),
                });
                out.extend(gru_tensor_views("gru_fwd", &m.gru_fwd));
                out.extend(gru_tensor_views("gru_bwd", &m.gru_bwd));
                let w = m.output.weights();
                out.push(TensorView {
                    name: "output.weights".into(),
                    rows: w.rows(),
                    cols: w.cols(),
                    data: w.data(),
                });
                out.push(TensorView {
                    name: "output.bias".into(),
                    rows: 1,
                    cols: m.output.bias().len(),
                    data: m.output.bias().data(),
                });
            }
        }
        out
    }

    /// Mutable views in the same order as [`Model::tensors`]. Callers that
    /// overwrite the embedding must leave the padding row zero; bulk
    /// loaders should call this through [`Model::load_flat`] or re-pin the
    /// row themselves.
    pub fn tensors_mut(&mut self) -> Vec<(String, &mut [f64])> {
        let mut out: Vec<(String, &mut [f64])> = Vec::new();
        match self {
            Model::Cnn(m) => {
                out.push(("embedding".into(), m.embedding.weights_mut().data_mut()));
                for layer in m.bank.layers_mut() {
                    let width = layer.width();
                    let (w, b) = layer.parts_mut();
                    out.push((format!("conv{width}.weights"), w.data_mut()));
                    out.push((format!("conv{width}.bias"), b.data_mut()));
                }
                let (w, b) = m.output.parts_mut();
                out.push(("output.weights".into(), w.data_mut()));
                out.push(("output.bias".into(), b.data_mut()));
            }
            Model::CnnGru(m) => {
                out.push(("embedding".into(), m.embedding.weights_mut().data_mut()));
                let width = m.conv.width();
                let (w, b) = m.conv.parts_mut();
                out.push((format!("conv{width}.weights"), w.data_mut()));
                out.push((format!("conv{width}.bias"), b.data_mut()));
                out.extend(gru_tensors_mut("gru_fwd", &mut m.gru_fwd));
                out.extend(gru_tensors_mut("gru_bwd", &mut m.gru_bwd));
                let (w, b) = m.output.parts_mut();
                out.push(("output.weights".into(), w.data_mut()));
                out.push(("output.bias".into(), b.data_mut()));
            }
        }
        out
    }

    /// All parameters concatenated in tensor order.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for t in self.tensors() {
            out.extend_from_slice(t.data);
        }
        out
    }

    /// Inverse of [`Model::flatten`]; re-pins the padding embedding row.
    pub fn load_flat(&mut self, flat: &[f64]) {
        let mut at = 0;
        for (_, slice) in self.tensors_mut() {
            slice.copy_from_slice(&flat[at..at + slice.len()]);
            at += slice.len();
        }
        assert_eq!(at, flat.len(), "flat parameter length");
        match self {
            Model::Cnn(m) => m.embedding.refreeze_pad(),
            Model::CnnGru(m) => m.embedding.refreeze_pad(),
        }
    }

    pub fn parameter_count(&self) -> usize {
        self.tensors().iter().map(|t| t.data.len()).sum()
    }
}

impl ModelGradients {
    /// Named gradient tensors, same names and order as the model's.
    pub fn tensors(&self) -> Vec<TensorView<'_>> {
        let mut out = Vec::new();
        match self {
            ModelGradients::Cnn(g) => {
                out.push(TensorView {
                    name: "embedding".into(),
                    rows: g.embedding.rows(),
                    cols: g.embedding.cols(),
                    data: g.embedding.data(),
                });
                for cg in &g.conv {
                    // Width is recoverable from the paired model; gradient
                    // views are matched positionally, so reuse the flat
                    // width of the weight rows for the name.
                    let w = &cg.weights;
                    out.push(TensorView {
                        name: format!("conv.weights[{}x{}]", w.rows(), w.cols()),
                        rows: w.rows(),
                        cols: w.cols(),
                        data: w.data(),
                    });
                    out.push(TensorView {
                        name: "conv.bias".into(),
                        rows: 1,
                        cols: cg.bias.len(),
                        data: cg.bias.data(),
                    });
                }
                let w = &g.output.weights;
                out.push(TensorView {
                    name: "output.weights".into(),
                    rows: w.rows(),
                    cols: w.cols(),
                    data: w.data(),
                });
                out.push(TensorView {
                    name: "output.bias".into(),
                    rows: 1,
                    cols: g.output.bias.len(),
                    data: g.output.bias.data(),
                });
            }
            ModelGradients::CnnGru(g) => {
                out.push(TensorView {
                    name: "embedding".into(),
                    rows: g.embedding.rows(),
                    cols: g.embedding.cols(),
                    data: g.embedding.data(),
                });
                let w = &g.conv.weights;
                out.push(TensorView {
                    name: format!("conv.weights[{}x{}]", w.rows(), w.cols()),
                    rows: w.rows(),
                    cols: w.cols(),
                    data: w.data(),
                });
                out.push(TensorView {
                    name: "conv.bias".into(),
                    rows: 1,
                    cols: g.conv.bias.len(),
                    data: g.conv.bias.data(),
                });
                out.extend(gru_tensor_views("gru_fwd", &g.gru_fwd));
                out.extend(gru_tensor_views("gru_bwd", &g.gru_bwd));
                let w = &g.output.weights;
                out.push(TensorView {
                    name: "output.weights".into(),
                    rows: w.rows(),
                    cols: w.cols(),
                    data: w.data(),
                });
                out.push(TensorView {
                    name: "output.bias".into(),
                    rows: 1,
                    cols: g.output.bias.len(),
                    data: g.output.bias.data(),
                });
            }
        }
        out
    }

    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for t in self.tensors() {
            out.extend_from_slice(t.data);
        }
        out
    }

    pub fn is_finite(&self) -> bool {
        self.tensors().iter().all(|t| t.data.iter().all(|v| v.is_finite()))
    }
}
