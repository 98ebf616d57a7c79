//! The convolutional sentence classifier: embed, convolve at several
//! region widths, ReLU, max-over-time pool, concatenate, dropout, dense
//! softmax.

use crate::corpus::{EmbeddingTable, TAG_COUNT};
use crate::layers::{
    conv_backward, conv_forward, embed_backward, embed_sentence, max_over_columns,
    max_over_columns_backward, ConvFilterBank, ConvGradients, ConvMap, DenseGradients,
    DenseSoftmaxLayer, DropoutMask, PooledMap,
};
use crate::numerics::{Matrix, Rng, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct CnnModel {
    pub embedding: EmbeddingTable,
    pub bank: ConvFilterBank,
    pub keep_prob: f64,
    pub output: DenseSoftmaxLayer,
}

impl CnnModel {
    pub fn new(
        vocab_len: usize,
        embedding_dim: usize,
        region_widths: &[usize],
        filters_per_width: usize,
        keep_prob: f64,
        rng: &mut Rng,
    ) -> CnnModel {
        let embedding = EmbeddingTable::random(
            vocab_len,
            embedding_dim,
            crate::corpus::EMBEDDING_INIT_SCALE,
            rng,
        );
        CnnModel::with_embedding(embedding, region_widths, filters_per_width, keep_prob, rng)
    }

    /// Builds around an existing (e.g. pre-trained) embedding table.
    pub fn with_embedding(
        embedding: EmbeddingTable,
        region_widths: &[usize],
        filters_per_width: usize,
        keep_prob: f64,
        rng: &mut Rng,
    ) -> CnnModel {
        assert!(keep_prob > 0.0 && keep_prob <= 1.0, "keep_prob in (0,1]");
        for (i, &w) in region_widths.iter().enumerate() {
            assert!(
                !region_widths[..i].contains(&w),
                "region widths must be distinct, {w} repeats"
            );
        }
        let bank = ConvFilterBank::new(region_widths, filters_per_width, embedding.dim(), rng);
        let output = DenseSoftmaxLayer::new(bank.feature_width(), TAG_COUNT, rng);
        CnnModel { embedding, bank, keep_prob, output }
    }

    /// Width of the pooled feature vector feeding the output layer.
    pub fn penultimate_width(&self) -> usize {
        self.bank.feature_width()
    }

    pub fn forward(&self, indices: &[usize], mask: &DropoutMask) -> CnnForward {
        assert!(
            indices.len() >= self.bank.max_width(),
            "sentence of {} tokens is shorter than the widest filter ({})",
            indices.len(),
            self.bank.max_width()
        );
        let sentence = embed_sentence(indices, &self.embedding);
        let mut maps = Vec::with_capacity(self.bank.layers().len());
        let mut pooled = Vec::with_capacity(self.bank.layers().len());
        let mut features = Vector::zeros(0);
        for layer in self.bank.layers() {
            let map = conv_forward(&sentence, layer);
            let pool = max_over_columns(&map.activated);
            features = features.concat(&pool.values);
            maps.push(map);
            pooled.push(pool);
        }
        let dropped = mask.apply(&features);
        let probs = self.output.forward(&dropped);
        CnnForward {
            indices: indices.to_vec(),
            sentence,
            maps,
            pooled,
            features,
            dropped,
            mask: mask.clone(),
            probs,
        }
    }

    /// Inference never touches dropout randomness.
    pub fn infer(&self, indices: &[usize]) -> Vector {
        let mask = DropoutMask::identity(self.penultimate_width());
        self.forward(indices, &mask).probs
    }

    /// Cross-entropy backward for one example. Accumulates into `grads`.
    pub fn backward(&self, fwd: &CnnForward, gold: usize, grads: &mut CnnGradients) {
        let d_dropped = self.output.backward(&fwd.dropped, &fwd.probs, gold, &mut grads.output);
        let d_features = fwd.mask.backward(&d_dropped);

        let mut d_sentence = Matrix::zeros(fwd.sentence.rows(), fwd.sentence.cols());
        let mut offset = 0;
        for (l, layer) in self.bank.layers().iter().enumerate() {
            let f = layer.filters();
            let segment = Vector::from_slice(&d_features.data()[offset..offset + f]);
            offset += f;
            let d_map =
                max_over_columns_backward(&fwd.pooled[l], &segment, fwd.maps[l].activated.rows());
            let d_s = conv_backward(&fwd.sentence, layer, &fwd.maps[l], &d_map, &mut grads.conv[l]);
            d_sentence.add_scaled(&d_s, 1.0);
        }
        embed_backward(&fwd.indices, &d_sentence, &mut grads.embedding);
    }
}

/// Forward caches for one example, kept for the backward pass.
#[derive(Debug, Clone)]
pub struct CnnForward {
    pub indices: Vec<usize>,
    pub sentence: Matrix,
    pub maps: Vec<ConvMap>,
    pub pooled: Vec<PooledMap>,
    pub features: Vector,
    pub dropped: Vector,
    pub mask: DropoutMask,
    pub probs: Vector,
}

/// Gradient container shaped like [`CnnModel`].
#[derive(Debug, Clone)]
pub struct CnnGradients {
    pub embedding: Matrix,
    pub conv: Vec<ConvGradients>,
    pub output: DenseGradients,
}

impl CnnGradients {
    pub fn zeros(model: &CnnModel) -> CnnGradients {
        CnnGradients {
            embedding: Matrix::zeros(model.embedding.vocab_len(), model.embedding.dim()),
            conv: model.bank.layers().iter().map(ConvGradients::zeros).collect(),
            output: DenseGradients::zeros(&model.output),
        }
    }
}
