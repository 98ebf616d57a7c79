//! The hybrid classifier: a single-width convolution extracts local
//! features, a stride-2 temporal max pool halves the sequence, and a
//! bidirectional GRU encodes it; the concatenated final states feed the
//! softmax layer through dropout.

use crate::corpus::{EmbeddingTable, TAG_COUNT};
use crate::layers::{
    bigru_backward, bigru_encode, conv_backward, conv_forward, embed_backward, embed_sentence,
    temporal_max_pool, temporal_max_pool_backward, BigruCache, ConvGradients, ConvLayer, ConvMap,
    DenseGradients, DenseSoftmaxLayer, DropoutMask, GruParameters, TemporalPool,
};
use crate::numerics::{Matrix, Rng, Vector};

#[derive(Debug, Clone, PartialEq)]
pub struct CnnGruModel {
    pub embedding: EmbeddingTable,
    pub conv: ConvLayer,
    pub gru_fwd: GruParameters,
    pub gru_bwd: GruParameters,
    pub keep_prob: f64,
    pub output: DenseSoftmaxLayer,
}

impl CnnGruModel {
    pub fn new(
        vocab_len: usize,
        embedding_dim: usize,
        conv_width: usize,
        filters: usize,
        hidden: usize,
        keep_prob: f64,
        rng: &mut Rng,
    ) -> CnnGruModel {
        let embedding = EmbeddingTable::random(
            vocab_len,
            embedding_dim,
            crate::corpus::EMBEDDING_INIT_SCALE,
            rng,
        );
        CnnGruModel::with_embedding(embedding, conv_width, filters, hidden, keep_prob, rng)
    }

    pub fn with_embedding(
        embedding: EmbeddingTable,
        conv_width: usize,
        filters: usize,
        hidden: usize,
        keep_prob: f64,
        rng: &mut Rng,
    ) -> CnnGruModel {
        assert!(keep_prob > 0.0 && keep_prob <= 1.0, "keep_prob in (0,1]");
        let conv = ConvLayer::new(conv_width, embedding.dim(), filters, rng);
        let gru_fwd = GruParameters::new(filters, hidden, rng);
        let gru_bwd = GruParameters::new(filters, hidden, rng);
        let output = DenseSoftmaxLayer::new(2 * hidden, TAG_COUNT, rng);
        CnnGruModel { embedding, conv, gru_fwd, gru_bwd, keep_prob, output }
    }

    pub fn hidden(&self) -> usize {
        self.gru_fwd.hidden()
    }

    /// Width of the concatenated bidirectional encoding.
    pub fn penultimate_width(&self) -> usize {
        2 * self.hidden()
    }

    pub fn forward(&self, indices: &[usize], mask: &DropoutMask) -> CnnGruForward {
        assert!(
            indices.len() >= self.conv.width(),
            "sentence of {} tokens is shorter than the convolution width {}; \
             the pooled sequence would be empty",
            indices.len(),
            self.conv.width()
        );
        let sentence = embed_sentence(indices, &self.embedding);
        let map = conv_forward(&sentence, &self.conv);
        let pool = temporal_max_pool(&map.activated);
        let (encoding, gru) = bigru_encode(&pool.pooled, &self.gru_fwd, &self.gru_bwd);
        let dropped = mask.apply(&encoding);
        let probs = self.output.forward(&dropped);
        CnnGruForward {
            indices: indices.to_vec(),
            sentence,
            map,
            pool,
            gru,
            encoding,
            dropped,
            mask: mask.clone(),
            probs,
        }
    }

    pub fn infer(&self, indices: &[usize]) -> Vector {
        let mask = DropoutMask::identity(self.penultimate_width());
        self.forward(indices, &mask).probs
    }

    pub fn backward(&self, fwd: &CnnGruForward, gold: usize, grads: &mut CnnGruGradients) {
        let d_dropped = self.output.backward(&fwd.dropped, &fwd.probs, gold, &mut grads.output);
        let d_encoding = fwd.mask.backward(&d_dropped);
        let d_pooled = bigru_backward(
            &self.gru_fwd,
            &self.gru_bwd,
            &fwd.gru,
            &d_encoding,
            &mut grads.gru_fwd,
            &mut grads.gru_bwd,
        );
        let d_map = temporal_max_pool_backward(&fwd.pool, &d_pooled, fwd.map.activated.rows());
        let d_sentence = conv_backward(&fwd.sentence, &self.conv, &fwd.map, &d_map, &mut grads.conv);
        embed_backward(&fwd.indices, &d_sentence, &mut grads.embedding);
    }
}

/// Forward caches for one example.
#[derive(Debug, Clone)]
pub struct CnnGruForward {
    pub indices: Vec<usize>,
    pub sentence: Matrix,
    pub map: ConvMap,
    pub pool: TemporalPool,
    pub gru: BigruCache,
    pub encoding: Vector,
    pub dropped: Vector,
    pub mask: DropoutMask,
    pub probs: Vector,
}

/// Gradient container shaped like [`CnnGruModel`].
#[derive(Debug, Clone)]
pub struct CnnGruGradients {
    pub embedding: Matrix,
    pub conv: ConvGradients,
    pub gru_fwd: GruParameters,
    pub gru_bwd: GruParameters,
    pub output: DenseGradients,
}

impl CnnGruGradients {
    pub fn zeros(model: &CnnGruModel) -> CnnGruGradients {
        CnnGruGradients {
            embedding: Matrix::zeros(model.embedding.vocab_len(), model.embedding.dim()),
            conv: ConvGradients::zeros(&model.conv),
            gru_fwd: GruParameters::zeros(model.conv.filters(), model.hidden()),
            gru_bwd: GruParameters::zeros(model.conv.filters(), model.hidden()),
            output: DenseGradients::zeros(&model.output),
        }
    }
}
