//! Embedding table with a frozen padding row, random or file-backed init.

use std::fs;
use std::path::Path;

use crate::corpus::vocab::{Vocabulary, PAD_INDEX};
use crate::error::{Error, Result};
use crate::numerics::{Matrix, Rng};

/// Default half-width for uniform embedding init.
pub const EMBEDDING_INIT_SCALE: f64 = 0.01;

/// One embedding row per vocabulary entry. Row 0 belongs to the padding
/// token: it is all zeros and never trained, so padded positions stay
/// exactly neutral.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingTable {
    weights: Matrix,
}

impl EmbeddingTable {
    /// Uniform random table in `[-scale, scale]`, padding row zeroed.
    pub fn random(vocab_len: usize, dim: usize, scale: f64, rng: &mut Rng) -> EmbeddingTable {
        assert!(vocab_len >= 2, "vocabulary must hold padding and unknown rows");
        assert!(dim > 0, "embedding dim must be positive");
        let mut weights = Matrix::zeros(vocab_len, dim);
        for r in 1..vocab_len {
            for c in 0..dim {
                weights.set(r, c, rng.uniform(scale));
            }
        }
        EmbeddingTable { weights }
    }

    /// Wraps an existing weight matrix, forcing the padding row to zero.
    pub fn from_matrix(mut weights: Matrix) -> EmbeddingTable {
        assert!(weights.rows() >= 2, "vocabulary must hold padding and unknown rows");
        weights.row_mut(PAD_INDEX).fill(0.0);
        EmbeddingTable { weights }
    }

    pub fn vocab_len(&self) -> usize {
        self.weights.rows()
    }

    pub fn dim(&self) -> usize {
        self.weights.cols()
    }

    /// The padding row is the one non-trainable row.
    pub fn is_trainable_row(&self, row: usize) -> bool {
        row != PAD_INDEX
    }

    pub fn row(&self, index: usize) -> &[f64] {
        self.weights.row(index)
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Mutable weight access for the optimizer. Callers must leave the
    /// padding row untouched; [`assert_pad_row_zero`] guards that in tests.
    pub fn weights_mut(&mut self) -> &mut Matrix {
        &mut self.weights
    }

    /// Re-pins the padding row to zero, for callers that bulk-load weight
    /// data.
    pub fn refreeze_pad(&mut self) {
        self.weights.row_mut(PAD_INDEX).fill(0.0);
    }

    pub fn assert_pad_row_zero(&self) {
        assert!(
            self.weights.row(PAD_INDEX).iter().all(|&v| v == 0.0),
            "padding embedding row must stay exactly zero"
        );
    }
}

/// Loads pre-trained vectors in text format: a `count dim` header line,
/// then `token v1 .. v_dim` per line. Vocabulary tokens absent from the
/// file get random vectors; file tokens absent from the vocabulary are
/// skipped. The padding row stays zero either way.
pub fn load_embeddings(
    path: impl AsRef<Path>,
    vocab: &Vocabulary,
    rng: &mut Rng,
) -> Result<EmbeddingTable> {
    let path = path.as_ref();
    let content = fs::read_to_string(path)?;
    let mut lines = content.lines().enumerate();

    let (_, header) = lines
        .next()
        .ok_or_else(|| Error::data(path, 1, "empty embedding file"))?;
    let header_fields: Vec<&str> = header.split_whitespace().collect();
    if header_fields.len() != 2 {
        return Err(Error::data(path, 1, "header must be `count dim`"));
    }
    let count: usize = header_fields[0]
        .parse()
        .map_err(|_| Error::data(path, 1, format!("bad vector count {:?}", header_fields[0])))?;
    let dim: usize = header_fields[1]
        .parse()
        .map_err(|_| Error::data(path, 1, format!("bad dimension {:?}", header_fields[1])))?;
    if dim == 0 {
        return Err(Error::data(path, 1, "dimension must be positive"));
    }

    let mut table = EmbeddingTable::random(vocab.len(), dim, EMBEDDING_INIT_SCALE, rng);
    let mut seen = 0usize;
    for (idx, line) in lines {
        let line_no = idx + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != dim + 1 {
            return Err(Error::data(
                path,
                line_no,
                format!("expected 1 token and {dim} values, found {} fields", fields.len()),
            ));
        }
        seen += 1;
        let token = fields[0];
        let Some(row) = vocab.lookup(token) else {
            continue;
        };
        if row == PAD_INDEX {
            continue;
        }
        for (c, raw) in fields[1..].iter().enumerate() {
            let value: f64 = raw
                .parse()
                .map_err(|_| Error::data(path, line_no, format!("bad float {raw:?}")))?;
            if !value.is_finite() {
                return Err(Error::data(path, line_no, format!("non-finite value {raw:?}")));
            }
            table.weights.set(row, c, value);
        }
    }
    if seen != count {
        return Err(Error::data(
            path,
            1,
            format!("header promises {count} vectors, file holds {seen}"),
        ));
    }
    table.assert_pad_row_zero();
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::vocab::build_vocabulary;
    use std::io::Write;

    fn small_vocab() -> Vocabulary {
        let sentence: Vec<String> = ["app", "crash", "nice"].iter().map(|s| s.to_string()).collect();
        build_vocabulary(&[sentence], 1)
    }

    #[test]
    fn random_init_zeroes_pad_and_bounds_rest() {
        let mut rng = Rng::new(11);
        let table = EmbeddingTable::random(5, 8, 0.01, &mut rng);
        assert!(table.row(PAD_INDEX).iter().all(|&v| v == 0.0));
        for r in 1..5 {
            assert!(table.row(r).iter().all(|&v| v.abs() <= 0.01));
            assert!(table.row(r).iter().any(|&v| v != 0.0));
        }
        assert!(!table.is_trainable_row(PAD_INDEX));
        assert!(table.is_trainable_row(1));
    }

    #[test]
    fn random_init_is_deterministic() {
        let a = EmbeddingTable::random(6, 4, 0.01, &mut Rng::new(3));
        let b = EmbeddingTable::random(6, 4, 0.01, &mut Rng::new(3));
        assert_eq!(a, b);
    }

    #[test]
    fn from_matrix_forces_pad_row_to_zero() {
        let mut m = Matrix::zeros(3, 2);
        m.fill(1.5);
        let table = EmbeddingTable::from_matrix(m);
        assert!(table.row(0).iter().all(|&v| v == 0.0));
        assert_eq!(table.row(2), &[1.5, 1.5]);
    }

    #[test]
    fn load_assigns_known_tokens_and_randomizes_missing() {
        let vocab = small_vocab();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "2 3").unwrap();
        writeln!(f, "app 1.0 2.0 3.0").unwrap();
        writeln!(f, "offvocab 9.0 9.0 9.0").unwrap();

        let table = load_embeddings(f.path(), &vocab, &mut Rng::new(5)).unwrap();
        assert_eq!(table.dim(), 3);
        assert_eq!(table.row(vocab.index_of("app")), &[1.0, 2.0, 3.0]);
        assert!(table.row(PAD_INDEX).iter().all(|&v| v == 0.0));
        // "crash" is not in the file, so it keeps its random init.
        let crash = table.row(vocab.index_of("crash"));
        assert!(crash.iter().all(|&v| v.abs() <= EMBEDDING_INIT_SCALE));
        assert!(crash.iter().any(|&v| v != 0.0));
    }

    #[test]
    fn load_rejects_wrong_field_count_with_line_number() {
        let vocab = small_vocab();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "1 3").unwrap();
        writeln!(f, "app 1.0 2.0").unwrap();
        let err = load_embeddings(f.path(), &vocab, &mut Rng::new(5)).unwrap_err();
        assert!(err.to_string().contains(":2:"), "{err}");
    }

    #[test]
    fn load_rejects_bad_header_and_count_mismatch() {
        let vocab = small_vocab();

        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "three 4").unwrap();
        assert!(load_embeddings(f.path(), &vocab, &mut Rng::new(1)).is_err());

        let mut g = tempfile::NamedTempFile::new().unwrap();
        writeln!(g, "5 2").unwrap();
        writeln!(g, "app 1.0 2.0").unwrap();
        let err = load_embeddings(g.path(), &vocab, &mut Rng::new(1)).unwrap_err();
        assert!(err.to_string().contains("promises 5"), "{err}");
    }

    #[test]
    fn load_rejects_non_finite_values() {
        let vocab = small_vocab();
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "1 2").unwrap();
        writeln!(f, "app nan 1.0").unwrap();
        assert!(load_embeddings(f.path(), &vocab, &mut Rng::new(1)).is_err());
    }
}
