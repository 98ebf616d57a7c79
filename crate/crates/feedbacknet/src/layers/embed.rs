//! Embedding lookup: token indices to a sentence matrix, and the scatter
//! backward that skips the frozen padding row.

use crate::corpus::{EmbeddingTable, PAD_INDEX};
use crate::numerics::Matrix;

/// Stacks the embedding row of each token index into a sentence matrix of
/// shape `indices.len() x dim`. Padding positions come out as zero rows
/// because the padding embedding is pinned at zero.
pub fn embed_sentence(indices: &[usize], table: &EmbeddingTable) -> Matrix {
    assert!(!indices.is_empty(), "cannot embed an empty index list");
    let mut out = Matrix::zeros(indices.len(), table.dim());
    for (pos, &index) in indices.iter().enumerate() {
        assert!(
            index < table.vocab_len(),
            "token index {index} out of range for vocabulary of {}",
            table.vocab_len()
        );
        out.row_mut(pos).copy_from_slice(table.row(index));
    }
    out
}

/// Scatters sentence-matrix gradients back onto embedding rows. Repeated
/// indices accumulate; the padding row is skipped so it stays zero and
/// untrained.
pub fn embed_backward(indices: &[usize], d_sentence: &Matrix, d_table: &mut Matrix) {
    assert_eq!(indices.len(), d_sentence.rows(), "one gradient row per token");
    for (pos, &index) in indices.iter().enumerate() {
        if index == PAD_INDEX {
            continue;
        }
        let src = d_sentence.row(pos);
        for (acc, &g) in d_table.row_mut(index).iter_mut().zip(src) {
            *acc += g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::EmbeddingTable;
    use crate::numerics::Rng;

    fn table() -> EmbeddingTable {
        let weights = Matrix::from_rows(&[
            vec![0.0, 0.0],
            vec![1.0, 2.0],
            vec![3.0, 4.0],
        ])
        .unwrap();
        EmbeddingTable::from_matrix(weights)
    }

    #[test]
    fn lookup_stacks_rows_and_zeroes_padding() {
        let t = table();
        let s = embed_sentence(&[1, 0], &t);
        assert_eq!(s.row(0), &[1.0, 2.0]);
        assert_eq!(s.row(1), &[0.0, 0.0]);
        assert_eq!(s.shape(), (2, 2));
    }

    #[test]
    fn lookup_is_pure() {
        let t = EmbeddingTable::random(10, 4, 0.01, &mut Rng::new(2));
        let a = embed_sentence(&[3, 7, 0, 7], &t);
        let b = embed_sentence(&[3, 7, 0, 7], &t);
        assert_eq!(a, b);
    }

    #[test]
    #[should_panic(expected = "out of range")]
    fn lookup_rejects_out_of_range_index() {
        embed_sentence(&[9], &table());
    }

    #[test]
    fn backward_accumulates_and_skips_padding() {
        let t = table();
        let d_sentence = Matrix::from_rows(&[
            vec![1.0, 10.0],
            vec![5.0, 5.0],
            vec![2.0, 20.0],
        ])
        .unwrap();
        let mut d_table = Matrix::zeros(t.vocab_len(), t.dim());
        embed_backward(&[2, 0, 2], &d_sentence, &mut d_table);
        assert_eq!(d_table.row(0), &[0.0, 0.0]);
        assert_eq!(d_table.row(1), &[0.0, 0.0]);
        assert_eq!(d_table.row(2), &[3.0, 30.0]);
    }
}
