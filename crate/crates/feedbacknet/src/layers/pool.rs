//! Max pooling: max-over-time down to one value per filter, and the
//! stride-2 temporal variant that halves the sequence for the recurrent
//! encoder. Both route gradients only to the argmax position; ties go to
//! the lowest index.

use crate::numerics::{Matrix, Vector};

/// Maximum entry and its first index.
pub fn max_over_time(c: &Vector) -> (f64, usize) {
    assert!(!c.is_empty(), "cannot pool an empty feature map");
    let mut best = c.get(0);
    let mut best_i = 0;
    for i in 1..c.len() {
        if c.get(i) > best {
            best = c.get(i);
            best_i = i;
        }
    }
    (best, best_i)
}

/// Column-wise max of a feature map, with argmax rows kept for routing.
#[derive(Debug, Clone)]
pub struct PooledMap {
    pub values: Vector,
    pub argmax_rows: Vec<usize>,
}

pub fn max_over_columns(map: &Matrix) -> PooledMap {
    let mut values = Vector::zeros(map.cols());
    let mut argmax_rows = vec![0usize; map.cols()];
    for (f, slot) in argmax_rows.iter_mut().enumerate() {
        let mut best = map.get(0, f);
        let mut best_r = 0;
        for r in 1..map.rows() {
            if map.get(r, f) > best {
                best = map.get(r, f);
                best_r = r;
            }
        }
        values.set(f, best);
        *slot = best_r;
    }
    PooledMap { values, argmax_rows }
}

/// Routes the pooled gradient back: the entire upstream value lands on the
/// argmax row of each column, zero everywhere else.
pub fn max_over_columns_backward(pooled: &PooledMap, d_values: &Vector, rows: usize) -> Matrix {
    assert_eq!(d_values.len(), pooled.values.len(), "one gradient per column");
    let mut d_map = Matrix::zeros(rows, d_values.len());
    for (f, &r) in pooled.argmax_rows.iter().enumerate() {
        d_map.set(r, f, d_values.get(f));
    }
    d_map
}

/// Non-overlapping stride-2 temporal max pool. Output row `i` is the
/// elementwise max of input rows `2i` and `2i+1`; a trailing odd row passes
/// through. `source_rows[i * cols + f]` records where each max came from.
#[derive(Debug, Clone)]
pub struct TemporalPool {
    pub pooled: Matrix,
    pub source_rows: Vec<usize>,
}

pub fn temporal_max_pool(map: &Matrix) -> TemporalPool {
    let in_rows = map.rows();
    let cols = map.cols();
    let out_rows = in_rows.div_ceil(2);
    let mut pooled = Matrix::zeros(out_rows, cols);
    let mut source_rows = vec![0usize; out_rows * cols];
    for i in 0..out_rows {
        let top = 2 * i;
        let bottom = (top + 1).min(in_rows - 1);
        for f in 0..cols {
            let (value, row) = if map.get(bottom, f) > map.get(top, f) {
                (map.get(bottom, f), bottom)
            } else {
                (map.get(top, f), top)
            };
            pooled.set(i, f, value);
            source_rows[i * cols + f] = row;
        }
    }
    TemporalPool { pooled, source_rows }
}

pub fn temporal_max_pool_backward(pool: &TemporalPool, d_pooled: &Matrix, in_rows: usize) -> Matrix {
    assert_eq!(d_pooled.shape(), pool.pooled.shape(), "upstream shape");
    let cols = d_pooled.cols();
    let mut d_map = Matrix::zeros(in_rows, cols);
    for i in 0..d_pooled.rows() {
        for f in 0..cols {
            let r = pool.source_rows[i * cols + f];
            d_map.set(r, f, d_map.get(r, f) + d_pooled.get(i, f));
        }
    }
    d_map
}
