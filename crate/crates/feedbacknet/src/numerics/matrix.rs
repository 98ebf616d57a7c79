//! Row-major dense matrices and vectors.

use crate::error::{Error, Result};
use crate::numerics::Rng;

/// Dense row-major matrix of 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    /// All-zero matrix. Dimensions must be at least 1x1.
    pub fn zeros(rows: usize, cols: usize) -> Self {
        assert!(rows >= 1 && cols >= 1, "matrix dims must be >= 1");
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Builds a matrix from row-major data. Rejects wrong lengths and
    /// non-finite entries.
    pub fn from_vec(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 || cols == 0 || data.len() != rows * cols {
            return Err(Error::Shape {
                op: "Matrix::from_vec",
                left: format!("{rows}x{cols}"),
                right: format!("data of length {}", data.len()),
            });
        }
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("Matrix::from_vec entry {bad}"),
            });
        }
        Ok(Matrix { rows, cols, data })
    }

    /// Convenience constructor from nested rows (used heavily in tests).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        assert!(!rows.is_empty());
        let cols = rows[0].len();
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            assert_eq!(r.len(), cols, "ragged rows");
            data.extend_from_slice(r);
        }
        Matrix::from_vec(rows.len(), cols, data)
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Matrix::zeros(n, n);
        for i in 0..n {
            m.data[i * n + i] = 1.0;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn shape(&self) -> (usize, usize) {
        (self.rows, self.cols)
    }

    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// Contiguous rows `r0..r1` as one flat slice. Row-major storage makes a
    /// band of adjacent rows a single slice, which is what the convolution
    /// window extraction relies on.
    pub fn row_band(&self, r0: usize, r1: usize) -> &[f64] {
        &self.data[r0 * self.cols..r1 * self.cols]
    }

    pub fn row_band_mut(&mut self, r0: usize, r1: usize) -> &mut [f64] {
        &mut self.data[r0 * self.cols..r1 * self.cols]
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.fill(v);
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Standard matrix product. Rejects non-conforming shapes with both
    /// operand shapes in the error.
    pub fn matmul(&self, other: &Matrix) -> Result<Matrix> {
        if self.cols != other.rows {
            return Err(Error::Shape {
                op: "matmul",
                left: format!("{}x{}", self.rows, self.cols),
                right: format!("{}x{}", other.rows, other.cols),
            });
        }
        let mut out = Matrix::zeros(self.rows, other.cols);
        // i-k-j order: the inner loop walks both `other` and `out` rows
        // contiguously.
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.data[i * self.cols + k];
                if a == 0.0 {
                    continue;
                }
                let brow = &other.data[k * other.cols..(k + 1) * other.cols];
                let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
                for (o, &b) in orow.iter_mut().zip(brow) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    /// `self * x` for a column vector `x`. Shape mismatch is programmer
    /// error on this hot path and panics.
    pub fn matvec(&self, x: &Vector) -> Vector {
        assert_eq!(self.cols, x.len(), "matvec: {}x{} * {}", self.rows, self.cols, x.len());
        let mut out = Vector::zeros(self.rows);
        for r in 0..self.rows {
            let row = self.row(r);
            let mut acc = 0.0;
            for (w, v) in row.iter().zip(x.data()) {
                acc += w * v;
            }
            out.data_mut()[r] = acc;
        }
        out
    }

    /// `self^T * x` without materializing the transpose.
    pub fn tmatvec(&self, x: &Vector) -> Vector {
        assert_eq!(self.rows, x.len(), "tmatvec: ({}x{})^T * {}", self.rows, self.cols, x.len());
        let mut out = Vector::zeros(self.cols);
        for r in 0..self.rows {
            let xr = x.data()[r];
            if xr == 0.0 {
                continue;
            }
            let row = self.row(r);
            for (o, &w) in out.data_mut().iter_mut().zip(row) {
                *o += xr * w;
            }
        }
        out
    }

    /// Rank-one accumulation `self += u * v^T`.
    pub fn add_outer(&mut self, u: &Vector, v: &Vector) {
        assert_eq!(self.rows, u.len(), "add_outer rows");
        assert_eq!(self.cols, v.len(), "add_outer cols");
        for r in 0..self.rows {
            let ur = u.data()[r];
            if ur == 0.0 {
                continue;
            }
            let row = self.row_mut(r);
            for (w, &vv) in row.iter_mut().zip(v.data()) {
                *w += ur * vv;
            }
        }
    }

    /// `self += scale * other`, elementwise.
    pub fn add_scaled(&mut self, other: &Matrix, scale: f64) {
        assert_eq!(self.shape(), other.shape(), "add_scaled shape");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }
}

/// Dense vector of 64-bit reals.
#[derive(Debug, Clone, PartialEq)]
pub struct Vector {
    data: Vec<f64>,
}

impl Vector {
    pub fn zeros(len: usize) -> Self {
        Vector {
            data: vec![0.0; len],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Result<Self> {
        if let Some(bad) = data.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite {
                context: format!("Vector::from_vec entry {bad}"),
            });
        }
        Ok(Vector { data })
    }

    /// Test/internal constructor; panics on non-finite entries.
    pub fn from_slice(data: &[f64]) -> Self {
        Vector::from_vec(data.to_vec()).expect("finite entries")
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.data[i]
    }

    pub fn set(&mut self, i: usize, v: f64) {
        self.data[i] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn dot(&self, other: &Vector) -> f64 {
        assert_eq!(self.len(), other.len(), "dot length");
        self.data.iter().zip(&other.data).map(|(a, b)| a * b).sum()
    }

    pub fn add_scaled(&mut self, other: &Vector, scale: f64) {
        assert_eq!(self.len(), other.len(), "add_scaled length");
        for (a, &b) in self.data.iter_mut().zip(&other.data) {
            *a += scale * b;
        }
    }

    /// Elementwise product, returning a new vector.
    pub fn hadamard(&self, other: &Vector) -> Vector {
        assert_eq!(self.len(), other.len(), "hadamard length");
        Vector {
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn scale(&mut self, s: f64) {
        for v in &mut self.data {
            *v *= s;
        }
    }

    /// Concatenation `[self, other]`.
    pub fn concat(&self, other: &Vector) -> Vector {
        let mut data = Vec::with_capacity(self.len() + other.len());
        data.extend_from_slice(&self.data);
        data.extend_from_slice(&other.data);
        Vector { data }
    }

    pub fn sum(&self) -> f64 {
        self.data.iter().sum()
    }
}

/// Matrix with entries i.i.d. uniform on [-scale, +scale], drawn row-major
/// from `rng`. Deterministic given the generator state.
pub fn random_uniform_init(rows: usize, cols: usize, scale: f64, rng: &mut Rng) -> Matrix {
    assert!(scale > 0.0, "scale must be positive");
    let mut m = Matrix::zeros(rows, cols);
    for v in m.data_mut() {
        *v = rng.uniform(scale);
    }
    m
}
