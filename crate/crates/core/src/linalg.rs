//! Dense row-major matrices and small vector helpers.
//!
//! Everything here is plain `f64` with a fixed evaluation order, so results
//! are bit-reproducible across runs and worker counts.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Matrix {
    pub rows: usize,
    pub cols: usize,
    pub data: Vec<f64>,
}

impl Matrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Matrix {
            rows,
            cols,
            data: vec![0.0; rows * cols],
        }
    }

    /// Entries drawn uniformly from `[-bound, bound]`.
    pub fn uniform<R: Rng>(rows: usize, cols: usize, bound: f64, rng: &mut R) -> Self {
        let data = (0..rows * cols)
            .map(|_| rng.gen_range(-bound..=bound))
            .collect();
        Matrix { rows, cols, data }
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.data[r * self.cols + c] = v;
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    /// `self * x` for a full-width vector.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|r| dot(self.row(r), x)).collect()
    }

    /// Dot of each row segment `[offset, offset + x.len())` with `x`.
    ///
    /// Used to evaluate a block-column of the matrix against one input half;
    /// callers sum the halves so every code path rounds identically.
    pub fn matvec_cols(&self, x: &[f64], offset: usize) -> Vec<f64> {
        debug_assert!(offset + x.len() <= self.cols);
        (0..self.rows)
            .map(|r| dot(&self.row(r)[offset..offset + x.len()], x))
            .collect()
    }

    /// `self^T * y`.
    pub fn matvec_transposed(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.rows);
        let mut out = vec![0.0; self.cols];
        for (r, &yr) in y.iter().enumerate() {
            for (c, &w) in self.row(r).iter().enumerate() {
                out[c] += w * yr;
            }
        }
        out
    }

    /// Rank-one update on a column block: `self[:, offset..] += y ⊗ x`.
    pub fn add_outer(&mut self, y: &[f64], x: &[f64], offset: usize) {
        debug_assert_eq!(y.len(), self.rows);
        debug_assert!(offset + x.len() <= self.cols);
        for (r, &yr) in y.iter().enumerate() {
            let row = &mut self.data[r * self.cols + offset..r * self.cols + offset + x.len()];
            for (slot, &xc) in row.iter_mut().zip(x.iter()) {
                *slot += yr * xc;
            }
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    pub fn validate_shape(&self, what: &str, rows: usize, cols: usize) -> Result<()> {
        if self.rows != rows || self.cols != cols {
            return Err(Error::Validation(format!(
                "{what}: expected shape {rows}x{cols}, got {}x{}",
                self.rows, self.cols
            )));
        }
        if self.data.len() != self.rows * self.cols {
            return Err(Error::Validation(format!(
                "{what}: data length {} does not match shape {}x{}",
                self.data.len(),
                self.rows,
                self.cols
            )));
        }
        if !self.is_finite() {
            return Err(Error::Validation(format!("{what}: non-finite entries")));
        }
        Ok(())
    }
}

#[inline]
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let mut acc = 0.0;
    for (x, y) in a.iter().zip(b.iter()) {
        acc += x * y;
    }
    acc
}

pub fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

pub fn add_scaled(acc: &mut [f64], x: &[f64], scale: f64) {
    debug_assert_eq!(acc.len(), x.len());
    for (a, &v) in acc.iter_mut().zip(x.iter()) {
        *a += scale * v;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b.iter()).map(|(x, y)| x - y).collect()
}

/// Numerically stable logistic sigmoid.
#[inline]
pub fn sigmoid(x: f64) -> f64 {
    if x >= 0.0 {
        1.0 / (1.0 + (-x).exp())
    } else {
        let e = x.exp();
        e / (1.0 + e)
    }
}

/// `ln(1 + exp(x))` without overflow.
#[inline]
pub fn softplus(x: f64) -> f64 {
    if x > 0.0 {
        x + (-x).exp().ln_1p()
    } else {
        x.exp().ln_1p()
    }
}
