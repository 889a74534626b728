//! Dense row-major tensor over `f64`.
//!
//! The models here are small (a few hundred thousand parameters), so a plain
//! `Vec<f64>` with a shape vector is all we need. Everything is stored and
//! computed in 64-bit floats; checkpoints downcast to `f32` on disk.

use crate::error::{Error, Result};

/// Dense row-major tensor. Mostly used at rank 1 and 2.
#[derive(Debug, Clone, PartialEq)]
pub struct Tensor {
    shape: Vec<usize>,
    data: Vec<f64>,
}

impl Tensor {
    /// All-zero tensor of the given shape.
    pub fn zeros(shape: &[usize]) -> Tensor {
        let n = shape.iter().product();
        Tensor {
            shape: shape.to_vec(),
            data: vec![0.0; n],
        }
    }

    /// Build a tensor from existing data. The element count must match the
    /// shape product.
    pub fn from_vec(shape: &[usize], data: Vec<f64>) -> Result<Tensor> {
        let n: usize = shape.iter().product();
        if data.len() != n {
            return Err(Error::ShapeMismatch(format!(
                "shape {:?} wants {} elements, got {}",
                shape,
                n,
                data.len()
            )));
        }
        Ok(Tensor {
            shape: shape.to_vec(),
            data,
        })
    }

    pub fn shape(&self) -> &[usize] {
        &self.shape
    }

    pub fn numel(&self) -> usize {
        self.data.len()
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    /// Number of rows of a rank-2 tensor (or length of a rank-1 tensor).
    pub fn rows(&self) -> usize {
        self.shape[0]
    }

    /// Row `r` of a rank-2 tensor as a slice.
    pub fn row(&self, r: usize) -> &[f64] {
        let cols = self.shape[1];
        &self.data[r * cols..(r + 1) * cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        let cols = self.shape[1];
        &mut self.data[r * cols..(r + 1) * cols]
    }

    /// Scalar accessor for rank-2 tensors.
    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.shape[1] + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.shape[1] + c]
    }

    /// Fill every element with `value`.
    pub fn fill(&mut self, value: f64) {
        self.data.iter_mut().for_each(|x| *x = value);
    }

    /// Error out if any element is NaN or infinite.
    pub fn check_finite(&self, context: &str) -> Result<()> {
        if self.data.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NumericalFailure {
                id: context.to_string(),
                detail: "tensor contains a non-finite element".to_string(),
            })
        }
    }
}

/// `y[r] += a * x` where `x` has the length of one row of `y`.
pub fn axpy_row(y: &mut Tensor, r: usize, a: f64, x: &[f64]) {
    for (yi, xi) in y.row_mut(r).iter_mut().zip(x) {
        *yi += a * xi;
    }
}

/// Dot product of two equal-length slices.
pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Matrix-vector product of a rank-2 tensor with a vector: `m * v`.
pub fn matvec(m: &Tensor, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.shape()[1], v.len());
    (0..m.rows()).map(|r| dot(m.row(r), v)).collect()
}

/// Transposed matrix-vector product: `m^T * v`.
pub fn matvec_t(m: &Tensor, v: &[f64]) -> Vec<f64> {
    debug_assert_eq!(m.rows(), v.len());
    let cols = m.shape()[1];
    let mut out = vec![0.0; cols];
    for (r, vr) in v.iter().enumerate() {
        for (o, mrc) in out.iter_mut().zip(m.row(r)) {
            *o += vr * mrc;
        }
    }
    out
}
