use crate::error::{Error, Result};

/// A feature-major block of samples: `dim` rows, each holding one value per
/// sample in the batch.
#[derive(Debug, Clone, PartialEq)]
pub struct Batch {
    dim: usize,
    len: usize,
    data: Vec<f64>,
}

impl Batch {
    pub fn zeros(dim: usize, len: usize) -> Self {
        Self {
            dim,
            len,
            data: vec![0.0; dim * len],
        }
    }

    /// Builds a batch from per-sample vectors, all of length `dim`.
    pub fn from_samples<S: AsRef<[f64]>>(dim: usize, samples: &[S]) -> Result<Self> {
        let mut out = Self::zeros(dim, samples.len());
        for (b, s) in samples.iter().enumerate() {
            let s = s.as_ref();
            if s.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    actual: s.len(),
                });
            }
            for (f, v) in s.iter().enumerate() {
                out.data[f * out.len + b] = *v;
            }
        }
        Ok(out)
    }

    pub fn from_vector(v: &[f64]) -> Self {
        Self {
            dim: v.len(),
            len: 1,
            data: v.to_vec(),
        }
    }

    /// Stacks the rows of `top` above the rows of `bottom`.
    pub fn concat(top: &Batch, bottom: &Batch) -> Result<Self> {
        if top.len != bottom.len {
            return Err(Error::DimensionMismatch {
                expected: top.len,
                actual: bottom.len,
            });
        }
        let mut data = Vec::with_capacity(top.data.len() + bottom.data.len());
        data.extend_from_slice(&top.data);
        data.extend_from_slice(&bottom.data);
        Ok(Self {
            dim: top.dim + bottom.dim,
            len: top.len,
            data,
        })
    }

    /// Rows `start..start + dim` as a new batch.
    pub fn rows(&self, start: usize, dim: usize) -> Self {
        let lo = start * self.len;
        Self {
            dim,
            len: self.len,
            data: self.data[lo..lo + dim * self.len].to_vec(),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.len
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    pub fn row(&self, f: usize) -> &[f64] {
        &self.data[f * self.len..(f + 1) * self.len]
    }

    pub fn row_mut(&mut self, f: usize) -> &mut [f64] {
        &mut self.data[f * self.len..(f + 1) * self.len]
    }

    pub fn get(&self, f: usize, b: usize) -> f64 {
        self.data[f * self.len + b]
    }

    pub fn set(&mut self, f: usize, b: usize, v: f64) {
        self.data[f * self.len + b] = v;
    }

    pub fn sample(&self, b: usize) -> Vec<f64> {
        (0..self.dim).map(|f| self.get(f, b)).collect()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }
}
