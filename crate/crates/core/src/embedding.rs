//! Embedding containers.
//!
//! Both types validate on construction (finite entries, non-empty, consistent
//! row lengths) and are immutable afterwards. Values are held in `f64`; file
//! formats store `f32` and widen on load.

use serde::Serialize;

use crate::error::{Error, Result};

fn check_finite(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(index) => Err(Error::NonFinite { index }),
        None => Ok(()),
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// A single point in embedding space, stored unnormalized.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct EmbeddingVector {
    values: Vec<f64>,
}

impl EmbeddingVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Empty("embedding vector"));
        }
        check_finite(&values)?;
        Ok(Self { values })
    }

    pub fn from_f32(values: &[f32]) -> Result<Self> {
        Self::new(values.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn dim(&self) -> usize {
        self.values.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.values
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.values
    }

    pub fn to_f32(&self) -> Vec<f32> {
        self.values.iter().map(|&v| v as f32).collect()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.values)
    }

    pub fn dot(&self, other: &EmbeddingVector) -> Result<f64> {
        self.expect_dim(other.dim(), "dot product")?;
        Ok(dot(&self.values, &other.values))
    }

    pub(crate) fn expect_dim(&self, dim: usize, context: &str) -> Result<()> {
        if self.dim() != dim {
            return Err(Error::dim_mismatch(context, dim, self.dim()));
        }
        Ok(())
    }

    /// Construction path for results of arithmetic on already-validated
    /// vectors. Finite inputs can still overflow, so this re-checks.
    pub(crate) fn from_computed(values: Vec<f64>) -> Result<Self> {
        check_finite(&values)?;
        Ok(Self { values })
    }
}

impl AsRef<[f64]> for EmbeddingVector {
    fn as_ref(&self) -> &[f64] {
        &self.values
    }
}

/// An `n x d` row-major stack of embeddings.
///
/// Rows are kept exactly as provided; there is no L2 rescaling on ingest.
/// [`EmbeddingMatrix::l2_normalized_rows`] exists for diagnostics only.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingMatrix {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
}

impl EmbeddingMatrix {
    pub fn from_row_major(rows: usize, dim: usize, data: Vec<f64>) -> Result<Self> {
        if rows == 0 {
            return Err(Error::Empty("embedding matrix"));
        }
        if dim == 0 {
            return Err(Error::Empty("embedding dimension"));
        }
        if data.len() != rows * dim {
            return Err(Error::dim_mismatch(
                "embedding matrix buffer",
                rows * dim,
                data.len(),
            ));
        }
        check_finite(&data)?;
        Ok(Self { data, rows, dim })
    }

    pub fn from_rows<R: AsRef<[f64]>>(rows: &[R]) -> Result<Self> {
        let first = rows.first().ok_or(Error::Empty("embedding matrix"))?;
        let dim = first.as_ref().len();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (i, row) in rows.iter().enumerate() {
            let row = row.as_ref();
            if row.len() != dim {
                return Err(Error::RaggedRows {
                    row: i,
                    expected: dim,
                    found: row.len(),
                });
            }
            data.extend_from_slice(row);
        }
        Self::from_row_major(rows.len(), dim, data)
    }

    pub fn from_f32(rows: usize, dim: usize, data: &[f32]) -> Result<Self> {
        Self::from_row_major(rows, dim, data.iter().map(|&v| f64::from(v)).collect())
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim)
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn is_all_zero(&self) -> bool {
        self.data.iter().all(|&v| v == 0.0)
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm(&self.data)
    }

    /// Copy with every nonzero row rescaled to unit length. Not used by any
    /// construction path; subspaces are built from the raw rows.
    pub fn l2_normalized_rows(&self) -> Self {
        let mut data = self.data.clone();
        for row in data.chunks_exact_mut(self.dim) {
            let n = norm(row);
            if n > 0.0 {
                row.iter_mut().for_each(|v| *v /= n);
            }
        }
        Self {
            data,
            rows: self.rows,
            dim: self.dim,
        }
    }

    /// Same rows in the order given by `order` (a permutation of `0..n`).
    pub fn permute_rows(&self, order: &[usize]) -> Result<Self> {
        let mut seen = vec![false; self.rows];
        if order.len() != self.rows
            || order
                .iter()
                .any(|&i| i >= self.rows || std::mem::replace(&mut seen[i], true))
        {
            return Err(Error::InvalidParameter(
                "row order is not a permutation".into(),
            ));
        }
        let mut data = Vec::with_capacity(self.data.len());
        for &i in order {
            data.extend_from_slice(self.row(i));
        }
        Ok(Self {
            data,
            rows: self.rows,
            dim: self.dim,
        })
    }
}
