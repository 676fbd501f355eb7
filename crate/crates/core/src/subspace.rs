//! Concept subspaces and orthogonal projection onto them.
//!
//! A subspace is stored in factored form as `r` orthonormal basis rows `V_r`.
//! The projector `V_r^T V_r` is never materialized; projecting `e` computes
//! the coefficients `V_r e` and then expands them back through `V_r^T`.

use serde::{Deserialize, Serialize};

use crate::embedding::{dot, EmbeddingMatrix, EmbeddingVector};
use crate::error::{Error, Result};
use crate::svd::compute_svd;

/// Orthonormality tolerance for bases accepted through [`ConceptSubspace::from_parts`].
pub const ORTHONORMAL_TOLERANCE: f64 = 1e-6;

/// Relative gap `(sigma_r - sigma_{r+1}) / sigma_1` at or below which the
/// truncation boundary is reported as a spectral tie.
pub const SPECTRAL_TIE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SubspaceSource {
    TextSpanned,
    ImageSpanned,
}

impl std::fmt::Display for SubspaceSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            SubspaceSource::TextSpanned => "text-spanned",
            SubspaceSource::ImageSpanned => "image-spanned",
        })
    }
}

impl std::str::FromStr for SubspaceSource {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "text-spanned" => Ok(SubspaceSource::TextSpanned),
            "image-spanned" => Ok(SubspaceSource::ImageSpanned),
            other => Err(format!(
                "unknown source `{other}` (expected text-spanned or image-spanned)"
            )),
        }
    }
}

/// Conditions under which a subspace was built but is not uniquely defined.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum SubspaceWarning {
    /// `sigma_r` and `sigma_{r+1}` coincide, so which of the tied directions
    /// ends up in the basis depends on the SVD backend.
    SpectralTie {
        rank: usize,
        sigma_r: f64,
        sigma_next: f64,
    },
    /// The requested rank exceeds the numerical rank of the source matrix;
    /// trailing basis rows span (arbitrary) null-space directions.
    RankExceedsNumericalRank { rank: usize, numerical_rank: usize },
}

impl std::fmt::Display for SubspaceWarning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SubspaceWarning::SpectralTie {
                rank,
                sigma_r,
                sigma_next,
            } => write!(
                f,
                "spectral tie at rank {rank}: sigma_r = {sigma_r:e}, sigma_r+1 = {sigma_next:e}"
            ),
            SubspaceWarning::RankExceedsNumericalRank {
                rank,
                numerical_rank,
            } => write!(f, "rank {rank} exceeds numerical rank {numerical_rank}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConceptSubspace {
    basis: Vec<f64>,
    rank: usize,
    dim: usize,
    singular_values: Vec<f64>,
    concept_name: String,
    source: SubspaceSource,
    warnings: Vec<SubspaceWarning>,
}

impl ConceptSubspace {
    /// Assemble a subspace from stored basis rows, checking orthonormality.
    pub fn from_parts(
        basis_rows: &[Vec<f64>],
        singular_values: Vec<f64>,
        concept_name: impl Into<String>,
        source: SubspaceSource,
    ) -> Result<Self> {
        let first = basis_rows.first().ok_or(Error::Empty("subspace basis"))?;
        let dim = first.len();
        let basis = EmbeddingMatrix::from_rows(basis_rows)?;
        let rank = basis.rows();
        if rank > dim {
            return Err(Error::RankOutOfRange { rank, max: dim });
        }
        if singular_values.len() != rank {
            return Err(Error::dim_mismatch(
                "singular values per basis row",
                rank,
                singular_values.len(),
            ));
        }
        let deviation = orthonormality_deviation(basis.as_slice(), rank, dim);
        if deviation > ORTHONORMAL_TOLERANCE {
            return Err(Error::NotOrthonormal { deviation });
        }
        Ok(Self {
            basis: basis.as_slice().to_vec(),
            rank,
            dim,
            singular_values,
            concept_name: concept_name.into(),
            source,
            warnings: Vec::new(),
        })
    }

    /// Rank-0 projector, used only to check the no-op composition case.
    #[cfg(test)]
    pub(crate) fn empty(dim: usize) -> Self {
        Self {
            basis: Vec::new(),
            rank: 0,
            dim,
            singular_values: Vec::new(),
            concept_name: String::new(),
            source: SubspaceSource::TextSpanned,
            warnings: Vec::new(),
        }
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn basis_row(&self, i: usize) -> &[f64] {
        &self.basis[i * self.dim..(i + 1) * self.dim]
    }

    pub fn basis_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.basis.chunks_exact(self.dim)
    }

    /// Row-major `r x d` basis.
    pub fn basis(&self) -> &[f64] {
        &self.basis
    }

    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    pub fn concept_name(&self) -> &str {
        &self.concept_name
    }

    pub fn source(&self) -> SubspaceSource {
        self.source
    }

    pub fn warnings(&self) -> &[SubspaceWarning] {
        &self.warnings
    }

    /// Largest `|<v_i, v_j> - delta_ij|` over basis row pairs.
    pub fn orthonormality_deviation(&self) -> f64 {
        orthonormality_deviation(&self.basis, self.rank, self.dim)
    }

    /// Coordinates of `e` in the basis, `V_r e`.
    pub fn coefficients(&self, e: &[f64]) -> Vec<f64> {
        self.basis_rows().map(|row| dot(row, e)).collect()
    }

    /// `V_r^T c`, the point with basis coordinates `c`.
    pub(crate) fn expand(&self, coefficients: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.dim];
        for (row, &c) in self.basis_rows().zip(coefficients) {
            for (o, v) in out.iter_mut().zip(row) {
                *o += c * v;
            }
        }
        out
    }

    /// `V_r^T V_r e` on a raw slice whose length is already known to be `d`.
    pub(crate) fn project_slice(&self, e: &[f64]) -> Vec<f64> {
        self.expand(&self.coefficients(e))
    }

    pub fn project(&self, e: &EmbeddingVector) -> Result<EmbeddingVector> {
        project(self, e)
    }
}

fn orthonormality_deviation(basis: &[f64], rank: usize, dim: usize) -> f64 {
    let row = |i: usize| &basis[i * dim..(i + 1) * dim];
    let mut worst = 0.0f64;
    for i in 0..rank {
        for j in i..rank {
            let target = if i == j { 1.0 } else { 0.0 };
            worst = worst.max((dot(row(i), row(j)) - target).abs());
        }
    }
    worst
}

/// Subspace spanned by the top-`rank` right-singular vectors of `matrix`.
///
/// The matrix is used as given (no row normalization). Basis rows follow the
/// sign convention of [`crate::svd::compute_svd`]: each row's largest-magnitude
/// entry is positive.
pub fn build_subspace(
    matrix: &EmbeddingMatrix,
    rank: usize,
    concept_name: impl Into<String>,
    source: SubspaceSource,
) -> Result<ConceptSubspace> {
    let max = matrix.rows().min(matrix.dim());
    if rank == 0 || rank > max {
        return Err(Error::RankOutOfRange { rank, max });
    }
    if matrix.is_all_zero() {
        return Err(Error::ZeroMatrix);
    }

    let svd = compute_svd(matrix)?;
    let sigma = svd.singular_values();
    let dim = matrix.dim();

    let mut warnings = Vec::new();
    if rank < sigma.len() {
        let (sigma_r, sigma_next) = (sigma[rank - 1], sigma[rank]);
        if sigma_r - sigma_next <= SPECTRAL_TIE_TOLERANCE * sigma[0] {
            warnings.push(SubspaceWarning::SpectralTie {
                rank,
                sigma_r,
                sigma_next,
            });
        }
    }
    if rank > svd.effective_rank() {
        warnings.push(SubspaceWarning::RankExceedsNumericalRank {
            rank,
            numerical_rank: svd.effective_rank(),
        });
    }

    Ok(ConceptSubspace {
        basis: svd.right_vectors()[..rank * dim].to_vec(),
        rank,
        dim,
        singular_values: sigma[..rank].to_vec(),
        concept_name: concept_name.into(),
        source,
        warnings,
    })
}

/// Orthogonal projection of `e` onto the subspace, `V_r^T (V_r e)`.
pub fn project(subspace: &ConceptSubspace, e: &EmbeddingVector) -> Result<EmbeddingVector> {
    if e.dim() != subspace.dim() {
        return Err(Error::dim_mismatch(
            format!("projection onto `{}`", subspace.concept_name()),
            subspace.dim(),
            e.dim(),
        ));
    }
    EmbeddingVector::from_computed(subspace.project_slice(e.as_slice()))
}
