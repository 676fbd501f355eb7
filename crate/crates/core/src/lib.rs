//! Training-free concept composition in embedding space.
//!
//! A concept subspace is spanned by the dominant right-singular vectors of a
//! matrix of text-prompt embeddings that describe variations of the concept.
//! Composite embeddings replace a reference embedding's component inside one
//! or more concept subspaces with the corresponding components of concept
//! embeddings.
//!
//! ```
//! use concept_compose::{build_subspace, compose_pair, EmbeddingMatrix, EmbeddingVector, SubspaceSource};
//!
//! let prompts = EmbeddingMatrix::from_rows(&[[2.0, 0.0, 0.0], [0.0, 1.0, 0.0]])?;
//! let subspace = build_subspace(&prompts, 1, "x-axis", SubspaceSource::TextSpanned)?;
//! let reference = EmbeddingVector::new(vec![1.0, 2.0, 3.0])?;
//! let concept = EmbeddingVector::new(vec![9.0, 8.0, 7.0])?;
//! let composite = compose_pair(&reference, &concept, &subspace)?;
//! assert_eq!(composite.as_slice(), &[9.0, 2.0, 3.0]);
//! # Ok::<(), concept_compose::Error>(())
//! ```

pub mod bank;
pub mod compose;
pub mod embedding;
pub mod error;
pub mod eval;
pub mod io;
pub mod spectrum;
pub mod subspace;
pub mod svd;

#[cfg(any(test, feature = "test-oracle"))]
pub mod oracle;

pub use bank::{
    build_concept, default_rank, load_concept_matrix, load_prompt_bank, ConceptManifest,
    PromptBank, RankClass,
};
pub use compose::{
    compose_multi, compose_multi_with, compose_pair, compose_sequential, interpolate, Binding,
    CompositionMode, CompositionPlan, CrossTerms, PlanWarning,
};
pub use embedding::{EmbeddingMatrix, EmbeddingVector};
pub use error::{Error, Result};
pub use spectrum::{spectrum_report, SpectrumReport};
pub use subspace::{build_subspace, project, ConceptSubspace, SubspaceSource, SubspaceWarning};
pub use svd::{compute_svd, SvdResult};
