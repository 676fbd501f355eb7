//! Prompt banks, concept manifests and the rank defaults.
//!
//! A prompt bank is the verbatim list of texts describing variations of one
//! concept. Banks are not generated here; they arrive as JSON files:
//!
//! ```json
//! {"concept_name": "outfit", "rank_class": "low-variation",
//!  "prompts": ["a red dress", "a tweed jacket"], "provenance": "..."}
//! ```
//!
//! A standard bank holds about 150 prompts; concepts that need a larger
//! subspace (inserting an object, for instance) are better served by around
//! 500. These sizes are advisory and not enforced.

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingMatrix;
use crate::error::{Error, Result};
use crate::io::{self, parent_dir, resolve, sha256_file};
use crate::subspace::{build_subspace, ConceptSubspace, SubspaceSource};

/// Default rank for concepts with little visual variation (outfits, for example).
pub const LOW_VARIATION_RANK: usize = 30;
/// Default rank for concepts with high visual variation (patterns, for example).
pub const HIGH_VARIATION_RANK: usize = 120;

pub const STANDARD_BANK_SIZE: usize = 150;
pub const LARGE_BANK_SIZE: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RankClass {
    LowVariation,
    HighVariation,
    Custom,
}

impl std::str::FromStr for RankClass {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        match s {
            "low-variation" => Ok(RankClass::LowVariation),
            "high-variation" => Ok(RankClass::HighVariation),
            "custom" => Ok(RankClass::Custom),
            other => Err(format!(
                "unknown rank class `{other}` (expected low-variation, high-variation or custom)"
            )),
        }
    }
}

/// Rank for a class; `explicit` is only consulted for [`RankClass::Custom`].
pub fn default_rank(class: RankClass, explicit: Option<usize>) -> Result<usize> {
    match class {
        RankClass::LowVariation => Ok(LOW_VARIATION_RANK),
        RankClass::HighVariation => Ok(HIGH_VARIATION_RANK),
        RankClass::Custom => explicit.ok_or(Error::CustomRankRequired),
    }
}

#[derive(Debug, Deserialize)]
struct BankFile {
    concept_name: String,
    rank_class: RankClass,
    prompts: Vec<String>,
    #[serde(default)]
    provenance: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PromptBank {
    pub concept_name: String,
    pub rank_class: RankClass,
    prompts: Vec<String>,
    pub provenance: String,
    duplicates_dropped: usize,
}

impl PromptBank {
    pub fn prompts(&self) -> &[String] {
        &self.prompts
    }

    pub fn len(&self) -> usize {
        self.prompts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prompts.is_empty()
    }

    /// Exact duplicates removed at load time (first occurrence kept).
    pub fn duplicates_dropped(&self) -> usize {
        self.duplicates_dropped
    }

    pub fn from_json(path: &Path, text: &str) -> Result<Self> {
        let raw: BankFile = serde_json::from_str(text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        if raw.prompts.is_empty() {
            return Err(Error::EmptyBank {
                path: path.to_path_buf(),
            });
        }
        if let Some(index) = raw.prompts.iter().position(|p| p.trim().is_empty()) {
            return Err(Error::EmptyPrompt {
                path: path.to_path_buf(),
                index,
            });
        }
        let total = raw.prompts.len();
        let mut seen = HashSet::with_capacity(total);
        let prompts: Vec<String> = raw
            .prompts
            .into_iter()
            .filter(|p| seen.insert(p.clone()))
            .collect();
        Ok(Self {
            concept_name: raw.concept_name,
            rank_class: raw.rank_class,
            duplicates_dropped: total - prompts.len(),
            prompts,
            provenance: raw.provenance,
        })
    }
}

pub fn load_prompt_bank(path: &Path) -> Result<PromptBank> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    PromptBank::from_json(path, &text)
}

/// Everything needed to rebuild a concept subspace, plus the SHA-256 of the
/// embedding file it was built from. Relative paths resolve against the
/// directory holding the manifest.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConceptManifest {
    pub concept_name: String,
    pub prompt_bank_path: PathBuf,
    pub embedding_matrix_path: PathBuf,
    pub rank: usize,
    pub source: SubspaceSource,
    pub dim: usize,
    pub checksum: String,
}

impl ConceptManifest {
    pub fn save(&self, path: &Path) -> Result<()> {
        let mut text = serde_json::to_string_pretty(self)?;
        text.push('\n');
        io::write_atomic(path, text.as_bytes())
    }

    /// Parses a manifest without touching the files it references.
    pub fn read(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        serde_json::from_str(&text).map_err(|e| Error::Parse {
            path: path.to_path_buf(),
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })
    }

    /// Parses a manifest and verifies the embedding file checksum. Stored
    /// paths are returned verbatim; see [`ConceptManifest::resolved_against`].
    pub fn load(path: &Path) -> Result<Self> {
        let manifest = Self::read(path)?;
        manifest
            .resolved_against(parent_dir(path))
            .verify_checksum()?;
        Ok(manifest)
    }

    /// Copy with relative paths joined onto `base`.
    pub fn resolved_against(&self, base: &Path) -> Self {
        Self {
            prompt_bank_path: resolve(base, &self.prompt_bank_path),
            embedding_matrix_path: resolve(base, &self.embedding_matrix_path),
            ..self.clone()
        }
    }

    pub fn verify_checksum(&self) -> Result<()> {
        let found = sha256_file(&self.embedding_matrix_path)?;
        if found != self.checksum {
            return Err(Error::ChecksumMismatch {
                path: self.embedding_matrix_path.clone(),
                expected: self.checksum.clone(),
                found,
            });
        }
        Ok(())
    }
}

/// Verifies the checksum and loads the embedding matrix named by `manifest`,
/// checking it against the bank size and the declared dimension. Relative
/// paths resolve against the working directory.
pub fn load_concept_matrix(manifest: &ConceptManifest) -> Result<EmbeddingMatrix> {
    manifest.verify_checksum()?;
    let bank = load_prompt_bank(&manifest.prompt_bank_path)?;
    let matrix = io::read_matrix(&manifest.embedding_matrix_path)?;
    if matrix.rows() != bank.len() {
        return Err(Error::BankMatrixMismatch {
            bank_prompts: bank.len(),
            matrix_rows: matrix.rows(),
        });
    }
    if matrix.dim() != manifest.dim {
        return Err(Error::dim_mismatch(
            format!(
                "embedding matrix {}",
                manifest.embedding_matrix_path.display()
            ),
            manifest.dim,
            matrix.dim(),
        ));
    }
    Ok(matrix)
}

pub fn build_concept(manifest: &ConceptManifest) -> Result<ConceptSubspace> {
    build_subspace(
        &load_concept_matrix(manifest)?,
        manifest.rank,
        manifest.concept_name.clone(),
        manifest.source,
    )
}
