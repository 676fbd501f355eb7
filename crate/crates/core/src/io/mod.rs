//! Matrix files, checksums and subspace directories.
//!
//! Matrices travel as NPY (`<f4`, C order). Files ending in `.json` are read
//! as nested number arrays, which is convenient for tiny hand-written
//! fixtures. All writes go through a temporary file in the destination
//! directory followed by a rename.

pub mod npy;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use crate::bank::ConceptManifest;
use crate::embedding::{EmbeddingMatrix, EmbeddingVector};
use crate::error::{Error, Result};
use crate::subspace::ConceptSubspace;

pub use npy::NpyArray;

pub const BASIS_FILE: &str = "basis.npy";
pub const SIGMA_FILE: &str = "sigma.npy";
pub const MANIFEST_FILE: &str = "manifest.json";

/// Shape plus widened values of a matrix file.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixData {
    pub shape: Vec<usize>,
    pub values: Vec<f64>,
}

fn is_json(path: &Path) -> bool {
    path.extension()
        .is_some_and(|e| e.eq_ignore_ascii_case("json"))
}

pub fn read_matrix_data(path: &Path) -> Result<MatrixData> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    if is_json(path) {
        return parse_json_matrix(path, &bytes);
    }
    let array = npy::decode(&bytes).map_err(|m| Error::invalid_file(path, m))?;
    Ok(MatrixData {
        shape: array.shape,
        values: array.data.iter().map(|&v| f64::from(v)).collect(),
    })
}

fn parse_json_matrix(path: &Path, bytes: &[u8]) -> Result<MatrixData> {
    #[derive(serde::Deserialize)]
    #[serde(untagged)]
    enum Nested {
        Vector(Vec<f64>),
        Matrix(Vec<Vec<f64>>),
    }
    let nested: Nested = serde_json::from_slice(bytes).map_err(|e| Error::Parse {
        path: path.to_path_buf(),
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    match nested {
        Nested::Vector(values) => Ok(MatrixData {
            shape: vec![values.len()],
            values,
        }),
        Nested::Matrix(rows) => {
            let cols = rows.first().map_or(0, Vec::len);
            if let Some(bad) = rows.iter().position(|r| r.len() != cols) {
                return Err(Error::invalid_file(
                    path,
                    format!("row {bad} has {} values, expected {cols}", rows[bad].len()),
                ));
            }
            Ok(MatrixData {
                shape: vec![rows.len(), cols],
                values: rows.into_iter().flatten().collect(),
            })
        }
    }
}

/// Reads an `(n, d)` matrix; a 1-D `(d,)` file is treated as one row.
pub fn read_matrix(path: &Path) -> Result<EmbeddingMatrix> {
    let data = read_matrix_data(path)?;
    let (rows, dim) = match data.shape[..] {
        [d] => (1, d),
        [n, d] => (n, d),
        _ => {
            return Err(Error::invalid_file(
                path,
                format!("expected a 2-D matrix, found shape {:?}", data.shape),
            ))
        }
    };
    EmbeddingMatrix::from_row_major(rows, dim, data.values)
        .map_err(|e| Error::invalid_file(path, e.to_string()))
}

/// Reads a `(d,)` vector; `(1, d)` is accepted too.
pub fn read_vector(path: &Path) -> Result<EmbeddingVector> {
    let data = read_matrix_data(path)?;
    match data.shape[..] {
        [_] | [1, _] => {
            EmbeddingVector::new(data.values).map_err(|e| Error::invalid_file(path, e.to_string()))
        }
        _ => Err(Error::invalid_file(
            path,
            format!("expected a vector, found shape {:?}", data.shape),
        )),
    }
}

/// Writes `bytes` to `path` through a sibling temporary file and a rename.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let parent = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(parent).map_err(|e| Error::io(parent, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(path, e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(path, e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

pub fn write_npy(path: &Path, shape: Vec<usize>, values: &[f64]) -> Result<()> {
    let data = values.iter().map(|&v| v as f32).collect();
    let array = NpyArray::new(shape, data).map_err(|m| Error::invalid_file(path, m))?;
    write_atomic(path, &npy::encode(&array))
}

pub fn write_vector(path: &Path, v: &EmbeddingVector) -> Result<()> {
    write_npy(path, vec![v.dim()], v.as_slice())
}

pub fn write_matrix(path: &Path, m: &EmbeddingMatrix) -> Result<()> {
    write_npy(path, vec![m.rows(), m.dim()], m.as_slice())
}

/// Lowercase hex SHA-256 of a file's bytes.
pub fn sha256_file(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Resolves `path` against `base` unless it is already absolute.
pub fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}

pub(crate) fn parent_dir(path: &Path) -> &Path {
    match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    }
}

/// Writes `basis.npy`, `sigma.npy` and `manifest.json` into `dir`. An
/// existing directory is left untouched unless `force` is set.
pub fn write_subspace_dir(
    dir: &Path,
    subspace: &ConceptSubspace,
    manifest: &ConceptManifest,
    force: bool,
) -> Result<()> {
    if dir.exists() && !force {
        return Err(Error::AlreadyExists {
            path: dir.to_path_buf(),
        });
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    write_npy(
        &dir.join(BASIS_FILE),
        vec![subspace.rank(), subspace.dim()],
        subspace.basis(),
    )?;
    write_npy(
        &dir.join(SIGMA_FILE),
        vec![subspace.rank()],
        subspace.singular_values(),
    )?;
    manifest.save(&dir.join(MANIFEST_FILE))
}

/// Loads a subspace directory. The manifest is parsed but the embedding
/// checksum is not re-verified; the basis is checked against the manifest's
/// rank and dimension and for orthonormality.
pub fn read_subspace_dir(dir: &Path) -> Result<(ConceptSubspace, ConceptManifest)> {
    let manifest = ConceptManifest::read(&dir.join(MANIFEST_FILE))?;
    let basis_path = dir.join(BASIS_FILE);
    let basis = read_matrix_data(&basis_path)?;
    let sigma = read_matrix_data(&dir.join(SIGMA_FILE))?;

    if basis.shape != [manifest.rank, manifest.dim] {
        return Err(Error::invalid_file(
            &basis_path,
            format!(
                "basis shape {:?} does not match manifest rank {} and dim {}",
                basis.shape, manifest.rank, manifest.dim
            ),
        ));
    }
    let rows: Vec<Vec<f64>> = basis
        .values
        .chunks_exact(manifest.dim)
        .map(<[f64]>::to_vec)
        .collect();
    let subspace = ConceptSubspace::from_parts(
        &rows,
        sigma.values,
        manifest.concept_name.clone(),
        manifest.source,
    )
    .map_err(|e| Error::invalid_file(dir, e.to_string()))?;
    Ok((subspace, manifest))
}
