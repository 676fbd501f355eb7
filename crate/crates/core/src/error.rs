use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },

    #[error("{0} must not be empty")]
    Empty(&'static str),

    #[error("row {row} has length {found}, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        found: usize,
    },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimMismatch {
        context: String,
        expected: usize,
        found: usize,
    },

    #[error("rank {rank} out of range: must satisfy 1 <= rank <= {max} (min(n, d) of the source matrix)")]
    RankOutOfRange { rank: usize, max: usize },

    #[error("embedding matrix is all zeros; no subspace can be defined")]
    ZeroMatrix,

    #[error("SVD did not converge for a {rows}x{cols} matrix")]
    SvdNonConvergence { rows: usize, cols: usize },

    #[error("basis rows are not orthonormal (max deviation {deviation:.3e})")]
    NotOrthonormal { deviation: f64 },

    #[error("composition plan has no bindings")]
    EmptyPlan,

    #[error("interpolation weight {0} is outside [0, 1]")]
    AlphaOutOfRange(f64),

    #[error("similarity is undefined for a zero vector ({0})")]
    ZeroVector(&'static str),

    #[error("rank class `custom` requires an explicit rank")]
    CustomRankRequired,

    #[error(
        "benchmark does not fit: {concepts} concepts x rank {rank} + 2 x {residual} residual dims = {needed} > dim {dim}"
    )]
    BudgetOverflow {
        concepts: usize,
        rank: usize,
        residual: usize,
        needed: usize,
        dim: usize,
    },

    #[error("invalid benchmark parameter: {0}")]
    InvalidParameter(String),

    #[error("{path}: line {line}, column {column}: {message}")]
    Parse {
        path: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("{path}: {message}")]
    InvalidFile { path: PathBuf, message: String },

    #[error("{path}: prompt bank has no prompts")]
    EmptyBank { path: PathBuf },

    #[error("{path}: prompt {index} is empty")]
    EmptyPrompt { path: PathBuf, index: usize },

    #[error("bank has {bank_prompts} prompts but embedding matrix has {matrix_rows} rows")]
    BankMatrixMismatch {
        bank_prompts: usize,
        matrix_rows: usize,
    },

    #[error("{path}: checksum mismatch (expected {expected}, found {found})")]
    ChecksumMismatch {
        path: PathBuf,
        expected: String,
        found: String,
    },

    #[error("{path} already exists")]
    AlreadyExists { path: PathBuf },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable identifier for the variant.
    pub fn code(&self) -> &'static str {
        match self {
            Error::NonFinite { .. } => "non_finite",
            Error::Empty(_) => "empty_input",
            Error::RaggedRows { .. } => "ragged_rows",
            Error::DimMismatch { .. } => "dim_mismatch",
            Error::RankOutOfRange { .. } => "rank_out_of_range",
            Error::ZeroMatrix => "zero_matrix",
            Error::SvdNonConvergence { .. } => "svd_non_convergence",
            Error::NotOrthonormal { .. } => "not_orthonormal",
            Error::EmptyPlan => "empty_plan",
            Error::AlphaOutOfRange(_) => "alpha_out_of_range",
            Error::ZeroVector(_) => "zero_vector",
            Error::CustomRankRequired => "custom_rank_required",
            Error::BudgetOverflow { .. } => "budget_overflow",
            Error::InvalidParameter(_) => "invalid_parameter",
            Error::Parse { .. } => "parse_error",
            Error::InvalidFile { .. } => "invalid_file",
            Error::EmptyBank { .. } => "empty_bank",
            Error::EmptyPrompt { .. } => "empty_prompt",
            Error::BankMatrixMismatch { .. } => "bank_matrix_mismatch",
            Error::ChecksumMismatch { .. } => "checksum_mismatch",
            Error::AlreadyExists { .. } => "already_exists",
            Error::Io { .. } => "io_error",
            Error::Json(_) => "json_error",
            Error::Csv(_) => "csv_error",
        }
    }

    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    pub(crate) fn invalid_file(path: impl Into<PathBuf>, message: impl Into<String>) -> Self {
        Error::InvalidFile {
            path: path.into(),
            message: message.into(),
        }
    }

    pub(crate) fn dim_mismatch(context: impl Into<String>, expected: usize, found: usize) -> Self {
        Error::DimMismatch {
            context: context.into(),
            expected,
            found,
        }
    }
}
