use std::path::Path;

use concept_compose::Error;
use serde_json::{json, Map, Value};

pub const EXIT_USAGE: u8 = 2;
pub const EXIT_REFUSED: u8 = 3;
pub const EXIT_DATA: u8 = 4;

/// A failure reported as one JSON object on stderr.
#[derive(Debug)]
pub struct CliError {
    pub exit: u8,
    pub code: &'static str,
    pub message: String,
    pub details: Map<String, Value>,
}

pub type CliResult<T> = Result<T, CliError>;

impl CliError {
    pub fn new(exit: u8, code: &'static str, message: impl Into<String>) -> Self {
        Self {
            exit,
            code,
            message: message.into(),
            details: Map::new(),
        }
    }

    pub fn usage(message: impl Into<String>) -> Self {
        Self::new(EXIT_USAGE, "usage", message)
    }

    pub fn with(mut self, key: &str, value: impl Into<Value>) -> Self {
        self.details.insert(key.to_string(), value.into());
        self
    }

    pub fn with_path(self, path: &Path) -> Self {
        self.with("path", path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        let mut obj = Map::new();
        obj.insert("code".into(), json!(self.code));
        obj.insert("message".into(), json!(self.message));
        obj.insert("exit_code".into(), json!(self.exit));
        for (k, v) in &self.details {
            obj.insert(k.clone(), v.clone());
        }
        Value::Object(obj).to_string()
    }
}

fn exit_for(e: &Error) -> u8 {
    match e {
        Error::AlreadyExists { .. } => EXIT_REFUSED,
        Error::CustomRankRequired
        | Error::BudgetOverflow { .. }
        | Error::InvalidParameter(_)
        | Error::AlphaOutOfRange(_) => EXIT_USAGE,
        _ => EXIT_DATA,
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let err = CliError::new(exit_for(&e), e.code(), e.to_string());
        match &e {
            Error::Parse {
                path, line, column, ..
            } => err
                .with_path(path)
                .with("line", *line)
                .with("column", *column),
            Error::InvalidFile { path, .. }
            | Error::EmptyBank { path }
            | Error::AlreadyExists { path }
            | Error::Io { path, .. } => err.with_path(path),
            Error::EmptyPrompt { path, index } => err.with_path(path).with("index", *index),
            Error::ChecksumMismatch {
                path,
                expected,
                found,
            } => err
                .with_path(path)
                .with("expected", expected.as_str())
                .with("found", found.as_str()),
            Error::RankOutOfRange { rank, max } => err.with("rank", *rank).with("max", *max),
            Error::BankMatrixMismatch {
                bank_prompts,
                matrix_rows,
            } => err
                .with("bank_prompts", *bank_prompts)
                .with("matrix_rows", *matrix_rows),
            Error::DimMismatch {
                expected, found, ..
            } => err.with("expected", *expected).with("found", *found),
            _ => err,
        }
    }
}
