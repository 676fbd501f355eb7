#![allow(dead_code)]

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use concept_compose::io;
use concept_compose::EmbeddingMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde_json::Value;

pub fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures")
}

pub fn fixture(rel: &str) -> PathBuf {
    fixtures().join(rel)
}

pub struct Run {
    pub code: i32,
    pub stdout: Vec<u8>,
    pub stderr: String,
}

impl Run {
    pub fn stdout_text(&self) -> String {
        String::from_utf8(self.stdout.clone()).expect("stdout is UTF-8")
    }

    pub fn json(&self) -> Value {
        serde_json::from_slice(&self.stdout).expect("stdout is JSON")
    }

    /// The single JSON error object printed on failure.
    pub fn error(&self) -> Value {
        let lines: Vec<&str> = self.stderr.lines().collect();
        assert_eq!(
            lines.len(),
            1,
            "expected one stderr line, got {:?}",
            self.stderr
        );
        serde_json::from_str(lines[0]).expect("stderr is a JSON object")
    }
}

pub fn ccomp<I, S>(args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    ccomp_in(Path::new(env!("CARGO_MANIFEST_DIR")), args)
}

pub fn ccomp_in<I, S>(cwd: &Path, args: I) -> Run
where
    I: IntoIterator<Item = S>,
    S: AsRef<std::ffi::OsStr>,
{
    let Output {
        status,
        stdout,
        stderr,
    } = Command::new(env!("CARGO_BIN_EXE_ccomp"))
        .args(args)
        .current_dir(cwd)
        .output()
        .expect("ccomp runs");
    Run {
        code: status.code().unwrap_or(-1),
        stdout,
        stderr: String::from_utf8_lossy(&stderr).into_owned(),
    }
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

pub fn gaussian(rng: &mut ChaCha8Rng, d: usize) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

/// Writes a seeded Gaussian `(n, d)` matrix and a matching prompt bank into
/// `dir`, returning `(bank, embeddings)`.
pub fn seeded_concept(dir: &Path, name: &str, n: usize, d: usize, seed: u64) -> (PathBuf, PathBuf) {
    let mut g = rng(seed);
    let m = EmbeddingMatrix::from_rows(&gaussian_rows(&mut g, n, d)).unwrap();
    let emb = dir.join(format!("{name}.npy"));
    io::write_matrix(&emb, &m).unwrap();
    let bank = dir.join(format!("{name}.json"));
    let prompts: Vec<String> = (0..n).map(|i| format!("{name} {i}")).collect();
    let body = serde_json::json!({
        "concept_name": name,
        "rank_class": "low-variation",
        "prompts": prompts,
        "provenance": "seeded",
    });
    std::fs::write(&bank, body.to_string()).unwrap();
    (bank, emb)
}

pub fn read_f32(path: &Path) -> (Vec<usize>, Vec<f32>) {
    let a = io::npy::decode(&std::fs::read(path).unwrap()).unwrap();
    (a.shape, a.data)
}

pub fn max_abs_diff_f32(a: &[f32], b: &[f32]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (f64::from(*x) - f64::from(*y)).abs())
        .fold(0.0, f64::max)
}
