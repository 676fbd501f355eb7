#![allow(dead_code)]

use concept_compose::{EmbeddingMatrix, EmbeddingVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gaussian_rows(rng: &mut ChaCha8Rng, n: usize, d: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|_| (0..d).map(|_| rng.sample(StandardNormal)).collect())
        .collect()
}

pub fn gaussian_vector(rng: &mut ChaCha8Rng, d: usize) -> EmbeddingVector {
    EmbeddingVector::new((0..d).map(|_| rng.sample(StandardNormal)).collect()).unwrap()
}

pub fn matrix(rows: &[Vec<f64>]) -> EmbeddingMatrix {
    EmbeddingMatrix::from_rows(rows).unwrap()
}

/// Integer matrix with `n, d` in `1..=6` and entries in `-3..=3`, never all zero.
pub fn small_integer_matrix(rng: &mut ChaCha8Rng) -> Vec<Vec<f64>> {
    loop {
        let n = rng.gen_range(1..=6);
        let d = rng.gen_range(1..=6);
        let rows: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..d).map(|_| rng.gen_range(-3..=3) as f64).collect())
            .collect();
        if rows.iter().flatten().any(|&v| v != 0.0) {
            return rows;
        }
    }
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

pub fn norm(a: &[f64]) -> f64 {
    a.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}
