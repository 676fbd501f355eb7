//! Synthetic ground-truth benchmark for the scoring protocol.
//!
//! Embedding space is split into mutually orthogonal planted factors:
//!
//! * one `rank`-dimensional basis per concept,
//! * a reference residual block holding everything the reference contributes
//!   outside the concepts,
//! * a background block holding the concept images' own non-concept content.
//!
//! The reference has coordinates in every concept basis and in the residual
//! block. Concept image `k` has coordinates in concept basis `k` and in the
//! background block. A concept description is the concept image's planted
//! concept component; a leakage description is its background component.
//!
//! Scoring follows the protocol with one adaptation: a concept description
//! only sees its own factor, so concept similarity compares the generated
//! embedding's planted concept component with the description. Leakage uses
//! the full generated embedding.
//!
//! Variation along each concept basis decays linearly from 1.0 to 0.1 across
//! its directions. Text prompt embeddings vary only inside the concept basis.
//! Image samples add Gaussian noise in the background block, which models
//! generated variation images filling in unrelated content; once that noise
//! exceeds the weakest concept direction it takes a place among the dominant
//! singular directions.

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::{concept_similarity, leakage_score, CaseScore, EvalReport};
use crate::compose::{compose_pair, interpolate};
use crate::embedding::{dot, EmbeddingMatrix, EmbeddingVector};
use crate::error::{Error, Result};
use crate::subspace::{build_subspace, ConceptSubspace, SubspaceSource};

const STREAM_BASES: u64 = 0;
const STREAM_COORDS: u64 = 1;
const STREAM_TEXT: u64 = 2 << 32;
const STREAM_IMAGE: u64 = 3 << 32;

const SPREAD_FLOOR: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct BenchmarkConfig {
    pub seed: u64,
    pub dim: usize,
    pub concepts: usize,
    pub rank: usize,
    /// Size of the reference residual block and of the background block.
    pub residual_dims: usize,
    /// Rows in each synthetic text prompt bank.
    pub prompts_per_concept: usize,
}

impl BenchmarkConfig {
    pub fn new(seed: u64, dim: usize, concepts: usize, rank: usize) -> Self {
        Self {
            seed,
            dim,
            concepts,
            rank,
            residual_dims: 2,
            prompts_per_concept: 150,
        }
    }

    pub fn with_residual_dims(self, residual_dims: usize) -> Self {
        Self {
            residual_dims,
            ..self
        }
    }

    pub fn with_prompts_per_concept(self, prompts_per_concept: usize) -> Self {
        Self {
            prompts_per_concept,
            ..self
        }
    }

    fn validate(&self) -> Result<()> {
        for (value, name) in [
            (self.dim, "dim"),
            (self.concepts, "concepts"),
            (self.rank, "rank"),
            (self.residual_dims, "residual_dims"),
        ] {
            if value == 0 {
                return Err(Error::InvalidParameter(format!(
                    "{name} must be at least 1"
                )));
            }
        }
        if self.prompts_per_concept < self.rank {
            return Err(Error::InvalidParameter(format!(
                "prompts_per_concept ({}) must be at least rank ({})",
                self.prompts_per_concept, self.rank
            )));
        }
        let needed = self.concepts * self.rank + 2 * self.residual_dims;
        if needed > self.dim {
            return Err(Error::BudgetOverflow {
                concepts: self.concepts,
                rank: self.rank,
                residual: self.residual_dims,
                needed,
                dim: self.dim,
            });
        }
        Ok(())
    }

    pub fn build(self) -> Result<SyntheticBenchmark> {
        self.validate()?;
        SyntheticBenchmark::generate(self)
    }
}

/// Builds a benchmark with default residual size and prompt count.
pub fn make_synthetic_benchmark(
    seed: u64,
    dim: usize,
    concepts: usize,
    rank: usize,
) -> Result<SyntheticBenchmark> {
    BenchmarkConfig::new(seed, dim, concepts, rank).build()
}

fn rng_for(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn gaussians(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `sum_i coords[i] * basis_row_i`
fn expand(basis: &[f64], dim: usize, coords: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; dim];
    for (row, &c) in basis.chunks_exact(dim).zip(coords) {
        for (o, b) in out.iter_mut().zip(row) {
            *o += c * b;
        }
    }
    out
}

fn add(a: &mut [f64], b: &[f64]) {
    a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticBenchmark {
    config: BenchmarkConfig,
    concept_bases: Vec<Vec<f64>>,
    residual_basis: Vec<f64>,
    background_basis: Vec<f64>,
    spread: Vec<f64>,
    reference: EmbeddingVector,
    reference_concept_coords: Vec<Vec<f64>>,
    reference_residual: Vec<f64>,
    concept_images: Vec<EmbeddingVector>,
    concept_coords: Vec<Vec<f64>>,
    background_coords: Vec<Vec<f64>>,
}

impl SyntheticBenchmark {
    fn generate(config: BenchmarkConfig) -> Result<Self> {
        let BenchmarkConfig {
            seed,
            dim,
            concepts,
            rank,
            residual_dims,
            ..
        } = config;
        let factors = concepts * rank + 2 * residual_dims;

        let mut rng = rng_for(seed, STREAM_BASES);
        let gaussian =
            DMatrix::from_column_slice(dim, factors, &gaussians(&mut rng, dim * factors));
        let q = gaussian.qr().q();
        // Column j of Q becomes planted direction j.
        let direction = |j: usize| q.column(j).iter().copied().collect::<Vec<f64>>();
        let block = |start: usize, len: usize| -> Vec<f64> {
            (start..start + len).flat_map(direction).collect()
        };
        let concept_bases: Vec<Vec<f64>> = (0..concepts).map(|k| block(k * rank, rank)).collect();
        let residual_basis = block(concepts * rank, residual_dims);
        let background_basis = block(concepts * rank + residual_dims, residual_dims);

        let spread = (0..rank)
            .map(|j| {
                if rank == 1 {
                    1.0
                } else {
                    1.0 - (1.0 - SPREAD_FLOOR) * j as f64 / (rank - 1) as f64
                }
            })
            .collect();

        let mut rng = rng_for(seed, STREAM_COORDS);
        let reference_concept_coords: Vec<Vec<f64>> =
            (0..concepts).map(|_| gaussians(&mut rng, rank)).collect();
        let reference_residual = gaussians(&mut rng, residual_dims);
        let concept_coords: Vec<Vec<f64>> =
            (0..concepts).map(|_| gaussians(&mut rng, rank)).collect();
        let background_coords: Vec<Vec<f64>> = (0..concepts)
            .map(|_| gaussians(&mut rng, residual_dims))
            .collect();

        let mut reference = expand(&residual_basis, dim, &reference_residual);
        for (basis, coords) in concept_bases.iter().zip(&reference_concept_coords) {
            add(&mut reference, &expand(basis, dim, coords));
        }
        let concept_images = (0..concepts)
            .map(|k| {
                let mut e = expand(&concept_bases[k], dim, &concept_coords[k]);
                add(
                    &mut e,
                    &expand(&background_basis, dim, &background_coords[k]),
                );
                EmbeddingVector::new(e)
            })
            .collect::<Result<Vec<_>>>()?;

        Ok(Self {
            config,
            concept_bases,
            residual_basis,
            background_basis,
            spread,
            reference: EmbeddingVector::new(reference)?,
            reference_concept_coords,
            reference_residual,
            concept_images,
            concept_coords,
            background_coords,
        })
    }

    pub fn config(&self) -> &BenchmarkConfig {
        &self.config
    }

    pub fn dim(&self) -> usize {
        self.config.dim
    }

    pub fn concepts(&self) -> usize {
        self.config.concepts
    }

    pub fn concept_name(&self, k: usize) -> String {
        format!("concept-{k}")
    }

    /// Row-major `rank x d` planted basis of concept `k`.
    pub fn concept_basis(&self, k: usize) -> &[f64] {
        &self.concept_bases[k]
    }

    pub fn residual_basis(&self) -> &[f64] {
        &self.residual_basis
    }

    pub fn background_basis(&self) -> &[f64] {
        &self.background_basis
    }

    pub fn reference(&self) -> &EmbeddingVector {
        &self.reference
    }

    pub fn concept_image(&self, k: usize) -> &EmbeddingVector {
        &self.concept_images[k]
    }

    pub fn planted_concept_coords(&self, k: usize) -> &[f64] {
        &self.concept_coords[k]
    }

    pub fn reference_concept_coords(&self, k: usize) -> &[f64] {
        &self.reference_concept_coords[k]
    }

    pub fn reference_residual(&self) -> &[f64] {
        &self.reference_residual
    }

    pub fn planted_background(&self, k: usize) -> &[f64] {
        &self.background_coords[k]
    }

    fn coordinates(&self, basis: &[f64], e: &EmbeddingVector) -> Vec<f64> {
        basis
            .chunks_exact(self.dim())
            .map(|row| dot(row, e.as_slice()))
            .collect()
    }

    /// Coordinates of `e` in concept basis `k`.
    pub fn concept_coordinates(&self, k: usize, e: &EmbeddingVector) -> Vec<f64> {
        self.coordinates(&self.concept_bases[k], e)
    }

    pub fn residual_coordinates(&self, e: &EmbeddingVector) -> Vec<f64> {
        self.coordinates(&self.residual_basis, e)
    }

    pub fn background_coordinates(&self, e: &EmbeddingVector) -> Vec<f64> {
        self.coordinates(&self.background_basis, e)
    }

    /// Component of `e` inside planted concept basis `k`.
    pub fn concept_component(&self, k: usize, e: &EmbeddingVector) -> Result<EmbeddingVector> {
        let coords = self.concept_coordinates(k, e);
        EmbeddingVector::new(expand(&self.concept_bases[k], self.dim(), &coords))
    }

    pub fn concept_description(&self, k: usize) -> Result<EmbeddingVector> {
        EmbeddingVector::new(expand(
            &self.concept_bases[k],
            self.dim(),
            &self.concept_coords[k],
        ))
    }

    pub fn leakage_description(&self, k: usize) -> Result<EmbeddingVector> {
        EmbeddingVector::new(expand(
            &self.background_basis,
            self.dim(),
            &self.background_coords[k],
        ))
    }

    /// The exact planted concept subspace.
    pub fn planted_subspace(&self, k: usize) -> Result<ConceptSubspace> {
        let rows: Vec<Vec<f64>> = self.concept_bases[k]
            .chunks_exact(self.dim())
            .map(<[f64]>::to_vec)
            .collect();
        ConceptSubspace::from_parts(
            &rows,
            self.spread.clone(),
            self.concept_name(k),
            SubspaceSource::TextSpanned,
        )
    }

    fn sample_concept(&self, rng: &mut ChaCha8Rng, k: usize) -> Vec<f64> {
        let coords: Vec<f64> = self
            .spread
            .iter()
            .map(|s| s * rng.sample::<f64, _>(StandardNormal))
            .collect();
        expand(&self.concept_bases[k], self.dim(), &coords)
    }

    /// Noiseless prompt embeddings for concept `k`: random points of the
    /// planted basis.
    pub fn text_prompt_embeddings(&self, k: usize) -> Result<EmbeddingMatrix> {
        let mut rng = rng_for(self.config.seed, STREAM_TEXT | k as u64);
        let n = self.config.prompts_per_concept;
        let mut data = Vec::with_capacity(n * self.dim());
        for _ in 0..n {
            data.extend(self.sample_concept(&mut rng, k));
        }
        EmbeddingMatrix::from_row_major(n, self.dim(), data)
    }

    /// Image-sample embeddings for concept `k`: prompt-like concept content
    /// plus background noise of standard deviation `noise`. Each `trial`
    /// draws an independent sample set.
    pub fn image_sample_embeddings(
        &self,
        k: usize,
        trial: usize,
        samples: usize,
        noise: f64,
    ) -> Result<EmbeddingMatrix> {
        let index = (trial as u64) * self.concepts() as u64 + k as u64;
        let mut rng = rng_for(self.config.seed, STREAM_IMAGE | index);
        let m = self.config.residual_dims;
        let mut data = Vec::with_capacity(samples * self.dim());
        for _ in 0..samples {
            let mut row = self.sample_concept(&mut rng, k);
            let bg: Vec<f64> = gaussians(&mut rng, m).iter().map(|g| noise * g).collect();
            add(&mut row, &expand(&self.background_basis, self.dim(), &bg));
            data.extend(row);
        }
        EmbeddingMatrix::from_row_major(samples, self.dim(), data)
    }

    /// Scores one generated embedding against concept `k`'s descriptions.
    pub fn score(&self, k: usize, generated: &EmbeddingVector) -> Result<CaseScore> {
        let similarity = concept_similarity(
            &self.concept_component(k, generated)?,
            &self.concept_description(k)?,
        )?;
        let leakage = leakage_score(generated, &self.leakage_description(k)?)?;
        Ok(CaseScore {
            concept: self.concept_name(k),
            similarity: Some(similarity),
            leakage: Some(leakage),
        })
    }

    /// Cosine between the parts of `generated` and the reference that lie
    /// outside concept basis `k`. 1.0 means the reference's non-concept
    /// content came through unchanged in direction.
    pub fn residual_preservation(&self, k: usize, generated: &EmbeddingVector) -> Result<f64> {
        let outside = |e: &EmbeddingVector| -> Result<Vec<f64>> {
            let inside = self.concept_component(k, e)?;
            Ok(e.as_slice()
                .iter()
                .zip(inside.as_slice())
                .map(|(a, b)| a - b)
                .collect())
        };
        let g = EmbeddingVector::from_computed(outside(generated)?)?;
        let r = EmbeddingVector::from_computed(outside(&self.reference)?)?;
        concept_similarity(&g, &r)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum AblationMethod {
    /// Subspace swap with text-spanned subspaces.
    ProjectionCompose,
    /// Linear interpolation between the reference and the concept image.
    Interpolation,
    /// Subspace swap with subspaces spanned by noisy image samples.
    ImageSpannedSubspace,
}

impl AblationMethod {
    pub const ALL: [AblationMethod; 3] = [
        AblationMethod::ProjectionCompose,
        AblationMethod::Interpolation,
        AblationMethod::ImageSpannedSubspace,
    ];
}

impl std::fmt::Display for AblationMethod {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            AblationMethod::ProjectionCompose => "projection-compose",
            AblationMethod::Interpolation => "interpolation",
            AblationMethod::ImageSpannedSubspace => "image-spanned-subspace",
        })
    }
}

impl std::str::FromStr for AblationMethod {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        AblationMethod::ALL
            .into_iter()
            .find(|m| m.to_string() == s)
            .ok_or_else(|| format!("unknown ablation method `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct AblationOptions {
    pub alpha: f64,
    pub image_samples: usize,
    pub noise: f64,
    /// Independent image sample sets drawn per concept.
    pub trials: usize,
}

impl Default for AblationOptions {
    fn default() -> Self {
        Self {
            alpha: 0.5,
            image_samples: 50,
            noise: 0.3,
            trials: 20,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AblationOutcome {
    pub method: AblationMethod,
    pub report: EvalReport,
    pub residual_preservation: Vec<f64>,
    pub mean_residual_preservation: f64,
    #[serde(skip)]
    pub generated: Vec<EmbeddingVector>,
}

/// Each concept is composed pairwise with the reference, one case per
/// concept (per trial for the image-spanned method).
pub fn run_ablation(
    benchmark: &SyntheticBenchmark,
    method: AblationMethod,
    options: &AblationOptions,
) -> Result<AblationOutcome> {
    let rank = benchmark.config.rank;
    let reference = benchmark.reference();
    let mut cases: Vec<(usize, EmbeddingVector)> = Vec::new();

    match method {
        AblationMethod::ProjectionCompose => {
            for k in 0..benchmark.concepts() {
                let subspace = build_subspace(
                    &benchmark.text_prompt_embeddings(k)?,
                    rank,
                    benchmark.concept_name(k),
                    SubspaceSource::TextSpanned,
                )?;
                cases.push((
                    k,
                    compose_pair(reference, benchmark.concept_image(k), &subspace)?,
                ));
            }
        }
        AblationMethod::Interpolation => {
            for k in 0..benchmark.concepts() {
                cases.push((
                    k,
                    interpolate(reference, benchmark.concept_image(k), options.alpha)?,
                ));
            }
        }
        AblationMethod::ImageSpannedSubspace => {
            if options.image_samples < rank || options.trials == 0 {
                return Err(Error::InvalidParameter(format!(
                    "image-spanned ablation needs at least {rank} samples and one trial"
                )));
            }
            if !(options.noise.is_finite() && options.noise >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "noise must be finite and non-negative, got {}",
                    options.noise
                )));
            }
            for trial in 0..options.trials {
                for k in 0..benchmark.concepts() {
                    let samples = benchmark.image_sample_embeddings(
                        k,
                        trial,
                        options.image_samples,
                        options.noise,
                    )?;
                    let subspace = build_subspace(
                        &samples,
                        rank,
                        benchmark.concept_name(k),
                        SubspaceSource::ImageSpanned,
                    )?;
                    cases.push((
                        k,
                        compose_pair(reference, benchmark.concept_image(k), &subspace)?,
                    ));
                }
            }
        }
    }

    let mut scores = Vec::with_capacity(cases.len());
    let mut residual_preservation = Vec::with_capacity(cases.len());
    for (k, generated) in &cases {
        scores.push(benchmark.score(*k, generated)?);
        residual_preservation.push(benchmark.residual_preservation(*k, generated)?);
    }
    let mean_residual_preservation =
        residual_preservation.iter().sum::<f64>() / residual_preservation.len() as f64;

    Ok(AblationOutcome {
        method,
        report: EvalReport::from_scores(scores),
        residual_preservation,
        mean_residual_preservation,
        generated: cases.into_iter().map(|(_, e)| e).collect(),
    })
}
