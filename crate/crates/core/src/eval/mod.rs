//! Concept adherence and leakage scoring.
//!
//! Both scores are cosine similarities between a generated embedding and a
//! description embedding. Concept similarity should be high; leakage, the
//! similarity to descriptions of properties that were not supposed to
//! transfer, should be low. Cosine is used as the embedding-space distance.

mod synthetic;

pub use synthetic::{
    make_synthetic_benchmark, run_ablation, AblationMethod, AblationOptions, AblationOutcome,
    BenchmarkConfig, SyntheticBenchmark,
};

use std::io::Write;

use serde::Serialize;

use crate::embedding::{dot, norm, EmbeddingVector};
use crate::error::{Error, Result};

fn cosine(a: &[f64], b: &[f64]) -> Result<f64> {
    let (na, nb) = (norm(a), norm(b));
    if na == 0.0 {
        return Err(Error::ZeroVector("generated embedding"));
    }
    if nb == 0.0 {
        return Err(Error::ZeroVector("description embedding"));
    }
    Ok((dot(a, b) / (na * nb)).clamp(-1.0, 1.0))
}

/// Cosine similarity between a generated embedding and a concept description.
pub fn concept_similarity(
    generated: &EmbeddingVector,
    description: &EmbeddingVector,
) -> Result<f64> {
    description.expect_dim(generated.dim(), "concept description")?;
    cosine(generated.as_slice(), description.as_slice())
}

/// Cosine similarity between a generated embedding and a description of
/// properties that should not have transferred. Lower is better.
pub fn leakage_score(
    generated: &EmbeddingVector,
    non_concept_description: &EmbeddingVector,
) -> Result<f64> {
    non_concept_description.expect_dim(generated.dim(), "leakage description")?;
    cosine(generated.as_slice(), non_concept_description.as_slice())
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalCase {
    pub generated: EmbeddingVector,
    pub concept_descriptions: Vec<(String, EmbeddingVector)>,
    pub leakage_descriptions: Vec<(String, EmbeddingVector)>,
}

impl EvalCase {
    pub fn new(
        generated: EmbeddingVector,
        concept_descriptions: Vec<(String, EmbeddingVector)>,
        leakage_descriptions: Vec<(String, EmbeddingVector)>,
    ) -> Result<Self> {
        if concept_descriptions.is_empty() {
            return Err(Error::Empty("concept descriptions"));
        }
        let d = generated.dim();
        for (name, e) in concept_descriptions.iter().chain(&leakage_descriptions) {
            e.expect_dim(d, &format!("description `{name}`"))?;
        }
        Ok(Self {
            generated,
            concept_descriptions,
            leakage_descriptions,
        })
    }

    /// One row per concept name, in order of first appearance (concept
    /// descriptions first). A side without a description is `None`.
    pub fn score(&self) -> Result<Vec<CaseScore>> {
        let mut rows: Vec<CaseScore> = Vec::new();
        for (name, description) in &self.concept_descriptions {
            rows.push(CaseScore {
                concept: name.clone(),
                similarity: Some(concept_similarity(&self.generated, description)?),
                leakage: None,
            });
        }
        for (name, description) in &self.leakage_descriptions {
            let leakage = Some(leakage_score(&self.generated, description)?);
            match rows
                .iter_mut()
                .find(|r| &r.concept == name && r.leakage.is_none())
            {
                Some(row) => row.leakage = leakage,
                None => rows.push(CaseScore {
                    concept: name.clone(),
                    similarity: None,
                    leakage,
                }),
            }
        }
        Ok(rows)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CaseScore {
    pub concept: String,
    pub similarity: Option<f64>,
    pub leakage: Option<f64>,
}

/// Per-concept scores and their means. Serializes to
/// `{"cases": [{"concept", "similarity", "leakage"}], "mean_similarity", "mean_leakage"}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub cases: Vec<CaseScore>,
    pub mean_similarity: Option<f64>,
    pub mean_leakage: Option<f64>,
}

fn mean(values: impl Iterator<Item = f64>) -> Option<f64> {
    let (sum, count) = values.fold((0.0, 0usize), |(s, c), v| (s + v, c + 1));
    (count > 0).then(|| sum / count as f64)
}

impl EvalReport {
    pub fn from_scores(cases: Vec<CaseScore>) -> Self {
        let mean_similarity = mean(cases.iter().filter_map(|c| c.similarity));
        let mean_leakage = mean(cases.iter().filter_map(|c| c.leakage));
        Self {
            cases,
            mean_similarity,
            mean_leakage,
        }
    }

    pub fn from_cases(cases: &[EvalCase]) -> Result<Self> {
        let mut rows = Vec::new();
        for case in cases {
            rows.extend(case.score()?);
        }
        Ok(Self::from_scores(rows))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// One row per case under a `concept,similarity,leakage` header; missing
    /// scores are empty fields.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["concept", "similarity", "leakage"])?;
        let field = |v: Option<f64>| v.map_or(String::new(), |x| x.to_string());
        for case in &self.cases {
            w.write_record([
                case.concept.clone(),
                field(case.similarity),
                field(case.leakage),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv output>", e))?;
        Ok(())
    }

    pub fn to_csv(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("csv output is utf-8"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(x.to_vec()).unwrap()
    }

    #[test]
    fn similarity_reference_values() {
        let a = v(&[0.3, -1.2, 2.0]);
        assert!((concept_similarity(&a, &a).unwrap() - 1.0).abs() < 1e-15);
        assert_eq!(
            concept_similarity(&v(&[1.0, 0.0]), &v(&[0.0, 1.0])).unwrap(),
            0.0
        );
        let s = concept_similarity(&v(&[1.0, 1.0]), &v(&[1.0, 0.0])).unwrap();
        assert!((s - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn leakage_reference_values() {
        assert_eq!(
            leakage_score(&v(&[0.0, 3.0]), &v(&[2.0, 0.0])).unwrap(),
            0.0
        );
        let g = v(&[1.5, -0.5]);
        assert!((leakage_score(&g, &g).unwrap() - 1.0).abs() < 1e-15);
    }

    #[test]
    fn zero_vectors_are_undefined() {
        assert!(matches!(
            concept_similarity(&v(&[0.0, 0.0]), &v(&[1.0, 0.0])),
            Err(Error::ZeroVector(_))
        ));
        assert!(matches!(
            leakage_score(&v(&[1.0, 0.0]), &v(&[0.0, 0.0])),
            Err(Error::ZeroVector(_))
        ));
        assert!(concept_similarity(&v(&[1.0]), &v(&[1.0, 0.0])).is_err());
    }

    #[test]
    fn report_pairs_scores_by_concept_and_averages() {
        let case = EvalCase::new(
            v(&[1.0, 1.0, 0.0]),
            vec![
                ("a".into(), v(&[1.0, 0.0, 0.0])),
                ("b".into(), v(&[0.0, 1.0, 0.0])),
            ],
            vec![
                ("b".into(), v(&[0.0, 0.0, 1.0])),
                ("c".into(), v(&[1.0, 1.0, 0.0])),
            ],
        )
        .unwrap();
        let report = EvalReport::from_cases(&[case]).unwrap();
        let names: Vec<&str> = report.cases.iter().map(|c| c.concept.as_str()).collect();
        assert_eq!(names, ["a", "b", "c"]);
        assert_eq!(report.cases[0].leakage, None);
        assert_eq!(report.cases[1].leakage, Some(0.0));
        assert_eq!(report.cases[2].similarity, None);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((report.mean_similarity.unwrap() - h).abs() < 1e-12);
        assert!((report.mean_leakage.unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn case_requires_a_concept_description() {
        assert!(EvalCase::new(v(&[1.0]), vec![], vec![]).is_err());
        assert!(EvalCase::new(v(&[1.0]), vec![("a".into(), v(&[1.0, 0.0]))], vec![]).is_err());
    }

    #[test]
    fn json_and_csv_shapes() {
        let report = EvalReport::from_scores(vec![
            CaseScore {
                concept: "pattern".into(),
                similarity: Some(0.5),
                leakage: Some(0.25),
            },
            CaseScore {
                concept: "a, b".into(),
                similarity: Some(1.0),
                leakage: None,
            },
        ]);
        let json: serde_json::Value = serde_json::from_str(&report.to_json().unwrap()).unwrap();
        assert_eq!(json["cases"][0]["concept"], "pattern");
        assert_eq!(json["cases"][0]["similarity"], 0.5);
        assert_eq!(json["cases"][1]["leakage"], serde_json::Value::Null);
        assert_eq!(json["mean_similarity"], 0.75);
        assert_eq!(json["mean_leakage"], 0.25);
        assert_eq!(
            report.to_csv().unwrap(),
            "concept,similarity,leakage\npattern,0.5,0.25\n\"a, b\",1,\n"
        );
    }

    fn vec3() -> impl Strategy<Value = Vec<f64>> {
        proptest::collection::vec(-10.0f64..10.0, 3)
            .prop_filter("nonzero", |x| x.iter().any(|v| v.abs() > 1e-3))
    }

    proptest! {
        #[test]
        fn scores_are_scale_invariant(x in vec3(), y in vec3(), a in 0.01f64..100.0, b in 0.01f64..100.0) {
            let (ex, ey) = (v(&x), v(&y));
            let sx = v(&x.iter().map(|t| t * a).collect::<Vec<_>>());
            let sy = v(&y.iter().map(|t| t * b).collect::<Vec<_>>());
            let base = concept_similarity(&ex, &ey).unwrap();
            prop_assert!((concept_similarity(&sx, &sy).unwrap() - base).abs() <= 1e-9);
            prop_assert!((leakage_score(&sx, &sy).unwrap() - base).abs() <= 1e-9);
            prop_assert!((-1.0..=1.0).contains(&base));
        }

        #[test]
        fn report_means_are_arithmetic(scores in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..20)) {
            let cases: Vec<CaseScore> = scores.iter().enumerate().map(|(i, &(s, l))| CaseScore {
                concept: format!("c{i}"), similarity: Some(s), leakage: Some(l),
            }).collect();
            let report = EvalReport::from_scores(cases);
            let n = scores.len() as f64;
            let ms: f64 = scores.iter().map(|p| p.0).sum::<f64>() / n;
            let ml: f64 = scores.iter().map(|p| p.1).sum::<f64>() / n;
            prop_assert!((report.mean_similarity.unwrap() - ms).abs() <= 1e-12);
            prop_assert!((report.mean_leakage.unwrap() - ml).abs() <= 1e-12);
        }
    }
}
