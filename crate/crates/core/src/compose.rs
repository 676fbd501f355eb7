//! Composite embeddings built by swapping subspace components.
//!
//! For one concept the composite keeps everything of the reference outside
//! the concept subspace and takes the in-subspace component from the concept
//! embedding: `e_ref - P e_ref + P e_c`. With several concepts the one-step
//! form sums every `P_k (e_k - e_ref)` term onto the reference. Projections
//! of one concept onto another concept's subspace are left in place; when
//! subspaces overlap the shared directions are counted once per concept.
//!
//! Outputs are never rescaled.

use serde::{Deserialize, Serialize};

use crate::embedding::EmbeddingVector;
use crate::error::{Error, Result};
use crate::subspace::ConceptSubspace;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum CompositionMode {
    /// All concepts applied against the original reference at once.
    #[default]
    OneStep,
    /// Pairwise composition folded left over the bindings; order matters.
    Sequential,
}

/// Treatment of concept-to-concept cross projections in one-step composition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CrossTerms {
    /// Canonical behavior: cross projections are kept.
    #[default]
    Keep,
    /// Non-canonical diagnostic: from each concept's contribution `P_k e_k`,
    /// subtract its projection onto every other concept subspace,
    /// `sum_{j != k} P_j P_k e_k`.
    SubtractDiagnostic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Binding {
    pub concept: EmbeddingVector,
    pub subspace: ConceptSubspace,
}

impl Binding {
    pub fn new(concept: EmbeddingVector, subspace: ConceptSubspace) -> Self {
        Self { concept, subspace }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum PlanWarning {
    DuplicateConcept { name: String, count: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct CompositionPlan {
    reference: EmbeddingVector,
    bindings: Vec<Binding>,
    mode: CompositionMode,
    warnings: Vec<PlanWarning>,
}

impl CompositionPlan {
    pub fn new(
        reference: EmbeddingVector,
        bindings: Vec<Binding>,
        mode: CompositionMode,
    ) -> Result<Self> {
        check_bindings(&reference, &bindings)?;

        let mut warnings = Vec::new();
        let mut names: Vec<&str> = bindings.iter().map(|b| b.subspace.concept_name()).collect();
        names.sort_unstable();
        for group in names.chunk_by(|a, b| a == b) {
            if group.len() > 1 {
                warnings.push(PlanWarning::DuplicateConcept {
                    name: group[0].to_string(),
                    count: group.len(),
                });
            }
        }

        Ok(Self {
            reference,
            bindings,
            mode,
            warnings,
        })
    }

    pub fn reference(&self) -> &EmbeddingVector {
        &self.reference
    }

    pub fn bindings(&self) -> &[Binding] {
        &self.bindings
    }

    pub fn mode(&self) -> CompositionMode {
        self.mode
    }

    pub fn warnings(&self) -> &[PlanWarning] {
        &self.warnings
    }

    /// Compose according to the plan's mode.
    pub fn compose(&self) -> Result<EmbeddingVector> {
        match self.mode {
            CompositionMode::OneStep => compose_multi(&self.reference, &self.bindings),
            CompositionMode::Sequential => compose_sequential(&self.reference, &self.bindings),
        }
    }
}

fn check_bindings(reference: &EmbeddingVector, bindings: &[Binding]) -> Result<()> {
    if bindings.is_empty() {
        return Err(Error::EmptyPlan);
    }
    let d = reference.dim();
    for (k, b) in bindings.iter().enumerate() {
        b.concept
            .expect_dim(d, &format!("concept embedding of binding {k}"))?;
        if b.subspace.dim() != d {
            return Err(Error::dim_mismatch(
                format!("subspace `{}` of binding {k}", b.subspace.concept_name()),
                d,
                b.subspace.dim(),
            ));
        }
    }
    Ok(())
}

/// Adds `P (e_c - e_ref)` onto `acc`.
fn add_swap(acc: &mut [f64], reference: &[f64], concept: &[f64], subspace: &ConceptSubspace) {
    let delta: Vec<f64> = concept.iter().zip(reference).map(|(c, r)| c - r).collect();
    for (a, p) in acc.iter_mut().zip(subspace.project_slice(&delta)) {
        *a += p;
    }
}

pub fn compose_pair(
    reference: &EmbeddingVector,
    concept: &EmbeddingVector,
    subspace: &ConceptSubspace,
) -> Result<EmbeddingVector> {
    let d = reference.dim();
    concept.expect_dim(d, "concept embedding")?;
    if subspace.dim() != d {
        return Err(Error::dim_mismatch(
            format!("subspace `{}`", subspace.concept_name()),
            d,
            subspace.dim(),
        ));
    }
    let mut out = reference.as_slice().to_vec();
    add_swap(&mut out, reference.as_slice(), concept.as_slice(), subspace);
    EmbeddingVector::from_computed(out)
}

/// One-step multi-concept composition; `K = 1` reduces to [`compose_pair`]
/// bit for bit.
pub fn compose_multi(reference: &EmbeddingVector, bindings: &[Binding]) -> Result<EmbeddingVector> {
    compose_multi_with(reference, bindings, CrossTerms::Keep)
}

pub fn compose_multi_with(
    reference: &EmbeddingVector,
    bindings: &[Binding],
    cross_terms: CrossTerms,
) -> Result<EmbeddingVector> {
    check_bindings(reference, bindings)?;
    let r = reference.as_slice();
    let mut out = r.to_vec();
    for (k, b) in bindings.iter().enumerate() {
        add_swap(&mut out, r, b.concept.as_slice(), &b.subspace);
        if cross_terms == CrossTerms::SubtractDiagnostic {
            let own = b.subspace.project_slice(b.concept.as_slice());
            for (j, other) in bindings.iter().enumerate() {
                if j != k {
                    for (o, p) in out.iter_mut().zip(other.subspace.project_slice(&own)) {
                        *o -= p;
                    }
                }
            }
        }
    }
    EmbeddingVector::from_computed(out)
}

/// Left fold of [`compose_pair`] over the bindings in order. Each step uses
/// the previous composite as its reference.
pub fn compose_sequential(
    reference: &EmbeddingVector,
    bindings: &[Binding],
) -> Result<EmbeddingVector> {
    check_bindings(reference, bindings)?;
    bindings.iter().try_fold(reference.clone(), |acc, b| {
        compose_pair(&acc, &b.concept, &b.subspace)
    })
}

/// `(1 - alpha) e1 + alpha e2`, the embedding-interpolation baseline.
pub fn interpolate(
    e1: &EmbeddingVector,
    e2: &EmbeddingVector,
    alpha: f64,
) -> Result<EmbeddingVector> {
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::AlphaOutOfRange(alpha));
    }
    e2.expect_dim(e1.dim(), "interpolation")?;
    let values = e1
        .as_slice()
        .iter()
        .zip(e2.as_slice())
        .map(|(a, b)| (1.0 - alpha) * a + alpha * b)
        .collect();
    EmbeddingVector::from_computed(values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subspace::{project, SubspaceSource};

    fn v(x: &[f64]) -> EmbeddingVector {
        EmbeddingVector::new(x.to_vec()).unwrap()
    }

    fn axis(name: &str, dim: usize, axes: &[usize]) -> ConceptSubspace {
        let rows: Vec<Vec<f64>> = axes
            .iter()
            .map(|&a| (0..dim).map(|i| if i == a { 1.0 } else { 0.0 }).collect())
            .collect();
        ConceptSubspace::from_parts(
            &rows,
            vec![1.0; axes.len()],
            name,
            SubspaceSource::TextSpanned,
        )
        .unwrap()
    }

    fn tilted() -> ConceptSubspace {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        ConceptSubspace::from_parts(
            &[vec![h, h, 0.0], vec![0.0, 0.0, 1.0]],
            vec![2.0, 1.0],
            "tilted",
            SubspaceSource::TextSpanned,
        )
        .unwrap()
    }

    #[test]
    fn identical_inputs_return_reference() {
        let e = v(&[0.3, -1.7, 2.2]);
        assert_eq!(compose_pair(&e, &e, &tilted()).unwrap(), e);
    }

    #[test]
    fn coordinate_replacement() {
        let out = compose_pair(
            &v(&[1.0, 2.0, 3.0]),
            &v(&[9.0, 8.0, 7.0]),
            &axis("x", 3, &[0]),
        )
        .unwrap();
        assert_eq!(out.as_slice(), &[9.0, 2.0, 3.0]);
    }

    #[test]
    fn rank_zero_subspace_is_no_op() {
        let e_ref = v(&[1.0, 2.0, 3.0]);
        let out = compose_pair(&e_ref, &v(&[9.0, 8.0, 7.0]), &ConceptSubspace::empty(3)).unwrap();
        assert_eq!(out, e_ref);
    }

    #[test]
    fn pair_swaps_in_subspace_component_only() {
        let s = tilted();
        let e_ref = v(&[1.0, -2.0, 0.5]);
        let e_c = v(&[4.0, 3.0, -1.0]);
        let out = compose_pair(&e_ref, &e_c, &s).unwrap();
        let inside = project(&s, &out).unwrap();
        let want_inside = project(&s, &e_c).unwrap();
        for (a, b) in inside.as_slice().iter().zip(want_inside.as_slice()) {
            assert!((a - b).abs() < 1e-12);
        }
        let ref_in = project(&s, &e_ref).unwrap();
        for i in 0..3 {
            let out_perp = out.as_slice()[i] - inside.as_slice()[i];
            let ref_perp = e_ref.as_slice()[i] - ref_in.as_slice()[i];
            assert!((out_perp - ref_perp).abs() < 1e-12);
        }
    }

    #[test]
    fn single_binding_multi_is_bitwise_pair() {
        let s = tilted();
        let (e_ref, e_c) = (v(&[0.1, 0.2, 0.3]), v(&[-1.3, 2.9, 0.7]));
        let pair = compose_pair(&e_ref, &e_c, &s).unwrap();
        let multi = compose_multi(&e_ref, &[Binding::new(e_c.clone(), s.clone())]).unwrap();
        let seq = compose_sequential(&e_ref, &[Binding::new(e_c, s)]).unwrap();
        assert_eq!(pair, multi);
        assert_eq!(pair, seq);
    }

    #[test]
    fn disjoint_axes_one_step() {
        let bindings = vec![
            Binding::new(v(&[5.0; 4]), axis("a", 4, &[0])),
            Binding::new(v(&[7.0; 4]), axis("b", 4, &[1])),
        ];
        let out = compose_multi(&v(&[1.0; 4]), &bindings).unwrap();
        assert_eq!(out.as_slice(), &[5.0, 7.0, 1.0, 1.0]);
    }

    #[test]
    fn overlapping_subspaces_one_step_vs_sequential() {
        let bindings = vec![
            Binding::new(v(&[3.0, 0.0]), axis("a", 2, &[0])),
            Binding::new(v(&[5.0, 0.0]), axis("b", 2, &[0])),
        ];
        let e_ref = v(&[1.0, 1.0]);
        assert_eq!(
            compose_multi(&e_ref, &bindings).unwrap().as_slice(),
            &[7.0, 1.0]
        );
        assert_eq!(
            compose_sequential(&e_ref, &bindings).unwrap().as_slice(),
            &[5.0, 1.0]
        );
        let plan =
            CompositionPlan::new(e_ref.clone(), bindings.clone(), CompositionMode::Sequential)
                .unwrap();
        assert_eq!(plan.compose().unwrap().as_slice(), &[5.0, 1.0]);
    }

    #[test]
    fn cross_subtraction_diagnostic_differs_only_on_overlap() {
        let disjoint = vec![
            Binding::new(v(&[5.0; 4]), axis("a", 4, &[0])),
            Binding::new(v(&[7.0; 4]), axis("b", 4, &[1])),
        ];
        let e_ref = v(&[1.0; 4]);
        assert_eq!(
            compose_multi_with(&e_ref, &disjoint, CrossTerms::SubtractDiagnostic).unwrap(),
            compose_multi(&e_ref, &disjoint).unwrap()
        );
        let overlapping = vec![
            Binding::new(v(&[3.0, 0.0]), axis("a", 2, &[0])),
            Binding::new(v(&[5.0, 0.0]), axis("b", 2, &[0])),
        ];
        // [7, 1] minus P_b P_a e_a = [3, 0] and P_a P_b e_b = [5, 0].
        let out = compose_multi_with(
            &v(&[1.0, 1.0]),
            &overlapping,
            CrossTerms::SubtractDiagnostic,
        )
        .unwrap();
        assert_eq!(out.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn empty_plan_and_dim_mismatch() {
        let e_ref = v(&[1.0, 2.0]);
        assert!(matches!(compose_multi(&e_ref, &[]), Err(Error::EmptyPlan)));
        assert!(matches!(
            CompositionPlan::new(e_ref.clone(), vec![], CompositionMode::OneStep),
            Err(Error::EmptyPlan)
        ));
        let bad = vec![Binding::new(v(&[1.0, 2.0, 3.0]), axis("a", 3, &[0]))];
        assert!(matches!(
            compose_multi(&e_ref, &bad),
            Err(Error::DimMismatch {
                expected: 2,
                found: 3,
                ..
            })
        ));
        let bad_sub = vec![Binding::new(v(&[1.0, 2.0]), axis("a", 3, &[0]))];
        assert!(matches!(
            compose_sequential(&e_ref, &bad_sub),
            Err(Error::DimMismatch { .. })
        ));
        assert!(compose_pair(&e_ref, &v(&[1.0]), &axis("a", 2, &[0])).is_err());
    }

    #[test]
    fn duplicate_concepts_are_flagged_not_rejected() {
        let bindings = vec![
            Binding::new(v(&[3.0, 0.0]), axis("pattern", 2, &[0])),
            Binding::new(v(&[5.0, 0.0]), axis("pattern", 2, &[0])),
        ];
        let plan =
            CompositionPlan::new(v(&[1.0, 1.0]), bindings, CompositionMode::OneStep).unwrap();
        assert_eq!(
            plan.warnings(),
            &[PlanWarning::DuplicateConcept {
                name: "pattern".into(),
                count: 2
            }]
        );
    }

    #[test]
    fn interpolation_endpoints_and_midpoint() {
        let (a, b) = (v(&[2.0, 0.0]), v(&[0.0, 2.0]));
        assert_eq!(interpolate(&a, &b, 0.0).unwrap(), a);
        assert_eq!(interpolate(&a, &b, 1.0).unwrap(), b);
        assert_eq!(interpolate(&a, &b, 0.5).unwrap().as_slice(), &[1.0, 1.0]);
        assert!(matches!(
            interpolate(&a, &b, 1.5),
            Err(Error::AlphaOutOfRange(_))
        ));
        assert!(interpolate(&a, &b, -0.1).is_err());
        assert!(interpolate(&a, &b, f64::NAN).is_err());
        assert!(interpolate(&a, &v(&[1.0]), 0.5).is_err());
    }
}
