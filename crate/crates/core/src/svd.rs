//! Thin SVD of an embedding matrix, right-singular side only.

use nalgebra::DMatrix;

use crate::embedding::{dot, EmbeddingMatrix};
use crate::error::{Error, Result};

/// Singular values in non-increasing order and the matching right-singular
/// vectors (rows of `V^T`), `min(n, d)` of each.
#[derive(Debug, Clone, PartialEq)]
pub struct SvdResult {
    singular_values: Vec<f64>,
    right_vectors: Vec<f64>,
    dim: usize,
    effective_rank: usize,
}

impl SvdResult {
    pub fn singular_values(&self) -> &[f64] {
        &self.singular_values
    }

    /// Number of retained singular triplets, `min(n, d)`.
    pub fn len(&self) -> usize {
        self.singular_values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.singular_values.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn right_vector(&self, i: usize) -> &[f64] {
        &self.right_vectors[i * self.dim..(i + 1) * self.dim]
    }

    /// Row-major `min(n, d) x d` block of right-singular vectors.
    pub fn right_vectors(&self) -> &[f64] {
        &self.right_vectors
    }

    /// Count of singular values above `max(n, d) * eps * sigma_1`.
    pub fn effective_rank(&self) -> usize {
        self.effective_rank
    }

    /// Left-singular vector `u_i = E v_i / sigma_i`, or `None` when
    /// `sigma_i` is zero.
    pub fn left_vector(&self, matrix: &EmbeddingMatrix, i: usize) -> Option<Vec<f64>> {
        let sigma = self.singular_values[i];
        if sigma == 0.0 {
            return None;
        }
        let v = self.right_vector(i);
        Some(matrix.iter_rows().map(|row| dot(row, v) / sigma).collect())
    }
}

/// Flip `v` so that its largest-magnitude entry is positive. The first index
/// wins among equal magnitudes.
pub(crate) fn normalize_sign(v: &mut [f64]) {
    let mut pivot = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[pivot].abs() {
            pivot = i;
        }
    }
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

pub fn compute_svd(matrix: &EmbeddingMatrix) -> Result<SvdResult> {
    let (n, d) = (matrix.rows(), matrix.dim());
    let k = n.min(d);
    let a = DMatrix::from_row_slice(n, d, matrix.as_slice());

    let max_iterations = 1000 * k.max(1);
    let svd = a
        .try_svd(false, true, f64::EPSILON, max_iterations)
        .ok_or(Error::SvdNonConvergence { rows: n, cols: d })?;
    let v_t = svd
        .v_t
        .ok_or(Error::SvdNonConvergence { rows: n, cols: d })?;

    let sigma = svd.singular_values;
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| sigma[j].total_cmp(&sigma[i]).then(i.cmp(&j)));

    let mut singular_values = Vec::with_capacity(k);
    let mut right_vectors = Vec::with_capacity(k * d);
    for &i in &order {
        let s = sigma[i];
        if !s.is_finite() {
            return Err(Error::SvdNonConvergence { rows: n, cols: d });
        }
        singular_values.push(s.max(0.0));
        let start = right_vectors.len();
        right_vectors.extend(v_t.row(i).iter().copied());
        normalize_sign(&mut right_vectors[start..]);
    }

    let tolerance = n.max(d) as f64 * f64::EPSILON * singular_values[0];
    let effective_rank = singular_values.iter().filter(|&&s| s > tolerance).count();

    Ok(SvdResult {
        singular_values,
        right_vectors,
        dim: d,
        effective_rank,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle;

    fn matrix(rows: &[&[f64]]) -> EmbeddingMatrix {
        EmbeddingMatrix::from_rows(rows).unwrap()
    }

    fn assert_close(a: &[f64], b: &[f64], tol: f64) {
        assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(b) {
            assert!((x - y).abs() <= tol, "{a:?} vs {b:?}");
        }
    }

    #[test]
    fn diagonal_matrix() {
        let svd = compute_svd(&matrix(&[&[2.0, 0.0, 0.0], &[0.0, 1.0, 0.0]])).unwrap();
        assert_close(svd.singular_values(), &[2.0, 1.0], 1e-15);
        assert_close(svd.right_vector(0), &[1.0, 0.0, 0.0], 1e-15);
        assert_close(svd.right_vector(1), &[0.0, 1.0, 0.0], 1e-15);
        assert_eq!(svd.effective_rank(), 2);
    }

    #[test]
    fn single_row_is_rank_one() {
        let x = [3.0, -4.0, 12.0];
        let svd = compute_svd(&matrix(&[&x])).unwrap();
        assert_eq!(svd.len(), 1);
        assert!((svd.singular_values()[0] - 13.0).abs() < 1e-12);
        let expected: Vec<f64> = x.iter().map(|v| v / 13.0).collect();
        assert_close(svd.right_vector(0), &expected, 1e-12);
    }

    #[test]
    fn integer_five_by_four_matches_eigen_oracle() {
        let rows: Vec<Vec<f64>> = vec![
            vec![3.0, -1.0, 2.0, 0.0],
            vec![1.0, 2.0, -3.0, 1.0],
            vec![0.0, 1.0, 1.0, -2.0],
            vec![-2.0, 0.0, 1.0, 3.0],
            vec![2.0, -3.0, 0.0, 1.0],
        ];
        let svd = compute_svd(&EmbeddingMatrix::from_rows(&rows).unwrap()).unwrap();
        let oracle = oracle::singular_values(&rows);
        assert_close(svd.singular_values(), &oracle, 1e-8);
        // Frozen from an independent LAPACK run.
        let frozen = [
            5.138254476580371,
            4.170151887974753,
            3.865917639296203,
            2.064668247273847,
        ];
        assert_close(svd.singular_values(), &frozen, 1e-8);
    }

    #[test]
    fn right_vectors_are_orthonormal_and_sign_normalized() {
        let svd = compute_svd(&matrix(&[
            &[1.0, 2.0, 0.0, -1.0],
            &[3.0, -1.0, 2.0, 0.0],
            &[0.0, 2.0, -2.0, 1.0],
        ]))
        .unwrap();
        for i in 0..svd.len() {
            for j in 0..svd.len() {
                let g = dot(svd.right_vector(i), svd.right_vector(j));
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((g - want).abs() < 1e-12);
            }
            let v = svd.right_vector(i);
            let pivot = v
                .iter()
                .copied()
                .fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
            assert!(pivot > 0.0);
        }
    }

    #[test]
    fn sign_tie_breaks_on_lowest_index() {
        let mut v = [-0.5, 0.5, 0.5, -0.5];
        normalize_sign(&mut v);
        assert_eq!(v, [0.5, -0.5, -0.5, 0.5]);
    }

    #[test]
    fn rank_deficient_effective_rank() {
        let svd = compute_svd(&matrix(&[&[1.0, 2.0], &[2.0, 4.0], &[3.0, 6.0]])).unwrap();
        assert_eq!(svd.len(), 2);
        assert_eq!(svd.effective_rank(), 1);
    }
}
