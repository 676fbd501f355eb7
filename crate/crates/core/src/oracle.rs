//! Brute-force reference computations for tests.
//!
//! Nothing here shares code with the SVD or the factored projection path:
//! eigenpairs come from a cyclic Jacobi sweep over the dense Gram matrix
//! `E^T E`, projectors are materialized as dense `d x d` matrices, and the
//! composition formulas are evaluated term by term.

/// Eigenvalues (descending) and matching unit eigenvectors of a symmetric
/// matrix given row-major as `n x n`.
pub fn symmetric_eigen(matrix: &[f64], n: usize) -> (Vec<f64>, Vec<Vec<f64>>) {
    assert_eq!(matrix.len(), n * n);
    let mut a = matrix.to_vec();
    let mut v = vec![0.0; n * n];
    for i in 0..n {
        v[i * n + i] = 1.0;
    }

    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * n + j] * a[i * n + j])
            .sum();
        let scale: f64 = a.iter().map(|x| x * x).sum();
        if off <= 1e-30 * scale.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * n + p];
                let aqq = a[q * n + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k * n + p];
                    let akq = a[k * n + q];
                    a[k * n + p] = c * akp - s * akq;
                    a[k * n + q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p * n + k];
                    let aqk = a[q * n + k];
                    a[p * n + k] = c * apk - s * aqk;
                    a[q * n + k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k * n + p];
                    let vkq = v[k * n + q];
                    v[k * n + p] = c * vkp - s * vkq;
                    v[k * n + q] = s * vkp + c * vkq;
                }
            }
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[j * n + j].total_cmp(&a[i * n + i]));
    let values = order.iter().map(|&i| a[i * n + i]).collect();
    let vectors = order
        .iter()
        .map(|&i| (0..n).map(|k| v[k * n + i]).collect())
        .collect();
    (values, vectors)
}

/// Dense `E^T E` for an `n x d` row-major matrix.
pub fn gram(rows: &[Vec<f64>]) -> Vec<f64> {
    let d = rows[0].len();
    let mut g = vec![0.0; d * d];
    for row in rows {
        for i in 0..d {
            for j in 0..d {
                g[i * d + j] += row[i] * row[j];
            }
        }
    }
    g
}

/// Singular values of `E` as square roots of the eigenvalues of the smaller
/// Gram matrix, truncated to `min(n, d)` entries.
pub fn singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    squared_singular_values(rows)
        .into_iter()
        .map(f64::sqrt)
        .collect()
}

/// Squared singular values of `E`, via whichever Gram matrix is smaller.
pub fn squared_singular_values(rows: &[Vec<f64>]) -> Vec<f64> {
    let n = rows.len();
    let d = rows[0].len();
    let values = if n < d {
        let mut g = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                g[i * n + j] = rows[i].iter().zip(&rows[j]).map(|(a, b)| a * b).sum();
            }
        }
        symmetric_eigen(&g, n).0
    } else {
        symmetric_eigen(&gram(rows), d).0
    };
    values
        .into_iter()
        .take(n.min(d))
        .map(|l| l.max(0.0))
        .collect()
}

/// Dense `d x d` projector onto the top-`rank` eigenvectors of `E^T E`.
pub fn top_projector(rows: &[Vec<f64>], rank: usize) -> Vec<Vec<f64>> {
    let d = rows[0].len();
    let (_, vectors) = symmetric_eigen(&gram(rows), d);
    projector_from_rows(&vectors[..rank])
}

/// Dense `B^T B` for a stack of basis rows.
pub fn projector_from_rows(basis: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let d = basis[0].len();
    let mut p = vec![vec![0.0; d]; d];
    for b in basis {
        for i in 0..d {
            for j in 0..d {
                p[i][j] += b[i] * b[j];
            }
        }
    }
    p
}

pub fn apply(p: &[Vec<f64>], x: &[f64]) -> Vec<f64> {
    p.iter()
        .map(|row| row.iter().zip(x).map(|(a, b)| a * b).sum())
        .collect()
}

/// `e_ref - sum_k P_k e_ref + sum_k P_k e_k`, evaluated term by term.
pub fn compose_one_step(reference: &[f64], terms: &[(&[Vec<f64>], &[f64])]) -> Vec<f64> {
    let mut out = reference.to_vec();
    for (p, concept) in terms {
        let pr = apply(p, reference);
        let pc = apply(p, concept);
        for i in 0..out.len() {
            out[i] = out[i] - pr[i] + pc[i];
        }
    }
    out
}

/// Pairwise formula folded left over the bindings.
pub fn compose_fold(reference: &[f64], terms: &[(&[Vec<f64>], &[f64])]) -> Vec<f64> {
    let mut acc = reference.to_vec();
    for (p, concept) in terms {
        acc = compose_one_step(&acc, &[(p, concept)]);
    }
    acc
}
