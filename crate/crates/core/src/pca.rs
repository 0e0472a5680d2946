//! Principal component analysis: population covariance, cyclic Jacobi
//! eigendecomposition, and projection onto the leading components.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::Matrix;
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum PcaError {
    #[error("need at least 2 rows, got {0}")]
    TooFewRows(usize),
    #[error("matrix is not symmetric within {0:e}")]
    NotSymmetric(f64),
    #[error("Jacobi sweep limit reached without convergence")]
    NoConvergence,
    #[error("all eigenvalues are zero; data has no variance")]
    ZeroVariance,
    #[error("target dimension {q} not in [1, {d}]")]
    BadDimension { q: usize, d: usize },
}

/// Default absolute tolerance on the off-diagonal Frobenius norm.
pub const JACOBI_TOL: f64 = 1e-12;
/// Default sweep budget for the Jacobi iteration.
pub const JACOBI_MAX_SWEEPS: usize = 100;

/// Population covariance `(1/n) Σ (x - x̄)(x - x̄)ᵀ`.
pub fn covariance<F: Real>(matrix: &Matrix<F>) -> Result<Matrix<F>, PcaError> {
    let n = matrix.rows();
    if n < 2 {
        return Err(PcaError::TooFewRows(n));
    }
    let d = matrix.cols();
    let means = matrix.column_means();
    let mut cov = Matrix::zeros(d, d);
    for row in matrix.row_iter() {
        for i in 0..d {
            let di = row[i] - means[i];
            for j in i..d {
                let dj = row[j] - means[j];
                let v = cov.get(i, j) + di * dj;
                cov.set(i, j, v);
            }
        }
    }
    let denom = F::from_usize(n).expect("row count");
    for i in 0..d {
        for j in i..d {
            let v = cov.get(i, j) / denom;
            cov.set(i, j, v);
            cov.set(j, i, v);
        }
    }
    Ok(cov)
}

fn off_diagonal_norm<F: Real>(a: &Matrix<F>) -> F {
    let n = a.rows();
    let mut sum = F::zero();
    for p in 0..n {
        for q in 0..n {
            if p != q {
                sum += a.get(p, q) * a.get(p, q);
            }
        }
    }
    sum.sqrt()
}

/// Eigendecomposition of a symmetric matrix via cyclic Jacobi rotations,
/// with the default tolerance and sweep budget.
///
/// Returns eigenvalues in descending order and the matrix whose columns are
/// the matching eigenvectors. Each eigenvector is oriented so its
/// largest-magnitude entry is positive, which makes simple spectra unique.
pub fn eigen_sym<F: Real>(s: &Matrix<F>) -> Result<(Vec<F>, Matrix<F>), PcaError> {
    eigen_sym_with(s, JACOBI_TOL, JACOBI_MAX_SWEEPS)
}

/// [`eigen_sym`] with an explicit off-diagonal tolerance and sweep budget
/// (useful for `f32`, where the default tolerance is unreachable).
pub fn eigen_sym_with<F: Real>(
    s: &Matrix<F>,
    tol: f64,
    max_sweeps: usize,
) -> Result<(Vec<F>, Matrix<F>), PcaError> {
    let n = s.rows();
    assert_eq!(n, s.cols(), "eigen_sym needs a square matrix");
    let sym_tol = F::from_f64_lossy(1e-12);
    for p in 0..n {
        for q in (p + 1)..n {
            if (s.get(p, q) - s.get(q, p)).abs() > sym_tol {
                return Err(PcaError::NotSymmetric(1e-12));
            }
        }
    }

    let tol = F::from_f64_lossy(tol);
    let mut a = s.clone();
    let mut v = Matrix::identity(n);

    let mut converged = false;
    for _ in 0..max_sweeps {
        if off_diagonal_norm(&a) < tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a.get(p, q);
                if apq == F::zero() {
                    continue;
                }
                let theta = (a.get(q, q) - a.get(p, p)) / (F::from_f64_lossy(2.0) * apq);
                // smaller-magnitude root of t² + 2θt − 1 = 0; fall back to
                // the asymptote when θ² would overflow
                let t = if theta.abs() > F::from_f64_lossy(1e150) {
                    (F::from_f64_lossy(2.0) * theta).recip()
                } else {
                    let sign = if theta < F::zero() {
                        -F::one()
                    } else {
                        F::one()
                    };
                    sign / (theta.abs() + (theta * theta + F::one()).sqrt())
                };
                let c = (t * t + F::one()).sqrt().recip();
                let sn = t * c;

                for j in 0..n {
                    let apj = a.get(p, j);
                    let aqj = a.get(q, j);
                    a.set(p, j, c * apj - sn * aqj);
                    a.set(q, j, sn * apj + c * aqj);
                }
                for j in 0..n {
                    let ajp = a.get(j, p);
                    let ajq = a.get(j, q);
                    a.set(j, p, c * ajp - sn * ajq);
                    a.set(j, q, sn * ajp + c * ajq);
                }
                for j in 0..n {
                    let vjp = v.get(j, p);
                    let vjq = v.get(j, q);
                    v.set(j, p, c * vjp - sn * vjq);
                    v.set(j, q, sn * vjp + c * vjq);
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) >= tol {
        return Err(PcaError::NoConvergence);
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        a.get(j, j)
            .partial_cmp(&a.get(i, i))
            .expect("finite eigenvalues")
    });

    let eigenvalues: Vec<F> = order.iter().map(|&i| a.get(i, i)).collect();
    let mut vectors = Matrix::zeros(n, n);
    for (col, &src) in order.iter().enumerate() {
        let mut dominant = 0;
        for r in 1..n {
            if v.get(r, src).abs() > v.get(dominant, src).abs() {
                dominant = r;
            }
        }
        let flip = v.get(dominant, src) < F::zero();
        for r in 0..n {
            let val = v.get(r, src);
            vectors.set(r, col, if flip { -val } else { val });
        }
    }
    Ok((eigenvalues, vectors))
}

/// Fitted projection basis. `components` columns are eigenvectors of the
/// covariance matrix, highest variance first; it serializes row-major as a
/// list of rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Copy + serde::Serialize",
    deserialize = "F: Copy + serde::Deserialize<'de>"
))]
pub struct PcaModel<F> {
    pub column_means: Vec<F>,
    pub eigenvalues: Vec<F>,
    pub components: Matrix<F>,
    pub explained_variance_ratio: Vec<F>,
}

/// Fits the covariance eigenbasis of `matrix`.
pub fn fit<F: Real>(matrix: &Matrix<F>) -> Result<PcaModel<F>, PcaError> {
    let cov = covariance(matrix)?;
    let (raw_values, components) = eigen_sym(&cov)?;

    // covariance is PSD; tiny negative eigenvalues are rounding noise
    let floor = F::from_f64_lossy(-1e-10);
    let eigenvalues: Vec<F> = raw_values
        .into_iter()
        .map(|l| {
            debug_assert!(l >= floor, "covariance produced eigenvalue {l}");
            l.max(F::zero())
        })
        .collect();

    let total: F = eigenvalues.iter().cloned().sum();
    if total <= F::zero() {
        return Err(PcaError::ZeroVariance);
    }
    let explained_variance_ratio = eigenvalues.iter().map(|&l| l / total).collect();
    Ok(PcaModel {
        column_means: matrix.column_means(),
        eigenvalues,
        components,
        explained_variance_ratio,
    })
}

/// Projects rows onto the first `q` components: `Z = (X - x̄) W_q`.
/// Rows are centered on the fitted means so the projection has zero mean.
pub fn project<F: Real>(
    matrix: &Matrix<F>,
    model: &PcaModel<F>,
    q: usize,
) -> Result<Matrix<F>, PcaError> {
    let d = model.components.rows();
    if q < 1 || q > d {
        return Err(PcaError::BadDimension { q, d });
    }
    if matrix.cols() != d {
        return Err(PcaError::BadDimension {
            q: matrix.cols(),
            d,
        });
    }
    let mut out = Matrix::zeros(matrix.rows(), q);
    for (i, row) in matrix.row_iter().enumerate().take(matrix.rows()) {
        for j in 0..q {
            let mut acc = F::zero();
            for c in 0..d {
                acc += (row[c] - model.column_means[c]) * model.components.get(c, j);
            }
            out.set(i, j, acc);
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> Matrix<f64> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data: Vec<f64> = (0..rows * cols).map(|_| rng.random::<f64>()).collect();
        Matrix::from_flat(rows, cols, data)
    }

    #[test]
    fn covariance_of_two_points_is_unit() {
        let m = Matrix::from_rows(&[vec![0.0], vec![2.0]]);
        let cov = covariance(&m).unwrap();
        assert_eq!(cov.get(0, 0), 1.0);
    }

    #[test]
    fn constant_column_yields_zero_band() {
        let m = Matrix::from_rows(&[vec![1.0, 5.0], vec![2.0, 5.0], vec![3.0, 5.0]]);
        let cov = covariance(&m).unwrap();
        assert_eq!(cov.get(0, 1), 0.0);
        assert_eq!(cov.get(1, 0), 0.0);
        assert_eq!(cov.get(1, 1), 0.0);
    }

    #[test]
    fn covariance_matches_moment_identity() {
        // independent route: Cov(x, y) = E[xy] − E[x]E[y]
        let m = random_matrix(50, 4, 17);
        let cov = covariance(&m).unwrap();
        let n = m.rows() as f64;
        for i in 0..4 {
            for j in 0..4 {
                let mean_i: f64 = m.column(i).iter().sum::<f64>() / n;
                let mean_j: f64 = m.column(j).iter().sum::<f64>() / n;
                let mean_ij: f64 = (0..m.rows())
                    .map(|r| m.get(r, i) * m.get(r, j))
                    .sum::<f64>()
                    / n;
                let expected = mean_ij - mean_i * mean_j;
                assert!((cov.get(i, j) - expected).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn too_few_rows_is_an_error() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0]]);
        assert!(matches!(covariance(&m), Err(PcaError::TooFewRows(1))));
    }

    #[test]
    fn diagonal_matrix_is_its_own_decomposition() {
        let s = Matrix::from_rows(&[vec![2.0, 0.0], vec![0.0, 1.0]]);
        let (values, vectors) = eigen_sym(&s).unwrap();
        assert_eq!(values, vec![2.0, 1.0]);
        assert_eq!(vectors, Matrix::identity(2));
    }

    #[test]
    fn rank_one_matrix_decomposes_by_hand() {
        let s: Matrix<f64> = Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 1.0]]);
        let (values, vectors) = eigen_sym(&s).unwrap();
        assert!((values[0] - 2.0).abs() < 1e-12);
        assert!(values[1].abs() < 1e-12);
        assert!((vectors.get(0, 0) - SQRT_HALF).abs() < 1e-12);
        assert!((vectors.get(1, 0) - SQRT_HALF).abs() < 1e-12);
    }

    #[test]
    fn asymmetric_input_is_rejected() {
        let s = Matrix::from_rows(&[vec![1.0, 2.0], vec![1.0, 1.0]]);
        assert!(matches!(eigen_sym(&s), Err(PcaError::NotSymmetric(_))));
    }

    #[test]
    fn eigen_pairs_satisfy_the_residual_equation() {
        for seed in 0..25 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut s = Matrix::zeros(4, 4);
            for i in 0..4 {
                for j in i..4 {
                    let v: f64 = rng.random::<f64>() * 2.0 - 1.0;
                    s.set(i, j, v);
                    s.set(j, i, v);
                }
            }
            let (values, vectors) = eigen_sym(&s).unwrap();
            for (idx, &lambda) in values.iter().enumerate() {
                for r in 0..4 {
                    let sv: f64 = (0..4).map(|c| s.get(r, c) * vectors.get(c, idx)).sum();
                    assert!(
                        (sv - lambda * vectors.get(r, idx)).abs() < 1e-10,
                        "residual too large on seed {seed}"
                    );
                }
            }
            // descending order
            for w in values.windows(2) {
                assert!(w[0] >= w[1]);
            }
        }
    }

    #[test]
    fn line_data_concentrates_variance_on_one_component() {
        let m: Matrix<f64> = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        let model = fit(&m).unwrap();
        assert!((model.explained_variance_ratio[0] - 1.0).abs() < 1e-12);
        assert!(model.explained_variance_ratio[1].abs() < 1e-12);
        assert!((model.components.get(0, 0) - SQRT_HALF).abs() < 1e-12);
        assert!((model.components.get(1, 0) - SQRT_HALF).abs() < 1e-12);
    }

    #[test]
    fn known_spectrum_gives_known_ratios() {
        let r = 3.0f64.sqrt();
        let m = Matrix::from_rows(&[vec![r, 1.0], vec![r, -1.0], vec![-r, 1.0], vec![-r, -1.0]]);
        let model = fit(&m).unwrap();
        assert!((model.eigenvalues[0] - 3.0).abs() < 1e-12);
        assert!((model.eigenvalues[1] - 1.0).abs() < 1e-12);
        assert!((model.explained_variance_ratio[0] - 0.75).abs() < 1e-12);
        assert!((model.explained_variance_ratio[1] - 0.25).abs() < 1e-12);
    }

    #[test]
    fn isotropic_data_splits_variance_evenly() {
        let m: Matrix<f64> = Matrix::from_rows(&[
            vec![1.0, 0.0],
            vec![-1.0, 0.0],
            vec![0.0, 1.0],
            vec![0.0, -1.0],
        ]);
        let model = fit(&m).unwrap();
        assert!((model.explained_variance_ratio[0] - 0.5).abs() < 1e-12);
        assert!((model.explained_variance_ratio[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn zero_variance_data_is_an_error() {
        let m = Matrix::from_rows(&[vec![3.0, 3.0], vec![3.0, 3.0]]);
        assert!(matches!(fit(&m), Err(PcaError::ZeroVariance)));
    }

    #[test]
    fn identity_model_projects_to_the_input() {
        let m = Matrix::from_rows(&[vec![1.0, 2.0], vec![3.0, 4.0]]);
        let model = PcaModel {
            column_means: vec![0.0, 0.0],
            eigenvalues: vec![1.0, 1.0],
            components: Matrix::identity(2),
            explained_variance_ratio: vec![0.5, 0.5],
        };
        assert_eq!(project(&m, &model, 2).unwrap(), m);
    }

    #[test]
    fn line_data_projects_to_signed_distances() {
        let m = Matrix::from_rows(&[vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]]);
        let model = fit(&m).unwrap();
        let z = project(&m, &model, 1).unwrap();
        let sqrt2 = std::f64::consts::SQRT_2;
        assert!((z.get(0, 0) + sqrt2).abs() < 1e-12);
        assert!(z.get(1, 0).abs() < 1e-12);
        assert!((z.get(2, 0) - sqrt2).abs() < 1e-12);
    }

    #[test]
    fn projected_variances_match_eigenvalues() {
        let m = random_matrix(50, 4, 23);
        let model = fit(&m).unwrap();
        let z = project(&m, &model, 2).unwrap();
        let zc = covariance(&z).unwrap();
        for j in 0..2 {
            assert!((zc.get(j, j) - model.eigenvalues[j]).abs() < 1e-10);
        }
    }

    #[test]
    fn bad_dimension_is_rejected() {
        let m = random_matrix(10, 3, 2);
        let model = fit(&m).unwrap();
        assert!(matches!(
            project(&m, &model, 0),
            Err(PcaError::BadDimension { .. })
        ));
        assert!(matches!(
            project(&m, &model, 4),
            Err(PcaError::BadDimension { .. })
        ));
    }

    #[test]
    fn components_are_orthonormal_and_trace_is_preserved() {
        let m = random_matrix(40, 4, 31);
        let model = fit(&m).unwrap();
        let w = &model.components;
        let gram = w.transpose().matmul(w);
        for i in 0..4 {
            for j in 0..4 {
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((gram.get(i, j) - expected).abs() < 1e-10);
            }
        }
        let cov = covariance(&m).unwrap();
        let trace: f64 = (0..4).map(|i| cov.get(i, i)).sum();
        let total: f64 = model.eigenvalues.iter().sum();
        assert!((trace - total).abs() < 1e-10);
        let ratio_sum: f64 = model.explained_variance_ratio.iter().sum();
        assert!((ratio_sum - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_rank_back_projection_reconstructs_the_input() {
        let m = random_matrix(30, 4, 41);
        let model = fit(&m).unwrap();
        let z = project(&m, &model, 4).unwrap();
        let back = z.matmul(&model.components.transpose());
        for i in 0..m.rows() {
            for j in 0..4 {
                let rebuilt = back.get(i, j) + model.column_means[j];
                assert!((rebuilt - m.get(i, j)).abs() < 1e-9);
            }
        }
    }
}
