//! Clustering validity indices: silhouette and Calinski-Harabasz against the
//! feature space, adjusted Rand index and homogeneity against truth labels.

use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use thiserror::Error;

use crate::matrix::{euclidean_distance, squared_distance, Matrix};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("silhouette needs at least 2 clusters")]
    SingleCluster,
    #[error("cluster count {k} must satisfy 2 <= k <= n-1 for n = {n}")]
    BadClusterCount { k: usize, n: usize },
    #[error("label slices must be equal-length and non-empty")]
    LengthMismatch,
}

/// Per-point, per-cluster, and overall silhouette values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SilhouetteReport<F> {
    pub per_point: Vec<F>,
    /// Indexed by cluster id; clusters absent from `labels` read 0.
    pub per_cluster_mean: Vec<F>,
    pub overall_mean: F,
}

fn group_by_label(labels: &[usize]) -> Vec<Vec<usize>> {
    let k = labels.iter().copied().max().map_or(0, |m| m + 1);
    let mut clusters = vec![Vec::new(); k];
    for (i, &label) in labels.iter().enumerate() {
        clusters[label].push(i);
    }
    clusters
}

/// Silhouette coefficients under Euclidean distance. `a(i)` is the mean
/// distance to the rest of the point's own cluster, `b(i)` the smallest mean
/// distance to another cluster; singletons score 0 by convention.
pub fn silhouette<F: Real>(
    matrix: &Matrix<F>,
    labels: &[usize],
) -> Result<SilhouetteReport<F>, MetricsError> {
    assert_eq!(matrix.rows(), labels.len(), "one label per row");
    let clusters = group_by_label(labels);
    let occupied = clusters.iter().filter(|c| !c.is_empty()).count();
    if occupied < 2 {
        return Err(MetricsError::SingleCluster);
    }

    let n = matrix.rows();
    let k = clusters.len();
    let mut per_point = vec![F::zero(); n];
    for i in 0..n {
        let own = labels[i];
        if clusters[own].len() == 1 {
            continue; // singleton: s = 0
        }
        let mut dist_sums = vec![F::zero(); k];
        for j in 0..n {
            if j != i {
                dist_sums[labels[j]] += euclidean_distance(matrix.row(i), matrix.row(j));
            }
        }
        let a = dist_sums[own] / F::from_usize(clusters[own].len() - 1).expect("cluster size");
        let mut b = F::infinity();
        for (c, members) in clusters.iter().enumerate() {
            if c != own && !members.is_empty() {
                let mean = dist_sums[c] / F::from_usize(members.len()).expect("cluster size");
                b = b.min(mean);
            }
        }
        let denom = a.max(b);
        per_point[i] = if denom > F::zero() {
            (b - a) / denom
        } else {
            F::zero()
        };
    }

    let per_cluster_mean = clusters
        .iter()
        .map(|members| {
            if members.is_empty() {
                F::zero()
            } else {
                members.iter().map(|&i| per_point[i]).sum::<F>()
                    / F::from_usize(members.len()).expect("cluster size")
            }
        })
        .collect();
    let overall_mean = per_point.iter().cloned().sum::<F>() / F::from_usize(n).expect("n");
    Ok(SilhouetteReport {
        per_point,
        per_cluster_mean,
        overall_mean,
    })
}

/// Variance-ratio index `[B/(k-1)] / [W/(n-k)]`; perfectly compact
/// clusterings (`W = 0`) return the infinity sentinel.
pub fn calinski_harabasz<F: Real>(matrix: &Matrix<F>, labels: &[usize]) -> Result<F, MetricsError> {
    assert_eq!(matrix.rows(), labels.len(), "one label per row");
    let n = matrix.rows();
    let clusters: Vec<Vec<usize>> = group_by_label(labels)
        .into_iter()
        .filter(|c| !c.is_empty())
        .collect();
    let k = clusters.len();
    if k < 2 || k > n.saturating_sub(1) {
        return Err(MetricsError::BadClusterCount { k, n });
    }

    let grand_mean = matrix.column_means();
    let d = matrix.cols();
    let mut between = F::zero();
    let mut within = F::zero();
    for members in &clusters {
        let mut mean = vec![F::zero(); d];
        for &i in members {
            for (m, &v) in mean.iter_mut().zip(matrix.row(i)) {
                *m += v;
            }
        }
        let size = F::from_usize(members.len()).expect("cluster size");
        for m in &mut mean {
            *m /= size;
        }
        between += size * squared_distance(&mean, &grand_mean);
        for &i in members {
            within += squared_distance(matrix.row(i), &mean);
        }
    }
    if within == F::zero() {
        return Ok(F::infinity());
    }
    let k_f = F::from_usize(k).expect("k");
    let n_f = F::from_usize(n).expect("n");
    Ok((between / (k_f - F::one())) / (within / (n_f - k_f)))
}

fn contingency(truth: &[usize], predicted: &[usize]) -> Result<ContingencyTable, MetricsError> {
    if truth.len() != predicted.len() || truth.is_empty() {
        return Err(MetricsError::LengthMismatch);
    }
    let mut cells: BTreeMap<(usize, usize), usize> = BTreeMap::new();
    let mut row_sums: BTreeMap<usize, usize> = BTreeMap::new();
    let mut col_sums: BTreeMap<usize, usize> = BTreeMap::new();
    for (&t, &p) in truth.iter().zip(predicted) {
        *cells.entry((t, p)).or_default() += 1;
        *row_sums.entry(t).or_default() += 1;
        *col_sums.entry(p).or_default() += 1;
    }
    Ok(ContingencyTable {
        n: truth.len(),
        cells,
        row_sums,
        col_sums,
    })
}

struct ContingencyTable {
    n: usize,
    cells: BTreeMap<(usize, usize), usize>,
    row_sums: BTreeMap<usize, usize>,
    col_sums: BTreeMap<usize, usize>,
}

fn comb2(x: usize) -> f64 {
    let x = x as f64;
    x * (x - 1.0) / 2.0
}

/// Pair-counting adjusted Rand index in `[-1, 1]`. Degenerate tables where
/// the expected index equals the maximum (both partitions trivial) score 1.
pub fn adjusted_rand_index(truth: &[usize], predicted: &[usize]) -> Result<f64, MetricsError> {
    let table = contingency(truth, predicted)?;
    let index: f64 = table.cells.values().map(|&c| comb2(c)).sum();
    let a: f64 = table.row_sums.values().map(|&c| comb2(c)).sum();
    let b: f64 = table.col_sums.values().map(|&c| comb2(c)).sum();
    let expected = a * b / comb2(table.n);
    let max = (a + b) / 2.0;
    let denom = max - expected;
    if denom == 0.0 {
        return Ok(1.0);
    }
    Ok((index - expected) / denom)
}

fn entropy(counts: impl Iterator<Item = usize>, n: f64) -> f64 {
    counts
        .filter(|&c| c > 0)
        .map(|c| {
            let p = c as f64 / n;
            -p * p.ln()
        })
        .sum()
}

/// Entropy-based homogeneity `1 - H(truth|predicted) / H(truth)` with
/// natural logarithms; a single truth class scores 1 by convention.
pub fn homogeneity(truth: &[usize], predicted: &[usize]) -> Result<f64, MetricsError> {
    let table = contingency(truth, predicted)?;
    let n = table.n as f64;
    let h_truth = entropy(table.row_sums.values().copied(), n);
    if h_truth == 0.0 {
        return Ok(1.0);
    }
    // H(C|K) = Σ_k (n_k/n) · H(C within cluster k)
    let mut h_cond = 0.0;
    for (&cluster, &size) in &table.col_sums {
        let within = table
            .cells
            .iter()
            .filter(|((_, p), _)| *p == cluster)
            .map(|(_, &c)| c);
        let nk = size as f64;
        let h_within = entropy(within, nk);
        h_cond += nk / n * h_within;
    }
    Ok(1.0 - h_cond / h_truth)
}

/// Serializable bundle of every metric a run produces. External metrics are
/// omitted when no truth labels were available.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsBundle {
    pub silhouette_mean: f64,
    pub per_cluster: Vec<f64>,
    pub calinski_harabasz: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub ari: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub homogeneity: Option<f64>,
}
