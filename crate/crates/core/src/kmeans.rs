//! Lloyd iterations minimizing within-cluster squared error, with seeded
//! initialization, restarts, an SSE-vs-k scan, and knee detection.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matrix::{squared_distance, Matrix};
use crate::scalar::Real;

#[derive(Debug, Error)]
pub enum KMeansError {
    #[error("too few points: need {needed}, got {got}")]
    TooFewPoints { needed: usize, got: usize },
    #[error("invalid k range [{k_min}, {k_max}] for {n} points")]
    BadKRange {
        k_min: usize,
        k_max: usize,
        n: usize,
    },
    #[error("invalid configuration: {0}")]
    BadConfig(&'static str),
}

/// Centroid initialization strategy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InitMethod {
    /// k distinct rows drawn uniformly without replacement.
    #[serde(rename = "random")]
    RandomPoints,
    /// First centroid uniform, the rest weighted by squared distance to the
    /// nearest centroid chosen so far.
    #[serde(rename = "plusplus")]
    PlusPlus,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct KMeansConfig {
    pub k: usize,
    pub init: InitMethod,
    pub seed: u64,
    pub max_iter: usize,
    /// Convergence threshold on the maximum squared centroid shift.
    pub tol: f64,
    pub restarts: usize,
}

impl Default for KMeansConfig {
    fn default() -> Self {
        KMeansConfig {
            k: 4,
            init: InitMethod::PlusPlus,
            seed: 0,
            max_iter: 300,
            tol: 1e-9,
            restarts: 10,
        }
    }
}

impl KMeansConfig {
    fn validate(&self) -> Result<(), KMeansError> {
        if self.k < 1 {
            return Err(KMeansError::BadConfig("k must be at least 1"));
        }
        if self.max_iter < 1 {
            return Err(KMeansError::BadConfig("max_iter must be at least 1"));
        }
        if self.restarts < 1 {
            return Err(KMeansError::BadConfig("restarts must be at least 1"));
        }
        if self.tol < 0.0 {
            return Err(KMeansError::BadConfig("tol must be non-negative"));
        }
        Ok(())
    }
}

/// Outcome of one best-of-restarts clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Copy + serde::Serialize",
    deserialize = "F: Copy + serde::Deserialize<'de>"
))]
pub struct ClusteringResult<F> {
    pub labels: Vec<usize>,
    pub centroids: Matrix<F>,
    pub sse: F,
    pub iterations: usize,
    pub converged: bool,
    pub seed_used: u64,
    /// SSE after the initial assignment and after each subsequent
    /// assign/update round of the winning restart.
    pub sse_history: Vec<F>,
}

/// Name of the sub-seed derivation, recorded in run metadata.
pub const SUB_SEED_SCHEME: &str = "splitmix64(seed + (restart + 1) * 0x9E3779B97F4A7C15)";

/// Derives the seed for restart `index` from the configured base seed.
pub fn sub_seed(seed: u64, index: u64) -> u64 {
    // splitmix64 finalizer over golden-ratio strides
    let mut z = seed.wrapping_add((index + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Picks the initial k×d centroid matrix for the configured strategy.
/// Deterministic for a given `(matrix, cfg)`.
pub fn init_centroids<F: Real>(
    matrix: &Matrix<F>,
    cfg: &KMeansConfig,
) -> Result<Matrix<F>, KMeansError> {
    cfg.validate()?;
    let n = matrix.rows();
    if n < cfg.k {
        return Err(KMeansError::TooFewPoints {
            needed: cfg.k,
            got: n,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let indices = match cfg.init {
        InitMethod::RandomPoints => sample_without_replacement(n, cfg.k, &mut rng),
        InitMethod::PlusPlus => plus_plus_indices(matrix, cfg.k, &mut rng),
    };
    let rows: Vec<Vec<F>> = indices.iter().map(|&i| matrix.row(i).to_vec()).collect();
    Ok(Matrix::from_rows(&rows))
}

fn sample_without_replacement(n: usize, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    for i in 0..k {
        let j = rng.random_range(i..n);
        pool.swap(i, j);
    }
    pool.truncate(k);
    pool
}

fn plus_plus_indices<F: Real>(matrix: &Matrix<F>, k: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = matrix.rows();
    let mut chosen = Vec::with_capacity(k);
    let first = rng.random_range(0..n);
    chosen.push(first);

    // min squared distance from each row to the chosen set
    let mut d2: Vec<F> = (0..n)
        .map(|i| squared_distance(matrix.row(i), matrix.row(first)))
        .collect();

    while chosen.len() < k {
        let total: F = d2.iter().cloned().sum();
        let next = if total > F::zero() {
            let mut target = F::from_f64_lossy(rng.random::<f64>()) * total;
            let mut pick = n - 1;
            for (i, &w) in d2.iter().enumerate() {
                if target < w {
                    pick = i;
                    break;
                }
                target -= w;
            }
            pick
        } else {
            // all remaining mass is zero (duplicate rows): fall back to a
            // uniform pick among indices not yet chosen
            let remaining: Vec<usize> = (0..n).filter(|i| !chosen.contains(i)).collect();
            remaining[rng.random_range(0..remaining.len())]
        };
        chosen.push(next);
        for i in 0..n {
            let d = squared_distance(matrix.row(i), matrix.row(next));
            if d < d2[i] {
                d2[i] = d;
            }
        }
    }
    chosen
}

/// Assigns every row to its squared-Euclidean-nearest centroid; ties go to
/// the lowest centroid index.
pub fn assign<F: Real>(matrix: &Matrix<F>, centroids: &Matrix<F>) -> Vec<usize> {
    let k = centroids.rows();
    debug_assert!(k >= 1);
    (0..matrix.rows())
        .map(|i| {
            let row = matrix.row(i);
            let mut best = 0usize;
            let mut best_d = squared_distance(row, centroids.row(0));
            for c in 1..k {
                let d = squared_distance(row, centroids.row(c));
                if d < best_d {
                    best_d = d;
                    best = c;
                }
            }
            best
        })
        .collect()
}

/// Recomputes each centroid as the mean of its members. A cluster left empty
/// is re-seeded with the row farthest from that cluster's previous centroid
/// (ties by lowest row index); rows already used to re-seed an earlier empty
/// cluster in the same pass are skipped.
pub fn update_centroids<F: Real>(
    matrix: &Matrix<F>,
    labels: &[usize],
    prev_centroids: &Matrix<F>,
) -> Matrix<F> {
    let k = prev_centroids.rows();
    let d = matrix.cols();
    let mut sums: Matrix<F> = Matrix::zeros(k, d);
    let mut counts = vec![0usize; k];
    for (i, &label) in labels.iter().enumerate() {
        debug_assert!(label < k);
        counts[label] += 1;
        let row = matrix.row(i);
        for c in 0..d {
            let v = sums.get(label, c) + row[c];
            sums.set(label, c, v);
        }
    }

    let mut out = Matrix::zeros(k, d);
    let mut reseeded: Vec<usize> = Vec::new();
    for cluster in 0..k {
        if counts[cluster] > 0 {
            let m = F::from_usize(counts[cluster]).expect("cluster size");
            for c in 0..d {
                out.set(cluster, c, sums.get(cluster, c) / m);
            }
        } else {
            let prev = prev_centroids.row(cluster);
            let mut best_row = usize::MAX;
            let mut best_d = F::neg_infinity();
            for i in 0..matrix.rows() {
                if reseeded.contains(&i) {
                    continue;
                }
                let dist = squared_distance(matrix.row(i), prev);
                if dist > best_d {
                    best_d = dist;
                    best_row = i;
                }
            }
            debug_assert!(best_row != usize::MAX);
            for c in 0..d {
                out.set(cluster, c, matrix.get(best_row, c));
            }
            reseeded.push(best_row);
        }
    }
    out
}

/// Total within-cluster squared error for a (labels, centroids) pair.
pub fn sse<F: Real>(matrix: &Matrix<F>, labels: &[usize], centroids: &Matrix<F>) -> F {
    labels
        .iter()
        .enumerate()
        .map(|(i, &label)| squared_distance(matrix.row(i), centroids.row(label)))
        .sum()
}

fn lloyd_single<F: Real>(
    matrix: &Matrix<F>,
    cfg: &KMeansConfig,
) -> Result<ClusteringResult<F>, KMeansError> {
    let tol = F::from_f64_lossy(cfg.tol);
    let mut centroids = init_centroids(matrix, cfg)?;
    let mut labels = assign(matrix, &centroids);
    let mut history = vec![sse(matrix, &labels, &centroids)];
    let mut converged = false;
    let mut iterations = 0;

    for _ in 0..cfg.max_iter {
        let next = update_centroids(matrix, &labels, &centroids);
        let shift = (0..centroids.rows())
            .map(|c| squared_distance(centroids.row(c), next.row(c)))
            .fold(F::zero(), F::max);
        centroids = next;
        labels = assign(matrix, &centroids);
        let value = sse(matrix, &labels, &centroids);
        debug_assert!(
            value <= *history.last().unwrap() + F::from_f64_lossy(1e-12),
            "SSE increased within a Lloyd run"
        );
        history.push(value);
        iterations += 1;
        if shift < tol {
            converged = true;
            break;
        }
    }

    Ok(ClusteringResult {
        labels,
        centroids,
        sse: *history.last().unwrap(),
        iterations,
        converged,
        seed_used: cfg.seed,
        sse_history: history,
    })
}

/// Best-of-restarts Lloyd clustering. Restart `i` runs with
/// [`sub_seed`]`(cfg.seed, i)`; the lowest-SSE result wins, earliest restart
/// first on exact ties.
pub fn lloyd<F: Real>(
    matrix: &Matrix<F>,
    cfg: &KMeansConfig,
) -> Result<ClusteringResult<F>, KMeansError> {
    cfg.validate()?;
    let mut best: Option<ClusteringResult<F>> = None;
    for restart in 0..cfg.restarts {
        let run_cfg = KMeansConfig {
            seed: sub_seed(cfg.seed, restart as u64),
            ..*cfg
        };
        let result = lloyd_single(matrix, &run_cfg)?;
        let better = best.as_ref().is_none_or(|b| result.sse < b.sse);
        if better {
            best = Some(result);
        }
    }
    Ok(best.expect("at least one restart"))
}

/// One point of the SSE-vs-k scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ElbowPoint<F> {
    pub k: usize,
    pub sse: F,
}

/// SSE-vs-k curve with any monotonicity violations flagged.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ElbowCurve<F> {
    pub points: Vec<ElbowPoint<F>>,
    pub warnings: Vec<String>,
}

impl<F: Real> ElbowCurve<F> {
    /// Two-column CSV rendering for plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("k,sse\n");
        for p in &self.points {
            out.push_str(&format!("{},{}\n", p.k, p.sse));
        }
        out
    }
}

/// Runs [`lloyd`] for every k in `[k_min, k_max]`. Best-of-restarts SSE is
/// expected to be non-increasing in k; any increase is recorded as a warning
/// rather than an error. A single-k range yields a one-point curve, which
/// [`detect_knee`] will refuse.
pub fn elbow_scan<F: Real>(
    matrix: &Matrix<F>,
    k_min: usize,
    k_max: usize,
    cfg: &KMeansConfig,
) -> Result<ElbowCurve<F>, KMeansError> {
    let n = matrix.rows();
    if k_min < 1 || k_min > k_max || k_max > n {
        return Err(KMeansError::BadKRange { k_min, k_max, n });
    }
    let mut points = Vec::with_capacity(k_max - k_min + 1);
    let mut warnings = Vec::new();
    for k in k_min..=k_max {
        let result = lloyd(matrix, &KMeansConfig { k, ..*cfg })?;
        if let Some(prev) = points.last() {
            let prev: &ElbowPoint<F> = prev;
            if result.sse > prev.sse {
                warnings.push(format!(
                    "sse increased from k={} ({}) to k={} ({})",
                    prev.k, prev.sse, k, result.sse
                ));
            }
        }
        points.push(ElbowPoint { k, sse: result.sse });
    }
    Ok(ElbowCurve { points, warnings })
}

/// Picks the k whose curve point lies farthest below the chord joining the
/// first and last points (perpendicular distance; points above the chord
/// score negative). Ties resolve to the smallest k.
pub fn detect_knee<F: Real>(curve: &ElbowCurve<F>) -> Result<usize, KMeansError> {
    let pts = &curve.points;
    if pts.len() < 3 {
        return Err(KMeansError::TooFewPoints {
            needed: 3,
            got: pts.len(),
        });
    }
    let x0 = pts[0].k as f64;
    let y0 = pts[0].sse.to_f64().expect("finite sse");
    let x1 = pts[pts.len() - 1].k as f64;
    let y1 = pts[pts.len() - 1].sse.to_f64().expect("finite sse");
    let chord_len = ((x1 - x0).powi(2) + (y1 - y0).powi(2)).sqrt();

    let mut best_k = pts[0].k;
    let mut best_dist = f64::NEG_INFINITY;
    for p in pts {
        let x = p.k as f64;
        let y = p.sse.to_f64().expect("finite sse");
        let cross = (x1 - x0) * (y - y0) - (y1 - y0) * (x - x0);
        // negative cross means the point is below the chord
        let dist = if chord_len > 0.0 {
            -cross / chord_len
        } else {
            0.0
        };
        if dist > best_dist {
            best_dist = dist;
            best_k = p.k;
        }
    }
    Ok(best_k)
}
