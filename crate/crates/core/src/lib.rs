//! Cohort clustering and career-guidance pipeline.
//!
//! The library ingests student cohort records, normalizes and encodes them
//! into a feature matrix, clusters with k-means (elbow rule for picking k),
//! evaluates the clustering with internal and external validity indices,
//! projects to 2-D with PCA for hull-bounded scatter plots, and maps cluster
//! profiles to job recommendations through configurable threshold rules.
//!
//! The numeric core (`matrix`, `kmeans`, `pca`, `metrics`, `viz::hull`) is
//! generic over the scalar type through [`scalar::Real`]; the aliases below
//! pin the `f64` instantiations the pipeline and CLI use.

pub mod dataset;
pub mod fixtures;
pub mod guidance;
pub mod kmeans;
pub mod matrix;
pub mod metrics;
pub mod pca;
pub mod preprocess;
pub mod scalar;
pub mod viz;

/// Dense `f64` matrix.
pub type Matrix = matrix::Matrix<f64>;
/// Normalized/encoded cohort features over `f64`.
pub type FeatureMatrix = preprocess::FeatureMatrix<f64>;
/// Best-of-restarts clustering outcome over `f64`.
pub type ClusteringResult = kmeans::ClusteringResult<f64>;
/// SSE-vs-k curve over `f64`.
pub type ElbowCurve = kmeans::ElbowCurve<f64>;
/// Fitted PCA basis over `f64`.
pub type PcaModel = pca::PcaModel<f64>;
/// Silhouette breakdown over `f64`.
pub type SilhouetteReport = metrics::SilhouetteReport<f64>;
/// Planar point over `f64`.
pub type Point2 = viz::hull::Point2<f64>;
/// Convex hull over `f64`.
pub type HullPolygon = viz::hull::HullPolygon<f64>;
