//! Feature engineering: min-max scaling of the continuous features, binary
//! encoding of the categorical ones, and assembly of the n×4 feature matrix.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{NumericFeature, Personality, StudentRecord};
use crate::matrix::Matrix;
use crate::scalar::Real;

/// Column layout of the feature matrix, in order.
pub const FEATURE_COLUMNS: [&str; 4] = ["cet4_norm", "gpa_norm", "personality_enc", "leader_enc"];

#[derive(Debug, Error)]
pub enum PreprocessError {
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("feature {0} is degenerate: all values equal")]
    DegenerateFeature(NumericFeature),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureRange {
    pub min: f64,
    pub max: f64,
}

impl FeatureRange {
    fn scale(&self, x: f64) -> f64 {
        (x - self.min) / (self.max - self.min)
    }
}

/// Per-feature min/max used for scaling. Serializes to JSON as
/// `{"cet4": {"min": .., "max": ..}, "gpa": {..}}` so a fit can be reused
/// across runs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalerParams {
    pub cet4: FeatureRange,
    pub gpa: FeatureRange,
}

impl ScalerParams {
    pub fn range(&self, feature: NumericFeature) -> FeatureRange {
        match feature {
            NumericFeature::Cet4 => self.cet4,
            NumericFeature::Gpa => self.gpa,
        }
    }

    /// `(x - min) / (max - min)`, clamped into `[0, 1]`.
    pub fn apply(&self, feature: NumericFeature, x: f64) -> f64 {
        self.apply_checked(feature, x).0
    }

    /// Like [`ScalerParams::apply`] but also reports whether `x` fell
    /// outside the fitted range and had to be clamped.
    pub fn apply_checked(&self, feature: NumericFeature, x: f64) -> (f64, bool) {
        let raw = self.range(feature).scale(x);
        let clamped = raw.clamp(0.0, 1.0);
        (clamped, raw != clamped)
    }

    /// Inverse transform back into raw units.
    pub fn invert(&self, feature: NumericFeature, scaled: f64) -> f64 {
        let r = self.range(feature);
        r.min + scaled * (r.max - r.min)
    }
}

/// Fits the scaler on the observed minima and maxima.
pub fn fit_scaler(records: &[StudentRecord]) -> Result<ScalerParams, PreprocessError> {
    if records.is_empty() {
        return Err(PreprocessError::EmptyCohort);
    }
    let fit = |feature: NumericFeature, values: &mut dyn Iterator<Item = f64>| {
        let mut min = f64::INFINITY;
        let mut max = f64::NEG_INFINITY;
        for v in values {
            min = min.min(v);
            max = max.max(v);
        }
        if min == max {
            return Err(PreprocessError::DegenerateFeature(feature));
        }
        Ok(FeatureRange { min, max })
    };
    Ok(ScalerParams {
        cet4: fit(NumericFeature::Cet4, &mut records.iter().map(|r| r.cet4))?,
        gpa: fit(NumericFeature::Gpa, &mut records.iter().map(|r| r.gpa))?,
    })
}

/// Introvert encodes to 0, extrovert to 1.
pub fn encode_personality(p: Personality) -> u8 {
    match p {
        Personality::Introvert => 0,
        Personality::Extrovert => 1,
    }
}

/// A value that had to be clamped while building the feature matrix.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClampWarning {
    pub serial: u32,
    pub feature: &'static str,
    pub raw: f64,
}

/// Normalized/encoded features for a cohort, rows aligned with the input
/// records. Entries are always in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "F: Copy + serde::Serialize",
    deserialize = "F: Copy + serde::Deserialize<'de>"
))]
pub struct FeatureMatrix<F> {
    data: Matrix<F>,
    row_serials: Vec<u32>,
}

impl<F: Real> FeatureMatrix<F> {
    pub fn new(data: Matrix<F>, row_serials: Vec<u32>) -> Self {
        assert_eq!(data.rows(), row_serials.len(), "serial count mismatch");
        assert_eq!(data.cols(), FEATURE_COLUMNS.len(), "column count mismatch");
        FeatureMatrix { data, row_serials }
    }

    pub fn rows(&self) -> usize {
        self.data.rows()
    }

    pub fn matrix(&self) -> &Matrix<F> {
        &self.data
    }

    pub fn row_serials(&self) -> &[u32] {
        &self.row_serials
    }
}

/// Builds the n×4 matrix `[cet4', gpa', personality, leader]` in record
/// order. Out-of-range continuous values clamp and are reported.
pub fn build_matrix<F: Real>(
    records: &[StudentRecord],
    params: &ScalerParams,
) -> (FeatureMatrix<F>, Vec<ClampWarning>) {
    let mut warnings = Vec::new();
    let mut rows = Vec::with_capacity(records.len());
    let mut serials = Vec::with_capacity(records.len());
    for r in records {
        let mut scaled = |feature: NumericFeature, x: f64| {
            let (v, clamped) = params.apply_checked(feature, x);
            if clamped {
                warnings.push(ClampWarning {
                    serial: r.serial,
                    feature: feature.name(),
                    raw: x,
                });
            }
            v
        };
        let row = vec![
            F::from_f64_lossy(scaled(NumericFeature::Cet4, r.cet4)),
            F::from_f64_lossy(scaled(NumericFeature::Gpa, r.gpa)),
            F::from_u8(encode_personality(r.personality)).expect("binary feature"),
            F::from_u8(u8::from(r.student_leader)).expect("binary feature"),
        ];
        rows.push(row);
        serials.push(r.serial);
    }
    let data = if rows.is_empty() {
        Matrix::zeros(0, FEATURE_COLUMNS.len())
    } else {
        Matrix::from_rows(&rows)
    };
    (FeatureMatrix::new(data, serials), warnings)
}
