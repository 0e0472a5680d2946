//! Cohort records: CSV ingestion, validation, summary statistics, and
//! synthetic cohort generation.

use std::fmt;
use std::fmt::Write as _;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Exact header required on cohort CSV files.
pub const COHORT_CSV_HEADER: &str = "serial_number,cet4,gpa,personality,student_leader,job";

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("header mismatch: expected `{COHORT_CSV_HEADER}`, found `{found}`")]
    HeaderMismatch { found: String },
    #[error("malformed row at line {line}")]
    MalformedRow { line: u64 },
    #[error("unknown {field} token at line {line}")]
    UnknownCategory { line: u64, field: &'static str },
    #[error("duplicate serial {serial}")]
    DuplicateSerial { serial: u32 },
    #[error("cohort is empty")]
    EmptyCohort,
    #[error("invalid synthetic spec: {0}")]
    InvalidSpec(String),
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
}

/// MBTI attitude, reduced to the binary used for clustering.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Personality {
    Introvert,
    Extrovert,
}

impl Personality {
    pub fn token(self) -> &'static str {
        match self {
            Personality::Introvert => "i",
            Personality::Extrovert => "e",
        }
    }

    fn from_token(s: &str) -> Option<Self> {
        match s {
            "i" => Some(Personality::Introvert),
            "e" => Some(Personality::Extrovert),
            _ => None,
        }
    }
}

/// Employment category. Declaration order doubles as the tie-break order
/// wherever a mode or priority has to pick between equal counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Job {
    Sales,
    Management,
    Technical,
    Product,
    Other,
}

impl Job {
    pub const ALL: [Job; 5] = [
        Job::Sales,
        Job::Management,
        Job::Technical,
        Job::Product,
        Job::Other,
    ];

    pub fn token(self) -> &'static str {
        match self {
            Job::Sales => "sales post",
            Job::Management => "management post",
            Job::Technical => "technical post",
            Job::Product => "product post",
            Job::Other => "other",
        }
    }

    fn from_token(s: &str) -> Option<Self> {
        Job::ALL.into_iter().find(|j| j.token() == s)
    }

    pub fn label(self) -> &'static str {
        match self {
            Job::Sales => "Sales",
            Job::Management => "Management",
            Job::Technical => "Technical",
            Job::Product => "Product",
            Job::Other => "Other",
        }
    }
}

impl fmt::Display for Job {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

/// One row of a cohort table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StudentRecord {
    pub serial: u32,
    pub cet4: f64,
    pub gpa: f64,
    pub personality: Personality,
    pub student_leader: bool,
    pub job: Job,
}

/// Continuous features carried by a record.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumericFeature {
    Cet4,
    Gpa,
}

impl NumericFeature {
    pub fn name(self) -> &'static str {
        match self {
            NumericFeature::Cet4 => "cet4",
            NumericFeature::Gpa => "gpa",
        }
    }
}

impl fmt::Display for NumericFeature {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Inclusive acceptance ranges for record validation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValidationBounds {
    pub cet4_min: f64,
    pub cet4_max: f64,
    pub gpa_min: f64,
    pub gpa_max: f64,
}

impl Default for ValidationBounds {
    fn default() -> Self {
        ValidationBounds {
            cet4_min: 300.0,
            cet4_max: 710.0,
            gpa_min: 0.0,
            gpa_max: 5.0,
        }
    }
}

impl ValidationBounds {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.cet4_min >= self.cet4_max || self.gpa_min >= self.gpa_max {
            return Err(DatasetError::InvalidSpec(
                "validation bounds require min < max".into(),
            ));
        }
        Ok(())
    }

    fn contains(&self, feature: NumericFeature, x: f64) -> bool {
        match feature {
            NumericFeature::Cet4 => (self.cet4_min..=self.cet4_max).contains(&x),
            NumericFeature::Gpa => (self.gpa_min..=self.gpa_max).contains(&x),
        }
    }
}

/// Why a record was excluded by [`validate_cohort`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RejectionReason {
    OutOfRange(NumericFeature),
}

impl fmt::Display for RejectionReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            RejectionReason::OutOfRange(feat) => write!(f, "OutOfRange({feat})"),
        }
    }
}

impl Serialize for RejectionReason {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Rejection {
    pub serial: u32,
    pub reason: RejectionReason,
}

/// Records retained by validation plus the rejection report.
#[derive(Debug, Clone)]
pub struct CohortValidation {
    pub retained: Vec<StudentRecord>,
    pub rejections: Vec<Rejection>,
}

/// Parses a cohort CSV. LF and CRLF line endings are both accepted; the
/// header must match [`COHORT_CSV_HEADER`] exactly.
pub fn parse_records(csv_text: &str) -> Result<Vec<StudentRecord>, DatasetError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(csv_text.as_bytes());

    {
        let headers = reader.headers()?;
        let found = headers.iter().collect::<Vec<_>>().join(",");
        if found != COHORT_CSV_HEADER {
            return Err(DatasetError::HeaderMismatch { found });
        }
    }

    let mut records = Vec::new();
    let mut seen = std::collections::HashSet::new();
    for row in reader.records() {
        let row = row?;
        let line = row.position().map_or(0, |p| p.line());
        if row.len() != 6 {
            return Err(DatasetError::MalformedRow { line });
        }
        let serial: u32 = row[0]
            .trim()
            .parse()
            .map_err(|_| DatasetError::MalformedRow { line })?;
        let cet4: f64 = row[1]
            .trim()
            .parse()
            .map_err(|_| DatasetError::MalformedRow { line })?;
        let gpa: f64 = row[2]
            .trim()
            .parse()
            .map_err(|_| DatasetError::MalformedRow { line })?;
        let personality =
            Personality::from_token(row[3].trim()).ok_or(DatasetError::UnknownCategory {
                line,
                field: "personality",
            })?;
        let student_leader = match row[4].trim() {
            "0" => false,
            "1" => true,
            _ => {
                return Err(DatasetError::UnknownCategory {
                    line,
                    field: "student_leader",
                })
            }
        };
        let job = Job::from_token(row[5].trim())
            .ok_or(DatasetError::UnknownCategory { line, field: "job" })?;
        if !seen.insert(serial) {
            return Err(DatasetError::DuplicateSerial { serial });
        }
        records.push(StudentRecord {
            serial,
            cet4,
            gpa,
            personality,
            student_leader,
            job,
        });
    }
    Ok(records)
}

/// Writes records back to the cohort CSV format accepted by [`parse_records`].
pub fn records_to_csv(records: &[StudentRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 32 + COHORT_CSV_HEADER.len() + 1);
    out.push_str(COHORT_CSV_HEADER);
    out.push('\n');
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.serial,
            r.cet4,
            r.gpa,
            r.personality.token(),
            u8::from(r.student_leader),
            r.job.token()
        );
    }
    out
}

/// Splits records into in-bounds and rejected. Rejections carry the first
/// failing feature; nothing here is fatal.
pub fn validate_cohort(records: &[StudentRecord], bounds: &ValidationBounds) -> CohortValidation {
    let mut retained = Vec::with_capacity(records.len());
    let mut rejections = Vec::new();
    for r in records {
        let bad = [NumericFeature::Cet4, NumericFeature::Gpa]
            .into_iter()
            .find(|&f| {
                !bounds.contains(
                    f,
                    match f {
                        NumericFeature::Cet4 => r.cet4,
                        NumericFeature::Gpa => r.gpa,
                    },
                )
            });
        match bad {
            None => retained.push(r.clone()),
            Some(feature) => rejections.push(Rejection {
                serial: r.serial,
                reason: RejectionReason::OutOfRange(feature),
            }),
        }
    }
    CohortValidation {
        retained,
        rejections,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
}

/// Equal-width bins spanning `[min, max]`; the final bin is right-inclusive
/// so the maximum lands in it. All values equal collapses into bin 0.
pub fn histogram(values: &[f64], bins: usize) -> Vec<HistogramBin> {
    assert!(bins > 0, "bin count must be positive");
    assert!(!values.is_empty(), "histogram needs at least one value");
    let min = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let width = (max - min) / bins as f64;
    let mut counts = vec![0usize; bins];
    for &x in values {
        let idx = if width == 0.0 {
            0
        } else {
            (((x - min) / width).floor() as usize).min(bins - 1)
        };
        counts[idx] += 1;
    }
    counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lower: min + i as f64 * width,
            upper: if i + 1 == bins {
                max
            } else {
                min + (i + 1) as f64 * width
            },
            count,
        })
        .collect()
}

/// Distribution summary of one continuous feature.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub count: usize,
    pub mean: f64,
    pub median: f64,
    pub p25: f64,
    pub p75: f64,
    pub min: f64,
    pub max: f64,
    pub histogram: Vec<HistogramBin>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CohortSummary {
    pub count: usize,
    pub cet4: FeatureSummary,
    pub gpa: FeatureSummary,
}

/// Linear-interpolation percentile at position `p * (n - 1)` over sorted data.
fn percentile(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = p * (sorted.len() - 1) as f64;
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    if lo == hi {
        sorted[lo]
    } else {
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    }
}

fn summarize_feature(values: &[f64], bins: usize) -> FeatureSummary {
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite feature values"));
    let n = sorted.len();
    FeatureSummary {
        count: n,
        mean: sorted.iter().sum::<f64>() / n as f64,
        median: percentile(&sorted, 0.5),
        p25: percentile(&sorted, 0.25),
        p75: percentile(&sorted, 0.75),
        min: sorted[0],
        max: sorted[n - 1],
        histogram: histogram(values, bins),
    }
}

/// Per-feature statistics with `bin_count` equal-width histogram bins.
pub fn summarize(
    records: &[StudentRecord],
    bin_count: usize,
) -> Result<CohortSummary, DatasetError> {
    if records.is_empty() {
        return Err(DatasetError::EmptyCohort);
    }
    if bin_count == 0 {
        return Err(DatasetError::InvalidSpec(
            "bin count must be positive".into(),
        ));
    }
    let cet4: Vec<f64> = records.iter().map(|r| r.cet4).collect();
    let gpa: Vec<f64> = records.iter().map(|r| r.gpa).collect();
    Ok(CohortSummary {
        count: records.len(),
        cet4: summarize_feature(&cet4, bin_count),
        gpa: summarize_feature(&gpa, bin_count),
    })
}

/// Job probabilities for synthetic cohorts. Must sum to 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct JobMix {
    pub sales: f64,
    pub management: f64,
    pub technical: f64,
    pub product: f64,
    pub other: f64,
}

impl JobMix {
    fn weights(&self) -> [(Job, f64); 5] {
        [
            (Job::Sales, self.sales),
            (Job::Management, self.management),
            (Job::Technical, self.technical),
            (Job::Product, self.product),
            (Job::Other, self.other),
        ]
    }

    fn sum(&self) -> f64 {
        self.sales + self.management + self.technical + self.product + self.other
    }
}

/// Parameters for drawing a synthetic cohort: clamped normal continuous
/// features, Bernoulli binaries, categorical jobs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n: usize,
    pub cet4_mean: f64,
    pub cet4_sd: f64,
    pub gpa_mean: f64,
    pub gpa_sd: f64,
    pub extrovert_prob: f64,
    pub leader_prob: f64,
    pub job_mix: JobMix,
    /// Continuous draws are clipped into these ranges.
    pub bounds: ValidationBounds,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            n: 1000,
            cet4_mean: 505.18,
            cet4_sd: 55.0,
            gpa_mean: 2.99,
            gpa_sd: 0.5,
            extrovert_prob: 0.8,
            leader_prob: 0.4,
            job_mix: JobMix {
                sales: 0.22,
                management: 0.12,
                technical: 0.18,
                product: 0.42,
                other: 0.06,
            },
            bounds: ValidationBounds::default(),
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), DatasetError> {
        self.bounds.validate()?;
        if !(self.cet4_sd >= 0.0 && self.gpa_sd >= 0.0) {
            return Err(DatasetError::InvalidSpec(
                "standard deviations must be non-negative".into(),
            ));
        }
        for (name, p) in [
            ("extrovert_prob", self.extrovert_prob),
            ("leader_prob", self.leader_prob),
        ] {
            if !(0.0..=1.0).contains(&p) {
                return Err(DatasetError::InvalidSpec(format!(
                    "{name} must lie in [0, 1], got {p}"
                )));
            }
        }
        if self
            .job_mix
            .weights()
            .iter()
            .any(|&(_, w)| !(0.0..=1.0).contains(&w))
        {
            return Err(DatasetError::InvalidSpec(
                "job mix entries must lie in [0, 1]".into(),
            ));
        }
        if (self.job_mix.sum() - 1.0).abs() > 1e-9 {
            return Err(DatasetError::InvalidSpec(format!(
                "job mix must sum to 1, got {}",
                self.job_mix.sum()
            )));
        }
        Ok(())
    }
}

/// Draws `spec.n` records; identical `(spec, seed)` pairs yield identical
/// cohorts.
pub fn generate_synthetic(
    spec: &SyntheticSpec,
    seed: u64,
) -> Result<Vec<StudentRecord>, DatasetError> {
    spec.validate()?;
    let cet4_dist = Normal::new(spec.cet4_mean, spec.cet4_sd)
        .map_err(|e| DatasetError::InvalidSpec(format!("cet4 distribution: {e}")))?;
    let gpa_dist = Normal::new(spec.gpa_mean, spec.gpa_sd)
        .map_err(|e| DatasetError::InvalidSpec(format!("gpa distribution: {e}")))?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let weights = spec.job_mix.weights();
    let mut records = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let cet4 = cet4_dist
            .sample(&mut rng)
            .clamp(spec.bounds.cet4_min, spec.bounds.cet4_max);
        let gpa = gpa_dist
            .sample(&mut rng)
            .clamp(spec.bounds.gpa_min, spec.bounds.gpa_max);
        let personality = if rng.random::<f64>() < spec.extrovert_prob {
            Personality::Extrovert
        } else {
            Personality::Introvert
        };
        let student_leader = rng.random::<f64>() < spec.leader_prob;
        let u: f64 = rng.random();
        let mut acc = 0.0;
        let mut job = Job::Other;
        for (j, w) in weights {
            acc += w;
            if u < acc {
                job = j;
                break;
            }
        }
        records.push(StudentRecord {
            serial: (i + 1) as u32,
            cet4,
            gpa,
            personality,
            student_leader,
            job,
        });
    }
    Ok(records)
}
