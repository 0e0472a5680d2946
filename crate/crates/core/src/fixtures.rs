//! Bundled sample cohort, used by the test suites and handy for demos.

/// 50-student sample cohort in the exact CSV schema accepted by
/// [`crate::dataset::parse_records`].
pub const SAMPLE_COHORT_CSV: &str = include_str!("../data/sample_cohort.csv");
