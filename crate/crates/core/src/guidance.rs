//! Cluster profiling in raw units, radar vectors, and threshold rules that
//! map cluster profiles to recommended jobs.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{Job, NumericFeature, Personality, StudentRecord};
use crate::metrics::MetricsBundle;
use crate::preprocess::ScalerParams;

#[derive(Debug, Error)]
pub enum GuidanceError {
    #[error("cluster {0} has no members")]
    EmptyCluster(usize),
    #[error("label {label} out of range for k = {k}")]
    BadLabel { label: usize, k: usize },
    #[error("invalid rule set: {0}")]
    InvalidRules(String),
}

/// Raw-unit summary of one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterProfile {
    pub cluster_id: usize,
    pub size: usize,
    pub mean_cet4: f64,
    pub mean_gpa: f64,
    pub extrovert_fraction: f64,
    pub leader_fraction: f64,
    /// Mode of the observed job labels, ties broken by declaration order.
    pub dominant_job: Option<Job>,
}

/// Averages each cluster's members in raw units. Every cluster in `0..k`
/// must be non-empty.
pub fn profile_clusters(
    records: &[StudentRecord],
    labels: &[usize],
    k: usize,
) -> Result<Vec<ClusterProfile>, GuidanceError> {
    assert_eq!(records.len(), labels.len(), "one label per record");
    for &label in labels {
        if label >= k {
            return Err(GuidanceError::BadLabel { label, k });
        }
    }
    let mut profiles = Vec::with_capacity(k);
    for cluster in 0..k {
        let members: Vec<&StudentRecord> = records
            .iter()
            .zip(labels)
            .filter(|(_, &l)| l == cluster)
            .map(|(r, _)| r)
            .collect();
        if members.is_empty() {
            return Err(GuidanceError::EmptyCluster(cluster));
        }
        let size = members.len();
        let n = size as f64;
        let mut job_counts = [0usize; Job::ALL.len()];
        for r in &members {
            job_counts[r.job as usize] += 1;
        }
        let dominant = Job::ALL
            .into_iter()
            .max_by_key(|&j| (job_counts[j as usize], std::cmp::Reverse(j)))
            .expect("non-empty job list");
        profiles.push(ClusterProfile {
            cluster_id: cluster,
            size,
            mean_cet4: members.iter().map(|r| r.cet4).sum::<f64>() / n,
            mean_gpa: members.iter().map(|r| r.gpa).sum::<f64>() / n,
            extrovert_fraction: members
                .iter()
                .filter(|r| r.personality == Personality::Extrovert)
                .count() as f64
                / n,
            leader_fraction: members.iter().filter(|r| r.student_leader).count() as f64 / n,
            dominant_job: Some(dominant),
        });
    }
    Ok(profiles)
}

/// Four radar axes, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadarVector {
    pub cet_norm: f64,
    pub gpa_norm: f64,
    pub extrovert_fraction: f64,
    pub leader_fraction: f64,
}

impl RadarVector {
    pub fn as_array(&self) -> [f64; 4] {
        [
            self.cet_norm,
            self.gpa_norm,
            self.extrovert_fraction,
            self.leader_fraction,
        ]
    }
}

/// Axis labels matching [`RadarVector::as_array`] order.
pub const RADAR_AXES: [&str; 4] = ["CET", "GPA", "Extrovert", "Leader"];

/// Scales a profile's continuous means through the fitted ranges; fraction
/// axes pass through. Everything clamps into `[0, 1]`.
pub fn radar_vector(profile: &ClusterProfile, params: &ScalerParams) -> RadarVector {
    RadarVector {
        cet_norm: params.apply(NumericFeature::Cet4, profile.mean_cet4),
        gpa_norm: params.apply(NumericFeature::Gpa, profile.mean_gpa),
        extrovert_fraction: profile.extrovert_fraction.clamp(0.0, 1.0),
        leader_fraction: profile.leader_fraction.clamp(0.0, 1.0),
    }
}

/// One threshold rule. Continuous thresholds are strict (`value > min`);
/// majority requirements compare fractions against 0.5, strictly in the
/// required direction. Lower priority evaluates first.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GuidanceRule {
    pub job: Job,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_gpa: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub min_cet: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub requires_extrovert_majority: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub requires_leader_majority: Option<bool>,
    pub priority: u32,
}

impl GuidanceRule {
    fn has_condition(&self) -> bool {
        self.min_gpa.is_some()
            || self.min_cet.is_some()
            || self.requires_extrovert_majority.is_some()
            || self.requires_leader_majority.is_some()
    }

    fn matches(&self, profile: &ClusterProfile) -> bool {
        let majority_ok = |required: Option<bool>, fraction: f64| match required {
            None => true,
            Some(true) => fraction > 0.5,
            Some(false) => fraction < 0.5,
        };
        self.min_gpa.is_none_or(|t| profile.mean_gpa > t)
            && self.min_cet.is_none_or(|t| profile.mean_cet4 > t)
            && majority_ok(self.requires_extrovert_majority, profile.extrovert_fraction)
            && majority_ok(self.requires_leader_majority, profile.leader_fraction)
    }
}

/// Ordered rule list with a fallback job for profiles nothing matches.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GuidanceRuleSet {
    pub rules: Vec<GuidanceRule>,
    pub fallback: Job,
}

impl GuidanceRuleSet {
    pub fn validate(&self) -> Result<(), GuidanceError> {
        let mut priorities: Vec<u32> = self.rules.iter().map(|r| r.priority).collect();
        priorities.sort_unstable();
        priorities.dedup();
        if priorities.len() != self.rules.len() {
            return Err(GuidanceError::InvalidRules(
                "priorities must be unique".into(),
            ));
        }
        if let Some(rule) = self.rules.iter().find(|r| !r.has_condition()) {
            return Err(GuidanceError::InvalidRules(format!(
                "rule for {} has no conditions",
                rule.job
            )));
        }
        Ok(())
    }

    pub fn from_json(json: &str) -> Result<Self, GuidanceError> {
        let set: GuidanceRuleSet =
            serde_json::from_str(json).map_err(|e| GuidanceError::InvalidRules(e.to_string()))?;
        set.validate()?;
        Ok(set)
    }
}

/// Built-in thresholds: technical demands the strongest grades with an
/// introverted, non-leader majority; management and product both ask for
/// extrovert leader majorities and are ordered by their CET cutoffs; sales
/// needs communication-oriented extroverts; everything else falls back.
pub fn default_rules() -> GuidanceRuleSet {
    GuidanceRuleSet {
        rules: vec![
            GuidanceRule {
                job: Job::Technical,
                min_gpa: Some(3.7),
                min_cet: Some(460.0),
                requires_extrovert_majority: Some(false),
                requires_leader_majority: Some(false),
                priority: 0,
            },
            GuidanceRule {
                job: Job::Management,
                min_gpa: Some(3.5),
                min_cet: Some(450.0),
                requires_extrovert_majority: Some(true),
                requires_leader_majority: Some(true),
                priority: 1,
            },
            GuidanceRule {
                job: Job::Product,
                min_gpa: Some(3.5),
                min_cet: Some(400.0),
                requires_extrovert_majority: Some(true),
                requires_leader_majority: Some(true),
                priority: 2,
            },
            GuidanceRule {
                job: Job::Sales,
                min_gpa: None,
                min_cet: Some(400.0),
                requires_extrovert_majority: Some(true),
                requires_leader_majority: None,
                priority: 3,
            },
        ],
        fallback: Job::Other,
    }
}

/// A job pick together with the priority of the rule that fired;
/// `None` means the fallback applied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub job: Job,
    pub matched_priority: Option<u32>,
}

/// First matching rule in priority order, else the fallback.
pub fn recommend(profile: &ClusterProfile, rules: &GuidanceRuleSet) -> Recommendation {
    let mut ordered: Vec<&GuidanceRule> = rules.rules.iter().collect();
    ordered.sort_by_key(|r| r.priority);
    for rule in ordered {
        if rule.matches(profile) {
            return Recommendation {
                job: rule.job,
                matched_priority: Some(rule.priority),
            };
        }
    }
    Recommendation {
        job: rules.fallback,
        matched_priority: None,
    }
}

/// Advisory per-record variant of [`recommend`]: a single student stands in
/// for a whole profile, so majority conditions degenerate to the student's
/// own traits. Cluster-level recommendations are the supported path.
pub fn recommend_record(record: &StudentRecord, rules: &GuidanceRuleSet) -> Recommendation {
    let profile = ClusterProfile {
        cluster_id: 0,
        size: 1,
        mean_cet4: record.cet4,
        mean_gpa: record.gpa,
        extrovert_fraction: f64::from(u8::from(record.personality == Personality::Extrovert)),
        leader_fraction: f64::from(u8::from(record.student_leader)),
        dominant_job: Some(record.job),
    };
    recommend(&profile, rules)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterAssignment {
    pub cluster_id: usize,
    pub recommendation: Recommendation,
}

/// Per-cluster job mapping plus warnings for jobs recommended to more than
/// one cluster.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterJobMapping {
    pub assignments: Vec<ClusterAssignment>,
    pub warnings: Vec<String>,
}

impl ClusterJobMapping {
    pub fn job_for(&self, cluster_id: usize) -> Option<Job> {
        self.assignments
            .iter()
            .find(|a| a.cluster_id == cluster_id)
            .map(|a| a.recommendation.job)
    }
}

/// Recommends a job for every profile. Clusters sharing a job all keep it;
/// each shared job is reported as a `DuplicateAssignment` warning.
pub fn map_clusters_to_jobs(
    profiles: &[ClusterProfile],
    rules: &GuidanceRuleSet,
) -> ClusterJobMapping {
    let assignments: Vec<ClusterAssignment> = profiles
        .iter()
        .map(|p| ClusterAssignment {
            cluster_id: p.cluster_id,
            recommendation: recommend(p, rules),
        })
        .collect();
    let mut warnings = Vec::new();
    for job in Job::ALL {
        let shared: Vec<usize> = assignments
            .iter()
            .filter(|a| a.recommendation.job == job)
            .map(|a| a.cluster_id)
            .collect();
        if shared.len() > 1 {
            warnings.push(format!(
                "DuplicateAssignment: {job} recommended to clusters {shared:?}"
            ));
        }
    }
    ClusterJobMapping {
        assignments,
        warnings,
    }
}

fn rationale(job: Job) -> &'static str {
    match job {
        Job::Technical => {
            "Strong grades and language scores combined with a focused, independent working \
             style point to roles built around deep technical problem solving."
        }
        Job::Management => {
            "Solid academics, strong communication, and a leadership track record support \
             coordinating people and making decisions in organizational roles."
        }
        Job::Product => {
            "Good academic grounding plus outgoing, organized collaboration suits work that \
             balances user needs, planning, and cross-team coordination."
        }
        Job::Sales => {
            "Communication strength and an outgoing disposition are the core assets for \
             building client relationships and closing deals."
        }
        Job::Other => {
            "The profile does not match any threshold rule; individual advising is a better \
             fit than a group-level recommendation."
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterSection {
    pub profile: ClusterProfile,
    pub radar: RadarVector,
    pub recommendation: Recommendation,
    pub rationale: String,
}

/// Deterministic run report; renders to JSON via serde and to plain text via
/// [`Report::to_text`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub clusters: Vec<ClusterSection>,
    #[serde(skip_serializing_if = "Vec::is_empty", default)]
    pub warnings: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub metrics: Option<MetricsBundle>,
}

/// Assembles profiles, radar vectors, recommendations, and metrics into a
/// report. Identical inputs produce identical documents.
pub fn render_report(
    profiles: &[ClusterProfile],
    mapping: &ClusterJobMapping,
    params: &ScalerParams,
    metrics: Option<MetricsBundle>,
) -> Report {
    let clusters = profiles
        .iter()
        .map(|p| {
            let recommendation = mapping
                .assignments
                .iter()
                .find(|a| a.cluster_id == p.cluster_id)
                .map(|a| a.recommendation)
                .unwrap_or(Recommendation {
                    job: Job::Other,
                    matched_priority: None,
                });
            ClusterSection {
                profile: p.clone(),
                radar: radar_vector(p, params),
                recommendation,
                rationale: rationale(recommendation.job).to_string(),
            }
        })
        .collect();
    Report {
        clusters,
        warnings: mapping.warnings.clone(),
        metrics,
    }
}

impl Report {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization")
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        out.push_str("Cohort guidance report\n");
        out.push_str("======================\n");
        for section in &self.clusters {
            let p = &section.profile;
            let _ = writeln!(out, "\nCluster {} ({} students)", p.cluster_id, p.size);
            let _ = writeln!(
                out,
                "  mean CET-4: {:.2}   mean GPA: {:.3}",
                p.mean_cet4, p.mean_gpa
            );
            let _ = writeln!(
                out,
                "  extrovert share: {:.3}   leader share: {:.3}",
                p.extrovert_fraction, p.leader_fraction
            );
            let r = section.radar.as_array();
            let _ = writeln!(
                out,
                "  radar [{}]: [{:.3}, {:.3}, {:.3}, {:.3}]",
                RADAR_AXES.join(", "),
                r[0],
                r[1],
                r[2],
                r[3]
            );
            if let Some(job) = p.dominant_job {
                let _ = writeln!(out, "  dominant observed job: {job}");
            }
            match section.recommendation.matched_priority {
                Some(priority) => {
                    let _ = writeln!(
                        out,
                        "  recommendation: {} (rule {priority})",
                        section.recommendation.job
                    );
                }
                None => {
                    let _ = writeln!(
                        out,
                        "  recommendation: {} (fallback)",
                        section.recommendation.job
                    );
                }
            }
            let _ = writeln!(out, "  rationale: {}", section.rationale);
        }
        if let Some(m) = &self.metrics {
            out.push_str("\nMetrics\n");
            let _ = writeln!(out, "  mean silhouette: {:.6}", m.silhouette_mean);
            for (i, s) in m.per_cluster.iter().enumerate() {
                let _ = writeln!(out, "  cluster {i} silhouette: {s:.6}");
            }
            let _ = writeln!(out, "  calinski-harabasz: {:.6}", m.calinski_harabasz);
            if let Some(ari) = m.ari {
                let _ = writeln!(out, "  adjusted rand index: {ari:.6}");
            }
            if let Some(h) = m.homogeneity {
                let _ = writeln!(out, "  homogeneity: {h:.6}");
            }
        }
        if !self.warnings.is_empty() {
            out.push_str("\nWarnings\n");
            for w in &self.warnings {
                let _ = writeln!(out, "  {w}");
            }
        }
        out
    }
}
