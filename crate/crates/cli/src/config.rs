//! Flag parsing, the JSON config file that mirrors the flags, and resolution
//! of both into concrete run settings. Explicit flags always win.

use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use career_cluster::dataset::{NumericFeature, ValidationBounds};
use career_cluster::kmeans::InitMethod;

#[derive(Parser)]
#[command(
    name = "career-cluster",
    version,
    about = "Cluster a student cohort and map cluster profiles to career recommendations"
)]
pub struct Cli {
    /// JSON config file mirroring the flags; explicit flags win
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand)]
pub enum Command {
    /// Summary statistics and histogram figures for a cohort
    Summarize(SummarizeArgs),
    /// SSE-vs-k scan with knee detection
    Elbow(ElbowArgs),
    /// Full pipeline: preprocess, cluster, project, score, recommend, render
    Run(RunArgs),
    /// Emit a synthetic cohort CSV
    Synth(SynthArgs),
    /// Recompute metrics from a cohort plus an assignments file
    Metrics(MetricsArgs),
}

#[derive(Args, Clone)]
pub struct CohortArgs {
    /// Cohort CSV path (exactly one of --input / --synth)
    #[arg(long, value_name = "PATH")]
    pub input: Option<PathBuf>,
    /// Synthetic-spec JSON path used instead of an input file
    #[arg(long, value_name = "PATH")]
    pub synth: Option<PathBuf>,
    /// Master seed; every random draw derives from it
    #[arg(long)]
    pub seed: Option<u64>,
    /// CET-4 validation bounds as MIN:MAX
    #[arg(long, value_name = "MIN:MAX")]
    pub cet4_bounds: Option<String>,
    /// GPA validation bounds as MIN:MAX
    #[arg(long, value_name = "MIN:MAX")]
    pub gpa_bounds: Option<String>,
}

#[derive(Args)]
pub struct SummarizeArgs {
    #[command(flatten)]
    pub cohort: CohortArgs,
    /// Output directory
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Histogram bin count
    #[arg(long)]
    pub bins: Option<usize>,
    /// Artifact kinds to emit (comma-separated: json,svg,text)
    #[arg(long, value_name = "KINDS")]
    pub emit: Option<String>,
}

#[derive(Args)]
pub struct ElbowArgs {
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Scan range as LO:HI
    #[arg(long, value_name = "LO:HI")]
    pub k_range: Option<String>,
    #[arg(long)]
    pub init: Option<InitArg>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Fixed scaling ranges, e.g. cet4=320:623,gpa=1.69:4.29
    #[arg(long, value_name = "SPEC")]
    pub scaler_override: Option<String>,
    #[arg(long, value_name = "KINDS")]
    pub emit: Option<String>,
}

#[derive(Args)]
pub struct RunArgs {
    #[command(flatten)]
    pub cohort: CohortArgs,
    #[arg(long, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Cluster count; defaults to the detected knee of the elbow scan
    #[arg(long)]
    pub k: Option<usize>,
    /// Elbow scan range as LO:HI (used when --k is absent)
    #[arg(long, value_name = "LO:HI")]
    pub k_range: Option<String>,
    #[arg(long)]
    pub init: Option<InitArg>,
    #[arg(long)]
    pub restarts: Option<usize>,
    /// Guidance rule set JSON overriding the built-in thresholds
    #[arg(long, value_name = "PATH")]
    pub rules: Option<PathBuf>,
    #[arg(long, value_name = "SPEC")]
    pub scaler_override: Option<String>,
    /// Histogram bin count for summary figures
    #[arg(long)]
    pub bins: Option<usize>,
    #[arg(long, value_name = "KINDS")]
    pub emit: Option<String>,
    /// Skip external metrics (ARI, homogeneity) even though jobs are present
    #[arg(long)]
    pub no_external: bool,
}

#[derive(Args)]
pub struct SynthArgs {
    /// Synthetic-spec JSON; a built-in default is used when absent
    #[arg(long, value_name = "PATH")]
    pub spec: Option<PathBuf>,
    /// Record count override
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output CSV path
    #[arg(long, value_name = "FILE")]
    pub out: PathBuf,
}

#[derive(Args)]
pub struct MetricsArgs {
    /// Cohort CSV the assignments refer to
    #[arg(long, value_name = "PATH")]
    pub input: PathBuf,
    /// Assignments CSV produced by `run`
    #[arg(long, value_name = "PATH")]
    pub assignments: PathBuf,
    /// Output file; stdout when absent
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, value_name = "SPEC")]
    pub scaler_override: Option<String>,
    /// Skip external metrics (ARI, homogeneity)
    #[arg(long)]
    pub no_external: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum InitArg {
    Random,
    Plusplus,
}

impl From<InitArg> for InitMethod {
    fn from(v: InitArg) -> Self {
        match v {
            InitArg::Random => InitMethod::RandomPoints,
            InitArg::Plusplus => InitMethod::PlusPlus,
        }
    }
}

/// JSON mirror of the flags. Every field is optional; values here fill in
/// whatever the command line left unset.
#[derive(Debug, Default, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub input: Option<PathBuf>,
    pub synth: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub k: Option<usize>,
    pub k_range: Option<String>,
    pub seed: Option<u64>,
    pub init: Option<String>,
    pub restarts: Option<usize>,
    pub bins: Option<usize>,
    pub rules: Option<PathBuf>,
    pub scaler_override: Option<String>,
    pub emit: Option<String>,
    pub cet4_bounds: Option<String>,
    pub gpa_bounds: Option<String>,
}

impl FileConfig {
    pub fn load(path: Option<&PathBuf>) -> Result<Self> {
        match path {
            None => Ok(FileConfig::default()),
            Some(p) => {
                let text = std::fs::read_to_string(p)
                    .with_context(|| format!("reading config file {}", p.display()))?;
                serde_json::from_str(&text)
                    .with_context(|| format!("parsing config file {}", p.display()))
            }
        }
    }

    pub fn init_method(&self) -> Result<Option<InitMethod>> {
        match self.init.as_deref() {
            None => Ok(None),
            Some("random") => Ok(Some(InitMethod::RandomPoints)),
            Some("plusplus") => Ok(Some(InitMethod::PlusPlus)),
            Some(other) => bail!("unknown init method `{other}` in config file"),
        }
    }
}

/// Which artifact kinds a command writes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EmitFlags {
    pub json: bool,
    pub svg: bool,
    pub text: bool,
}

impl Default for EmitFlags {
    fn default() -> Self {
        EmitFlags {
            json: true,
            svg: true,
            text: true,
        }
    }
}

pub fn parse_emit(spec: &str) -> Result<EmitFlags> {
    let mut flags = EmitFlags {
        json: false,
        svg: false,
        text: false,
    };
    for kind in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match kind {
            "json" => flags.json = true,
            "svg" => flags.svg = true,
            "text" => flags.text = true,
            other => bail!("unknown emit kind `{other}` (expected json, svg, text)"),
        }
    }
    Ok(flags)
}

pub fn parse_pair(spec: &str, what: &str) -> Result<(f64, f64)> {
    let (lo, hi) = spec
        .split_once(':')
        .with_context(|| format!("{what} must look like LO:HI, got `{spec}`"))?;
    let lo: f64 = lo
        .trim()
        .parse()
        .with_context(|| format!("bad {what} lower bound"))?;
    let hi: f64 = hi
        .trim()
        .parse()
        .with_context(|| format!("bad {what} upper bound"))?;
    if lo >= hi {
        bail!("{what} requires LO < HI, got {lo}:{hi}");
    }
    Ok((lo, hi))
}

pub fn parse_k_range(spec: &str) -> Result<(usize, usize)> {
    let (lo, hi) = spec
        .split_once(':')
        .with_context(|| format!("--k-range must look like LO:HI, got `{spec}`"))?;
    let lo: usize = lo.trim().parse().context("bad k range lower bound")?;
    let hi: usize = hi.trim().parse().context("bad k range upper bound")?;
    Ok((lo, hi))
}

/// `cet4=320:623,gpa=1.69:4.29`; either feature may be given alone.
pub fn parse_scaler_override(spec: &str) -> Result<Vec<(NumericFeature, f64, f64)>> {
    let mut out = Vec::new();
    for part in spec.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let (name, range) = part
            .split_once('=')
            .with_context(|| format!("scaler override `{part}` must look like feature=MIN:MAX"))?;
        let feature = match name.trim() {
            "cet4" => NumericFeature::Cet4,
            "gpa" => NumericFeature::Gpa,
            other => bail!("unknown scaler feature `{other}` (expected cet4 or gpa)"),
        };
        let (min, max) = parse_pair(range, "scaler override")?;
        out.push((feature, min, max));
    }
    if out.is_empty() {
        bail!("scaler override is empty");
    }
    Ok(out)
}

pub fn resolve_bounds(
    cet4: Option<&String>,
    gpa: Option<&String>,
    file: &FileConfig,
) -> Result<ValidationBounds> {
    let mut bounds = ValidationBounds::default();
    if let Some(spec) = cet4.or(file.cet4_bounds.as_ref()) {
        (bounds.cet4_min, bounds.cet4_max) = parse_pair(spec, "cet4 bounds")?;
    }
    if let Some(spec) = gpa.or(file.gpa_bounds.as_ref()) {
        (bounds.gpa_min, bounds.gpa_max) = parse_pair(spec, "gpa bounds")?;
    }
    Ok(bounds)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn emit_spec_parses_each_kind() {
        let flags = parse_emit("json,svg").unwrap();
        assert!(flags.json && flags.svg && !flags.text);
        assert!(parse_emit("png").is_err());
    }

    #[test]
    fn scaler_override_parses_both_features() {
        let parsed = parse_scaler_override("cet4=320:623,gpa=1.69:4.29").unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].0, NumericFeature::Cet4);
        assert_eq!((parsed[0].1, parsed[0].2), (320.0, 623.0));
        assert!(parse_scaler_override("height=1:2").is_err());
        assert!(parse_scaler_override("cet4=5:2").is_err());
    }

    #[test]
    fn k_range_parses() {
        assert_eq!(parse_k_range("1:8").unwrap(), (1, 8));
        assert!(parse_k_range("8").is_err());
    }

    #[test]
    fn config_file_rejects_unknown_keys() {
        let err = serde_json::from_str::<FileConfig>(r#"{"sed": 3}"#);
        assert!(err.is_err());
        let ok: FileConfig = serde_json::from_str(r#"{"seed": 3, "k": 4}"#).unwrap();
        assert_eq!(ok.seed, Some(3));
        assert_eq!(ok.k, Some(4));
    }
}
