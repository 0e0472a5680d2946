//! Subcommand implementations. Stages run in a fixed order and every stage
//! failure carries the stage name in its error context.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::Serialize;

use career_cluster::dataset::{
    self, parse_records, records_to_csv, summarize, validate_cohort, Rejection, StudentRecord,
    SyntheticSpec, ValidationBounds,
};
use career_cluster::guidance::{
    default_rules, map_clusters_to_jobs, profile_clusters, radar_vector, render_report,
    GuidanceRuleSet,
};
use career_cluster::kmeans::{
    detect_knee, elbow_scan, lloyd, InitMethod, KMeansConfig, SUB_SEED_SCHEME,
};
use career_cluster::metrics::{
    adjusted_rand_index, calinski_harabasz, homogeneity, silhouette, MetricsBundle,
};
use career_cluster::pca;
use career_cluster::preprocess::{build_matrix, fit_scaler, ClampWarning, ScalerParams};
use career_cluster::viz::hull::{convex_hull, Point2};
use career_cluster::viz::{figure_filename, render_histogram, render_radar, render_scatter};
use career_cluster::{ElbowCurve, FeatureMatrix};

use crate::config::{
    parse_emit, parse_k_range, parse_scaler_override, resolve_bounds, Cli, CohortArgs, Command,
    ElbowArgs, EmitFlags, FileConfig, MetricsArgs, RunArgs, SummarizeArgs, SynthArgs,
};

pub fn dispatch(cli: Cli) -> Result<()> {
    let file = FileConfig::load(cli.config.as_ref())?;
    match cli.command {
        Command::Summarize(args) => cmd_summarize(args, &file),
        Command::Elbow(args) => cmd_elbow(args, &file),
        Command::Run(args) => cmd_run(args, &file),
        Command::Synth(args) => cmd_synth(args, &file),
        Command::Metrics(args) => cmd_metrics(args, &file),
    }
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).with_context(|| format!("writing {}", path.display()))
}

fn out_dir(flag: Option<PathBuf>, file: &FileConfig) -> Result<PathBuf> {
    let dir = flag
        .or_else(|| file.out.clone())
        .unwrap_or_else(|| PathBuf::from("out"));
    fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
    Ok(dir)
}

fn resolve_emit(flag: Option<&String>, file: &FileConfig) -> Result<EmitFlags> {
    match flag.or(file.emit.as_ref()) {
        Some(spec) => parse_emit(spec),
        None => Ok(EmitFlags::default()),
    }
}

struct Cohort {
    records: Vec<StudentRecord>,
    rejections: Vec<Rejection>,
    bounds: ValidationBounds,
    seed: u64,
}

/// Loads and validates the cohort from --input or --synth (exactly one).
fn load_cohort(args: &CohortArgs, file: &FileConfig) -> Result<Cohort> {
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let bounds = resolve_bounds(args.cet4_bounds.as_ref(), args.gpa_bounds.as_ref(), file)?;
    bounds.validate().context("stage validate")?;

    let input = args.input.clone().or_else(|| file.input.clone());
    let synth = args.synth.clone().or_else(|| file.synth.clone());
    let records = match (input, synth) {
        (Some(path), None) => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading cohort file {}", path.display()))
                .context("stage parse")?;
            parse_records(&text).context("stage parse")?
        }
        (None, Some(path)) => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading synthetic spec {}", path.display()))
                .context("stage parse")?;
            let spec: SyntheticSpec = serde_json::from_str(&text)
                .with_context(|| format!("parsing synthetic spec {}", path.display()))
                .context("stage parse")?;
            dataset::generate_synthetic(&spec, seed).context("stage parse")?
        }
        (Some(_), Some(_)) => bail!("--input and --synth are mutually exclusive"),
        (None, None) => bail!("one of --input or --synth is required"),
    };

    let outcome = validate_cohort(&records, &bounds);
    for r in &outcome.rejections {
        eprintln!("rejected serial {}: {}", r.serial, r.reason);
    }
    if outcome.retained.is_empty() {
        bail!("stage validate: no records survived validation");
    }
    Ok(Cohort {
        records: outcome.retained,
        rejections: outcome.rejections,
        bounds,
        seed,
    })
}

fn scaler_for(
    records: &[StudentRecord],
    override_spec: Option<&String>,
    file: &FileConfig,
) -> Result<ScalerParams> {
    let mut params = fit_scaler(records).context("stage preprocess")?;
    if let Some(spec) = override_spec.or(file.scaler_override.as_ref()) {
        for (feature, min, max) in parse_scaler_override(spec)? {
            match feature {
                dataset::NumericFeature::Cet4 => {
                    params.cet4 = career_cluster::preprocess::FeatureRange { min, max };
                }
                dataset::NumericFeature::Gpa => {
                    params.gpa = career_cluster::preprocess::FeatureRange { min, max };
                }
            }
        }
    }
    Ok(params)
}

fn report_clamps(warnings: &[ClampWarning]) {
    for w in warnings {
        eprintln!(
            "clamped {} = {} for serial {} into [0, 1]",
            w.feature, w.raw, w.serial
        );
    }
}

fn run_id(seed: u64) -> String {
    format!("run-s{seed}")
}

pub fn cmd_summarize(args: SummarizeArgs, file: &FileConfig) -> Result<()> {
    let cohort = load_cohort(&args.cohort, file)?;
    let emit = resolve_emit(args.emit.as_ref(), file)?;
    let bins = args.bins.or(file.bins).unwrap_or(20);
    let dir = out_dir(args.out, file)?;

    let summary = summarize(&cohort.records, bins).context("stage summarize")?;

    if emit.json {
        write_file(
            &dir.join("summary.json"),
            &serde_json::to_string_pretty(&summary)?,
        )?;
        write_file(
            &dir.join("rejections.json"),
            &serde_json::to_string_pretty(&cohort.rejections)?,
        )?;
    }
    if emit.svg {
        let id = run_id(cohort.seed);
        let cet4: Vec<f64> = cohort.records.iter().map(|r| r.cet4).collect();
        let gpa: Vec<f64> = cohort.records.iter().map(|r| r.gpa).collect();
        let cet4_svg = render_histogram(&cet4, bins, "CET-4 scores").context("stage viz")?;
        write_file(&dir.join(figure_filename(&id, "hist_cet4")), &cet4_svg)?;
        let gpa_svg = render_histogram(&gpa, bins, "GPA").context("stage viz")?;
        write_file(&dir.join(figure_filename(&id, "hist_gpa")), &gpa_svg)?;
    }
    println!(
        "summarized {} records (cet4 mean {:.2}, gpa mean {:.3}) into {}",
        summary.count,
        summary.cet4.mean,
        summary.gpa.mean,
        dir.display()
    );
    Ok(())
}

#[derive(Serialize)]
struct ElbowArtifact<'a> {
    curve: &'a ElbowCurve,
    knee: usize,
}

fn scan_elbow(
    features: &FeatureMatrix,
    k_range: (usize, usize),
    cfg: &KMeansConfig,
) -> Result<(ElbowCurve, usize)> {
    let curve = elbow_scan(features.matrix(), k_range.0, k_range.1, cfg).context("stage kmeans")?;
    for w in &curve.warnings {
        eprintln!("elbow warning: {w}");
    }
    let knee = detect_knee(&curve).context("stage kmeans")?;
    Ok((curve, knee))
}

fn kmeans_config(
    seed: u64,
    init: Option<InitMethod>,
    restarts: Option<usize>,
    file: &FileConfig,
) -> Result<KMeansConfig> {
    Ok(KMeansConfig {
        seed,
        init: init.or(file.init_method()?).unwrap_or(InitMethod::PlusPlus),
        restarts: restarts.or(file.restarts).unwrap_or(10),
        ..KMeansConfig::default()
    })
}

pub fn cmd_elbow(args: ElbowArgs, file: &FileConfig) -> Result<()> {
    let cohort = load_cohort(&args.cohort, file)?;
    let emit = resolve_emit(args.emit.as_ref(), file)?;
    let dir = out_dir(args.out, file)?;

    let params = scaler_for(&cohort.records, args.scaler_override.as_ref(), file)?;
    let (features, clamps) = build_matrix::<f64>(&cohort.records, &params);
    report_clamps(&clamps);

    let k_range = match args.k_range.as_ref().or(file.k_range.as_ref()) {
        Some(spec) => parse_k_range(spec)?,
        None => (1, 8),
    };
    let cfg = kmeans_config(cohort.seed, args.init.map(Into::into), args.restarts, file)?;
    let (curve, knee) = scan_elbow(&features, k_range, &cfg)?;

    write_file(&dir.join("elbow.csv"), &curve.to_csv())?;
    if emit.json {
        write_file(
            &dir.join("elbow.json"),
            &serde_json::to_string_pretty(&ElbowArtifact {
                curve: &curve,
                knee,
            })?,
        )?;
    }
    println!(
        "knee detected at k = {knee} over k in [{}, {}]",
        k_range.0, k_range.1
    );
    Ok(())
}

#[derive(Serialize)]
struct RunMetadata<'a> {
    seed: u64,
    sub_seed_scheme: &'static str,
    k: usize,
    k_source: &'static str,
    init: InitMethod,
    restarts: usize,
    tol: f64,
    max_iter: usize,
    pca_centered: bool,
    bounds: ValidationBounds,
    scaler: &'a ScalerParams,
    rejection_count: usize,
    clamp_warning_count: usize,
    sse: f64,
    iterations: usize,
    converged: bool,
    seed_used: u64,
}

pub fn cmd_run(args: RunArgs, file: &FileConfig) -> Result<()> {
    let cohort = load_cohort(&args.cohort, file)?;
    let emit = resolve_emit(args.emit.as_ref(), file)?;
    let dir = out_dir(args.out, file)?;
    let id = run_id(cohort.seed);

    // preprocess
    let params = scaler_for(&cohort.records, args.scaler_override.as_ref(), file)?;
    let (features, clamps) = build_matrix::<f64>(&cohort.records, &params);
    report_clamps(&clamps);

    // kmeans, with k from the flag or from the knee of an elbow scan
    let cfg = kmeans_config(cohort.seed, args.init.map(Into::into), args.restarts, file)?;
    let mut elbow_artifacts = None;
    let (k, k_source) = match args.k.or(file.k) {
        Some(k) => (k, "flag"),
        None => {
            let k_range = match args.k_range.as_ref().or(file.k_range.as_ref()) {
                Some(spec) => parse_k_range(spec)?,
                None => (1, 8),
            };
            let (curve, knee) = scan_elbow(&features, k_range, &cfg)?;
            elbow_artifacts = Some(curve);
            (knee, "knee")
        }
    };
    let cfg = KMeansConfig { k, ..cfg };
    let result = lloyd(features.matrix(), &cfg).context("stage kmeans")?;

    // pca
    let model = pca::fit(features.matrix()).context("stage pca")?;
    let z = pca::project(features.matrix(), &model, 2).context("stage pca")?;

    // metrics
    let sil = silhouette(features.matrix(), &result.labels).context("stage metrics")?;
    let ch = calinski_harabasz(features.matrix(), &result.labels).context("stage metrics")?;
    let (ari, homog) = if args.no_external {
        (None, None)
    } else {
        let truth: Vec<usize> = cohort.records.iter().map(|r| r.job as usize).collect();
        (
            Some(adjusted_rand_index(&truth, &result.labels).context("stage metrics")?),
            Some(homogeneity(&truth, &result.labels).context("stage metrics")?),
        )
    };
    let bundle = MetricsBundle {
        silhouette_mean: sil.overall_mean,
        per_cluster: sil.per_cluster_mean.clone(),
        calinski_harabasz: ch,
        ari,
        homogeneity: homog,
    };

    // guidance
    let rules = match args.rules.clone().or_else(|| file.rules.clone()) {
        None => default_rules(),
        Some(path) => {
            let text = fs::read_to_string(&path)
                .with_context(|| format!("reading rules file {}", path.display()))
                .context("stage guidance")?;
            GuidanceRuleSet::from_json(&text).context("stage guidance")?
        }
    };
    let profiles =
        profile_clusters(&cohort.records, &result.labels, k).context("stage guidance")?;
    let mapping = map_clusters_to_jobs(&profiles, &rules);
    for w in &mapping.warnings {
        eprintln!("guidance warning: {w}");
    }
    let report = render_report(&profiles, &mapping, &params, Some(bundle.clone()));

    // viz
    let mut figures: Vec<(String, String)> = Vec::new();
    if emit.svg {
        let hulls: Vec<_> = (0..k)
            .map(|c| {
                let pts: Vec<Point2<f64>> = (0..z.rows())
                    .filter(|&i| result.labels[i] == c)
                    .map(|i| Point2::new(z.get(i, 0), z.get(i, 1)))
                    .collect();
                convex_hull(&pts)
            })
            .collect();
        let scatter = render_scatter(&z, &result.labels, &hulls).context("stage viz")?;
        figures.push((figure_filename(&id, "scatter"), scatter));
        for p in &profiles {
            let title = format!(
                "Cluster {} - {}",
                p.cluster_id,
                mapping
                    .job_for(p.cluster_id)
                    .map_or("unassigned", |j| j.label())
            );
            let svg = render_radar(&radar_vector(p, &params), &title);
            figures.push((
                figure_filename(&id, &format!("radar_cluster{}", p.cluster_id)),
                svg,
            ));
        }
    }

    // write artifacts
    let mut assignments = String::from("serial,cluster,recommended_job\n");
    for (record, &label) in cohort.records.iter().zip(&result.labels) {
        let job = mapping.job_for(label).unwrap_or(dataset::Job::Other);
        let _ = writeln!(assignments, "{},{},{}", record.serial, label, job.token());
    }
    write_file(&dir.join("assignments.csv"), &assignments)?;
    if let Some(curve) = &elbow_artifacts {
        write_file(&dir.join("elbow.csv"), &curve.to_csv())?;
        if emit.json {
            write_file(
                &dir.join("elbow.json"),
                &serde_json::to_string_pretty(&ElbowArtifact { curve, knee: k })?,
            )?;
        }
    }
    if emit.json {
        write_file(
            &dir.join("metrics.json"),
            &serde_json::to_string_pretty(&bundle)?,
        )?;
        write_file(&dir.join("report.json"), &report.to_json())?;
        write_file(
            &dir.join("scaler.json"),
            &serde_json::to_string_pretty(&params)?,
        )?;
        write_file(
            &dir.join("rejections.json"),
            &serde_json::to_string_pretty(&cohort.rejections)?,
        )?;
        let metadata = RunMetadata {
            seed: cohort.seed,
            sub_seed_scheme: SUB_SEED_SCHEME,
            k,
            k_source,
            init: cfg.init,
            restarts: cfg.restarts,
            tol: cfg.tol,
            max_iter: cfg.max_iter,
            pca_centered: true,
            bounds: cohort.bounds,
            scaler: &params,
            rejection_count: cohort.rejections.len(),
            clamp_warning_count: clamps.len(),
            sse: result.sse,
            iterations: result.iterations,
            converged: result.converged,
            seed_used: result.seed_used,
        };
        write_file(
            &dir.join("run_metadata.json"),
            &serde_json::to_string_pretty(&metadata)?,
        )?;
    }
    if emit.text {
        write_file(&dir.join("report.txt"), &report.to_text())?;
    }
    for (name, svg) in &figures {
        write_file(&dir.join(name), svg)?;
    }

    println!(
        "clustered {} records into k = {k} ({k_source}); sse {:.6}; silhouette {:.4}; artifacts in {}",
        cohort.records.len(),
        result.sse,
        bundle.silhouette_mean,
        dir.display()
    );
    Ok(())
}

pub fn cmd_synth(args: SynthArgs, file: &FileConfig) -> Result<()> {
    let seed = args.seed.or(file.seed).unwrap_or(0);
    let mut spec = match &args.spec {
        None => SyntheticSpec::default(),
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading synthetic spec {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing synthetic spec {}", path.display()))?
        }
    };
    if let Some(n) = args.n {
        spec.n = n;
    }
    let records = dataset::generate_synthetic(&spec, seed).context("stage synth")?;
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            fs::create_dir_all(parent).with_context(|| format!("creating {}", parent.display()))?;
        }
    }
    write_file(&args.out, &records_to_csv(&records))?;
    println!(
        "wrote {} synthetic records to {}",
        records.len(),
        args.out.display()
    );
    Ok(())
}

fn parse_assignments(text: &str) -> Result<Vec<(u32, usize)>> {
    let mut lines = text.lines();
    let header = lines.next().context("assignments file is empty")?;
    if !header.trim_end().starts_with("serial,cluster") {
        bail!("assignments header must start with `serial,cluster`, got `{header}`");
    }
    let mut out = Vec::new();
    for (idx, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut fields = line.split(',');
        let serial: u32 = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .with_context(|| format!("bad serial on assignments line {}", idx + 2))?;
        let cluster: usize = fields
            .next()
            .and_then(|s| s.trim().parse().ok())
            .with_context(|| format!("bad cluster on assignments line {}", idx + 2))?;
        out.push((serial, cluster));
    }
    Ok(out)
}

pub fn cmd_metrics(args: MetricsArgs, file: &FileConfig) -> Result<()> {
    let text = fs::read_to_string(&args.input)
        .with_context(|| format!("reading cohort file {}", args.input.display()))?;
    let records = parse_records(&text).context("stage parse")?;
    let assignments_text = fs::read_to_string(&args.assignments)
        .with_context(|| format!("reading assignments file {}", args.assignments.display()))?;
    let assignments = parse_assignments(&assignments_text)?;

    // keep only assigned records, in assignment order
    let mut ordered = Vec::with_capacity(assignments.len());
    let mut labels = Vec::with_capacity(assignments.len());
    for (serial, cluster) in assignments {
        let record = records
            .iter()
            .find(|r| r.serial == serial)
            .with_context(|| format!("assignments reference unknown serial {serial}"))?;
        ordered.push(record.clone());
        labels.push(cluster);
    }

    let params = scaler_for(&ordered, args.scaler_override.as_ref(), file)?;
    let (features, clamps) = build_matrix::<f64>(&ordered, &params);
    report_clamps(&clamps);

    let sil = silhouette(features.matrix(), &labels).context("stage metrics")?;
    let ch = calinski_harabasz(features.matrix(), &labels).context("stage metrics")?;
    let (ari, homog) = if args.no_external {
        (None, None)
    } else {
        let truth: Vec<usize> = ordered.iter().map(|r| r.job as usize).collect();
        (
            Some(adjusted_rand_index(&truth, &labels).context("stage metrics")?),
            Some(homogeneity(&truth, &labels).context("stage metrics")?),
        )
    };
    let bundle = MetricsBundle {
        silhouette_mean: sil.overall_mean,
        per_cluster: sil.per_cluster_mean,
        calinski_harabasz: ch,
        ari,
        homogeneity: homog,
    };
    let json = serde_json::to_string_pretty(&bundle)?;
    match &args.out {
        Some(path) => write_file(path, &json)?,
        None => println!("{json}"),
    }
    Ok(())
}
