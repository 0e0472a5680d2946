//! End-to-end library run on the bundled fixture: preprocess, cluster,
//! project, score, recommend, render.

mod common;

use career_cluster::dataset::{parse_records, validate_cohort, ValidationBounds};
use career_cluster::fixtures::SAMPLE_COHORT_CSV;
use career_cluster::guidance::{
    default_rules, map_clusters_to_jobs, profile_clusters, radar_vector, render_report,
};
use career_cluster::kmeans::{lloyd, KMeansConfig};
use career_cluster::metrics::{
    adjusted_rand_index, calinski_harabasz, homogeneity, silhouette, MetricsBundle,
};
use career_cluster::pca;
use career_cluster::preprocess::{build_matrix, fit_scaler};
use career_cluster::viz::hull::{convex_hull, Point2};
use career_cluster::viz::{render_histogram, render_radar, render_scatter};

use common::assert_well_formed_xml;

#[test]
fn fixture_pipeline_runs_end_to_end() {
    let records = parse_records(SAMPLE_COHORT_CSV).unwrap();
    let retained = validate_cohort(&records, &ValidationBounds::default()).retained;
    assert_eq!(retained.len(), 50);

    let params = fit_scaler(&retained).unwrap();
    let (features, warnings) = build_matrix::<f64>(&retained, &params);
    assert!(warnings.is_empty());

    let cfg = KMeansConfig {
        k: 4,
        seed: 7,
        ..KMeansConfig::default()
    };
    let result = lloyd(features.matrix(), &cfg).unwrap();
    assert_eq!(result.labels.len(), 50);
    assert!(result.labels.iter().all(|&l| l < 4));
    assert!(result.converged);

    let model = pca::fit(features.matrix()).unwrap();
    let z = pca::project(features.matrix(), &model, 2).unwrap();
    assert_eq!((z.rows(), z.cols()), (50, 2));

    let report = silhouette(features.matrix(), &result.labels).unwrap();
    assert!(report.per_point.iter().all(|s| (-1.0..=1.0).contains(s)));
    let ch = calinski_harabasz(features.matrix(), &result.labels).unwrap();
    assert!(ch > 0.0);

    let truth: Vec<usize> = retained.iter().map(|r| r.job as usize).collect();
    let ari = adjusted_rand_index(&truth, &result.labels).unwrap();
    assert!((-1.0..=1.0).contains(&ari));
    let h = homogeneity(&truth, &result.labels).unwrap();
    assert!((0.0..=1.0).contains(&h));

    let profiles = profile_clusters(&retained, &result.labels, 4).unwrap();
    assert_eq!(profiles.len(), 4);
    assert_eq!(profiles.iter().map(|p| p.size).sum::<usize>(), 50);

    let mapping = map_clusters_to_jobs(&profiles, &default_rules());
    assert_eq!(mapping.assignments.len(), 4);

    let bundle = MetricsBundle {
        silhouette_mean: report.overall_mean,
        per_cluster: report.per_cluster_mean.clone(),
        calinski_harabasz: ch,
        ari: Some(ari),
        homogeneity: Some(h),
    };
    let doc = render_report(&profiles, &mapping, &params, Some(bundle));
    assert_eq!(doc.clusters.len(), 4);
    assert!(doc.to_text().contains("Metrics"));
    let json: serde_json::Value = serde_json::from_str(&doc.to_json()).unwrap();
    assert!(json["metrics"]["ari"].is_number());

    // figures
    let hulls: Vec<_> = (0..4)
        .map(|c| {
            let pts: Vec<Point2<f64>> = (0..z.rows())
                .filter(|&i| result.labels[i] == c)
                .map(|i| Point2::new(z.get(i, 0), z.get(i, 1)))
                .collect();
            convex_hull(&pts)
        })
        .collect();
    let scatter = render_scatter(&z, &result.labels, &hulls).unwrap();
    assert_well_formed_xml(&scatter);

    for p in &profiles {
        let radar = render_radar(
            &radar_vector(p, &params),
            &format!("Cluster {}", p.cluster_id),
        );
        assert_well_formed_xml(&radar);
    }
    let cet4: Vec<f64> = retained.iter().map(|r| r.cet4).collect();
    let hist = render_histogram(&cet4, 20, "CET-4 scores").unwrap();
    assert_well_formed_xml(&hist);
}

#[test]
fn pipeline_is_deterministic_for_a_seed() {
    let records = parse_records(SAMPLE_COHORT_CSV).unwrap();
    let params = fit_scaler(&records).unwrap();
    let (features, _) = build_matrix::<f64>(&records, &params);
    let cfg = KMeansConfig {
        k: 4,
        seed: 7,
        ..KMeansConfig::default()
    };
    let a = lloyd(features.matrix(), &cfg).unwrap();
    let b = lloyd(features.matrix(), &cfg).unwrap();
    assert_eq!(a, b);

    let za = pca::project(features.matrix(), &pca::fit(features.matrix()).unwrap(), 2).unwrap();
    let hulls: Vec<_> = (0..4)
        .map(|c| {
            let pts: Vec<Point2<f64>> = (0..za.rows())
                .filter(|&i| a.labels[i] == c)
                .map(|i| Point2::new(za.get(i, 0), za.get(i, 1)))
                .collect();
            convex_hull(&pts)
        })
        .collect();
    let svg1 = render_scatter(&za, &a.labels, &hulls).unwrap();
    let svg2 = render_scatter(&za, &b.labels, &hulls).unwrap();
    assert_eq!(svg1, svg2);
}
