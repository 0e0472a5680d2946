//! Acceptance criterion for the command-line pipeline: end-to-end
//! determinism of the artifact directory.

mod common;

use std::time::Instant;

use common::{dir_contents, run_ok, SAMPLE_COHORT_CSV};

#[test]
fn criterion_10_end_to_end_determinism() {
    let start = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let input = tmp.path().join("cohort.csv");
    std::fs::write(&input, SAMPLE_COHORT_CSV).unwrap();

    let dirs = [tmp.path().join("first"), tmp.path().join("second")];
    for dir in &dirs {
        run_ok(&[
            "run",
            "--input",
            input.to_str().unwrap(),
            "--out",
            dir.to_str().unwrap(),
            "--k",
            "4",
            "--seed",
            "7",
        ]);
    }

    let first = dir_contents(&dirs[0]);
    let second = dir_contents(&dirs[1]);
    assert_eq!(
        first.keys().collect::<Vec<_>>(),
        second.keys().collect::<Vec<_>>(),
        "artifact sets differ"
    );
    // the full set: assignments, metrics, report (json+text), scaler,
    // rejections, metadata, scatter, one radar per cluster
    assert!(first.contains_key("assignments.csv"));
    assert!(first.contains_key("metrics.json"));
    assert!(first.contains_key("report.json"));
    assert!(first.contains_key("report.txt"));
    assert!(first.contains_key("run-s7_scatter.svg"));
    for c in 0..4 {
        assert!(first.contains_key(&format!("run-s7_radar_cluster{c}.svg")));
    }
    for (name, bytes) in &first {
        assert_eq!(bytes, &second[name], "{name} differs between runs");
    }
    println!(
        "criterion 10 (end-to-end determinism): PASS over {} artifacts in {:.3}s",
        first.len(),
        start.elapsed().as_secs_f64()
    );
}
