//! Helpers shared by the CLI test binaries.
#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::Path;
use std::process::{Command, Output};

pub const SAMPLE_COHORT_CSV: &str = include_str!("../../../core/data/sample_cohort.csv");

pub fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_career-cluster"))
}

pub fn run_ok(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        output.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&output.stderr)
    );
    output
}

pub fn run_err(args: &[&str]) -> Output {
    let output = bin().args(args).output().expect("binary runs");
    assert!(
        !output.status.success(),
        "command {args:?} unexpectedly succeeded"
    );
    output
}

/// Deterministic 4-blob cohort: tight groups at the four corners of the
/// (cet4, gpa) rectangle, constant binary features.
pub fn four_blob_cohort_csv(per_blob: usize) -> String {
    let mut csv = String::from("serial_number,cet4,gpa,personality,student_leader,job\n");
    let centers = [(350.0, 2.5), (350.0, 4.5), (600.0, 2.5), (600.0, 4.5)];
    let mut serial = 1;
    for (b, (cet, gpa)) in centers.iter().enumerate() {
        for i in 0..per_blob {
            // cheap deterministic jitter in roughly ±5% of each feature range
            let h = ((serial as u64).wrapping_mul(2654435761) >> 7) % 1000;
            let u = h as f64 / 1000.0 - 0.5;
            let v = (((serial as u64).wrapping_mul(40503) >> 3) % 1000) as f64 / 1000.0 - 0.5;
            let job = [
                "sales post",
                "management post",
                "technical post",
                "product post",
            ][b];
            csv.push_str(&format!(
                "{},{:.3},{:.4},e,1,{}\n",
                serial,
                cet + u * 25.0,
                gpa + v * 0.2,
                job
            ));
            serial += 1;
            let _ = i;
        }
    }
    csv
}

/// Reads every file in a flat directory into name → bytes.
pub fn dir_contents(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    let mut out = BTreeMap::new();
    for entry in std::fs::read_dir(dir).expect("readable dir") {
        let entry = entry.expect("dir entry");
        assert!(entry.file_type().expect("file type").is_file());
        let name = entry.file_name().to_string_lossy().into_owned();
        out.insert(name, std::fs::read(entry.path()).expect("readable file"));
    }
    out
}
