//! Shared helpers for the integration suites.
#![allow(dead_code)] // each test binary uses a different subset

use career_cluster::matrix::Matrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

/// Isotropic Gaussian blobs around the given centers, `per` points each,
/// emitted center-by-center.
pub fn gaussian_blobs(centers: &[[f64; 2]], sigma: f64, per: usize, seed: u64) -> Matrix<f64> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, sigma).expect("valid sigma");
    let mut rows = Vec::with_capacity(centers.len() * per);
    for c in centers {
        for _ in 0..per {
            rows.push(vec![
                c[0] + noise.sample(&mut rng),
                c[1] + noise.sample(&mut rng),
            ]);
        }
    }
    Matrix::from_rows(&rows)
}

/// Corners of the unit square, the 4-blob benchmark geometry.
pub const UNIT_SQUARE_CORNERS: [[f64; 2]; 4] = [[0.0, 0.0], [0.0, 1.0], [1.0, 0.0], [1.0, 1.0]];

/// Minimal well-formedness check for the SVG subset we emit: one XML decl,
/// properly nested and matched tags, quoted attributes.
pub fn assert_well_formed_xml(doc: &str) {
    let doc = doc.trim();
    assert!(doc.starts_with("<?xml"), "missing XML declaration");
    let rest = &doc[doc.find("?>").expect("declaration closes") + 2..];

    let mut stack: Vec<String> = Vec::new();
    let mut chars = rest.char_indices().peekable();
    while let Some((i, c)) = chars.next() {
        if c != '<' {
            continue;
        }
        let close = rest[i..].find('>').map(|j| i + j).expect("unclosed tag");
        let inner = &rest[i + 1..close];
        assert!(!inner.is_empty(), "empty tag");
        assert_eq!(
            inner.matches('"').count() % 2,
            0,
            "unbalanced quotes in <{inner}>"
        );
        if let Some(name) = inner.strip_prefix('/') {
            let open = stack
                .pop()
                .unwrap_or_else(|| panic!("stray closing </{name}>"));
            assert_eq!(open, name, "mismatched </{name}> against <{open}>");
        } else if !inner.ends_with('/') {
            let name: String = inner.chars().take_while(|ch| !ch.is_whitespace()).collect();
            stack.push(name);
        }
        while let Some(&(j, _)) = chars.peek() {
            if j > close {
                break;
            }
            chars.next();
        }
    }
    assert!(stack.is_empty(), "unclosed tags: {stack:?}");
}
