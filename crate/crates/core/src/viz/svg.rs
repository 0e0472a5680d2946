//! Deterministic SVG 1.1 emission. All geometry is formatted with fixed
//! precision so identical inputs produce identical bytes.

use std::fmt::Write as _;

use thiserror::Error;

use crate::dataset::histogram;
use crate::guidance::{RadarVector, RADAR_AXES};
use crate::matrix::Matrix;
use crate::viz::hull::HullPolygon;

#[derive(Debug, Error)]
pub enum VizError {
    #[error("scatter input shapes disagree")]
    BadShape,
    #[error("histogram input is empty")]
    EmptyInput,
}

const WIDTH: f64 = 800.0;
const HEIGHT: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// Marker color/shape palette keyed by cluster index; clusters beyond the
/// fourth cycle through it again.
const PALETTE: [(&str, Marker); 4] = [
    ("#2ca02c", Marker::Circle),
    ("#ff7f0e", Marker::Square),
    ("#1f77b4", Marker::Diamond),
    ("#9467bd", Marker::Triangle),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Marker {
    Circle,
    Square,
    Diamond,
    Triangle,
}

/// File naming convention for emitted figures.
pub fn figure_filename(run_id: &str, figure: &str) -> String {
    format!("{run_id}_{figure}.svg")
}

fn document(body: &str) -> String {
    format!(
        "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
         <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" \
         width=\"{WIDTH}\" height=\"{HEIGHT}\" viewBox=\"0 0 {WIDTH} {HEIGHT}\">\n\
         <rect x=\"0\" y=\"0\" width=\"{WIDTH}\" height=\"{HEIGHT}\" fill=\"white\"/>\n\
         {body}</svg>\n"
    )
}

fn axes(min_x: f64, max_x: f64, min_y: f64, max_y: f64) -> String {
    let left = MARGIN;
    let right = WIDTH - MARGIN;
    let top = MARGIN;
    let bottom = HEIGHT - MARGIN;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{bottom}\" x2=\"{right}\" y2=\"{bottom}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<line x1=\"{left}\" y1=\"{top}\" x2=\"{left}\" y2=\"{bottom}\" stroke=\"black\"/>"
    );
    let _ = writeln!(
        s,
        "<text x=\"{left}\" y=\"{}\" font-size=\"12\">{min_x:.2}</text>",
        bottom + 16.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{right}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{max_x:.2}</text>",
        bottom + 16.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{bottom}\" font-size=\"12\" text-anchor=\"end\">{min_y:.2}</text>",
        left - 4.0
    );
    let _ = writeln!(
        s,
        "<text x=\"{}\" y=\"{}\" font-size=\"12\" text-anchor=\"end\">{max_y:.2}</text>",
        left - 4.0,
        top + 4.0
    );
    s
}

fn marker_svg(marker: Marker, color: &str, x: f64, y: f64) -> String {
    match marker {
        Marker::Circle => format!("<circle cx=\"{x:.3}\" cy=\"{y:.3}\" r=\"4\" fill=\"{color}\"/>"),
        Marker::Square => format!(
            "<rect x=\"{:.3}\" y=\"{:.3}\" width=\"8\" height=\"8\" fill=\"{color}\"/>",
            x - 4.0,
            y - 4.0
        ),
        Marker::Diamond => format!(
            "<polygon points=\"{x:.3},{:.3} {:.3},{y:.3} {x:.3},{:.3} {:.3},{y:.3}\" fill=\"{color}\"/>",
            y - 5.0,
            x + 5.0,
            y + 5.0,
            x - 5.0
        ),
        Marker::Triangle => format!(
            "<polygon points=\"{x:.3},{:.3} {:.3},{:.3} {:.3},{:.3}\" fill=\"{color}\"/>",
            y - 5.0,
            x + 4.33,
            y + 2.5,
            x - 4.33,
            y + 2.5
        ),
    }
}

/// Scatter plot of an n×2 projection: one marker per point keyed by cluster,
/// plus translucent hull fills. Cluster `i` uses palette entry `i % 4` for
/// both its markers and its hull.
pub fn render_scatter(
    z: &Matrix<f64>,
    labels: &[usize],
    hulls: &[HullPolygon<f64>],
) -> Result<String, VizError> {
    if z.rows() != labels.len() || (z.rows() > 0 && z.cols() != 2) {
        return Err(VizError::BadShape);
    }

    let mut min_x = f64::INFINITY;
    let mut max_x = f64::NEG_INFINITY;
    let mut min_y = f64::INFINITY;
    let mut max_y = f64::NEG_INFINITY;
    for i in 0..z.rows() {
        min_x = min_x.min(z.get(i, 0));
        max_x = max_x.max(z.get(i, 0));
        min_y = min_y.min(z.get(i, 1));
        max_y = max_y.max(z.get(i, 1));
    }
    for hull in hulls {
        for v in hull.vertices() {
            min_x = min_x.min(v.x);
            max_x = max_x.max(v.x);
            min_y = min_y.min(v.y);
            max_y = max_y.max(v.y);
        }
    }
    if !min_x.is_finite() {
        (min_x, max_x, min_y, max_y) = (0.0, 1.0, 0.0, 1.0);
    }
    if min_x == max_x {
        min_x -= 0.5;
        max_x += 0.5;
    }
    if min_y == max_y {
        min_y -= 0.5;
        max_y += 0.5;
    }

    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let sx = |x: f64| MARGIN + (x - min_x) / (max_x - min_x) * plot_w;
    let sy = |y: f64| HEIGHT - MARGIN - (y - min_y) / (max_y - min_y) * plot_h;

    let mut body = axes(min_x, max_x, min_y, max_y);
    for (i, hull) in hulls.iter().enumerate() {
        if hull.len() < 2 {
            continue;
        }
        let (color, _) = PALETTE[i % PALETTE.len()];
        let points: Vec<String> = hull
            .vertices()
            .iter()
            .map(|v| format!("{:.3},{:.3}", sx(v.x), sy(v.y)))
            .collect();
        let _ = writeln!(
            body,
            "<polygon points=\"{}\" fill=\"{color}\" fill-opacity=\"0.2\" stroke=\"{color}\"/>",
            points.join(" ")
        );
    }
    for i in 0..z.rows() {
        let (color, marker) = PALETTE[labels[i] % PALETTE.len()];
        body.push_str(&marker_svg(marker, color, sx(z.get(i, 0)), sy(z.get(i, 1))));
        body.push('\n');
    }
    Ok(document(&body))
}

/// Radar polygon vertices for a unit-scaled vector: axis order CET (top),
/// GPA (right), Extrovert (bottom), Leader (left).
pub fn radar_polygon(vector: &RadarVector, cx: f64, cy: f64, radius: f64) -> [(f64, f64); 4] {
    let values = vector.as_array();
    let mut out = [(0.0, 0.0); 4];
    for (i, &v) in values.iter().enumerate() {
        let angle = -std::f64::consts::FRAC_PI_2 + i as f64 * std::f64::consts::FRAC_PI_2;
        out[i] = (cx + radius * v * angle.cos(), cy + radius * v * angle.sin());
    }
    out
}

/// Four-axis radar chart with rings at quarter fractions of the unit radius.
pub fn render_radar(vector: &RadarVector, title: &str) -> String {
    let cx = WIDTH / 2.0;
    let cy = HEIGHT / 2.0 + 10.0;
    let radius = 220.0;

    let mut body = String::new();
    let _ = writeln!(
        body,
        "<text x=\"{cx}\" y=\"28\" font-size=\"18\" text-anchor=\"middle\">{}</text>",
        escape_text(title)
    );
    for ring in [0.25, 0.5, 0.75, 1.0] {
        let _ = writeln!(
            body,
            "<circle cx=\"{cx}\" cy=\"{cy}\" r=\"{:.3}\" fill=\"none\" stroke=\"#cccccc\"/>",
            radius * ring
        );
    }
    let unit = RadarVector {
        cet_norm: 1.0,
        gpa_norm: 1.0,
        extrovert_fraction: 1.0,
        leader_fraction: 1.0,
    };
    let outer = radar_polygon(&unit, cx, cy, radius);
    for (i, &(x, y)) in outer.iter().enumerate() {
        let _ = writeln!(
            body,
            "<line x1=\"{cx}\" y1=\"{cy}\" x2=\"{x:.3}\" y2=\"{y:.3}\" stroke=\"#999999\"/>"
        );
        let (lx, ly) = (cx + (x - cx) * 1.12, cy + (y - cy) * 1.12 + 4.0);
        let _ = writeln!(
            body,
            "<text x=\"{lx:.3}\" y=\"{ly:.3}\" font-size=\"14\" text-anchor=\"middle\">{}</text>",
            RADAR_AXES[i]
        );
    }
    let verts = radar_polygon(vector, cx, cy, radius);
    let points: Vec<String> = verts
        .iter()
        .map(|(x, y)| format!("{x:.3},{y:.3}"))
        .collect();
    let _ = writeln!(
        body,
        "<polygon points=\"{}\" fill=\"#1f77b4\" fill-opacity=\"0.35\" stroke=\"#1f77b4\" stroke-width=\"2\"/>",
        points.join(" ")
    );
    document(&body)
}

/// Histogram with equal-width bars spanning the value range; bar heights are
/// proportional to bin counts.
pub fn render_histogram(values: &[f64], bins: usize, title: &str) -> Result<String, VizError> {
    if values.is_empty() {
        return Err(VizError::EmptyInput);
    }
    assert!(bins > 0, "bin count must be positive");
    let cells = histogram(values, bins);
    let max_count = cells.iter().map(|b| b.count).max().unwrap_or(1).max(1);

    let plot_w = WIDTH - 2.0 * MARGIN;
    let plot_h = HEIGHT - 2.0 * MARGIN;
    let bar_w = plot_w / bins as f64;

    let min = cells.first().map_or(0.0, |b| b.lower);
    let max = cells.last().map_or(1.0, |b| b.upper);
    let mut body = axes(min, max, 0.0, max_count as f64);
    let _ = writeln!(
        body,
        "<text x=\"{:.3}\" y=\"24\" font-size=\"18\" text-anchor=\"middle\">{}</text>",
        WIDTH / 2.0,
        escape_text(title)
    );
    for (i, bin) in cells.iter().enumerate() {
        if bin.count == 0 {
            continue;
        }
        let h = bin.count as f64 / max_count as f64 * plot_h;
        let x = MARGIN + i as f64 * bar_w;
        let y = HEIGHT - MARGIN - h;
        let _ = writeln!(
            body,
            "<rect x=\"{x:.3}\" y=\"{y:.3}\" width=\"{:.3}\" height=\"{h:.3}\" \
             fill=\"#1f77b4\" stroke=\"white\"/>",
            bar_w
        );
    }
    Ok(document(&body))
}

fn escape_text(s: &str) -> String {
    s.replace('&', "&amp;")
        .replace('<', "&lt;")
        .replace('>', "&gt;")
}
