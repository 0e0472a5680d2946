//! Figures: per-cluster convex hulls and deterministic SVG documents for
//! scatter, radar, and histogram charts.

pub mod hull;
pub mod svg;

pub use hull::{convex_hull, HullPolygon, Point2};
pub use svg::{figure_filename, render_histogram, render_radar, render_scatter, VizError};
