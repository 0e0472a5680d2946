//! Convex hulls in the plane via Andrew's monotone chain.

use serde::{Deserialize, Serialize};

use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point2<F> {
    pub x: F,
    pub y: F,
}

impl<F: Real> Point2<F> {
    pub fn new(x: F, y: F) -> Self {
        Point2 { x, y }
    }
}

/// Strictly convex polygon: vertices in counter-clockwise order, no three
/// consecutive vertices collinear. One point degenerates to a single vertex,
/// collinear input to the extreme segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HullPolygon<F> {
    vertices: Vec<Point2<F>>,
}

impl<F: Real> HullPolygon<F> {
    pub fn vertices(&self) -> &[Point2<F>] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// True when `p` lies inside or on the boundary, within `tol` on each
    /// edge's cross product. Degenerate hulls fall back to segment/point
    /// containment.
    pub fn contains(&self, p: Point2<F>, tol: F) -> bool {
        match self.vertices.len() {
            0 => false,
            1 => {
                let v = self.vertices[0];
                (p.x - v.x).abs() <= tol && (p.y - v.y).abs() <= tol
            }
            2 => {
                let (a, b) = (self.vertices[0], self.vertices[1]);
                if cross(a, b, p).abs() > tol {
                    return false;
                }
                let dot = (p.x - a.x) * (b.x - a.x) + (p.y - a.y) * (b.y - a.y);
                let len2 = (b.x - a.x) * (b.x - a.x) + (b.y - a.y) * (b.y - a.y);
                dot >= -tol && dot <= len2 + tol
            }
            n => (0..n).all(|i| {
                let a = self.vertices[i];
                let b = self.vertices[(i + 1) % n];
                cross(a, b, p) >= -tol
            }),
        }
    }
}

#[inline]
fn cross<F: Real>(o: Point2<F>, a: Point2<F>, b: Point2<F>) -> F {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Andrew's monotone chain. Collinear boundary points are excluded, so the
/// result is the unique minimal vertex set.
pub fn convex_hull<F: Real>(points: &[Point2<F>]) -> HullPolygon<F> {
    assert!(!points.is_empty(), "convex hull needs at least one point");
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        (a.x, a.y)
            .partial_cmp(&(b.x, b.y))
            .expect("finite coordinates")
    });
    sorted.dedup();

    if sorted.len() == 1 {
        return HullPolygon { vertices: sorted };
    }

    let mut lower: Vec<Point2<F>> = Vec::new();
    for &p in &sorted {
        while lower.len() >= 2
            && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= F::zero()
        {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point2<F>> = Vec::new();
    for &p in sorted.iter().rev() {
        while upper.len() >= 2
            && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= F::zero()
        {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    HullPolygon { vertices: lower }
}
