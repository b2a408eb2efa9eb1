//! 2-D geometric primitives: points, rectangles, convex hulls, polygon metrics.
//!
//! Coordinates are planar (already projected); no geodesic math here.

use alloc::format;
use alloc::vec::Vec;
use core::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::CoreError;

/// A point in projected planar coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Self {
        Point { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }
}

/// Euclidean distance between two points.
pub fn distance(a: Point, b: Point) -> f64 {
    let dx = a.x - b.x;
    let dy = a.y - b.y;
    libm::sqrt(dx * dx + dy * dy)
}

/// An axis-aligned rectangle with `min_x <= max_x` and `min_y <= max_y`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Rect {
    pub min_x: f64,
    pub min_y: f64,
    pub max_x: f64,
    pub max_y: f64,
}

impl Rect {
    pub fn new(min_x: f64, min_y: f64, max_x: f64, max_y: f64) -> Self {
        debug_assert!(min_x <= max_x && min_y <= max_y);
        Rect {
            min_x,
            min_y,
            max_x,
            max_y,
        }
    }

    /// Smallest rectangle containing all points. Errors on an empty slice.
    pub fn bounding(points: &[Point]) -> Result<Self, CoreError> {
        if points.is_empty() {
            return Err(CoreError::EmptySample);
        }
        let mut r = Rect::new(points[0].x, points[0].y, points[0].x, points[0].y);
        for p in &points[1..] {
            r.min_x = r.min_x.min(p.x);
            r.min_y = r.min_y.min(p.y);
            r.max_x = r.max_x.max(p.x);
            r.max_y = r.max_y.max(p.y);
        }
        Ok(r)
    }

    pub fn width(&self) -> f64 {
        self.max_x - self.min_x
    }

    pub fn height(&self) -> f64 {
        self.max_y - self.min_y
    }

    pub fn area(&self) -> f64 {
        self.width() * self.height()
    }

    /// Closed-boundary containment.
    pub fn contains(&self, p: Point) -> bool {
        p.x >= self.min_x && p.x <= self.max_x && p.y >= self.min_y && p.y <= self.max_y
    }

    /// Clamps a point onto the rectangle coordinate-wise.
    pub fn clamp(&self, p: Point) -> Point {
        Point::new(
            p.x.max(self.min_x).min(self.max_x),
            p.y.max(self.min_y).min(self.max_y),
        )
    }

    /// Distance from a point to the rectangle; 0 if the point is inside
    /// (closed boundary).
    pub fn distance_to_point(&self, p: Point) -> f64 {
        let dx = (self.min_x - p.x).max(0.0).max(p.x - self.max_x);
        let dy = (self.min_y - p.y).max(0.0).max(p.y - self.max_y);
        libm::sqrt(dx * dx + dy * dy)
    }

    /// Grows the rectangle by `pad` on every side.
    pub fn padded(&self, pad: f64) -> Rect {
        Rect::new(
            self.min_x - pad,
            self.min_y - pad,
            self.max_x + pad,
            self.max_y + pad,
        )
    }

    /// Union of two rectangles.
    pub fn union(&self, other: &Rect) -> Rect {
        Rect::new(
            self.min_x.min(other.min_x),
            self.min_y.min(other.min_y),
            self.max_x.max(other.max_x),
            self.max_y.max(other.max_y),
        )
    }
}

/// A simple closed ring of vertices in counter-clockwise order.
///
/// Constructed via [`convex_hull`], which guarantees simplicity, positive
/// area, and a canonical (lexicographically smallest) start vertex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Polygon {
    vertices: Vec<Point>,
}

impl Polygon {
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Point-in-convex-polygon test (closed boundary) for CCW rings.
    pub fn contains(&self, p: Point, eps: f64) -> bool {
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if cross(a, b, p) < -eps {
                return false;
            }
        }
        true
    }
}

/// Area, perimeter, area-weighted centroid, and compactness of a polygon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PolygonMetrics {
    pub area: f64,
    pub perimeter: f64,
    pub centroid: Point,
    /// 4*pi*area / perimeter^2, in (0, 1]; 1 for a disk, pi/4 for a square.
    pub compactness: f64,
}

fn cross(o: Point, a: Point, b: Point) -> f64 {
    (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x)
}

/// Convex hull (Andrew's monotone chain), counter-clockwise, starting at the
/// lexicographically smallest vertex. Deterministic for a fixed input multiset.
///
/// Collinear boundary points are dropped so every vertex is a hull corner.
pub fn convex_hull(points: &[Point]) -> Result<Polygon, CoreError> {
    let mut pts: Vec<Point> = points.to_vec();
    pts.sort_by(|a, b| (a.x, a.y).partial_cmp(&(b.x, b.y)).unwrap());
    pts.dedup_by(|a, b| a.x == b.x && a.y == b.y);
    if pts.len() < 3 {
        return Err(CoreError::DegenerateInput(format!(
            "need >= 3 distinct points, got {}",
            pts.len()
        )));
    }

    let mut lower: Vec<Point> = Vec::new();
    for &p in &pts {
        while lower.len() >= 2 && cross(lower[lower.len() - 2], lower[lower.len() - 1], p) <= 0.0 {
            lower.pop();
        }
        lower.push(p);
    }
    let mut upper: Vec<Point> = Vec::new();
    for &p in pts.iter().rev() {
        while upper.len() >= 2 && cross(upper[upper.len() - 2], upper[upper.len() - 1], p) <= 0.0 {
            upper.pop();
        }
        upper.push(p);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    if lower.len() < 3 {
        return Err(CoreError::DegenerateInput("all points collinear".into()));
    }
    Ok(Polygon { vertices: lower })
}

/// Shoelace area, ring perimeter, area-weighted centroid, and compactness.
pub fn polygon_metrics(poly: &Polygon) -> Result<PolygonMetrics, CoreError> {
    let v = &poly.vertices;
    let n = v.len();
    let mut twice_area = 0.0;
    let mut perimeter = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let a = v[i];
        let b = v[(i + 1) % n];
        let w = a.x * b.y - b.x * a.y;
        twice_area += w;
        cx += (a.x + b.x) * w;
        cy += (a.y + b.y) * w;
        perimeter += distance(a, b);
    }
    let area = twice_area * 0.5;
    if area <= 0.0 {
        return Err(CoreError::DegenerateInput("polygon area is zero".into()));
    }
    let centroid = Point::new(cx / (6.0 * area), cy / (6.0 * area));
    let compactness = 4.0 * PI * area / (perimeter * perimeter);
    Ok(PolygonMetrics {
        area,
        perimeter,
        centroid,
        compactness,
    })
}
