//! Planar geometry: points, convex polygons, and intersection areas.
//!
//! Coordinates are meters in a local planar frame. Polygons are stored
//! counter-clockwise and are either empty or convex up to a small
//! collinearity tolerance. Intersection areas come from clipping one polygon
//! against the half-planes of the other; no intersection or union polygon is
//! ever handed back to callers that only need areas.

use std::cmp::Ordering;
use std::ops::{Add, Mul, Sub};

use thiserror::Error;

/// Cross products below this magnitude (m²) count as collinear.
pub const COLLINEARITY_TOL: f64 = 1e-9;

/// A point (or displacement) in the local planar frame, in meters.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(self, other: Self) -> f64 {
        let d = other - self;
        (d.x * d.x + d.y * d.y).sqrt()
    }

    pub fn is_finite(self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Lexicographic total order on (x, y).
    fn total_cmp(&self, other: &Self) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }
}

impl Add for Point {
    type Output = Point;
    fn add(self, rhs: Point) -> Point {
        Point::new(self.x + rhs.x, self.y + rhs.y)
    }
}

impl Sub for Point {
    type Output = Point;
    fn sub(self, rhs: Point) -> Point {
        Point::new(self.x - rhs.x, self.y - rhs.y)
    }
}

impl Mul<f64> for Point {
    type Output = Point;
    fn mul(self, s: f64) -> Point {
        Point::new(self.x * s, self.y * s)
    }
}

/// z-component of (b - a) × (c - a); positive when a→b→c turns left.
pub(crate) fn cross(a: Point, b: Point, c: Point) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

#[derive(Debug, Error, PartialEq)]
pub enum PolygonError {
    #[error("a polygon needs 0 or at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("vertices take a right turn at index {0}; polygon is not convex")]
    NotConvex(usize),
    #[error("vertex {0} is not finite")]
    NonFinite(usize),
}

/// Convex polygon with counter-clockwise vertices, or the empty region.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct ConvexPolygon {
    vertices: Vec<Point>,
}

impl ConvexPolygon {
    pub fn empty() -> Self {
        Self::default()
    }

    /// Builds a polygon from a vertex ring. Clockwise input is reversed so
    /// the stored ring is always counter-clockwise; convexity is checked up
    /// to [`COLLINEARITY_TOL`].
    pub fn new(mut vertices: Vec<Point>) -> Result<Self, PolygonError> {
        if vertices.is_empty() {
            return Ok(Self::empty());
        }
        if let Some(i) = vertices.iter().position(|v| !v.is_finite()) {
            return Err(PolygonError::NonFinite(i));
        }
        if vertices.len() < 3 {
            return Err(PolygonError::TooFewVertices(vertices.len()));
        }
        if signed_area2(&vertices) < 0.0 {
            vertices.reverse();
        }
        let n = vertices.len();
        for i in 0..n {
            let turn = cross(vertices[i], vertices[(i + 1) % n], vertices[(i + 2) % n]);
            if turn < -COLLINEARITY_TOL {
                return Err(PolygonError::NotConvex(i));
            }
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Shoelace area in m²; zero for the empty polygon.
    pub fn area(&self) -> f64 {
        (0.5 * signed_area2(&self.vertices)).max(0.0)
    }

    /// True when `p` is inside or within `tol` meters of the boundary.
    pub fn contains(&self, p: Point, tol: f64) -> bool {
        if self.vertices.len() < 3 {
            return false;
        }
        let n = self.vertices.len();
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            let len = a.distance(b);
            if len == 0.0 {
                continue;
            }
            if cross(a, b, p) < -tol * len {
                return false;
            }
        }
        true
    }

    /// Axis-aligned bounds as `(min, max)`, or `None` when empty.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        let first = *self.vertices.first()?;
        let mut min = first;
        let mut max = first;
        for v in &self.vertices[1..] {
            min.x = min.x.min(v.x);
            min.y = min.y.min(v.y);
            max.x = max.x.max(v.x);
            max.y = max.y.max(v.y);
        }
        Some((min, max))
    }
}

fn signed_area2(vertices: &[Point]) -> f64 {
    let n = vertices.len();
    if n < 3 {
        return 0.0;
    }
    let mut sum = 0.0;
    for i in 0..n {
        let p = vertices[i];
        let q = vertices[(i + 1) % n];
        sum += p.x * q.y - q.x * p.y;
    }
    sum
}

/// Reusable buffers for the clipping loop; one per worker is plenty.
#[derive(Debug, Default)]
pub(crate) struct ClipScratch {
    cur: Vec<Point>,
    next: Vec<Point>,
}

/// Area of `p ∩ q` in m².
///
/// Arguments are put in a canonical order first, so the result is symmetric
/// bit-for-bit. Disjoint or merely touching polygons yield 0.
pub fn convex_intersection_area(p: &ConvexPolygon, q: &ConvexPolygon) -> f64 {
    intersection_area(p, q, &mut ClipScratch::default())
}

pub(crate) fn intersection_area(
    p: &ConvexPolygon,
    q: &ConvexPolygon,
    scratch: &mut ClipScratch,
) -> f64 {
    if p.is_empty() || q.is_empty() {
        return 0.0;
    }
    let (subject, clip) = match vertex_order(p.vertices(), q.vertices()) {
        Ordering::Greater => (q.vertices(), p.vertices()),
        _ => (p.vertices(), q.vertices()),
    };
    scratch.cur.clear();
    scratch.cur.extend_from_slice(subject);
    let n = clip.len();
    for i in 0..n {
        let a = clip[i];
        let b = clip[(i + 1) % n];
        clip_halfplane(&scratch.cur, a, b, &mut scratch.next);
        std::mem::swap(&mut scratch.cur, &mut scratch.next);
        if scratch.cur.is_empty() {
            return 0.0;
        }
    }
    (0.5 * signed_area2(&scratch.cur)).max(0.0)
}

/// Keeps the part of `input` on or left of the directed line a→b.
fn clip_halfplane(input: &[Point], a: Point, b: Point, out: &mut Vec<Point>) {
    out.clear();
    let Some(&last) = input.last() else {
        return;
    };
    let mut prev = last;
    let mut prev_side = cross(a, b, prev);
    for &cur in input {
        let side = cross(a, b, cur);
        if side >= 0.0 {
            if prev_side < 0.0 {
                out.push(edge_crossing(prev, cur, prev_side, side));
            }
            out.push(cur);
        } else if prev_side >= 0.0 {
            out.push(edge_crossing(prev, cur, prev_side, side));
        }
        prev = cur;
        prev_side = side;
    }
}

fn edge_crossing(p: Point, q: Point, side_p: f64, side_q: f64) -> Point {
    let t = side_p / (side_p - side_q);
    p + (q - p) * t
}

fn vertex_order(a: &[Point], b: &[Point]) -> Ordering {
    for (pa, pb) in a.iter().zip(b.iter()) {
        let o = pa.total_cmp(pb);
        if o != Ordering::Equal {
            return o;
        }
    }
    a.len().cmp(&b.len())
}
