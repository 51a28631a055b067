//! Camera field-of-view model and the common-view weight between two views.
//!
//! A field of view is a circular sector: camera position, viewable radius
//! `r`, compass direction `theta` (degrees clockwise from north) and full
//! horizontal lens angle `delta`. The sector spans bearings
//! `theta ± delta/2` out to range `r`.
//!
//! The sector is never intersected exactly. It is replaced by a convex
//! polygon (an inscribed triangle fan for MBS, a circumscribed triangle for
//! MBT, an axis-aligned bounding rectangle for MBR), and the common-view
//! weight of two views is the intersection-over-union of the two polygons.
//! The union area uses inclusion-exclusion, so only one clipping pass runs
//! per pair.

use thiserror::Error;

use crate::geom::{intersection_area, ClipScratch, ConvexPolygon, Point};

/// Union areas below this (m²) make the IoU ratio meaningless; return 0.
const UNION_AREA_FLOOR: f64 = 1e-12;

/// Relative pull-in applied to the fan radius and half-angle so fan vertices
/// stay strictly inside the exact sector under floating point.
const FAN_SHRINK: f64 = 1e-12;

/// Cell budget for the grid IoU estimator.
pub const GRID_CELL_BUDGET: u64 = 10_000_000;

/// Unit vector for a compass bearing in degrees (clockwise from north).
pub fn dir(bearing_deg: f64) -> Point {
    let rad = bearing_deg.to_radians();
    Point::new(rad.sin(), rad.cos())
}

/// Compass bearing in `[0, 360)` of the displacement `from → to`.
pub fn bearing(from: Point, to: Point) -> f64 {
    let d = to - from;
    normalize_bearing(d.x.atan2(d.y).to_degrees())
}

/// Wraps a bearing into `[0, 360)`.
pub fn normalize_bearing(deg: f64) -> f64 {
    let b = deg.rem_euclid(360.0);
    if b >= 360.0 {
        0.0
    } else {
        b
    }
}

/// Absolute circular difference between two bearings, in `[0, 180]`.
pub fn circular_difference(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

/// Exact area of the circular sector with radius `r` and full angle
/// `delta_deg`.
pub fn sector_area(r: f64, delta_deg: f64) -> f64 {
    0.5 * r * r * delta_deg.to_radians()
}

#[derive(Debug, Error, PartialEq)]
pub enum FovError {
    #[error("viewable radius must be positive and finite, got {0}")]
    InvalidRadius(f64),
    #[error("lens angle must lie in (0, 180) degrees, got {0}")]
    InvalidLensAngle(f64),
    #[error("view direction must be finite, got {0}")]
    InvalidDirection(f64),
    #[error("segment angle must lie in (0, 45] degrees, got {0}")]
    InvalidSegmentAngle(f64),
}

/// One video frame's spatial footprint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FoV {
    position: Point,
    r: f64,
    theta: f64,
    delta: f64,
    t: u64,
}

impl FoV {
    /// Validates `r > 0` and `delta ∈ (0, 180)`; `theta` is wrapped into
    /// `[0, 360)`.
    pub fn new(position: Point, r: f64, theta: f64, delta: f64, t: u64) -> Result<Self, FovError> {
        if !position.is_finite() {
            return Err(FovError::InvalidDirection(f64::NAN));
        }
        if !(r.is_finite() && r > 0.0) {
            return Err(FovError::InvalidRadius(r));
        }
        if !theta.is_finite() {
            return Err(FovError::InvalidDirection(theta));
        }
        if !(delta.is_finite() && delta > 0.0 && delta < 180.0) {
            return Err(FovError::InvalidLensAngle(delta));
        }
        Ok(Self {
            position,
            r,
            theta: normalize_bearing(theta),
            delta,
            t,
        })
    }

    pub fn position(&self) -> Point {
        self.position
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn t(&self) -> u64 {
        self.t
    }
}

/// Which convex simplification of the sector to use.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ApproxMethod {
    /// Inscribed fan of `ceil(delta / segment_angle)` equal triangles.
    Mbs { segment_angle: f64 },
    /// Circumscribed triangle through the two sector rays.
    Mbt,
    /// Axis-aligned bounding rectangle of the exact sector.
    Mbr,
    /// Fine fan (0.5° segments); the ranking ground truth.
    Oracle,
}

impl ApproxMethod {
    pub const DEFAULT_SEGMENT_ANGLE: f64 = 5.0;
    pub const ORACLE_SEGMENT_ANGLE: f64 = 0.5;

    /// MBS with a validated segment angle in `(0, 45]` degrees.
    pub fn mbs(segment_angle: f64) -> Result<Self, FovError> {
        let m = ApproxMethod::Mbs { segment_angle };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<(), FovError> {
        if let ApproxMethod::Mbs { segment_angle } = *self {
            if !(segment_angle.is_finite() && segment_angle > 0.0 && segment_angle <= 45.0) {
                return Err(FovError::InvalidSegmentAngle(segment_angle));
            }
        }
        Ok(())
    }
}

impl Default for ApproxMethod {
    fn default() -> Self {
        ApproxMethod::Mbs {
            segment_angle: Self::DEFAULT_SEGMENT_ANGLE,
        }
    }
}

/// Exact sector membership: within range `r` of the apex and within
/// `delta/2` of the view direction. The apex itself is contained; boundary
/// comparisons are inclusive with no epsilon.
pub fn sector_contains(fov: &FoV, point: Point) -> bool {
    let d = point - fov.position;
    if d.x == 0.0 && d.y == 0.0 {
        return true;
    }
    if fov.position.distance(point) > fov.r {
        return false;
    }
    circular_difference(bearing(fov.position, point), fov.theta) <= fov.delta / 2.0
}

/// Convex polygon standing in for the sector under the given method.
pub fn view_polygon(fov: &FoV, method: ApproxMethod) -> ConvexPolygon {
    match method {
        ApproxMethod::Mbs { segment_angle } => fan_polygon(fov, segment_angle),
        ApproxMethod::Oracle => fan_polygon(fov, ApproxMethod::ORACLE_SEGMENT_ANGLE),
        ApproxMethod::Mbt => triangle_polygon(fov),
        ApproxMethod::Mbr => rectangle_polygon(fov),
    }
}

fn fan_polygon(fov: &FoV, segment_angle: f64) -> ConvexPolygon {
    debug_assert!(segment_angle > 0.0 && segment_angle <= 45.0);
    let k = ((fov.delta / segment_angle).ceil() as usize).max(1);
    let r = fov.r * (1.0 - FAN_SHRINK);
    let half = (fov.delta / 2.0) * (1.0 - FAN_SHRINK);
    let step = 2.0 * half / k as f64;
    let mut vertices = Vec::with_capacity(k + 2);
    vertices.push(fov.position);
    // Arc points from theta + half down to theta - half: counter-clockwise.
    for i in (0..=k).rev() {
        let b = fov.theta - half + step * i as f64;
        vertices.push(fov.position + dir(b) * r);
    }
    ConvexPolygon::new(vertices).expect("inscribed fan is convex")
}

fn triangle_polygon(fov: &FoV) -> ConvexPolygon {
    let half = fov.delta / 2.0;
    let l = fov.r / half.to_radians().cos();
    let vertices = vec![
        fov.position,
        fov.position + dir(fov.theta + half) * l,
        fov.position + dir(fov.theta - half) * l,
    ];
    ConvexPolygon::new(vertices).expect("bounding triangle is convex")
}

fn rectangle_polygon(fov: &FoV) -> ConvexPolygon {
    let (min, max) = sector_bounding_box(fov);
    let vertices = vec![
        Point::new(min.x, min.y),
        Point::new(max.x, min.y),
        Point::new(max.x, max.y),
        Point::new(min.x, max.y),
    ];
    ConvexPolygon::new(vertices).expect("bounding rectangle is convex")
}

/// Tight axis-aligned bounds of the exact sector: the apex, the two arc
/// endpoints, and any compass extreme (N/E/S/W) inside the angular span.
pub(crate) fn sector_bounding_box(fov: &FoV) -> (Point, Point) {
    let half = fov.delta / 2.0;
    let mut candidates = Vec::with_capacity(7);
    candidates.push(fov.position);
    candidates.push(fov.position + dir(fov.theta - half) * fov.r);
    candidates.push(fov.position + dir(fov.theta + half) * fov.r);
    for extreme in [0.0, 90.0, 180.0, 270.0] {
        if circular_difference(extreme, fov.theta) <= half {
            candidates.push(fov.position + dir(extreme) * fov.r);
        }
    }
    let mut min = candidates[0];
    let mut max = candidates[0];
    for c in &candidates[1..] {
        min.x = min.x.min(c.x);
        min.y = min.y.min(c.y);
        max.x = max.x.max(c.x);
        max.y = max.y.max(c.y);
    }
    (min, max)
}

/// A view polygon with the per-frame values the pair loop needs.
#[derive(Debug, Clone)]
pub(crate) struct PreparedFov {
    pub apex: Point,
    pub polygon: ConvexPolygon,
    pub area: f64,
    pub reach: f64,
}

pub(crate) fn prepare_fov(fov: &FoV, method: ApproxMethod) -> PreparedFov {
    let polygon = view_polygon(fov, method);
    let area = polygon.area();
    let reach = polygon
        .vertices()
        .iter()
        .map(|v| fov.position.distance(*v))
        .fold(0.0, f64::max);
    PreparedFov {
        apex: fov.position,
        polygon,
        area,
        reach,
    }
}

pub(crate) fn cvw_prepared(a: &PreparedFov, b: &PreparedFov, scratch: &mut ClipScratch) -> f64 {
    // Polygons are bounded by circles of radius `reach` around their apexes;
    // disjoint circles mean a zero intersection without any clipping.
    if a.apex.distance(b.apex) > a.reach + b.reach {
        return 0.0;
    }
    let inter = intersection_area(&a.polygon, &b.polygon, scratch);
    let union = a.area + b.area - inter;
    if union < UNION_AREA_FLOOR {
        return 0.0;
    }
    (inter / union).clamp(0.0, 1.0)
}

/// Common-view weight: IoU of the two approximated view regions, in
/// `[0, 1]`. Symmetric bit-for-bit and exactly 1 for identical views.
pub fn cvw(a: &FoV, b: &FoV, method: ApproxMethod) -> f64 {
    let pa = prepare_fov(a, method);
    let pb = prepare_fov(b, method);
    cvw_prepared(&pa, &pb, &mut ClipScratch::default())
}

#[derive(Debug, Error, PartialEq)]
pub enum GridError {
    #[error("grid of {cells} cells exceeds the {budget}-cell budget")]
    TooLarge { cells: u64, budget: u64 },
    #[error("cell size must be positive and finite, got {0}")]
    InvalidCell(f64),
}

/// Deterministic IoU estimate of the two *exact* sectors.
///
/// Rasterizes the joint bounding box at `cell` meters and classifies cell
/// centers with [`sector_contains`]. Disjoint per-sector bounding boxes
/// short-circuit to 0 before the cell budget is checked; otherwise a joint
/// box larger than [`GRID_CELL_BUDGET`] cells is rejected.
pub fn cvw_grid_oracle(a: &FoV, b: &FoV, cell: f64) -> Result<f64, GridError> {
    if !(cell.is_finite() && cell > 0.0) {
        return Err(GridError::InvalidCell(cell));
    }
    let (amin, amax) = sector_bounding_box(a);
    let (bmin, bmax) = sector_bounding_box(b);
    if amax.x < bmin.x || bmax.x < amin.x || amax.y < bmin.y || bmax.y < amin.y {
        return Ok(0.0);
    }
    let min = Point::new(amin.x.min(bmin.x), amin.y.min(bmin.y));
    let max = Point::new(amax.x.max(bmax.x), amax.y.max(bmax.y));
    let nx = ((max.x - min.x) / cell).ceil().max(1.0);
    let ny = ((max.y - min.y) / cell).ceil().max(1.0);
    if nx * ny > GRID_CELL_BUDGET as f64 {
        return Err(GridError::TooLarge {
            cells: (nx * ny) as u64,
            budget: GRID_CELL_BUDGET,
        });
    }
    let (nx, ny) = (nx as usize, ny as usize);
    let mut both = 0u64;
    let mut either = 0u64;
    for j in 0..ny {
        let y = min.y + (j as f64 + 0.5) * cell;
        for i in 0..nx {
            let center = Point::new(min.x + (i as f64 + 0.5) * cell, y);
            let in_a = sector_contains(a, center);
            let in_b = sector_contains(b, center);
            if in_a && in_b {
                both += 1;
            }
            if in_a || in_b {
                either += 1;
            }
        }
    }
    if either == 0 {
        return Ok(0.0);
    }
    Ok(both as f64 / either as f64)
}
