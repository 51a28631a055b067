//! Comparison methods that look only at camera positions: point-threshold
//! LCSS and the symmetric Hausdorff distance. Both ignore view direction and
//! lens angle by construction.

use thiserror::Error;

use crate::geom::Point;
use crate::lcvs::GeoVideo;

#[derive(Debug, Error, PartialEq)]
pub enum BaselineError {
    #[error("hausdorff distance needs two nonempty videos")]
    EmptyInput,
}

/// Parameters for the point-threshold LCSS baseline.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcssParams {
    /// Spatial matching threshold in meters.
    pub epsilon: f64,
    /// Maximum index offset between matched prefix lengths.
    pub sigma: u32,
}

impl Default for LcssParams {
    fn default() -> Self {
        Self {
            epsilon: 10.0,
            sigma: 1,
        }
    }
}

fn within_sigma(i: usize, j: usize, sigma: u32) -> bool {
    (i as i64 - j as i64).unsigned_abs() <= sigma as u64
}

pub(crate) fn positions(video: &GeoVideo) -> Vec<Point> {
    video.fovs().iter().map(|f| f.position()).collect()
}

pub(crate) fn lcss_score_points(a: &[Point], b: &[Point], params: &LcssParams) -> usize {
    let (m, n) = (a.len(), b.len());
    if m == 0 || n == 0 {
        return 0;
    }
    let mut prev = vec![0usize; n + 1];
    let mut cur = vec![0usize; n + 1];
    for i in 1..=m {
        cur[0] = 0;
        for j in 1..=n {
            let matched = a[i - 1].distance(b[j - 1]) <= params.epsilon;
            cur[j] = if matched && within_sigma(i, j, params.sigma) {
                1 + prev[j - 1]
            } else {
                prev[j].max(cur[j - 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Count of matched frame pairs: two frames match when their positions are
/// within `epsilon` meters and the prefix lengths differ by at most `sigma`.
pub fn lcss_score(a: &GeoVideo, b: &GeoVideo, params: &LcssParams) -> usize {
    lcss_score_points(&positions(a), &positions(b), params)
}

/// `1 - score / min(m, n)`, mirroring the common-view normalization so
/// accuracy comparisons are like-for-like. Empty inputs have distance 1.
pub fn lcss_distance(a: &GeoVideo, b: &GeoVideo, params: &LcssParams) -> f64 {
    let shorter = a.len().min(b.len());
    if shorter == 0 {
        return 1.0;
    }
    1.0 - lcss_score(a, b, params) as f64 / shorter as f64
}

pub(crate) fn lcss_distance_points(a: &[Point], b: &[Point], params: &LcssParams) -> f64 {
    let shorter = a.len().min(b.len());
    if shorter == 0 {
        return 1.0;
    }
    1.0 - lcss_score_points(a, b, params) as f64 / shorter as f64
}

fn directed_hausdorff(from: &[Point], to: &[Point]) -> f64 {
    from.iter()
        .map(|p| {
            to.iter()
                .map(|q| p.distance(*q))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

pub(crate) fn hausdorff_points(a: &[Point], b: &[Point]) -> Result<f64, BaselineError> {
    if a.is_empty() || b.is_empty() {
        return Err(BaselineError::EmptyInput);
    }
    Ok(directed_hausdorff(a, b).max(directed_hausdorff(b, a)))
}

/// Symmetric Hausdorff distance over the two position point sets, in meters.
pub fn hausdorff_distance(a: &GeoVideo, b: &GeoVideo) -> Result<f64, BaselineError> {
    hausdorff_points(&positions(a), &positions(b))
}
