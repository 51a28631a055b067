//! Largest-common-view scoring between two FoV trajectories.
//!
//! The score accumulates common-view weights over frame pairs: when the last
//! frames of both prefixes share any view (weight > 0) and the prefix
//! lengths differ by at most `sigma`, the pair is matched and the recursion
//! drops both frames; otherwise it drops the one that yields the larger
//! score. Note the match branch is *forced*, not compared against the skip
//! branches: that is the defining recurrence, and it makes the score
//! sensitive to weak matches at the tail (see the unit tests).
//!
//! The production path is an `O(m·n)` dynamic program over prefix lengths; a
//! literal exponential transcription of the recursion survives as a test
//! oracle behind a size guard.

use serde::Serialize;
use thiserror::Error;

use crate::fov::{cvw_prepared, prepare_fov, ApproxMethod, FoV, PreparedFov};
use crate::geom::ClipScratch;

/// Frame cap per side for the exponential reference recursion.
pub const REFERENCE_FRAME_CAP: usize = 12;

/// Slack for the triangle-inequality audit.
const TRIANGLE_SLACK: f64 = 1e-9;

#[derive(Debug, Error, PartialEq)]
pub enum LcvsError {
    #[error("frame indices must be strictly increasing (video {id:?}, frame position {index})")]
    NonMonotonicFrames { id: String, index: usize },
    #[error("reference recursion is capped at {max} frames per video, got {m}x{n}")]
    InputTooLarge { m: usize, n: usize, max: usize },
    #[error("metric audit needs at least 3 videos, got {0}")]
    NotEnoughVideos(usize),
}

/// An identified, time-ordered sequence of fields of view.
#[derive(Debug, Clone, PartialEq)]
pub struct GeoVideo {
    id: String,
    fovs: Vec<FoV>,
}

impl GeoVideo {
    /// Frame indices must be strictly increasing.
    pub fn new(id: impl Into<String>, fovs: Vec<FoV>) -> Result<Self, LcvsError> {
        let id = id.into();
        for i in 1..fovs.len() {
            if fovs[i].t() <= fovs[i - 1].t() {
                return Err(LcvsError::NonMonotonicFrames { id, index: i });
            }
        }
        Ok(Self { id, fovs })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    pub fn fovs(&self) -> &[FoV] {
        &self.fovs
    }

    pub fn len(&self) -> usize {
        self.fovs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fovs.is_empty()
    }
}

/// Parameters for the common-view score.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcvsParams {
    /// Maximum index offset between matched prefix lengths.
    pub sigma: u32,
    pub method: ApproxMethod,
}

impl Default for LcvsParams {
    fn default() -> Self {
        Self {
            sigma: 1,
            method: ApproxMethod::default(),
        }
    }
}

/// All view polygons of one video, built once and reused across pairs.
#[derive(Debug, Clone)]
pub(crate) struct PreparedVideo {
    pub frames: Vec<PreparedFov>,
}

pub(crate) fn prepare_video(video: &GeoVideo, method: ApproxMethod) -> PreparedVideo {
    PreparedVideo {
        frames: video.fovs.iter().map(|f| prepare_fov(f, method)).collect(),
    }
}

fn within_sigma(i: usize, j: usize, sigma: u32) -> bool {
    (i as i64 - j as i64).unsigned_abs() <= sigma as u64
}

/// One recurrence cell: the forced match branch when the weight is positive
/// and the index offset allows it, the better skip branch otherwise.
fn dp_cell(weight: f64, diag: f64, up: f64, left: f64, matchable: bool) -> f64 {
    if weight > 0.0 && matchable {
        weight + diag
    } else {
        up.max(left)
    }
}

pub(crate) fn score_prepared(a: &PreparedVideo, b: &PreparedVideo, sigma: u32) -> f64 {
    let (m, n) = (a.frames.len(), b.frames.len());
    if m == 0 || n == 0 {
        return 0.0;
    }
    let mut scratch = ClipScratch::default();
    // Rolling rows over prefix lengths; weights are evaluated exactly m·n
    // times, streamed row by row.
    let mut prev = vec![0.0f64; n + 1];
    let mut cur = vec![0.0f64; n + 1];
    for i in 1..=m {
        cur[0] = 0.0;
        for j in 1..=n {
            let w = cvw_prepared(&a.frames[i - 1], &b.frames[j - 1], &mut scratch);
            cur[j] = dp_cell(
                w,
                prev[j - 1],
                prev[j],
                cur[j - 1],
                within_sigma(i, j, sigma),
            );
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Dynamic program over an explicit weight matrix (row-major `m`×`n`).
#[cfg(test)]
pub(crate) fn dp_from_weights(weights: &[f64], m: usize, n: usize, sigma: u32) -> f64 {
    assert_eq!(weights.len(), m * n);
    if m == 0 || n == 0 {
        return 0.0;
    }
    let mut prev = vec![0.0f64; n + 1];
    let mut cur = vec![0.0f64; n + 1];
    for i in 1..=m {
        cur[0] = 0.0;
        for j in 1..=n {
            let w = weights[(i - 1) * n + (j - 1)];
            cur[j] = dp_cell(
                w,
                prev[j - 1],
                prev[j],
                cur[j - 1],
                within_sigma(i, j, sigma),
            );
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[n]
}

/// Common-view score between two trajectories, in `[0, min(m, n)]`.
pub fn lcvs_score(a: &GeoVideo, b: &GeoVideo, params: &LcvsParams) -> f64 {
    let pa = prepare_video(a, params.method);
    let pb = prepare_video(b, params.method);
    score_prepared(&pa, &pb, params.sigma)
}

/// Literal recursive evaluation of the defining recurrence, with no
/// memoization of subproblems. Exponential; capped at
/// [`REFERENCE_FRAME_CAP`] frames per side. Weights are still cached per
/// frame pair so only the recursion itself is exponential.
pub fn lcvs_reference(a: &GeoVideo, b: &GeoVideo, params: &LcvsParams) -> Result<f64, LcvsError> {
    let (m, n) = (a.len(), b.len());
    if m > REFERENCE_FRAME_CAP || n > REFERENCE_FRAME_CAP {
        return Err(LcvsError::InputTooLarge {
            m,
            n,
            max: REFERENCE_FRAME_CAP,
        });
    }
    if m == 0 || n == 0 {
        return Ok(0.0);
    }
    let pa = prepare_video(a, params.method);
    let pb = prepare_video(b, params.method);
    let mut scratch = ClipScratch::default();
    let mut weights = vec![0.0f64; m * n];
    for i in 0..m {
        for j in 0..n {
            weights[i * n + j] = cvw_prepared(&pa.frames[i], &pb.frames[j], &mut scratch);
        }
    }
    Ok(reference_recursion(&weights, n, m, n, params.sigma))
}

fn reference_recursion(weights: &[f64], stride: usize, i: usize, j: usize, sigma: u32) -> f64 {
    if i == 0 || j == 0 {
        return 0.0;
    }
    let w = weights[(i - 1) * stride + (j - 1)];
    if w > 0.0 && within_sigma(i, j, sigma) {
        w + reference_recursion(weights, stride, i - 1, j - 1, sigma)
    } else {
        let drop_a = reference_recursion(weights, stride, i - 1, j, sigma);
        let drop_b = reference_recursion(weights, stride, i, j - 1, sigma);
        drop_a.max(drop_b)
    }
}

/// Score normalized by the shorter length, in `[0, 1]`.
///
/// The quotient is undefined for empty inputs; similarity is defined as 0
/// (and distance as 1) when either video is empty, including both.
pub fn lcvs_similarity(a: &GeoVideo, b: &GeoVideo, params: &LcvsParams) -> f64 {
    let shorter = a.len().min(b.len());
    if shorter == 0 {
        return 0.0;
    }
    lcvs_score(a, b, params) / shorter as f64
}

/// `1 - similarity`, in `[0, 1]`.
pub fn lcvs_distance(a: &GeoVideo, b: &GeoVideo, params: &LcvsParams) -> f64 {
    1.0 - lcvs_similarity(a, b, params)
}

pub(crate) fn similarity_prepared(a: &PreparedVideo, b: &PreparedVideo, sigma: u32) -> f64 {
    let shorter = a.frames.len().min(b.frames.len());
    if shorter == 0 {
        return 0.0;
    }
    score_prepared(a, b, sigma) / shorter as f64
}

pub(crate) fn distance_prepared(a: &PreparedVideo, b: &PreparedVideo, sigma: u32) -> f64 {
    1.0 - similarity_prepared(a, b, sigma)
}

/// A triple where `d(a,b) + d(b,c) < d(a,c) - slack`.
#[derive(Debug, Clone, Serialize)]
pub struct TriangleViolation {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d_ab: f64,
    pub d_bc: f64,
    pub d_ac: f64,
    /// How far the inequality fails: `d_ac - (d_ab + d_bc)`.
    pub deficit: f64,
}

/// Outcome of auditing the distance for the three metric properties.
///
/// Non-negativity and symmetry are hard expectations; the triangle
/// inequality is *reported*, not asserted, because the normalization by the
/// shorter length does not obviously preserve it.
#[derive(Debug, Clone, Serialize)]
pub struct MetricAuditReport {
    pub video_count: usize,
    /// Ordered pairs (i ≠ j) checked for non-negativity and symmetry.
    pub pair_checks: usize,
    /// Ordered distinct triples checked against the triangle inequality.
    pub triple_checks: usize,
    pub nonnegativity_violations: usize,
    pub symmetry_violations: usize,
    pub triangle_violations: usize,
    pub triangle_examples: Vec<TriangleViolation>,
}

/// Audits all pairs and ordered triples of the given videos.
///
/// Both orders of every pair are computed independently so the symmetry
/// check is a real comparison, not a mirror copy.
pub fn metric_audit(
    videos: &[GeoVideo],
    params: &LcvsParams,
) -> Result<MetricAuditReport, LcvsError> {
    let n = videos.len();
    if n < 3 {
        return Err(LcvsError::NotEnoughVideos(n));
    }
    let prepared: Vec<PreparedVideo> = videos
        .iter()
        .map(|v| prepare_video(v, params.method))
        .collect();
    let mut dist = vec![0.0f64; n * n];
    for i in 0..n {
        for j in 0..n {
            if i != j {
                dist[i * n + j] = distance_prepared(&prepared[i], &prepared[j], params.sigma);
            }
        }
    }

    let mut nonnegativity_violations = 0;
    let mut symmetry_violations = 0;
    let mut pair_checks = 0;
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            pair_checks += 1;
            if dist[i * n + j] < 0.0 {
                nonnegativity_violations += 1;
            }
            if dist[i * n + j].to_bits() != dist[j * n + i].to_bits() {
                symmetry_violations += 1;
            }
        }
    }

    let mut triangle_violations = 0;
    let mut triangle_examples = Vec::new();
    let mut triple_checks = 0;
    for i in 0..n {
        for j in 0..n {
            if j == i {
                continue;
            }
            for k in 0..n {
                if k == i || k == j {
                    continue;
                }
                triple_checks += 1;
                let d_ab = dist[i * n + j];
                let d_bc = dist[j * n + k];
                let d_ac = dist[i * n + k];
                if d_ab + d_bc < d_ac - TRIANGLE_SLACK {
                    triangle_violations += 1;
                    triangle_examples.push(TriangleViolation {
                        a: videos[i].id().to_string(),
                        b: videos[j].id().to_string(),
                        c: videos[k].id().to_string(),
                        d_ab,
                        d_bc,
                        d_ac,
                        deficit: d_ac - (d_ab + d_bc),
                    });
                }
            }
        }
    }

    Ok(MetricAuditReport {
        video_count: n,
        pair_checks,
        triple_checks,
        nonnegativity_violations,
        symmetry_violations,
        triangle_violations,
        triangle_examples,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geom::Point;
    use crate::rng::SplitMix64;

    fn fov(x: f64, y: f64, theta: f64, t: u64) -> FoV {
        FoV::new(Point::new(x, y), 10.0, theta, 60.0, t).unwrap()
    }

    fn video(id: &str, fovs: Vec<FoV>) -> GeoVideo {
        GeoVideo::new(id, fovs).unwrap()
    }

    fn random_video(rng: &mut SplitMix64, id: &str, frames: usize, extent: f64) -> GeoVideo {
        let fovs = (0..frames)
            .map(|t| {
                FoV::new(
                    Point::new(rng.uniform(0.0, extent), rng.uniform(0.0, extent)),
                    rng.uniform(5.0, 25.0),
                    rng.uniform(0.0, 360.0),
                    rng.uniform(30.0, 150.0),
                    t as u64,
                )
                .unwrap()
            })
            .collect();
        GeoVideo::new(id, fovs).unwrap()
    }

    #[test]
    fn frame_indices_must_increase() {
        let err = GeoVideo::new("x", vec![fov(0.0, 0.0, 0.0, 2), fov(1.0, 0.0, 0.0, 2)]);
        assert!(matches!(err, Err(LcvsError::NonMonotonicFrames { .. })));
    }

    #[test]
    fn empty_inputs_score_zero() {
        let e = video("e", vec![]);
        let v = video("v", vec![fov(0.0, 0.0, 0.0, 0)]);
        let p = LcvsParams::default();
        assert_eq!(lcvs_score(&e, &v, &p), 0.0);
        assert_eq!(lcvs_score(&v, &e, &p), 0.0);
        assert_eq!(lcvs_score(&e, &e, &p), 0.0);
    }

    #[test]
    fn identical_video_scores_its_length() {
        let v = video(
            "v",
            (0..5).map(|t| fov(t as f64 * 3.0, 0.0, 90.0, t)).collect(),
        );
        let p = LcvsParams::default();
        assert_eq!(lcvs_score(&v, &v, &p), 5.0);
        assert_eq!(lcvs_similarity(&v, &v, &p), 1.0);
        assert_eq!(lcvs_distance(&v, &v, &p), 0.0);
    }

    #[test]
    fn two_by_two_diagonal_matrix() {
        // Weight matrix [[0.5, 0], [0, 0.5]] with sigma 1: both diagonal
        // pairs match, score 1.0 exactly.
        let w = [0.5, 0.0, 0.0, 0.5];
        assert_eq!(dp_from_weights(&w, 2, 2, 1), 1.0);
    }

    #[test]
    fn forced_match_is_not_monotone_in_sigma() {
        // Weights: w(1,1)=1, w(2,2)=1, w(3,2)=eps, rest 0. With sigma 0 the
        // final cell may skip to the strong diagonal (score 2); sigma 1
        // forces the weak (3,2) match and the score drops to 1+eps. The
        // forced match branch makes the score non-monotone in sigma.
        let eps = 0.125;
        let w = [1.0, 0.0, 0.0, 1.0, 0.0, eps];
        let tight = dp_from_weights(&w, 3, 2, 0);
        let loose = dp_from_weights(&w, 3, 2, 1);
        assert_eq!(tight, 2.0);
        assert_eq!(loose, 1.0 + eps);
        assert!(loose < tight);
    }

    #[test]
    fn zero_one_weights_are_monotone_in_sigma() {
        // With 0/1 weights the recurrence computes the classic constrained
        // longest common subsequence, and widening the offset window never
        // hurts. Exercise densely over small random 0/1 matrices.
        let mut rng = SplitMix64::new(0xC0FFEE);
        for _ in 0..500 {
            let m = 1 + (rng.next_u64() % 6) as usize;
            let n = 1 + (rng.next_u64() % 6) as usize;
            let w: Vec<f64> = (0..m * n)
                .map(|_| if rng.next_f64() < 0.4 { 1.0 } else { 0.0 })
                .collect();
            let mut last = 0.0;
            for sigma in 0..4 {
                let s = dp_from_weights(&w, m, n, sigma);
                assert!(
                    s >= last,
                    "sigma {sigma} dropped the score: {s} < {last} (w = {w:?}, {m}x{n})"
                );
                last = s;
            }
        }
    }

    #[test]
    fn reference_matches_dp_on_random_pairs() {
        let mut rng = SplitMix64::new(99);
        let p = LcvsParams {
            sigma: 1,
            method: ApproxMethod::Mbt,
        };
        for _ in 0..20 {
            let a = random_video(&mut rng, "a", 5, 40.0);
            let b = random_video(&mut rng, "b", 5, 40.0);
            let fast = lcvs_score(&a, &b, &p);
            let slow = lcvs_reference(&a, &b, &p).unwrap();
            assert!((fast - slow).abs() <= 1e-9, "{fast} vs {slow}");
        }
    }

    #[test]
    fn reference_guards_input_size() {
        let v = video("big", (0..13).map(|t| fov(t as f64, 0.0, 0.0, t)).collect());
        let err = lcvs_reference(&v, &v, &LcvsParams::default());
        assert!(matches!(err, Err(LcvsError::InputTooLarge { .. })));
    }

    #[test]
    fn reference_empty_inputs() {
        let e = video("e", vec![]);
        assert_eq!(lcvs_reference(&e, &e, &LcvsParams::default()).unwrap(), 0.0);
    }

    #[test]
    fn score_bounded_by_shorter_video() {
        let mut rng = SplitMix64::new(5);
        let p = LcvsParams {
            sigma: 2,
            method: ApproxMethod::Mbr,
        };
        for _ in 0..20 {
            let m = 1 + (rng.next_u64() % 8) as usize;
            let n = 1 + (rng.next_u64() % 8) as usize;
            let a = random_video(&mut rng, "a", m, 30.0);
            let b = random_video(&mut rng, "b", n, 30.0);
            let s = lcvs_score(&a, &b, &p);
            assert!(s <= m.min(n) as f64);
            assert!(s >= 0.0);
        }
    }

    #[test]
    fn distance_symmetry_is_bitwise() {
        let mut rng = SplitMix64::new(17);
        let p = LcvsParams::default();
        for _ in 0..10 {
            let a = random_video(&mut rng, "a", 6, 30.0);
            let b = random_video(&mut rng, "b", 4, 30.0);
            let ab = lcvs_distance(&a, &b, &p);
            let ba = lcvs_distance(&b, &a, &p);
            assert_eq!(ab.to_bits(), ba.to_bits());
        }
    }

    #[test]
    fn empty_video_distance_convention() {
        let e = video("e", vec![]);
        let v = video("v", vec![fov(0.0, 0.0, 0.0, 0)]);
        let p = LcvsParams::default();
        assert_eq!(lcvs_similarity(&e, &v, &p), 0.0);
        assert_eq!(lcvs_distance(&e, &v, &p), 1.0);
        assert_eq!(lcvs_distance(&e, &e, &p), 1.0);
    }

    #[test]
    fn fully_disjoint_views_have_distance_one() {
        let a = video("a", vec![fov(0.0, 0.0, 0.0, 0), fov(0.0, 3.0, 0.0, 1)]);
        let b = video("b", vec![fov(500.0, 0.0, 0.0, 0), fov(500.0, 3.0, 0.0, 1)]);
        assert_eq!(lcvs_distance(&a, &b, &LcvsParams::default()), 1.0);
    }

    #[test]
    fn similarity_normalizes_partial_overlap() {
        // Co-apex frames with radii 5 and 10 overlap with weight 1/4; two
        // such diagonal pairs far from each other give score ~0.5 over two
        // frames, so similarity ~0.25 and distance ~0.75.
        let narrow = |x: f64, t: u64| {
            FoV::new(Point::new(x, 0.0), 5.0, 40.0, 60.0, t).unwrap()
        };
        let wide = |x: f64, t: u64| {
            FoV::new(Point::new(x, 0.0), 10.0, 40.0, 60.0, t).unwrap()
        };
        let a = video("a", vec![narrow(0.0, 0), narrow(200.0, 1)]);
        let b = video("b", vec![wide(0.0, 0), wide(200.0, 1)]);
        let p = LcvsParams {
            sigma: 1,
            method: ApproxMethod::Oracle,
        };
        let sim = lcvs_similarity(&a, &b, &p);
        assert!((sim - 0.25).abs() < 1e-3, "similarity {sim}");
        assert!((lcvs_distance(&a, &b, &p) - 0.75).abs() < 1e-3);
    }

    #[test]
    fn audit_identical_videos_has_no_violations() {
        let v = video(
            "v",
            (0..4).map(|t| fov(t as f64 * 2.0, 1.0, 45.0, t)).collect(),
        );
        let videos = vec![v.clone(), v.clone(), v];
        let report = metric_audit(&videos, &LcvsParams::default()).unwrap();
        assert_eq!(report.nonnegativity_violations, 0);
        assert_eq!(report.symmetry_violations, 0);
        assert_eq!(report.triangle_violations, 0);
        assert_eq!(report.pair_checks, 6);
        assert_eq!(report.triple_checks, 6);
    }

    #[test]
    fn audit_random_videos_reports() {
        let mut rng = SplitMix64::new(31);
        let videos: Vec<GeoVideo> = (0..5)
            .map(|i| random_video(&mut rng, &format!("v{i}"), 4, 25.0))
            .collect();
        let report = metric_audit(&videos, &LcvsParams::default()).unwrap();
        assert_eq!(report.nonnegativity_violations, 0);
        assert_eq!(report.symmetry_violations, 0);
        assert_eq!(report.triangle_violations, report.triangle_examples.len());
        assert_eq!(report.triple_checks, 5 * 4 * 3);
    }

    #[test]
    fn audit_requires_three_videos() {
        let v = video("v", vec![fov(0.0, 0.0, 0.0, 0)]);
        let err = metric_audit(&[v.clone(), v], &LcvsParams::default());
        assert!(matches!(err, Err(LcvsError::NotEnoughVideos(2))));
    }
}
