//! Dataset plumbing: GPS ingestion, local planar projection, heading
//! derivation, synthetic trajectory generation, and trajectory persistence.
//!
//! All downstream geometry works in meters in a local equirectangular frame
//! about a dataset centroid; datasets span a few kilometers at most, where
//! that projection is accurate to well under a millimeter.

use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::fov::{dir, normalize_bearing, FoV, FovError};
use crate::geom::Point;
use crate::lcvs::{GeoVideo, LcvsError};
use crate::rng::SplitMix64;

pub const METERS_PER_DEGREE_LAT: f64 = 110_540.0;
pub const METERS_PER_DEGREE_LON_EQUATOR: f64 = 111_320.0;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("schema error: {0}")]
    Schema(String),
    #[error("file contains no samples")]
    EmptyFile,
    #[error("degenerate step: consecutive points coincide")]
    DegenerateStep,
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error("invalid field of view: {0}")]
    Fov(#[from] FovError),
    #[error("invalid video: {0}")]
    Video(#[from] LcvsError),
}

/// One raw GPS fix before projection.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GeoSample {
    pub t_epoch: f64,
    pub lat: f64,
    pub lon: f64,
    /// Compass course in degrees clockwise from north, when the device
    /// reported one.
    pub course: Option<f64>,
}

/// Local equirectangular projection about a dataset centroid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProjectionContext {
    pub lat0: f64,
    pub lon0: f64,
}

impl ProjectionContext {
    pub fn new(lat0: f64, lon0: f64) -> Self {
        Self { lat0, lon0 }
    }

    /// Centroid of the samples (plain means of latitude and longitude).
    pub fn for_samples(samples: &[GeoSample]) -> Self {
        let n = samples.len().max(1) as f64;
        let lat0 = samples.iter().map(|s| s.lat).sum::<f64>() / n;
        let lon0 = samples.iter().map(|s| s.lon).sum::<f64>() / n;
        Self { lat0, lon0 }
    }

    pub fn project(&self, lat: f64, lon: f64) -> Point {
        let x = (lon - self.lon0) * self.lat0.to_radians().cos() * METERS_PER_DEGREE_LON_EQUATOR;
        let y = (lat - self.lat0) * METERS_PER_DEGREE_LAT;
        Point::new(x, y)
    }

    pub fn unproject(&self, p: Point) -> (f64, f64) {
        let lat = self.lat0 + p.y / METERS_PER_DEGREE_LAT;
        let lon = self.lon0 + p.x / (self.lat0.to_radians().cos() * METERS_PER_DEGREE_LON_EQUATOR);
        (lat, lon)
    }
}

/// Projects samples to local planar meters.
pub fn project(samples: &[GeoSample], ctx: &ProjectionContext) -> Vec<Point> {
    samples.iter().map(|s| ctx.project(s.lat, s.lon)).collect()
}

/// Compass bearing of the displacement `prev → next`.
pub fn derive_heading(prev: Point, next: Point) -> Result<f64, DatasetError> {
    let d = next - prev;
    if d.x == 0.0 && d.y == 0.0 {
        return Err(DatasetError::DegenerateStep);
    }
    Ok(normalize_bearing(d.x.atan2(d.y).to_degrees()))
}

/// Per-frame headings from projected points, used when no course is
/// recorded. Frame `i` takes the bearing of the step arriving at it; a
/// degenerate step reuses the previous heading, and the first frame copies
/// the first derivable heading. A single-point (or fully stationary)
/// trajectory defaults to north.
fn derive_headings(points: &[Point]) -> Vec<f64> {
    let n = points.len();
    let mut headings: Vec<Option<f64>> = vec![None; n];
    for i in 1..n {
        headings[i] = derive_heading(points[i - 1], points[i]).ok();
    }
    let mut last: Option<f64> = None;
    for h in headings.iter_mut() {
        match *h {
            Some(v) => last = Some(v),
            None => *h = last,
        }
    }
    let first_known = headings.iter().flatten().next().copied().unwrap_or(0.0);
    headings
        .into_iter()
        .map(|h| h.unwrap_or(first_known))
        .collect()
}

fn video_from_samples(
    id: &str,
    samples: &[GeoSample],
    ctx: &ProjectionContext,
    r: f64,
    delta: f64,
) -> Result<GeoVideo, DatasetError> {
    let points = project(samples, ctx);
    let derived = derive_headings(&points);
    let mut fovs = Vec::with_capacity(samples.len());
    for (i, sample) in samples.iter().enumerate() {
        let theta = match sample.course {
            Some(c) => normalize_bearing(c),
            None => derived[i],
        };
        fovs.push(FoV::new(points[i], r, theta, delta, i as u64)?);
    }
    Ok(GeoVideo::new(id, fovs)?)
}

fn file_stem(path: &Path) -> String {
    path.file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "video".to_string())
}

/// Reads a GPS CSV with header exactly `t,lat,lon` or `t,lat,lon,course`,
/// rows sorted by strictly increasing `t`. Returns the trajectory (frame
/// index = row ordinal) and the projection used for it.
pub fn ingest_csv(
    path: &Path,
    r: f64,
    delta: f64,
) -> Result<(GeoVideo, ProjectionContext), DatasetError> {
    let file = File::open(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .from_reader(BufReader::new(file));

    let headers = reader
        .headers()
        .map_err(|e| DatasetError::Parse {
            line: 1,
            message: e.to_string(),
        })?
        .clone();
    let fields: Vec<&str> = headers.iter().collect();
    let has_course = match fields.as_slice() {
        ["t", "lat", "lon"] => false,
        ["t", "lat", "lon", "course"] => true,
        other => {
            return Err(DatasetError::Parse {
                line: 1,
                message: format!(
                    "expected header t,lat,lon[,course], got {}",
                    other.join(",")
                ),
            })
        }
    };

    let mut samples: Vec<GeoSample> = Vec::new();
    for (idx, record) in reader.records().enumerate() {
        let line = idx + 2;
        let record = record.map_err(|e| DatasetError::Parse {
            line,
            message: e.to_string(),
        })?;
        let parse_field = |pos: usize, name: &str| -> Result<f64, DatasetError> {
            record
                .get(pos)
                .ok_or_else(|| DatasetError::Parse {
                    line,
                    message: format!("missing {name} column"),
                })?
                .parse::<f64>()
                .map_err(|e| DatasetError::Parse {
                    line,
                    message: format!("bad {name} value: {e}"),
                })
        };
        let t_epoch = parse_field(0, "t")?;
        let lat = parse_field(1, "lat")?;
        let lon = parse_field(2, "lon")?;
        if !(-90.0..=90.0).contains(&lat) {
            return Err(DatasetError::Parse {
                line,
                message: format!("latitude {lat} out of range"),
            });
        }
        if !(-180.0..=180.0).contains(&lon) {
            return Err(DatasetError::Parse {
                line,
                message: format!("longitude {lon} out of range"),
            });
        }
        let course = if has_course {
            Some(parse_field(3, "course")?)
        } else {
            None
        };
        if let Some(prev) = samples.last() {
            if t_epoch <= prev.t_epoch {
                return Err(DatasetError::Parse {
                    line,
                    message: "rows are not time-sorted".to_string(),
                });
            }
        }
        samples.push(GeoSample {
            t_epoch,
            lat,
            lon,
            course,
        });
    }
    if samples.is_empty() {
        return Err(DatasetError::EmptyFile);
    }
    let ctx = ProjectionContext::for_samples(&samples);
    let video = video_from_samples(&file_stem(path), &samples, &ctx, r, delta)?;
    Ok((video, ctx))
}

#[derive(Deserialize)]
struct BddInfo {
    locations: Vec<BddLocation>,
}

#[derive(Deserialize)]
struct BddLocation {
    latitude: f64,
    longitude: f64,
    timestamp: f64,
    #[serde(default)]
    course: Option<f64>,
}

/// Best-effort adapter for a BDD100K per-video info JSON file. Locations are
/// sorted by timestamp; a negative or missing course falls back to the
/// derived heading; unknown fields are ignored.
pub fn ingest_bdd100k_info(
    path: &Path,
    r: f64,
    delta: f64,
) -> Result<(GeoVideo, ProjectionContext), DatasetError> {
    let file = File::open(path)?;
    let info: BddInfo = serde_json::from_reader(BufReader::new(file))
        .map_err(|e| DatasetError::Schema(e.to_string()))?;
    if info.locations.is_empty() {
        return Err(DatasetError::EmptyFile);
    }
    let mut locations = info.locations;
    locations.sort_by(|a, b| a.timestamp.total_cmp(&b.timestamp));
    let samples: Vec<GeoSample> = locations
        .iter()
        .map(|l| GeoSample {
            t_epoch: l.timestamp,
            lat: l.latitude,
            lon: l.longitude,
            course: l.course.filter(|c| *c >= 0.0),
        })
        .collect();
    let ctx = ProjectionContext::for_samples(&samples);
    let video = video_from_samples(&file_stem(path), &samples, &ctx, r, delta)?;
    Ok((video, ctx))
}

/// Camera direction model for synthetic trajectories.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DirectionMode {
    /// Camera aligned with the direction of motion (dash-cam style).
    Straight,
    /// Camera direction drawn uniformly per frame (hand-held style).
    Random,
}

impl DirectionMode {
    pub fn as_str(&self) -> &'static str {
        match self {
            DirectionMode::Straight => "straight",
            DirectionMode::Random => "random",
        }
    }
}

impl std::str::FromStr for DirectionMode {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "straight" => Ok(DirectionMode::Straight),
            "random" => Ok(DirectionMode::Random),
            other => Err(format!("unknown direction mode {other:?}")),
        }
    }
}

impl std::fmt::Display for DirectionMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Configuration for the synthetic random-walk dataset generator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SynthConfig {
    pub n_videos: usize,
    pub frames_per_video: usize,
    /// Viewable radius in meters.
    pub r: f64,
    /// Full lens angle in degrees.
    pub delta: f64,
    pub direction_mode: DirectionMode,
    /// Side of the square start-position region, meters.
    pub extent: f64,
    /// Walk step per frame, meters.
    pub step: f64,
    /// Uniform half-width of the per-step heading perturbation, degrees.
    pub heading_jitter: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            n_videos: 40,
            frames_per_video: 25,
            r: 30.0,
            delta: 60.0,
            direction_mode: DirectionMode::Straight,
            extent: 300.0,
            step: 5.0,
            heading_jitter: 5.0,
            seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.n_videos < 1 || self.frames_per_video < 1 {
            return Err(DatasetError::InvalidConfig(
                "video and frame counts must be at least 1".to_string(),
            ));
        }
        if !(self.r.is_finite() && self.r > 0.0) {
            return Err(DatasetError::InvalidConfig(format!(
                "viewable radius must be positive, got {}",
                self.r
            )));
        }
        if !(self.delta.is_finite() && self.delta > 0.0 && self.delta < 180.0) {
            return Err(DatasetError::InvalidConfig(format!(
                "lens angle must lie in (0, 180), got {}",
                self.delta
            )));
        }
        if !(self.extent.is_finite() && self.extent > 0.0) {
            return Err(DatasetError::InvalidConfig(format!(
                "extent must be positive, got {}",
                self.extent
            )));
        }
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(DatasetError::InvalidConfig(format!(
                "step must be positive, got {}",
                self.step
            )));
        }
        if !(self.heading_jitter.is_finite() && self.heading_jitter >= 0.0) {
            return Err(DatasetError::InvalidConfig(format!(
                "heading jitter must be non-negative, got {}",
                self.heading_jitter
            )));
        }
        Ok(())
    }
}

/// Generates `n_videos` random walks, each `frames_per_video` frames long.
///
/// Walks start uniformly inside the extent square with a uniform initial
/// heading; every step advances `step` meters along the walk heading, which
/// is then perturbed by a uniform draw in `±heading_jitter`. In straight
/// mode the camera points along the walk heading of the step leaving the
/// frame; in random mode it is drawn uniformly per frame. All randomness
/// comes from one SplitMix64 stream seeded with `seed`, so output is
/// reproducible bit-for-bit.
pub fn synthesize(cfg: &SynthConfig) -> Result<Vec<GeoVideo>, DatasetError> {
    cfg.validate()?;
    let mut rng = SplitMix64::new(cfg.seed);
    let mut videos = Vec::with_capacity(cfg.n_videos);
    for v in 0..cfg.n_videos {
        let mut pos = Point::new(rng.uniform(0.0, cfg.extent), rng.uniform(0.0, cfg.extent));
        let mut walk_heading = rng.uniform(0.0, 360.0);
        let mut fovs = Vec::with_capacity(cfg.frames_per_video);
        for frame in 0..cfg.frames_per_video {
            let theta = match cfg.direction_mode {
                DirectionMode::Straight => walk_heading,
                DirectionMode::Random => rng.uniform(0.0, 360.0),
            };
            fovs.push(FoV::new(pos, cfg.r, theta, cfg.delta, frame as u64)?);
            if frame + 1 < cfg.frames_per_video {
                pos = pos + dir(walk_heading) * cfg.step;
                walk_heading = normalize_bearing(
                    walk_heading + rng.uniform(-cfg.heading_jitter, cfg.heading_jitter),
                );
            }
        }
        videos.push(GeoVideo::new(format!("v{v:04}"), fovs)?);
    }
    Ok(videos)
}

#[derive(Serialize, Deserialize)]
struct TrajectoryFile {
    #[serde(skip_serializing_if = "Option::is_none", default)]
    projection: Option<ProjectionContext>,
    videos: Vec<VideoRecord>,
}

#[derive(Serialize, Deserialize)]
struct VideoRecord {
    id: String,
    frames: Vec<FrameRecord>,
}

#[derive(Serialize, Deserialize)]
struct FrameRecord {
    t: u64,
    x: f64,
    y: f64,
    theta: f64,
    r: f64,
    delta: f64,
}

/// Writes trajectories as JSON:
/// `{"videos":[{"id":...,"frames":[{"t","x","y","theta","r","delta"}]}]}`,
/// with an optional sibling `"projection":{"lat0","lon0"}` header when the
/// data came from GPS.
pub fn save_trajectories(
    path: &Path,
    videos: &[GeoVideo],
    projection: Option<&ProjectionContext>,
) -> Result<(), DatasetError> {
    let record = TrajectoryFile {
        projection: projection.copied(),
        videos: videos
            .iter()
            .map(|v| VideoRecord {
                id: v.id().to_string(),
                frames: v
                    .fovs()
                    .iter()
                    .map(|f| FrameRecord {
                        t: f.t(),
                        x: f.position().x,
                        y: f.position().y,
                        theta: f.theta(),
                        r: f.r(),
                        delta: f.delta(),
                    })
                    .collect(),
            })
            .collect(),
    };
    let file = File::create(path)?;
    let mut writer = BufWriter::new(file);
    serde_json::to_writer_pretty(&mut writer, &record)
        .map_err(|e| DatasetError::Schema(e.to_string()))?;
    writer.write_all(b"\n")?;
    writer.flush()?;
    Ok(())
}

/// Reads a trajectory JSON file written by [`save_trajectories`].
pub fn load_trajectories(
    path: &Path,
) -> Result<(Vec<GeoVideo>, Option<ProjectionContext>), DatasetError> {
    let file = File::open(path)?;
    let record: TrajectoryFile = serde_json::from_reader(BufReader::new(file)).map_err(|e| {
        if e.is_syntax() || e.is_eof() {
            DatasetError::Parse {
                line: e.line(),
                message: e.to_string(),
            }
        } else {
            DatasetError::Schema(e.to_string())
        }
    })?;
    let mut videos = Vec::with_capacity(record.videos.len());
    for v in record.videos {
        let mut fovs = Vec::with_capacity(v.frames.len());
        for f in v.frames {
            fovs.push(FoV::new(Point::new(f.x, f.y), f.r, f.theta, f.delta, f.t)?);
        }
        videos.push(GeoVideo::new(v.id, fovs)?);
    }
    Ok((videos, record.projection))
}
