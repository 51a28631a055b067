//! Shared fixtures for the criterion benchmarks.

use lcvs_core::{synthesize, DirectionMode, FoV, GeoVideo, Point, SynthConfig};

/// A deterministic random-direction dataset at the given scale.
pub fn bench_dataset(n_videos: usize, frames_per_video: usize, r: f64) -> Vec<GeoVideo> {
    synthesize(&SynthConfig {
        n_videos,
        frames_per_video,
        r,
        direction_mode: DirectionMode::Random,
        extent: 300.0,
        seed: 1,
        ..SynthConfig::default()
    })
    .expect("valid benchmark config")
}

/// A pair of overlapping views, the worst case for the clipping loop.
pub fn overlapping_pair() -> (FoV, FoV) {
    let a = FoV::new(Point::new(0.0, 0.0), 30.0, 40.0, 60.0, 0).expect("valid fov");
    let b = FoV::new(Point::new(8.0, 5.0), 30.0, 80.0, 60.0, 0).expect("valid fov");
    (a, b)
}
