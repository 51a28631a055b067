//! Field-of-view trajectory similarity for geo-tagged videos.
//!
//! A geo-tagged video is reduced to a trajectory of camera fields of view:
//! position, viewable radius, compass direction, and lens angle per frame.
//! Two trajectories are compared by accumulating the view overlap
//! (intersection over union of the visible regions) of temporally aligned
//! frames. The visible region is a circular sector approximated by a convex
//! polygon at one of several fidelity/cost trade-offs:
//!
//! - `MBS`: inscribed fan of equal triangles (near-exact, slowest),
//! - `MBT`: one circumscribed triangle,
//! - `MBR`: axis-aligned bounding rectangle (coarsest, fastest),
//! - `Oracle`: a 0.5 degree fan, used as ranking ground truth.
//!
//! Position-only baselines (threshold LCSS and Hausdorff), synthetic dataset
//! generation, GPS ingestion, distance matrices, k-NN retrieval, and the
//! benchmark sweeps live in their own modules; the commonly used types are
//! re-exported at the crate root.

pub mod analysis;
pub mod baselines;
pub mod dataset;
pub mod experiment;
pub mod fov;
pub mod geom;
pub mod lcvs;
pub mod rng;

pub use analysis::{
    accuracy_eval, distance_matrix, knn, pairwise_distance, AnalysisError, DistanceMatrix,
    MethodSpec,
};
pub use baselines::{hausdorff_distance, lcss_distance, lcss_score, BaselineError, LcssParams};
pub use dataset::{
    derive_heading, ingest_bdd100k_info, ingest_csv, load_trajectories, project, save_trajectories,
    synthesize, DatasetError, DirectionMode, GeoSample, ProjectionContext, SynthConfig,
};
pub use experiment::{
    emit_report, emit_report_to_path, run_experiment_fov_count, run_experiment_view_distance,
    ExperimentPlan, ExperimentReport, ExperimentRow, ReportFormat, REPORT_CSV_HEADER,
};
pub use fov::{
    cvw, cvw_grid_oracle, sector_area, sector_contains, view_polygon, ApproxMethod, FoV, FovError,
    GridError,
};
pub use geom::{convex_intersection_area, ConvexPolygon, Point, PolygonError};
pub use lcvs::{
    lcvs_distance, lcvs_reference, lcvs_score, lcvs_similarity, metric_audit, GeoVideo, LcvsError,
    LcvsParams, MetricAuditReport, TriangleViolation,
};
pub use rng::SplitMix64;
