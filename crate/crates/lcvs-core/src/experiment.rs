//! Benchmark sweeps: build synthetic datasets, time the pairwise distance
//! computation per method, score accuracy against the fine-fan ground truth,
//! and emit CSV or JSON reports.

use std::io::Write;
use std::path::Path;
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::analysis::{accuracy_eval, distance_matrix, AnalysisError, DistanceMatrix, MethodSpec};
use crate::dataset::{synthesize, DirectionMode, SynthConfig};

pub const REPORT_CSV_HEADER: &str =
    "sweep_value,method,mode,accuracy,wall_time_s,n_videos,frames_per_video,seed";

/// One measurement: a method at one sweep level in one direction mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentRow {
    pub sweep_value: f64,
    pub method: String,
    pub mode: String,
    pub accuracy: f64,
    pub wall_time_s: f64,
    pub n_videos: usize,
    pub frames_per_video: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub rows: Vec<ExperimentRow>,
}

impl ExperimentReport {
    /// Rows for one method, ordered by sweep value.
    pub fn rows_for(&self, method: &str, mode: &str) -> Vec<&ExperimentRow> {
        self.rows
            .iter()
            .filter(|r| r.method == method && r.mode == mode)
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportFormat {
    Csv,
    Json,
}

impl std::str::FromStr for ReportFormat {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(format!("unknown report format {other:?}")),
        }
    }
}

/// Shared setup for the two sweeps.
///
/// `base` fixes everything but the swept quantity. Method matrices are
/// always computed serially and timed; the ground-truth matrix may use
/// `oracle_threads` workers unless the oracle itself is one of the reported
/// methods, in which case its serial timed run doubles as ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentPlan {
    pub base: SynthConfig,
    pub methods: Vec<MethodSpec>,
    pub modes: Vec<DirectionMode>,
    pub k: usize,
    pub oracle_sigma: u32,
    pub oracle_threads: usize,
}

impl Default for ExperimentPlan {
    fn default() -> Self {
        Self {
            base: SynthConfig::default(),
            methods: vec![
                MethodSpec::LcvsMbs {
                    segment_angle: 5.0,
                    sigma: 1,
                },
                MethodSpec::LcvsMbt { sigma: 1 },
                MethodSpec::LcvsMbr { sigma: 1 },
                MethodSpec::Lcss {
                    epsilon: 10.0,
                    sigma: 1,
                },
            ],
            modes: vec![DirectionMode::Straight, DirectionMode::Random],
            k: 5,
            oracle_sigma: 1,
            oracle_threads: 1,
        }
    }
}

fn timed_matrix(
    videos: &[crate::lcvs::GeoVideo],
    spec: &MethodSpec,
) -> Result<(DistanceMatrix, f64), AnalysisError> {
    let start = Instant::now();
    let matrix = distance_matrix(videos, spec, 1)?;
    let secs = start.elapsed().as_secs_f64().max(f64::MIN_POSITIVE);
    Ok((matrix, secs))
}

fn run_level(
    plan: &ExperimentPlan,
    cfg: &SynthConfig,
    sweep_value: f64,
    rows: &mut Vec<ExperimentRow>,
) -> Result<(), AnalysisError> {
    let videos = synthesize(cfg)?;
    if plan.k == 0 || plan.k >= videos.len() {
        return Err(AnalysisError::InvalidK {
            k: plan.k,
            n: videos.len(),
        });
    }
    let oracle_spec = MethodSpec::LcvsOracle {
        sigma: plan.oracle_sigma,
    };
    let oracle_reported = plan.methods.contains(&oracle_spec);
    let (oracle_matrix, oracle_secs) = if oracle_reported {
        timed_matrix(&videos, &oracle_spec)?
    } else {
        (
            distance_matrix(&videos, &oracle_spec, plan.oracle_threads.max(1))?,
            0.0,
        )
    };

    for method in &plan.methods {
        let (matrix, secs);
        let matrix_ref = if *method == oracle_spec {
            secs = oracle_secs;
            &oracle_matrix
        } else {
            let timed = timed_matrix(&videos, method)?;
            matrix = timed.0;
            secs = timed.1;
            &matrix
        };
        let accuracy = accuracy_eval(matrix_ref, &oracle_matrix, plan.k)?;
        rows.push(ExperimentRow {
            sweep_value,
            method: method.name().to_string(),
            mode: cfg.direction_mode.as_str().to_string(),
            accuracy,
            wall_time_s: secs,
            n_videos: cfg.n_videos,
            frames_per_video: cfg.frames_per_video,
            seed: cfg.seed,
        });
    }
    Ok(())
}

fn sort_rows(rows: &mut [ExperimentRow]) {
    rows.sort_by(|a, b| {
        a.sweep_value
            .total_cmp(&b.sweep_value)
            .then_with(|| a.method.cmp(&b.method))
            .then_with(|| a.mode.cmp(&b.mode))
    });
}

/// Sweeps the dataset size. `levels` are total FoV counts; each level runs
/// `level / frames_per_video` videos at the base frame count, in every
/// direction mode of the plan.
pub fn run_experiment_fov_count(
    plan: &ExperimentPlan,
    levels: &[usize],
) -> Result<ExperimentReport, AnalysisError> {
    if levels.len() < 2 {
        return Err(AnalysisError::InvalidSweep(format!(
            "need at least 2 levels, got {}",
            levels.len()
        )));
    }
    let mut rows = Vec::new();
    for &level in levels {
        let n_videos = level / plan.base.frames_per_video;
        if n_videos < 2 {
            return Err(AnalysisError::InvalidSweep(format!(
                "level {level} yields {n_videos} videos at {} frames each",
                plan.base.frames_per_video
            )));
        }
        for &mode in &plan.modes {
            let cfg = SynthConfig {
                n_videos,
                direction_mode: mode,
                ..plan.base
            };
            let actual_fovs = (n_videos * plan.base.frames_per_video) as f64;
            run_level(plan, &cfg, actual_fovs, &mut rows)?;
        }
    }
    sort_rows(&mut rows);
    Ok(ExperimentReport { rows })
}

/// Sweeps the viewable distance at the base dataset size.
pub fn run_experiment_view_distance(
    plan: &ExperimentPlan,
    radii: &[f64],
) -> Result<ExperimentReport, AnalysisError> {
    if radii.len() < 2 {
        return Err(AnalysisError::InvalidSweep(format!(
            "need at least 2 radii, got {}",
            radii.len()
        )));
    }
    let mut rows = Vec::new();
    for &r in radii {
        if !(r.is_finite() && r > 0.0) {
            return Err(AnalysisError::InvalidSweep(format!(
                "viewable distance must be positive, got {r}"
            )));
        }
        for &mode in &plan.modes {
            let cfg = SynthConfig {
                r,
                direction_mode: mode,
                ..plan.base
            };
            run_level(plan, &cfg, r, &mut rows)?;
        }
    }
    sort_rows(&mut rows);
    Ok(ExperimentReport { rows })
}

/// Writes the report. CSV columns are exactly [`REPORT_CSV_HEADER`]; rows
/// keep their (sweep, method, mode) order.
pub fn emit_report<W: Write>(
    report: &ExperimentReport,
    mut w: W,
    format: ReportFormat,
) -> std::io::Result<()> {
    match format {
        ReportFormat::Csv => {
            writeln!(w, "{REPORT_CSV_HEADER}")?;
            for r in &report.rows {
                writeln!(
                    w,
                    "{},{},{},{},{},{},{},{}",
                    r.sweep_value,
                    r.method,
                    r.mode,
                    r.accuracy,
                    r.wall_time_s,
                    r.n_videos,
                    r.frames_per_video,
                    r.seed
                )?;
            }
        }
        ReportFormat::Json => {
            serde_json::to_writer_pretty(&mut w, report)
                .map_err(|e| std::io::Error::new(std::io::ErrorKind::InvalidData, e))?;
            writeln!(w)?;
        }
    }
    Ok(())
}

pub fn emit_report_to_path(
    report: &ExperimentReport,
    path: &Path,
    format: ReportFormat,
) -> Result<(), AnalysisError> {
    let file = std::fs::File::create(path)?;
    let mut writer = std::io::BufWriter::new(file);
    emit_report(report, &mut writer, format)?;
    writer.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tiny_plan() -> ExperimentPlan {
        ExperimentPlan {
            base: SynthConfig {
                n_videos: 6,
                frames_per_video: 5,
                extent: 60.0,
                seed: 7,
                ..SynthConfig::default()
            },
            methods: vec![
                MethodSpec::LcvsMbs {
                    segment_angle: 5.0,
                    sigma: 1,
                },
                MethodSpec::LcvsMbt { sigma: 1 },
                MethodSpec::LcvsMbr { sigma: 1 },
                MethodSpec::Lcss {
                    epsilon: 10.0,
                    sigma: 1,
                },
            ],
            modes: vec![DirectionMode::Straight, DirectionMode::Random],
            k: 2,
            oracle_sigma: 1,
            oracle_threads: 1,
        }
    }

    #[test]
    fn fov_sweep_row_count_and_order() {
        let report = run_experiment_fov_count(&tiny_plan(), &[20, 30]).unwrap();
        // 2 levels x 4 methods x 2 modes.
        assert_eq!(report.rows.len(), 16);
        let mut sorted = report.rows.clone();
        sort_rows(&mut sorted);
        assert_eq!(sorted, report.rows);
        assert!(report.rows.iter().all(|r| r.wall_time_s > 0.0));
        assert!(report
            .rows
            .iter()
            .all(|r| (0.0..=1.0).contains(&r.accuracy)));
    }

    #[test]
    fn oracle_rows_have_perfect_accuracy() {
        let mut plan = tiny_plan();
        plan.methods.push(MethodSpec::LcvsOracle { sigma: 1 });
        plan.modes = vec![DirectionMode::Random];
        let report = run_experiment_fov_count(&plan, &[20, 30]).unwrap();
        for row in report.rows.iter().filter(|r| r.method == "lcvs-oracle") {
            assert_eq!(row.accuracy, 1.0);
        }
    }

    #[test]
    fn view_distance_sweep_rows() {
        let mut plan = tiny_plan();
        plan.modes = vec![DirectionMode::Random];
        plan.methods.truncate(2);
        let report = run_experiment_view_distance(&plan, &[10.0, 20.0, 30.0]).unwrap();
        assert_eq!(report.rows.len(), 6);
        assert_eq!(report.rows[0].sweep_value, 10.0);
    }

    #[test]
    fn sweeps_validate_levels() {
        let plan = tiny_plan();
        assert!(matches!(
            run_experiment_fov_count(&plan, &[20]),
            Err(AnalysisError::InvalidSweep(_))
        ));
        assert!(matches!(
            run_experiment_fov_count(&plan, &[20, 5]),
            Err(AnalysisError::InvalidSweep(_))
        ));
        assert!(matches!(
            run_experiment_view_distance(&plan, &[10.0, -5.0]),
            Err(AnalysisError::InvalidSweep(_))
        ));
    }

    #[test]
    fn empty_report_emits_header_only() {
        let mut buf = Vec::new();
        emit_report(&ExperimentReport::default(), &mut buf, ReportFormat::Csv).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            format!("{REPORT_CSV_HEADER}\n")
        );
    }

    #[test]
    fn csv_column_order_is_pinned() {
        let report = ExperimentReport {
            rows: vec![ExperimentRow {
                sweep_value: 250.0,
                method: "lcvs-mbs".into(),
                mode: "random".into(),
                accuracy: 0.875,
                wall_time_s: 0.5,
                n_videos: 10,
                frames_per_video: 25,
                seed: 42,
            }],
        };
        let mut buf = Vec::new();
        emit_report(&report, &mut buf, ReportFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(
            text,
            "sweep_value,method,mode,accuracy,wall_time_s,n_videos,frames_per_video,seed\n\
             250,lcvs-mbs,random,0.875,0.5,10,25,42\n"
        );
    }

    #[test]
    fn json_report_roundtrips() {
        let mut plan = tiny_plan();
        plan.modes = vec![DirectionMode::Straight];
        plan.methods.truncate(2);
        let report = run_experiment_fov_count(&plan, &[20, 30]).unwrap();
        let mut buf = Vec::new();
        emit_report(&report, &mut buf, ReportFormat::Json).unwrap();
        let parsed: ExperimentReport = serde_json::from_slice(&buf).unwrap();
        assert_eq!(parsed, report);
    }
}
