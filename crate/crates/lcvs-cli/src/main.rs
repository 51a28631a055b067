//! `lcvs`: compare geo-tagged video trajectories by the overlap of their
//! camera fields of view.
//!
//! Exit codes: 0 on success, 2 for usage errors (bad flags or parameters),
//! 3 for data errors (unreadable or malformed inputs).

use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use lcvs_core::{
    distance_matrix, emit_report, emit_report_to_path, ingest_bdd100k_info, ingest_csv, knn,
    load_trajectories, metric_audit, pairwise_distance, run_experiment_fov_count,
    run_experiment_view_distance, save_trajectories, synthesize, AnalysisError, ApproxMethod,
    DatasetError, DirectionMode, ExperimentPlan, GeoVideo, LcvsError, LcvsParams, MethodSpec,
    ProjectionContext, ReportFormat, SynthConfig,
};

#[derive(Parser)]
#[command(
    name = "lcvs",
    version,
    about = "Field-of-view trajectory similarity for geo-tagged videos"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic trajectory dataset
    Synth(SynthArgs),
    /// Convert a GPS CSV (t,lat,lon[,course]) into a trajectory file
    Ingest(IngestArgs),
    /// Convert a BDD100K per-video info JSON into a trajectory file
    IngestBdd(IngestArgs),
    /// Distance between two videos of a dataset
    Dist(DistArgs),
    /// Pairwise distance matrix as CSV
    Matrix(MatrixArgs),
    /// The k nearest neighbors of one video
    Knn(KnnArgs),
    /// Accuracy/runtime sweep over the total number of FoVs
    BenchFovs(BenchFovsArgs),
    /// Accuracy/runtime sweep over the viewable distance
    BenchViewdist(BenchViewdistArgs),
    /// Audit the distance for the three metric properties
    AuditMetric(AuditArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodKind {
    LcvsMbs,
    LcvsMbt,
    LcvsMbr,
    LcvsOracle,
    Lcss,
    Hausdorff,
}

#[derive(Args)]
struct MethodArgs {
    /// Distance method
    #[arg(long, value_enum, default_value_t = MethodKind::LcvsMbs)]
    method: MethodKind,
    /// Maximum index offset between matched frames
    #[arg(long, default_value_t = 1)]
    sigma: u32,
    /// MBS fan segment angle in degrees, in (0, 45]
    #[arg(long, default_value_t = 5.0)]
    segment_angle: f64,
    /// LCSS spatial threshold in meters
    #[arg(long, default_value_t = 10.0)]
    epsilon: f64,
}

impl MethodArgs {
    fn spec(&self) -> Result<MethodSpec, CliError> {
        build_spec(self.method, self.sigma, self.segment_angle, self.epsilon)
    }
}

fn build_spec(
    kind: MethodKind,
    sigma: u32,
    segment_angle: f64,
    epsilon: f64,
) -> Result<MethodSpec, CliError> {
    if !(segment_angle.is_finite() && segment_angle > 0.0 && segment_angle <= 45.0) {
        return Err(CliError::usage(format!(
            "--segment-angle must lie in (0, 45], got {segment_angle}"
        )));
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return Err(CliError::usage(format!(
            "--epsilon must be positive, got {epsilon}"
        )));
    }
    Ok(match kind {
        MethodKind::LcvsMbs => MethodSpec::LcvsMbs {
            segment_angle,
            sigma,
        },
        MethodKind::LcvsMbt => MethodSpec::LcvsMbt { sigma },
        MethodKind::LcvsMbr => MethodSpec::LcvsMbr { sigma },
        MethodKind::LcvsOracle => MethodSpec::LcvsOracle { sigma },
        MethodKind::Lcss => MethodSpec::Lcss { epsilon, sigma },
        MethodKind::Hausdorff => MethodSpec::Hausdorff,
    })
}

#[derive(Args)]
struct SynthArgs {
    /// Number of videos
    #[arg(long, default_value_t = 40)]
    videos: usize,
    /// Frames per video
    #[arg(long, default_value_t = 25)]
    frames: usize,
    /// Viewable radius in meters
    #[arg(long, default_value_t = 30.0)]
    r: f64,
    /// Full lens angle in degrees, in (0, 180)
    #[arg(long, default_value_t = 60.0)]
    delta: f64,
    /// Camera direction model: straight or random
    #[arg(long, default_value = "straight")]
    mode: DirectionMode,
    /// Side of the square start region, meters
    #[arg(long, default_value_t = 300.0)]
    extent: f64,
    /// Walk step per frame, meters
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    /// Half-width of the per-step heading perturbation, degrees
    #[arg(long, default_value_t = 5.0)]
    heading_jitter: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Output trajectory JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct IngestArgs {
    /// Input file
    input: PathBuf,
    /// Viewable radius assigned to every frame, meters
    #[arg(long, default_value_t = 30.0)]
    r: f64,
    /// Full lens angle assigned to every frame, degrees
    #[arg(long, default_value_t = 60.0)]
    delta: f64,
    /// Output trajectory JSON
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct DistArgs {
    /// Trajectory JSON
    #[arg(long)]
    data: PathBuf,
    /// First video id
    #[arg(long)]
    a: String,
    /// Second video id
    #[arg(long)]
    b: String,
    #[command(flatten)]
    method: MethodArgs,
}

#[derive(Args)]
struct MatrixArgs {
    /// Trajectory JSON
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    method: MethodArgs,
    /// Worker threads for the pair loop
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output CSV (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct KnnArgs {
    /// Trajectory JSON
    #[arg(long)]
    data: PathBuf,
    /// Query video id
    #[arg(long)]
    query: String,
    /// Number of neighbors
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[command(flatten)]
    method: MethodArgs,
    /// Worker threads for the pair loop
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Output file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SweepCommonArgs {
    /// Methods to measure
    #[arg(
        long,
        value_enum,
        value_delimiter = ',',
        default_values_t = [MethodKind::LcvsMbs, MethodKind::LcvsMbt, MethodKind::LcvsMbr, MethodKind::Lcss]
    )]
    methods: Vec<MethodKind>,
    /// Direction modes to run
    #[arg(long, value_delimiter = ',', default_values_t = [DirectionMode::Straight, DirectionMode::Random])]
    modes: Vec<DirectionMode>,
    /// Neighbors per query for precision@k
    #[arg(long, default_value_t = 5)]
    k: usize,
    /// Maximum index offset between matched frames
    #[arg(long, default_value_t = 1)]
    sigma: u32,
    /// MBS fan segment angle in degrees, in (0, 45]
    #[arg(long, default_value_t = 5.0)]
    segment_angle: f64,
    /// LCSS spatial threshold in meters
    #[arg(long, default_value_t = 10.0)]
    epsilon: f64,
    /// Full lens angle in degrees, in (0, 180)
    #[arg(long, default_value_t = 60.0)]
    delta: f64,
    /// Side of the square start region, meters
    #[arg(long, default_value_t = 300.0)]
    extent: f64,
    /// Walk step per frame, meters
    #[arg(long, default_value_t = 5.0)]
    step: f64,
    /// Half-width of the per-step heading perturbation, degrees
    #[arg(long, default_value_t = 5.0)]
    heading_jitter: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    /// Worker threads for the untimed ground-truth matrix (measured method
    /// runs are always serial)
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Report format: csv or json
    #[arg(long, default_value = "csv")]
    format: ReportFormat,
    /// Output report file (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
}

impl SweepCommonArgs {
    fn plan(&self, base: SynthConfig) -> Result<ExperimentPlan, CliError> {
        if self.methods.is_empty() {
            return Err(CliError::usage("--methods must not be empty".to_string()));
        }
        if self.modes.is_empty() {
            return Err(CliError::usage("--modes must not be empty".to_string()));
        }
        let methods = self
            .methods
            .iter()
            .map(|kind| build_spec(*kind, self.sigma, self.segment_angle, self.epsilon))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(ExperimentPlan {
            base,
            methods,
            modes: self.modes.clone(),
            k: self.k,
            oracle_sigma: self.sigma,
            oracle_threads: self.threads.max(1),
        })
    }
}

#[derive(Args)]
struct BenchFovsArgs {
    /// Total FoV counts to sweep; each level runs level/frames videos
    #[arg(long, value_delimiter = ',', default_values_t = [250, 500, 750, 1000])]
    levels: Vec<usize>,
    /// Frames per video
    #[arg(long, default_value_t = 25)]
    frames: usize,
    /// Viewable radius in meters
    #[arg(long, default_value_t = 30.0)]
    r: f64,
    #[command(flatten)]
    common: SweepCommonArgs,
}

#[derive(Args)]
struct BenchViewdistArgs {
    /// Viewable distances to sweep, meters
    #[arg(long, value_delimiter = ',', default_values_t = [10.0, 20.0, 30.0, 40.0, 50.0, 60.0])]
    radii: Vec<f64>,
    /// Number of videos
    #[arg(long, default_value_t = 40)]
    videos: usize,
    /// Frames per video
    #[arg(long, default_value_t = 25)]
    frames: usize,
    #[command(flatten)]
    common: SweepCommonArgs,
}

#[derive(Args)]
struct AuditArgs {
    /// Trajectory JSON
    #[arg(long)]
    data: PathBuf,
    /// View approximation used for the audit (an lcvs-* method)
    #[arg(long, value_enum, default_value_t = MethodKind::LcvsOracle)]
    method: MethodKind,
    /// Maximum index offset between matched frames
    #[arg(long, default_value_t = 1)]
    sigma: u32,
    /// MBS fan segment angle in degrees, in (0, 45]
    #[arg(long, default_value_t = 5.0)]
    segment_angle: f64,
    /// Write the full report as JSON
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn usage(msg: impl Into<String>) -> Self {
        CliError::Usage(msg.into())
    }

    fn message(&self) -> &str {
        match self {
            CliError::Usage(m) | CliError::Data(m) => m,
        }
    }

    fn code(&self) -> u8 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
        }
    }
}

impl From<DatasetError> for CliError {
    fn from(e: DatasetError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<LcvsError> for CliError {
    fn from(e: LcvsError) -> Self {
        CliError::Data(e.to_string())
    }
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::UnknownId(_)
            | AnalysisError::InvalidK { .. }
            | AnalysisError::InvalidSweep(_) => CliError::Usage(e.to_string()),
            other => CliError::Data(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Data(format!("io error: {e}"))
    }
}

fn validate_radius(r: f64) -> Result<(), CliError> {
    if !(r.is_finite() && r > 0.0) {
        return Err(CliError::usage(format!("--r must be positive, got {r}")));
    }
    Ok(())
}

fn validate_delta(delta: f64) -> Result<(), CliError> {
    if !(delta.is_finite() && delta > 0.0 && delta < 180.0) {
        return Err(CliError::usage(format!(
            "--delta must lie in (0, 180), got {delta}"
        )));
    }
    Ok(())
}

fn load_dataset(path: &Path) -> Result<Vec<GeoVideo>, CliError> {
    let (videos, _) = load_trajectories(path)?;
    Ok(videos)
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<(), CliError> {
    match out {
        Some(path) => {
            std::fs::write(path, content)?;
            Ok(())
        }
        None => {
            std::io::stdout().write_all(content.as_bytes())?;
            Ok(())
        }
    }
}

fn cmd_synth(args: SynthArgs) -> Result<(), CliError> {
    validate_radius(args.r)?;
    validate_delta(args.delta)?;
    let cfg = SynthConfig {
        n_videos: args.videos,
        frames_per_video: args.frames,
        r: args.r,
        delta: args.delta,
        direction_mode: args.mode,
        extent: args.extent,
        step: args.step,
        heading_jitter: args.heading_jitter,
        seed: args.seed,
    };
    let videos = synthesize(&cfg)?;
    save_trajectories(&args.out, &videos, None)?;
    eprintln!(
        "wrote {} videos x {} frames to {}",
        videos.len(),
        cfg.frames_per_video,
        args.out.display()
    );
    Ok(())
}

fn cmd_ingest(args: IngestArgs, bdd: bool) -> Result<(), CliError> {
    validate_radius(args.r)?;
    validate_delta(args.delta)?;
    let (video, ctx): (GeoVideo, ProjectionContext) = if bdd {
        ingest_bdd100k_info(&args.input, args.r, args.delta)?
    } else {
        ingest_csv(&args.input, args.r, args.delta)?
    };
    let frames = video.len();
    save_trajectories(&args.out, &[video], Some(&ctx))?;
    eprintln!(
        "ingested {} frames from {} to {}",
        frames,
        args.input.display(),
        args.out.display()
    );
    Ok(())
}

fn cmd_dist(args: DistArgs) -> Result<(), CliError> {
    let spec = args.method.spec()?;
    let videos = load_dataset(&args.data)?;
    let find = |id: &str| -> Result<&GeoVideo, CliError> {
        videos
            .iter()
            .find(|v| v.id() == id)
            .ok_or_else(|| CliError::usage(format!("unknown video id {id:?}")))
    };
    let a = find(&args.a)?;
    let b = find(&args.b)?;
    let d = pairwise_distance(a, b, &spec)?;
    println!("{d}");
    Ok(())
}

fn cmd_matrix(args: MatrixArgs) -> Result<(), CliError> {
    if args.threads == 0 {
        return Err(CliError::usage("--threads must be at least 1".to_string()));
    }
    let spec = args.method.spec()?;
    let videos = load_dataset(&args.data)?;
    let matrix = distance_matrix(&videos, &spec, args.threads)?;
    write_or_print(args.out.as_deref(), &matrix.to_csv_string())
}

fn cmd_knn(args: KnnArgs) -> Result<(), CliError> {
    if args.threads == 0 {
        return Err(CliError::usage("--threads must be at least 1".to_string()));
    }
    let spec = args.method.spec()?;
    let videos = load_dataset(&args.data)?;
    let matrix = distance_matrix(&videos, &spec, args.threads)?;
    let neighbors = knn(&matrix, &args.query, args.k)?;
    let mut content = neighbors.join("\n");
    content.push('\n');
    write_or_print(args.out.as_deref(), &content)
}

fn emit(report: &lcvs_core::ExperimentReport, args: &SweepCommonArgs) -> Result<(), CliError> {
    match &args.out {
        Some(path) => {
            emit_report_to_path(report, path, args.format)?;
            eprintln!("wrote {} rows to {}", report.rows.len(), path.display());
            Ok(())
        }
        None => {
            let stdout = std::io::stdout();
            emit_report(report, stdout.lock(), args.format)?;
            Ok(())
        }
    }
}

fn cmd_bench_fovs(args: BenchFovsArgs) -> Result<(), CliError> {
    validate_radius(args.r)?;
    validate_delta(args.common.delta)?;
    let base = SynthConfig {
        n_videos: 2, // per-level video counts come from the sweep
        frames_per_video: args.frames,
        r: args.r,
        delta: args.common.delta,
        direction_mode: DirectionMode::Straight,
        extent: args.common.extent,
        step: args.common.step,
        heading_jitter: args.common.heading_jitter,
        seed: args.common.seed,
    };
    let plan = args.common.plan(base)?;
    let report = run_experiment_fov_count(&plan, &args.levels)?;
    emit(&report, &args.common)
}

fn cmd_bench_viewdist(args: BenchViewdistArgs) -> Result<(), CliError> {
    validate_delta(args.common.delta)?;
    let base = SynthConfig {
        n_videos: args.videos,
        frames_per_video: args.frames,
        r: 30.0, // per-level radii come from the sweep
        delta: args.common.delta,
        direction_mode: DirectionMode::Straight,
        extent: args.common.extent,
        step: args.common.step,
        heading_jitter: args.common.heading_jitter,
        seed: args.common.seed,
    };
    let plan = args.common.plan(base)?;
    let report = run_experiment_view_distance(&plan, &args.radii)?;
    emit(&report, &args.common)
}

fn cmd_audit(args: AuditArgs) -> Result<(), CliError> {
    let method = match build_spec(args.method, args.sigma, args.segment_angle, 10.0)? {
        MethodSpec::LcvsMbs { segment_angle, .. } => ApproxMethod::Mbs { segment_angle },
        MethodSpec::LcvsMbt { .. } => ApproxMethod::Mbt,
        MethodSpec::LcvsMbr { .. } => ApproxMethod::Mbr,
        MethodSpec::LcvsOracle { .. } => ApproxMethod::Oracle,
        other => {
            return Err(CliError::usage(format!(
                "audit-metric needs an lcvs-* method, got {other}"
            )))
        }
    };
    let videos = load_dataset(&args.data)?;
    let params = LcvsParams {
        sigma: args.sigma,
        method,
    };
    let report = metric_audit(&videos, &params)?;
    println!(
        "videos: {}\npairs checked: {} (non-negativity violations: {}, symmetry violations: {})\ntriples checked: {} (triangle violations: {})",
        report.video_count,
        report.pair_checks,
        report.nonnegativity_violations,
        report.symmetry_violations,
        report.triple_checks,
        report.triangle_violations
    );
    for v in report.triangle_examples.iter().take(10) {
        println!(
            "  d({},{}) + d({},{}) < d({},{}): {} + {} < {} (deficit {:.3e})",
            v.a, v.b, v.b, v.c, v.a, v.c, v.d_ab, v.d_bc, v.d_ac, v.deficit
        );
    }
    if report.triangle_examples.len() > 10 {
        println!("  ... {} more", report.triangle_examples.len() - 10);
    }
    if let Some(path) = &args.out {
        let json = serde_json::to_string_pretty(&report)
            .map_err(|e| CliError::Data(format!("serialize report: {e}")))?;
        std::fs::write(path, json + "\n")?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Synth(args) => cmd_synth(args),
        Command::Ingest(args) => cmd_ingest(args, false),
        Command::IngestBdd(args) => cmd_ingest(args, true),
        Command::Dist(args) => cmd_dist(args),
        Command::Matrix(args) => cmd_matrix(args),
        Command::Knn(args) => cmd_knn(args),
        Command::BenchFovs(args) => cmd_bench_fovs(args),
        Command::BenchViewdist(args) => cmd_bench_viewdist(args),
        Command::AuditMetric(args) => cmd_audit(args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message());
            ExitCode::from(e.code())
        }
    }
}
