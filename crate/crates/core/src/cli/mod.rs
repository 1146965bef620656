//! Command-line front end: one declarative run config, five commands,
//! JSON/CSV reports and distinct exit codes per error class.
//!
//! Every command computes all results before touching the output
//! directory, so configuration and numerical failures leave no files.

mod ablate;
mod args;
mod config;
mod output;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use serde::Serialize;

use crate::bench::{bench_evaluation, TimingReport};
use crate::error::Error;
use crate::extraction::{extract, extract_from_field, Extraction, ExtractionConfig, StageTimes};
use crate::field::UnitLabel;
use crate::field_file::read_field;
use crate::fitting::{field_fit_error, fit_field_with_summary, FitConfig, FitErrorReport, FitSummary};
use crate::mesh::{read_mesh, Mesh};
use crate::metrics::{evaluate, reference_mesh, MetricReport, MetricsConfig, PredSign};

pub use ablate::{ablate, AblationAxis, AblationRow};
pub use args::{AblateArgs, BenchArgs, Cli, Command, ExtractArgs, FitArgs, MetricsArgs, ShapeArgs};
pub use config::{MeshFormat, RunConfig, SamplingSection};
use output::Staging;

/// Probes used for the fit report's field-vs-oracle error.
pub const FIT_ERROR_PROBES: usize = 10_000;

/// Process exit status per failure class.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ErrorClass {
    /// Bad or missing config, flags or input paths.
    Config = 2,
    /// Input files that exist but cannot be parsed.
    Input = 3,
    /// Fitting or evaluation failed numerically.
    Numerical = 4,
    /// Nothing to mesh, or an empty mesh where one is required.
    EmptySurface = 5,
    /// Outputs could not be written or did not read back.
    Output = 6,
}

impl ErrorClass {
    pub fn code(self) -> u8 {
        self as u8
    }

    /// Default class of a library error raised while computing.
    pub fn of(err: &Error) -> Self {
        match err.root() {
            Error::Config(_) | Error::InvalidParameter(_) | Error::InvalidOrder(_) | Error::InvalidScale(_) => {
                ErrorClass::Config
            }
            Error::Format { .. } | Error::UnsupportedVersion(_) | Error::MeshIntegrity(_) => ErrorClass::Input,
            Error::EmptySurface | Error::EmptyMesh => ErrorClass::EmptySurface,
            Error::Io { .. } => ErrorClass::Output,
            _ => ErrorClass::Numerical,
        }
    }
}

#[derive(Debug)]
pub struct CliError {
    pub class: ErrorClass,
    pub error: Error,
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        self.error.fmt(f)
    }
}

impl std::error::Error for CliError {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

impl From<Error> for CliError {
    fn from(error: Error) -> Self {
        Self { class: ErrorClass::of(&error), error }
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;

trait Classify<T> {
    /// Errors while reading inputs: missing files are config errors.
    fn input(self) -> CliResult<T>;
    fn output(self) -> CliResult<T>;
}

impl<T> Classify<T> for crate::Result<T> {
    fn input(self) -> CliResult<T> {
        self.map_err(|error| {
            let class = match &error {
                Error::Io { .. } => ErrorClass::Config,
                e => ErrorClass::of(e),
            };
            CliError { class, error }
        })
    }

    fn output(self) -> CliResult<T> {
        self.map_err(|error| CliError { class: ErrorClass::Output, error })
    }
}

/// Config sections echoed into every report. The output directory is left
/// out so runs written to different places stay byte-identical.
#[derive(Serialize)]
struct ConfigEcho<'a> {
    shape: Option<&'a Path>,
    seed: u64,
    fit: &'a FitConfig,
    sampling: &'a SamplingSection,
    extraction: &'a ExtractionConfig,
    metrics: &'a MetricsConfig,
}

impl<'a> From<&'a RunConfig> for ConfigEcho<'a> {
    fn from(c: &'a RunConfig) -> Self {
        Self {
            shape: c.shape.as_deref(),
            seed: c.seed,
            fit: &c.fit,
            sampling: &c.sampling,
            extraction: &c.extraction,
            metrics: &c.metrics,
        }
    }
}

#[derive(Serialize)]
struct Report<'a, T> {
    command: &'static str,
    version: &'static str,
    seed: u64,
    config: ConfigEcho<'a>,
    #[serde(flatten)]
    result: T,
}

fn report<'a, T>(command: &'static str, cfg: &'a RunConfig, result: T) -> Report<'a, T> {
    Report { command, version: env!("CARGO_PKG_VERSION"), seed: cfg.seed, config: cfg.into(), result }
}

#[derive(Clone, Debug, Serialize)]
pub struct FitOutcome {
    pub n_points: usize,
    pub summary: FitSummary,
    pub error: FitErrorReport,
    pub fit_seconds: f64,
}

/// Samples expansion points, fits them against the shape and writes
/// `field.tylf` and `fit.json`.
pub fn cmd_fit(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    cfg.validate().input()?;
    let oracle = cfg.load_oracle().input()?;
    let t = Instant::now();
    let (field, summary) = fit_field_with_summary(
        &oracle,
        &cfg.sampling.to_config(cfg.seed),
        &cfg.fit,
        cfg.extraction.theta(),
        cfg.extraction.k,
    )?;
    let fit_seconds = t.elapsed().as_secs_f64();
    let error = field_fit_error(&oracle, &field, FIT_ERROR_PROBES, cfg.seed)?;
    let outcome = FitOutcome { n_points: field.len(), summary, error, fit_seconds };
    let mut out = Staging::new(&cfg.out_dir).output()?;
    out.field("field.tylf", &field).output()?;
    out.json("fit.json", &report("fit", cfg, outcome)).output()?;
    out.commit().output()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct MeshSummary {
    pub n_vertices: usize,
    pub n_triangles: usize,
    pub boundary_edges: usize,
    pub euler_characteristic: i64,
    pub closed: bool,
}

impl MeshSummary {
    pub fn of(mesh: &Mesh) -> Self {
        let t = mesh.topology();
        Self {
            n_vertices: mesh.vertices.len(),
            n_triangles: mesh.triangles.len(),
            boundary_edges: t.boundary_edges,
            euler_characteristic: t.euler_characteristic(),
            closed: t.is_closed(),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ExtractOutcome {
    pub source: String,
    pub mesh_res: usize,
    pub n_coarse_units: usize,
    pub n_inside_units: usize,
    pub n_outside_units: usize,
    pub n_near_surface_units: usize,
    pub n_expansion_points: usize,
    pub n_taylor_queries: usize,
    pub n_sentinel_queries: usize,
    pub mesh: MeshSummary,
    pub times: StageTimes,
}

impl ExtractOutcome {
    fn new(source: String, e: &Extraction, cfg: &ExtractionConfig) -> Self {
        let c = &e.classification;
        Self {
            source,
            mesh_res: cfg.mesh_res,
            n_coarse_units: c.len(),
            n_inside_units: c.count(UnitLabel::Inside),
            n_outside_units: c.count(UnitLabel::Outside),
            n_near_surface_units: c.count(UnitLabel::NearSurface),
            n_expansion_points: e.n_expansion_points(),
            n_taylor_queries: e.stats.n_taylor_queries,
            n_sentinel_queries: e.stats.n_sentinel_queries,
            mesh: MeshSummary::of(&e.mesh),
            times: e.times,
        }
    }
}

/// Meshes either the configured shape (classify, refine, evaluate) or a
/// stored field. Writes the mesh, `extract.json` and, for shapes, the
/// refined field as `extract_field.tylf`.
pub fn cmd_extract(cfg: &RunConfig, field_path: Option<&Path>) -> CliResult<Vec<PathBuf>> {
    cfg.validate().input()?;
    let (extraction, source) = match field_path {
        Some(path) => {
            if !path.is_file() {
                return Err(Error::Config(format!("field file {} does not exist", path.display())).into());
            }
            let field = read_field(path).input()?;
            (extract_from_field(field, &cfg.extraction)?, path.display().to_string())
        }
        None => {
            let oracle = cfg.load_oracle().input()?;
            let e = extract(&oracle, &cfg.fit, &cfg.extraction)?;
            (e, cfg.shape_path().input()?.display().to_string())
        }
    };
    if extraction.mesh.is_empty() {
        return Err(Error::EmptySurface.into());
    }
    let outcome = ExtractOutcome::new(source, &extraction, &cfg.extraction);
    let mut out = Staging::new(&cfg.out_dir).output()?;
    out.mesh(&format!("mesh.{}", cfg.mesh_format.extension()), &extraction.mesh).output()?;
    if field_path.is_none() {
        out.field("extract_field.tylf", &extraction.field).output()?;
    }
    out.json("extract.json", &report("extract", cfg, outcome)).output()?;
    out.commit().output()
}

#[derive(Clone, Debug, Serialize)]
struct MetricsOutcome {
    pred: String,
    #[serde(flatten)]
    report: MetricReport,
}

/// Scores a mesh against the configured shape; writes `metrics.json`.
pub fn cmd_metrics(cfg: &RunConfig, pred_path: &Path) -> CliResult<Vec<PathBuf>> {
    cfg.validate().input()?;
    if cfg.metrics.pred_sign == PredSign::Grid {
        return Err(Error::Config(
            "metrics.pred_sign = \"grid\" needs an extraction grid; use extract or ablate".into(),
        )
        .into());
    }
    if !pred_path.is_file() {
        return Err(Error::Config(format!("mesh file {} does not exist", pred_path.display())).into());
    }
    let pred = read_mesh(pred_path).input()?;
    let oracle = cfg.load_oracle().input()?;
    let gt_mesh = reference_mesh(&oracle, cfg.metrics.reference_res)?;
    let report_ = evaluate(&pred, None, &oracle, &gt_mesh, &cfg.metrics, cfg.seed)?;
    let outcome = MetricsOutcome { pred: pred_path.display().to_string(), report: report_ };
    let mut out = Staging::new(&cfg.out_dir).output()?;
    out.json("metrics.json", &report("metrics", cfg, outcome)).output()?;
    out.commit().output()
}

/// Order or k sweep; writes `ablate_<axis>.csv`.
pub fn cmd_ablate(cfg: &RunConfig, axis: AblationAxis, values: &[usize]) -> CliResult<Vec<PathBuf>> {
    cfg.validate().input()?;
    let oracle = cfg.load_oracle().input()?;
    let gt_mesh = reference_mesh(&oracle, cfg.metrics.reference_res)?;
    let rows = ablate(&oracle, &gt_mesh, &cfg.fit, &cfg.extraction, &cfg.metrics, axis, values, cfg.seed)?;
    let name = match axis {
        AblationAxis::Order => "ablate_order.csv",
        AblationAxis::K => "ablate_k.csv",
    };
    let mut out = Staging::new(&cfg.out_dir).output()?;
    out.csv(name, &rows).output()?;
    out.commit().output()
}

/// Timing of both evaluation paths; writes `bench.json`.
pub fn cmd_bench(cfg: &RunConfig) -> CliResult<Vec<PathBuf>> {
    cfg.validate().input()?;
    let oracle = cfg.load_oracle().input()?;
    let timing: TimingReport = bench_evaluation(&oracle, &cfg.fit, &cfg.extraction, &cfg.bench)?;
    #[derive(Serialize)]
    struct BenchOutcome<'a> {
        bench: &'a crate::bench::BenchConfig,
        #[serde(flatten)]
        timing: TimingReport,
    }
    let outcome = BenchOutcome { bench: &cfg.bench, timing };
    let mut out = Staging::new(&cfg.out_dir).output()?;
    out.json("bench.json", &report("bench", cfg, outcome)).output()?;
    out.commit().output()
}

/// Builds the effective config: file, then command-line overrides.
pub fn resolve_config(cli: &Cli) -> CliResult<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            if !path.is_file() {
                return Err(Error::Config(format!("config file {} does not exist", path.display())).into());
            }
            RunConfig::load(path).input()?
        }
        None => RunConfig::default(),
    };
    if let Some(seed) = cli.seed {
        cfg.seed = seed;
    }
    if let Some(dir) = &cli.out_dir {
        cfg.out_dir = dir.clone();
    }
    cli.command.apply(&mut cfg);
    Ok(cfg)
}

/// Runs one parsed command line on a pool of `--threads` workers
/// (default: all cores, one for `bench`).
pub fn run(cli: &Cli) -> CliResult<Vec<PathBuf>> {
    let cfg = resolve_config(cli)?;
    let threads = cli.threads.unwrap_or(match cli.command {
        Command::Bench(_) => 1,
        _ => 0,
    });
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| CliError::from(Error::Config(format!("thread pool: {e}"))))?;
    pool.install(|| match &cli.command {
        Command::Fit(_) => cmd_fit(&cfg),
        Command::Extract(a) => cmd_extract(&cfg, a.field.as_deref()),
        Command::Metrics(a) => cmd_metrics(&cfg, &a.pred),
        Command::Ablate(a) => cmd_ablate(&cfg, a.axis, &a.values),
        Command::Bench(_) => cmd_bench(&cfg),
    })
}

/// Entry point of the `taylor` binary.
pub fn main() -> ExitCode {
    use clap::Parser;
    let cli = Cli::parse();
    match run(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("error: {e}");
            let mut source = std::error::Error::source(&e.error);
            while let Some(s) = source {
                eprintln!("  caused by: {s}");
                source = s.source();
            }
            ExitCode::from(e.class.code())
        }
    }
}
