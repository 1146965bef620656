use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use super::ablate::AblationAxis;
use super::config::{MeshFormat, RunConfig};

#[derive(Debug, Parser)]
#[command(name = "taylor", version, about = "Fit, mesh and score Taylor-series implicit fields")]
pub struct Cli {
    /// Run config (TOML); flags override its keys.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub out_dir: Option<PathBuf>,
    /// Worker threads (default: all cores; 1 for bench).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Fit sampled expansion points and write a field file.
    Fit(FitArgs),
    /// Coarse-to-fine extraction to a mesh, from a shape or a field file.
    Extract(ExtractArgs),
    /// IoU, Chamfer-L1 and F-score of a mesh against the shape.
    Metrics(MetricsArgs),
    /// Sweep Taylor order (by truncation) or neighbor count.
    Ablate(AblateArgs),
    /// Point-evaluation timing against a dense per-vertex baseline.
    Bench(BenchArgs),
}

#[derive(Debug, Default, Args)]
pub struct ShapeArgs {
    /// Shape definition (TOML) or mesh file.
    #[arg(long)]
    pub shape: Option<PathBuf>,
    /// Taylor order of the fits.
    #[arg(long)]
    pub order: Option<u32>,
}

#[derive(Debug, Args)]
pub struct FitArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Number of sampled expansion points.
    #[arg(long)]
    pub n_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct ExtractArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Mesh a stored field instead of fitting the shape.
    #[arg(long, conflicts_with = "shape")]
    pub field: Option<PathBuf>,
    #[arg(long)]
    pub mesh_res: Option<usize>,
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<MeshFormat>,
}

#[derive(Debug, Args)]
pub struct MetricsArgs {
    /// Predicted mesh (OBJ/PLY/STL).
    #[arg(long)]
    pub pred: PathBuf,
    /// Ground-truth shape.
    #[arg(long)]
    pub shape: Option<PathBuf>,
    #[arg(long)]
    pub n_points: Option<usize>,
    #[arg(long)]
    pub tau: Option<f64>,
}

#[derive(Debug, Args)]
pub struct AblateArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    #[arg(long, value_enum)]
    pub axis: AblationAxis,
    /// Comma-separated sweep values.
    #[arg(long, value_delimiter = ',', required = true)]
    pub values: Vec<usize>,
    #[arg(long)]
    pub mesh_res: Option<usize>,
}

#[derive(Debug, Args)]
pub struct BenchArgs {
    #[command(flatten)]
    pub shape: ShapeArgs,
    /// Comma-separated output resolutions, ascending.
    #[arg(long, value_delimiter = ',')]
    pub resolutions: Option<Vec<usize>>,
    #[arg(long)]
    pub repetitions: Option<usize>,
    /// Cost of one dense-baseline query.
    #[arg(long)]
    pub flops: Option<usize>,
}

impl ShapeArgs {
    fn apply(&self, cfg: &mut RunConfig) {
        if let Some(s) = &self.shape {
            cfg.shape = Some(s.clone());
        }
        if let Some(o) = self.order {
            cfg.fit.order = o;
        }
    }
}

impl Command {
    pub(crate) fn apply(&self, cfg: &mut RunConfig) {
        match self {
            Command::Fit(a) => {
                a.shape.apply(cfg);
                if let Some(n) = a.n_points {
                    cfg.sampling.n_total = n;
                }
            }
            Command::Extract(a) => {
                a.shape.apply(cfg);
                if let Some(r) = a.mesh_res {
                    cfg.extraction.mesh_res = r;
                }
                if let Some(k) = a.k {
                    cfg.extraction.k = k;
                }
                if let Some(f) = a.format {
                    cfg.mesh_format = f;
                }
            }
            Command::Metrics(a) => {
                if let Some(s) = &a.shape {
                    cfg.shape = Some(s.clone());
                }
                if let Some(n) = a.n_points {
                    cfg.metrics.n_points = n;
                }
                if let Some(t) = a.tau {
                    cfg.metrics.tau = t;
                }
            }
            Command::Ablate(a) => {
                a.shape.apply(cfg);
                if let Some(r) = a.mesh_res {
                    cfg.extraction.mesh_res = r;
                }
            }
            Command::Bench(a) => {
                a.shape.apply(cfg);
                if let Some(r) = &a.resolutions {
                    cfg.bench.resolutions = r.clone();
                }
                if let Some(n) = a.repetitions {
                    cfg.bench.repetitions = n;
                }
                if let Some(f) = a.flops {
                    cfg.bench.surrogate.flops_per_query = f;
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn definition_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn flags_override_config() {
        let cli = Cli::parse_from([
            "taylor",
            "--seed",
            "9",
            "--threads",
            "2",
            "extract",
            "--shape",
            "s.toml",
            "--mesh-res",
            "64",
            "--format",
            "ply",
        ]);
        assert_eq!(cli.seed, Some(9));
        assert_eq!(cli.threads, Some(2));
        let mut cfg = RunConfig::default();
        cli.command.apply(&mut cfg);
        assert_eq!(cfg.extraction.mesh_res, 64);
        assert_eq!(cfg.mesh_format, MeshFormat::Ply);
        assert_eq!(cfg.shape.as_deref(), Some(std::path::Path::new("s.toml")));
    }

    #[test]
    fn ablate_values_are_comma_separated() {
        let cli = Cli::parse_from(["taylor", "ablate", "--axis", "order", "--values", "0,1,2,3"]);
        match cli.command {
            Command::Ablate(a) => {
                assert_eq!(a.axis, AblationAxis::Order);
                assert_eq!(a.values, vec![0, 1, 2, 3]);
            }
            other => panic!("{other:?}"),
        }
        assert!(Cli::try_parse_from(["taylor", "ablate", "--axis", "depth", "--values", "1"]).is_err());
    }
}
