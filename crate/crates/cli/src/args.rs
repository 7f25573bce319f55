use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

#[derive(Debug, Parser)]
#[command(
    name = "trajprior",
    version,
    about = "Map priors from vehicle trajectories"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Filter and smooth a trajectory file.
    Ingest(IngestArgs),
    /// Rasterize trajectories into a density/direction heatmap.
    Rasterize(RasterizeArgs),
    /// K-means over resampled trajectories.
    Cluster(ClusterArgs),
    /// Frechet farthest-point sampling.
    Sample(SampleArgs),
    /// Align a prior feature map to a BEV feature map and fuse them.
    Fuse(FuseArgs),
    /// Score predicted polylines against ground-truth centerlines.
    Eval(EvalArgs),
    /// Generate a synthetic scene with trajectories and centerlines.
    Synth(SynthArgs),
    /// Write BEV, prior and parameter tensors for trying out `fuse`.
    FusionFixture(FixtureArgs),
}

#[derive(Debug, Args)]
pub struct GridArgs {
    /// Region of interest in meters: x0,x1,y0,y1.
    #[arg(long, default_value = "-50,50,-25,25")]
    pub roi: String,
    /// Cell size in meters: DX or DX,DY.
    #[arg(long, default_value = "0.5")]
    pub cell: String,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[arg(long)]
    pub input: PathBuf,
    /// jsonl or csv; inferred from the extension when omitted.
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long, default_value_t = 5.0)]
    pub min_length: f64,
    /// Odd moving-average window; 1 disables smoothing.
    #[arg(long, default_value_t = 5)]
    pub smooth_window: usize,
    #[arg(long, default_value_t = 5.0)]
    pub retention_ratio: f64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct RasterizeArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<String>,
    #[command(flatten)]
    pub grid: GridArgs,
    /// orientation folds opposite headings together; heading keeps them apart.
    #[arg(long, default_value = "orientation")]
    pub direction: String,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the density channel as a binary PGM image.
    #[arg(long, alias = "png")]
    pub pgm: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ClusterArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub k: usize,
    #[arg(long, default_value_t = 20)]
    pub resample: usize,
    #[arg(long, default_value_t = 1e-4)]
    pub tol: f64,
    #[arg(long, default_value_t = 100)]
    pub max_iter: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the cluster centers as query seeds.
    #[arg(long)]
    pub queries: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SampleArgs {
    #[arg(long)]
    pub input: PathBuf,
    #[arg(long)]
    pub format: Option<String>,
    #[arg(long)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// First pick; drawn from the seed when omitted.
    #[arg(long)]
    pub start_index: Option<usize>,
    /// Points per trajectory in the query seed export.
    #[arg(long, default_value_t = 20)]
    pub resample: usize,
    #[arg(long)]
    pub out: PathBuf,
    /// Write the selected trajectories, resampled, as query seeds.
    #[arg(long)]
    pub queries: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct FuseArgs {
    #[arg(long)]
    pub bev: PathBuf,
    #[arg(long)]
    pub prior: PathBuf,
    #[arg(long)]
    pub params: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Sidecar report; defaults to the output path with `.json` appended.
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Verify the analytic gradients by finite differences.
    #[arg(long)]
    pub check_grads: bool,
    /// Seed of the gradient-check instances.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of gradient-check instances.
    #[arg(long, default_value_t = 5)]
    pub grad_instances: u64,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Predicted polylines (trajectory JSONL/CSV or centerline JSONL).
    #[arg(long)]
    pub pred: PathBuf,
    #[arg(long)]
    pub format: Option<String>,
    /// Ground-truth centerline JSONL.
    #[arg(long)]
    pub gt: PathBuf,
    #[command(flatten)]
    pub grid: GridArgs,
    /// Rasterization line width in meters.
    #[arg(long, default_value_t = 0.75)]
    pub width: f64,
    /// Arc-length sampling step for the distance metric, meters.
    #[arg(long, default_value_t = 0.5)]
    pub step: f64,
    #[arg(long)]
    pub out: PathBuf,
    /// Also write the metrics as a one-row CSV.
    #[arg(long)]
    pub csv: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub lanes: usize,
    #[arg(long, default_value_t = 10)]
    pub per_lane: usize,
    /// Standard deviation of the positional noise, meters.
    #[arg(long, default_value_t = 0.0)]
    pub noise: f64,
    #[arg(long)]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct FixtureArgs {
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub hidden: usize,
    #[arg(long, default_value_t = 0.5)]
    pub noise: f64,
    #[command(flatten)]
    pub grid: GridArgs,
    #[arg(long)]
    pub out_dir: PathBuf,
}
