use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(name = "lle-spectra", version, about = "LLE spectra, kernels and theory predictions on sampled manifolds")]
pub struct Cli {
    /// Worker threads (default: all cores). LLE_SPECTRA_THREADS takes precedence.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample a point cloud and write it as CSV with a JSON sidecar.
    Generate(GenerateArgs),
    /// Smallest eigenvalues of the LLE generator.
    Spectrum(SpectrumArgs),
    /// Kernel values over one neighborhood.
    Kernel(KernelArgs),
    /// Local covariance spectra at selected centers.
    Covariance(CovarianceArgs),
    /// LLE embedding coordinates.
    Embed(EmbedArgs),
    /// LLE at ρ ∈ {−5, 3, 8} and diffusion maps on the same cloud.
    Compare(CompareArgs),
    /// Closed-form spectrum predictions as CSV.
    Theory(TheoryArgs),
    /// Rerun a command from its manifest and compare output hashes.
    Replay(ReplayArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplerName {
    Circle,
    Sphere,
    Torus,
    FlatTorus,
    SheppLogan,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeName {
    Uniform,
    Nonuniform,
    Perturbed,
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    pub sampler: SamplerName,
    #[arg(long)]
    pub n: usize,
    #[arg(long, value_enum, default_value = "uniform")]
    pub mode: ModeName,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sphere radius.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Detector count for the tomography curve.
    #[arg(long, default_value_t = 128)]
    pub p: usize,
    #[arg(long, default_value = "cloud.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args, Clone)]
#[group(required = true, multiple = false)]
pub struct Neighborhood {
    /// Closed ε-ball radius.
    #[arg(long)]
    pub eps: Option<f64>,
    /// K nearest neighbors.
    #[arg(long)]
    pub knn: Option<usize>,
    /// ε chosen so that points have about this many neighbors.
    #[arg(long)]
    pub eps_count: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct CloudInput {
    /// Point cloud CSV; a sibling `.json` sidecar supplies d, metric and parameters.
    #[arg(long)]
    pub cloud: PathBuf,
    /// Intrinsic dimension (overrides the sidecar).
    #[arg(long)]
    pub d: Option<usize>,
}

#[derive(Debug, Args, Clone)]
pub struct SolverArgs {
    /// Residual tolerance relative to ‖A‖∞.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 500)]
    pub max_iter: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum TheoryName {
    CircleLb,
    CircleFourthOrder,
    Sphere2,
}

impl TheoryName {
    pub fn key(self) -> &'static str {
        match self {
            TheoryName::CircleLb => "circle-lb",
            TheoryName::CircleFourthOrder => "circle-fourth-order",
            TheoryName::Sphere2 => "sphere2",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Rescale {
    /// 2(d+2)/ε² (ε-ball) or 2(d+2) (KNN, already divided by radii²).
    Lb,
    /// 280/ε⁴ on the circle.
    FourthOrder,
    None,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub input: CloudInput,
    #[command(flatten)]
    pub nbhd: Neighborhood,
    /// Regularization order; `inf` means no regularization.
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    #[arg(long)]
    pub m: usize,
    #[arg(long, value_enum)]
    pub theory: Option<TheoryName>,
    /// Radius for the sphere prediction.
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Default: fourth-order for the fourth-order prediction, lb otherwise.
    #[arg(long, value_enum)]
    pub rescale: Option<Rescale>,
    #[command(flatten)]
    pub solver: SolverArgs,
    /// Also write W in Matrix Market format.
    #[arg(long)]
    pub dump_w: Option<PathBuf>,
    #[arg(long, default_value = "spectrum.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct KernelArgs {
    #[command(flatten)]
    pub input: CloudInput,
    #[command(flatten)]
    pub nbhd: Neighborhood,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    /// Zero-based center index.
    #[arg(long)]
    pub center: usize,
    #[arg(long, default_value = "kernel.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CovarianceArgs {
    #[command(flatten)]
    pub input: CloudInput,
    #[arg(long, required_unless_present = "eps_count", conflicts_with = "eps_count")]
    pub eps: Option<f64>,
    #[arg(long)]
    pub eps_count: Option<usize>,
    /// Comma-separated zero-based centers.
    #[arg(long, value_delimiter = ',', required_unless_present = "center_count")]
    pub centers: Vec<usize>,
    /// Evenly spaced centers, as an alternative to --centers.
    #[arg(long, conflicts_with = "centers")]
    pub center_count: Option<usize>,
    #[arg(long, default_value = "covariance.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct EmbedArgs {
    #[command(flatten)]
    pub input: CloudInput,
    #[command(flatten)]
    pub nbhd: Neighborhood,
    #[arg(long, allow_hyphen_values = true)]
    pub rho: f64,
    /// Embedding dimension ℓ.
    #[arg(long, default_value_t = 2)]
    pub dim: usize,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "embedding.csv")]
    pub out: PathBuf,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[command(flatten)]
    pub input: CloudInput,
    #[arg(long, default_value_t = 20, conflicts_with = "eps")]
    pub eps_count: usize,
    #[arg(long)]
    pub eps: Option<f64>,
    /// Diffusion-map bandwidth (default: median 10th-neighbor distance).
    #[arg(long)]
    pub sigma: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[command(flatten)]
    pub solver: SolverArgs,
    #[arg(long, default_value = "compare")]
    pub out_dir: PathBuf,
}

#[derive(Debug, Args)]
pub struct TheoryArgs {
    pub name: TheoryName,
    #[arg(long)]
    pub m: usize,
    #[arg(long, default_value_t = 1.0)]
    pub radius: f64,
    /// Write to a file instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReplayArgs {
    pub manifest: PathBuf,
}
