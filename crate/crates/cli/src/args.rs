use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

#[derive(Debug, Parser)]
#[command(
    name = "exitspec",
    version,
    about = "Exit-time moment spectra of model-space balls, comparison spaces and mesh checks"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Isoperimetric exit-moment spectrum of a model-space ball.
    Spectrum(SpectrumArgs),
    /// Build a comparison space from w, g, h and report W(s) and its spectrum.
    CompareSpace(CompareSpaceArgs),
    /// Check the balance condition and the key-lemma sign on a grid.
    Balance(BalanceArgs),
    /// Compare the spectra of two model spaces with ordered curvature.
    Intrinsic(IntrinsicArgs),
    /// Monte-Carlo exit moments of the radial diffusion.
    Simulate(SimulateArgs),
    /// Solve the hierarchy on an extrinsic ball of a surface mesh.
    MeshVerify(MeshVerifyArgs),
    /// Run the built-in verification battery.
    Suite(SuiteArgs),
    /// Parse a report written by this tool and summarise it.
    ReadReport(ReadReportArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Spectrum(_) => "spectrum",
            Command::CompareSpace(_) => "compare-space",
            Command::Balance(_) => "balance",
            Command::Intrinsic(_) => "intrinsic",
            Command::Simulate(_) => "simulate",
            Command::MeshVerify(_) => "mesh-verify",
            Command::Suite(_) => "suite",
            Command::ReadReport(_) => "read-report",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Args)]
pub struct OutputArgs {
    /// key=value config file; flags given on the command line win.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output file (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Also write the JSON report here.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ModelArgs {
    /// Constant curvature b of the space form Q_b.
    #[arg(long = "b", allow_negative_numbers = true)]
    pub b: Option<f64>,
    /// Custom warping function w(r).
    #[arg(long = "w")]
    pub w: Option<String>,
    /// Right end of the domain of a custom w.
    #[arg(long = "w-max")]
    pub w_max: Option<f64>,
    #[arg(long = "m", default_value_t = 2)]
    pub m: usize,
}

#[derive(Debug, Args)]
pub struct BoundArgs {
    /// Tangency bound g(r).
    #[arg(long = "g", default_value = "1")]
    pub g: String,
    /// Mean-convexity bound h(r).
    #[arg(long = "h", default_value = "0")]
    pub h: String,
    #[arg(long, value_enum, default_value_t = SideArg::Below)]
    pub side: SideArg,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SideArg {
    Below,
    Above,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DirectionArg {
    Le,
    Ge,
}

#[derive(Debug, Args)]
pub struct SpectrumArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long = "K", default_value_t = 5)]
    pub max_order: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct CompareSpaceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub bounds: BoundArgs,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long = "K", default_value_t = 3)]
    pub max_order: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    /// Number of samples of W(s).
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct BalanceArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[command(flatten)]
    pub bounds: BoundArgs,
    #[arg(long = "R")]
    pub radius: f64,
    /// Require a strictly positive margin.
    #[arg(long)]
    pub strict: bool,
    #[arg(long, default_value_t = 512)]
    pub grid: usize,
    /// Highest order for the lemma sign check.
    #[arg(long = "lemma-K", default_value_t = 3)]
    pub lemma_order: usize,
    #[arg(long, default_value_t = 1e-12)]
    pub tol: f64,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct IntrinsicArgs {
    #[arg(long = "N-b", allow_negative_numbers = true)]
    pub ambient_b: Option<f64>,
    #[arg(long = "N-w")]
    pub ambient_w: Option<String>,
    #[arg(long = "N-w-max")]
    pub ambient_w_max: Option<f64>,
    #[arg(long = "bound-b", allow_negative_numbers = true)]
    pub bound_b: Option<f64>,
    #[arg(long = "bound-w")]
    pub bound_w: Option<String>,
    #[arg(long = "bound-w-max")]
    pub bound_w_max: Option<f64>,
    #[arg(long = "m", default_value_t = 2)]
    pub m: usize,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long = "K", default_value_t = 5)]
    pub max_order: usize,
    #[arg(long, value_enum, default_value_t = DirectionArg::Le)]
    pub direction: DirectionArg,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long, default_value_t = 0.0)]
    pub r0: f64,
    #[arg(long, default_value_t = 1e-4)]
    pub dt: f64,
    #[arg(long, default_value_t = 100_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long = "K", default_value_t = 2)]
    pub max_order: usize,
    /// Per-path step limit.
    #[arg(long = "step-budget")]
    pub step_budget: Option<u64>,
    /// Skip the quadrature comparison columns.
    #[arg(long = "no-compare")]
    pub no_compare: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct MeshVerifyArgs {
    /// OFF or OBJ file.
    #[arg(long)]
    pub mesh: Option<PathBuf>,
    #[arg(long = "mesh-format")]
    pub mesh_format: Option<String>,
    /// Built-in surface, e.g. catenoid:vmax=1.6,segments=120.
    #[arg(long)]
    pub generate: Option<String>,
    #[arg(long = "pole-index")]
    pub pole_index: Option<usize>,
    /// Pole nearest to x,y,z.
    #[arg(long = "pole-point", allow_hyphen_values = true)]
    pub pole_point: Option<String>,
    #[arg(long = "R")]
    pub radius: f64,
    #[arg(long = "K", default_value_t = 3)]
    pub max_order: usize,
    #[arg(long = "solver-tol", default_value_t = 1e-12)]
    pub solver_tol: f64,
    /// Relative slack for the verdicts (calibrated on a flat disk if absent).
    #[arg(long = "mesh-tol")]
    pub mesh_tol: Option<f64>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct SuiteArgs {
    /// Monte-Carlo paths per configuration.
    #[arg(long, default_value_t = 20_000)]
    pub paths: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    /// Skip the Monte-Carlo checks.
    #[arg(long = "skip-mc")]
    pub skip_mc: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Args)]
pub struct ReadReportArgs {
    pub path: PathBuf,
}
