use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use memcons_core::Family;

#[derive(Debug, Parser)]
#[command(
    name = "memcons",
    version,
    about = "H2 robustness of consensus networks with memory"
)]
pub struct Cli {
    /// Worker threads (default: all cores). Results do not depend on it.
    #[arg(long, global = true, value_name = "N")]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Build or load a graph and report its Laplacian spectrum.
    Graph(GraphCmd),
    /// Consensus region over an (alpha, beta) grid at fixed depth.
    Region(RegionCmd),
    /// Squared H2 norm of the disagreement dynamics.
    H2(H2Cmd),
    /// Monte Carlo estimate of the steady-state mean-square deviation.
    Simulate(SimulateCmd),
    /// Best memory depth at one beta, or across a beta sweep.
    OptimalDepth(DepthCmd),
    /// Grid search with local refinement for the best (alpha, beta).
    OptimalParams(ParamsCmd),
    /// Data series for the standard plots.
    Figure(FigureCmd),
}

/// A family name with an optional ring half-degree baked in (`ring2`).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FamilyArg {
    pub family: Family,
    pub d: Option<usize>,
}

pub fn parse_family(s: &str) -> Result<FamilyArg, String> {
    let lower = s.to_ascii_lowercase();
    if let Some(d) = lower
        .strip_prefix("ring")
        .and_then(|r| r.parse::<usize>().ok())
    {
        return Ok(FamilyArg {
            family: Family::RingLattice,
            d: Some(d),
        });
    }
    lower
        .parse::<Family>()
        .map(|family| FamilyArg { family, d: None })
        .map_err(|e| e.to_string())
}

#[derive(Debug, Clone, Args)]
pub struct GraphArgs {
    /// complete | star | chain | ring_lattice | ring<d> | barabasi_albert
    #[arg(long, value_parser = parse_family, conflicts_with = "graph_file")]
    pub family: Option<FamilyArg>,
    /// Number of agents.
    #[arg(long)]
    pub n: Option<usize>,
    /// Ring lattice half-degree (each vertex links to d neighbours per side).
    #[arg(long)]
    pub d: Option<usize>,
    /// Barabasi-Albert edges per arriving vertex.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// RNG seed; required for random graphs and simulation.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Edge list file: header `n m`, then `i j w` lines (1-based).
    #[arg(long, value_name = "PATH")]
    pub graph_file: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct BetaArgs {
    /// Coupling gain beta (absolute).
    #[arg(long, conflicts_with = "beta_rel")]
    pub beta: Option<f64>,
    /// Coupling gain relative to the memoryless bound: beta = x * 2/lambda_n.
    #[arg(long, value_name = "X")]
    pub beta_rel: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Args)]
pub struct OutArgs {
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
    /// Output file (default: stdout).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GraphCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct RegionCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Memory depth.
    #[arg(long, default_value_t = 1)]
    pub theta: usize,
    /// Interior alpha grid points in (0, 1).
    #[arg(long, default_value_t = 50)]
    pub alpha_steps: usize,
    /// beta grid points over (0, 4/lambda_n].
    #[arg(long, default_value_t = 50)]
    pub beta_steps: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum H2MethodArg {
    /// Closed form for alpha in {0, 1/2, 1}, reduced system otherwise.
    Auto,
    TableIi,
    ClosedSmallTheta,
    HalfAlphaCf,
    Memoryless,
    PureMemory,
    LyapunovOracle,
    GramianBruteforce,
    LimitHalfAlpha,
}

#[derive(Debug, Args)]
pub struct H2Cmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Memory factor alpha in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[command(flatten)]
    pub beta: BetaArgs,
    /// Memory depth.
    #[arg(long, default_value_t = 1)]
    pub theta: usize,
    #[arg(long, value_enum, default_value_t = H2MethodArg::Auto)]
    pub method: H2MethodArg,
    /// Series length for gramian-bruteforce (time steps).
    #[arg(long, default_value_t = 5000)]
    pub horizon: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimArgs {
    /// Independent noise realisations.
    #[arg(long, default_value_t = 64)]
    pub trials: usize,
    /// Time steps per trial.
    #[arg(long, default_value_t = 20000)]
    pub horizon: usize,
    /// Leading time steps discarded from the average.
    #[arg(long, default_value_t = 2000)]
    pub burn_in: usize,
}

#[derive(Debug, Args)]
pub struct SimulateCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Memory factor alpha in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[command(flatten)]
    pub beta: BetaArgs,
    /// Memory depth.
    #[arg(long, default_value_t = 1)]
    pub theta: usize,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Also write `t,disagreement` for a noise-free run from a seeded
    /// random history over the same horizon.
    #[arg(long, value_name = "PATH")]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum DepthMethodArg {
    Analytic,
    Simulate,
}

#[derive(Debug, Args)]
pub struct DepthCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Memory factor alpha in [0, 1].
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    /// Fixed beta; without it, sweeps beta over (0, 2/lambda_n).
    #[command(flatten)]
    pub beta: BetaArgs,
    /// Largest memory depth considered.
    #[arg(long, default_value_t = 10)]
    pub theta_max: usize,
    /// Interior beta grid points for the sweep.
    #[arg(long, default_value_t = 60)]
    pub beta_steps: usize,
    #[arg(long, value_enum, default_value_t = DepthMethodArg::Analytic)]
    pub method: DepthMethodArg,
    #[command(flatten)]
    pub sim: SimArgs,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Args)]
pub struct ParamsCmd {
    #[command(flatten)]
    pub graph: GraphArgs,
    /// Memory depth.
    #[arg(long, default_value_t = 1)]
    pub theta: usize,
    /// alpha grid points over [0.02, 0.98].
    #[arg(long, default_value_t = 60)]
    pub alpha_steps: usize,
    /// beta grid points over [0.02, 0.98] * 2/lambda_n.
    #[arg(long, default_value_t = 60)]
    pub beta_steps: usize,
    /// Local refinement rounds.
    #[arg(long, default_value_t = 4)]
    pub refine: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FigureId {
    /// Optimal depth over (n, beta) at alpha = 1/2.
    Fig1,
    /// Metric against alpha on K, C2 and P.
    Fig2,
    /// Metric against depth at alpha = 3/4.
    Fig3,
    /// (alpha, beta) surface and optimum on C2 at depth 1.
    Fig4,
    /// Optimal depth over (alpha, beta) on a Barabasi-Albert graph.
    Fig5,
}

#[derive(Debug, Args)]
pub struct FigureCmd {
    #[arg(long, value_enum)]
    pub id: FigureId,
    /// fig1 only: restrict to one deterministic family (default: all six).
    #[arg(long, value_parser = parse_family)]
    pub family: Option<FamilyArg>,
    /// Graph size; the largest size for fig1
    /// (defaults: fig1 20, fig2 15, fig3 20, fig4 20, fig5 50).
    #[arg(long)]
    pub n: Option<usize>,
    /// Largest memory depth.
    #[arg(long, default_value_t = 10)]
    pub theta_max: usize,
    /// alpha grid points; fig4 and fig5 use it for both axes
    /// (defaults: fig2 49, fig4 60, fig5 30).
    #[arg(long)]
    pub alpha_steps: Option<usize>,
    /// fig1 beta grid points (default 100).
    #[arg(long)]
    pub beta_steps: Option<usize>,
    /// fig4 refinement rounds.
    #[arg(long, default_value_t = 4)]
    pub refine: usize,
    /// fig5 Barabasi-Albert edges per arriving vertex.
    #[arg(long, default_value_t = 2)]
    pub m: usize,
    /// fig5 graph seed (required for fig5).
    #[arg(long)]
    pub seed: Option<u64>,
    #[command(flatten)]
    pub out: OutArgs,
}
