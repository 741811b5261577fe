use clap::{Args, Parser, Subcommand};
use std::path::PathBuf;
use twc_core::poisson::Mode;

#[derive(Debug, Parser)]
#[command(name = "twc", version, about = "Capacity regions of two-way channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub common: Common,
}

/// Flags shared by all subcommands.
#[derive(Debug, Args)]
pub struct Common {
    /// Write the CSV table here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Also write an 800×600 SVG plot of the regions.
    #[arg(long, global = true)]
    pub svg: Option<PathBuf>,
    /// Number of scalarization weights for the Shannon bounds.
    #[arg(long, global = true, default_value_t = 33)]
    pub weights: usize,
    /// Seed for optimizer restarts and sampling.
    #[arg(long, global = true, default_value_t = 0x7763)]
    pub seed: u64,
    /// Grid points per duty cycle for Poisson region sweeps.
    #[arg(long, global = true, default_value_t = 41)]
    pub grid: usize,
    /// Slot width in seconds for the Poisson discretization.
    #[arg(long, global = true, default_value_t = 1e-4)]
    pub delta: f64,
    /// Dark current intensities (comma separated for `poisson fig3`).
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambda0: Option<Vec<f64>>,
    /// Slot hit probabilities: exact or taylor.
    #[arg(long, global = true, default_value = "exact", value_parser = parse_mode)]
    pub mode: Mode,
    /// Show rates in the text report in bits instead of nats.
    #[arg(long, global = true)]
    pub bits: bool,
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    s.parse().map_err(|e: twc_core::Error| e.to_string())
}

/// Optional expected-cost constraints on the two senders.
#[derive(Debug, Args, Clone)]
pub struct Constraints {
    /// Per-symbol cost of sender 1 (comma separated).
    #[arg(long, value_delimiter = ',', requires = "budget1")]
    pub cost1: Option<Vec<f64>>,
    #[arg(long, requires = "cost1")]
    pub budget1: Option<f64>,
    /// Per-symbol cost of sender 2 (comma separated).
    #[arg(long, value_delimiter = ',', requires = "budget2")]
    pub cost2: Option<Vec<f64>>,
    #[arg(long, requires = "cost2")]
    pub budget2: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Shannon inner and outer bounds of a finite channel.
    Bounds {
        /// Channel file.
        channel: PathBuf,
        #[command(flatten)]
        constraints: Constraints,
    },
    /// Check the C1/C2 conditions and, given a structure, injectivity.
    IsdCheck {
        /// Channel file.
        channel: PathBuf,
        /// Structure file claimed to induce the channel.
        #[arg(long)]
        structure: Option<PathBuf>,
        /// Number of sampled joint inputs for the C2 probe.
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        /// C1 tolerance in nats.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
    /// Rectangular capacity of an injective semi-deterministic structure.
    Rectangle {
        /// Structure file.
        structure: PathBuf,
        #[command(flatten)]
        constraints: Constraints,
    },
    /// Closed-form capacities of continuous additive channels.
    Closedform {
        #[command(subcommand)]
        family: Closedform,
    },
    /// The discretized Poisson two-way channel.
    Poisson {
        #[command(subcommand)]
        what: Poisson,
        #[command(flatten)]
        params: PoissonArgs,
    },
}

#[derive(Debug, Subcommand)]
pub enum Closedform {
    /// Additive exponential noise with mean-amplitude budgets.
    Exp {
        #[arg(long, default_value_t = 1.0)]
        a1: f64,
        #[arg(long, default_value_t = 1.0)]
        a2: f64,
        #[arg(long, default_value_t = 1.0)]
        m1: f64,
        #[arg(long, default_value_t = 1.0)]
        m2: f64,
    },
    /// Additive Cauchy noise under the logarithmic constraint.
    Cauchy {
        #[arg(long, default_value_t = 2.0)]
        a1: f64,
        #[arg(long, default_value_t = 2.0)]
        a2: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma1: f64,
        #[arg(long, default_value_t = 1.0)]
        gamma2: f64,
    },
    /// Input-dependent Gaussian noise over a finite input support.
    Idg {
        /// Input support points, shared by both senders.
        #[arg(long, value_delimiter = ',', default_value = "0,1,2,4")]
        support: Vec<f64>,
        /// Input-independent noise variances at receivers 1 and 2.
        #[arg(long, value_delimiter = ',', default_value = "1,1")]
        sigma_hat_sq: Vec<f64>,
        /// Input-dependent noise variances at receivers 1 and 2.
        #[arg(long, value_delimiter = ',', default_value = "0.5,0.5")]
        sigma_tilde_sq: Vec<f64>,
        /// Bound on the mean input `E[X] <= budget`.
        #[arg(long)]
        budget: Option<f64>,
    },
}

#[derive(Debug, Args)]
pub struct PoissonArgs {
    /// Peak intensity.
    #[arg(long, global = true, default_value_t = 1.0)]
    pub a: f64,
    /// Duty-cycle budget of sender 1.
    #[arg(long, global = true, default_value_t = 0.3)]
    pub sigma1: f64,
    /// Duty-cycle budget of sender 2.
    #[arg(long, global = true, default_value_t = 0.2)]
    pub sigma2: f64,
}

#[derive(Debug, Subcommand)]
pub enum Poisson {
    /// One-way capacity for each sender's budget.
    Owc,
    /// Inner region sweep and outer rectangle.
    Region,
    /// Corner gaps and their large-dark-current asymptote.
    Gap,
    /// Regions, corners and gaps for several dark currents.
    Fig3,
}
