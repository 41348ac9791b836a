mod commands;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

#[derive(Parser, Debug)]
#[command(name = "jcg", version, about = "Classical Jaynes-Cummings-Gaudin toolkit")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArg {
    /// Model JSON: {"n", "s", "omega", "epsilon", "signs"}.
    #[arg(long)]
    pub config: PathBuf,
    /// Override the sign pattern, e.g. 1,-1,1.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub signs: Option<Vec<i8>>,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Bethe roots, pairing and Williamson type of a critical point.
    Bethe {
        #[command(flatten)]
        model: ModelArg,
    },
    /// Normal coordinates z, w and the quadratic generators K, L of a state.
    Normal {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        state: PathBuf,
    },
    /// Integrate a Hamiltonian flow and write the trajectory as CSV.
    Evolve {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        state: PathBuf,
        /// Coefficients of H_1..H_{n+1}; defaults to the physical Hamiltonian.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        coeffs: Option<Vec<f64>>,
        #[arg(long, allow_hyphen_values = true)]
        duration: f64,
        #[arg(long, default_value_t = 101)]
        samples: usize,
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reconstruct the state of a soliton at the multi-time t_1..t_{n+1}.
    Soliton {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        soliton: PathBuf,
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        times: Vec<f64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Separated variables of a soliton under the periodic flow, as CSV.
    Divisor {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        soliton: PathBuf,
        /// Times run over [-duration/2, duration/2].
        #[arg(long, default_value_t = 2.0 * std::f64::consts::PI)]
        duration: f64,
        #[arg(long, default_value_t = 401)]
        samples: usize,
        /// 1-based focus whose periodic flow is followed.
        #[arg(long, default_value_t = 1)]
        focus: usize,
        /// Fiber value c_j that fixes the flow coefficients.
        #[arg(long, default_value = "1e-8+0i", allow_hyphen_values = true)]
        c1: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Action integral over a vanishing cycle (A:j) or a polygon (B:file.json).
    Actions {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long)]
        state: PathBuf,
        #[arg(long)]
        cycle: String,
        #[arg(long, default_value_t = jcg_core::actions::DEFAULT_SAMPLES)]
        samples: usize,
    },
    /// Symplectic invariants of a focus-focus point.
    Invariants {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1)]
        focus: usize,
    },
    /// Integral of the periodic-time form around a loop in c_k.
    Monodromy {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1)]
        focus: usize,
        #[arg(long = "loop", default_value_t = 1)]
        loop_index: usize,
        /// Loop radius; defaults to rho_j.
        #[arg(long)]
        radius: Option<f64>,
        #[arg(long, default_value_t = 4096)]
        samples: usize,
    },
    /// Numerical in-out experiment near a focus-focus point.
    Inout {
        #[command(flatten)]
        model: ModelArg,
        #[arg(long, default_value_t = 1)]
        focus: usize,
        #[arg(long, default_value_t = 1e-2)]
        delta: f64,
        #[arg(long, allow_hyphen_values = true)]
        c1: String,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
    /// Built-in end-to-end checks.
    Reproduce {
        #[command(subcommand)]
        which: Reproduce,
    },
}

#[derive(Subcommand, Debug)]
pub enum Reproduce {
    /// One spin at s = 1, eps = 0: rho = 32, gamma = -pi/2.
    OneSpin,
    /// Divisor of the 3-spin soliton under the periodic flow.
    Fig3 {
        #[arg(long, default_value_t = 401)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::new().filter_or("JCG_LOG", "warn"))
        .format_timestamp(None)
        .init();
    let cli = Cli::parse();
    match commands::run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
