//! Command-line surface of the `damped-chain` binary.

mod plot;
mod run;

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand};
use damped_chain::io::{DanglingPolicy, InputFormat};

pub use run::run;

/// Analysis of damped Markov chains P_ε = (1 − ε)P₀ + εD.
#[derive(Debug, Parser)]
#[command(name = "damped-chain", version, about)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Edge list, matrix CSV or matrix JSON.
    #[arg(long)]
    pub input: PathBuf,

    /// Input format; guessed from the extension when omitted.
    #[arg(long)]
    pub format: Option<InputFormat>,

    /// `uniform` or a file with the damping weights. Defaults to the weights
    /// stored in a matrix JSON file, or uniform.
    #[arg(long)]
    pub damping: Option<String>,

    /// Solver tolerance for power iteration and series truncation.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,

    /// Handling of nodes without out-links in edge lists.
    #[arg(long, default_value = "reject")]
    pub dangling_policy: DanglingPolicy,

    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,

    /// Also write a CSV table for plotting.
    #[arg(long)]
    pub plot_data: Option<PathBuf>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed classes, periods, regime and ergodicity coefficients Δ_N.
    Structure {
        #[command(flatten)]
        common: Common,
        /// Largest N in the Δ_N table.
        #[arg(long, default_value_t = 12)]
        horizon: usize,
    },
    /// Stationary law of P_ε by the direct, power and series methods.
    Stationary {
        #[command(flatten)]
        common: Common,
        #[arg(
            long,
            conflicts_with = "epsilon_grid",
            required_unless_present = "epsilon_grid"
        )]
        epsilon: Option<f64>,
        /// Comma-separated list of ε values.
        #[arg(long, value_delimiter = ',')]
        epsilon_grid: Vec<f64>,
        #[arg(long, default_value_t = damped_chain::stationary::DEFAULT_MAX_ITER)]
        max_iter: usize,
    },
    /// Spectrum of P₀ and the power-series expansion of π_ε.
    Expand {
        #[command(flatten)]
        common: Common,
        /// Highest power of ε.
        #[arg(long, visible_alias = "epsilon-order", default_value_t = damped_chain::spectral::DEFAULT_ORDER)]
        order: usize,
        /// Compare the truncated series with the exact π_ε at this ε.
        #[arg(long)]
        epsilon: Option<f64>,
        #[arg(long, default_value_t = damped_chain::spectral::DEFAULT_CLUSTER_TOL)]
        cluster_tol: f64,
    },
    /// Deviation and convergence bounds against the exact quantities.
    Bounds {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
        /// One of 1, 2, 5, 6, 7; all applicable bounds when omitted.
        #[arg(long)]
        theorem: Option<TheoremArg>,
        /// Block length N; the smallest contracting block when omitted.
        #[arg(long = "coupling-N")]
        coupling_n: Option<usize>,
        /// Largest n in the convergence tables.
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        /// Initial distribution: uniform, damping, point:K or a file.
        #[arg(long, default_value = "uniform")]
        initial: InitialSpec,
        /// Tail constant C; estimated when omitted.
        #[arg(long, requires = "lambda")]
        constant_c: Option<f64>,
        /// Tail rate λ; estimated when omitted.
        #[arg(long, requires = "constant_c")]
        lambda: Option<f64>,
        /// Horizon of the scan that estimates C and λ.
        #[arg(long, default_value_t = damped_chain::bounds::DEFAULT_SCAN_HORIZON)]
        scan_horizon: usize,
    },
    /// Monte-Carlo tail of the coupling time against the geometric bound.
    CouplingSim {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
        #[arg(long)]
        seed: u64,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 30)]
        horizon: usize,
        #[arg(long = "coupling-N", default_value_t = 1)]
        coupling_n: usize,
        #[arg(long, default_value = "uniform")]
        initial: InitialSpec,
    },
    /// Trajectory of P_ε against the mixture limit π(εn).
    Triangular {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        epsilon: f64,
        /// `a:b`, `a:b:step` or a comma-separated list; defaults to 0:round(3/ε).
        #[arg(long)]
        n_grid: Option<NGrid>,
        #[arg(long, default_value = "point:1")]
        initial: InitialSpec,
        /// Block length for the bound; the smallest contracting block when omitted.
        #[arg(long = "coupling-N")]
        coupling_n: Option<usize>,
    },
    /// Every analysis in one report.
    Report {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.15)]
        epsilon: f64,
        #[arg(long, visible_alias = "epsilon-order", default_value_t = damped_chain::spectral::DEFAULT_ORDER)]
        order: usize,
        /// Runs the Monte-Carlo section when given.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long, default_value_t = 100_000)]
        trials: usize,
        #[arg(long, default_value_t = 50)]
        horizon: usize,
        #[arg(long = "coupling-N")]
        coupling_n: Option<usize>,
        #[arg(long, default_value = "uniform")]
        initial: InitialSpec,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TheoremArg {
    T1,
    T2,
    T5,
    T6,
    T7,
}

impl FromStr for TheoremArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "1" => Ok(Self::T1),
            "2" => Ok(Self::T2),
            "5" => Ok(Self::T5),
            "6" => Ok(Self::T6),
            "7" => Ok(Self::T7),
            _ => Err(format!("theorem must be 1, 2, 5, 6 or 7, not `{s}`")),
        }
    }
}

impl TheoremArg {
    pub fn number(&self) -> u8 {
        match self {
            Self::T1 => 1,
            Self::T2 => 2,
            Self::T5 => 5,
            Self::T6 => 6,
            Self::T7 => 7,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum InitialSpec {
    Uniform,
    Damping,
    /// 1-based state.
    Point(usize),
    File(PathBuf),
}

impl FromStr for InitialSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "uniform" => Ok(Self::Uniform),
            "damping" => Ok(Self::Damping),
            _ => match s.strip_prefix("point:") {
                Some(k) => match k.parse::<usize>() {
                    Ok(k) if k >= 1 => Ok(Self::Point(k)),
                    _ => Err(format!("`{k}` is not a 1-based state")),
                },
                None => Ok(Self::File(PathBuf::from(s))),
            },
        }
    }
}

impl std::fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Uniform => f.write_str("uniform"),
            Self::Damping => f.write_str("damping"),
            Self::Point(k) => write!(f, "point:{k}"),
            Self::File(p) => write!(f, "{}", p.display()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NGrid(pub Vec<usize>);

impl FromStr for NGrid {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let num = |t: &str| {
            t.trim()
                .parse::<usize>()
                .map_err(|_| format!("`{t}` is not a non-negative integer"))
        };
        if s.contains(':') {
            let parts: Vec<&str> = s.split(':').collect();
            let (a, b, step) = match parts.as_slice() {
                [a, b] => (num(a)?, num(b)?, 1),
                [a, b, c] => (num(a)?, num(b)?, num(c)?),
                _ => return Err(format!("bad range `{s}`")),
            };
            if step == 0 || a > b {
                return Err(format!("bad range `{s}`"));
            }
            Ok(Self((a..=b).step_by(step).collect()))
        } else {
            Ok(Self(s.split(',').map(num).collect::<Result<_, _>>()?))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_grids_and_initials() {
        assert_eq!("2:5".parse::<NGrid>().unwrap().0, vec![2, 3, 4, 5]);
        assert_eq!("0:10:5".parse::<NGrid>().unwrap().0, vec![0, 5, 10]);
        assert_eq!("1,7".parse::<NGrid>().unwrap().0, vec![1, 7]);
        assert!("5:2".parse::<NGrid>().is_err());
        assert_eq!(
            "point:3".parse::<InitialSpec>().unwrap(),
            InitialSpec::Point(3)
        );
        assert!("point:0".parse::<InitialSpec>().is_err());
        assert_eq!("6".parse::<TheoremArg>().unwrap(), TheoremArg::T6);
        assert!("3".parse::<TheoremArg>().is_err());
    }

    #[test]
    fn clap_definition_is_consistent() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
    }
}
