use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use dispersym_core::recursion::{MAX_ORDER, MIN_ORDER};

#[derive(Parser, Debug)]
#[command(name = "dispersym", version, about = "Symbolic and numerical checks for higher-order dispersive operators")]
pub struct Cli {
    #[arg(long, value_enum, default_value_t = Format::Json, global = true)]
    pub format: Format,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Necessary conditions for order k, or the gauged corollary set.
    Conditions {
        #[arg(long, value_parser = order_parser())]
        k: u32,
        /// Allow a D^{k-1} coefficient and gauge it away first.
        #[arg(long)]
        gauged: bool,
    },
    /// Recursion tables for levels 0..=m.
    Recursion {
        #[arg(long, value_parser = order_parser())]
        k: u32,
        /// Last level; defaults to k-2.
        #[arg(long)]
        m: Option<u32>,
        /// Also write the JSON report to this file.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Mechanical verification of the reduction identities.
    Verify(VerifyArgs),
    /// Evaluate the conditions on sampled or expression coefficients.
    Check {
        #[arg(long, value_parser = order_parser())]
        k: u32,
        #[arg(long)]
        coeffs: PathBuf,
        #[arg(long)]
        gauged: bool,
        /// `q=theta`, replacing the exponent of condition q. Repeatable.
        #[arg(long = "theta-override")]
        theta_override: Vec<String>,
    },
    /// Run a spectral experiment from a JSON config.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Write the main table as CSV to this file.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Print the symbols of one verification stage.
    DumpSymbols {
        #[arg(long, value_parser = clap::value_parser!(u32).range(4..=6))]
        k: u32,
        #[arg(long)]
        stage: Option<u32>,
        /// Dump the self-adjoint reduction instead of a stage (k = 5, 6).
        #[arg(long = "appendix-a", visible_alias = "selfadjoint")]
        selfadjoint: bool,
        #[arg(long)]
        repaired: bool,
    },
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u32).range(4..=6))]
    pub k: u32,
    #[arg(long, conflicts_with = "all")]
    pub stage: Option<u32>,
    #[arg(long)]
    pub all: bool,
    /// Check the self-adjoint reduction instead of the stages (k = 5, 6).
    #[arg(long = "appendix-a", visible_alias = "selfadjoint", conflicts_with_all = ["stage", "all"])]
    pub selfadjoint: bool,
    /// Use the corrected k = 6 formulas.
    #[arg(long)]
    pub repaired: bool,
    /// Also perturb every target coefficient and count detections.
    #[arg(long)]
    pub faults: bool,
}

fn order_parser() -> clap::builder::RangedI64ValueParser<u32> {
    clap::value_parser!(u32).range(MIN_ORDER as i64..=MAX_ORDER as i64)
}
