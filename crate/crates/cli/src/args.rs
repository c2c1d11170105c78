//! Command-line grammar.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

/// Key rates, critical transmissions and Monte Carlo checks for the m-state
/// sifting-less QKD protocol.
#[derive(Debug, Parser)]
#[command(name = "siftless", version, about)]
pub struct Cli {
    /// Worker threads for parallel sweeps (default: available parallelism).
    #[arg(long, global = true, env = "SIFTLESS_WORKERS")]
    pub workers: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Information rates and the per-photon-number attack table.
    Info(InfoArgs),
    /// Net key rate over a log-spaced transmission grid.
    Keyrate(KeyrateArgs),
    /// Critical transmission below which no key survives.
    Tc(TcArgs),
    /// QBER at which the single-photon key vanishes.
    Qber(QberArgs),
    /// Pulse-level Monte Carlo simulation.
    Simulate(SimulateArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Protocol {
    Siftless,
    Bb84,
}

impl Protocol {
    pub fn as_str(self) -> &'static str {
        match self {
            Protocol::Siftless => "siftless",
            Protocol::Bb84 => "bb84",
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct OutputArgs {
    /// Output format.
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    /// Output file (default: stdout).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Args)]
pub struct InfoArgs {
    /// Number of polarization states (m ≥ 3).
    #[arg(long, value_parser = parse_states)]
    pub m: usize,
    /// Largest photon number listed in the table.
    #[arg(long, default_value_t = 30)]
    pub max_n: usize,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct KeyrateArgs {
    /// Number of polarization states (m ≥ 3); required for the siftless protocol.
    #[arg(long, value_parser = parse_states)]
    pub m: Option<usize>,
    /// Mean photon number per pulse.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    /// Maximize the key rate over μ at every transmission.
    #[arg(long)]
    pub optimize_mu: bool,
    #[arg(long, value_enum, default_value = "siftless")]
    pub protocol: Protocol,
    /// Smallest transmission of the grid.
    #[arg(long, default_value_t = 1e-5)]
    pub t_min: f64,
    /// Largest transmission of the grid.
    #[arg(long, default_value_t = 1.0)]
    pub t_max: f64,
    /// Number of log-spaced grid points.
    #[arg(long, default_value_t = 64)]
    pub points: usize,
    /// Lower end of the μ search interval.
    #[arg(long, default_value_t = siftless_core::keyrate::MU_MIN)]
    pub mu_min: f64,
    /// Upper end of the μ search interval.
    #[arg(long, default_value_t = siftless_core::keyrate::MU_MAX)]
    pub mu_max: f64,
    /// Also write a gnuplot script that plots the data file.
    #[arg(long)]
    pub gnuplot: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct TcArgs {
    /// Number of polarization states (m ≥ 3).
    #[arg(long, value_parser = parse_states)]
    pub m: usize,
    /// Mean photon number per pulse.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    /// Use the small-μ asymptotic form instead of the exact expression.
    #[arg(long)]
    pub approx: bool,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
#[group(required = true, multiple = false)]
pub struct QberTargetArgs {
    /// Number of polarization states (m ≥ 3).
    #[arg(long, value_parser = parse_states)]
    pub m: Option<usize>,
    /// Continuous limit m → ∞.
    #[arg(long)]
    pub continuous: bool,
}

#[derive(Debug, Clone, Args)]
pub struct QberArgs {
    #[command(flatten)]
    pub target: QberTargetArgs,
    #[command(flatten)]
    pub output: OutputArgs,
}

#[derive(Debug, Clone, Args)]
pub struct SimulateArgs {
    /// Number of polarization states (m ≥ 3).
    #[arg(long, value_parser = parse_states)]
    pub m: usize,
    /// Mean photon number per pulse.
    #[arg(long, default_value_t = 0.1)]
    pub mu: f64,
    /// Channel transmission.
    #[arg(long = "T", default_value_t = 1.0)]
    pub transmission: f64,
    /// Number of pulses.
    #[arg(long, default_value_t = 1_000_000)]
    pub pulses: u64,
    /// RNG seed.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Channel QBER.
    #[arg(long, default_value_t = 0.0)]
    pub epsilon: f64,
    /// Pulses per independently seeded batch.
    #[arg(long, default_value_t = siftless_core::montecarlo::DEFAULT_BATCH_SIZE)]
    pub batch_size: u64,
    /// Write every pulse to this CSV file.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    #[command(flatten)]
    pub output: OutputArgs,
}

/// Parses the number of states, rejecting m < 3 with a message naming the
/// constraint.
pub fn parse_states(s: &str) -> Result<usize, String> {
    let m: usize = s
        .parse()
        .map_err(|_| format!("`{s}` is not a non-negative integer"))?;
    if m < 3 {
        return Err(format!(
            "the protocol needs m ≥ 3 polarization states, got m = {m}"
        ));
    }
    Ok(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use clap::CommandFactory;

    #[test]
    fn grammar_is_consistent() {
        Cli::command().debug_assert();
    }

    #[test]
    fn states_parser() {
        assert_eq!(parse_states("3"), Ok(3));
        assert!(parse_states("2").unwrap_err().contains("m ≥ 3"));
        assert!(parse_states("x").is_err());
    }

    #[test]
    fn qber_needs_exactly_one_target() {
        assert!(Cli::try_parse_from(["siftless", "qber"]).is_err());
        assert!(Cli::try_parse_from(["siftless", "qber", "--m", "4", "--continuous"]).is_err());
        assert!(Cli::try_parse_from(["siftless", "qber", "--continuous"]).is_ok());
    }
}
