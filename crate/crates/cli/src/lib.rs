//! Command-line front end for `stochorder`: exact evaluation, Monte Carlo
//! estimation, identity checks, monomial enumeration and grid export.
//!
//! Exit codes: 0 success, 2 invalid input, 3 size ceiling, 4 verification
//! failure.

pub mod commands;
pub mod error;
pub mod report;

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use stochorder::{OrderKind, ScalarMode};

pub use commands::{Context, EstimateArgs, Outcome};
pub use error::CliError;
pub use report::{Report, RunManifest};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Float,
    Rational,
}

impl From<ModeArg> for ScalarMode {
    fn from(m: ModeArg) -> Self {
        match m {
            ModeArg::Float => ScalarMode::Float64,
            ModeArg::Rational => ScalarMode::ExactRational,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OrderArg {
    Fosd,
    Mlr,
}

impl From<OrderArg> for OrderKind {
    fn from(o: OrderArg) -> Self {
        match o {
            OrderArg::Fosd => OrderKind::Fosd,
            OrderArg::Mlr => OrderKind::Mlr,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Table,
}

#[derive(Debug, Parser)]
#[command(name = "stochorder", version, about = "Dominance and comparability probabilities on the probability simplex")]
pub struct Cli {
    /// Arithmetic mode; defaults to rational when any input contains '/'.
    #[arg(long, global = true, value_enum)]
    pub mode: Option<ModeArg>,
    /// Output format; each subcommand has its own default.
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Write the primary output here instead of stdout.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Simplex size.
    #[arg(long, global = true, default_value = "1", allow_hyphen_values = true)]
    pub u: String,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form probability that a uniform point dominates --point.
    Exact {
        #[arg(long, value_enum)]
        order: OrderArg,
        /// Comma-separated coordinates, decimals or fractions.
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        /// Optional dimension check: the point must have n+1 coordinates.
        #[arg(long)]
        n: Option<usize>,
        /// Upper bound on the last coordinate (MLR only).
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
    },
    /// Monte Carlo estimate of a comparability or dominance probability.
    Estimate {
        #[arg(long, value_enum)]
        order: OrderArg,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long, default_value_t = 1_000_000)]
        samples: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        workers: usize,
        /// Estimate P[X >= point] instead of the comparability probability.
        #[arg(long, allow_hyphen_values = true)]
        point: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<String>,
    },
    /// Checks the alternating and power-sum identities on random inputs.
    Identities {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 100)]
        trials: u64,
        #[arg(long, default_value_t = 42)]
        seed: u64,
    },
    /// Lists the weighted monomials of H_k(n) as CSV.
    Enumerate {
        #[arg(long)]
        k: usize,
        #[arg(long)]
        n: usize,
    },
    /// Classifies a lattice on the simplex against --point.
    Figure {
        #[arg(long, allow_hyphen_values = true)]
        point: String,
        #[arg(long, value_enum)]
        order: OrderArg,
        #[arg(long, default_value_t = 300)]
        resolution: u64,
    },
    /// Relation of --x to --y under an order.
    Classify {
        #[arg(long, value_enum)]
        order: OrderArg,
        #[arg(long, allow_hyphen_values = true)]
        x: String,
        #[arg(long, allow_hyphen_values = true)]
        y: String,
    },
}

impl Command {
    fn default_format(&self) -> Format {
        match self {
            Command::Estimate { .. } => Format::Json,
            Command::Enumerate { .. } | Command::Figure { .. } => Format::Csv,
            Command::Exact { .. } | Command::Identities { .. } | Command::Classify { .. } => Format::Table,
        }
    }
}

/// Runs one subcommand to completion, writing its output.
pub fn run(cli: Cli) -> Result<(), CliError> {
    let ctx = Context::new(cli.mode.map(Into::into), &cli.u)?;
    let format = cli.format.unwrap_or_else(|| cli.command.default_format());
    let outcome = match &cli.command {
        Command::Exact { order, point, n, b } => commands::exact(&ctx, (*order).into(), point, *n, b.as_deref())?,
        Command::Estimate { order, n, samples, seed, workers, point, b } => commands::estimate(
            &ctx,
            EstimateArgs {
                order: (*order).into(),
                n: *n,
                samples: *samples,
                seed: *seed,
                workers: *workers,
                point: point.as_deref(),
                b: b.as_deref(),
            },
        )?,
        Command::Identities { n, trials, seed } => commands::identities(&ctx, *n, *trials, *seed)?,
        Command::Enumerate { k, n } => commands::enumerate(&ctx, *k, *n)?,
        Command::Figure { point, order, resolution } => commands::figure(&ctx, point, (*order).into(), *resolution)?,
        Command::Classify { order, x, y } => commands::classify(&ctx, (*order).into(), x, y)?,
    };
    render(&outcome, format, cli.out.as_deref())
}

/// Path of the manifest written beside a non-JSON output file.
pub fn manifest_path(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Writes the chosen rendering; the summary line goes to stderr when the
/// primary output occupies stdout as CSV.
pub fn render(outcome: &Outcome, format: Format, out: Option<&Path>) -> Result<(), CliError> {
    let primary = match format {
        Format::Json => outcome.report.to_json(),
        Format::Csv => outcome.csv.clone(),
        Format::Table => outcome.table.clone(),
    };
    match out {
        Some(path) => {
            std::fs::write(path, &primary)?;
            if format != Format::Json {
                let mut manifest = serde_json::to_string_pretty(&outcome.report.manifest)?;
                manifest.push('\n');
                std::fs::write(manifest_path(path), manifest)?;
            }
            if let Some(s) = &outcome.summary {
                println!("{s}");
            }
        }
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(primary.as_bytes())?;
            stdout.flush()?;
            if let (Format::Csv, Some(s)) = (format, &outcome.summary) {
                eprintln!("{s}");
            }
        }
    }
    match &outcome.failure {
        Some(msg) => Err(CliError::Verification(msg.clone())),
        None => Ok(()),
    }
}
