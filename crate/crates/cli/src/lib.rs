//! Command-line front end: reads a scenario file, runs one pricing command
//! and prints a table, JSON or CSV.

pub mod commands;
pub mod error;
pub mod report;
pub mod scenario;

use std::path::PathBuf;

use clap::{Parser, Subcommand};

use crate::commands::Settings;
use crate::error::{CliError, CliResult};
use crate::report::{OutputFormat, Render};
use crate::scenario::Scenario;

#[derive(Debug, Parser)]
#[command(name = "binohedge", version, about = "Binomial lattice pricing by static hedging")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    /// Scenario file (JSON).
    #[arg(long, global = true, value_name = "FILE")]
    pub scenario: Option<PathBuf>,

    #[arg(long, global = true, conflicts_with = "csv")]
    pub json: bool,

    #[arg(long, global = true)]
    pub csv: bool,

    /// Cross-check against an independent pricing route.
    #[arg(long, global = true)]
    pub verify: bool,

    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,

    #[arg(long, global = true, value_name = "N")]
    pub mc_paths: Option<u64>,

    /// Step counts for `converge`, e.g. "64,256,1024".
    #[arg(long, global = true, value_name = "LIST", value_parser = parse_list::<usize>)]
    pub steps: Option<ListArg<usize>>,

    /// Lattice strikes, e.g. "100,121". An empty string gives no strikes.
    #[arg(long, global = true, value_name = "LIST", value_parser = parse_list::<f64>)]
    pub strikes: Option<ListArg<f64>>,

    /// Trajectory for `hedge`, as 0/1 moves: "001" or "0,0,1".
    #[arg(long, global = true)]
    pub trajectory: Option<String>,

    /// Also report the standard-tree counterexample in `invariance`.
    #[arg(long, global = true)]
    pub counterexample: bool,

    /// Emit the full value grid in `invariance` instead of the sums.
    #[arg(long, global = true)]
    pub grid: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Price the scenario's payoff.
    Price,
    /// Arrow-Debreu hedge ledger along one trajectory.
    Hedge,
    /// Degenerate digital prices by three routes.
    Digital,
    /// Per-time sums of the extended-state value grid.
    Invariance,
    /// Lattice-to-continuum convergence and variance fits.
    Converge,
    /// Backward random walk hit probability.
    Walk,
}

/// A comma-separated list; a newtype so clap treats it as one value.
#[derive(Debug, Clone, PartialEq)]
pub struct ListArg<T>(pub Vec<T>);

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<ListArg<T>, String>
where
    T::Err: std::fmt::Display,
{
    s.split(',')
        .map(str::trim)
        .filter(|x| !x.is_empty())
        .map(|x| x.parse::<T>().map_err(|e| format!("{x:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()
        .map(ListArg)
}

/// Text for stdout plus warnings for stderr.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub stdout: String,
    pub warnings: Vec<String>,
}

impl Cli {
    fn format(&self) -> OutputFormat {
        if self.json {
            OutputFormat::Json
        } else if self.csv {
            OutputFormat::Csv
        } else {
            OutputFormat::Human
        }
    }

    fn settings(&self) -> Settings {
        Settings {
            verify: self.verify,
            seed: self.seed,
            mc_paths: self.mc_paths,
            step_counts: self.steps.clone().map(|l| l.0),
            strikes: self.strikes.clone().map(|l| l.0),
            trajectory: self.trajectory.clone(),
            counterexample: self.counterexample,
        }
    }

    fn load(&self) -> CliResult<Option<Scenario>> {
        self.scenario.as_deref().map(Scenario::from_path).transpose()
    }

    fn require(&self) -> CliResult<Scenario> {
        self.load()?
            .ok_or_else(|| CliError::input("missing --scenario FILE"))
    }
}

pub fn run(cli: &Cli) -> CliResult<Output> {
    let set = cli.settings();
    let format = cli.format();
    let mut warnings = Vec::new();
    let stdout = match cli.command {
        Command::Price => commands::price(&cli.require()?, &set)?.render(format),
        Command::Hedge => commands::hedge(&cli.require()?, &set)?.render(format),
        Command::Digital => commands::digital(&cli.require()?, &set)?.render(format),
        Command::Invariance if cli.grid => commands::invariance_grid_csv(&cli.require()?, &set)?,
        Command::Invariance => commands::invariance(&cli.require()?, &set)?.render(format),
        Command::Converge => {
            let (report, w) = commands::converge(cli.load()?.as_ref(), &set)?;
            warnings = w;
            report.render(format)
        }
        Command::Walk => commands::walk(&cli.require()?, &set)?.render(format),
    };
    Ok(Output { stdout, warnings })
}
