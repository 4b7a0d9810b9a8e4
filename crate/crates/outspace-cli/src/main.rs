//! `outspace` command-line front end.
//!
//! Exit codes: 0 success, 1 a reproduction or experiment check failed, 2 bad usage or input,
//! 3 a projection is undefined (the error code is printed on stderr).

mod commands;

use clap::{Args, Parser, Subcommand, ValueEnum};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser, Debug)]
#[command(name = "outspace", version, about = "Free groups, Outer space and subfactor projections")]
pub struct Cli {
    #[command(flatten)]
    pub opts: Opts,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct Opts {
    /// Rank of the free group.
    #[arg(long, global = true, default_value_t = 3)]
    pub rank: usize,
    /// Random seed.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Number of samples for experiments.
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    /// Length cap of the surrogate distance search.
    #[arg(long, global = true)]
    pub kmax: Option<usize>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Output file, or a directory when several DOT files are produced.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Worker threads; 1 runs sequentially.
    #[arg(long, global = true, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Dot,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Reproduce a worked example.
    Repro {
        #[arg(value_enum)]
        example: Example,
    },
    /// Projection of B to the one-edge splittings of A.
    Project {
        /// Comma-separated generators of A.
        #[arg(long = "A")]
        a: String,
        /// Comma-separated generators of B.
        #[arg(long = "B")]
        b: String,
    },
    /// Greedy folding path of a morphism.
    Fold {
        /// Source marked graph (JSON).
        #[arg(long)]
        from: PathBuf,
        /// Target marked graph or morphism (JSON).
        #[arg(long)]
        guide: PathBuf,
    },
    /// Sampling experiment.
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
    },
    /// Export a marked graph, or the cover of a subgroup over it.
    Export {
        #[arg(value_enum)]
        kind: ExportKind,
        /// Marked graph (JSON); the standard rose of the given rank when absent.
        #[arg(long)]
        from: Option<PathBuf>,
        /// Comma-separated generators of a subgroup whose cover is exported.
        #[arg(long)]
        subgroup: Option<String>,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum Example {
    Figure1,
    Dist4,
    Colors,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ExperimentName {
    Behrstock,
    Finiteness,
    Bgi,
    Hamenstadt,
    Polygrowth,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum ExportKind {
    Dot,
    Json,
}

/// Error carrying its exit code.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl Failure {
    pub fn check(message: impl Into<String>) -> Failure {
        Failure { code: 1, message: message.into() }
    }
    pub fn input(message: impl Into<String>) -> Failure {
        Failure { code: 2, message: message.into() }
    }
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Failure {
        Failure::input(format!("{e:#}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    outspace::par::configure_threads(cli.opts.jobs);
    match commands::run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
