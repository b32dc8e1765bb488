//! Command-line harness: loads a case configuration, runs the reduction
//! pipeline and writes a JSON report.

pub mod config;
pub mod pipeline;
pub mod report;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

pub use config::{CaseConfig, ConfigError};
pub use pipeline::{exit, run, Command};
pub use report::{Check, Relation, Report};

#[derive(Debug, Parser)]
#[command(name = "symred", version, about = "Reduce invariant symplectic connections on T*G to coadjoint orbits")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Verb,
}

#[derive(Debug, Subcommand)]
pub enum Verb {
    /// Check the algebra, the level and the constraint lemmas.
    Validate(CommonArgs),
    /// Build the reduced connection and check its structure.
    Reduce(CommonArgs),
    /// Reduce, then compare the curvature formula with the oracle.
    Curvature(CommonArgs),
    /// Run every stage; exits 4 if any check fails.
    Verify(CommonArgs),
    /// Write the connection coefficients at the configured covectors.
    ExportConnection(CommonArgs),
}

#[derive(Debug, Args)]
pub struct CommonArgs {
    /// Case configuration (JSON).
    #[arg(long)]
    pub config: PathBuf,
    /// Write the report here instead of standard output.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Override the random seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Override the first-order step; the curvature step is rescaled by the same factor.
    #[arg(long)]
    pub fd_step: Option<f64>,
    /// Multiply every defect threshold by this factor.
    #[arg(long)]
    pub tol_scale: Option<f64>,
}

impl Verb {
    pub fn split(&self) -> (Command, &CommonArgs) {
        match self {
            Verb::Validate(a) => (Command::Validate, a),
            Verb::Reduce(a) => (Command::Reduce, a),
            Verb::Curvature(a) => (Command::Curvature, a),
            Verb::Verify(a) => (Command::Verify, a),
            Verb::ExportConnection(a) => (Command::ExportConnection, a),
        }
    }
}

/// Loads the configuration named by `args`, applies overrides and runs.
pub fn execute(cmd: Command, args: &CommonArgs) -> Report {
    match CaseConfig::from_file(&args.config).and_then(|c| c.with_overrides(args.seed, args.fd_step, args.tol_scale)) {
        Ok(cfg) => run(cmd, &cfg),
        Err(e) => pipeline::config_failure(cmd, &e),
    }
}
