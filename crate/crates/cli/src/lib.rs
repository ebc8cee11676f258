//! The `rcc` command line: simulation studies, graph statistics, MCMC
//! fitting, posterior-predictive summaries and latent-structure reports.
//!
//! Every command writes into its own output directory along with a
//! `manifest.json` that records the options and seeds used.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod threads;

use clap::{Parser, Subcommand};

use commands::{
    fit::FitArgs, predict::PredictArgs, report::ReportArgs, simulate::SimulateArgs, stats::StatsArgs,
};
pub use error::{CliError, Result};

#[derive(Debug, Parser)]
#[command(name = "rcc", version, about = "Random clique cover graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sample graphs over a hyperparameter grid and record their growth.
    Simulate(SimulateArgs),
    /// Summary statistics and histograms of an edge list.
    Stats(StatsArgs),
    /// Infer clique covers and hyperparameters for an edge list.
    Fit(FitArgs),
    /// Summaries of graphs sampled from fitted hyperparameters.
    Predict(PredictArgs),
    /// Latent cliques and latent-only edges of a fit.
    Report(ReportArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => {
            let cfg = a.config.clone();
            commands::simulate::run(config::apply(a, cfg.as_deref())?)
        }
        Command::Stats(a) => {
            let cfg = a.config.clone();
            commands::stats::run(config::apply(a, cfg.as_deref())?)
        }
        Command::Fit(a) => {
            let cfg = a.config.clone();
            commands::fit::run(config::apply(a, cfg.as_deref())?)
        }
        Command::Predict(a) => {
            let cfg = a.config.clone();
            commands::predict::run(config::apply(a, cfg.as_deref())?)
        }
        Command::Report(a) => {
            let cfg = a.config.clone();
            commands::report::run(config::apply(a, cfg.as_deref())?)
        }
    }
}
