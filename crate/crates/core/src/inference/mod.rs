//! Posterior inference of clique covers from an observed graph.
//!
//! A chain keeps a cover of the graph and moves through covers with
//! reversible-jump split/merge proposals, Gibbs updates of single
//! memberships, Metropolis–Hastings moves on the number of empty cliques,
//! updates of the noisy-OR activation probabilities, and hyperparameter
//! updates. In fully observed mode the cover always reproduces the graph
//! exactly; under noisy-OR every observed edge stays covered.

mod fit;
mod init;
mod likelihood;
mod moves;
mod report;
mod run;
mod state;

pub use fit::{fit_hyperparams_gradient, fit_hyperparams_mh, hyper_log_prior, FitMethod, GradientOptions};
pub use init::{init_cover, InitStrategy};
pub use likelihood::{full_log_likelihood, partial_log_likelihood};
pub use report::LatentReport;
pub use run::{
    run_mcmc, Chain, Checkpoint, HyperUpdate, McmcConfig, McmcOutput, McmcSample, MoveKind, MoveMix,
    MoveStats, ObservationMode, TraceRow,
};
pub use state::{McmcState, Noise};
