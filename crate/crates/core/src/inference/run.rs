use std::io::Write;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::fit::GradientOptions;
use super::init::{init_cover, InitStrategy};
use super::state::{McmcState, Noise};
use crate::build::NoisyOrParams;
use crate::clique::CliqueMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hyper::Hyperparams;
use crate::{seeded_rng, SeededRng};

/// Probabilities of picking each move at an iteration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MoveMix {
    pub split_merge: f64,
    pub gibbs: f64,
    pub empty: f64,
    pub pi: f64,
    pub hyper: f64,
}

impl MoveMix {
    fn as_array(&self) -> [f64; 5] {
        [self.split_merge, self.gibbs, self.empty, self.pi, self.hyper]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HyperUpdate {
    Fixed,
    /// Jump to the maximum-likelihood values given the current cover.
    Gradient,
    Mh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum ObservationMode {
    Full,
    Shared { initial_pi: f64 },
    PerClique { initial_pi: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McmcConfig {
    pub iterations: u64,
    pub burn_in: u64,
    pub thinning: u64,
    pub seed: u64,
    pub observation: ObservationMode,
    pub moves: MoveMix,
    pub hyper_update: HyperUpdate,
    pub init: InitStrategy,
    /// Standard deviation of the logit-scale proposal for activation probabilities.
    pub pi_step: f64,
    /// Standard deviation of the unconstrained-scale hyperparameter proposal.
    pub hyper_step: f64,
    pub gradient: GradientOptions,
    /// Full consistency check every this many iterations; 0 disables it.
    pub check_every: u64,
}

impl McmcConfig {
    /// Split/merge moves with occasional maximum-likelihood hyperparameter updates.
    pub fn fully_observed(iterations: u64, seed: u64) -> Self {
        Self {
            iterations,
            burn_in: iterations / 2,
            thinning: 100,
            seed,
            observation: ObservationMode::Full,
            moves: MoveMix {
                split_merge: 0.99,
                gibbs: 0.0,
                empty: 0.0,
                pi: 0.0,
                hyper: 0.01,
            },
            hyper_update: HyperUpdate::Gradient,
            init: InitStrategy::TwoCliques,
            pi_step: 0.3,
            hyper_step: 0.1,
            gradient: GradientOptions::default(),
            check_every: 0,
        }
    }

    /// Shared-probability noisy-OR with all move types and MH hyperparameters.
    pub fn partially_observed(iterations: u64, seed: u64, initial_pi: f64) -> Self {
        Self {
            observation: ObservationMode::Shared { initial_pi },
            moves: MoveMix {
                split_merge: 0.8,
                gibbs: 0.02,
                empty: 0.06,
                pi: 0.06,
                hyper: 0.06,
            },
            hyper_update: HyperUpdate::Mh,
            ..Self::fully_observed(iterations, seed)
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |msg: &str| Err(Error::InvalidArgument(msg.to_string()));
        let mix = self.moves.as_array();
        if mix.iter().any(|p| !(p.is_finite() && *p >= 0.0)) {
            return fail("move probabilities must be nonnegative");
        }
        if (mix.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return fail("move probabilities must sum to 1");
        }
        if self.thinning == 0 {
            return fail("thinning must be at least 1");
        }
        if self.burn_in > self.iterations {
            return fail("burn-in exceeds the number of iterations");
        }
        if !(self.pi_step > 0.0 && self.hyper_step > 0.0) {
            return fail("proposal step sizes must be positive");
        }
        match self.observation {
            ObservationMode::Full if self.moves.pi > 0.0 => {
                return fail("activation-probability moves need a noisy-OR mode")
            }
            ObservationMode::Shared { initial_pi } | ObservationMode::PerClique { initial_pi }
                if !(initial_pi > 0.0 && initial_pi < 1.0) =>
            {
                return fail("initial activation probability must lie in (0, 1)")
            }
            _ => {}
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum MoveKind {
    SplitMerge,
    Gibbs,
    Empty,
    Pi,
    Hyper,
}

impl MoveKind {
    pub const ALL: [MoveKind; 5] = [
        MoveKind::SplitMerge,
        MoveKind::Gibbs,
        MoveKind::Empty,
        MoveKind::Pi,
        MoveKind::Hyper,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MoveKind::SplitMerge => "split_merge",
            MoveKind::Gibbs => "gibbs",
            MoveKind::Empty => "empty",
            MoveKind::Pi => "pi",
            MoveKind::Hyper => "hyper",
        }
    }
}

/// Proposal and acceptance counts per move type. Gibbs counts visited and
/// flipped entries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MoveStats {
    pub proposed: [u64; 5],
    pub accepted: [u64; 5],
}

impl MoveStats {
    fn record(&mut self, kind: MoveKind, accepted: u64, proposed: u64) {
        self.proposed[kind as usize] += proposed;
        self.accepted[kind as usize] += accepted;
    }

    /// Accepted fraction, `NaN` if the move was never proposed.
    pub fn rate(&self, kind: MoveKind) -> f64 {
        let p = self.proposed[kind as usize];
        if p == 0 {
            f64::NAN
        } else {
            self.accepted[kind as usize] as f64 / p as f64
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McmcSample {
    pub iteration: u64,
    pub cover: CliqueMatrix,
    pub pi: Option<NoisyOrParams>,
    pub hyperparams: Hyperparams,
    pub log_joint: f64,
    pub log_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    pub iteration: u64,
    pub log_joint: f64,
    pub log_likelihood: f64,
    pub n_cliques: usize,
    pub n_vertices: usize,
    /// Shared probability, or the mean over cliques.
    pub pi: Option<f64>,
    pub hyperparams: Hyperparams,
    pub acceptance: [f64; 5],
}

impl TraceRow {
    pub fn write_csv<W: Write>(rows: &[TraceRow], mut out: W) -> Result<()> {
        write!(
            out,
            "iteration,log_joint,log_likelihood,n_cliques,n_vertices,pi,alpha,sigma,c,tau"
        )?;
        for kind in MoveKind::ALL {
            write!(out, ",acc_{}", kind.name())?;
        }
        writeln!(out)?;
        let num = |x: f64| if x.is_nan() { String::new() } else { x.to_string() };
        for r in rows {
            let h = &r.hyperparams;
            write!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.iteration,
                r.log_joint,
                r.log_likelihood,
                r.n_cliques,
                r.n_vertices,
                r.pi.map(num).unwrap_or_default(),
                h.alpha(),
                h.sigma(),
                h.c(),
                h.tau()
            )?;
            for a in r.acceptance {
                write!(out, ",{}", num(a))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

/// Everything needed to continue a chain exactly where it stopped.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub cover: CliqueMatrix,
    pub pi: Option<NoisyOrParams>,
    pub hyperparams: Hyperparams,
    pub iteration: u64,
    pub rng: SeededRng,
    pub moves: MoveStats,
}

#[derive(Debug, Clone)]
pub struct McmcOutput {
    pub samples: Vec<McmcSample>,
    pub trace: Vec<TraceRow>,
    pub moves: MoveStats,
    pub checkpoint: Checkpoint,
}

/// A single chain: state plus configuration and move bookkeeping.
#[derive(Debug, Clone)]
pub struct Chain {
    state: McmcState,
    config: McmcConfig,
    moves: MoveStats,
}

impl Chain {
    /// Starts from the configured initial cover with the configured seed.
    pub fn new(graph: &Graph, hp: Hyperparams, config: McmcConfig) -> Result<Self> {
        config.validate()?;
        let cover = init_cover(graph, config.init)?;
        let (noise, row_pi) = match config.observation {
            ObservationMode::Full => (Noise::Full, None),
            ObservationMode::Shared { initial_pi } => (Noise::Shared { pi: initial_pi }, None),
            ObservationMode::PerClique { initial_pi } => {
                (Noise::PerClique, Some(vec![initial_pi; cover.num_cliques()]))
            }
        };
        let state = McmcState::new(graph, &cover, noise, row_pi, hp, seeded_rng(config.seed))?;
        Ok(Self {
            state,
            config,
            moves: MoveStats::default(),
        })
    }

    /// Wraps an existing state, e.g. one started from a known cover.
    pub fn from_state(state: McmcState, config: McmcConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            state,
            config,
            moves: MoveStats::default(),
        })
    }

    pub fn resume(graph: &Graph, checkpoint: Checkpoint, config: McmcConfig) -> Result<Self> {
        config.validate()?;
        let (noise, row_pi) = match checkpoint.pi {
            None => (Noise::Full, None),
            Some(NoisyOrParams::Shared(pi)) => (Noise::Shared { pi }, None),
            Some(NoisyOrParams::PerClique(p)) => (Noise::PerClique, Some(p)),
        };
        let mut state = McmcState::new(
            graph,
            &checkpoint.cover,
            noise,
            row_pi,
            checkpoint.hyperparams,
            checkpoint.rng,
        )?;
        state.iteration = checkpoint.iteration;
        Ok(Self {
            state,
            config,
            moves: checkpoint.moves,
        })
    }

    pub fn state(&self) -> &McmcState {
        &self.state
    }

    pub fn state_mut(&mut self) -> &mut McmcState {
        &mut self.state
    }

    pub fn config(&self) -> &McmcConfig {
        &self.config
    }

    pub fn moves(&self) -> &MoveStats {
        &self.moves
    }

    fn pick_move(&mut self) -> MoveKind {
        let u: f64 = self.state.rng.random();
        let mut acc = 0.0;
        let mix = self.config.moves.as_array();
        for (kind, p) in MoveKind::ALL.into_iter().zip(mix) {
            acc += p;
            if u < acc {
                return kind;
            }
        }
        // rounding left u above the cumulative sum
        *MoveKind::ALL
            .iter()
            .rev()
            .zip(mix.iter().rev())
            .find(|(_, &p)| p > 0.0)
            .expect("some move has positive probability")
            .0
    }

    /// Performs one move chosen from the mix.
    pub fn step(&mut self) -> Result<()> {
        let kind = self.pick_move();
        let s = &mut self.state;
        let (acc, prop) = match kind {
            MoveKind::SplitMerge => (s.split_merge() as u64, 1),
            MoveKind::Gibbs => {
                let (changed, visited) = s.gibbs_sweep();
                (changed as u64, visited as u64)
            }
            MoveKind::Empty => (s.resample_empty() as u64, 1),
            MoveKind::Pi => {
                let (a, p) = s.resample_pi(self.config.pi_step);
                (a as u64, p as u64)
            }
            MoveKind::Hyper => match self.config.hyper_update {
                HyperUpdate::Fixed => (0, 0),
                HyperUpdate::Mh => (s.update_hyper_mh(self.config.hyper_step) as u64, 1),
                HyperUpdate::Gradient => (s.update_hyper_gradient(&self.config.gradient).is_ok() as u64, 1),
            },
        };
        self.moves.record(kind, acc, prop);
        self.state.iteration += 1;
        let every = self.config.check_every;
        if every > 0 && self.state.iteration.is_multiple_of(every) {
            self.state.check_invariants()?;
        }
        Ok(())
    }

    pub fn sample(&self) -> McmcSample {
        let s = &self.state;
        McmcSample {
            iteration: s.iteration,
            cover: s.cover(),
            pi: s.noisy_or(),
            hyperparams: s.hp,
            log_joint: s.log_joint,
            log_likelihood: s.fresh_log_lik(),
        }
    }

    pub fn trace_row(&self) -> TraceRow {
        let s = &self.state;
        let mut acceptance = [0.0; 5];
        for (slot, kind) in acceptance.iter_mut().zip(MoveKind::ALL) {
            *slot = self.moves.rate(kind);
        }
        TraceRow {
            iteration: s.iteration,
            log_joint: s.log_joint,
            log_likelihood: s.fresh_log_lik(),
            n_cliques: s.num_cliques(),
            n_vertices: s.graph.vertex_count(),
            pi: s.mean_pi(),
            hyperparams: s.hp,
            acceptance,
        }
    }

    pub fn checkpoint(&self) -> Checkpoint {
        let s = &self.state;
        Checkpoint {
            cover: s.cover(),
            pi: s.noisy_or(),
            hyperparams: s.hp,
            iteration: s.iteration,
            rng: s.rng.clone(),
            moves: self.moves.clone(),
        }
    }

    /// Runs until the configured iteration count, recording a trace row
    /// every `thinning` iterations and a sample every `thinning` iterations
    /// after burn-in. `on_sample` sees each sample as it is taken.
    pub fn run_with(&mut self, mut on_sample: impl FnMut(&McmcSample)) -> Result<McmcOutput> {
        let mut samples = Vec::new();
        let mut trace = Vec::new();
        while self.state.iteration < self.config.iterations {
            self.step()?;
            let it = self.state.iteration;
            if it.is_multiple_of(self.config.thinning) {
                trace.push(self.trace_row());
                if it > self.config.burn_in {
                    let sample = self.sample();
                    on_sample(&sample);
                    samples.push(sample);
                }
            }
        }
        Ok(McmcOutput {
            samples,
            trace,
            moves: self.moves.clone(),
            checkpoint: self.checkpoint(),
        })
    }
}

/// Runs one chain on `graph` from the configured initial cover.
pub fn run_mcmc(graph: &Graph, hp: Hyperparams, config: McmcConfig) -> Result<McmcOutput> {
    Chain::new(graph, hp, config)?.run_with(|_| {})
}
