use std::collections::BTreeMap;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use clap::{Args, ValueEnum};
use serde::{Deserialize, Serialize};

use rcc_core::inference::{
    fit_hyperparams_gradient, Chain, Checkpoint, GradientOptions, HyperUpdate, InitStrategy, McmcConfig,
    MoveKind, MoveMix, ObservationMode, TraceRow,
};
use rcc_core::{Graph, Hyperparams};

use crate::config::serde_enum;
use crate::error::{CliError, Result};
use crate::output::{io_err, read_graph, OutDir};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    /// The cover must reproduce the graph exactly.
    Full,
    /// Noisy-OR observation of the cover.
    Partial,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PiMode {
    Shared,
    PerClique,
}

/// MCMC over clique covers of an observed graph.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitArgs {
    /// Edge list, one `u v` pair per line.
    pub input: PathBuf,
    #[arg(long, value_enum, default_value_t = Mode::Full)]
    pub mode: Mode,
    /// Activation probabilities in partial mode.
    #[arg(long, value_enum, default_value_t = PiMode::Shared)]
    pub pi_mode: PiMode,
    #[arg(long, default_value_t = 0.5)]
    pub initial_pi: f64,
    #[arg(long, default_value_t = 10_000)]
    pub iterations: u64,
    /// Defaults to half the iterations.
    #[arg(long)]
    pub burn_in: Option<u64>,
    #[arg(long, default_value_t = 100)]
    pub thinning: u64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// two-cliques or greedy-cover.
    #[arg(long, value_parser = serde_enum::<InitStrategy>, default_value = "two-cliques")]
    pub init: InitStrategy,
    /// fixed, gradient or mh; gradient in full mode and mh in partial mode by default.
    #[arg(long, value_parser = serde_enum::<HyperUpdate>)]
    pub hyper_update: Option<HyperUpdate>,
    #[arg(long, default_value_t = 1.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.5)]
    pub sigma: f64,
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    /// Defaults to the number of cliques in the initial cover.
    #[arg(long)]
    pub tau: Option<f64>,
    /// Move probabilities; settable through --config only.
    #[arg(skip)]
    pub moves: Option<MoveMix>,
    #[arg(long, default_value_t = 0.3)]
    pub pi_step: f64,
    #[arg(long, default_value_t = 0.1)]
    pub hyper_step: f64,
    /// Full consistency check every this many iterations; 0 disables it.
    #[arg(long, default_value_t = 0)]
    pub check_every: u64,
    /// Continue from a checkpoint.json written by an earlier run.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Wall-clock budget; on overrun a checkpoint is written and the exit code is 3.
    #[arg(long)]
    pub max_seconds: Option<f64>,
    #[arg(long, default_value = "rcc-fit")]
    pub out: PathBuf,
    /// JSON object (inline or a file path) overriding the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<String>,
}

/// What `predict` and `report` read back from a fit directory.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub input: PathBuf,
    pub mode: Mode,
    pub vertices: usize,
    pub edges: usize,
    pub iterations: u64,
    pub samples: usize,
    /// Maximum likelihood given the last sampled cover in full mode;
    /// posterior mean of the sampled values in partial mode.
    pub fitted: Hyperparams,
    pub mean_cliques: Option<f64>,
    pub pi_mean: Option<f64>,
    pub pi_sd: Option<f64>,
    pub acceptance: BTreeMap<String, Option<f64>>,
}

impl FitArgs {
    pub fn mcmc_config(&self) -> Result<McmcConfig> {
        let mut config = match self.mode {
            Mode::Full => McmcConfig::fully_observed(self.iterations, self.seed),
            Mode::Partial => McmcConfig::partially_observed(self.iterations, self.seed, self.initial_pi),
        };
        if self.mode == Mode::Partial && self.pi_mode == PiMode::PerClique {
            config.observation = ObservationMode::PerClique {
                initial_pi: self.initial_pi,
            };
        }
        config.burn_in = self.burn_in.unwrap_or(self.iterations / 2);
        config.thinning = self.thinning;
        config.init = self.init;
        if let Some(h) = self.hyper_update {
            config.hyper_update = h;
        }
        if let Some(m) = self.moves {
            config.moves = m;
        }
        config.pi_step = self.pi_step;
        config.hyper_step = self.hyper_step;
        config.check_every = self.check_every;
        config.gradient = GradientOptions::default();
        config
            .validate()
            .map_err(|e| CliError::Validation(e.to_string()))?;
        Ok(config)
    }
}

fn mean_sd(xs: &[f64]) -> (Option<f64>, Option<f64>) {
    if xs.is_empty() {
        return (None, None);
    }
    let n = xs.len() as f64;
    let m = xs.iter().sum::<f64>() / n;
    let sd = (n > 1.0).then(|| (xs.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0)).sqrt());
    (Some(m), sd)
}

fn start(args: &FitArgs, g: &Graph, config: McmcConfig) -> Result<Chain> {
    if let Some(path) = &args.resume {
        let checkpoint: Checkpoint = crate::output::read_json(path)?;
        return Ok(Chain::resume(g, checkpoint, config)?);
    }
    if g.edge_count() == 0 && g.vertex_count() == 0 {
        return Err(CliError::Validation(format!(
            "{}: graph is empty",
            args.input.display()
        )));
    }
    let init_cliques = rcc_core::inference::init_cover(g, config.init)?.num_cliques();
    let tau = args.tau.unwrap_or(init_cliques as f64);
    let hp = Hyperparams::new(args.alpha, args.sigma, args.c, tau)?;
    Ok(Chain::new(g, hp, config)?)
}

pub fn run(args: FitArgs) -> Result<()> {
    let config = args.mcmc_config()?;
    let g = read_graph(&args.input, false)?;
    let mut chain = start(&args, &g, config.clone())?;
    let mut out = OutDir::create(&args.out)?;

    let budget = args.max_seconds.map(Duration::from_secs_f64);
    let clock = Instant::now();
    let mut samples = out.file("samples.jsonl")?;
    let mut trace: Vec<TraceRow> = Vec::new();
    let mut hps = Vec::new();
    let mut pis = Vec::new();
    let mut cliques = Vec::new();
    let mut last_cover = None;
    let mut aborted = false;
    while chain.state().iteration() < config.iterations {
        chain.step()?;
        let it = chain.state().iteration();
        if it % config.thinning == 0 {
            trace.push(chain.trace_row());
            if it > config.burn_in {
                let s = chain.sample();
                serde_json::to_writer(&mut samples.out, &s).map_err(rcc_core::Error::from)?;
                writeln!(samples.out).map_err(io_err(&samples.path))?;
                hps.push(s.hyperparams);
                if let Some(p) = chain.state().mean_pi() {
                    pis.push(p);
                }
                cliques.push(chain.state().num_cliques() as f64);
                last_cover = Some(s.cover);
            }
        }
        if budget.is_some_and(|b| it % 256 == 0 && clock.elapsed() > b) {
            aborted = true;
            break;
        }
    }
    samples.finish()?;
    out.with("trace.csv", |w| TraceRow::write_csv(&trace, w))?;
    out.json("checkpoint.json", &chain.checkpoint())?;

    let fitted = match args.mode {
        Mode::Full => {
            let cover = last_cover.unwrap_or_else(|| chain.state().cover());
            fit_hyperparams_gradient(&cover, chain.state().hyperparams(), &config.gradient)
                .unwrap_or(*chain.state().hyperparams())
        }
        Mode::Partial if !hps.is_empty() => {
            let n = hps.len() as f64;
            let avg = |f: fn(&Hyperparams) -> f64| hps.iter().map(f).sum::<f64>() / n;
            Hyperparams::new(
                avg(Hyperparams::alpha),
                avg(Hyperparams::sigma),
                avg(Hyperparams::c),
                avg(Hyperparams::tau),
            )?
        }
        Mode::Partial => *chain.state().hyperparams(),
    };
    let (pi_mean, pi_sd) = mean_sd(&pis);
    let summary = FitSummary {
        input: std::fs::canonicalize(&args.input).unwrap_or_else(|_| args.input.clone()),
        mode: args.mode,
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        iterations: chain.state().iteration(),
        samples: hps.len(),
        fitted,
        mean_cliques: mean_sd(&cliques).0,
        pi_mean,
        pi_sd,
        acceptance: MoveKind::ALL
            .iter()
            .map(|&k| {
                let r = chain.moves().rate(k);
                (k.name().to_string(), (!r.is_nan()).then_some(r))
            })
            .collect(),
    };
    out.json("fit.json", &summary)?;
    crate::output::emit(&serde_json::to_string_pretty(&summary).map_err(rcc_core::Error::from)?)?;
    let seeds = serde_json::json!({ "chain": args.seed });
    out.manifest("fit", &args, seeds)?;
    if aborted {
        return Err(CliError::Budget(format!(
            "time budget exhausted at iteration {}; resume with --resume {}",
            chain.state().iteration(),
            args.out.join("checkpoint.json").display()
        )));
    }
    Ok(())
}

/// Accepts a fit directory or the fit.json inside it.
pub(crate) fn fit_json_path(path: &Path) -> PathBuf {
    if path.is_dir() {
        path.join("fit.json")
    } else {
        path.to_path_buf()
    }
}
