use std::collections::BTreeMap;
use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use rcc_core::build::{cover_to_graph, NoisyOrParams};
use rcc_core::inference::{LatentReport, McmcSample};
use rcc_core::Graph;

use super::fit::{fit_json_path, FitSummary};
use crate::error::{CliError, Result};
use crate::output::{io_err, read_graph, read_json, OutDir};

/// Latent structure of the posterior samples of a fit.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReportArgs {
    /// Fit directory.
    pub fit: PathBuf,
    /// Observed graph; defaults to the fitted input.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Index of the sample reported in detail; defaults to the last.
    #[arg(long)]
    pub sample: Option<usize>,
    #[arg(long, default_value = "rcc-report")]
    pub out: PathBuf,
    /// JSON object (inline or a file path) overriding the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SampleLine {
    pub iteration: u64,
    pub n_cliques: usize,
    pub pi: Option<f64>,
    pub latent_only_fraction: f64,
    pub single_clique_vertices: usize,
    pub most_connected_vertex: Option<u32>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PartialReport {
    pub samples: Vec<SampleLine>,
    pub mean_latent_only_fraction: f64,
    pub pi_mean: Option<f64>,
    pub selected_sample: usize,
    pub selected: LatentReport,
}

fn mean_pi(p: &Option<NoisyOrParams>) -> Option<f64> {
    match p {
        None => None,
        Some(NoisyOrParams::Shared(pi)) => Some(*pi),
        Some(NoisyOrParams::PerClique(ps)) if ps.is_empty() => None,
        Some(NoisyOrParams::PerClique(ps)) => Some(ps.iter().sum::<f64>() / ps.len() as f64),
    }
}

fn read_samples(fit_dir: &std::path::Path) -> Result<Vec<McmcSample>> {
    let path = fit_dir.join("samples.jsonl");
    let file = std::fs::File::open(&path).map_err(io_err(&path))?;
    let mut out = Vec::new();
    for (i, line) in BufReader::new(file).lines().enumerate() {
        let line = line.map_err(io_err(&path))?;
        if line.trim().is_empty() {
            continue;
        }
        let s = serde_json::from_str(&line)
            .map_err(|e| CliError::Validation(format!("{}: line {}: {e}", path.display(), i + 1)))?;
        out.push(s);
    }
    Ok(out)
}

pub fn run(args: ReportArgs) -> Result<()> {
    let fit_file = fit_json_path(&args.fit);
    let fit: FitSummary = read_json(&fit_file)?;
    let fit_dir = fit_file.parent().map(PathBuf::from).unwrap_or_default();
    let samples = read_samples(&fit_dir)?;
    if samples.is_empty() {
        return Err(CliError::Validation(
            "the fit has no posterior samples (check burn-in)".into(),
        ));
    }
    let observed: Graph = read_graph(args.graph.as_ref().unwrap_or(&fit.input), false)?;

    let mut lines = Vec::with_capacity(samples.len());
    let mut reports = Vec::with_capacity(samples.len());
    for s in &samples {
        let r = LatentReport::new(&s.cover, &observed)?;
        lines.push(SampleLine {
            iteration: s.iteration,
            n_cliques: r.cliques.len(),
            pi: mean_pi(&s.pi),
            latent_only_fraction: r.latent_only_fraction,
            single_clique_vertices: r.membership_histogram.get(&1).copied().unwrap_or(0),
            most_connected_vertex: r.most_connected_vertex,
        });
        reports.push(r);
    }
    let chosen = args.sample.unwrap_or(samples.len() - 1);
    if chosen >= samples.len() {
        return Err(CliError::Validation(format!(
            "sample {chosen} requested but only {} exist",
            samples.len()
        )));
    }
    let n = lines.len() as f64;
    let pis: Vec<f64> = lines.iter().filter_map(|l| l.pi).collect();
    let report = PartialReport {
        mean_latent_only_fraction: lines.iter().map(|l| l.latent_only_fraction).sum::<f64>() / n,
        pi_mean: (!pis.is_empty()).then(|| pis.iter().sum::<f64>() / pis.len() as f64),
        samples: lines,
        selected_sample: chosen,
        selected: reports.swap_remove(chosen),
    };

    let mut out = OutDir::create(&args.out)?;
    out.json("report.json", &report)?;
    out.with("edges_observed.txt", |w| observed.write_edge_list(w))?;
    out.with("edges_latent.txt", |w| {
        cover_to_graph(&samples[chosen].cover).write_edge_list(w)
    })?;
    out.with("edges_latent_only.txt", |w| {
        writeln!(
            w,
            "# {} latent-only edges",
            report.selected.latent_only_edges.len()
        )?;
        for (u, v) in &report.selected.latent_only_edges {
            writeln!(w, "{u} {v}")?;
        }
        Ok(())
    })?;
    out.with("cliques.txt", |w| {
        for c in &report.selected.cliques {
            let ids: Vec<String> = c.iter().map(u32::to_string).collect();
            writeln!(w, "{}", ids.join(" "))?;
        }
        Ok(())
    })?;
    out.with("memberships.csv", |w| {
        let hist: BTreeMap<usize, usize> = report
            .selected
            .membership_histogram
            .iter()
            .map(|(&k, &v)| (k as usize, v))
            .collect();
        rcc_core::stats::write_histogram_csv(&hist, w)
    })?;
    crate::output::emit(&format!(
        "{} samples; mean latent-only edge fraction {:.3}; pi mean {}; selected sample {} has {} cliques, {} of {} vertices in one clique",
        report.samples.len(),
        report.mean_latent_only_fraction,
        report.pi_mean.map_or("n/a".into(), |p| format!("{p:.3}")),
        chosen,
        report.selected.cliques.len(),
        report.selected.membership_histogram.get(&1).copied().unwrap_or(0),
        report.selected.memberships.len(),
    ))?;
    out.manifest("report", &args, serde_json::Value::Null)
}
