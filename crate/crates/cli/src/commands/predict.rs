use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rcc_core::build::cover_to_graph;
use rcc_core::ibp::{sample_clique_matrix, NumCliques};
use rcc_core::stats::{SummaryOptions, TableRow, DEFAULT_CLIQUE_BUDGET};
use rcc_core::{derived_rng, Hyperparams};

use super::fit::{fit_json_path, FitSummary};
use super::stats::summarize_with_budget;
use crate::error::{CliError, Result};
use crate::output::{read_graph, read_json, OutDir};
use crate::threads;

/// Graphs sampled from fitted hyperparameters, summarised against the observed graph.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PredictArgs {
    /// Fit directory (or its fit.json).
    pub fit: PathBuf,
    #[arg(long, default_value_t = 25)]
    pub samples: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Observed graph for the truth row; defaults to the fitted input.
    #[arg(long)]
    pub graph: Option<PathBuf>,
    /// Fixed number of cliques per sample instead of a Poisson(tau) draw.
    #[arg(long)]
    pub cliques: Option<usize>,
    #[arg(long)]
    pub skip_max_clique: bool,
    #[arg(long, default_value_t = DEFAULT_CLIQUE_BUDGET)]
    pub clique_budget: usize,
    #[arg(long, default_value = "rcc-predict")]
    pub out: PathBuf,
    /// JSON object (inline or a file path) overriding the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PredictReport {
    pub hyperparams: Hyperparams,
    pub samples: usize,
    /// Samples with fewer than two vertices, left out of the statistics.
    pub degenerate: usize,
    pub truth: Option<TableRow>,
    pub mean: TableRow,
    pub std_error: TableRow,
}

/// Mean and standard error of each column.
fn mean_and_se(rows: &[TableRow]) -> (TableRow, TableRow) {
    let n = rows.len() as f64;
    let stat = |f: &dyn Fn(&TableRow) -> f64| {
        let m = rows.iter().map(f).sum::<f64>() / n;
        let var = if rows.len() > 1 {
            rows.iter().map(|r| (f(r) - m).powi(2)).sum::<f64>() / (n - 1.0)
        } else {
            0.0
        };
        (m, (var / n).sqrt())
    };
    let tri = stat(&|r| r.triangles_per_vertex);
    let dens = stat(&|r| r.density_per_thousand);
    let deg = stat(&|r| r.average_degree);
    let clus = stat(&|r| r.clustering);
    let clique = rows
        .iter()
        .all(|r| r.max_clique.is_some())
        .then(|| stat(&|r| r.max_clique.unwrap_or(f64::NAN)));
    let build = |pick: fn((f64, f64)) -> f64| TableRow {
        triangles_per_vertex: pick(tri),
        density_per_thousand: pick(dens),
        average_degree: pick(deg),
        max_clique: clique.map(pick),
        clustering: pick(clus),
    };
    (build(|p| p.0), build(|p| p.1))
}

pub fn run(args: PredictArgs) -> Result<()> {
    if args.samples == 0 {
        return Err(CliError::Validation("need at least one sample".into()));
    }
    let fit: FitSummary = read_json(&fit_json_path(&args.fit))?;
    let hp = fit.fitted;
    let opts = SummaryOptions {
        skip_max_clique: args.skip_max_clique,
        clique_budget: args.clique_budget,
        ..SummaryOptions::default()
    };
    let pool = threads::pool()?;
    let drawn: Vec<Option<TableRow>> = pool.install(|| {
        (0..args.samples)
            .into_par_iter()
            .map(|i| {
                let mut rng = derived_rng(args.seed, 0, i as u32);
                let n = args.cliques.map_or(NumCliques::Poisson, NumCliques::Fixed);
                let g = cover_to_graph(&sample_clique_matrix(&hp, n, &mut rng));
                if g.vertex_count() < 2 {
                    return Ok(None);
                }
                Ok(Some(summarize_with_budget(&g, &opts)?.table_row()))
            })
            .collect::<Result<_>>()
    })?;
    let rows: Vec<(usize, TableRow)> = drawn
        .into_iter()
        .enumerate()
        .filter_map(|(i, r)| r.map(|r| (i, r)))
        .collect();
    if rows.is_empty() {
        return Err(CliError::Validation(
            "every sampled graph had fewer than two vertices".into(),
        ));
    }
    let table: Vec<TableRow> = rows.iter().map(|(_, r)| r.clone()).collect();
    let (mean, std_error) = mean_and_se(&table);

    let truth_path = args.graph.clone().unwrap_or_else(|| fit.input.clone());
    let truth = if truth_path.exists() {
        let g = read_graph(&truth_path, false)?;
        Some(summarize_with_budget(&g, &opts)?.table_row())
    } else {
        eprintln!("rcc: {} not found; no truth row", truth_path.display());
        None
    };

    let report = PredictReport {
        hyperparams: hp,
        samples: args.samples,
        degenerate: args.samples - rows.len(),
        truth,
        mean,
        std_error,
    };
    let mut out = OutDir::create(&args.out)?;
    out.json("predict.json", &report)?;
    out.with("predict.csv", |w| {
        let mut lines = vec![("rcc", &report.mean), ("rcc_se", &report.std_error)];
        if let Some(t) = &report.truth {
            lines.insert(0, ("truth", t));
        }
        TableRow::write_csv(lines, w)
    })?;
    out.with("samples.csv", |w| {
        writeln!(w, "sample,{}", TableRow::CSV_HEADER.join(","))?;
        for (i, r) in &rows {
            writeln!(w, "{i},{}", r.csv_fields().join(","))?;
        }
        Ok(())
    })?;
    crate::output::emit(&serde_json::to_string_pretty(&report).map_err(rcc_core::Error::from)?)?;
    let seeds = serde_json::json!({
        "master": args.seed,
        "derivation": "ChaCha8 seeded with master, stream = sample index",
    });
    out.manifest("predict", &args, seeds)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(x: f64, clique: Option<f64>) -> TableRow {
        TableRow {
            triangles_per_vertex: x,
            density_per_thousand: 2.0 * x,
            average_degree: x,
            max_clique: clique,
            clustering: x,
        }
    }

    #[test]
    fn column_means_and_errors() {
        let (m, se) = mean_and_se(&[row(1.0, Some(2.0)), row(3.0, Some(2.0))]);
        assert_eq!(m.triangles_per_vertex, 2.0);
        assert_eq!(m.density_per_thousand, 4.0);
        assert!((se.average_degree - 1.0).abs() < 1e-12);
        assert_eq!(se.max_clique, Some(0.0));
        let (m, _) = mean_and_se(&[row(1.0, None), row(3.0, Some(2.0))]);
        assert_eq!(m.max_clique, None);
    }
}
