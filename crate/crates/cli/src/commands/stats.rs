use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use serde::{Deserialize, Serialize};

use rcc_core::stats::{
    degree_distribution, summarize, write_histogram_csv, ClusteringMode, GraphSummary, SummaryOptions,
    TableRow, DEFAULT_CLIQUE_BUDGET,
};
use rcc_core::Graph;

use crate::config::serde_enum;
use crate::error::{CliError, Result};
use crate::output::{read_graph, OutDir};

/// Summary statistics of an observed graph.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StatsArgs {
    /// Edge list, one `u v` pair per line.
    pub input: PathBuf,
    /// Read `u v multiplicity` triples and collapse them.
    #[arg(long)]
    pub multigraph: bool,
    #[arg(long)]
    pub skip_max_clique: bool,
    #[arg(long, default_value_t = DEFAULT_CLIQUE_BUDGET)]
    pub clique_budget: usize,
    /// exclude_low_degree or include_as_zero.
    #[arg(long, value_parser = serde_enum::<ClusteringMode>, default_value = "exclude_low_degree")]
    pub clustering: ClusteringMode,
    /// Row label in summary.csv; defaults to the file stem.
    #[arg(long)]
    pub label: Option<String>,
    /// Directory for the JSON, CSV and histogram files; stdout only when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// JSON object (inline or a file path) overriding the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsReport {
    pub label: String,
    pub summary: GraphSummary,
    pub table: TableRow,
}

/// Maps a clique-budget overrun to the budget exit code.
pub(crate) fn summarize_with_budget(g: &Graph, opts: &SummaryOptions) -> Result<GraphSummary> {
    summarize(g, opts).map_err(|e| match e {
        rcc_core::Error::CliqueBudget { budget, partial } => CliError::Budget(format!(
            "maximal clique budget of {budget} exceeded ({} found); rerun with --skip-max-clique or a larger --clique-budget",
            partial.len()
        )),
        rcc_core::Error::InvalidArgument(msg) => CliError::Validation(msg),
        other => other.into(),
    })
}

pub fn run(args: StatsArgs) -> Result<()> {
    let g = read_graph(&args.input, args.multigraph)?;
    let opts = SummaryOptions {
        skip_max_clique: args.skip_max_clique,
        clique_budget: args.clique_budget,
        clustering: args.clustering,
    };
    let summary = summarize_with_budget(&g, &opts)?;
    let label = args.label.clone().unwrap_or_else(|| {
        args.input
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "graph".into())
    });
    let report = StatsReport {
        label: label.clone(),
        table: summary.table_row(),
        summary,
    };
    crate::output::emit(&serde_json::to_string_pretty(&report).map_err(rcc_core::Error::from)?)?;

    let Some(dir) = &args.out else {
        return Ok(());
    };
    let mut out = OutDir::create(dir)?;
    out.json("summary.json", &report)?;
    out.with("summary.csv", |w| {
        TableRow::write_csv([(label.as_str(), &report.table)], w)
    })?;
    out.with("degree_hist.csv", |w| {
        write_histogram_csv(&degree_distribution(&g).histogram, w)
    })?;
    if let Some(per_vertex) = &report.summary.max_clique_per_vertex {
        let mut hist = BTreeMap::new();
        for &m in per_vertex {
            *hist.entry(m).or_insert(0) += 1;
        }
        out.with("max_clique_hist.csv", |w| write_histogram_csv(&hist, w))?;
    }
    out.manifest("stats", &args, serde_json::Value::Null)
}
