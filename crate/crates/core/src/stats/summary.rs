use std::collections::BTreeMap;
use std::io::Write;

use serde::{Deserialize, Serialize};

use super::cliques::{largest_clique_per_vertex, DEFAULT_CLIQUE_BUDGET};
use super::clustering::{average_local_clustering, triangle_count, ClusteringMode};
use super::density;
use crate::error::Result;
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SummaryOptions {
    pub skip_max_clique: bool,
    pub clique_budget: usize,
    pub clustering: ClusteringMode,
}

impl Default for SummaryOptions {
    fn default() -> Self {
        SummaryOptions {
            skip_max_clique: false,
            clique_budget: DEFAULT_CLIQUE_BUDGET,
            clustering: ClusteringMode::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphSummary {
    pub vertex_count: usize,
    pub edge_count: usize,
    pub triangles_per_vertex: f64,
    /// Unscaled density; [`TableRow`] reports it per thousand.
    pub density: f64,
    pub average_degree: f64,
    pub average_max_clique_per_vertex: Option<f64>,
    pub average_local_clustering: f64,
    /// Largest maximal clique containing each vertex, when computed.
    #[serde(skip)]
    pub max_clique_per_vertex: Option<Vec<usize>>,
}

/// The five comparison statistics under their table column names.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableRow {
    #[serde(rename = "triang./vertex")]
    pub triangles_per_vertex: f64,
    #[serde(rename = "density (×1k)")]
    pub density_per_thousand: f64,
    #[serde(rename = "av. degree")]
    pub average_degree: f64,
    #[serde(rename = "max. clique")]
    pub max_clique: Option<f64>,
    #[serde(rename = "cluster. coeff.")]
    pub clustering: f64,
}

impl TableRow {
    pub const CSV_HEADER: [&'static str; 5] = [
        "triang./vertex",
        "density (×1k)",
        "av. degree",
        "max. clique",
        "cluster. coeff.",
    ];

    /// Values in header order; a skipped max-clique field is empty.
    pub fn csv_fields(&self) -> [String; 5] {
        [
            self.triangles_per_vertex.to_string(),
            self.density_per_thousand.to_string(),
            self.average_degree.to_string(),
            self.max_clique.map(|m| m.to_string()).unwrap_or_default(),
            self.clustering.to_string(),
        ]
    }

    /// Header plus one line per row, prefixed by a label column.
    pub fn write_csv<'a, W: Write>(
        rows: impl IntoIterator<Item = (&'a str, &'a TableRow)>,
        mut out: W,
    ) -> Result<()> {
        writeln!(out, "label,{}", Self::CSV_HEADER.join(","))?;
        for (label, row) in rows {
            writeln!(out, "{label},{}", row.csv_fields().join(","))?;
        }
        Ok(())
    }
}

impl GraphSummary {
    pub fn table_row(&self) -> TableRow {
        TableRow {
            triangles_per_vertex: self.triangles_per_vertex,
            density_per_thousand: self.density * 1000.0,
            average_degree: self.average_degree,
            max_clique: self.average_max_clique_per_vertex,
            clustering: self.average_local_clustering,
        }
    }
}

pub fn summarize(g: &Graph, opts: &SummaryOptions) -> Result<GraphSummary> {
    let n = g.vertex_count();
    let dens = density(g)?;
    let (avg_clique, per_vertex) = if opts.skip_max_clique {
        (None, None)
    } else {
        let best = largest_clique_per_vertex(g, opts.clique_budget)?;
        let avg = best.iter().sum::<usize>() as f64 / n as f64;
        (Some(avg), Some(best))
    };
    Ok(GraphSummary {
        vertex_count: n,
        edge_count: g.edge_count(),
        triangles_per_vertex: triangle_count(g) as f64 / n as f64,
        density: dens,
        average_degree: 2.0 * g.edge_count() as f64 / n as f64,
        average_max_clique_per_vertex: avg_clique,
        average_local_clustering: average_local_clustering(g, opts.clustering),
        max_clique_per_vertex: per_vertex,
    })
}

/// `value,count` lines in increasing value order.
pub fn write_histogram_csv<W: Write>(hist: &BTreeMap<usize, usize>, mut out: W) -> Result<()> {
    writeln!(out, "value,count")?;
    for (v, c) in hist {
        writeln!(out, "{v},{c}")?;
    }
    Ok(())
}
