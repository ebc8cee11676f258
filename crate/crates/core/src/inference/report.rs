use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::build::cover_to_graph;
use crate::clique::CliqueMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

/// Latent structure of one posterior cover relative to the observed graph.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LatentReport {
    /// Nonempty cliques, largest first.
    pub cliques: Vec<Vec<u32>>,
    /// Number of cliques each vertex belongs to.
    pub memberships: Vec<u32>,
    /// memberships value -> number of vertices
    pub membership_histogram: BTreeMap<u32, usize>,
    pub latent_edges: usize,
    pub observed_edges: usize,
    /// Latent edges missing from the observed graph.
    pub latent_only_edges: Vec<(u32, u32)>,
    /// `latent_only_edges.len() / latent_edges`, 0 when there are no latent edges.
    pub latent_only_fraction: f64,
    /// Vertex in the most cliques, smallest id on ties.
    pub most_connected_vertex: Option<u32>,
}

impl LatentReport {
    pub fn new(cover: &CliqueMatrix, observed: &Graph) -> Result<Self> {
        if cover.vertex_count() != observed.vertex_count() {
            return Err(Error::InvalidArgument(format!(
                "cover has {} vertices but the graph has {}",
                cover.vertex_count(),
                observed.vertex_count()
            )));
        }
        let latent = cover_to_graph(cover);
        let latent_only_edges: Vec<(u32, u32)> = latent
            .edges()
            .filter(|&(u, v)| !observed.has_edge(u, v))
            .collect();
        let mut cliques: Vec<Vec<u32>> = cover.rows().iter().filter(|r| !r.is_empty()).cloned().collect();
        cliques.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
        let memberships = cover.column_counts().to_vec();
        let mut membership_histogram = BTreeMap::new();
        for &m in &memberships {
            *membership_histogram.entry(m).or_insert(0) += 1;
        }
        let most_connected_vertex = memberships
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.cmp(b.1).then_with(|| b.0.cmp(&a.0)))
            .map(|(v, _)| v as u32);
        let latent_edges = latent.edge_count();
        Ok(Self {
            cliques,
            memberships,
            membership_histogram,
            latent_edges,
            observed_edges: observed.edge_count(),
            latent_only_fraction: if latent_edges == 0 {
                0.0
            } else {
                latent_only_edges.len() as f64 / latent_edges as f64
            },
            latent_only_edges,
            most_connected_vertex,
        })
    }
}
