//! Graph statistics: density, degrees, triangles, clustering, maximal cliques,
//! sparsity regressions and the summary row used to compare real and sampled graphs.

mod cliques;
mod clustering;
mod regression;
mod summary;

pub use cliques::{
    average_max_clique_per_vertex, for_each_maximal_clique, largest_clique_per_vertex, maximal_cliques,
    DEFAULT_CLIQUE_BUDGET,
};
pub use clustering::{
    average_local_clustering, local_clustering, triangle_count, triangles_per_vertex, vertex_triangles,
    ClusteringMode,
};
pub use regression::{sparsity_regression, Regression};
pub use summary::{summarize, write_histogram_csv, GraphSummary, SummaryOptions, TableRow};

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// `2|E| / (|V| (|V| - 1))`.
pub fn density(g: &Graph) -> Result<f64> {
    let n = g.vertex_count();
    if n < 2 {
        return Err(Error::InvalidArgument(format!(
            "density needs at least 2 vertices, got {n}"
        )));
    }
    let n = n as f64;
    Ok(2.0 * g.edge_count() as f64 / (n * (n - 1.0)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeDistribution {
    pub degrees: Vec<usize>,
    /// degree -> number of vertices
    pub histogram: BTreeMap<usize, usize>,
    /// degree / |V| per vertex
    pub normalized: Vec<f64>,
}

impl DegreeDistribution {
    pub fn mean(&self) -> f64 {
        if self.degrees.is_empty() {
            return 0.0;
        }
        self.degrees.iter().sum::<usize>() as f64 / self.degrees.len() as f64
    }
}

pub fn degree_distribution(g: &Graph) -> DegreeDistribution {
    let n = g.vertex_count();
    let degrees: Vec<usize> = (0..n as u32).map(|v| g.degree(v)).collect();
    let mut histogram = BTreeMap::new();
    for &d in &degrees {
        *histogram.entry(d).or_insert(0) += 1;
    }
    let normalized = degrees.iter().map(|&d| d as f64 / n as f64).collect();
    DegreeDistribution {
        degrees,
        histogram,
        normalized,
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::*;
    use super::*;

    #[test]
    fn density_examples() {
        assert_eq!(density(&complete(4)).unwrap(), 1.0);
        assert!((density(&path(3)).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        assert!(density(&Graph::new(1)).is_err());
    }

    #[test]
    fn degree_examples() {
        let d = degree_distribution(&complete(4));
        assert_eq!(d.degrees, vec![3; 4]);
        assert_eq!(d.normalized, vec![0.75; 4]);
        let d = degree_distribution(&star(5));
        assert_eq!(d.degrees, vec![5, 1, 1, 1, 1, 1]);
        assert_eq!(d.histogram.get(&1), Some(&5));
        assert!((d.mean() - 10.0 / 6.0).abs() < 1e-15);
    }
}
