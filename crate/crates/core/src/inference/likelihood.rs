use std::collections::BTreeMap;

use crate::build::{row_pairs, NoisyOrParams};
use crate::clique::CliqueMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

fn check_columns(z: &CliqueMatrix, g: &Graph) -> Result<()> {
    if z.vertex_count() != g.vertex_count() {
        return Err(Error::InvalidArgument(format!(
            "cover has {} columns but the graph has {} vertices",
            z.vertex_count(),
            g.vertex_count()
        )));
    }
    Ok(())
}

/// `0` when the cover reproduces `g` exactly, `-inf` otherwise.
pub fn full_log_likelihood(z: &CliqueMatrix, g: &Graph) -> Result<f64> {
    check_columns(z, g)?;
    let mut covered = std::collections::BTreeSet::new();
    for row in z.rows() {
        for (u, v) in row_pairs(row) {
            if !g.has_edge(u, v) {
                return Ok(f64::NEG_INFINITY);
            }
            covered.insert((u, v));
        }
    }
    Ok(if covered.len() == g.edge_count() {
        0.0
    } else {
        f64::NEG_INFINITY
    })
}

/// Log-likelihood of one vertex pair under noisy-OR, given
/// `log_q = sum of ln(1 - pi_n)` over the cliques covering it.
pub(crate) fn pair_log_lik(edge: bool, count: u32, log_q: f64) -> f64 {
    match (edge, count) {
        (true, 0) => f64::NEG_INFINITY,
        (false, 0) => 0.0,
        (true, _) => (-log_q.exp_m1()).ln(),
        (false, _) => log_q,
    }
}

/// Noisy-OR log-likelihood of `g` given the cover. Covered non-edges add
/// `sum ln(1 - pi_n)`, edges add `ln(1 - prod(1 - pi_n))` and uncovered
/// edges make the result `-inf`.
pub fn partial_log_likelihood(z: &CliqueMatrix, g: &Graph, p: &NoisyOrParams) -> Result<f64> {
    check_columns(z, g)?;
    if let NoisyOrParams::PerClique(ps) = p {
        if ps.len() != z.num_cliques() {
            return Err(Error::InvalidArgument(format!(
                "{} clique probabilities for {} cliques",
                ps.len(),
                z.num_cliques()
            )));
        }
    }
    let mut pairs: BTreeMap<(u32, u32), (u32, f64)> = BTreeMap::new();
    for (n, row) in z.rows().iter().enumerate() {
        let lq = (-p.pi(n)).ln_1p();
        for pair in row_pairs(row) {
            let e = pairs.entry(pair).or_insert((0, 0.0));
            e.0 += 1;
            e.1 += lq;
        }
    }
    let mut total = 0.0;
    let mut covered_edges = 0;
    for (&(u, v), &(count, lq)) in &pairs {
        let edge = g.has_edge(u, v);
        covered_edges += edge as usize;
        total += pair_log_lik(edge, count, lq);
    }
    if covered_edges < g.edge_count() {
        return Ok(f64::NEG_INFINITY);
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::cover_to_graph;

    fn two_cliques(g: &Graph) -> CliqueMatrix {
        CliqueMatrix::new(g.vertex_count(), g.edges().map(|(u, v)| vec![u, v]).collect()).unwrap()
    }

    fn paw() -> Graph {
        Graph::from_edges(4, vec![(0, 1), (0, 2), (1, 2), (2, 3)]).unwrap()
    }

    #[test]
    fn full_examples() {
        let g = paw();
        assert_eq!(full_log_likelihood(&two_cliques(&g), &g).unwrap(), 0.0);
        let extra = CliqueMatrix::new(4, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        assert_eq!(full_log_likelihood(&extra, &g).unwrap(), f64::NEG_INFINITY);
        let missing = CliqueMatrix::new(4, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(full_log_likelihood(&missing, &g).unwrap(), f64::NEG_INFINITY);
        assert!(full_log_likelihood(&missing, &Graph::new(3)).is_err());
    }

    #[test]
    fn partial_examples() {
        let g = paw();
        let z = two_cliques(&g);
        let half = NoisyOrParams::shared(0.5).unwrap();
        let ll = partial_log_likelihood(&z, &g, &half).unwrap();
        assert!((ll - 4.0 * 0.5f64.ln()).abs() < 1e-12);
        let one = NoisyOrParams::shared(1.0).unwrap();
        assert_eq!(partial_log_likelihood(&z, &g, &one).unwrap(), 0.0);
        let over = CliqueMatrix::new(4, vec![vec![0, 1, 2, 3]]).unwrap();
        assert_eq!(
            partial_log_likelihood(&over, &g, &one).unwrap(),
            f64::NEG_INFINITY
        );
        let missing = CliqueMatrix::new(4, vec![vec![0, 1, 2]]).unwrap();
        assert_eq!(
            partial_log_likelihood(&missing, &g, &half).unwrap(),
            f64::NEG_INFINITY
        );
    }

    /// Sum over per-clique edge activations of a superposition of
    /// Erdős–Rényi graphs, restricted to activations whose union is `g`.
    fn superposition_prob(z: &CliqueMatrix, g: &Graph, pis: &[f64]) -> f64 {
        let slots: Vec<(usize, (u32, u32))> = z
            .rows()
            .iter()
            .enumerate()
            .flat_map(|(n, r)| row_pairs(r).map(move |p| (n, p)))
            .collect();
        let mut total = 0.0;
        for mask in 0u32..(1 << slots.len()) {
            let mut prob = 1.0;
            let mut edges = Vec::new();
            for (b, &(n, pair)) in slots.iter().enumerate() {
                if mask & (1 << b) != 0 {
                    prob *= pis[n];
                    edges.push(pair);
                } else {
                    prob *= 1.0 - pis[n];
                }
            }
            if Graph::from_edges(z.vertex_count(), edges).unwrap() == *g {
                total += prob;
            }
        }
        total
    }

    #[test]
    fn partial_matches_superposition_enumeration() {
        let z = CliqueMatrix::new(4, vec![vec![0, 1, 2], vec![1, 2, 3]]).unwrap();
        let pis = [0.3, 0.7];
        let p = NoisyOrParams::per_clique(pis.to_vec()).unwrap();
        let full = cover_to_graph(&z);
        let all: Vec<(u32, u32)> = full.edges().collect();
        let mut mass = 0.0;
        for mask in 0u32..(1 << all.len()) {
            let edges = all
                .iter()
                .enumerate()
                .filter(|(b, _)| mask & (1 << b) != 0)
                .map(|(_, &e)| e);
            let g = Graph::from_edges(4, edges).unwrap();
            let want = superposition_prob(&z, &g, &pis);
            let got = partial_log_likelihood(&z, &g, &p).unwrap().exp();
            assert!((got - want).abs() < 1e-12, "{mask}: {got} vs {want}");
            mass += got;
        }
        assert!((mass - 1.0).abs() < 1e-12);
    }
}
