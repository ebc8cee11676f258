//! From clique covers to graphs: the deterministic union-of-cliques graph,
//! the multigraph that counts shared cliques, and the noisy-OR partially
//! observed graph.

use std::collections::{BTreeMap, HashSet};

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::clique::CliqueMatrix;
use crate::error::{Error, Result};
use crate::graph::{Graph, Multigraph};
use crate::hyper::Hyperparams;
use crate::ibp::IbpSampler;

/// Edge (i, j) exists iff some clique contains both.
pub fn cover_to_graph(z: &CliqueMatrix) -> Graph {
    let edges = z.rows().iter().flat_map(|row| row_pairs(row));
    Graph::from_edges(z.vertex_count(), edges).expect("cover indices are in range")
}

/// Multiplicity of (i, j) is the number of cliques containing both.
pub fn cover_to_multigraph(z: &CliqueMatrix) -> Multigraph {
    let mut g = Multigraph::new(z.vertex_count());
    for row in z.rows() {
        for (u, v) in row_pairs(row) {
            g.add_edges(u, v, 1).expect("cover indices are in range");
        }
    }
    g
}

/// Graph with one vertex per clique and an edge between overlapping cliques.
pub fn clique_intersection_graph(z: &CliqueMatrix) -> Graph {
    let mut rows_of: Vec<Vec<u32>> = vec![Vec::new(); z.vertex_count()];
    for (n, row) in z.rows().iter().enumerate() {
        for &v in row {
            rows_of[v as usize].push(n as u32);
        }
    }
    let edges = rows_of.iter().flat_map(|rows| row_pairs(rows));
    Graph::from_edges(z.num_cliques(), edges).expect("row indices are in range")
}

pub(crate) fn row_pairs(row: &[u32]) -> impl Iterator<Item = (u32, u32)> + '_ {
    row.iter()
        .enumerate()
        .flat_map(move |(a, &u)| row[a + 1..].iter().map(move |&v| (u, v)))
}

/// Edge-activation probabilities for the noisy-OR observation model.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(
    tag = "mode",
    content = "pi",
    rename_all = "snake_case",
    try_from = "NoisyOrRaw"
)]
pub enum NoisyOrParams {
    /// One probability for every clique.
    Shared(f64),
    /// One probability per clique, indexed like the rows of the cover.
    PerClique(Vec<f64>),
}

#[derive(Deserialize)]
#[serde(tag = "mode", content = "pi", rename_all = "snake_case")]
enum NoisyOrRaw {
    Shared(f64),
    PerClique(Vec<f64>),
}

impl TryFrom<NoisyOrRaw> for NoisyOrParams {
    type Error = Error;

    fn try_from(raw: NoisyOrRaw) -> Result<Self> {
        match raw {
            NoisyOrRaw::Shared(p) => Self::shared(p),
            NoisyOrRaw::PerClique(ps) => Self::per_clique(ps),
        }
    }
}

fn check_prob(p: f64) -> Result<f64> {
    if (0.0..=1.0).contains(&p) {
        Ok(p)
    } else {
        Err(Error::InvalidArgument(format!(
            "edge probability must lie in [0, 1], got {p}"
        )))
    }
}

impl NoisyOrParams {
    pub fn shared(pi: f64) -> Result<Self> {
        Ok(Self::Shared(check_prob(pi)?))
    }

    pub fn per_clique(pis: Vec<f64>) -> Result<Self> {
        for &p in &pis {
            check_prob(p)?;
        }
        Ok(Self::PerClique(pis))
    }

    /// Activation probability of clique `n`.
    pub fn pi(&self, n: usize) -> f64 {
        match self {
            Self::Shared(p) => *p,
            Self::PerClique(ps) => ps[n],
        }
    }

    fn check_against(&self, z: &CliqueMatrix) -> Result<()> {
        match self {
            Self::PerClique(ps) if ps.len() != z.num_cliques() => Err(Error::InvalidArgument(format!(
                "{} per-clique probabilities for {} cliques",
                ps.len(),
                z.num_cliques()
            ))),
            _ => Ok(()),
        }
    }
}

/// `1 - prod_{n : i, j in C_n} (1 - pi_n)`.
pub fn noisy_or_edge_prob(i: u32, j: u32, z: &CliqueMatrix, p: &NoisyOrParams) -> Result<f64> {
    if i == j {
        return Err(Error::InvalidArgument("noisy-OR probability needs i != j".into()));
    }
    p.check_against(z)?;
    let miss: f64 = (0..z.num_cliques())
        .filter(|&n| z.contains(n, i) && z.contains(n, j))
        .map(|n| 1.0 - p.pi(n))
        .product();
    Ok(1.0 - miss)
}

/// Draws each covered pair independently with its noisy-OR probability.
pub fn sample_observed_graph<R: Rng + ?Sized>(
    z: &CliqueMatrix,
    p: &NoisyOrParams,
    rng: &mut R,
) -> Result<Graph> {
    p.check_against(z)?;
    let mut miss: BTreeMap<(u32, u32), f64> = BTreeMap::new();
    for (n, row) in z.rows().iter().enumerate() {
        let q = 1.0 - p.pi(n);
        for pair in row_pairs(row) {
            *miss.entry(pair).or_insert(1.0) *= q;
        }
    }
    let edges: Vec<(u32, u32)> = miss
        .into_iter()
        .filter(|&(_, q)| rng.random::<f64>() >= q)
        .map(|(pair, _)| pair)
        .collect();
    Graph::from_edges(z.vertex_count(), edges)
}

/// Superposes an Erdős–Rényi graph `G(|C_n|, pi_n)` on every clique.
pub fn sample_observed_graph_superposition<R: Rng + ?Sized>(
    z: &CliqueMatrix,
    p: &NoisyOrParams,
    rng: &mut R,
) -> Result<Graph> {
    p.check_against(z)?;
    let mut edges = Vec::new();
    for (n, row) in z.rows().iter().enumerate() {
        let pi = p.pi(n);
        edges.extend(row_pairs(row).filter(|_| rng.random::<f64>() < pi));
    }
    Graph::from_edges(z.vertex_count(), edges)
}

/// Size of a growing cover after `n_cliques` rows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GrowthPoint {
    pub n_cliques: usize,
    pub vertices: usize,
    /// Distinct edges of the union-of-cliques graph.
    pub edges: usize,
    /// Edges of the multigraph, counted with multiplicity.
    pub multi_edges: u64,
}

/// Draws rows one at a time and records vertex and edge counts whenever the
/// number of rows reaches one of `checkpoints` (sorted ascending). Also
/// returns the cover after the last checkpoint.
pub fn growth_trajectory<R: Rng + ?Sized>(
    hp: &Hyperparams,
    checkpoints: &[usize],
    rng: &mut R,
) -> Result<(Vec<GrowthPoint>, CliqueMatrix)> {
    if checkpoints.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidArgument(
            "checkpoints must be strictly increasing".into(),
        ));
    }
    let mut sampler = IbpSampler::new(*hp);
    let mut pairs: HashSet<u64> = HashSet::new();
    let mut multi = 0u64;
    let mut out = Vec::with_capacity(checkpoints.len());
    let mut next = checkpoints.iter().peekable();
    while next.peek().is_some_and(|&&n| n == 0) {
        out.push(GrowthPoint {
            n_cliques: 0,
            vertices: 0,
            edges: 0,
            multi_edges: 0,
        });
        next.next();
    }
    let last = checkpoints.last().copied().unwrap_or(0);
    let mut rows = Vec::with_capacity(last);
    for n in 1..=last {
        let row = sampler.next_row(rng);
        let k = row.len() as u64;
        multi += k * k.saturating_sub(1) / 2;
        pairs.extend(row_pairs(&row).map(|(u, v)| (u as u64) << 32 | v as u64));
        if next.peek() == Some(&&n) {
            out.push(GrowthPoint {
                n_cliques: n,
                vertices: sampler.vertex_count(),
                edges: pairs.len(),
                multi_edges: multi,
            });
            next.next();
        }
        rows.push(row);
    }
    let cover = CliqueMatrix::new(sampler.vertex_count(), rows)?;
    Ok((out, cover))
}

/// `count` row counts spaced roughly evenly on a log scale between `lo` and
/// `hi` inclusive, deduplicated after rounding.
pub fn log_spaced(lo: usize, hi: usize, count: usize) -> Vec<usize> {
    if lo == 0 || hi < lo || count < 2 {
        return vec![hi.max(lo)];
    }
    let (a, b) = ((lo as f64).ln(), (hi as f64).ln());
    let mut out: Vec<usize> = (0..count)
        .map(|t| (a + (b - a) * t as f64 / (count - 1) as f64).exp().round() as usize)
        .collect();
    out.dedup();
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::seeded_rng;

    fn z(rows: Vec<Vec<u32>>) -> CliqueMatrix {
        CliqueMatrix::from_rows(rows)
    }

    #[test]
    fn union_of_cliques() {
        let g = cover_to_graph(&z(vec![vec![0, 1], vec![1, 2]]));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
        assert!(!g.has_edge(0, 2));

        let g = cover_to_graph(&z(vec![vec![0, 1, 2, 3, 4]]));
        assert_eq!(g.edge_count(), 10);

        let g = cover_to_graph(&z(vec![vec![0, 1, 2], vec![2, 3]]));
        assert_eq!(
            g.edges().collect::<Vec<_>>(),
            vec![(0, 1), (0, 2), (1, 2), (2, 3)]
        );
    }

    #[test]
    fn multigraph_counts_shared_cliques() {
        let m = cover_to_multigraph(&z(vec![vec![0, 1], vec![0, 1]]));
        assert_eq!(m.multiplicity(0, 1), 2);
        let m = cover_to_multigraph(&z(vec![vec![0], vec![1], vec![2]]));
        assert_eq!(m.distinct_pairs(), 0);
        let cover = z(vec![vec![0, 1, 2], vec![1, 2, 3], vec![3, 4]]);
        assert_eq!(cover_to_multigraph(&cover).collapse(), cover_to_graph(&cover));
    }

    #[test]
    fn noisy_or_probabilities() {
        let cover = z(vec![vec![0, 1], vec![0, 1, 2], vec![3]]);
        let shared = NoisyOrParams::shared(0.4).unwrap();
        assert_eq!(noisy_or_edge_prob(0, 3, &cover, &shared).unwrap(), 0.0);
        assert!((noisy_or_edge_prob(0, 1, &cover, &shared).unwrap() - 0.64).abs() < 1e-12);
        let per = NoisyOrParams::per_clique(vec![1.0, 0.3, 0.5]).unwrap();
        assert_eq!(noisy_or_edge_prob(1, 0, &cover, &per).unwrap(), 1.0);
        assert!(noisy_or_edge_prob(1, 1, &cover, &per).is_err());
        assert!(NoisyOrParams::shared(1.5).is_err());
        assert!(noisy_or_edge_prob(0, 1, &cover, &NoisyOrParams::PerClique(vec![0.5])).is_err());
    }

    #[test]
    fn deterministic_limits() {
        let cover = z(vec![vec![0, 1, 2, 3], vec![3, 4, 5], vec![5, 6]]);
        let mut rng = seeded_rng(3);
        let all = NoisyOrParams::shared(1.0).unwrap();
        let none = NoisyOrParams::shared(0.0).unwrap();
        for sampler in [
            sample_observed_graph::<crate::SeededRng>,
            sample_observed_graph_superposition,
        ] {
            assert_eq!(sampler(&cover, &all, &mut rng).unwrap(), cover_to_graph(&cover));
            assert_eq!(sampler(&cover, &none, &mut rng).unwrap().edge_count(), 0);
        }
    }

    #[test]
    fn noisy_or_json() {
        let p = NoisyOrParams::shared(0.4).unwrap();
        let s = serde_json::to_string(&p).unwrap();
        assert_eq!(s, r#"{"mode":"shared","pi":0.4}"#);
        assert_eq!(serde_json::from_str::<NoisyOrParams>(&s).unwrap(), p);
        assert!(serde_json::from_str::<NoisyOrParams>(r#"{"mode":"per_clique","pi":[0.2,2.0]}"#).is_err());
    }

    #[test]
    fn trajectory_matches_full_build() {
        let hp = Hyperparams::new(6.0, 0.5, 1.0, 10.0).unwrap();
        let (points, cover) = growth_trajectory(&hp, &[0, 5, 40], &mut seeded_rng(8)).unwrap();
        let z = crate::ibp::sample_clique_matrix(&hp, crate::ibp::NumCliques::Fixed(40), &mut seeded_rng(8));
        assert_eq!(cover, z);
        let last = points[2];
        assert_eq!(points[0].vertices, 0);
        assert_eq!(last.vertices, z.vertex_count());
        assert_eq!(last.edges, cover_to_graph(&z).edge_count());
        assert_eq!(last.multi_edges, cover_to_multigraph(&z).total_edges());
        assert!(points[1].edges <= last.edges);
        assert!(growth_trajectory(&hp, &[5, 5], &mut seeded_rng(1)).is_err());
    }

    #[test]
    fn log_spacing() {
        assert_eq!(log_spaced(10, 1000, 3), vec![10, 100, 1000]);
        let p = log_spaced(1, 10, 30);
        assert!(p.windows(2).all(|w| w[0] < w[1]));
        assert_eq!((p[0], *p.last().unwrap()), (1, 10));
    }

    #[test]
    fn intersection_graph() {
        let g = clique_intersection_graph(&z(vec![vec![0, 1], vec![1, 2], vec![3, 4]]));
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1)]);
        let g = clique_intersection_graph(&z(vec![vec![0, 1], vec![0, 2], vec![0, 3], vec![0]]));
        assert_eq!(g.edge_count(), 6);
    }
}
