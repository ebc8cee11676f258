use serde::{Deserialize, Serialize};

use crate::clique::CliqueMatrix;
use crate::error::{Error, Result};
use crate::graph::Graph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InitStrategy {
    /// One clique per edge.
    #[default]
    TwoCliques,
    /// Greedily grown cliques until every edge is covered.
    GreedyCover,
}

/// Starting cover that reproduces `g` exactly. Isolated vertices get a
/// singleton row so that every vertex belongs to some clique.
pub fn init_cover(g: &Graph, strategy: InitStrategy) -> Result<CliqueMatrix> {
    if g.vertex_count() == 0 {
        return Err(Error::InvalidArgument(
            "cannot initialise a cover of an empty graph".into(),
        ));
    }
    let mut rows: Vec<Vec<u32>> = match strategy {
        InitStrategy::TwoCliques => g.edges().map(|(u, v)| vec![u, v]).collect(),
        InitStrategy::GreedyCover => greedy_cover(g),
    };
    for v in 0..g.vertex_count() as u32 {
        if g.degree(v) == 0 {
            rows.push(vec![v]);
        }
    }
    CliqueMatrix::new(g.vertex_count(), rows)
}

fn greedy_cover(g: &Graph) -> Vec<Vec<u32>> {
    // uncovered[v] = neighbours u of v whose edge is not yet covered
    let mut uncovered: Vec<Vec<u32>> = (0..g.vertex_count() as u32)
        .map(|v| g.neighbors(v).to_vec())
        .collect();
    let mut rows = Vec::new();
    for (u, v) in g.edges() {
        if uncovered[u as usize].binary_search(&v).is_err() {
            continue;
        }
        let mut clique = vec![u, v];
        let mut candidates: Vec<u32> = g
            .neighbors(u)
            .iter()
            .copied()
            .filter(|&w| w != v && g.has_edge(v, w))
            .collect();
        while !candidates.is_empty() {
            // prefer the candidate closing the most uncovered edges
            let (pos, _) = candidates
                .iter()
                .enumerate()
                .map(|(p, &w)| {
                    let gain = clique
                        .iter()
                        .filter(|&&x| uncovered[w as usize].binary_search(&x).is_ok())
                        .count();
                    (p, (gain, std::cmp::Reverse(w)))
                })
                .max_by_key(|&(_, key)| key)
                .expect("candidates nonempty");
            let w = candidates.swap_remove(pos);
            if clique
                .iter()
                .all(|&x| uncovered[w as usize].binary_search(&x).is_err())
            {
                break;
            }
            clique.push(w);
            candidates.retain(|&x| g.has_edge(w, x));
        }
        clique.sort_unstable();
        for (a, &x) in clique.iter().enumerate() {
            for &y in &clique[a + 1..] {
                if let Ok(p) = uncovered[x as usize].binary_search(&y) {
                    uncovered[x as usize].remove(p);
                }
                if let Ok(p) = uncovered[y as usize].binary_search(&x) {
                    uncovered[y as usize].remove(p);
                }
            }
        }
        rows.push(clique);
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::build::cover_to_graph;
    use proptest::prelude::*;

    #[test]
    fn triangle_two_cliques() {
        let g = Graph::from_edges(3, vec![(0, 1), (1, 2), (0, 2)]).unwrap();
        let z = init_cover(&g, InitStrategy::TwoCliques).unwrap();
        assert_eq!(z.num_cliques(), 3);
        assert_eq!(cover_to_graph(&z), g);
    }

    #[test]
    fn complete_graph_greedy() {
        let edges = (0..4u32).flat_map(|u| (u + 1..4).map(move |v| (u, v)));
        let g = Graph::from_edges(4, edges).unwrap();
        let z = init_cover(&g, InitStrategy::GreedyCover).unwrap();
        assert_eq!(z.rows(), &[vec![0, 1, 2, 3]]);
    }

    #[test]
    fn isolated_vertices_get_singletons() {
        let g = Graph::from_edges(3, vec![(0, 1)]).unwrap();
        let z = init_cover(&g, InitStrategy::TwoCliques).unwrap();
        assert_eq!(z.rows(), &[vec![0, 1], vec![2]]);
        assert!(z.has_no_empty_columns());
        assert!(init_cover(&Graph::new(0), InitStrategy::TwoCliques).is_err());
    }

    proptest! {
        #[test]
        fn covers_reproduce_graph(n in 1usize..16, p in 0.0f64..1.0, seed in any::<u64>()) {
            let g = crate::stats::fixtures::random_graph(n, p, seed);
            for s in [InitStrategy::TwoCliques, InitStrategy::GreedyCover] {
                let z = init_cover(&g, s).unwrap();
                prop_assert_eq!(&cover_to_graph(&z), &g);
                prop_assert!(z.has_no_empty_columns());
            }
            let greedy = init_cover(&g, InitStrategy::GreedyCover).unwrap();
            let two = init_cover(&g, InitStrategy::TwoCliques).unwrap();
            prop_assert!(greedy.num_cliques() <= two.num_cliques());
        }
    }
}
