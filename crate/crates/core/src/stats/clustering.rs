use crate::graph::Graph;

/// Triangles through each vertex, found once per triangle by intersecting
/// out-lists of a degree-ordered orientation.
pub fn vertex_triangles(g: &Graph) -> Vec<u64> {
    let n = g.vertex_count();
    let rank = |v: u32| (g.degree(v), v);
    let out: Vec<Vec<u32>> = (0..n as u32)
        .map(|u| {
            g.neighbors(u)
                .iter()
                .copied()
                .filter(|&v| rank(v) > rank(u))
                .collect()
        })
        .collect();
    let mut counts = vec![0u64; n];
    for u in 0..n {
        for &v in &out[u] {
            let (a, b) = (&out[u], &out[v as usize]);
            let (mut i, mut j) = (0, 0);
            while i < a.len() && j < b.len() {
                match a[i].cmp(&b[j]) {
                    std::cmp::Ordering::Less => i += 1,
                    std::cmp::Ordering::Greater => j += 1,
                    std::cmp::Ordering::Equal => {
                        counts[u] += 1;
                        counts[v as usize] += 1;
                        counts[a[i] as usize] += 1;
                        i += 1;
                        j += 1;
                    }
                }
            }
        }
    }
    counts
}

pub fn triangle_count(g: &Graph) -> u64 {
    vertex_triangles(g).iter().sum::<u64>() / 3
}

pub fn triangles_per_vertex(g: &Graph) -> f64 {
    if g.vertex_count() == 0 {
        return 0.0;
    }
    triangle_count(g) as f64 / g.vertex_count() as f64
}

/// Fraction of neighbor pairs of `v` that are adjacent; 0 when `deg(v) < 2`.
pub fn local_clustering(g: &Graph, v: u32) -> f64 {
    let k = g.degree(v);
    if k < 2 {
        return 0.0;
    }
    let nb = g.neighbors(v);
    let mut links = 0u64;
    for (a, &x) in nb.iter().enumerate() {
        for &y in &nb[a + 1..] {
            if g.has_edge(x, y) {
                links += 1;
            }
        }
    }
    links as f64 / (k * (k - 1) / 2) as f64
}

/// How vertices with fewer than two neighbors enter the average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusteringMode {
    /// Left out of the average.
    #[default]
    ExcludeLowDegree,
    /// Counted with coefficient 0.
    IncludeAsZero,
}

pub fn average_local_clustering(g: &Graph, mode: ClusteringMode) -> f64 {
    let tri = vertex_triangles(g);
    let mut sum = 0.0;
    let mut count = 0usize;
    for (v, &t) in tri.iter().enumerate() {
        let k = g.degree(v as u32) as u64;
        if k < 2 {
            if mode == ClusteringMode::IncludeAsZero {
                count += 1;
            }
            continue;
        }
        sum += t as f64 / (k * (k - 1) / 2) as f64;
        count += 1;
    }
    if count == 0 {
        0.0
    } else {
        sum / count as f64
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats::fixtures::*;

    #[test]
    fn examples() {
        let k3 = complete(3);
        assert_eq!(local_clustering(&k3, 0), 1.0);
        assert_eq!(local_clustering(&path(3), 1), 0.0);
        assert_eq!(triangles_per_vertex(&complete(4)), 1.0);
        assert_eq!(triangles_per_vertex(&star(6)), 0.0);
        assert_eq!(triangles_per_vertex(&path(7)), 0.0);
    }

    #[test]
    fn low_degree_modes() {
        let g = paw();
        // vertices 0, 1 have C = 1, vertex 2 has 1/3, vertex 3 has degree 1
        let excl = average_local_clustering(&g, ClusteringMode::ExcludeLowDegree);
        let incl = average_local_clustering(&g, ClusteringMode::IncludeAsZero);
        assert!((excl - (2.0 + 1.0 / 3.0) / 3.0).abs() < 1e-12);
        assert!((incl - (2.0 + 1.0 / 3.0) / 4.0).abs() < 1e-12);
    }

    #[test]
    fn per_vertex_counts_agree_with_local_scan() {
        let g = Graph::from_edges(
            6,
            vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3), (3, 4), (2, 4), (4, 5)],
        )
        .unwrap();
        let tri = vertex_triangles(&g);
        for v in 0..6u32 {
            let k = g.degree(v) as f64;
            if k >= 2.0 {
                let c = tri[v as usize] as f64 / (k * (k - 1.0) / 2.0);
                assert!((c - local_clustering(&g, v)).abs() < 1e-12);
            }
        }
        assert_eq!(tri.iter().sum::<u64>(), 3 * triangle_count(&g));
        assert_eq!(triangle_count(&g), 3);
    }
}
