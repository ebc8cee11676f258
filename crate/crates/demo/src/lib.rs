//! WebAssembly bindings for the browser demo. Each export takes plain
//! numbers or text and returns a JSON string; errors come back as
//! JavaScript exceptions carrying the message.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use rcc_core::build::{cover_to_graph, growth_trajectory, log_spaced, GrowthPoint};
use rcc_core::ibp::zipf_count_prediction;
use rcc_core::stats::{degree_distribution, sparsity_regression, summarize, SummaryOptions, TableRow};
use rcc_core::{seeded_rng, Graph, Hyperparams};

const MAX_CLIQUES: usize = 20_000;

#[derive(Serialize)]
struct Growth {
    points: Vec<GrowthPoint>,
    vertex_slope: Option<f64>,
    graph_slope: Option<f64>,
    multigraph_slope: Option<f64>,
}

#[derive(Serialize)]
struct Distributions {
    vertices: usize,
    edges: usize,
    /// `[degree, count]` pairs.
    degrees: Vec<(usize, usize)>,
    /// `[j, observed, predicted]` for vertices in exactly `j` cliques.
    zipf: Vec<(u32, usize, f64)>,
}

#[derive(Serialize)]
struct Summary {
    vertices: usize,
    edges: usize,
    table: TableRow,
}

fn hyperparams(alpha: f64, sigma: f64, c: f64, cliques: usize) -> Result<Hyperparams, String> {
    if cliques == 0 || cliques > MAX_CLIQUES {
        return Err(format!("number of cliques must lie in 1..={MAX_CLIQUES}"));
    }
    Hyperparams::new(alpha, sigma, c, cliques as f64).map_err(|e| e.to_string())
}

fn to_json<T: Serialize>(value: &T) -> Result<String, String> {
    serde_json::to_string(value).map_err(|e| e.to_string())
}

/// Vertex and edge counts as cliques accumulate, with log-log slopes.
pub fn growth_json(alpha: f64, sigma: f64, c: f64, cliques: usize, seed: u64) -> Result<String, String> {
    let hp = hyperparams(alpha, sigma, c, cliques)?;
    let checkpoints = log_spaced(1, cliques, 40);
    let (points, _) =
        growth_trajectory(&hp, &checkpoints, &mut seeded_rng(seed)).map_err(|e| e.to_string())?;
    let usable: Vec<&GrowthPoint> = points.iter().filter(|p| p.n_cliques >= 2).collect();
    let slope = |pairs: Vec<(usize, usize)>| sparsity_regression(&pairs).ok().map(|r| r.slope);
    to_json(&Growth {
        vertex_slope: slope(usable.iter().map(|p| (p.n_cliques, p.vertices)).collect()),
        graph_slope: slope(usable.iter().map(|p| (p.vertices, p.edges)).collect()),
        multigraph_slope: slope(
            usable
                .iter()
                .map(|p| (p.vertices, p.multi_edges as usize))
                .collect(),
        ),
        points,
    })
}

/// Degree histogram of one sampled graph and the per-count vertex tallies
/// next to their large-N prediction.
pub fn distributions_json(
    alpha: f64,
    sigma: f64,
    c: f64,
    cliques: usize,
    seed: u64,
) -> Result<String, String> {
    let hp = hyperparams(alpha, sigma, c, cliques)?;
    let (_, cover) = growth_trajectory(&hp, &[cliques], &mut seeded_rng(seed)).map_err(|e| e.to_string())?;
    let g = cover_to_graph(&cover);
    let mut observed = vec![0usize; 31];
    for &m in cover.column_counts() {
        if let Some(slot) = observed.get_mut(m as usize) {
            *slot += 1;
        }
    }
    let zipf = (1..=30u32)
        .map(|j| {
            let predicted = zipf_count_prediction(&hp, cliques, j).unwrap_or(f64::NAN);
            (j, observed[j as usize], predicted)
        })
        .collect();
    to_json(&Distributions {
        vertices: g.vertex_count(),
        edges: g.edge_count(),
        degrees: degree_distribution(&g).histogram.into_iter().collect(),
        zipf,
    })
}

/// Summary statistics of a pasted `u v` edge list.
pub fn summary_json(edge_list: &str, skip_max_clique: bool) -> Result<String, String> {
    let g = Graph::read_edge_list(edge_list.as_bytes()).map_err(|e| e.to_string())?;
    let opts = SummaryOptions {
        skip_max_clique,
        clique_budget: 100_000,
        ..SummaryOptions::default()
    };
    let s = summarize(&g, &opts).map_err(|e| e.to_string())?;
    to_json(&Summary {
        vertices: s.vertex_count,
        edges: s.edge_count,
        table: s.table_row(),
    })
}

#[wasm_bindgen]
pub fn growth(alpha: f64, sigma: f64, c: f64, cliques: u32, seed: u32) -> Result<String, JsError> {
    growth_json(alpha, sigma, c, cliques as usize, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn distributions(alpha: f64, sigma: f64, c: f64, cliques: u32, seed: u32) -> Result<String, JsError> {
    distributions_json(alpha, sigma, c, cliques as usize, seed as u64).map_err(|e| JsError::new(&e))
}

#[wasm_bindgen]
pub fn summary(edge_list: &str, skip_max_clique: bool) -> Result<String, JsError> {
    summary_json(edge_list, skip_max_clique).map_err(|e| JsError::new(&e))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(s: Result<String, String>) -> serde_json::Value {
        serde_json::from_str(&s.unwrap()).unwrap()
    }

    #[test]
    fn growth_has_increasing_points() {
        let v = parse(growth_json(10.0, 0.5, 1.0, 300, 1));
        let pts = v["points"].as_array().unwrap();
        assert!(pts.len() > 20);
        let verts: Vec<u64> = pts.iter().map(|p| p["vertices"].as_u64().unwrap()).collect();
        assert!(verts.windows(2).all(|w| w[0] <= w[1]));
        assert!(v["graph_slope"].as_f64().unwrap() < 2.0);
        assert!(growth_json(10.0, 1.0, 1.0, 300, 1).is_err());
        assert!(growth_json(10.0, 0.5, 1.0, 0, 1).is_err());
    }

    #[test]
    fn distributions_count_every_vertex() {
        let v = parse(distributions_json(5.0, 0.5, 1.0, 200, 3));
        let total: u64 = v["degrees"]
            .as_array()
            .unwrap()
            .iter()
            .map(|d| d[1].as_u64().unwrap())
            .sum();
        assert_eq!(total, v["vertices"].as_u64().unwrap());
        assert_eq!(v["zipf"].as_array().unwrap().len(), 30);
    }

    #[test]
    fn summary_of_pasted_k4() {
        let v = parse(summary_json("0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n", false));
        assert_eq!(v["table"]["max. clique"], 4.0);
        assert_eq!(v["edges"], 6);
        assert!(summary_json("0 x", false).unwrap_err().contains("line 1"));
    }
}
