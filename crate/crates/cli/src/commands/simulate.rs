use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use rcc_core::build::{cover_to_graph, cover_to_multigraph, growth_trajectory, log_spaced, GrowthPoint};
use rcc_core::stats::{
    degree_distribution, sparsity_regression, summarize, write_histogram_csv, GraphSummary, Regression,
    SummaryOptions, TableRow, DEFAULT_CLIQUE_BUDGET,
};
use rcc_core::{derived_rng, Hyperparams};

use crate::error::{CliError, Result};
use crate::output::{io_err, OutDir};
use crate::threads;

/// Grid of hyperparameters, each run for several replicates.
#[derive(Debug, Clone, PartialEq, Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateArgs {
    /// Mass parameter values, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "20")]
    pub alpha: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "0.2,0.5,0.8")]
    pub sigma: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "1,3,5")]
    pub c: Vec<f64>,
    /// Cliques drawn per replicate.
    #[arg(long, default_value_t = 100)]
    pub cliques: usize,
    /// Trajectory points, log-spaced from one clique to `cliques`.
    #[arg(long, default_value_t = 20)]
    pub points: usize,
    #[arg(long, default_value_t = 10)]
    pub replicates: u32,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Largest clique count j tallied in zipf.csv.
    #[arg(long, default_value_t = 30)]
    pub zipf_max: u32,
    #[arg(long)]
    pub skip_max_clique: bool,
    #[arg(long, default_value_t = DEFAULT_CLIQUE_BUDGET)]
    pub clique_budget: usize,
    /// Also write every replicate's graph and multigraph edge lists.
    #[arg(long)]
    pub write_graphs: bool,
    #[arg(long, default_value = "rcc-simulate")]
    pub out: PathBuf,
    /// JSON object (inline or a file path) overriding the flags above.
    #[arg(long)]
    #[serde(skip)]
    pub config: Option<String>,
}

#[derive(Debug, Clone, Copy, Serialize)]
struct GridPoint {
    alpha: f64,
    sigma: f64,
    c: f64,
}

struct Replicate {
    points: Vec<GrowthPoint>,
    summary: Option<GraphSummary>,
    mean_clique_size: f64,
    degrees: BTreeMap<usize, usize>,
    zipf: Vec<usize>,
    edge_lists: Option<(Vec<u8>, Vec<u8>)>,
}

impl SimulateArgs {
    fn grid(&self) -> Result<Vec<(GridPoint, Hyperparams)>> {
        if self.alpha.is_empty() || self.sigma.is_empty() || self.c.is_empty() {
            return Err(CliError::Validation("hyperparameter grid is empty".into()));
        }
        if self.replicates == 0 || self.cliques == 0 {
            return Err(CliError::Validation(
                "replicates and cliques must be at least 1".into(),
            ));
        }
        let mut grid = Vec::new();
        for &alpha in &self.alpha {
            for &sigma in &self.sigma {
                for &c in &self.c {
                    let hp = Hyperparams::new(alpha, sigma, c, self.cliques as f64)?;
                    grid.push((GridPoint { alpha, sigma, c }, hp));
                }
            }
        }
        Ok(grid)
    }
}

fn run_replicate(args: &SimulateArgs, hp: &Hyperparams, grid: u32, rep: u32) -> Result<Replicate> {
    let mut rng = derived_rng(args.seed, grid, rep);
    let checkpoints = log_spaced(1, args.cliques, args.points.max(2));
    let (points, cover) = growth_trajectory(hp, &checkpoints, &mut rng)?;
    let g = cover_to_graph(&cover);
    let opts = SummaryOptions {
        skip_max_clique: args.skip_max_clique,
        clique_budget: args.clique_budget,
        ..SummaryOptions::default()
    };
    let summary = if g.vertex_count() >= 2 {
        Some(summarize(&g, &opts).map_err(|e| match e {
            rcc_core::Error::CliqueBudget { budget, .. } => CliError::Budget(format!(
                "grid point {grid}, replicate {rep}: more than {budget} maximal cliques"
            )),
            other => other.into(),
        })?)
    } else {
        None
    };
    let mut zipf = vec![0usize; args.zipf_max as usize];
    for &m in cover.column_counts() {
        if let Some(slot) = zipf.get_mut(m as usize - 1) {
            *slot += 1;
        }
    }
    let edge_lists = if args.write_graphs {
        let (mut a, mut b) = (Vec::new(), Vec::new());
        g.write_edge_list(&mut a)?;
        cover_to_multigraph(&cover).write_edge_list(&mut b)?;
        Some((a, b))
    } else {
        None
    };
    Ok(Replicate {
        points,
        summary,
        mean_clique_size: cover.total_entries() as f64 / cover.num_cliques() as f64,
        degrees: degree_distribution(&g).histogram,
        zipf,
        edge_lists,
    })
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

fn regression_fields(r: Option<&Regression>) -> [String; 2] {
    [fmt_opt(r.map(|r| r.slope)), fmt_opt(r.map(|r| r.slope_std_error))]
}

pub fn run(args: SimulateArgs) -> Result<()> {
    let grid = args.grid()?;
    let jobs: Vec<(u32, u32)> = (0..grid.len() as u32)
        .flat_map(|g| (0..args.replicates).map(move |r| (g, r)))
        .collect();
    let pool = threads::pool()?;
    let results: Vec<Replicate> = pool.install(|| {
        jobs.par_iter()
            .map(|&(g, r)| run_replicate(&args, &grid[g as usize].1, g, r))
            .collect::<Result<_>>()
    })?;

    let mut out = OutDir::create(&args.out)?;
    let per_grid = args.replicates as usize;

    out.with("trajectories.csv", |w| {
        writeln!(
            w,
            "grid,replicate,alpha,sigma,c,n_cliques,vertices,edges,multi_edges,density"
        )?;
        for (&(g, r), rep) in jobs.iter().zip(&results) {
            let p = grid[g as usize].0;
            for pt in &rep.points {
                let v = pt.vertices as f64;
                let density = if pt.vertices >= 2 {
                    (2.0 * pt.edges as f64 / (v * (v - 1.0))).to_string()
                } else {
                    String::new()
                };
                writeln!(
                    w,
                    "{g},{r},{},{},{},{},{},{},{},{density}",
                    p.alpha, p.sigma, p.c, pt.n_cliques, pt.vertices, pt.edges, pt.multi_edges
                )?;
            }
        }
        Ok(())
    })?;

    out.with("summaries.csv", |w| {
        writeln!(
            w,
            "grid,replicate,alpha,sigma,c,vertices,edges,mean_clique_size,{}",
            TableRow::CSV_HEADER.join(",")
        )?;
        for (&(g, r), rep) in jobs.iter().zip(&results) {
            let p = grid[g as usize].0;
            let Some(s) = &rep.summary else { continue };
            writeln!(
                w,
                "{g},{r},{},{},{},{},{},{},{}",
                p.alpha,
                p.sigma,
                p.c,
                s.vertex_count,
                s.edge_count,
                rep.mean_clique_size,
                s.table_row().csv_fields().join(",")
            )?;
        }
        Ok(())
    })?;

    out.with("zipf.csv", |w| {
        writeln!(w, "grid,replicate,j,count")?;
        for (&(g, r), rep) in jobs.iter().zip(&results) {
            for (j, count) in rep.zipf.iter().enumerate() {
                writeln!(w, "{g},{r},{},{count}", j + 1)?;
            }
        }
        Ok(())
    })?;

    let mut sparsity = Vec::new();
    for (g, (point, _)) in grid.iter().enumerate() {
        let reps = &results[g * per_grid..(g + 1) * per_grid];
        let mut degrees = BTreeMap::new();
        let mut cliques = BTreeMap::new();
        for rep in reps {
            for (&d, &n) in &rep.degrees {
                *degrees.entry(d).or_insert(0) += n;
            }
            if let Some(per_vertex) = rep
                .summary
                .as_ref()
                .and_then(|s| s.max_clique_per_vertex.as_ref())
            {
                for &m in per_vertex {
                    *cliques.entry(m).or_insert(0) += 1;
                }
            }
        }
        out.with(&format!("degrees_g{g}.csv"), |w| write_histogram_csv(&degrees, w))?;
        if !args.skip_max_clique {
            out.with(&format!("max_clique_g{g}.csv"), |w| {
                write_histogram_csv(&cliques, w)
            })?;
        }

        let pts = reps
            .iter()
            .flat_map(|r| r.points.iter())
            .filter(|p| p.n_cliques >= 2);
        let fit = |pairs: Vec<(usize, usize)>| sparsity_regression(&pairs).ok();
        let vertex = fit(pts.clone().map(|p| (p.n_cliques, p.vertices)).collect());
        let graph = fit(pts.clone().map(|p| (p.vertices, p.edges)).collect());
        let multi = fit(pts.map(|p| (p.vertices, p.multi_edges as usize)).collect());
        sparsity.push((*point, vertex, graph, multi));
    }

    out.with("sparsity.csv", |w| {
        writeln!(
            w,
            "grid,alpha,sigma,c,vertex_slope,vertex_slope_se,graph_slope,graph_slope_se,\
             multigraph_slope,multigraph_slope_se,predicted_vertex_slope,predicted_graph_slope,\
             predicted_multigraph_slope"
        )?;
        for (g, (p, v, e, m)) in sparsity.iter().enumerate() {
            let [vs, vse] = regression_fields(v.as_ref());
            let [es, ese] = regression_fields(e.as_ref());
            let [ms, mse] = regression_fields(m.as_ref());
            let predicted_graph = ((1.0 + p.sigma) / (2.0 * p.sigma)).min(1.5);
            writeln!(
                w,
                "{g},{},{},{},{vs},{vse},{es},{ese},{ms},{mse},{},{predicted_graph},{}",
                p.alpha,
                p.sigma,
                p.c,
                p.sigma,
                1.0 / p.sigma
            )?;
        }
        Ok(())
    })?;

    if args.write_graphs {
        for (&(g, r), rep) in jobs.iter().zip(&results) {
            let (graph, multi) = rep.edge_lists.as_ref().expect("edge lists kept");
            for (suffix, bytes) in [("edges", graph), ("multiedges", multi)] {
                let mut f = out.file(&format!("graphs/g{g}_r{r}.{suffix}"))?;
                f.out.write_all(bytes).map_err(io_err(&f.path))?;
                f.finish()?;
            }
        }
    }

    for (g, (p, v, e, m)) in sparsity.iter().enumerate() {
        crate::output::emit(&format!(
            "grid {g} (alpha={}, sigma={}, c={}): vertex slope {}, graph slope {}, multigraph slope {}",
            p.alpha,
            p.sigma,
            p.c,
            v.as_ref().map_or("n/a".into(), |r| format!("{:.3}", r.slope)),
            e.as_ref().map_or("n/a".into(), |r| format!("{:.3}", r.slope)),
            m.as_ref().map_or("n/a".into(), |r| format!("{:.3}", r.slope)),
        ))?;
    }
    let seeds = serde_json::json!({
        "master": args.seed,
        "derivation": "ChaCha8 seeded with master, stream = grid << 32 | replicate",
        "grid": grid.iter().map(|(p, _)| p).collect::<Vec<_>>(),
    });
    out.manifest("simulate", &args, seeds)
}
