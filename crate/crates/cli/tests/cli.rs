use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn rcc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcc"))
        .current_dir(dir)
        .args(args)
        .output()
        .expect("binary runs")
}

fn rcc_env(dir: &Path, args: &[&str], threads: &str) -> Output {
    Command::new(env!("CARGO_BIN_EXE_rcc"))
        .current_dir(dir)
        .env("RCC_THREADS", threads)
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn ok(o: Output) -> Output {
    assert_eq!(code(&o), 0, "stderr: {}", String::from_utf8_lossy(&o.stderr));
    o
}

fn json(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap()
}

/// Parses a CSV written by the tool: a header and rows of the same width
/// whose fields are empty, numeric or plain labels.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let header: Vec<String> = lines.next().unwrap().split(',').map(String::from).collect();
    let rows: Vec<Vec<String>> = lines.map(|l| l.split(',').map(String::from).collect()).collect();
    for r in &rows {
        assert_eq!(r.len(), header.len(), "{}: {r:?}", path.display());
    }
    (header, rows)
}

fn column(header: &[String], rows: &[Vec<String>], name: &str) -> Vec<f64> {
    let i = header
        .iter()
        .position(|h| h == name)
        .unwrap_or_else(|| panic!("no column {name}"));
    rows.iter().map(|r| r[i].parse().unwrap()).collect()
}

fn write(dir: &Path, name: &str, text: &str) {
    std::fs::write(dir.join(name), text).unwrap();
}

const K4: &str = "0 1\n0 2\n0 3\n1 2\n1 3\n2 3\n";

#[test]
fn stats_of_k4() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "k4.txt", K4);
    ok(rcc(dir.path(), &["stats", "k4.txt", "--out", "st"]));
    let s = json(dir.path().join("st/summary.json"));
    assert_eq!(s["table"]["triang./vertex"], 1.0);
    assert_eq!(s["table"]["density (×1k)"], 1000.0);
    assert_eq!(s["table"]["av. degree"], 3.0);
    assert_eq!(s["table"]["max. clique"], 4.0);
    assert_eq!(s["table"]["cluster. coeff."], 1.0);
    let (h, rows) = read_csv(&dir.path().join("st/degree_hist.csv"));
    assert_eq!(h, ["value", "count"]);
    assert_eq!(rows, [["3", "4"]]);
    let (h, rows) = read_csv(&dir.path().join("st/summary.csv"));
    assert_eq!(h[0], "label");
    assert_eq!(rows[0][0], "k4");

    ok(rcc(
        dir.path(),
        &["stats", "k4.txt", "--skip-max-clique", "--out", "skip"],
    ));
    let s = json(dir.path().join("skip/summary.json"));
    assert!(s["table"]["max. clique"].is_null());
    assert!(!dir.path().join("skip/max_clique_hist.csv").exists());
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "k4.txt", K4);
    write(dir.path(), "bad.txt", "0 1\n1 x\n");
    assert_eq!(code(&rcc(dir.path(), &["stats", "missing.txt"])), 1);
    let o = rcc(dir.path(), &["stats", "bad.txt"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 2"));
    assert_eq!(
        code(&rcc(dir.path(), &["stats", "k4.txt", "--clique-budget", "0"])),
        3
    );
    assert_eq!(
        code(&rcc(dir.path(), &["simulate", "--sigma", "0", "--out", "x"])),
        2
    );
    assert_eq!(
        code(&rcc(dir.path(), &["simulate", "--replicates", "0", "--out", "x"])),
        2
    );
    assert_eq!(
        code(&rcc(dir.path(), &["simulate", "--config", r#"{"nope": 1}"#])),
        2
    );
    assert_eq!(code(&rcc_env(dir.path(), &["simulate", "--out", "x"], "0")), 2);
    assert_eq!(
        code(&rcc(
            dir.path(),
            &["fit", "k4.txt", "--burn-in", "99999", "--iterations", "10"]
        )),
        2
    );
    assert_eq!(code(&rcc(dir.path(), &["frobnicate"])), 2);
}

#[test]
fn config_overrides_flags() {
    let dir = tempfile::tempdir().unwrap();
    write(
        dir.path(),
        "cfg.json",
        r#"{"sigma": [0.5], "c": [1], "replicates": 2, "cliques": 30, "out": "from_config"}"#,
    );
    ok(rcc(
        dir.path(),
        &[
            "simulate",
            "--sigma",
            "0.7",
            "--replicates",
            "5",
            "--config",
            "cfg.json",
        ],
    ));
    let m = json(dir.path().join("from_config/manifest.json"));
    assert_eq!(m["command"], "simulate");
    assert_eq!(m["options"]["sigma"], serde_json::json!([0.5]));
    assert_eq!(m["options"]["replicates"], 2);
    let files: Vec<String> = serde_json::from_value(m["files"].clone()).unwrap();
    for f in &files {
        assert!(dir.path().join("from_config").join(f).exists(), "{f}");
    }
}

#[test]
fn simulate_is_reproducible_across_thread_counts() {
    let dir = tempfile::tempdir().unwrap();
    let args = |out: &'static str| {
        vec![
            "simulate",
            "--sigma",
            "0.3,0.7",
            "--c",
            "1,4",
            "--alpha",
            "8",
            "--cliques",
            "60",
            "--replicates",
            "3",
            "--seed",
            "11",
            "--write-graphs",
            "--out",
            out,
        ]
    };
    ok(rcc_env(dir.path(), &args("one"), "1"));
    ok(rcc_env(dir.path(), &args("four"), "4"));
    ok(rcc_env(dir.path(), &args("again"), "4"));
    let m = json(dir.path().join("one/manifest.json"));
    let files: Vec<String> = serde_json::from_value(m["files"].clone()).unwrap();
    assert!(files.len() > 10);
    for f in files.iter().filter(|f| *f != "manifest.json") {
        let a = std::fs::read(dir.path().join("one").join(f)).unwrap();
        assert_eq!(a, std::fs::read(dir.path().join("four").join(f)).unwrap(), "{f}");
        assert_eq!(a, std::fs::read(dir.path().join("again").join(f)).unwrap(), "{f}");
        if f.ends_with(".csv") {
            read_csv(&dir.path().join("one").join(f));
        }
    }
    // edge lists round-trip through the loader and agree with the summaries
    let (h, rows) = read_csv(&dir.path().join("one/summaries.csv"));
    let edges = column(&h, &rows, "edges");
    let g = rcc_core::Graph::read_edge_list(
        std::fs::read(dir.path().join("one/graphs/g0_r0.edges"))
            .unwrap()
            .as_slice(),
    )
    .unwrap();
    assert_eq!(g.edge_count() as f64, edges[0]);
    let m = rcc_core::Multigraph::read_edge_list(
        std::fs::read(dir.path().join("one/graphs/g0_r0.multiedges"))
            .unwrap()
            .as_slice(),
    )
    .unwrap();
    assert_eq!(m.collapse(), g);
}

#[test]
fn simulate_sparsity_slopes() {
    let dir = tempfile::tempdir().unwrap();
    ok(rcc(
        dir.path(),
        &["simulate", "--skip-max-clique", "--out", "grid"],
    ));
    let (h, rows) = read_csv(&dir.path().join("grid/sparsity.csv"));
    assert_eq!(rows.len(), 9);
    let sigma = column(&h, &rows, "sigma");
    let graph = column(&h, &rows, "graph_slope");
    let multi = column(&h, &rows, "multigraph_slope");
    for i in 0..rows.len() {
        assert!(graph[i] < 2.0, "grid {i}: {}", graph[i]);
        if sigma[i] == 0.8 {
            assert!((multi[i] - 1.25).abs() <= 0.15, "grid {i}: {}", multi[i]);
        }
    }
    let (h, rows) = read_csv(&dir.path().join("grid/trajectories.csv"));
    assert_eq!(
        column(&h, &rows, "n_cliques")
            .iter()
            .filter(|&&n| n == 100.0)
            .count(),
        90
    );
}

#[test]
fn fit_predict_report_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "tri.txt", "0 1\n0 2\n1 2\n");
    ok(rcc(
        dir.path(),
        &["fit", "tri.txt", "--iterations", "10000", "--out", "fit"],
    ));
    let fit = json(dir.path().join("fit/fit.json"));
    let sm = fit["acceptance"]["split_merge"].as_f64().unwrap();
    assert!(sm > 0.0 && sm < 1.0);
    assert_eq!(fit["samples"], 50);
    let samples = std::fs::read_to_string(dir.path().join("fit/samples.jsonl")).unwrap();
    for line in samples.lines() {
        let s: rcc_core::inference::McmcSample = serde_json::from_str(line).unwrap();
        let g = rcc_core::build::cover_to_graph(&s.cover);
        assert_eq!(g.edge_count(), 3);
    }
    let (h, rows) = read_csv(&dir.path().join("fit/trace.csv"));
    assert_eq!(rows.len(), 100);
    assert!(column(&h, &rows, "log_likelihood").iter().all(|&l| l == 0.0));

    ok(rcc(
        dir.path(),
        &["predict", "fit", "--samples", "5", "--out", "pred"],
    ));
    let (_, rows) = read_csv(&dir.path().join("pred/predict.csv"));
    assert_eq!(
        rows.iter().map(|r| r[0].as_str()).collect::<Vec<_>>(),
        ["truth", "rcc", "rcc_se"]
    );

    ok(rcc(dir.path(), &["report", "fit", "--out", "rep"]));
    let rep = json(dir.path().join("rep/report.json"));
    assert_eq!(rep["mean_latent_only_fraction"], 0.0);
    let (h, _) = read_csv(&dir.path().join("rep/memberships.csv"));
    assert_eq!(h, ["value", "count"]);
}

#[test]
fn budget_abort_then_resume() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "k4.txt", K4);
    let o = rcc(
        dir.path(),
        &[
            "fit",
            "k4.txt",
            "--iterations",
            "1000000000",
            "--max-seconds",
            "0.2",
            "--out",
            "a",
        ],
    );
    assert_eq!(code(&o), 3);
    let cp = json(dir.path().join("a/checkpoint.json"));
    let reached = cp["iteration"].as_u64().unwrap();
    let target = (reached + 500).to_string();
    ok(rcc(
        dir.path(),
        &[
            "fit",
            "k4.txt",
            "--iterations",
            &target,
            "--resume",
            "a/checkpoint.json",
            "--out",
            "b",
        ],
    ));
    assert_eq!(
        json(dir.path().join("b/fit.json"))["iterations"]
            .as_u64()
            .unwrap(),
        reached + 500
    );
}

#[test]
fn fit_is_deterministic_and_partial_mode_runs() {
    let dir = tempfile::tempdir().unwrap();
    write(dir.path(), "g.txt", "0 1\n0 2\n1 2\n2 3\n3 4\n3 5\n4 5\n");
    for out in ["p1", "p2"] {
        ok(rcc(
            dir.path(),
            &[
                "fit",
                "g.txt",
                "--mode",
                "partial",
                "--iterations",
                "4000",
                "--seed",
                "3",
                "--out",
                out,
            ],
        ));
    }
    for f in ["samples.jsonl", "trace.csv", "checkpoint.json", "fit.json"] {
        assert_eq!(
            std::fs::read(dir.path().join("p1").join(f)).unwrap(),
            std::fs::read(dir.path().join("p2").join(f)).unwrap(),
            "{f}"
        );
    }
    let fit = json(dir.path().join("p1/fit.json"));
    let pi = fit["pi_mean"].as_f64().unwrap();
    assert!(pi > 0.0 && pi < 1.0);
    ok(rcc(dir.path(), &["report", "p1", "--sample", "0", "--out", "r"]));
    let rep = json(dir.path().join("r/report.json"));
    let f = rep["mean_latent_only_fraction"].as_f64().unwrap();
    assert!((0.0..1.0).contains(&f));
    assert_eq!(
        code(&rcc(
            dir.path(),
            &["report", "p1", "--sample", "999", "--out", "r2"]
        )),
        2
    );
}

#[test]
fn predictive_round_trip_covers_simulated_statistics() {
    let dir = tempfile::tempdir().unwrap();
    ok(rcc(
        dir.path(),
        &[
            "simulate",
            "--alpha",
            "4",
            "--sigma",
            "0.5",
            "--c",
            "1",
            "--cliques",
            "40",
            "--replicates",
            "1",
            "--seed",
            "2",
            "--write-graphs",
            "--skip-max-clique",
            "--out",
            "sim",
        ],
    ));
    ok(rcc(
        dir.path(),
        &[
            "fit",
            "sim/graphs/g0_r0.edges",
            "--iterations",
            "20000",
            "--alpha",
            "4",
            "--out",
            "fit",
        ],
    ));
    ok(rcc(
        dir.path(),
        &[
            "predict",
            "fit",
            "--samples",
            "25",
            "--skip-max-clique",
            "--out",
            "pred",
        ],
    ));
    let p = json(dir.path().join("pred/predict.json"));
    for key in ["density (×1k)", "av. degree"] {
        let truth = p["truth"][key].as_f64().unwrap();
        let mean = p["mean"][key].as_f64().unwrap();
        let se = p["std_error"][key].as_f64().unwrap();
        assert!(
            (truth - mean).abs() <= 2.0 * se,
            "{key}: truth {truth}, mean {mean}, se {se}"
        );
    }
}
