use std::collections::HashMap;

use proptest::prelude::*;

use super::*;
use crate::seeded_rng;

fn hp(alpha: f64, sigma: f64, c: f64) -> Hyperparams {
    Hyperparams::new(alpha, sigma, c, 10.0).unwrap()
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn new_vertex_rate_examples() {
    let h = hp(4.0, 0.5, 1.0);
    assert!(close(new_vertex_rate(1, &h), 4.0, 1e-12));
    assert!(close(new_vertex_rate(2, &h), 3.0, 1e-12));
    for &(a, s, c) in &[(2.0, 0.3, -0.2), (7.0, 0.9, 4.0)] {
        assert!(close(new_vertex_rate(1, &hp(a, s, c)), a, 1e-12));
    }
}

#[test]
fn new_vertex_rate_asymptotics() {
    let h = hp(3.0, 0.4, 2.0);
    let n = 1_000_000usize;
    let (s, c) = (h.sigma(), h.c());
    let approx = h.alpha() * (ln_gamma(1.0 + c) - ln_gamma(c + s)).exp() * (n as f64).powf(s - 1.0);
    assert!((new_vertex_rate(n, &h) / approx - 1.0).abs() < 1e-5);
}

#[test]
fn predictive_prob_examples() {
    assert!(close(
        predictive_prob(1, 2, &hp(1.0, 0.5, 1.0)).unwrap(),
        0.25,
        1e-15
    ));
    assert!(close(
        predictive_prob(1, 2, &hp(1.0, 0.01, 0.0)).unwrap(),
        0.99,
        1e-12
    ));
    let p = predictive_prob(1, 5, &hp(1.0, 0.999, 1.0)).unwrap();
    assert!(p > 0.0 && p < 1e-3);
    assert!(predictive_prob(0, 3, &hp(1.0, 0.5, 1.0)).is_err());
    assert!(predictive_prob(3, 3, &hp(1.0, 0.5, 1.0)).is_err());
}

#[test]
fn sampling_zero_rows_is_empty() {
    let z = sample_clique_matrix(&hp(4.0, 0.5, 1.0), NumCliques::Fixed(0), &mut seeded_rng(1));
    assert_eq!(z.num_cliques(), 0);
    assert_eq!(z.vertex_count(), 0);
}

#[test]
fn sampling_is_seed_deterministic() {
    let h = hp(6.0, 0.6, 2.0);
    let a = sample_clique_matrix(&h, NumCliques::Fixed(50), &mut seeded_rng(9));
    let b = sample_clique_matrix(&h, NumCliques::Fixed(50), &mut seeded_rng(9));
    assert_eq!(a, b);
    assert!(a.has_no_empty_columns());
    let c = sample_clique_matrix(&h, NumCliques::Poisson, &mut seeded_rng(9));
    assert_eq!(
        c,
        sample_clique_matrix(&h, NumCliques::Poisson, &mut seeded_rng(9))
    );
}

// Rows of one matrix share the latent atom weights, so the standard error is
// taken over independent matrices.
#[test]
fn clique_sizes_are_poisson_alpha() {
    let h = hp(5.0, 0.5, 1.0);
    let mut rng = seeded_rng(2);
    let reps = 1000;
    let means: Vec<f64> = (0..reps)
        .map(|_| {
            let z = sample_clique_matrix(&h, NumCliques::Fixed(20), &mut rng);
            z.total_entries() as f64 / 20.0
        })
        .collect();
    let n = reps as f64;
    let mean = means.iter().sum::<f64>() / n;
    let var = means.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    let se = (var / n).sqrt();
    assert!((mean - 5.0).abs() < 3.0 * se, "mean {mean}, se {se}");
}

#[test]
fn log_joint_single_row() {
    let h = hp(3.0, 0.5, 1.0);
    for k in 0..6u32 {
        let z = CliqueMatrix::new(k as usize, vec![(0..k).collect()]).unwrap();
        let want = log_poisson_pmf(k as u64, 3.0);
        assert!(close(log_joint(&z, &h, false).unwrap(), want, 1e-12));
        let with_n = log_joint(&z, &h, true).unwrap();
        assert!(close(with_n, want + log_poisson_pmf(1, h.tau()), 1e-12));
    }
}

/// Sum of `exp(log_joint)` over every labelled two-row matrix with at most
/// `kmax` columns equals `P(K <= kmax)`, so it is at most one and tends to one.
#[test]
fn log_joint_normalizes_over_two_rows() {
    let h = hp(1.0, 0.4, 0.5);
    let kinds = [(true, false), (false, true), (true, true)];
    let mut total = 0.0;
    for k in 0..=9u32 {
        for code in 0..3usize.pow(k) {
            let mut rows = vec![Vec::new(), Vec::new()];
            let mut rest = code;
            for v in 0..k {
                let (a, b) = kinds[rest % 3];
                rest /= 3;
                if a {
                    rows[0].push(v);
                }
                if b {
                    rows[1].push(v);
                }
            }
            let z = CliqueMatrix::new(k as usize, rows).unwrap();
            total += log_joint(&z, &h, false).unwrap().exp();
        }
        assert!(total <= 1.0 + 1e-12);
    }
    assert!(total > 0.999, "total {total}");
}

/// Frequencies of column-permutation classes of sampled two-row matrices
/// against `exp(log_joint) * K! / prod(identical column multiplicities)!`.
#[test]
fn log_joint_matches_sampling_frequencies() {
    let h = hp(1.2, 0.3, 0.7);
    let draws = 200_000usize;
    let mut rng = seeded_rng(17);
    let mut counts: HashMap<[u32; 3], usize> = HashMap::new();
    for _ in 0..draws {
        let z = sample_clique_matrix(&h, NumCliques::Fixed(2), &mut rng);
        let mut key = [0u32; 3];
        for v in 0..z.vertex_count() as u32 {
            match (z.contains(0, v), z.contains(1, v)) {
                (true, false) => key[0] += 1,
                (false, true) => key[1] += 1,
                _ => key[2] += 1,
            }
        }
        if key.iter().sum::<u32>() <= 2 {
            *counts.entry(key).or_default() += 1;
        }
    }
    let mut checked = 0;
    for a in 0..=2u32 {
        for b in 0..=2 - a {
            for c in 0..=2 - a - b {
                let key = [a, b, c];
                let mut rows = vec![Vec::new(), Vec::new()];
                let mut v = 0;
                for (kind, &m) in key.iter().enumerate() {
                    for _ in 0..m {
                        if kind != 1 {
                            rows[0].push(v);
                        }
                        if kind != 0 {
                            rows[1].push(v);
                        }
                        v += 1;
                    }
                }
                let z = CliqueMatrix::new(v as usize, rows).unwrap();
                let k = (a + b + c) as u64;
                let log_p = log_joint(&z, &h, false).unwrap() + ln_factorial(k)
                    - key.iter().map(|&m| ln_factorial(m as u64)).sum::<f64>();
                let p = log_p.exp();
                let freq = *counts.get(&key).unwrap_or(&0) as f64 / draws as f64;
                let se = (p * (1.0 - p) / draws as f64).sqrt();
                assert!(
                    (freq - p).abs() < 3.5 * se,
                    "{key:?}: freq {freq}, p {p}, se {se}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 10);
}

#[test]
fn expected_vertex_count_examples() {
    let h = hp(4.0, 0.5, 1.0);
    assert!(close(expected_vertex_count(&h, 1).exact, 4.0, 1e-12));
    assert!(close(expected_vertex_count(&h, 2).exact, 7.0, 1e-12));
    assert_eq!(expected_vertex_count(&h, 0).exact, 0.0);

    let e = expected_vertex_count(&hp(5.0, 0.5, 1.0), 500);
    assert!((e.asymptotic - 252.3).abs() < 0.1, "{}", e.asymptotic);
    assert!(e.exact < e.asymptotic && e.exact > 0.9 * e.asymptotic);

    let e = expected_vertex_count(&hp(5.0, 0.5, 1.0), 100_000);
    assert!((0.9..=1.1).contains(&(e.exact / e.asymptotic)));
}

#[test]
fn zipf_examples() {
    let h = hp(1.0, 0.5, 1.0);
    let p = zipf_count_prediction(&h, 100, 1).unwrap();
    assert!((p - 11.2838).abs() < 1e-3, "{p}");
    assert!(zipf_count_prediction(&h, 100, 0).is_err());
    // ratio to j^(-sigma-1) settles
    let ratio = |j: u32| zipf_count_prediction(&h, 100, j).unwrap() * (j as f64).powf(1.5);
    assert!((ratio(4000) / ratio(2000) - 1.0).abs() < 1e-3);
}

#[test]
fn zipf_singletons_match_simulation() {
    let h = hp(1.0, 0.5, 1.0);
    let mut rng = seeded_rng(5);
    let reps = 200;
    let vals: Vec<f64> = (0..reps)
        .map(|_| {
            let mut s = IbpSampler::new(h);
            for _ in 0..100 {
                s.next_row(&mut rng);
            }
            s.vertices_with_count(1) as f64
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / reps as f64;
    let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    let se = (var / reps as f64).sqrt();
    let want = zipf_count_prediction(&h, 100, 1).unwrap();
    assert!(
        (mean - want).abs() < 3.0 * se,
        "mean {mean}, want {want}, se {se}"
    );
}

#[test]
fn clique_overlap() {
    assert!(close(expected_clique_overlap(&hp(5.0, 0.5, 1.0)), 1.25, 1e-15));
    assert!(expected_clique_overlap(&hp(5.0, 0.9999, 1.0)) < 1e-3);

    let h = hp(5.0, 0.5, 1.0);
    let mut rng = seeded_rng(8);
    let reps = 2000;
    let vals: Vec<f64> = (0..reps)
        .map(|_| {
            let z = sample_clique_matrix(&h, NumCliques::Fixed(2), &mut rng);
            z.row(0).iter().filter(|v| z.row(1).contains(v)).count() as f64
        })
        .collect();
    let mean = vals.iter().sum::<f64>() / reps as f64;
    let var = vals.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (reps as f64 - 1.0);
    assert!(
        (mean - 1.25).abs() < 3.0 * (var / reps as f64).sqrt(),
        "mean {mean}"
    );
}

#[test]
fn levy_density_examples() {
    let h = Hyperparams::new(1.0, 0.5, 0.5, 1.0).unwrap();
    assert!((levy_density(0.5, &h).unwrap() - 2f64.sqrt()).abs() < 1e-12);
    let h3 = Hyperparams::new(3.0, 0.5, 0.5, 1.0).unwrap();
    assert!(close(
        levy_density(0.3, &h3).unwrap(),
        3.0 * levy_density(0.3, &h).unwrap(),
        1e-12
    ));
    assert!(levy_density(0.0, &h).is_err());
    assert!(levy_density(1.0, &h).is_err());
}

// integral of mu^p nu(dmu) over (eps, 1), midpoint rule in log mu
fn levy_moment(h: &Hyperparams, p: f64, eps: f64) -> f64 {
    let steps = 200_000;
    let (lo, hi) = (eps.ln(), 0.0f64);
    let dt = (hi - lo) / steps as f64;
    (0..steps)
        .map(|i| {
            let mu = (lo + (i as f64 + 0.5) * dt).exp();
            levy_density(mu, h).unwrap() * mu.powf(p + 1.0) * dt
        })
        .sum()
}

#[test]
fn levy_first_moment_is_alpha() {
    let h = hp(5.0, 0.5, 1.0);
    let m1: Vec<f64> = [1e-4, 1e-8, 1e-12]
        .iter()
        .map(|&e| levy_moment(&h, 1.0, e))
        .collect();
    assert!((m1[2] - 5.0).abs() < 1e-3, "{m1:?}");
    assert!(m1[0] < m1[1] && m1[1] < m1[2]);
    let m0: Vec<f64> = [1e-4, 1e-8].iter().map(|&e| levy_moment(&h, 0.0, e)).collect();
    assert!(m0[1] > 50.0 * m0[0], "{m0:?}");
}

#[test]
fn edge_count_small_n() {
    let h = hp(5.0, 0.5, 1.0);
    let mut rng = seeded_rng(3);
    let e = expected_edge_count_mc(&h, 0, 1e-6, 4, &mut rng).unwrap();
    assert_eq!(e.mean, 0.0);
    // one clique: half the squared first moment
    let e = expected_edge_count_mc(&h, 1, 1e-6, 4000, &mut rng).unwrap();
    assert!((e.mean - 12.5).abs() < 3.0 * e.std_error, "{e:?}");
    assert!(expected_edge_count_mc(&h, 1, 1e-6, 1, &mut rng).is_err());
}

fn arb_hp() -> impl Strategy<Value = Hyperparams> {
    (0.2f64..8.0, 0.05f64..0.95, 0.0f64..5.0, 0.5f64..50.0)
        .prop_map(|(a, s, d, t)| Hyperparams::new(a, s, d - s * 0.9, t).unwrap())
}

fn arb_matrix() -> impl Strategy<Value = CliqueMatrix> {
    (1usize..8, 1usize..10).prop_flat_map(|(n, k)| {
        prop::collection::vec(prop::collection::vec(any::<bool>(), k), n).prop_map(move |bits| {
            let rows: Vec<Vec<u32>> = bits
                .iter()
                .map(|r| (0..k as u32).filter(|&v| r[v as usize]).collect())
                .collect();
            CliqueMatrix::new(k, rows).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn log_joint_row_permutation_invariant(z in arb_matrix(), h in arb_hp(), seed in any::<u64>()) {
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..z.num_cliques()).collect();
        order.shuffle(&mut seeded_rng(seed));
        let p = z.permute_rows(&order).unwrap();
        let a = log_joint(&z, &h, true).unwrap();
        let b = log_joint(&p, &h, true).unwrap();
        prop_assert!((a - b).abs() < 1e-10 * a.abs().max(1.0));
    }

    #[test]
    fn log_joint_routes_agree(z in arb_matrix(), h in arb_hp(), with_n in any::<bool>()) {
        let seq = log_joint(&z, &h, with_n).unwrap();
        let stats = IbpStats::from_matrix(&z);
        let closed = log_joint_stats(&stats, &h, with_n, &mut RateTable::new(h));
        prop_assert!((seq - closed).abs() < 1e-9 * seq.abs().max(1.0), "{} vs {}", seq, closed);
    }

    #[test]
    fn gradient_matches_finite_differences(z in arb_matrix(), h in arb_hp()) {
        let stats = IbpStats::from_matrix(&z);
        let f = |p: [f64; 4]| {
            let h = Hyperparams::new(p[0], p[1], p[2], p[3]).unwrap();
            log_joint_stats(&stats, &h, true, &mut RateTable::new(h))
        };
        let g = log_joint_gradient(&stats, &h, true);
        let base = [h.alpha(), h.sigma(), h.c(), h.tau()];
        for i in 0..4 {
            let step = 1e-5 * base[i].abs().max(1e-2);
            let (mut up, mut down) = (base, base);
            up[i] += step;
            down[i] -= step;
            let fd = (f(up) - f(down)) / (2.0 * step);
            prop_assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1.0), "coord {}: fd {} vs {}", i, fd, g[i]);
        }
    }

    #[test]
    fn unconstrained_gradient_chain_rule(z in arb_matrix(), h in arb_hp()) {
        let stats = IbpStats::from_matrix(&z);
        let f = |t: [f64; 4]| {
            let h = Hyperparams::from_unconstrained(t).unwrap();
            log_joint_stats(&stats, &h, true, &mut RateTable::new(h))
        };
        let g = to_unconstrained_gradient(log_joint_gradient(&stats, &h, true), &h);
        let base = h.to_unconstrained();
        for i in 0..4 {
            let (mut up, mut down) = (base, base);
            up[i] += 1e-5;
            down[i] -= 1e-5;
            let fd = (f(up) - f(down)) / 2e-5;
            prop_assert!((fd - g[i]).abs() <= 1e-5 * g[i].abs().max(1.0), "coord {}: fd {} vs {}", i, fd, g[i]);
        }
    }

    #[test]
    fn predictive_prob_in_unit_interval(h in arb_hp(), n in 2usize..500, frac in 0.0f64..1.0) {
        let m = 1 + ((n - 2) as f64 * frac) as u32;
        let p = predictive_prob(m, n, &h).unwrap();
        prop_assert!(p > 0.0 && p < 1.0);
    }
}
