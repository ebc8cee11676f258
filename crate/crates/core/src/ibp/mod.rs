//! Stable-beta Indian buffet process: the clique-selection mechanism.
//!
//! Rows of the clique matrix are cliques, columns are vertices. Row `n`
//! (1-based) includes a previously seen vertex with count `m` with
//! probability `(m - sigma) / (n + c - 1)` and then opens a Poisson number of
//! brand-new vertices.

mod atoms;
mod joint;

pub use atoms::{expected_edge_count_mc, levy_density, AtomMeasure, EdgeCountEstimate};
pub(crate) use joint::to_unconstrained_gradient;
pub use joint::{log_joint_gradient, log_joint_stats, IbpStats, RateTable};

use rand::Rng;
use rand_distr::{Binomial, Distribution, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::clique::CliqueMatrix;
use crate::error::{Error, Result};
use crate::hyper::Hyperparams;

/// How many rows to draw.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NumCliques {
    Fixed(usize),
    /// `N ~ Poisson(tau)`.
    Poisson,
}

/// `P(Z_ni = 1 | rows before n)` for a vertex already chosen `m` times.
pub fn predictive_prob(m: u32, n: usize, hp: &Hyperparams) -> Result<f64> {
    if m == 0 || (m as usize) >= n {
        return Err(Error::InvalidArgument(format!(
            "predictive probability needs 1 <= m <= n - 1, got m = {m}, n = {n}"
        )));
    }
    Ok((m as f64 - hp.sigma()) / (n as f64 + hp.c() - 1.0))
}

/// Log of the Poisson rate of new vertices in row `n` (1-based).
pub fn log_new_vertex_rate(n: usize, hp: &Hyperparams) -> f64 {
    assert!(n >= 1, "rows are numbered from 1");
    let (s, c) = (hp.sigma(), hp.c());
    let n = n as f64;
    hp.alpha().ln() + ln_gamma(1.0 + c) + ln_gamma(n + c + s - 1.0) - ln_gamma(n + c) - ln_gamma(c + s)
}

pub fn new_vertex_rate(n: usize, hp: &Hyperparams) -> f64 {
    log_new_vertex_rate(n, hp).exp()
}

pub(crate) fn ln_factorial(k: u64) -> f64 {
    ln_gamma(k as f64 + 1.0)
}

pub(crate) fn log_poisson_pmf(k: u64, rate: f64) -> f64 {
    k as f64 * rate.ln() - rate - ln_factorial(k)
}

/// Draws cliques one row at a time. Vertex ids are assigned in order of first
/// appearance.
///
/// Vertices sharing a count share an inclusion probability, so each row draws
/// one binomial per distinct count and picks the included vertices uniformly
/// from that group.
#[derive(Debug, Clone)]
pub struct IbpSampler {
    hp: Hyperparams,
    rows_drawn: usize,
    // by_count[m] = vertices chosen exactly m times so far
    by_count: Vec<Vec<u32>>,
    vertex_count: u32,
}

impl IbpSampler {
    pub fn new(hp: Hyperparams) -> Self {
        Self {
            hp,
            rows_drawn: 0,
            by_count: vec![Vec::new()],
            vertex_count: 0,
        }
    }

    pub fn rows_drawn(&self) -> usize {
        self.rows_drawn
    }

    pub fn vertex_count(&self) -> usize {
        self.vertex_count as usize
    }

    /// Number of vertices that have appeared in exactly `j` rows.
    pub fn vertices_with_count(&self, j: usize) -> usize {
        self.by_count.get(j).map_or(0, Vec::len)
    }

    pub fn next_row<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<u32> {
        let n = self.rows_drawn + 1;
        let denom = n as f64 + self.hp.c() - 1.0;
        let mut row = Vec::new();
        let mut promoted: Vec<(usize, Vec<u32>)> = Vec::new();
        for m in 1..self.by_count.len() {
            let group = &mut self.by_count[m];
            if group.is_empty() {
                continue;
            }
            let p = (m as f64 - self.hp.sigma()) / denom;
            let k = Binomial::new(group.len() as u64, p)
                .expect("inclusion probability lies in (0, 1)")
                .sample(rng) as usize;
            if k == 0 {
                continue;
            }
            let len = group.len();
            for t in 0..k {
                let pick = rng.random_range(t..len);
                group.swap(t, pick);
            }
            let chosen: Vec<u32> = group.drain(..k).collect();
            row.extend_from_slice(&chosen);
            promoted.push((m + 1, chosen));
        }
        for (m, chosen) in promoted {
            if self.by_count.len() <= m {
                self.by_count.resize_with(m + 1, Vec::new);
            }
            self.by_count[m].extend(chosen);
        }

        let rate = new_vertex_rate(n, &self.hp);
        let fresh = Poisson::new(rate)
            .expect("new-vertex rate is positive and finite")
            .sample(rng) as u32;
        if self.by_count.len() < 2 {
            self.by_count.resize_with(2, Vec::new);
        }
        for v in self.vertex_count..self.vertex_count + fresh {
            row.push(v);
            self.by_count[1].push(v);
        }
        self.vertex_count += fresh;
        self.rows_drawn = n;
        row.sort_unstable();
        row
    }
}

pub fn sample_clique_matrix<R: Rng + ?Sized>(
    hp: &Hyperparams,
    n_cliques: NumCliques,
    rng: &mut R,
) -> CliqueMatrix {
    let n = match n_cliques {
        NumCliques::Fixed(n) => n,
        NumCliques::Poisson => Poisson::new(hp.tau()).expect("tau is positive").sample(rng) as usize,
    };
    let mut sampler = IbpSampler::new(*hp);
    let rows: Vec<Vec<u32>> = (0..n).map(|_| sampler.next_row(rng)).collect();
    CliqueMatrix::new(sampler.vertex_count(), rows).expect("sampler emits valid indices")
}

/// Log probability of `z` under the sequential predictive scheme, with
/// columns treated as exchangeably labelled.
///
/// Each row contributes its inclusion/exclusion terms for already-seen
/// vertices and `k ln(rate) - rate` for its `k` new vertices; the new-vertex
/// labellings contribute a single `-ln K!` for the `K` used columns. The
/// result is invariant under row permutations and equals the probability of
/// the labelled matrix when the sampler's output columns are shuffled
/// uniformly. All-zero columns are ignored. With `include_n_prior` the
/// Poisson(tau) term for the number of rows is added.
pub fn log_joint(z: &CliqueMatrix, hp: &Hyperparams, include_n_prior: bool) -> Result<f64> {
    let (s, c) = (hp.sigma(), hp.c());
    let mut counts = vec![0u32; z.vertex_count()];
    // hist[m] = number of seen vertices with count m
    let mut hist: Vec<u64> = vec![0];
    let mut total = 0.0;
    let mut used_columns = 0u64;
    for (idx, row) in z.rows().iter().enumerate() {
        let n = idx + 1;
        let denom = n as f64 + c - 1.0;
        let mut included_hist: Vec<u64> = vec![0; hist.len()];
        let mut fresh = 0u64;
        for &v in row {
            let m = counts[v as usize] as usize;
            if m == 0 {
                fresh += 1;
            } else {
                included_hist[m] += 1;
            }
        }
        for m in 1..hist.len() {
            let seen = hist[m];
            if seen == 0 {
                continue;
            }
            let inc = included_hist[m];
            let mf = m as f64;
            if inc > 0 {
                total += inc as f64 * ((mf - s) / denom).ln();
            }
            if seen > inc {
                total += (seen - inc) as f64 * ((denom - mf + s) / denom).ln();
            }
        }
        let log_rate = log_new_vertex_rate(n, hp);
        total += fresh as f64 * log_rate - log_rate.exp();
        used_columns += fresh;
        for &v in row {
            let m = counts[v as usize] as usize;
            if m > 0 {
                hist[m] -= 1;
            }
            if hist.len() <= m + 1 {
                hist.resize(m + 2, 0);
            }
            hist[m + 1] += 1;
            counts[v as usize] += 1;
        }
    }
    total -= ln_factorial(used_columns);
    if include_n_prior {
        total += log_poisson_pmf(z.num_cliques() as u64, hp.tau());
    }
    if !total.is_finite() {
        return Err(Error::Numerical(format!("log joint evaluated to {total}")));
    }
    Ok(total)
}

/// Exact and asymptotic expected number of vertices after `n_cliques` rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VertexCountExpectation {
    pub exact: f64,
    pub asymptotic: f64,
}

pub fn expected_vertex_count(hp: &Hyperparams, n_cliques: usize) -> VertexCountExpectation {
    let exact = (1..=n_cliques).map(|n| new_vertex_rate(n, hp)).sum();
    let (a, s, c) = (hp.alpha(), hp.sigma(), hp.c());
    let asymptotic = a / s * (ln_gamma(c + 1.0) - ln_gamma(c + s)).exp() * (n_cliques as f64).powf(s);
    VertexCountExpectation { exact, asymptotic }
}

/// Large-`N` prediction for the number of vertices that appear in exactly `j` cliques.
pub fn zipf_count_prediction(hp: &Hyperparams, n_cliques: usize, j: u32) -> Result<f64> {
    if j == 0 {
        return Err(Error::InvalidArgument("j must be at least 1".into()));
    }
    let (a, s, c) = (hp.alpha(), hp.sigma(), hp.c());
    let j = j as f64;
    let log = a.ln() + ln_gamma(j - s) + ln_gamma(1.0 + c)
        - ln_gamma(j + 1.0)
        - ln_gamma(1.0 - s)
        - ln_gamma(c + s)
        + s * (n_cliques as f64).ln();
    Ok(log.exp())
}

/// Expected number of vertices shared by two cliques, `alpha (1 - sigma) / (1 + c)`.
pub fn expected_clique_overlap(hp: &Hyperparams) -> f64 {
    hp.alpha() * (1.0 - hp.sigma()) / (1.0 + hp.c())
}

#[cfg(test)]
mod tests;
