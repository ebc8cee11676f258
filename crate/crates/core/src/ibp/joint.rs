use statrs::function::gamma::{digamma, ln_gamma};

use super::{ln_factorial, log_new_vertex_rate, log_poisson_pmf};
use crate::clique::CliqueMatrix;
use crate::hyper::Hyperparams;

/// Sufficient statistics of a clique matrix for the exchangeable log joint:
/// the number of rows and the histogram of column counts.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IbpStats {
    pub n_rows: usize,
    /// `count_hist[m]` = number of vertices in exactly `m` rows; index 0 is unused.
    pub count_hist: Vec<u64>,
}

impl IbpStats {
    pub fn from_matrix(z: &CliqueMatrix) -> Self {
        Self::from_counts(z.num_cliques(), z.column_counts().iter().copied())
    }

    pub fn from_counts(n_rows: usize, counts: impl IntoIterator<Item = u32>) -> Self {
        let mut count_hist = vec![0u64];
        for m in counts {
            let m = m as usize;
            if m == 0 {
                continue;
            }
            if count_hist.len() <= m {
                count_hist.resize(m + 1, 0);
            }
            count_hist[m] += 1;
        }
        Self { n_rows, count_hist }
    }

    pub fn vertex_count(&self) -> u64 {
        self.count_hist.iter().skip(1).sum()
    }

    pub fn add_column(&mut self, m: u32) {
        let m = m as usize;
        if m == 0 {
            return;
        }
        if self.count_hist.len() <= m {
            self.count_hist.resize(m + 1, 0);
        }
        self.count_hist[m] += 1;
    }

    pub fn remove_column(&mut self, m: u32) {
        if m > 0 {
            self.count_hist[m as usize] -= 1;
            while self.count_hist.len() > 1 && self.count_hist.last() == Some(&0) {
                self.count_hist.pop();
            }
        }
    }

    /// Moves one vertex from count `from` to count `to`.
    pub fn shift_column(&mut self, from: u32, to: u32) {
        self.remove_column(from);
        self.add_column(to);
    }

    fn nonzero(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.count_hist
            .iter()
            .enumerate()
            .skip(1)
            .filter(|(_, &h)| h > 0)
            .map(|(m, &h)| (m as f64, h as f64))
    }
}

/// Prefix sums of the new-vertex rates for one hyperparameter setting.
#[derive(Debug, Clone)]
pub struct RateTable {
    hp: Hyperparams,
    // prefix[n] = sum of rates for rows 1..=n
    prefix: Vec<f64>,
}

impl RateTable {
    pub fn new(hp: Hyperparams) -> Self {
        Self {
            hp,
            prefix: vec![0.0],
        }
    }

    pub fn hyperparams(&self) -> &Hyperparams {
        &self.hp
    }

    /// Expected number of vertices opened by the first `n` rows.
    pub fn total_rate(&mut self, n: usize) -> f64 {
        while self.prefix.len() <= n {
            let next = self.prefix.len();
            let last = *self.prefix.last().expect("prefix starts at zero");
            self.prefix.push(last + log_new_vertex_rate(next, &self.hp).exp());
        }
        self.prefix[n]
    }
}

/// Exchangeable log joint from sufficient statistics. Matches
/// [`super::log_joint`] exactly; each vertex contributes
/// `ln[alpha Gamma(1+c) / Gamma(c+sigma)] + ln Gamma(m-sigma) - ln Gamma(1-sigma)
///  + ln Gamma(N-m+c+sigma) - ln Gamma(N+c)`.
pub fn log_joint_stats(
    stats: &IbpStats,
    hp: &Hyperparams,
    include_n_prior: bool,
    rates: &mut RateTable,
) -> f64 {
    debug_assert_eq!(rates.hyperparams(), hp);
    let (a, s, c) = (hp.alpha(), hp.sigma(), hp.c());
    let n = stats.n_rows as f64;
    let k = stats.vertex_count() as f64;
    let mut total = k * (a.ln() + ln_gamma(1.0 + c) - ln_gamma(c + s) - ln_gamma(1.0 - s) - ln_gamma(n + c));
    for (m, h) in stats.nonzero() {
        total += h * (ln_gamma(m - s) + ln_gamma(n - m + c + s));
    }
    total -= rates.total_rate(stats.n_rows);
    total -= ln_factorial(stats.vertex_count());
    if include_n_prior {
        total += log_poisson_pmf(stats.n_rows as u64, hp.tau());
    }
    total
}

/// Gradient of [`log_joint_stats`] with respect to `(alpha, sigma, c, tau)`.
/// The `tau` component is zero unless `include_n_prior`.
pub fn log_joint_gradient(stats: &IbpStats, hp: &Hyperparams, include_n_prior: bool) -> [f64; 4] {
    let (a, s, c) = (hp.alpha(), hp.sigma(), hp.c());
    let n = stats.n_rows as f64;
    let k = stats.vertex_count() as f64;

    let mut rate_sum = 0.0;
    let mut rate_ds = 0.0;
    let mut rate_dc = 0.0;
    let psi_cs = digamma(c + s);
    let psi_1c = digamma(1.0 + c);
    for row in 1..=stats.n_rows {
        let r = row as f64;
        let lam = log_new_vertex_rate(row, hp).exp();
        let psi_num = digamma(r + c + s - 1.0);
        rate_sum += lam;
        rate_ds += lam * (psi_num - psi_cs);
        rate_dc += lam * (psi_1c + psi_num - digamma(r + c) - psi_cs);
    }

    let d_alpha = (k - rate_sum) / a;
    let mut d_sigma = k * (digamma(1.0 - s) - psi_cs) - rate_ds;
    let mut d_c = k * (psi_1c - psi_cs - digamma(n + c)) - rate_dc;
    for (m, h) in stats.nonzero() {
        let psi_rest = digamma(n - m + c + s);
        d_sigma += h * (psi_rest - digamma(m - s));
        d_c += h * psi_rest;
    }
    let d_tau = if include_n_prior { n / hp.tau() - 1.0 } else { 0.0 };
    [d_alpha, d_sigma, d_c, d_tau]
}

/// Chain rule from `(alpha, sigma, c, tau)` to the coordinates of
/// [`Hyperparams::to_unconstrained`].
pub(crate) fn to_unconstrained_gradient(grad: [f64; 4], hp: &Hyperparams) -> [f64; 4] {
    let s = hp.sigma();
    let d = hp.c() + s;
    [
        grad[0] * hp.alpha(),
        // moving sigma at fixed c + sigma moves c the other way
        (grad[1] - grad[2]) * s * (1.0 - s),
        grad[2] * d,
        grad[3] * hp.tau(),
    ]
}
