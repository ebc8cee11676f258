use rand::Rng;
use rand_distr::{Distribution, Poisson};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::hyper::Hyperparams;

/// `ln[alpha Gamma(1+c) / (Gamma(1-sigma) Gamma(c+sigma))]`, the constant in front of the Lévy density.
fn log_levy_constant(hp: &Hyperparams) -> f64 {
    let (s, c) = (hp.sigma(), hp.c());
    hp.alpha().ln() + ln_gamma(1.0 + c) - ln_gamma(1.0 - s) - ln_gamma(c + s)
}

/// Lévy intensity of the stable beta process at atom size `mu`.
pub fn levy_density(mu: f64, hp: &Hyperparams) -> Result<f64> {
    if !(mu > 0.0 && mu < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "atom size must lie in (0, 1), got {mu}"
        )));
    }
    let (s, c) = (hp.sigma(), hp.c());
    Ok((log_levy_constant(hp) - (s + 1.0) * mu.ln() + (c + s - 1.0) * (-mu).ln_1p()).exp())
}

/// Atoms of one stable-beta draw, truncated to sizes above `truncation_level`.
#[derive(Debug, Clone)]
pub struct AtomMeasure {
    /// Sorted in decreasing order.
    pub weights: Vec<f64>,
    pub truncation_level: f64,
}

impl AtomMeasure {
    /// Samples the Poisson process of atoms above `eps` by thinning two
    /// envelopes: `mu^(-sigma-1)` on `(eps, 1/2]` and `(1-mu)^(c+sigma-1)` on `(1/2, 1)`.
    pub fn sample<R: Rng + ?Sized>(hp: &Hyperparams, eps: f64, rng: &mut R) -> Result<Self> {
        if !(eps > 0.0 && eps < 0.5) {
            return Err(Error::InvalidArgument(format!(
                "truncation level must lie in (0, 1/2), got {eps}"
            )));
        }
        let s = hp.sigma();
        let beta = hp.c() + s;
        let k = log_levy_constant(hp).exp();
        let mut weights = Vec::new();

        // (eps, 1/2]: invert the mu^(-s-1) envelope, thin by (1-mu)^(beta-1) / bound
        let bound = if beta >= 1.0 {
            (1.0 - eps).powf(beta - 1.0)
        } else {
            0.5f64.powf(beta - 1.0)
        };
        let lo = eps.powf(-s);
        let hi = 2f64.powf(s);
        let mass = k * bound * (lo - hi) / s;
        let count = poisson_count(mass, rng);
        for _ in 0..count {
            let u: f64 = rng.random();
            let mu = (lo - u * (lo - hi)).powf(-1.0 / s);
            if rng.random::<f64>() * bound < (1.0 - mu).powf(beta - 1.0) {
                weights.push(mu);
            }
        }

        // (1/2, 1): invert the (1-mu)^(beta-1) envelope, thin by mu^(-s-1) / 2^(s+1)
        let top = 2f64.powf(s + 1.0);
        let mass = k * top * 0.5f64.powf(beta) / beta;
        let count = poisson_count(mass, rng);
        for _ in 0..count {
            let u: f64 = rng.random();
            let mu = 1.0 - 0.5 * u.powf(1.0 / beta);
            if mu > 0.5 && mu < 1.0 && rng.random::<f64>() * top < mu.powf(-s - 1.0) {
                weights.push(mu);
            }
        }

        weights.sort_unstable_by(|a, b| b.total_cmp(a));
        Ok(Self {
            weights,
            truncation_level: eps,
        })
    }
}

fn poisson_count<R: Rng + ?Sized>(mass: f64, rng: &mut R) -> u64 {
    if mass <= 0.0 {
        return 0;
    }
    Poisson::new(mass).expect("finite positive mass").sample(rng) as u64
}

/// Monte-Carlo estimate of the expected edge count after `n_cliques` rows.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EdgeCountEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub replicates: usize,
    /// Average first-order contribution added for atoms below the truncation level.
    pub truncation_correction: f64,
    /// Bound on what the first-order correction misses.
    pub truncation_error_bound: f64,
    /// Set when the error bound exceeds 1% of the estimate.
    pub truncation_warning: bool,
}

/// Estimates `E|E| = 1/2 ∫∫ (1 - (1 - w v)^N) nu(dw) nu(dv)` by drawing
/// truncated atom measures and summing the pair terms exactly.
///
/// Atoms below `eps` enter through their first moment, which is exact when
/// `N w v` is small; `eps <= 1 / (10 N)` keeps that regime.
pub fn expected_edge_count_mc<R: Rng + ?Sized>(
    hp: &Hyperparams,
    n_cliques: usize,
    eps: f64,
    replicates: usize,
    rng: &mut R,
) -> Result<EdgeCountEstimate> {
    if replicates < 2 {
        return Err(Error::InvalidArgument("need at least two replicates".into()));
    }
    if n_cliques == 0 {
        return Ok(EdgeCountEstimate {
            mean: 0.0,
            std_error: 0.0,
            replicates,
            truncation_correction: 0.0,
            truncation_error_bound: 0.0,
            truncation_warning: false,
        });
    }
    let s = hp.sigma();
    let beta = hp.c() + s;
    let k = log_levy_constant(hp).exp();
    // first and second moments of nu restricted to (0, eps)
    let m1_low = k * (eps.powf(1.0 - s) / (1.0 - s) - (beta - 1.0) * eps.powf(2.0 - s) / (2.0 - s));
    let m2_low = k * eps.powf(2.0 - s) / (2.0 - s) * (1.0 - eps).powf((beta - 1.0).min(0.0));
    let n = n_cliques as f64;

    let mut values = Vec::with_capacity(replicates);
    let mut corrections = 0.0;
    let mut bounds = 0.0;
    for _ in 0..replicates {
        let atoms = AtomMeasure::sample(hp, eps, rng)?;
        let w = &atoms.weights;
        let sum1: f64 = w.iter().sum();
        let sum2: f64 = w.iter().map(|x| x * x).sum();
        let correction = n * m1_low * sum1 + 0.5 * n * m1_low * m1_low;
        let bound = 0.5 * n * n * m2_low * sum2 + 0.5 * (n * m1_low).powi(2);
        values.push(pair_sum(w, n_cliques) + correction);
        corrections += correction;
        bounds += bound;
    }
    let r = replicates as f64;
    let mean = values.iter().sum::<f64>() / r;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (r - 1.0);
    let truncation_error_bound = bounds / r;
    Ok(EdgeCountEstimate {
        mean,
        std_error: (var / r).sqrt(),
        replicates,
        truncation_correction: corrections / r,
        truncation_error_bound,
        truncation_warning: truncation_error_bound > 0.01 * mean,
    })
}

/// `sum_{i<j} 1 - (1 - w_i w_j)^N` over weights sorted in decreasing order.
/// Pairs with `N w_i w_j <= 0.01` use a four-term series through suffix power sums.
fn pair_sum(w: &[f64], n_cliques: usize) -> f64 {
    let n = n_cliques as f64;
    let len = w.len();
    // suffix[p][j] = sum_{t >= j} w_t^(p+1)
    let mut suffix = vec![vec![0.0; len + 1]; 4];
    for j in (0..len).rev() {
        let mut pw = 1.0;
        for row in suffix.iter_mut() {
            pw *= w[j];
            row[j] = row[j + 1] + pw;
        }
    }
    let binom = [
        n,
        -n * (n - 1.0) / 2.0,
        n * (n - 1.0) * (n - 2.0) / 6.0,
        -n * (n - 1.0) * (n - 2.0) * (n - 3.0) / 24.0,
    ];
    let mut total = 0.0;
    for i in 0..len {
        let wi = w[i];
        let cut = 0.01 / (n * wi);
        // w is decreasing: exact terms for j in (i, split), series after
        let split = i + 1 + w[i + 1..].partition_point(|&x| x > cut);
        for &wj in &w[i + 1..split] {
            let x = wi * wj;
            total += -(n * (-x).ln_1p()).exp_m1();
        }
        let mut pw = 1.0;
        for (p, coeff) in binom.iter().enumerate() {
            pw *= wi;
            total += coeff * pw * suffix[p][split];
        }
    }
    total
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_sum_matches_direct() {
        let w: Vec<f64> = vec![0.9, 0.5, 0.2, 0.01, 1e-3, 1e-4, 1e-5, 3e-6];
        for &n in &[1usize, 7, 100, 10_000] {
            let mut direct = 0.0;
            for i in 0..w.len() {
                for j in i + 1..w.len() {
                    direct += 1.0 - (1.0 - w[i] * w[j]).powi(n as i32);
                }
            }
            let fast = pair_sum(&w, n);
            assert!(
                (fast - direct).abs() < 1e-9 * direct.max(1.0),
                "n={n} {fast} {direct}"
            );
        }
    }
}
