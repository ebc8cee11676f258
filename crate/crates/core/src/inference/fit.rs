use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::state::McmcState;
use crate::clique::CliqueMatrix;
use crate::error::{Error, Result};
use crate::hyper::Hyperparams;
use crate::ibp::{log_joint_gradient, log_joint_stats, IbpStats, RateTable};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    /// Maximum likelihood by quasi-Newton ascent.
    Gradient,
    /// Random-walk Metropolis–Hastings under weak priors.
    Mh,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GradientOptions {
    pub max_iterations: usize,
    /// Stop once the gradient norm in unconstrained coordinates drops below
    /// this times `max(1, |log joint|)`, or once a step gains less than that
    /// while the gradient norm is within its square root (optima on the
    /// boundary, such as `sigma -> 0`, are only approached).
    pub tolerance: f64,
}

impl Default for GradientOptions {
    fn default() -> Self {
        Self {
            max_iterations: 500,
            tolerance: 1e-9,
        }
    }
}

fn nonempty(z: &CliqueMatrix) -> Result<IbpStats> {
    if z.num_cliques() == 0 {
        return Err(Error::InvalidArgument(
            "cannot fit hyperparameters to an empty cover".into(),
        ));
    }
    Ok(IbpStats::from_matrix(z))
}

/// Maximum-likelihood hyperparameters for a fixed cover. `tau` is set to the
/// number of cliques (its exact maximiser); the rest are found by BFGS on
/// `(ln alpha, logit sigma, ln(c + sigma))` starting from `init`.
pub fn fit_hyperparams_gradient(
    z: &CliqueMatrix,
    init: &Hyperparams,
    opts: &GradientOptions,
) -> Result<Hyperparams> {
    fit_stats_gradient(&nonempty(z)?, init, opts)
}

fn objective(stats: &IbpStats, theta: &[f64; 3], tau: f64) -> Option<(Hyperparams, f64)> {
    let hp = Hyperparams::from_unconstrained([theta[0], theta[1], theta[2], tau.ln()]).ok()?;
    let f = log_joint_stats(stats, &hp, false, &mut RateTable::new(hp));
    f.is_finite().then_some((hp, f))
}

fn unconstrained_grad(stats: &IbpStats, hp: &Hyperparams) -> [f64; 3] {
    let g = crate::ibp::to_unconstrained_gradient(log_joint_gradient(stats, hp, false), hp);
    [g[0], g[1], g[2]]
}

fn dot(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn mat_vec(h: &[[f64; 3]; 3], v: &[f64; 3]) -> [f64; 3] {
    [dot(&h[0], v), dot(&h[1], v), dot(&h[2], v)]
}

const IDENTITY: [[f64; 3]; 3] = [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];

pub(crate) fn fit_stats_gradient(
    stats: &IbpStats,
    init: &Hyperparams,
    opts: &GradientOptions,
) -> Result<Hyperparams> {
    let tau = stats.n_rows as f64;
    if tau == 0.0 {
        return Err(Error::InvalidArgument(
            "cannot fit hyperparameters to an empty cover".into(),
        ));
    }
    let t = init.to_unconstrained();
    let mut theta = [t[0], t[1], t[2]];
    let (mut hp, mut f) = objective(stats, &theta, tau)
        .ok_or_else(|| Error::Numerical("log joint is not finite at the starting point".into()))?;
    let mut g = unconstrained_grad(stats, &hp);
    let mut h = IDENTITY;
    for _ in 0..opts.max_iterations {
        let norm = dot(&g, &g).sqrt();
        if norm < opts.tolerance * f.abs().max(1.0) {
            return hp.with_tau(tau);
        }
        let mut d = mat_vec(&h, &g);
        if dot(&g, &d) <= 0.0 {
            h = IDENTITY;
            d = g;
        }
        let slope = dot(&g, &d);
        let mut step = 1.0;
        let accepted = loop {
            let trial = [
                theta[0] + step * d[0],
                theta[1] + step * d[1],
                theta[2] + step * d[2],
            ];
            if let Some((hp_t, f_t)) = objective(stats, &trial, tau) {
                if f_t >= f + 1e-4 * step * slope {
                    break Some((trial, hp_t, f_t));
                }
            }
            step *= 0.5;
            if step < 1e-12 {
                break None;
            }
        };
        let Some((trial, hp_t, f_t)) = accepted else {
            // no representable ascent left: accept if close to flat
            if norm < opts.tolerance.sqrt() * f.abs().max(1.0) {
                return hp.with_tau(tau);
            }
            return Err(Error::NoConvergence {
                iterations: opts.max_iterations,
                grad_norm: norm,
            });
        };
        let g_t = unconstrained_grad(stats, &hp_t);
        let scale = f.abs().max(1.0);
        if f_t - f < opts.tolerance * scale && dot(&g_t, &g_t).sqrt() < opts.tolerance.sqrt() * scale {
            return hp_t.with_tau(tau);
        }
        // inverse-Hessian update for minimising -f
        let s = [trial[0] - theta[0], trial[1] - theta[1], trial[2] - theta[2]];
        let y = [g[0] - g_t[0], g[1] - g_t[1], g[2] - g_t[2]];
        let sy = dot(&s, &y);
        if sy > 1e-12 {
            let hy = mat_vec(&h, &y);
            let yhy = dot(&y, &hy);
            let mut next = h;
            for r in 0..3 {
                for c in 0..3 {
                    next[r][c] += (sy + yhy) * s[r] * s[c] / (sy * sy) - (hy[r] * s[c] + s[r] * hy[c]) / sy;
                }
            }
            h = next;
        }
        theta = trial;
        hp = hp_t;
        f = f_t;
        g = g_t;
    }
    let norm = dot(&g, &g).sqrt();
    if norm < opts.tolerance * f.abs().max(1.0) {
        hp.with_tau(tau)
    } else {
        Err(Error::NoConvergence {
            iterations: opts.max_iterations,
            grad_norm: norm,
        })
    }
}

/// Log prior density of the hyperparameters expressed in unconstrained
/// coordinates: `alpha ~ Gamma(1, 1)`, `sigma ~ U(0, 1)`,
/// `c + sigma ~ Gamma(1, 1)`, `tau ~ Gamma(1, rate 0.01)`, plus Jacobians.
pub fn hyper_log_prior(hp: &Hyperparams) -> f64 {
    let (a, s, d, t) = (hp.alpha(), hp.sigma(), hp.c() + hp.sigma(), hp.tau());
    (-a + a.ln()) + (s * (1.0 - s)).ln() + (-d + d.ln()) + (-0.01 * t + t.ln())
}

/// One random-walk step on all four unconstrained coordinates.
/// Returns the new hyperparameters, their log joint and whether the step moved.
pub(crate) fn mh_hyper_step<R: Rng + ?Sized>(
    stats: &IbpStats,
    hp: &Hyperparams,
    log_joint: f64,
    step: f64,
    rng: &mut R,
) -> (Hyperparams, f64, Option<RateTable>) {
    let mut theta = hp.to_unconstrained();
    for t in theta.iter_mut() {
        let z: f64 = rng.sample(StandardNormal);
        *t += step * z;
    }
    let u: f64 = rng.random();
    let Ok(proposal) = Hyperparams::from_unconstrained(theta) else {
        return (*hp, log_joint, None);
    };
    let mut rates = RateTable::new(proposal);
    let lj = log_joint_stats(stats, &proposal, true, &mut rates);
    let log_ratio = lj + hyper_log_prior(&proposal) - log_joint - hyper_log_prior(hp);
    if lj.is_finite() && u.ln() < log_ratio {
        (proposal, lj, Some(rates))
    } else {
        (*hp, log_joint, None)
    }
}

/// Posterior draws of the hyperparameters for a fixed cover, one per iteration.
pub fn fit_hyperparams_mh<R: Rng + ?Sized>(
    z: &CliqueMatrix,
    init: &Hyperparams,
    iterations: usize,
    step: f64,
    rng: &mut R,
) -> Result<Vec<Hyperparams>> {
    let stats = nonempty(z)?;
    let mut hp = *init;
    let mut lj = log_joint_stats(&stats, &hp, true, &mut RateTable::new(hp));
    let mut out = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let (next, next_lj, _) = mh_hyper_step(&stats, &hp, lj, step, rng);
        hp = next;
        lj = next_lj;
        out.push(hp);
    }
    Ok(out)
}

impl McmcState {
    /// Metropolis–Hastings update of the hyperparameters given the cover.
    pub fn update_hyper_mh(&mut self, step: f64) -> bool {
        let (hp, lj, rates) = mh_hyper_step(&self.stats, &self.hp, self.log_joint, step, &mut self.rng);
        match rates {
            Some(rates) => {
                self.set_hyperparams(hp, rates, lj);
                true
            }
            None => false,
        }
    }

    /// Replaces the hyperparameters by their maximum-likelihood values given the cover.
    pub fn update_hyper_gradient(&mut self, opts: &GradientOptions) -> Result<()> {
        let hp = fit_stats_gradient(&self.stats, &self.hp, opts)?;
        let mut rates = RateTable::new(hp);
        let lj = log_joint_stats(&self.stats, &hp, true, &mut rates);
        self.set_hyperparams(hp, rates, lj);
        Ok(())
    }
}
