use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters of the stable-beta IBP clique process plus the Poisson rate of
/// the clique count.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawHyperparams")]
pub struct Hyperparams {
    alpha: f64,
    sigma: f64,
    c: f64,
    tau: f64,
}

#[derive(Deserialize)]
struct RawHyperparams {
    alpha: f64,
    sigma: f64,
    c: f64,
    tau: f64,
}

impl TryFrom<RawHyperparams> for Hyperparams {
    type Error = Error;

    fn try_from(raw: RawHyperparams) -> Result<Self> {
        Hyperparams::new(raw.alpha, raw.sigma, raw.c, raw.tau)
    }
}

impl Hyperparams {
    /// Rejects anything outside `alpha > 0`, `0 < sigma < 1`, `c > -sigma`, `tau > 0`.
    pub fn new(alpha: f64, sigma: f64, c: f64, tau: f64) -> Result<Self> {
        let fail = |msg: String| Err(Error::InvalidHyperparams(msg));
        if !(alpha.is_finite() && alpha > 0.0) {
            return fail(format!("alpha must be positive, got {alpha}"));
        }
        if !(sigma > 0.0 && sigma < 1.0) {
            return fail(format!("sigma must lie in (0, 1), got {sigma}"));
        }
        if !(c.is_finite() && c > -sigma) {
            return fail(format!("c must exceed -sigma = {}, got {c}", -sigma));
        }
        if !(tau.is_finite() && tau > 0.0) {
            return fail(format!("tau must be positive, got {tau}"));
        }
        Ok(Self { alpha, sigma, c, tau })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn tau(&self) -> f64 {
        self.tau
    }

    pub fn with_tau(self, tau: f64) -> Result<Self> {
        Self::new(self.alpha, self.sigma, self.c, tau)
    }

    /// Unconstrained coordinates `(ln alpha, logit sigma, ln(c + sigma), ln tau)`.
    pub fn to_unconstrained(&self) -> [f64; 4] {
        [
            self.alpha.ln(),
            (self.sigma / (1.0 - self.sigma)).ln(),
            (self.c + self.sigma).ln(),
            self.tau.ln(),
        ]
    }

    pub fn from_unconstrained(theta: [f64; 4]) -> Result<Self> {
        let sigma = 1.0 / (1.0 + (-theta[1]).exp());
        let c = theta[2].exp() - sigma;
        Self::new(theta[0].exp(), sigma, c, theta[3].exp())
    }
}
