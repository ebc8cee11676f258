use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, StudentsT};

use crate::error::{Error, Result};

/// Least-squares fit of `ln|E| = intercept + slope * ln|V|`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Regression {
    pub slope: f64,
    pub intercept: f64,
    pub slope_std_error: f64,
    /// 95% interval for the slope.
    pub slope_ci: (f64, f64),
    pub samples: usize,
}

/// Fits log edge count on log vertex count. Samples with `|E| = 0` carry no
/// information on the log scale and are rejected.
pub fn sparsity_regression(samples: &[(usize, usize)]) -> Result<Regression> {
    if samples.len() < 3 {
        return Err(Error::InvalidArgument(format!(
            "sparsity regression needs at least 3 samples, got {}",
            samples.len()
        )));
    }
    let mut xs = Vec::with_capacity(samples.len());
    let mut ys = Vec::with_capacity(samples.len());
    for &(v, e) in samples {
        if v < 2 {
            return Err(Error::InvalidArgument(format!(
                "sample with {v} vertices; need at least 2"
            )));
        }
        if e == 0 {
            return Err(Error::InvalidArgument("sample with no edges".into()));
        }
        xs.push((v as f64).ln());
        ys.push((e as f64).ln());
    }
    fit_line(&xs, &ys)
}

pub(crate) fn fit_line(xs: &[f64], ys: &[f64]) -> Result<Regression> {
    let n = xs.len();
    let nf = n as f64;
    let mx = xs.iter().sum::<f64>() / nf;
    let my = ys.iter().sum::<f64>() / nf;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx <= 1e-12 * nf.max(1.0) {
        return Err(Error::InvalidArgument(
            "regression input has zero variance".into(),
        ));
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (slope_std_error, slope_ci) = if n > 2 {
        let rss: f64 = xs
            .iter()
            .zip(ys)
            .map(|(x, y)| {
                let r = y - intercept - slope * x;
                r * r
            })
            .sum();
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0)
            .map_err(|e| Error::Numerical(e.to_string()))?
            .inverse_cdf(0.975);
        (se, (slope - t * se, slope + t * se))
    } else {
        (f64::NAN, (f64::NAN, f64::NAN))
    };
    Ok(Regression {
        slope,
        intercept,
        slope_std_error,
        slope_ci,
        samples: n,
    })
}
