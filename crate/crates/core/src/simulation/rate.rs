//! Log-log rate fits with bootstrap confidence bands.

use rand::Rng;
use serde::Serialize;

use super::distance::ResampleKs;
use crate::error::{invalid, Result};
use crate::rng::stream_rng;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub slope: f64,
    pub intercept: f64,
    /// Half-width of the 95% band for the slope.
    pub half_width: f64,
    /// Exponent the theory predicts, when known.
    pub predicted_order: Option<f64>,
}

impl RateEstimate {
    pub fn interval(&self) -> (f64, f64) {
        (self.slope - self.half_width, self.slope + self.half_width)
    }
}

fn least_squares(xs: &[f64], ys: &[f64]) -> (f64, f64) {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

fn check_points(points: &[(usize, f64)]) -> Result<()> {
    let mut ns: Vec<usize> = points.iter().map(|p| p.0).collect();
    ns.sort_unstable();
    ns.dedup();
    if ns.len() < 3 {
        return invalid("rate fit needs at least 3 distinct sample sizes");
    }
    if points.iter().any(|p| !(p.1 > 0.0) || !p.1.is_finite()) {
        return invalid("rate fit needs strictly positive finite distances");
    }
    Ok(())
}

/// Least-squares slope of `ln D_n` on `ln n`. The band is the normal-theory
/// 95% interval from the regression residuals.
pub fn rate_fit(points: &[(usize, f64)]) -> Result<RateEstimate> {
    check_points(points)?;
    let xs: Vec<f64> = points.iter().map(|p| (p.0 as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let (slope, intercept) = least_squares(&xs, &ys);
    let k = xs.len() as f64;
    let rss: f64 = xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
    let mx = xs.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    let se = if k > 2.0 { (rss / (k - 2.0) / sxx).sqrt() } else { 0.0 };
    Ok(RateEstimate { slope, intercept, half_width: 1.96 * se, predicted_order: None })
}

const BOOT_TAG: u64 = 0xB007;

/// Rate fit of the Kolmogorov distance, with the 95% band from `resamples`
/// multinomial resamples of the replicates at every `n`. `samples` holds
/// ascending standardized statistics per sample size.
pub fn rate_fit_bootstrap(samples: &[(usize, &[f64])], resamples: usize, seed: u64) -> Result<RateEstimate> {
    let points: Vec<(usize, f64)> =
        samples.iter().map(|(n, s)| (*n, super::distance::kolmogorov_distance(s))).collect();
    let mut fit = rate_fit(&points)?;
    if resamples < 2 {
        return Ok(fit);
    }
    let xs: Vec<f64> = samples.iter().map(|(n, _)| (*n as f64).ln()).collect();
    let ks: Vec<ResampleKs> = samples.iter().map(|(_, s)| ResampleKs::new(s)).collect();
    use rayon::prelude::*;
    let mut slopes: Vec<f64> = (0..resamples)
        .into_par_iter()
        .map(|b| {
            let ys: Vec<f64> = samples
                .iter()
                .zip(&ks)
                .map(|((n, s), k)| {
                    let mut rng = stream_rng(seed, BOOT_TAG ^ (*n as u64).rotate_left(17), b as u64);
                    let mut counts = vec![0u32; s.len()];
                    for _ in 0..s.len() {
                        counts[rng.random_range(0..s.len())] += 1;
                    }
                    k.distance(&counts).max(f64::MIN_POSITIVE).ln()
                })
                .collect();
            least_squares(&xs, &ys).0
        })
        .collect();
    slopes.sort_by(f64::total_cmp);
    let q = |p: f64| slopes[((p * (slopes.len() - 1) as f64).round() as usize).min(slopes.len() - 1)];
    fit.half_width = 0.5 * (q(0.975) - q(0.025));
    Ok(fit)
}
