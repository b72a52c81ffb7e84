//! Distances between an empirical distribution function and `Φ`.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::special::normal_cdf;

/// Weight applied to `|F̂(z) − Φ(z)|` on a z-grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Weight {
    Uniform,
    /// `|z|^p`.
    Polynomial { p: f64 },
    /// `e^{|z|/3}`.
    Exponential,
}

impl Weight {
    pub fn at(self, z: f64) -> f64 {
        match self {
            Weight::Uniform => 1.0,
            Weight::Polynomial { p } => z.abs().powf(p),
            Weight::Exponential => (z.abs() / 3.0).exp(),
        }
    }
}

/// Distances of one sample to the standard normal law.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Distances {
    /// `sup_z |F̂(z) − Φ(z)|`, exact for the empirical CDF.
    pub uniform: f64,
    /// `(z, weight(z)·|F̂(z) − Φ(z)|)` on the grid.
    pub weighted: Vec<(f64, f64)>,
    pub max_weighted: f64,
}

/// `F̂(z) = #{x ≤ z}/N` on an ascending sample.
pub fn ecdf_at(sorted: &[f64], z: f64) -> f64 {
    sorted.partition_point(|&x| x <= z) as f64 / sorted.len() as f64
}

/// Kolmogorov distance of an ascending sample to `Φ`. Both one-sided limits
/// are taken at every distinct value, so ties are handled exactly.
pub fn kolmogorov_distance(sorted: &[f64]) -> f64 {
    let n = sorted.len() as f64;
    let mut worst = 0.0f64;
    let mut i = 0;
    while i < sorted.len() {
        let x = sorted[i];
        let mut j = i + 1;
        while j < sorted.len() && sorted[j] == x {
            j += 1;
        }
        let phi = normal_cdf(x);
        worst = worst.max((i as f64 / n - phi).abs()).max((j as f64 / n - phi).abs());
        i = j;
    }
    worst
}

/// Uniform distance plus weighted distances on `z_grid`. Sentinels must be
/// filtered out beforehand.
pub fn empirical_distance(samples: &[f64], z_grid: &[f64], weight: Weight) -> Result<Distances> {
    if samples.is_empty() {
        return invalid("empty sample");
    }
    if samples.iter().any(|x| !x.is_finite()) {
        return invalid("sample contains non-finite values");
    }
    let mut sorted = samples.to_vec();
    sorted.sort_by(f64::total_cmp);
    Ok(distances_sorted(&sorted, z_grid, weight))
}

pub(crate) fn distances_sorted(sorted: &[f64], z_grid: &[f64], weight: Weight) -> Distances {
    let weighted: Vec<(f64, f64)> =
        z_grid.iter().map(|&z| (z, weight.at(z) * (ecdf_at(sorted, z) - normal_cdf(z)).abs())).collect();
    let max_weighted = weighted.iter().map(|w| w.1).fold(0.0, f64::max);
    Distances { uniform: kolmogorov_distance(sorted), weighted, max_weighted }
}

/// Integers in `[-6, 6]` with `|z| ≥ 1`.
pub fn default_z_grid() -> Vec<f64> {
    (-6..=6).filter(|z: &i32| z.abs() >= 1).map(f64::from).collect()
}

/// Kolmogorov distance of a multinomial resample of `sorted`, given the
/// resample counts of each element. Runs in `O(N)`.
pub(crate) struct ResampleKs {
    /// Distinct values' `Φ` and the index range they cover.
    groups: Vec<(f64, usize, usize)>,
    n: usize,
}

impl ResampleKs {
    pub fn new(sorted: &[f64]) -> Self {
        let mut groups = Vec::new();
        let mut i = 0;
        while i < sorted.len() {
            let mut j = i + 1;
            while j < sorted.len() && sorted[j] == sorted[i] {
                j += 1;
            }
            groups.push((normal_cdf(sorted[i]), i, j));
            i = j;
        }
        Self { groups, n: sorted.len() }
    }

    pub fn distance(&self, counts: &[u32]) -> f64 {
        let n = self.n as f64;
        let mut below = 0u64;
        let mut worst = 0.0f64;
        for &(phi, a, b) in &self.groups {
            let c: u64 = counts[a..b].iter().map(|&c| u64::from(c)).sum();
            if c > 0 {
                let lo = below as f64 / n;
                below += c;
                let hi = below as f64 / n;
                worst = worst.max((lo - phi).abs()).max((hi - phi).abs());
            }
        }
        worst
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::special::normal_quantile;

    #[test]
    fn point_mass_at_zero() {
        let d = empirical_distance(&[0.0; 10], &[-1.0, 1.0], Weight::Uniform).unwrap();
        assert_eq!(d.uniform, 0.5);
    }

    #[test]
    fn quantile_grid_distance() {
        let n = 200;
        let xs: Vec<f64> = (1..=n).map(|i| normal_quantile((i as f64 - 0.5) / n as f64)).collect();
        let d = empirical_distance(&xs, &[], Weight::Uniform).unwrap();
        assert!((d.uniform - 0.5 / n as f64).abs() < 1e-12);
    }

    #[test]
    fn resample_with_unit_counts_is_the_sample_distance() {
        let xs = [-1.0, -0.2, -0.2, 0.4, 2.0];
        let k = ResampleKs::new(&xs);
        assert_eq!(k.distance(&[1; 5]), kolmogorov_distance(&xs));
    }
}
