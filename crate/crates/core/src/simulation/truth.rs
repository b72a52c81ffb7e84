//! Empirical distances against the shape of the non-uniform bound.

use serde::Serialize;

use super::distance::ecdf_at;
use super::experiment::{simulate_statistic, standardize};
use crate::bounds::iid_p3_constants;
use crate::error::{invalid, Error, Result};
use crate::special::normal_cdf;
use crate::statistics::{BuildOptions, SmoothStatisticModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthRow {
    pub n: usize,
    pub z: f64,
    /// `|P(standardized statistic ≤ z) − Φ(z)|` by Monte Carlo.
    pub empirical: f64,
    /// `(A₁/|z|³ + A₂ e^{-|z|/3})/√n`.
    pub shape: f64,
    pub implied_constant: f64,
    /// Whether `z` lies in the range where the non-uniform bound applies.
    pub range_valid: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruthTable {
    pub rows: Vec<TruthRow>,
    /// `(n, A₁, A₂)`.
    pub constants: Vec<(usize, f64, f64)>,
    /// `(n, sup of implied constants over range-valid rows)`.
    pub implied_by_n: Vec<(usize, f64)>,
}

impl TruthTable {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,z,empirical,shape,implied_constant,range_valid\n");
        for r in &self.rows {
            s += &format!("{},{},{:e},{:e},{:e},{}\n", r.n, r.z, r.empirical, r.shape, r.implied_constant, r.range_valid);
        }
        s
    }

    pub fn implied_at(&self, n: usize) -> Option<f64> {
        self.implied_by_n.iter().find(|r| r.0 == n).map(|r| r.1)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TruthSpec {
    pub n_grid: Vec<usize>,
    pub z_grid: Vec<f64>,
    pub replicates: usize,
    pub seed: u64,
    pub workers: usize,
}

/// Tabulate Monte Carlo distances against the bound's shape with the
/// absolute constant set to 1.
pub fn bound_vs_truth(model: &SmoothStatisticModel, spec: &TruthSpec) -> Result<TruthTable> {
    let kind = model.kind().ok_or_else(|| Error::InvalidInput("bound_vs_truth needs a built-in statistic".into()))?;
    if spec.n_grid.is_empty() || spec.z_grid.is_empty() {
        return invalid("need non-empty n and z grids");
    }
    let scalars = model.scalars();
    if !(scalars.sigma1 > 0.0) {
        return Err(Error::Degenerate { sigma: scalars.sigma1 });
    }
    let moments = model.v_moments(&[2.0, 3.0], &BuildOptions::default())?;
    let v2 = moments[0].1.value(2.0)?;
    let v3 = moments[1].1.value(3.0)?;
    let mut table = TruthTable { rows: Vec::new(), constants: Vec::new(), implied_by_n: Vec::new() };
    for &n in &spec.n_grid {
        let (a1, a2) = iid_p3_constants(&scalars, v2, v3, n)?;
        table.constants.push((n, a1, a2));
        let raw = simulate_statistic(kind, &model.observation, n, spec.replicates, spec.seed, spec.workers)?;
        let mut zs: Vec<f64> = raw.values.iter().map(|&v| standardize(kind, scalars.sigma1, n, v)).collect();
        zs.sort_by(f64::total_cmp);
        let rn = (n as f64).sqrt();
        let z_max = 3.0 * scalars.c1() * scalars.epsilon.powi(2) * rn / scalars.sigma1;
        let mut sup = 0.0f64;
        for &z in &spec.z_grid {
            let az = z.abs();
            let empirical = (ecdf_at(&zs, z) - normal_cdf(z)).abs();
            let shape = (a1 / az.powi(3) + a2 * (-az / 3.0).exp()) / rn;
            let range_valid = (1.0..=z_max).contains(&az);
            let implied_constant = empirical / shape;
            if range_valid {
                sup = sup.max(implied_constant);
            }
            table.rows.push(TruthRow { n, z, empirical, shape, implied_constant, range_valid });
        }
        table.implied_by_n.push((n, sup));
    }
    Ok(table)
}
