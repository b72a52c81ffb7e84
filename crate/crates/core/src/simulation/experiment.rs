//! Replicated sampling of the classic statistics.

use std::time::Instant;

use rayon::prelude::*;
use serde::Serialize;

use super::distance::{default_z_grid, distances_sorted, Weight};
use super::rate::{rate_fit_bootstrap, RateEstimate};
use crate::dist::DistributionSpec;
use crate::error::{invalid, Error, Result};
use crate::rng::stream_rng;
use crate::statistics::{hotelling_t2_unchecked, pearson_r_unchecked, student_t_unchecked, Outcome};
use crate::statistics::{degeneracy_check, StatisticKind};

/// Replicates per independent work unit.
pub const REPLICATE_BATCH: usize = 512;
pub const DEFAULT_REPLICATES: usize = 200_000;
pub const DEFAULT_BOOTSTRAP: usize = 500;

const SIM_TAG: u64 = 0x51A7;

/// Raw statistic values for one sample size, in replicate order.
#[derive(Debug, Clone, PartialEq)]
pub struct RawDraws {
    pub values: Vec<f64>,
    /// Replicates whose statistic was undefined.
    pub sentinels: usize,
}

pub(crate) fn worker_pool(workers: usize) -> Result<rayon::ThreadPool> {
    if workers == 0 {
        return invalid("workers must be at least 1");
    }
    rayon::ThreadPoolBuilder::new().num_threads(workers).build().map_err(|e| Error::Evaluation(e.to_string()))
}

/// Draw `replicates` samples of size `n` and evaluate the statistic on each.
/// Replicate batches use streams keyed by `(seed, n, batch)`, so the result
/// does not depend on `workers`. Does not check degeneracy.
pub fn simulate_statistic(
    kind: &StatisticKind,
    observation: &DistributionSpec,
    n: usize,
    replicates: usize,
    seed: u64,
    workers: usize,
) -> Result<RawDraws> {
    let k = kind.observation_dim();
    if observation.dimension() != k {
        return invalid(format!("{} needs {k}-dimensional observations", kind.name()));
    }
    let min_n = if let StatisticKind::Hotelling { .. } = kind { k + 1 } else { 2 };
    if n < min_n {
        return invalid(format!("{} needs n >= {min_n}", kind.name()));
    }
    let sampler = observation.sampler()?;
    let batches = replicates.div_ceil(REPLICATE_BATCH);
    let pool = worker_pool(workers)?;
    let chunks: Vec<(Vec<f64>, usize)> = pool.install(|| {
        (0..batches)
            .into_par_iter()
            .map(|b| {
                let mut rng = stream_rng(seed, SIM_TAG ^ (n as u64).rotate_left(32), b as u64);
                let count = REPLICATE_BATCH.min(replicates - b * REPLICATE_BATCH);
                let mut buf = vec![0.0; n * k];
                let mut pairs = vec![[0.0; 2]; if k == 2 { n } else { 0 }];
                let mut out = Vec::with_capacity(count);
                let mut sentinels = 0;
                for _ in 0..count {
                    for row in buf.chunks_exact_mut(k) {
                        sampler.draw(&mut rng, row);
                    }
                    let outcome = match kind {
                        StatisticKind::Student { .. } => student_t_unchecked(&buf),
                        StatisticKind::Pearson { .. } => {
                            for (p, r) in pairs.iter_mut().zip(buf.chunks_exact(2)) {
                                *p = [r[0], r[1]];
                            }
                            pearson_r_unchecked(&pairs)
                        }
                        StatisticKind::Hotelling { .. } => hotelling_t2_unchecked(&buf, k),
                    };
                    match outcome {
                        Outcome::Value(v) if v.is_finite() => out.push(v),
                        _ => sentinels += 1,
                    }
                }
                (out, sentinels)
            })
            .collect()
    });
    let sentinels = chunks.iter().map(|c| c.1).sum();
    Ok(RawDraws { values: chunks.into_iter().flat_map(|c| c.0).collect(), sentinels })
}

/// Centering and scaling under which the statistic is asymptotically
/// standard normal.
pub fn standardize(kind: &StatisticKind, sigma1: f64, n: usize, value: f64) -> f64 {
    let rn = (n as f64).sqrt();
    match kind {
        StatisticKind::Student { mu } => (value - rn * mu) / sigma1,
        StatisticKind::Pearson { rho } => rn * (value - rho) / sigma1,
        StatisticKind::Hotelling { mu } => {
            let m2: f64 = mu.iter().map(|m| m * m).sum();
            (value - n as f64 * m2) / (rn * sigma1)
        }
    }
}

/// Inputs of [`run_experiment`].
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentSpec {
    pub kind: StatisticKind,
    pub observation: DistributionSpec,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub z_grid: Vec<f64>,
    pub seed: u64,
    pub workers: usize,
    /// Bootstrap resamples for the rate band; 0 skips the fit.
    pub bootstrap: usize,
}

impl ExperimentSpec {
    pub fn new(kind: StatisticKind, observation: DistributionSpec, n_grid: Vec<usize>) -> Self {
        Self {
            kind,
            observation,
            n_grid,
            replicates: DEFAULT_REPLICATES,
            z_grid: default_z_grid(),
            seed: 0,
            workers: 1,
            bootstrap: DEFAULT_BOOTSTRAP,
        }
    }
}

/// Distances at one sample size.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SizeResult {
    pub n: usize,
    pub replicates: usize,
    pub sentinels: usize,
    /// Kolmogorov distance `D_n`.
    pub uniform: f64,
    /// `(z, |F̂(z) − Φ(z)|)`.
    pub raw: Vec<(f64, f64)>,
    /// Maximum of `|z|³ |F̂(z) − Φ(z)|` over the grid.
    pub max_polynomial: f64,
    /// Maximum of `e^{|z|/3} |F̂(z) − Φ(z)|` over the grid.
    pub max_exponential: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SimulationRun {
    pub digest: Option<String>,
    pub statistic: StatisticKind,
    pub observation: String,
    pub sigma1: f64,
    pub n_grid: Vec<usize>,
    pub replicates: usize,
    pub seed: u64,
    pub z_grid: Vec<f64>,
    pub results: Vec<SizeResult>,
    pub rate: Option<RateEstimate>,
    pub wall_seconds: f64,
    /// Ascending standardized statistics per sample size.
    #[serde(skip)]
    pub samples: Vec<Vec<f64>>,
}

impl SimulationRun {
    /// `n,uniform,max_polynomial,max_exponential,sentinels` rows.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,uniform,max_polynomial,max_exponential,sentinels\n");
        for r in &self.results {
            s += &format!("{},{:e},{:e},{:e},{}\n", r.n, r.uniform, r.max_polynomial, r.max_exponential, r.sentinels);
        }
        s
    }

    /// Two-column `ln n, ln D_n` data for plotting.
    pub fn loglog(&self) -> String {
        self.results.iter().map(|r| format!("{:.12e} {:.12e}\n", (r.n as f64).ln(), r.uniform.ln())).collect()
    }
}

/// Estimate `D_n` (and weighted distances) across `n_grid`; refuses
/// degenerate models.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<SimulationRun> {
    let start = Instant::now();
    if spec.n_grid.is_empty() || spec.replicates == 0 {
        return invalid("need a non-empty n-grid and at least one replicate");
    }
    let report = degeneracy_check(&spec.kind, &spec.observation)?;
    if report.degenerate {
        return Err(Error::Degenerate { sigma: report.sigma1 });
    }
    let sigma1 = report.sigma1;
    let mut results = Vec::with_capacity(spec.n_grid.len());
    let mut samples = Vec::with_capacity(spec.n_grid.len());
    for &n in &spec.n_grid {
        let raw = simulate_statistic(&spec.kind, &spec.observation, n, spec.replicates, spec.seed, spec.workers)?;
        if raw.values.is_empty() {
            return Err(Error::Evaluation(format!("every replicate at n = {n} was undefined")));
        }
        let mut z: Vec<f64> = raw.values.iter().map(|&v| standardize(&spec.kind, sigma1, n, v)).collect();
        z.sort_by(f64::total_cmp);
        let d = distances_sorted(&z, &spec.z_grid, Weight::Uniform);
        let weighted_max = |w: Weight| d.weighted.iter().map(|&(z, v)| w.at(z) * v).fold(0.0, f64::max);
        results.push(SizeResult {
            n,
            replicates: spec.replicates,
            sentinels: raw.sentinels,
            uniform: d.uniform,
            max_polynomial: weighted_max(Weight::Polynomial { p: 3.0 }),
            max_exponential: weighted_max(Weight::Exponential),
            raw: d.weighted,
        });
        samples.push(z);
    }
    let rate = if spec.bootstrap > 0 && spec.n_grid.len() >= 3 {
        let views: Vec<(usize, &[f64])> = spec.n_grid.iter().copied().zip(samples.iter().map(Vec::as_slice)).collect();
        let pool = worker_pool(spec.workers)?;
        let mut fit = pool.install(|| rate_fit_bootstrap(&views, spec.bootstrap, spec.seed))?;
        fit.predicted_order = spec.observation.moment_finite(6.0).then_some(-0.5);
        Some(fit)
    } else {
        None
    };
    Ok(SimulationRun {
        digest: None,
        statistic: spec.kind.clone(),
        observation: spec.observation.kind_name().into(),
        sigma1,
        n_grid: spec.n_grid.clone(),
        replicates: spec.replicates,
        seed: spec.seed,
        z_grid: spec.z_grid.clone(),
        results,
        rate,
        wall_seconds: start.elapsed().as_secs_f64(),
        samples,
    })
}
