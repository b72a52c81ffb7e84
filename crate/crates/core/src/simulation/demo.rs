//! Why the admissible range of `z` cannot grow faster than `√n`.
//!
//! With `f(x) = x + x²` and log-corrected heavy-tailed `V`, the statistic
//! `T = √n(S + S²)` exceeds `W = √n S`, and for `z ≫ √n` the defect
//! `P(T > z) − P(W > z)` is carried by a single large summand, which makes
//! it comparable to `n P(V > w)` with `w = n^{3/4} z^{1/2}`. Both tiny
//! probabilities are estimated by conditioning on the largest (or smallest)
//! summand, which is exact in expectation.

use rayon::prelude::*;
use serde::Serialize;

use super::experiment::worker_pool;
use crate::dist::HeavyTailLaw;
use crate::error::{invalid, Result};
use crate::rng::stream_rng;

const DEMO_TAG: u64 = 0xDE30;

/// How `z` is tied to `n`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ZRule {
    /// `z = κ √n`.
    Kappa(f64),
    /// `z = n^a`.
    Power(f64),
}

impl ZRule {
    pub fn z(self, n: usize) -> f64 {
        match self {
            ZRule::Kappa(k) => k * (n as f64).sqrt(),
            ZRule::Power(a) => (n as f64).powf(a),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DemoSpec {
    pub p: f64,
    pub n_grid: Vec<usize>,
    pub rules: Vec<ZRule>,
    pub replicates: usize,
    pub seed: u64,
    pub workers: usize,
    /// Drop the quadratic term, so `T = W`.
    pub linear: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoRow {
    pub n: usize,
    pub rule: ZRule,
    pub z: f64,
    pub defect: f64,
    pub defect_std_err: f64,
    /// `n P(V > w)`.
    pub tail: f64,
    pub ratio: f64,
    pub ratio_std_err: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DemoReport {
    pub p: f64,
    pub rows: Vec<DemoRow>,
}

impl DemoReport {
    pub fn rows_for(&self, rule: ZRule) -> impl Iterator<Item = &DemoRow> {
        self.rows.iter().filter(move |r| r.rule == rule)
    }

    pub fn to_csv(&self) -> String {
        let mut s = String::from("n,z,defect,defect_std_err,tail,ratio,ratio_std_err\n");
        for r in &self.rows {
            s += &format!("{},{:e},{:e},{:e},{:e},{:e},{:e}\n", r.n, r.z, r.defect, r.defect_std_err, r.tail, r.ratio, r.ratio_std_err);
        }
        s
    }
}

/// `P(V > v)` for any real `v`.
fn upper(law: &HeavyTailLaw, v: f64) -> f64 {
    if v >= 0.0 {
        law.survival(v)
    } else {
        1.0 - law.survival(-v)
    }
}

/// Unbiased estimate of `P(W ≤ z < T)` from one draw of the other `n − 1`
/// summands. `T > z ≥ W` means `r₊ < S ≤ κ` or `S < r₋`, where
/// `r± = (−1 ± √(1 + 4κ))/2` and `κ = z/√n`.
fn defect_given_rest(law: &HeavyTailLaw, n: usize, kappa: f64, rest_sum: f64, rest_max: f64, rest_min: f64) -> f64 {
    let nf = n as f64;
    let root = (1.0 + 4.0 * kappa).sqrt();
    let (a, b, c) = (nf * 0.5 * (root - 1.0), nf * kappa, -nf * 0.5 * (root + 1.0));
    // the conditioned summand is the largest: V ∈ (max(a − rest, M), b − rest]
    let lo = (a - rest_sum).max(rest_max);
    let hi = b - rest_sum;
    let up = if hi > lo { upper(law, lo) - upper(law, hi) } else { 0.0 };
    // or the smallest: V < min(c − rest, m)
    let t = (c - rest_sum).min(rest_min);
    let down = if t <= 0.0 { law.survival(-t) } else { 1.0 - law.survival(t) };
    nf * (up.max(0.0) + down)
}

pub fn optimality_demo(spec: &DemoSpec) -> Result<DemoReport> {
    if !(spec.p > 2.0) {
        return invalid(format!("p must exceed 2 (got {})", spec.p));
    }
    if spec.replicates < 2 || spec.n_grid.iter().any(|&n| n < 2) {
        return invalid("need at least 2 replicates and n >= 2");
    }
    let law = HeavyTailLaw::new(spec.p)?;
    let pool = worker_pool(spec.workers)?;
    let mut rows = Vec::new();
    for &n in &spec.n_grid {
        let zs: Vec<f64> = spec.rules.iter().map(|r| r.z(n)).collect();
        let per_rep: Vec<Vec<f64>> = if spec.linear {
            vec![vec![0.0; zs.len()]; spec.replicates]
        } else {
            pool.install(|| {
                (0..spec.replicates)
                    .into_par_iter()
                    .map(|r| {
                        let mut rng = stream_rng(spec.seed, DEMO_TAG ^ (n as u64).rotate_left(32), r as u64);
                        let (mut sum, mut max, mut min) = (0.0, f64::NEG_INFINITY, f64::INFINITY);
                        for _ in 1..n {
                            let v = law.draw(&mut rng);
                            sum += v;
                            max = f64::max(max, v);
                            min = f64::min(min, v);
                        }
                        let rn = (n as f64).sqrt();
                        zs.iter().map(|&z| defect_given_rest(&law, n, z / rn, sum, max, min)).collect()
                    })
                    .collect()
            })
        };
        let reps = spec.replicates as f64;
        for (j, (&rule, &z)) in spec.rules.iter().zip(&zs).enumerate() {
            let mean = per_rep.iter().map(|v| v[j]).sum::<f64>() / reps;
            let var = per_rep.iter().map(|v| (v[j] - mean).powi(2)).sum::<f64>() / (reps - 1.0);
            let se = (var / reps).sqrt();
            let w = (n as f64).powf(0.75) * z.sqrt();
            let tail = n as f64 * law.survival(w);
            rows.push(DemoRow {
                n,
                rule,
                z,
                defect: mean,
                defect_std_err: se,
                tail,
                ratio: mean / tail,
                ratio_std_err: se / tail,
            });
        }
    }
    Ok(DemoReport { p: spec.p, rows })
}
