//! Smooth-functional representation `T ≈ f(V̄)` of the classic statistics.
//!
//! Each observation `X` is embedded as a centered vector `V`; the statistic
//! is a smooth function `f` of the mean `V̄`, with linear part `L`.

use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::bounds::ModelScalars;
use crate::dist::{sample, DistributionSpec, Estimate};
use crate::error::{Error, Result};
use crate::moments::{Moment, MomentProfile, NormLaw};

/// Which statistic a model represents, with its centering parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum StatisticKind {
    /// Non-central Student's T; `mu = E X` with unit variance.
    Student { mu: f64 },
    /// Pearson's R for standardized marginals; `rho = E XY`.
    Pearson { rho: f64 },
    /// Non-central Hotelling's T²; `mu = E X` with identity covariance.
    Hotelling { mu: Vec<f64> },
}

impl StatisticKind {
    pub fn name(&self) -> &'static str {
        match self {
            StatisticKind::Student { .. } => "student",
            StatisticKind::Pearson { .. } => "pearson",
            StatisticKind::Hotelling { .. } => "hotelling",
        }
    }

    /// Dimension of one observation.
    pub fn observation_dim(&self) -> usize {
        match self {
            StatisticKind::Student { .. } => 1,
            StatisticKind::Pearson { .. } => 2,
            StatisticKind::Hotelling { mu } => mu.len(),
        }
    }

    /// Dimension of the embedding space.
    pub fn embed_dim(&self) -> usize {
        match self {
            StatisticKind::Student { .. } => 2,
            StatisticKind::Pearson { .. } => 5,
            StatisticKind::Hotelling { mu } => mu.len() + mu.len() * (mu.len() + 1) / 2,
        }
    }
}

/// User-supplied functional: embedding, `f`, and the coefficients of `L`.
#[derive(Clone)]
pub struct UserFunctional {
    pub name: String,
    pub observation_dim: usize,
    pub embed_dim: usize,
    #[allow(clippy::type_complexity)]
    pub embed: Arc<dyn Fn(&[f64], &mut [f64]) + Send + Sync>,
    pub f: Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>,
    pub linear: Vec<f64>,
}

impl fmt::Debug for UserFunctional {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserFunctional").field("name", &self.name).field("linear", &self.linear).finish()
    }
}

#[derive(Debug, Clone)]
pub enum Functional {
    Builtin(StatisticKind),
    User(UserFunctional),
}

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Coordinates of a symmetric `k×k` matrix in the orthonormal basis
/// `E_ii`, `(E_ij + E_ji)/√2` (so the Euclidean norm is the Frobenius norm).
pub fn sym_to_coords(m: &[f64], k: usize, out: &mut [f64]) {
    let mut at = 0;
    for i in 0..k {
        out[at] = m[i * k + i];
        at += 1;
    }
    for i in 0..k {
        for j in i + 1..k {
            out[at] = SQRT_2 * m[i * k + j];
            at += 1;
        }
    }
}

/// Inverse of [`sym_to_coords`].
pub fn coords_to_sym(c: &[f64], k: usize) -> Vec<f64> {
    let mut m = vec![0.0; k * k];
    let mut at = 0;
    for i in 0..k {
        m[i * k + i] = c[at];
        at += 1;
    }
    for i in 0..k {
        for j in i + 1..k {
            m[i * k + j] = c[at] / SQRT_2;
            m[j * k + i] = m[i * k + j];
            at += 1;
        }
    }
    m
}

impl Functional {
    pub fn observation_dim(&self) -> usize {
        match self {
            Functional::Builtin(k) => k.observation_dim(),
            Functional::User(u) => u.observation_dim,
        }
    }

    pub fn embed_dim(&self) -> usize {
        match self {
            Functional::Builtin(k) => k.embed_dim(),
            Functional::User(u) => u.embed_dim,
        }
    }

    /// `V = embed(X)`.
    pub fn embed(&self, x: &[f64], out: &mut [f64]) {
        match self {
            Functional::Builtin(StatisticKind::Student { mu }) => {
                let z = x[0] - mu;
                out[0] = z;
                out[1] = z * z - 1.0;
            }
            Functional::Builtin(StatisticKind::Pearson { rho }) => {
                let (a, b) = (x[0], x[1]);
                out[0] = a;
                out[1] = b;
                out[2] = a * a - 1.0;
                out[3] = b * b - 1.0;
                out[4] = a * b - rho;
            }
            Functional::Builtin(StatisticKind::Hotelling { mu }) => {
                let k = mu.len();
                let z: Vec<f64> = x.iter().zip(mu).map(|(a, m)| a - m).collect();
                out[..k].copy_from_slice(&z);
                let mut outer = vec![0.0; k * k];
                for i in 0..k {
                    for j in 0..k {
                        outer[i * k + j] = z[i] * z[j] - if i == j { 1.0 } else { 0.0 };
                    }
                }
                sym_to_coords(&outer, k, &mut out[k..]);
            }
            Functional::User(u) => (u.embed)(x, out),
        }
    }

    /// `f(x)`; `NaN` outside the domain.
    pub fn f(&self, x: &[f64]) -> f64 {
        match self {
            Functional::Builtin(StatisticKind::Student { mu }) => (x[0] + mu) / (x[1] + 1.0 - x[0] * x[0]).sqrt() - mu,
            Functional::Builtin(StatisticKind::Pearson { rho }) => {
                let num = x[4] + rho - x[0] * x[1];
                num / ((x[2] + 1.0 - x[0] * x[0]).sqrt() * (x[3] + 1.0 - x[1] * x[1]).sqrt()) - rho
            }
            Functional::Builtin(StatisticKind::Hotelling { mu }) => {
                let k = mu.len();
                let x2 = coords_to_sym(&x[k..], k);
                let a = nalgebra::DMatrix::from_fn(k, k, |i, j| {
                    (if i == j { 1.0 } else { 0.0 }) + x2[i * k + j] - x[i] * x[j]
                });
                let b = nalgebra::DVector::from_fn(k, |i, _| x[i] + mu[i]);
                let mm: f64 = mu.iter().map(|m| m * m).sum();
                match a.cholesky() {
                    Some(ch) => b.dot(&ch.solve(&b)) - mm,
                    None => f64::NAN,
                }
            }
            Functional::User(u) => (u.f)(x),
        }
    }

    /// Coefficients of `L` in the embedding coordinates.
    pub fn linear(&self) -> Vec<f64> {
        match self {
            Functional::Builtin(StatisticKind::Student { mu }) => vec![1.0, -mu / 2.0],
            Functional::Builtin(StatisticKind::Pearson { rho }) => vec![0.0, 0.0, -rho / 2.0, -rho / 2.0, 1.0],
            Functional::Builtin(StatisticKind::Hotelling { mu }) => {
                let k = mu.len();
                let mut c: Vec<f64> = mu.iter().map(|m| 2.0 * m).collect();
                let mut outer = vec![0.0; k * k];
                for i in 0..k {
                    for j in 0..k {
                        outer[i * k + j] = -mu[i] * mu[j];
                    }
                }
                // -μᵀx₂μ pairs off-diagonal entries twice: 2·(-μ_iμ_j)/√2 = √2·(-μ_iμ_j),
                // which is exactly the coordinate map of -μμᵀ.
                let mut coords = vec![0.0; k * (k + 1) / 2];
                sym_to_coords(&outer, k, &mut coords);
                c.extend(coords);
                c
            }
            Functional::User(u) => u.linear.clone(),
        }
    }
}

/// Model construction options.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BuildOptions {
    pub epsilon: f64,
    /// Points used to certify the smoothness constant.
    pub certify_points: usize,
    /// Multiplier applied to the certified constant.
    pub safety: f64,
    /// Replaces certification when set.
    pub m_override: Option<f64>,
    /// Draws for Monte Carlo moments when no exact rule exists.
    pub mc_draws: usize,
    pub seed: u64,
}

impl Default for BuildOptions {
    fn default() -> Self {
        Self { epsilon: 0.5, certify_points: 100_000, safety: 1.1, m_override: None, mc_draws: 400_000, seed: 0x5EED }
    }
}

/// A statistic as `(embed, f, L)` together with its smoothness data.
#[derive(Debug, Clone)]
pub struct SmoothStatisticModel {
    pub functional: Functional,
    pub observation: DistributionSpec,
    /// `‖L‖` used in bounds (an upper bound for Hotelling).
    pub norm_l: f64,
    /// Operator norm of `L` computed from its coefficients.
    pub norm_l_exact: f64,
    /// Standard deviation of `L(V)`.
    pub sigma1: Estimate,
    pub epsilon: f64,
    /// Smoothness constant used in bounds (certified and inflated).
    pub m: f64,
    /// Certified value before inflation.
    pub m_certified: f64,
    pub certification_violations: usize,
    pub exact_moments: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Expectations of functions of `V = embed(X)`: weighted points from an
/// exact rule when available, otherwise Monte Carlo draws.
struct EmbeddedPoints {
    points: Vec<f64>,
    weights: Vec<f64>,
    dim: usize,
    exact: bool,
}

impl EmbeddedPoints {
    fn new(functional: &Functional, obs: &DistributionSpec, opts: &BuildOptions) -> Result<Self> {
        let dim = functional.embed_dim();
        let (xs, weights, exact): (Vec<Vec<f64>>, Vec<f64>, bool) = match obs.integration_rule() {
            Some(rule) => {
                let (x, w) = rule.into_iter().unzip();
                (x, w, true)
            }
            None => {
                let s = sample(obs, opts.mc_draws, opts.seed)?;
                let w = 1.0 / s.len() as f64;
                (s.rows().map(|r| r.to_vec()).collect(), vec![w; s.len()], false)
            }
        };
        let mut points = vec![0.0; xs.len() * dim];
        for (x, out) in xs.iter().zip(points.chunks_exact_mut(dim)) {
            functional.embed(x, out);
        }
        Ok(Self { points, weights, dim, exact })
    }

    fn rows(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.points.chunks_exact(self.dim).zip(self.weights.iter().copied())
    }

    fn expect(&self, g: impl Fn(&[f64]) -> f64) -> Estimate {
        let vals: Vec<f64> = self.rows().map(|(v, w)| w * g(v)).collect();
        let value = crate::special::pairwise_sum(&vals);
        if self.exact {
            return Estimate::exact(value);
        }
        let n = self.weights.len() as f64;
        let var = self.rows().map(|(v, _)| (g(v) - value).powi(2)).sum::<f64>() / (n - 1.0);
        Estimate { value, std_err: (var / n).sqrt() }
    }
}

impl SmoothStatisticModel {
    pub fn kind(&self) -> Option<&StatisticKind> {
        match &self.functional {
            Functional::Builtin(k) => Some(k),
            Functional::User(_) => None,
        }
    }

    pub fn scalars(&self) -> ModelScalars {
        ModelScalars { norm_l: self.norm_l, sigma1: self.sigma1.value, m: self.m, epsilon: self.epsilon }
    }

    pub fn c1(&self) -> f64 {
        self.scalars().c1()
    }

    /// `‖V‖_α` for each requested `α`, flagged infinite when `E‖X‖^{2α}`
    /// diverges.
    pub fn v_moments(&self, alphas: &[f64], opts: &BuildOptions) -> Result<Vec<(f64, Moment)>> {
        let pts = EmbeddedPoints::new(&self.functional, &self.observation, opts)?;
        Ok(alphas
            .iter()
            .map(|&a| {
                if !self.observation.moment_finite(2.0 * a) {
                    return (a, Moment::Infinite);
                }
                let e = pts.expect(|v| norm(v).powf(a));
                let value = e.value.powf(1.0 / a);
                (a, Moment::Finite { value, std_err: value / (a * e.value) * e.std_err })
            })
            .collect())
    }

    /// i.i.d. moment profile of `V̄` for sample size `n`.
    pub fn moment_profile(&self, n: usize, alphas: &[f64], opts: &BuildOptions) -> Result<MomentProfile> {
        let pts = EmbeddedPoints::new(&self.functional, &self.observation, opts)?;
        let moments = self.v_moments(alphas, opts)?;
        let law = NormLaw::weighted(pts.rows().map(|(v, w)| (norm(v), w)).collect());
        Ok(MomentProfile::iid(moments, n, law))
    }
}

/// Build the model for a built-in statistic and observation distribution.
///
/// The observation law must be standardized as the statistic requires:
/// unit variance around `mu` (Student), standardized marginals with
/// `E XY = rho` (Pearson), identity covariance around `mu` (Hotelling).
pub fn build_model(kind: StatisticKind, observation: &DistributionSpec, opts: &BuildOptions) -> Result<SmoothStatisticModel> {
    let functional = Functional::Builtin(kind.clone());
    if let StatisticKind::Hotelling { mu } = &kind {
        if mu.is_empty() {
            return Err(Error::InvalidInput("Hotelling mean must be non-empty".into()));
        }
    }
    if observation.dimension() != kind.observation_dim() {
        return Err(Error::InvalidInput(format!(
            "{} needs {}-dimensional observations, got {}",
            kind.name(),
            kind.observation_dim(),
            observation.dimension()
        )));
    }
    build_from_functional(functional, observation, opts)
}

/// Build a model from any functional (including user-supplied ones).
pub fn build_from_functional(
    functional: Functional,
    observation: &DistributionSpec,
    opts: &BuildOptions,
) -> Result<SmoothStatisticModel> {
    observation.validate()?;
    if !observation.moment_finite(6.0) {
        return Err(Error::InfiniteMoment { alpha: 6.0 });
    }
    if !(opts.epsilon > 0.0) {
        return Err(Error::InvalidInput("epsilon must be positive".into()));
    }
    let pts = EmbeddedPoints::new(&functional, observation, opts)?;
    // The embedding must be centered: E V = 0.
    for j in 0..pts.dim {
        let e = pts.expect(|v| v[j]);
        let tol = if pts.exact { 1e-8 } else { 6.0 * e.std_err + 1e-12 };
        if e.value.abs() > tol {
            return Err(Error::InvalidInput(format!(
                "observation law is not standardized for this statistic: embedded coordinate {j} has mean {:.3e}",
                e.value
            )));
        }
    }
    let linear = functional.linear();
    let norm_l_exact = norm(&linear);
    let norm_l = match &functional {
        Functional::Builtin(StatisticKind::Hotelling { mu }) => {
            let m = norm(mu);
            m * (4.0 + m * m).sqrt()
        }
        _ => norm_l_exact,
    };
    let second = pts.expect(|v| dot(&linear, v).powi(2));
    let sigma1_value = second.value.max(0.0).sqrt();
    let sigma1 = Estimate {
        value: sigma1_value,
        std_err: if sigma1_value > 0.0 { second.std_err / (2.0 * sigma1_value) } else { second.std_err.sqrt() },
    };
    let (m_certified, violations) = match opts.m_override {
        Some(m) => (m, 0),
        None => {
            let f = |x: &[f64]| functional.f(x);
            let cert = super::certify_smoothness(&f, &linear, opts.epsilon, opts.certify_points, opts.seed)?;
            (cert.m_hat, cert.violations)
        }
    };
    let m = if opts.m_override.is_some() { m_certified } else { opts.safety * m_certified };
    Ok(SmoothStatisticModel {
        functional,
        observation: observation.clone(),
        norm_l,
        norm_l_exact,
        sigma1,
        epsilon: opts.epsilon,
        m: m.max(f64::MIN_POSITIVE),
        m_certified,
        certification_violations: violations,
        exact_moments: pts.exact,
    })
}

/// Standard deviation of `L(V)` computed directly from the embedded atoms
/// or rule; used by the degeneracy check.
pub(crate) fn sigma1_and_scale(functional: &Functional, obs: &DistributionSpec, opts: &BuildOptions) -> Result<(Estimate, f64, bool)> {
    let pts = EmbeddedPoints::new(functional, obs, opts)?;
    let linear = functional.linear();
    let second = pts.expect(|v| dot(&linear, v).powi(2));
    let v2 = pts.expect(|v| dot(v, v)).value.sqrt();
    let s = second.value.max(0.0).sqrt();
    Ok((Estimate { value: s, std_err: if s > 0.0 { second.std_err / (2.0 * s) } else { second.std_err.sqrt() } }, norm(&linear) * v2, pts.exact))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sym_coords_roundtrip_and_norm() {
        let m = [1.0, 2.0, 3.0, 2.0, 5.0, 6.0, 3.0, 6.0, 9.0];
        let mut c = vec![0.0; 6];
        sym_to_coords(&m, 3, &mut c);
        assert_eq!(coords_to_sym(&c, 3).iter().map(|x| (x * 1e12).round()).collect::<Vec<_>>(), m.iter().map(|x| (x * 1e12).round()).collect::<Vec<_>>());
        let frob: f64 = m.iter().map(|x| x * x).sum();
        assert!((norm(&c).powi(2) - frob).abs() < 1e-12);
    }

    #[test]
    fn hotelling_linear_part_matches_definition() {
        let mu = vec![0.6, -0.8, 0.3];
        let f = Functional::Builtin(StatisticKind::Hotelling { mu: mu.clone() });
        let lin = f.linear();
        // L(x) = 2 x1ᵀμ - μᵀ x2 μ on a random point
        let x1 = [0.1, -0.2, 0.05];
        let x2 = [0.3, 0.1, -0.2, 0.1, 0.4, 0.05, -0.2, 0.05, -0.1];
        let mut coords = x1.to_vec();
        let mut c2 = vec![0.0; 6];
        sym_to_coords(&x2, 3, &mut c2);
        coords.extend(c2);
        let mut quad = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                quad += mu[i] * x2[i * 3 + j] * mu[j];
            }
        }
        let direct = 2.0 * dot(&x1, &mu) - quad;
        assert!((dot(&lin, &coords) - direct).abs() < 1e-14);
        let m = norm(&mu);
        assert!((norm(&lin) - m * (4.0 + m * m).sqrt()).abs() < 1e-14);
    }
}
