//! Distribution specifications for observations and summands.
//!
//! A [`DistributionSpec`] is the serializable description; [`Sampler`] is its
//! compiled, validated form used in hot loops.

use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngCore};
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Deserializer, Serialize};

use crate::error::{Error, Result};
use crate::family::{DiscreteLaw, PROB_TOL};
use crate::rng::stream_rng;
use crate::special::{exp_over_t2_tail, gauss_hermite_prob, gauss_laguerre};

/// Draws per random stream in [`sample`].
pub const SAMPLE_BLOCK: usize = 1024;
const SAMPLE_TAG: u64 = 0x5A11_0001;

/// Custom sampler supplied through the library API. Not representable in
/// configuration files.
#[derive(Clone)]
pub struct UserSampler {
    pub name: String,
    pub dim: usize,
    #[allow(clippy::type_complexity)]
    pub draw: Arc<dyn Fn(&mut dyn RngCore, &mut [f64]) + Send + Sync>,
}

impl fmt::Debug for UserSampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("UserSampler").field("name", &self.name).field("dim", &self.dim).finish()
    }
}

impl PartialEq for UserSampler {
    fn eq(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.draw, &other.draw)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum DistributionSpec {
    /// Finitely many atoms in `R^k`, given as parallel arrays.
    DiscreteAtoms {
        #[serde(deserialize_with = "scalar_or_vector_rows")]
        values: Vec<Vec<f64>>,
        probabilities: Vec<f64>,
    },
    /// `N(mean, covariance)`; identity covariance when omitted.
    Gaussian {
        #[serde(deserialize_with = "scalar_or_vector")]
        mean: Vec<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        covariance: Option<Vec<Vec<f64>>>,
    },
    /// `shift + (E - 1)` with `E ~ Exp(1)`: unit variance, mean `shift`.
    StandardizedExponential {
        #[serde(default)]
        shift: f64,
    },
    /// `shift + (B - p)/sqrt(p(1-p))` with `B ~ Bernoulli(p)`. The default
    /// shift `2 sqrt(p(1-p))/(1-2p)` is the one that degenerates Student's T.
    TwoPointBernoulliShift {
        p: f64,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        shift: Option<f64>,
    },
    /// Symmetric, unit variance, density `c |v|^{-p-1} ln^{-2}|v|` outside
    /// `(-v0, v0)` and uniform inside.
    HeavyTailLogcorrected { p: f64 },
    /// Independent one-dimensional marginals stacked into a vector.
    ProductOfMarginals { marginals: Vec<DistributionSpec> },
    #[serde(skip)]
    UserSampler(UserSampler),
}

fn scalar_or_vector<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<f64>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Either {
        Scalar(f64),
        Vector(Vec<f64>),
    }
    Ok(match Either::deserialize(d)? {
        Either::Scalar(x) => vec![x],
        Either::Vector(v) => v,
    })
}

fn scalar_or_vector_rows<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Vec<Vec<f64>>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Either {
        Scalars(Vec<f64>),
        Rows(Vec<Vec<f64>>),
    }
    Ok(match Either::deserialize(d)? {
        Either::Scalars(v) => v.into_iter().map(|x| vec![x]).collect(),
        Either::Rows(r) => r,
    })
}

fn bad<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidDistribution(msg.into()))
}

impl DistributionSpec {
    pub fn atoms_1d(values: Vec<f64>, probabilities: Vec<f64>) -> Self {
        Self::DiscreteAtoms { values: values.into_iter().map(|v| vec![v]).collect(), probabilities }
    }

    pub fn rademacher() -> Self {
        Self::atoms_1d(vec![1.0, -1.0], vec![0.5, 0.5])
    }

    pub fn standard_normal() -> Self {
        Self::Gaussian { mean: vec![0.0], covariance: None }
    }

    pub fn normal(mean: f64, variance: f64) -> Self {
        Self::Gaussian { mean: vec![mean], covariance: Some(vec![vec![variance]]) }
    }

    /// Standardized bivariate normal with correlation `rho`.
    pub fn bivariate_normal(rho: f64) -> Self {
        Self::Gaussian { mean: vec![0.0, 0.0], covariance: Some(vec![vec![1.0, rho], vec![rho, 1.0]]) }
    }

    pub fn user(name: impl Into<String>, dim: usize, draw: impl Fn(&mut dyn RngCore, &mut [f64]) + Send + Sync + 'static) -> Self {
        Self::UserSampler(UserSampler { name: name.into(), dim, draw: Arc::new(draw) })
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Self::DiscreteAtoms { .. } => "discrete-atoms",
            Self::Gaussian { .. } => "gaussian",
            Self::StandardizedExponential { .. } => "standardized-exponential",
            Self::TwoPointBernoulliShift { .. } => "two-point-bernoulli-shift",
            Self::HeavyTailLogcorrected { .. } => "heavy-tail-logcorrected",
            Self::ProductOfMarginals { .. } => "product-of-marginals",
            Self::UserSampler(_) => "user-sampler",
        }
    }

    pub fn dimension(&self) -> usize {
        match self {
            Self::DiscreteAtoms { values, .. } => values.first().map_or(0, Vec::len),
            Self::Gaussian { mean, .. } => mean.len(),
            Self::ProductOfMarginals { marginals } => marginals.iter().map(Self::dimension).sum(),
            Self::UserSampler(u) => u.dim,
            _ => 1,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.sampler().map(|_| ())
    }

    /// Whether `E‖X‖^alpha` is finite.
    pub fn moment_finite(&self, alpha: f64) -> bool {
        match self {
            // The log correction makes the boundary moment `alpha = p` finite.
            Self::HeavyTailLogcorrected { p } => alpha <= *p,
            Self::ProductOfMarginals { marginals } => marginals.iter().all(|m| m.moment_finite(alpha)),
            _ => true,
        }
    }

    /// The finite atom table, for discrete kinds.
    pub fn atoms(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        match self {
            Self::DiscreteAtoms { values, probabilities } => {
                Some(values.iter().cloned().zip(probabilities.iter().copied()).collect())
            }
            Self::TwoPointBernoulliShift { p, shift } => {
                let (hi, lo) = two_point_support(*p, *shift);
                Some(vec![(vec![hi], *p), (vec![lo], 1.0 - p)])
            }
            Self::ProductOfMarginals { marginals } => {
                let tables: Option<Vec<_>> = marginals.iter().map(Self::atoms).collect();
                let mut acc: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
                for table in tables? {
                    acc = acc
                        .iter()
                        .flat_map(|(v, p)| {
                            table.iter().map(move |(w, q)| {
                                let mut x = v.clone();
                                x.extend_from_slice(w);
                                (x, p * q)
                            })
                        })
                        .collect();
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// One-dimensional discrete law, when the spec is a scalar atom table.
    pub fn discrete_law(&self) -> Option<DiscreteLaw> {
        let atoms = self.atoms()?;
        if atoms.first()?.0.len() != 1 {
            return None;
        }
        Some(DiscreteLaw { values: atoms.iter().map(|a| a.0[0]).collect(), probs: atoms.iter().map(|a| a.1).collect() })
    }

    /// Compile into a validated sampler.
    pub fn sampler(&self) -> Result<Sampler> {
        let kind = match self {
            Self::DiscreteAtoms { values, probabilities } => {
                if values.is_empty() || values.len() != probabilities.len() {
                    return bad("discrete atoms need matching, non-empty values and probabilities");
                }
                let k = values[0].len();
                if k == 0 || values.iter().any(|v| v.len() != k) {
                    return bad("all atoms must share one positive dimension");
                }
                if values.iter().flatten().chain(probabilities).any(|x| !x.is_finite()) {
                    return bad("atoms must be finite");
                }
                if probabilities.iter().any(|&p| p < 0.0) {
                    return bad("atom probabilities must be nonnegative");
                }
                let total: f64 = probabilities.iter().sum();
                if (total - 1.0).abs() > PROB_TOL {
                    return bad(format!("atom probabilities sum to {total}, not 1"));
                }
                let mut cumulative = Vec::with_capacity(probabilities.len());
                let mut acc = 0.0;
                for p in probabilities {
                    acc += p;
                    cumulative.push(acc);
                }
                SamplerKind::Atoms { values: values.concat(), dim: k, cumulative }
            }
            Self::Gaussian { mean, covariance } => {
                let k = mean.len();
                if k == 0 || mean.iter().any(|m| !m.is_finite()) {
                    return bad("gaussian mean must be a finite, non-empty vector");
                }
                let chol = match covariance {
                    None => identity_lower(k),
                    Some(cov) => cholesky_lower(cov, k)?,
                };
                SamplerKind::Gaussian { mean: mean.clone(), chol }
            }
            Self::StandardizedExponential { shift } => {
                if !shift.is_finite() {
                    return bad("shift must be finite");
                }
                SamplerKind::Exponential { shift: *shift }
            }
            Self::TwoPointBernoulliShift { p, shift } => {
                if !(*p > 0.0 && *p < 1.0) {
                    return bad("two-point p must lie in (0, 1)");
                }
                if shift.is_none() && (*p - 0.5).abs() < 1e-15 {
                    return bad("default shift is undefined at p = 1/2; give an explicit shift");
                }
                let (hi, lo) = two_point_support(*p, *shift);
                SamplerKind::TwoPoint { hi, lo, p: *p }
            }
            Self::HeavyTailLogcorrected { p } => SamplerKind::HeavyTail(HeavyTailLaw::new(*p)?),
            Self::ProductOfMarginals { marginals } => {
                if marginals.is_empty() {
                    return bad("product needs at least one marginal");
                }
                let parts = marginals.iter().map(Self::sampler).collect::<Result<Vec<_>>>()?;
                SamplerKind::Product(parts)
            }
            Self::UserSampler(u) => {
                if u.dim == 0 {
                    return bad("user sampler dimension must be positive");
                }
                SamplerKind::User(u.clone())
            }
        };
        Ok(Sampler { dim: self.dimension(), kind })
    }

    /// Deterministic weighted point set reproducing expectations of smooth
    /// functions: exact for atoms, Gauss rules for low-dimensional Gaussian
    /// and exponential kinds. `None` when only Monte Carlo applies.
    pub fn integration_rule(&self) -> Option<Vec<(Vec<f64>, f64)>> {
        match self {
            Self::DiscreteAtoms { .. } | Self::TwoPointBernoulliShift { .. } => self.atoms(),
            Self::Gaussian { mean, covariance } => {
                let k = mean.len();
                let nodes = match k {
                    1 => 80,
                    2 => 48,
                    3 => 20,
                    _ => return None,
                };
                let chol = match covariance {
                    None => identity_lower(k),
                    Some(c) => cholesky_lower(c, k).ok()?,
                };
                let rule = gauss_hermite_prob(nodes);
                let mut out = Vec::with_capacity(nodes.pow(k as u32));
                let mut idx = vec![0usize; k];
                loop {
                    let z: Vec<f64> = idx.iter().map(|&j| rule[j].0).collect();
                    let w: f64 = idx.iter().map(|&j| rule[j].1).product();
                    let x: Vec<f64> = (0..k).map(|r| mean[r] + (0..=r).map(|c| chol[r * k + c] * z[c]).sum::<f64>()).collect();
                    out.push((x, w));
                    let mut pos = 0;
                    loop {
                        if pos == k {
                            return Some(out);
                        }
                        idx[pos] += 1;
                        if idx[pos] < nodes {
                            break;
                        }
                        idx[pos] = 0;
                        pos += 1;
                    }
                }
            }
            Self::StandardizedExponential { shift } => {
                Some(gauss_laguerre(96).into_iter().map(|(x, w)| (vec![shift + x - 1.0], w)).collect())
            }
            Self::ProductOfMarginals { marginals } => {
                let rules: Option<Vec<_>> = marginals.iter().map(Self::integration_rule).collect();
                let rules = rules?;
                let size = rules.iter().fold(1usize, |a, r| a.saturating_mul(r.len()));
                if size > 200_000 {
                    return None;
                }
                let mut acc: Vec<(Vec<f64>, f64)> = vec![(Vec::new(), 1.0)];
                for rule in rules {
                    acc = acc
                        .iter()
                        .flat_map(|(v, p)| {
                            rule.iter().map(move |(w, q)| {
                                let mut x = v.clone();
                                x.extend_from_slice(w);
                                (x, p * q)
                            })
                        })
                        .collect();
                }
                Some(acc)
            }
            _ => None,
        }
    }

    /// `E g(X)` with the requested mode. Exact mode fails for kinds without
    /// a deterministic rule.
    pub fn expect(&self, g: &(dyn Fn(&[f64]) -> f64 + Sync), mode: ExpectationMode) -> Result<Estimate> {
        match mode {
            ExpectationMode::Exact => {
                let rule = self.integration_rule().ok_or_else(|| {
                    Error::InvalidDistribution(format!("no exact integration path for {}", self.kind_name()))
                })?;
                let terms: Vec<f64> = rule.iter().map(|(x, w)| w * g(x)).collect();
                Ok(Estimate { value: crate::special::pairwise_sum(&terms), std_err: 0.0 })
            }
            ExpectationMode::MonteCarlo { draws, seed } => {
                let sample = sample(self, draws, seed)?;
                let vals: Vec<f64> = sample.rows().map(g).collect();
                Ok(Estimate::from_values(&vals))
            }
        }
    }
}

/// Support `(value with mass p, value with mass 1 - p)` of the two-point kind.
pub fn two_point_support(p: f64, shift: Option<f64>) -> (f64, f64) {
    let s = (p * (1.0 - p)).sqrt();
    let shift = shift.unwrap_or(2.0 * s / (1.0 - 2.0 * p));
    (shift + (1.0 - p) / s, shift - p / s)
}

fn identity_lower(k: usize) -> Vec<f64> {
    let mut l = vec![0.0; k * k];
    for i in 0..k {
        l[i * k + i] = 1.0;
    }
    l
}

fn cholesky_lower(cov: &[Vec<f64>], k: usize) -> Result<Vec<f64>> {
    if cov.len() != k || cov.iter().any(|r| r.len() != k) {
        return bad("covariance must be k x k");
    }
    for i in 0..k {
        for j in 0..k {
            if !cov[i][j].is_finite() || (cov[i][j] - cov[j][i]).abs() > 1e-12 * (1.0 + cov[i][j].abs()) {
                return bad("covariance must be finite and symmetric");
            }
        }
    }
    let m = DMatrix::from_fn(k, k, |i, j| cov[i][j]);
    let chol = m.cholesky().ok_or_else(|| Error::InvalidDistribution("covariance must be positive definite".into()))?;
    let l = chol.l();
    Ok((0..k).flat_map(|i| (0..k).map(move |j| (i, j))).map(|(i, j)| l[(i, j)]).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ExpectationMode {
    Exact,
    MonteCarlo { draws: usize, seed: u64 },
}

/// Value with a standard error (zero for exact computations).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub value: f64,
    pub std_err: f64,
}

impl Estimate {
    pub fn exact(value: f64) -> Self {
        Self { value, std_err: 0.0 }
    }

    pub fn from_values(vals: &[f64]) -> Self {
        let n = vals.len() as f64;
        let mean = crate::special::pairwise_sum(vals) / n;
        let var = vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        Self { value: mean, std_err: (var / n).sqrt() }
    }
}

/// Row-major matrix of draws.
#[derive(Debug, Clone, PartialEq)]
pub struct SampleMatrix {
    pub dim: usize,
    pub data: Vec<f64>,
}

impl SampleMatrix {
    pub fn len(&self) -> usize {
        self.data.len() / self.dim
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn rows(&self) -> std::slice::ChunksExact<'_, f64> {
        self.data.chunks_exact(self.dim)
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }
}

/// Draw `n` i.i.d. observations. Draw `i` comes from the stream
/// `(seed, i / SAMPLE_BLOCK)`, so the result is a pure function of the
/// arguments.
pub fn sample(spec: &DistributionSpec, n: usize, seed: u64) -> Result<SampleMatrix> {
    if n == 0 {
        return Err(Error::InvalidInput("sample size must be at least 1".into()));
    }
    let sampler = spec.sampler()?;
    let dim = sampler.dim();
    let mut data = vec![0.0; n * dim];
    for (block, chunk) in data.chunks_mut(SAMPLE_BLOCK * dim).enumerate() {
        let mut rng = stream_rng(seed, SAMPLE_TAG, block as u64);
        for row in chunk.chunks_exact_mut(dim) {
            sampler.draw(&mut rng, row);
        }
    }
    Ok(SampleMatrix { dim, data })
}

#[derive(Debug, Clone)]
pub struct Sampler {
    dim: usize,
    kind: SamplerKind,
}

#[derive(Debug, Clone)]
enum SamplerKind {
    Atoms { values: Vec<f64>, dim: usize, cumulative: Vec<f64> },
    Gaussian { mean: Vec<f64>, chol: Vec<f64> },
    Exponential { shift: f64 },
    TwoPoint { hi: f64, lo: f64, p: f64 },
    HeavyTail(HeavyTailLaw),
    Product(Vec<Sampler>),
    User(UserSampler),
}

impl Sampler {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn heavy_tail(&self) -> Option<&HeavyTailLaw> {
        match &self.kind {
            SamplerKind::HeavyTail(h) => Some(h),
            _ => None,
        }
    }

    /// Fill `out` (length `dim`) with one draw.
    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        match &self.kind {
            SamplerKind::Atoms { values, dim, cumulative } => {
                let u: f64 = rng.random();
                let i = cumulative.partition_point(|&c| c <= u).min(cumulative.len() - 1);
                out.copy_from_slice(&values[i * dim..(i + 1) * dim]);
            }
            SamplerKind::Gaussian { mean, chol } => {
                let k = mean.len();
                if k == 1 {
                    let z: f64 = StandardNormal.sample(rng);
                    out[0] = mean[0] + chol[0] * z;
                    return;
                }
                let mut z = [0.0f64; 16];
                let z: &mut [f64] = if k <= 16 { &mut z[..k] } else { return self.draw_gaussian_large(rng, out) };
                for zi in z.iter_mut() {
                    *zi = StandardNormal.sample(rng);
                }
                for r in 0..k {
                    out[r] = mean[r] + (0..=r).map(|c| chol[r * k + c] * z[c]).sum::<f64>();
                }
            }
            SamplerKind::Exponential { shift } => {
                let e: f64 = Exp1.sample(rng);
                out[0] = shift + e - 1.0;
            }
            SamplerKind::TwoPoint { hi, lo, p } => {
                let u: f64 = rng.random();
                out[0] = if u < *p { *hi } else { *lo };
            }
            SamplerKind::HeavyTail(h) => out[0] = h.draw(rng),
            SamplerKind::Product(parts) => {
                let mut at = 0;
                for part in parts {
                    part.draw(rng, &mut out[at..at + part.dim]);
                    at += part.dim;
                }
            }
            SamplerKind::User(u) => {
                let mut dyn_rng = DynRng(rng);
                (u.draw)(&mut dyn_rng, out);
            }
        }
    }

    fn draw_gaussian_large<R: Rng + ?Sized>(&self, rng: &mut R, out: &mut [f64]) {
        if let SamplerKind::Gaussian { mean, chol } = &self.kind {
            let k = mean.len();
            let z: Vec<f64> = (0..k).map(|_| StandardNormal.sample(rng)).collect();
            let zv = DVector::from_vec(z);
            for r in 0..k {
                out[r] = mean[r] + (0..=r).map(|c| chol[r * k + c] * zv[c]).sum::<f64>();
            }
        }
    }
}

struct DynRng<'a, R: Rng + ?Sized>(&'a mut R);

impl<R: Rng + ?Sized> RngCore for DynRng<'_, R> {
    fn next_u32(&mut self) -> u32 {
        self.0.next_u32()
    }
    fn next_u64(&mut self) -> u64 {
        self.0.next_u64()
    }
    fn fill_bytes(&mut self, dst: &mut [u8]) {
        self.0.fill_bytes(dst)
    }
}

/// Solved parameters of the symmetric log-corrected heavy-tailed law.
///
/// Outside `(-v0, v0)` the density is `c |v|^{-p-1} ln^{-2}|v|`; inside it is
/// the constant `h = c v0^{-p-1} ln^{-2} v0`, so the density is continuous.
/// `v0` and `c` are fixed by unit mass and unit variance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HeavyTailLaw {
    pub p: f64,
    pub v0: f64,
    pub tail_constant: f64,
    pub inner_height: f64,
}

impl HeavyTailLaw {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 2.0) || !p.is_finite() {
            return bad(format!("heavy-tail p must exceed 2 (got {p})"));
        }
        let variance_at = |v0: f64| Self::with_v0(p, v0).second_moment();
        let (mut lo, mut hi) = (1.0 + 1e-9, 2.0);
        while variance_at(hi) < 1.0 {
            hi *= 2.0;
            if hi > 1e6 {
                return bad("could not bracket v0 for unit variance");
            }
        }
        if variance_at(lo) >= 1.0 {
            return bad("unit variance not reachable with v0 > 1");
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if variance_at(mid) < 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
            if hi - lo < 1e-15 * hi {
                break;
            }
        }
        Ok(Self::with_v0(p, 0.5 * (lo + hi)))
    }

    fn with_v0(p: f64, v0: f64) -> Self {
        let a = v0.ln();
        let density_shape = v0.powf(-p - 1.0) / (a * a);
        let outer = 2.0 * exp_over_t2_tail(p, a);
        let tail_constant = 1.0 / (2.0 * v0 * density_shape + outer);
        Self { p, v0, tail_constant, inner_height: tail_constant * density_shape }
    }

    /// Unnormalized outer survival `∫_v^∞ u^{-p-1} ln^{-2}u du`, `v ≥ v0`.
    fn outer_integral(&self, v: f64) -> f64 {
        exp_over_t2_tail(self.p, v.ln())
    }

    pub fn inner_mass(&self) -> f64 {
        2.0 * self.v0 * self.inner_height
    }

    pub fn outer_mass(&self) -> f64 {
        2.0 * self.tail_constant * self.outer_integral(self.v0)
    }

    /// `P(V > v)` for `v ≥ 0`.
    pub fn survival(&self, v: f64) -> f64 {
        if v >= self.v0 {
            self.tail_constant * self.outer_integral(v)
        } else {
            self.inner_height * (self.v0 - v.max(0.0)) + 0.5 * self.outer_mass()
        }
    }

    /// `P(|V| > v)` for `v ≥ 0`.
    pub fn abs_survival(&self, v: f64) -> f64 {
        (2.0 * self.survival(v)).min(1.0)
    }

    /// Density at `v`.
    pub fn density(&self, v: f64) -> f64 {
        let a = v.abs();
        if a < self.v0 {
            self.inner_height
        } else {
            let l = a.ln();
            self.tail_constant * a.powf(-self.p - 1.0) / (l * l)
        }
    }

    /// `E|V|^alpha`; `None` when infinite (`alpha > p`).
    pub fn abs_moment(&self, alpha: f64) -> Option<f64> {
        if alpha > self.p {
            return None;
        }
        let inner = 2.0 * self.inner_height * self.v0.powf(alpha + 1.0) / (alpha + 1.0);
        let outer = 2.0 * self.tail_constant * exp_over_t2_tail(self.p - alpha, self.v0.ln());
        Some(inner + outer)
    }

    pub fn second_moment(&self) -> f64 {
        self.abs_moment(2.0).unwrap_or(f64::INFINITY)
    }

    /// Solve `P(|V| > v | |V| ≥ v0) = u` for `v` by safeguarded Newton
    /// iteration in `t = ln v`.
    pub fn outer_quantile(&self, u: f64) -> f64 {
        let a = self.v0.ln();
        let total = self.outer_integral(self.v0);
        let target = (u * total).ln();
        let log_g = |t: f64| exp_over_t2_tail(self.p, t).ln();
        let (mut lo, mut hi) = (a, f64::INFINITY);
        let mut t = a + (-u.ln()) / self.p;
        for _ in 0..100 {
            let g = log_g(t);
            let resid = g - target;
            if resid > 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            // d/dt ln G(t) = -e^{-pt} t^{-2} / G(t)
            let slope = -(-self.p * t - 2.0 * t.ln() - g).exp();
            let mut next = t - resid / slope;
            if !next.is_finite() || next <= lo || next >= hi {
                next = if hi.is_finite() { 0.5 * (lo + hi) } else { 2.0 * t - a + 1.0 };
            }
            if (next - t).abs() <= 1e-14 * t.abs().max(1.0) {
                t = next;
                break;
            }
            t = next;
        }
        t.exp()
    }

    #[inline]
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        let u: f64 = rng.random();
        if u < self.inner_mass() {
            // Reuse the uniform: conditionally uniform on [0, inner_mass).
            return self.v0 * (2.0 * u / self.inner_mass() - 1.0);
        }
        let w: f64 = 1.0 - rng.random::<f64>();
        let magnitude = self.outer_quantile(w);
        if rng.random::<bool>() {
            magnitude
        } else {
            -magnitude
        }
    }
}

/// `E|Z|^alpha` for `Z ~ N(0, 1)`.
pub fn gaussian_abs_moment(alpha: f64) -> f64 {
    (0.5 * alpha * std::f64::consts::LN_2 + libm::lgamma(0.5 * (alpha + 1.0)) - 0.5 * std::f64::consts::PI.ln()).exp()
}

/// `E|E - 1 + shift|^alpha` for `E ~ Exp(1)` and `shift = 0`.
pub fn centered_exponential_abs_moment(alpha: f64) -> f64 {
    // ∫_0^1 (1-x)^α e^{-x} dx = e^{-1} Σ_k 1/(k! (α+k+1)), plus e^{-1} Γ(α+1).
    let mut series = 0.0;
    let mut fact = 1.0;
    for k in 0..60 {
        if k > 0 {
            fact *= k as f64;
        }
        series += 1.0 / (fact * (alpha + k as f64 + 1.0));
    }
    (-1.0f64).exp() * (series + libm::lgamma(alpha + 1.0).exp())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rademacher_sample_stays_on_support() {
        let s = sample(&DistributionSpec::rademacher(), 4, 7).unwrap();
        assert_eq!(s.len(), 4);
        assert!(s.data.iter().all(|&v| v == 1.0 || v == -1.0));
    }

    #[test]
    fn sampling_is_deterministic() {
        let spec = DistributionSpec::StandardizedExponential { shift: 1.0 };
        assert_eq!(sample(&spec, 3000, 11).unwrap(), sample(&spec, 3000, 11).unwrap());
        assert_ne!(sample(&spec, 3000, 11).unwrap(), sample(&spec, 3000, 12).unwrap());
    }

    #[test]
    fn heavy_tail_rejects_small_p() {
        assert!(DistributionSpec::HeavyTailLogcorrected { p: 2.0 }.validate().is_err());
        assert!(DistributionSpec::HeavyTailLogcorrected { p: 1.5 }.validate().is_err());
    }

    #[test]
    fn heavy_tail_is_normalized_with_unit_variance() {
        for &p in &[2.2, 2.5, 3.0, 3.5] {
            let h = HeavyTailLaw::new(p).unwrap();
            assert!(h.v0 > 1.0);
            assert!((h.inner_mass() + h.outer_mass() - 1.0).abs() < 1e-12);
            assert!((h.second_moment() - 1.0).abs() < 1e-12);
            assert!(h.abs_moment(p).is_some());
            assert!(h.abs_moment(p + 0.01).is_none());
        }
    }

    #[test]
    fn heavy_tail_quantile_inverts_survival() {
        let h = HeavyTailLaw::new(2.5).unwrap();
        for &u in &[0.9, 0.5, 1e-3, 1e-9, 1e-15] {
            let v = h.outer_quantile(u);
            let back = h.survival(v) / h.survival(h.v0);
            assert!((back / u - 1.0).abs() < 1e-10, "u={u}: {back}");
        }
    }

    #[test]
    fn closed_form_moments() {
        assert!((gaussian_abs_moment(2.0) - 1.0).abs() < 1e-14);
        assert!((gaussian_abs_moment(3.0) - 2.0 * (2.0 / std::f64::consts::PI).sqrt()).abs() < 1e-13);
        assert!((centered_exponential_abs_moment(2.0) - 1.0).abs() < 1e-13);
        // E|E-1|^1 = 2/e
        assert!((centered_exponential_abs_moment(1.0) - 2.0 / std::f64::consts::E).abs() < 1e-13);
    }

    #[test]
    fn default_two_point_shift_is_centered_at_its_mean() {
        let spec = DistributionSpec::TwoPointBernoulliShift { p: 0.3, shift: None };
        let atoms = spec.atoms().unwrap();
        let mean: f64 = atoms.iter().map(|(v, p)| v[0] * p).sum();
        let var: f64 = atoms.iter().map(|(v, p)| (v[0] - mean).powi(2) * p).sum();
        assert!((mean - 2.0 * 0.21f64.sqrt() / 0.4).abs() < 1e-12);
        assert!((var - 1.0).abs() < 1e-12);
    }

    #[test]
    fn gaussian_rule_reproduces_covariance() {
        let spec = DistributionSpec::bivariate_normal(0.4);
        let exy = spec.expect(&|x| x[0] * x[1], ExpectationMode::Exact).unwrap();
        assert!((exy.value - 0.4).abs() < 1e-12);
        let ex2y2 = spec.expect(&|x| (x[0] * x[1]).powi(2), ExpectationMode::Exact).unwrap();
        assert!((ex2y2.value - (1.0 + 2.0 * 0.16)).abs() < 1e-10);
    }
}
