//! Moment profiles: the scalar summaries `s_α`, `‖V‖_α` and the tail sum
//! `G(z) = Σ_i P(‖X_i‖ > z)` that every bound formula consumes.

use std::fmt;
use std::sync::Arc;

use serde::Serialize;

use crate::dist::{
    centered_exponential_abs_moment, gaussian_abs_moment, sample, DistributionSpec, ExpectationMode, HeavyTailLaw,
};
use crate::error::{Error, Result};
use crate::family::DiscreteLaw;

/// A moment that may be infinite. Infinite moments are never numbers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Moment {
    Finite { value: f64, std_err: f64 },
    Infinite,
}

impl Moment {
    pub fn exact(value: f64) -> Self {
        Moment::Finite { value, std_err: 0.0 }
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, Moment::Finite { .. })
    }

    pub fn value(&self, alpha: f64) -> Result<f64> {
        match self {
            Moment::Finite { value, .. } => Ok(*value),
            Moment::Infinite => Err(Error::InfiniteMoment { alpha }),
        }
    }

    fn map(self, f: impl Fn(f64) -> f64) -> Self {
        match self {
            Moment::Finite { value, std_err } => Moment::Finite { value: f(value), std_err: f(std_err).abs() },
            Moment::Infinite => Moment::Infinite,
        }
    }
}

/// Law of a nonnegative norm `‖Y‖`, only through its survival function.
#[derive(Clone)]
pub enum NormLaw {
    /// Weighted atoms (exact tables, quadrature nodes or an empirical sample).
    Weighted { sorted: Arc<Vec<f64>>, upper_mass: Arc<Vec<f64>> },
    /// `|Z|` with `Z ~ N(0, sd²)`.
    HalfNormal { sd: f64 },
    /// `|shift + E - 1|` with `E ~ Exp(1)`.
    AbsShiftedExponential { shift: f64 },
    /// `|V|` for the log-corrected heavy-tailed law.
    AbsHeavyTail(HeavyTailLaw),
    /// Arbitrary survival function.
    Custom(Arc<dyn Fn(f64) -> f64 + Send + Sync>),
}

impl fmt::Debug for NormLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NormLaw::Weighted { sorted, .. } => write!(f, "Weighted({} atoms)", sorted.len()),
            NormLaw::HalfNormal { sd } => write!(f, "HalfNormal({sd})"),
            NormLaw::AbsShiftedExponential { shift } => write!(f, "AbsShiftedExponential({shift})"),
            NormLaw::AbsHeavyTail(h) => write!(f, "AbsHeavyTail(p={})", h.p),
            NormLaw::Custom(_) => write!(f, "Custom"),
        }
    }
}

impl NormLaw {
    /// From (norm, weight) pairs; weights need not be sorted.
    pub fn weighted(mut atoms: Vec<(f64, f64)>) -> Self {
        atoms.sort_by(|a, b| a.0.total_cmp(&b.0));
        let sorted: Vec<f64> = atoms.iter().map(|a| a.0).collect();
        let mut upper_mass = vec![0.0; atoms.len() + 1];
        for i in (0..atoms.len()).rev() {
            upper_mass[i] = upper_mass[i + 1] + atoms[i].1;
        }
        NormLaw::Weighted { sorted: Arc::new(sorted), upper_mass: Arc::new(upper_mass) }
    }

    pub fn empirical(norms: Vec<f64>) -> Self {
        let w = 1.0 / norms.len() as f64;
        Self::weighted(norms.into_iter().map(|v| (v, w)).collect())
    }

    pub fn from_discrete(law: &DiscreteLaw) -> Self {
        Self::weighted(law.atoms().map(|(v, p)| (v.abs(), p)).collect())
    }

    /// `P(‖Y‖ > t)`.
    pub fn survival(&self, t: f64) -> f64 {
        match self {
            NormLaw::Weighted { sorted, upper_mass } => {
                let i = sorted.partition_point(|&v| v <= t);
                upper_mass[i].clamp(0.0, 1.0)
            }
            NormLaw::HalfNormal { sd } => {
                if *sd == 0.0 {
                    return if t < 0.0 { 1.0 } else { 0.0 };
                }
                2.0 * crate::special::normal_cdf(-t / sd)
            }
            NormLaw::AbsShiftedExponential { shift } => {
                if t < 0.0 {
                    return 1.0;
                }
                // |X| > t  ⇔  E > 1 - shift + t  or  E < 1 - shift - t
                let upper = (-(1.0 - shift + t).max(0.0)).exp();
                let lo = 1.0 - shift - t;
                let lower = if lo > 0.0 { 1.0 - (-lo).exp() } else { 0.0 };
                (upper + lower).min(1.0)
            }
            NormLaw::AbsHeavyTail(h) => {
                if t < 0.0 {
                    1.0
                } else {
                    h.abs_survival(t)
                }
            }
            NormLaw::Custom(f) => f(t),
        }
    }
}

/// `count` summands distributed as `scale · Y` with `‖Y‖ ~ law`.
#[derive(Debug, Clone)]
pub struct SummandGroup {
    pub count: usize,
    pub scale: f64,
    pub law: NormLaw,
}

/// `G(z) = Σ_i P(‖X_i‖ > z)` over groups of identically distributed summands.
#[derive(Debug, Clone, Default)]
pub struct TailSum {
    pub groups: Vec<SummandGroup>,
}

impl TailSum {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn iid(n: usize, scale: f64, law: NormLaw) -> Self {
        Self { groups: vec![SummandGroup { count: n, scale, law }] }
    }

    pub fn eval(&self, z: f64) -> f64 {
        self.groups
            .iter()
            .map(|g| if g.scale == 0.0 { 0.0 } else { g.count as f64 * g.law.survival(z / g.scale) })
            .sum()
    }

    /// Same tail for the rescaled summands `c · X_i`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            groups: self
                .groups
                .iter()
                .map(|g| SummandGroup { count: g.count, scale: g.scale * c, law: g.law.clone() })
                .collect(),
        }
    }
}

/// Scalar summary of a summand family.
///
/// `s_alpha` holds `(Σ_i E‖X_i‖^α)^{1/α}`; in i.i.d. mode (`X_i = V_i / n`)
/// `norm_v_alpha` holds `‖V‖_α` and `n` is set.
#[derive(Debug, Clone)]
pub struct MomentProfile {
    pub n: Option<usize>,
    pub s_alpha: Vec<(f64, Moment)>,
    pub norm_v_alpha: Vec<(f64, Moment)>,
    pub tail: TailSum,
}

fn lookup(table: &[(f64, Moment)], alpha: f64) -> Option<Moment> {
    table.iter().find(|(a, _)| (a - alpha).abs() <= 1e-12 * alpha.abs().max(1.0)).map(|(_, m)| *m)
}

impl MomentProfile {
    /// General (non-i.i.d.) profile from explicit `s_α` values and a tail.
    pub fn from_sums(s_alpha: Vec<(f64, Moment)>, tail: TailSum) -> Self {
        Self { n: None, s_alpha, norm_v_alpha: Vec::new(), tail }
    }

    /// i.i.d. profile from `‖V‖_α` values: `s_α = ‖V‖_α / n^{1-1/α}`.
    pub fn iid(norm_v_alpha: Vec<(f64, Moment)>, n: usize, law: NormLaw) -> Self {
        let nf = n as f64;
        let s_alpha = norm_v_alpha.iter().map(|&(a, m)| (a, m.map(|v| v / nf.powf(1.0 - 1.0 / a)))).collect();
        Self { n: Some(n), s_alpha, norm_v_alpha, tail: TailSum::iid(n, 1.0 / nf, law) }
    }

    /// Exact profile of a finite independent family of scalar summands.
    pub fn from_family(family: &crate::family::DiscreteFamily, alphas: &[f64]) -> Self {
        let s_alpha = alphas
            .iter()
            .map(|&a| {
                let total: f64 = family.components.iter().map(|c| c.abs_moment(a)).sum();
                (a, Moment::exact(total.powf(1.0 / a)))
            })
            .collect();
        let groups = family
            .components
            .iter()
            .map(|c| SummandGroup { count: 1, scale: 1.0, law: NormLaw::from_discrete(c) })
            .collect();
        Self::from_sums(s_alpha, TailSum { groups })
    }

    /// `s_α`, failing with an explicit flag when infinite or untracked.
    pub fn s(&self, alpha: f64) -> Result<f64> {
        lookup(&self.s_alpha, alpha).ok_or(Error::MissingMoment { alpha })?.value(alpha)
    }

    pub fn s_moment(&self, alpha: f64) -> Option<Moment> {
        lookup(&self.s_alpha, alpha)
    }

    /// `‖V‖_α` (i.i.d. mode only).
    pub fn norm_v(&self, alpha: f64) -> Result<f64> {
        lookup(&self.norm_v_alpha, alpha).ok_or(Error::MissingMoment { alpha })?.value(alpha)
    }

    pub fn norm_v_moment(&self, alpha: f64) -> Option<Moment> {
        lookup(&self.norm_v_alpha, alpha)
    }

    pub fn tail_sum(&self, z: f64) -> Result<f64> {
        tail_sum(self, z)
    }

    /// Profile of the rescaled family `c · X_i`.
    pub fn scaled(&self, c: f64) -> Self {
        Self {
            n: self.n,
            s_alpha: self.s_alpha.iter().map(|&(a, m)| (a, m.map(|v| v * c))).collect(),
            norm_v_alpha: self.norm_v_alpha.iter().map(|&(a, m)| (a, m.map(|v| v * c))).collect(),
            tail: self.tail.scaled(c),
        }
    }
}

/// `G(z) = Σ_i P(‖X_i‖ > z)`.
pub fn tail_sum(profile: &MomentProfile, z: f64) -> Result<f64> {
    if !(z >= 0.0) {
        return Err(Error::InvalidInput(format!("tail argument must be nonnegative (got {z})")));
    }
    Ok(profile.tail.eval(z))
}

/// Draws used for Monte Carlo moments unless overridden.
pub const DEFAULT_MC_DRAWS: usize = 400_000;

/// Moment profile of `V ~ spec` in i.i.d. mode with `n` summands `V_i / n`.
///
/// Exact mode uses atom tables, closed forms or Gauss rules and fails for
/// kinds without one; Monte Carlo mode reports standard errors.
pub fn moment_profile(spec: &DistributionSpec, alphas: &[f64], n: usize, mode: ExpectationMode) -> Result<MomentProfile> {
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    if let Some(&a) = alphas.iter().find(|&&a| !(a >= 1.0)) {
        return Err(Error::InvalidInput(format!("moment exponents must be at least 1 (got {a})")));
    }
    spec.validate()?;
    let norm = |x: &[f64]| x.iter().map(|v| v * v).sum::<f64>().sqrt();

    let closed = closed_form(spec);
    let mut table = Vec::with_capacity(alphas.len());
    let law;
    match (mode, closed) {
        (_, Some((moment_fn, closed_law))) => {
            for &a in alphas {
                table.push((a, moment_fn(a).map_or(Moment::Infinite, |m| Moment::exact(m.powf(1.0 / a)))));
            }
            law = closed_law;
        }
        (ExpectationMode::Exact, None) => {
            let rule = spec.integration_rule().ok_or_else(|| {
                Error::InvalidDistribution(format!("no exact moment path for {}", spec.kind_name()))
            })?;
            for &a in alphas {
                let m = if spec.moment_finite(a) {
                    let terms: Vec<f64> = rule.iter().map(|(x, w)| w * norm(x).powf(a)).collect();
                    Moment::exact(crate::special::pairwise_sum(&terms).powf(1.0 / a))
                } else {
                    Moment::Infinite
                };
                table.push((a, m));
            }
            law = NormLaw::weighted(rule.iter().map(|(x, w)| (norm(x), *w)).collect());
        }
        (ExpectationMode::MonteCarlo { draws, seed }, None) => {
            let s = sample(spec, draws, seed)?;
            let norms: Vec<f64> = s.rows().map(norm).collect();
            for &a in alphas {
                let m = if spec.moment_finite(a) {
                    let pw: Vec<f64> = norms.iter().map(|v| v.powf(a)).collect();
                    let est = crate::dist::Estimate::from_values(&pw);
                    let value = est.value.powf(1.0 / a);
                    // delta method for the 1/α power
                    let std_err = value / (a * est.value) * est.std_err;
                    Moment::Finite { value, std_err }
                } else {
                    Moment::Infinite
                };
                table.push((a, m));
            }
            law = NormLaw::empirical(norms);
        }
    }
    Ok(MomentProfile::iid(table, n, law))
}

type MomentFn = Box<dyn Fn(f64) -> Option<f64>>;

/// Closed-form `E‖V‖^α` and norm law for scalar kinds.
fn closed_form(spec: &DistributionSpec) -> Option<(MomentFn, NormLaw)> {
    match spec {
        DistributionSpec::DiscreteAtoms { .. } | DistributionSpec::TwoPointBernoulliShift { .. } => {
            let atoms = spec.atoms()?;
            let norms: Vec<(f64, f64)> =
                atoms.iter().map(|(x, p)| (x.iter().map(|v| v * v).sum::<f64>().sqrt(), *p)).collect();
            let table = norms.clone();
            Some((Box::new(move |a| Some(table.iter().map(|(v, p)| p * v.powf(a)).sum())), NormLaw::weighted(norms)))
        }
        DistributionSpec::Gaussian { mean, covariance } if mean.len() == 1 && mean[0] == 0.0 => {
            let var = covariance.as_ref().map_or(1.0, |c| c[0][0]);
            let sd = var.sqrt();
            Some((Box::new(move |a| Some(sd.powf(a) * gaussian_abs_moment(a))), NormLaw::HalfNormal { sd }))
        }
        DistributionSpec::StandardizedExponential { shift } if *shift == 0.0 => Some((
            Box::new(|a| Some(centered_exponential_abs_moment(a))),
            NormLaw::AbsShiftedExponential { shift: 0.0 },
        )),
        DistributionSpec::HeavyTailLogcorrected { p } => {
            let h = HeavyTailLaw::new(*p).ok()?;
            Some((Box::new(move |a| h.abs_moment(a)), NormLaw::AbsHeavyTail(h)))
        }
        _ => None,
    }
}
