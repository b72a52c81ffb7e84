//! Explicit bound expressions for `f(S)`, evaluated term by term.
//!
//! All bounds hold up to a factor depending only on `p`; reports carry the
//! total "modulo constant" and never invent one.

use crate::error::{invalid, Error, Result};
use crate::family::{DiscreteFamily, DiscreteLaw, PairLaw};
use crate::moments::MomentProfile;
use crate::report::BoundReport;

/// Classical Berry–Esseen constant used when none is supplied.
pub const DEFAULT_BE_CONSTANT: f64 = 0.56;

/// Bisection tolerance for the linearization scale.
pub const DELTA_TOL: f64 = 1e-10;

/// Scalars of a standardized linear statistic `W = Σ ξ_i`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearizationScalars {
    /// Smallest `δ` with `Σ E|ξ_i|(δ ∧ |ξ_i|) ≥ 1/2`.
    pub delta: f64,
    /// `Σ E(ξ_i² ∧ |ξ_i|³)`.
    pub beta: f64,
    /// `(Σ E|ξ_i|^p)^{1/p}`.
    pub sigma_p: f64,
    pub p: f64,
}

/// Exact scalars for an independent family of discrete summands `ξ_i`.
///
/// The family must be centered with unit total variance (within `1e-8`).
pub fn linearization_scalars(family: &DiscreteFamily, p: f64) -> Result<LinearizationScalars> {
    let groups: Vec<(usize, &DiscreteLaw)> = family.components.iter().map(|c| (1, c)).collect();
    scalars_for_groups(&groups, p)
}

/// Scalars for `n` i.i.d. copies of `law` (already scaled), without
/// materializing the copies.
pub fn linearization_scalars_iid(law: &DiscreteLaw, n: usize, p: f64) -> Result<LinearizationScalars> {
    scalars_for_groups(&[(n, law)], p)
}

fn scalars_for_groups(groups: &[(usize, &DiscreteLaw)], p: f64) -> Result<LinearizationScalars> {
    if !(p >= 2.0) {
        return invalid(format!("p must be at least 2 (got {p})"));
    }
    let sum = |g: &dyn Fn(f64) -> f64| -> f64 { groups.iter().map(|(k, law)| *k as f64 * law.expect(g)).sum() };
    let mean = sum(&|x| x);
    let var = sum(&|x| x * x);
    if mean.abs() > 1e-8 || (var - 1.0).abs() > 1e-8 {
        return invalid(format!("summands must be centered with unit total variance (mean {mean}, variance {var})"));
    }
    let reach = |d: f64| sum(&|x: f64| x.abs() * d.min(x.abs()));
    let (mut lo, mut hi) = (0.0, groups.iter().flat_map(|(_, l)| l.values.iter()).fold(0.0f64, |m, v| m.max(v.abs())));
    while hi - lo > DELTA_TOL * hi.max(1e-300) {
        let mid = 0.5 * (lo + hi);
        if reach(mid) >= 0.5 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(LinearizationScalars {
        delta: hi,
        beta: sum(&|x: f64| (x * x).min(x.abs().powi(3))),
        sigma_p: sum(&|x: f64| x.abs().powf(p)).powf(1.0 / p),
        p,
    })
}

/// Inputs to the `f(S)` bounds.
///
/// `C₁`, `q` and `q̃` are always derived, never stored.
#[derive(Debug, Clone)]
pub struct BoundInputs {
    /// Operator norm of the linear part `L`.
    pub norm_l: f64,
    /// Standard deviation of `L(S)`.
    pub sigma: f64,
    /// Smoothness constant.
    pub m: f64,
    /// Smoothness radius.
    pub epsilon: f64,
    /// Type-2 constant; 1 for Euclidean spaces.
    pub d: f64,
    pub p: f64,
    pub profile: MomentProfile,
}

impl BoundInputs {
    pub fn new(norm_l: f64, sigma: f64, m: f64, epsilon: f64, p: f64, profile: MomentProfile) -> Result<Self> {
        let inputs = Self { norm_l, sigma, m, epsilon, d: 1.0, p, profile };
        inputs.validate()?;
        Ok(inputs)
    }

    /// i.i.d. mode: `S = V̄`, so `σ = σ₁/√n`.
    pub fn iid(norm_l: f64, sigma1: f64, m: f64, epsilon: f64, p: f64, profile: MomentProfile) -> Result<Self> {
        let n = profile.n.ok_or_else(|| Error::InvalidInput("i.i.d. inputs need an i.i.d. profile".into()))?;
        Self::new(norm_l, sigma1 / (n as f64).sqrt(), m, epsilon, p, profile)
    }

    pub fn with_d(mut self, d: f64) -> Result<Self> {
        self.d = d;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.p > 2.0) || !self.p.is_finite() {
            return invalid(format!("p must exceed 2 (got {})", self.p));
        }
        if !(self.norm_l > 0.0) || !(self.m > 0.0) || !(self.epsilon > 0.0) {
            return invalid("norm of L, M and epsilon must be positive");
        }
        if !(self.d >= 1.0) {
            return invalid(format!("type-2 constant must be at least 1 (got {})", self.d));
        }
        if !(self.sigma >= 0.0) {
            return invalid("sigma must be nonnegative");
        }
        if self.sigma == 0.0 {
            return Err(Error::Degenerate { sigma: 0.0 });
        }
        Ok(())
    }

    /// `C₁ = (M/2) ∨ (‖L‖/ε)`.
    pub fn c1(&self) -> f64 {
        (0.5 * self.m).max(self.norm_l / self.epsilon)
    }

    /// Conjugate exponent `p/(p-1)`.
    pub fn q(&self) -> f64 {
        self.p / (self.p - 1.0)
    }

    /// `p/(p-2)`.
    pub fn q_tilde(&self) -> f64 {
        self.p / (self.p - 2.0)
    }

    /// Exponents whose `s_α` the bounds consume.
    pub fn required_alphas(p: f64) -> Vec<f64> {
        let q = p / (p - 1.0);
        let mut a = vec![q, 2.0, p];
        if p >= 3.0 {
            a.push(3.0);
            a.push(2.0 * q);
        }
        a.sort_by(f64::total_cmp);
        a.dedup_by(|x, y| (*x - *y).abs() < 1e-12);
        a
    }

    /// Upper end of the admissible non-uniform range, `3 C₁ ε² / σ`.
    pub fn z_max(&self) -> f64 {
        3.0 * self.c1() * self.epsilon * self.epsilon / self.sigma
    }
}

/// `λ_α = ‖L‖ s_α / σ`.
pub fn lambda_alpha(inputs: &BoundInputs, alpha: f64) -> Result<f64> {
    Ok(inputs.norm_l * inputs.profile.s(alpha)? / inputs.sigma)
}

/// The `λ` values the bounds combine.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lambdas {
    pub p: f64,
    pub d: f64,
    pub l2: f64,
    pub lp: f64,
    pub lq: f64,
    /// `λ_{2q}`; only needed when `p ≥ 3`.
    pub l2q: f64,
}

impl Lambdas {
    pub fn from_inputs(inputs: &BoundInputs) -> Result<Self> {
        let p = inputs.p;
        let q = inputs.q();
        Ok(Self {
            p,
            d: inputs.d,
            l2: lambda_alpha(inputs, 2.0)?,
            lp: lambda_alpha(inputs, p)?,
            lq: lambda_alpha(inputs, q)?,
            l2q: if p >= 3.0 { lambda_alpha(inputs, 2.0 * q)? } else { 0.0 },
        })
    }

    pub fn uv(&self) -> (f64, f64) {
        let u = if self.p >= 3.0 { self.l2q } else { self.lp.powf((self.p - 1.0) / 2.0) };
        let v = self.d * self.l2 + if self.p < 3.0 { self.lp.powf(self.p) } else { 0.0 };
        (u, v)
    }

    /// `(Γ, Γ₁)` given the prefactor `C₁σ/‖L‖²`.
    pub fn gamma(&self, prefactor: f64) -> (f64, f64) {
        let (u, v) = self.uv();
        let g = prefactor * ((u * u + v * v) * (1.0 + self.lp) + self.lp * self.lq * v);
        let q_tilde = self.p / (self.p - 2.0);
        (g, g + self.lp.powf(q_tilde) * (1.0 + self.lp))
    }
}

pub fn compute_uv(inputs: &BoundInputs) -> Result<(f64, f64)> {
    Ok(Lambdas::from_inputs(inputs)?.uv())
}

/// `(Γ, Γ₁)`.
pub fn gamma_terms(inputs: &BoundInputs) -> Result<(f64, f64)> {
    let prefactor = inputs.c1() * inputs.sigma / (inputs.norm_l * inputs.norm_l);
    Ok(Lambdas::from_inputs(inputs)?.gamma(prefactor))
}

fn check_probability(name: &str, x: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&x) {
        return invalid(format!("{name} must be a probability (got {x})"));
    }
    Ok(())
}

/// Uniform bound on `|P(f(S) ≤ zσ) - P(L(S) ≤ zσ)|`.
///
/// When `prob_s_exceeds_eps` is `None` the Chebyshev value `D² s₂² / ε²`
/// stands in; when `tail_at_sigma_over_l` is `None` the profile tail is used.
pub fn uniform_fs_bound(
    inputs: &BoundInputs,
    prob_s_exceeds_eps: Option<f64>,
    tail_at_sigma_over_l: Option<f64>,
) -> Result<BoundReport> {
    inputs.validate()?;
    let (first_label, first_tag, first) = match prob_s_exceeds_eps {
        Some(pr) => {
            check_probability("P(|S| > eps)", pr)?;
            ("prob_norm_s_exceeds_eps", "uniform.outside-ball", pr)
        }
        None => {
            let s2 = inputs.profile.s(2.0)?;
            ("chebyshev_norm_s_exceeds_eps", "uniform.outside-ball.chebyshev", (inputs.d * s2 / inputs.epsilon).powi(2))
        }
    };
    let tail = match tail_at_sigma_over_l {
        Some(t) => {
            if !(t >= 0.0) {
                return invalid("tail sum must be nonnegative");
            }
            t
        }
        None => inputs.profile.tail_sum(inputs.sigma / inputs.norm_l)?,
    };
    let r = inputs.p.min(3.0);
    let lr = lambda_alpha(inputs, r)?;
    let (gamma, _) = gamma_terms(inputs)?;
    BoundReport::new(
        "uniform-f-of-s",
        vec![
            (first_label, first, first_tag),
            ("lambda_power", lr.powf(r), "uniform.linear-part"),
            ("tail_sum_at_sigma_over_norm_l", tail, "uniform.tail-sum"),
            ("gamma", gamma, "uniform.gamma"),
        ],
    )
}

/// Non-uniform bound at `z`, valid for `1 ≤ |z| ≤ 3C₁ε²/σ`.
pub fn nonuniform_fs_bound(inputs: &BoundInputs, z: f64) -> Result<BoundReport> {
    inputs.validate()?;
    let az = z.abs();
    let hi = inputs.z_max();
    if !(1.0..=hi).contains(&az) {
        return Err(Error::OutOfRange { z, lo: 1.0, hi });
    }
    let p = inputs.p;
    let c1 = inputs.c1();
    let (sigma, norm_l, eps, d) = (inputs.sigma, inputs.norm_l, inputs.epsilon, inputs.d);
    let s2 = inputs.profile.s(2.0)?;
    let tail = |t: f64| inputs.profile.tail_sum(t);
    let zp = az.powf(p);

    let mut terms = vec![
        ("tail_sum_far", tail(sigma * az / (6.0 * p * c1 * eps))?, "nonuniform.tail-sum"),
        ("second_moment_power", (d * d * c1 * s2 * s2 / sigma).powf(p) / zp, "nonuniform.second-moment"),
    ];
    let gate = zp * tail(2.0 * sigma * az / (3.0 * p * norm_l))?;
    let mut notes = Vec::new();
    if gate < 1.0 {
        let (_, gamma1) = gamma_terms(inputs)?;
        terms.push(("gated_tail_sum", tail(sigma / norm_l)? / zp, "nonuniform.gated-tail-sum"));
        terms.push(("gated_gamma1_exponential", gamma1 * (-az / 3.0).exp(), "nonuniform.gated-gamma1"));
    } else {
        notes.push(format!("gate closed: |z|^p G = {gate:e} >= 1"));
    }
    let mut report = BoundReport::new("nonuniform-f-of-s", terms)?.with_z(z, [1.0, hi]);
    report.notes = notes;
    Ok(report)
}

/// Normal-approximation bounds for `W = Σ ξ_i` at `z`.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct LinearBeBound {
    pub b1: f64,
    pub b2: f64,
    pub bound: f64,
    pub gate_open: bool,
}

fn b1_kernel(x: f64) -> f64 {
    (x * x).min(x.powi(3))
}

/// `B₁(z) ∧ B₂(z, p)` for an independent family of `(ξ_i, η_i)` pairs with
/// `|ξ_i| ≤ |η_i|`.
pub fn linear_be_bound(pairs: &[PairLaw], z: f64, p: f64) -> Result<LinearBeBound> {
    if !(p >= 2.0) {
        return invalid(format!("p must be at least 2 (got {p})"));
    }
    for (i, pair) in pairs.iter().enumerate() {
        if let Some(a) = pair.atoms.iter().find(|a| a.0.abs() > a.1.abs() * (1.0 + 1e-12)) {
            return invalid(format!("pair {i}: |xi| = {} exceeds |eta| = {}", a.0.abs(), a.1.abs()));
        }
    }
    let zp1 = z.abs() + 1.0;
    let b1: f64 = pairs.iter().flat_map(|pr| pr.atoms.iter()).map(|&(x, _, w)| w * b1_kernel(x.abs() / zp1)).sum();
    let g_eta = |t: f64| -> f64 { pairs.iter().flat_map(|pr| pr.atoms.iter()).filter(|a| a.1.abs() > t).map(|a| a.2).sum() };
    let g_xi1: f64 = pairs.iter().flat_map(|pr| pr.atoms.iter()).filter(|a| a.0.abs() > 1.0).map(|a| a.2).sum();
    let sigma3_cubed: f64 = pairs.iter().flat_map(|pr| pr.atoms.iter()).map(|a| a.2 * a.0.abs().powi(3)).sum();
    let lead = g_eta(zp1 / (0.5 * p + 1.0));
    let gate_open = zp1.powf(p) * lead < 1.0;
    let b2 = lead + if gate_open { g_xi1 / zp1.powf(p) + sigma3_cubed * (-z.abs() / 2.0).exp() } else { 0.0 };
    Ok(LinearBeBound { b1, b2, bound: b1.min(b2), gate_open })
}

/// The same bounds for `L(S)/σ`, with `|ξ_i| ≤ ‖L‖‖X_i‖/σ` substituted.
///
/// `norm_laws` lists the law of `‖X_i‖` for each summand group as weighted
/// atoms `(norm, probability)` with a multiplicity.
pub fn linear_be_bound_fs(inputs: &BoundInputs, norm_atoms: &[(usize, Vec<(f64, f64)>)], z: f64) -> Result<LinearBeBound> {
    inputs.validate()?;
    let zp1 = z.abs() + 1.0;
    let k = inputs.norm_l / inputs.sigma;
    let b1: f64 = norm_atoms
        .iter()
        .map(|(count, atoms)| *count as f64 * atoms.iter().map(|(v, w)| w * b1_kernel(k * v / zp1)).sum::<f64>())
        .sum();
    let tail = |t: f64| inputs.profile.tail_sum(t);
    let lead = tail(zp1 / (k * (0.5 * inputs.p + 1.0)))?;
    let gate_open = zp1.powf(inputs.p) * lead < 1.0;
    let b2 = lead
        + if gate_open {
            tail(1.0 / k)? / zp1.powf(inputs.p) + (k * inputs.profile.s(3.0)?).powi(3) * (-z.abs() / 2.0).exp()
        } else {
            0.0
        };
    Ok(LinearBeBound { b1, b2, bound: b1.min(b2), gate_open })
}

/// Scalars of a smooth statistic model needed by the i.i.d. constants.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct ModelScalars {
    pub norm_l: f64,
    pub sigma1: f64,
    pub m: f64,
    pub epsilon: f64,
}

impl ModelScalars {
    pub fn c1(&self) -> f64 {
        (0.5 * self.m).max(self.norm_l / self.epsilon)
    }
}

/// Constants `(A₁, A₂)` of the i.i.d. third-moment non-uniform bound
/// `(A₁/|z|³ + A₂ e^{-|z|/3}) / √n`.
pub fn iid_p3_constants(model: &ModelScalars, norm_v2: f64, norm_v3: f64, n: usize) -> Result<(f64, f64)> {
    if !(model.sigma1 > 0.0) {
        return Err(Error::Degenerate { sigma: model.sigma1 });
    }
    if !norm_v3.is_finite() || !norm_v2.is_finite() {
        return Err(Error::InfiniteMoment { alpha: 3.0 });
    }
    let c1 = model.c1();
    let s1 = model.sigma1;
    let a1 = ((c1 * model.epsilon).powi(3) * norm_v3.powi(3) + c1.powi(3) * norm_v2.powi(6) / n as f64) / s1.powi(3);
    let ratio = model.norm_l * norm_v3 / s1;
    let a2 = (c1 * norm_v3 * norm_v3 / s1 + ratio.powi(3)) * (1.0 + ratio);
    Ok((a1, a2))
}

/// Norms consumed by [`suboptimal_exp_bound`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuboptimalNorms {
    /// `‖V‖₂`.
    pub v2: f64,
    /// `‖V‖_p`.
    pub vp: f64,
    /// `‖L(V)‖_{p∧3}`.
    pub lv: f64,
    pub sigma1: f64,
}

/// Truncation level `x` and cut-off `y` used by the exponential chain.
pub fn suboptimal_scales(n: usize, p: f64, v2: f64) -> (f64, f64) {
    let nf = n as f64;
    let e = std::f64::consts::E;
    if p >= 3.0 {
        let ln = nf.ln();
        (2.0 * e * v2 * (nf * ln).sqrt(), e * v2 * (nf / ln).sqrt())
    } else {
        (2.0 * e * v2 * nf.powf((5.0 - p) / 4.0), e * v2 * nf.sqrt())
    }
}

/// Explicit uniform bound via truncation and an exponential inequality,
/// itemized. Reported as the trivial value 1 when `n` is too small for the
/// truncated mean to stay below `x/2`.
pub fn suboptimal_exp_bound(
    n: usize,
    p: f64,
    norms: SuboptimalNorms,
    m: f64,
    epsilon: f64,
    be_constant: f64,
) -> Result<BoundReport> {
    if !(p > 2.0) {
        return invalid(format!("p must exceed 2 (got {p})"));
    }
    if n < 3 {
        return invalid("need n >= 3 so that ln n > 1");
    }
    if !(norms.sigma1 > 0.0) {
        return Err(Error::Degenerate { sigma: norms.sigma1 });
    }
    let nf = n as f64;
    let SuboptimalNorms { v2, vp, lv, sigma1 } = norms;
    let (x, y) = suboptimal_scales(n, p, v2);
    let d = 1.0;
    if 2.0 * d * nf.sqrt() * v2 + nf * v2 * v2 / y > 0.5 * x {
        let mut r = BoundReport::new("suboptimal-exponential", vec![("trivial", 1.0, "suboptimal.trivial")])?;
        r.notes.push(format!("truncated mean exceeds x/2 at n = {n}; bound is trivial"));
        return Ok(r);
    }
    let r = p.min(3.0);
    let delta = m * x * x / (2.0 * sigma1 * nf.powf(1.5));
    let e = std::f64::consts::E;
    BoundReport::new(
        "suboptimal-exponential",
        vec![
            ("smoothing_shift", delta / (2.0 * std::f64::consts::PI).sqrt(), "suboptimal.shift"),
            ("classical_linear", be_constant * lv.powf(r) / (nf.powf((r - 2.0) / 2.0) * sigma1.powf(r)), "suboptimal.linear"),
            ("outside_ball", v2 * v2 / (nf * epsilon * epsilon), "suboptimal.outside-ball"),
            ("truncation", vp.powf(p) * nf / y.powf(p), "suboptimal.truncation"),
            ("exponential", (2.0 * e * nf * v2 * v2 / (x * y)).powf(x / (2.0 * y)), "suboptimal.exponential"),
        ],
    )
}

/// Unit change `X ↦ cX` for a statistic of dimension `d`.
pub fn scale_inputs(inputs: &BoundInputs, c: f64, d: f64) -> Result<BoundInputs> {
    if !(c > 0.0) {
        return invalid(format!("scale must be positive (got {c})"));
    }
    Ok(BoundInputs {
        norm_l: inputs.norm_l * c.powf(d - 1.0),
        sigma: inputs.sigma * c.powf(d),
        m: inputs.m * c.powf(d - 2.0),
        epsilon: inputs.epsilon * c,
        d: inputs.d,
        p: inputs.p,
        profile: inputs.profile.scaled(c),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::moments::{Moment, TailSum};

    fn fixture(p: f64) -> BoundInputs {
        let profile = MomentProfile::from_sums(
            vec![(1.5, Moment::exact(0.05)), (2.0, Moment::exact(0.1)), (3.0, Moment::exact(0.2))],
            TailSum::zero(),
        );
        BoundInputs::new(1.0, 1.0, 2.0, 1.0, p, profile).unwrap()
    }

    #[test]
    fn gamma_fixture() {
        let (g, g1) = gamma_terms(&fixture(3.0)).unwrap();
        assert!((g - 0.061).abs() < 1e-12);
        assert!((g1 - 0.0706).abs() < 1e-12);
    }

    #[test]
    fn rademacher_delta_is_half() {
        let fam = DiscreteFamily::new(vec![DiscreteLaw::symmetric_pair(1.0)]).unwrap();
        let s = linearization_scalars(&fam, 3.0).unwrap();
        assert!((s.delta - 0.5).abs() < 1e-9);
        assert_eq!(s.beta, 1.0);
    }

    #[test]
    fn uncentered_family_is_rejected() {
        let fam = DiscreteFamily::new(vec![DiscreteLaw::new(vec![1.0], vec![1.0]).unwrap()]).unwrap();
        assert!(linearization_scalars(&fam, 3.0).is_err());
    }

    #[test]
    fn required_alphas_cover_conjugates() {
        assert_eq!(BoundInputs::required_alphas(3.0), vec![1.5, 2.0, 3.0]);
        assert_eq!(BoundInputs::required_alphas(2.5).len(), 3);
    }
}
