//! Exactly checkable inequality devices: the Hoeffding-type tail bound, the
//! exponential tilt, the max-of-sums inequality, the sum-tail lemma and a
//! Rosenthal-type envelope.

use rand::Rng;
use serde::Serialize;

use crate::bounds::BoundInputs;
use crate::error::{invalid, Error, Result};
use crate::family::{DiscreteFamily, DiscreteLaw};
use crate::moments::MomentProfile;
use crate::rng::stream_rng;

/// Joint-atom count above which enumeration gives way to Monte Carlo.
pub const ENUMERATION_LIMIT: usize = 10_000_000;

/// `G_ξ(t) + (e/(1 + z t))^{z/t}`, an upper bound on `P(W ≥ z)` for
/// independent `ξ_i` with `Σ E ξ_i² = 1`.
pub fn hoeffding_tail(z: f64, t: f64, tail: &dyn Fn(f64) -> f64) -> Result<f64> {
    if !(t > 0.0) {
        return invalid(format!("truncation level must be positive (got {t})"));
    }
    if !(z >= 0.0) {
        return invalid(format!("z must be nonnegative (got {z})"));
    }
    let e = std::f64::consts::E;
    Ok(tail(t) + (e / (1.0 + z * t)).powf(z / t))
}

/// A family reweighted by `e^{c W̄}`, `W̄ = Σ ξ_i 1{ξ_i ≤ 1}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TiltedDistribution {
    pub base: DiscreteFamily,
    pub c: f64,
    pub tilted: DiscreteFamily,
    /// Per-component normalizers `E e^{c ξ̄_i}`; their product is `E e^{c W̄}`.
    pub normalizers: Vec<f64>,
}

fn truncated(v: f64) -> f64 {
    if v <= 1.0 {
        v
    } else {
        0.0
    }
}

/// Exponential tilt; factorizes across components, so independence is kept.
pub fn tilt(base: &DiscreteFamily, c: f64) -> Result<TiltedDistribution> {
    if !(c >= 0.0) || !c.is_finite() {
        return invalid(format!("tilt parameter must be nonnegative (got {c})"));
    }
    let mut normalizers = Vec::with_capacity(base.len());
    let components = base
        .components
        .iter()
        .map(|law| {
            let weights: Vec<f64> = law.atoms().map(|(v, p)| p * (c * truncated(v)).exp()).collect();
            let z: f64 = weights.iter().sum();
            normalizers.push(z);
            DiscreteLaw { values: law.values.clone(), probs: weights.iter().map(|w| w / z).collect() }
        })
        .collect();
    Ok(TiltedDistribution { base: base.clone(), c, tilted: DiscreteFamily { components }, normalizers })
}

impl TiltedDistribution {
    /// `E e^{c W̄}`.
    pub fn normalizer(&self) -> f64 {
        self.normalizers.iter().product()
    }

    /// Largest relative deviation of `P(ξ̂ = a)·E e^{cW̄}` from
    /// `P(ξ = a)·e^{c W̄(a)}` over all joint atoms.
    pub fn identity_residual(&self) -> Result<f64> {
        if self.base.joint_size() > ENUMERATION_LIMIT {
            return invalid("too many joint atoms to enumerate");
        }
        let norm = self.normalizer();
        let mut worst = 0.0f64;
        self.base.for_each_joint(|idx, p| {
            let w_bar: f64 = idx.iter().zip(&self.base.components).map(|(&j, c)| truncated(c.values[j])).sum();
            let rhs = p * (self.c * w_bar).exp();
            let tilted: f64 = idx.iter().zip(&self.tilted.components).map(|(&j, c)| c.probs[j]).product();
            let lhs = tilted * norm;
            if rhs > 0.0 || lhs > 0.0 {
                worst = worst.max((lhs - rhs).abs() / lhs.abs().max(rhs.abs()));
            }
        });
        Ok(worst)
    }

    /// Check `E|ξ̂_i|^p ≤ e^{2c} E|ξ_i|^p` and `|E ξ̂_i| ≤ c e^{2c} E ξ_i²`
    /// for every component; returns the number of violations.
    pub fn moment_bound_violations(&self, p: f64) -> usize {
        let k = (2.0 * self.c).exp();
        self.base
            .components
            .iter()
            .zip(&self.tilted.components)
            .filter(|(b, t)| {
                let moment_ok = t.abs_moment(p) <= k * b.abs_moment(p) * (1.0 + 1e-12);
                let mean_ok = t.mean().abs() <= self.c * k * b.second_moment() * (1.0 + 1e-12) + 1e-15;
                !(moment_ok && mean_ok)
            })
            .count()
    }
}

/// The three sides of `P(‖S‖>x) ≥ ½P(max‖X_i‖>x) ≥ ½ΣP/(1+ΣP)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct MaxSumCheck {
    pub lhs: f64,
    pub mid: f64,
    pub rhs: f64,
    pub holds: bool,
    /// Standard error of `lhs` when it was estimated by Monte Carlo.
    pub lhs_std_err: f64,
}

/// Exact check for symmetric scalar families; Monte Carlo past
/// [`ENUMERATION_LIMIT`] joint atoms.
pub fn max_sum_check(family: &DiscreteFamily, x: f64) -> Result<MaxSumCheck> {
    if let Some(i) = family.components.iter().position(|c| !c.is_symmetric(1e-12)) {
        return invalid(format!("component {i} is not symmetric"));
    }
    let tails: Vec<f64> = family.components.iter().map(|c| c.abs_tail(x)).collect();
    let total: f64 = tails.iter().sum();
    let mid = 0.5 * (1.0 - tails.iter().map(|t| 1.0 - t).product::<f64>());
    let rhs = 0.5 * total / (1.0 + total);
    let (lhs, se) = if family.joint_size() <= ENUMERATION_LIMIT {
        (family.sum_law_merged().iter().filter(|(w, _)| w.abs() > x).map(|(_, p)| p).sum(), 0.0)
    } else {
        sum_tail_mc(family, x, 1_000_000, 0x3A7)
    };
    let slack = 4.0 * se + 1e-12;
    Ok(MaxSumCheck { lhs, mid, rhs, holds: lhs + slack >= mid && mid + 1e-12 >= rhs, lhs_std_err: se })
}

fn sum_tail_mc(family: &DiscreteFamily, x: f64, draws: usize, seed: u64) -> (f64, f64) {
    let mut rng = stream_rng(seed, 0x3A7, 0);
    let cumulative: Vec<Vec<f64>> = family
        .components
        .iter()
        .map(|c| {
            let mut acc = 0.0;
            c.probs.iter().map(|p| {
                acc += p;
                acc
            }).collect()
        })
        .collect();
    let mut hits = 0usize;
    for _ in 0..draws {
        let mut w = 0.0;
        for (c, cum) in family.components.iter().zip(&cumulative) {
            let u: f64 = rng.random();
            let j = cum.partition_point(|&q| q <= u).min(cum.len() - 1);
            w += c.values[j];
        }
        if w.abs() > x {
            hits += 1;
        }
    }
    let p = hits as f64 / draws as f64;
    (p, (p * (1.0 - p) / draws as f64).sqrt())
}

/// Sum-tail lemma output.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SumTailBound {
    pub x: f64,
    pub lambda1: f64,
    pub bound: f64,
}

/// `x = √(σ|z|/(3C₁))`, `Λ₁ = 12 e p C₁ D² s₂²/σ` and the bound
/// `G_X(x/(2p)) + Λ₁^p/|z|^p`, for `1 ≤ |z| ≤ 3C₁ε²/σ`.
pub fn sum_tail_bound(inputs: &BoundInputs, z: f64) -> Result<SumTailBound> {
    inputs.validate()?;
    let az = z.abs();
    let hi = inputs.z_max();
    if !(1.0..=hi).contains(&az) {
        return Err(Error::OutOfRange { z, lo: 1.0, hi });
    }
    let p = inputs.p;
    let c1 = inputs.c1();
    let x = (inputs.sigma * az / (3.0 * c1)).sqrt();
    let s2 = inputs.profile.s(2.0)?;
    let lambda1 = 12.0 * std::f64::consts::E * p * c1 * inputs.d * inputs.d * s2 * s2 / inputs.sigma;
    let bound = inputs.profile.tail_sum(x / (2.0 * p))? + (lambda1 / az).powf(p);
    Ok(SumTailBound { x, lambda1, bound })
}

/// `constant · (s_p + D s₂)`, an envelope for `‖S‖_p`.
pub fn rosenthal_envelope(profile: &MomentProfile, p: f64, d: f64, constant: f64) -> Result<f64> {
    if !(p >= 2.0) {
        return invalid(format!("p must be at least 2 (got {p})"));
    }
    Ok(constant * (profile.s(p)? + d * profile.s(2.0)?))
}

/// `constant · (s_p^p + D^p s₂^p)/ε^p`, the matching bound on `P(‖S‖ > ε)`.
pub fn rosenthal_tail(profile: &MomentProfile, p: f64, d: f64, constant: f64, epsilon: f64) -> Result<f64> {
    if !(epsilon > 0.0) {
        return invalid("epsilon must be positive");
    }
    rosenthal_envelope(profile, p, d, 1.0)?;
    Ok(constant * (profile.s(p)?.powf(p) + (d * profile.s(2.0)?).powf(p)) / epsilon.powf(p))
}

/// Random symmetric law with up to `max_pairs` atom pairs on the quarter
/// lattice, optionally with an atom at 0.
pub fn random_symmetric_law<R: Rng + ?Sized>(rng: &mut R, max_pairs: usize) -> DiscreteLaw {
    let pairs = rng.random_range(1..=max_pairs);
    let with_zero = rng.random_bool(0.3);
    let mut mags: Vec<f64> = Vec::new();
    while mags.len() < pairs {
        let m = rng.random_range(1..=12) as f64 * 0.25;
        if !mags.contains(&m) {
            mags.push(m);
        }
    }
    let mut weights: Vec<f64> = (0..pairs + usize::from(with_zero)).map(|_| rng.random_range(0.05..1.0)).collect();
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    let mut values = Vec::new();
    let mut probs = Vec::new();
    for (m, w) in mags.iter().zip(&weights) {
        values.extend([*m, -*m]);
        probs.extend([0.5 * w, 0.5 * w]);
    }
    if with_zero {
        values.push(0.0);
        probs.push(weights[pairs]);
    }
    DiscreteLaw { values, probs }
}

/// Random centered family with unit total variance.
pub fn random_standardized_family<R: Rng + ?Sized>(rng: &mut R, max_n: usize, max_atoms: usize) -> DiscreteFamily {
    let n = rng.random_range(1..=max_n);
    let raw: Vec<DiscreteLaw> = (0..n)
        .map(|_| {
            let k = rng.random_range(2..=max_atoms);
            let values: Vec<f64> = (0..k).map(|_| rng.random_range(-3.0..3.0)).collect();
            let mut probs: Vec<f64> = (0..k).map(|_| rng.random_range(0.05..1.0)).collect();
            let t: f64 = probs.iter().sum();
            probs.iter_mut().for_each(|p| *p /= t);
            let mean: f64 = values.iter().zip(&probs).map(|(v, p)| v * p).sum();
            DiscreteLaw { values: values.iter().map(|v| v - mean).collect(), probs }
        })
        .collect();
    let var: f64 = raw.iter().map(DiscreteLaw::second_moment).sum();
    let scale = 1.0 / var.sqrt();
    DiscreteFamily { components: raw.iter().map(|l| l.scaled(scale)).collect() }
}

/// Outcome of a fuzzed inequality suite.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteOutcome {
    pub name: String,
    pub families: usize,
    pub checks: usize,
    pub violations: usize,
    pub worst: f64,
}

impl SuiteOutcome {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

const SUITE_TAG: u64 = 0x5017E;

/// Hoeffding bound against exact `P(W ≥ z)` on a `(z, t)` grid.
pub fn hoeffding_suite(families: usize, seed: u64) -> SuiteOutcome {
    let zs = [0.0, 0.5, 1.0, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0];
    let ts = [0.1, 0.25, 0.5, 1.0, 2.0];
    let mut out = SuiteOutcome { name: "hoeffding".into(), families, checks: 0, violations: 0, worst: 0.0 };
    for f in 0..families {
        let mut rng = stream_rng(seed, SUITE_TAG, f as u64);
        let fam = random_standardized_family(&mut rng, 8, 4);
        let law = fam.sum_law_merged();
        for &z in &zs {
            let exact: f64 = law.iter().filter(|(w, _)| *w >= z).map(|(_, p)| p).sum();
            for &t in &ts {
                let bound = hoeffding_tail(z, t, &|u| fam.tail_sum(u)).expect("valid grid");
                out.checks += 1;
                out.worst = out.worst.max(exact - bound);
                if exact > bound * (1.0 + 1e-12) {
                    out.violations += 1;
                }
            }
        }
    }
    out
}

/// Both inequalities of the max-of-sums comparison on symmetric families.
pub fn max_suite(families: usize, seed: u64) -> SuiteOutcome {
    let xs = [0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0];
    let mut out = SuiteOutcome { name: "max-of-sums".into(), families, checks: 0, violations: 0, worst: 0.0 };
    for f in 0..families {
        let mut rng = stream_rng(seed, SUITE_TAG + 1, f as u64);
        let n = rng.random_range(1..=8);
        let fam = DiscreteFamily { components: (0..n).map(|_| random_symmetric_law(&mut rng, 3)).collect() };
        for &x in &xs {
            let c = max_sum_check(&fam, x).expect("symmetric by construction");
            out.checks += 1;
            out.worst = out.worst.max((c.mid - c.lhs).max(c.rhs - c.mid));
            if !c.holds {
                out.violations += 1;
            }
        }
    }
    out
}

/// Tilt identity (relative residual ≤ 1e-12) and tilted moment bounds.
pub fn tilt_suite(families: usize, seed: u64) -> SuiteOutcome {
    let cs = [0.0, 0.1, 0.5, 1.0, 2.0];
    let mut out = SuiteOutcome { name: "tilt".into(), families, checks: 0, violations: 0, worst: 0.0 };
    for f in 0..families {
        let mut rng = stream_rng(seed, SUITE_TAG + 2, f as u64);
        let fam = random_standardized_family(&mut rng, 8, 4);
        for &c in &cs {
            let t = tilt(&fam, c).expect("valid tilt");
            let residual = t.identity_residual().expect("enumerable");
            out.worst = out.worst.max(residual);
            out.checks += 1;
            if residual > 1e-12 {
                out.violations += 1;
            }
            for p in [2.0, 2.5, 3.0, 4.0] {
                out.checks += 1;
                out.violations += t.moment_bound_violations(p);
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hoeffding_arithmetic() {
        let e = std::f64::consts::E;
        assert!((hoeffding_tail(2.0, 1.0, &|_| 0.0).unwrap() - (e / 3.0).powi(2)).abs() < 1e-15);
        assert!((hoeffding_tail(4.0, 1.0, &|_| 0.0).unwrap() - (e / 5.0).powi(4)).abs() < 1e-15);
        assert!(hoeffding_tail(0.0, 1.0, &|_| 0.0).unwrap() >= 1.0);
        assert!(hoeffding_tail(1.0, 0.0, &|_| 0.0).is_err());
    }

    #[test]
    fn tilt_of_rademacher() {
        let fam = DiscreteFamily::new(vec![DiscreteLaw::symmetric_pair(1.0)]).unwrap();
        let c: f64 = 0.7;
        let t = tilt(&fam, c).unwrap();
        let p_plus = t.tilted.components[0].probs[t.tilted.components[0].values.iter().position(|&v| v == 1.0).unwrap()];
        assert!((p_plus - c.exp() / (c.exp() + (-c).exp())).abs() < 1e-15);
        assert!(tilt(&fam, -0.1).is_err());
        assert_eq!(tilt(&fam, 0.0).unwrap().tilted, fam);
    }

    #[test]
    fn two_rademachers_max_check() {
        let fam = DiscreteFamily::iid(DiscreteLaw::symmetric_pair(1.0), 2).unwrap();
        let c = max_sum_check(&fam, 0.5).unwrap();
        assert_eq!((c.lhs, c.mid), (0.5, 0.5));
        assert!((c.rhs - 1.0 / 3.0).abs() < 1e-15);
        assert!(c.holds);
        let c = max_sum_check(&fam, 1.5).unwrap();
        assert_eq!((c.lhs, c.mid, c.rhs), (0.5, 0.0, 0.0));
    }
}
