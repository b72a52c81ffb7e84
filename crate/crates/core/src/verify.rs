//! Property suites run by the `verify` command: the concentration
//! inequalities, unit-freeness of the bounds, invariances of the classic
//! statistics, smoothness certification and the linearization identity.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::bounds::{nonuniform_fs_bound, scale_inputs, uniform_fs_bound, BoundInputs};
use crate::concentration::{hoeffding_suite, max_suite, tilt_suite, SuiteOutcome};
use crate::config::VerifySection;
use crate::dist::DistributionSpec;
use crate::error::Result;
use crate::family::{DiscreteFamily, DiscreteLaw};
use crate::moments::MomentProfile;
use crate::report::BoundReport;
use crate::rng::stream_rng;
use crate::statistics::{
    build_model, certify_smoothness, hotelling_t2, linearization_identity_check, pearson_r, student_t, BuildOptions,
    IdentityCheck, Outcome, StatisticKind,
};

/// Status of one invariant in the verification manifest.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InvariantStatus {
    pub name: String,
    pub checks: usize,
    pub violations: usize,
    /// Largest deviation seen, in the suite's own units.
    pub worst: f64,
    pub passed: bool,
}

impl From<SuiteOutcome> for InvariantStatus {
    fn from(s: SuiteOutcome) -> Self {
        let passed = s.passed();
        Self { name: s.name, checks: s.checks, violations: s.violations, worst: s.worst, passed }
    }
}

fn status(name: &str, checks: usize, violations: usize, worst: f64) -> InvariantStatus {
    InvariantStatus { name: name.into(), checks, violations, worst, passed: violations == 0 }
}

fn rel_dev(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Bound inputs for a small Rademacher-type family, used as the
/// unit-freeness fixture.
pub fn unit_freeness_fixture(p: f64) -> Result<BoundInputs> {
    let fam = DiscreteFamily::iid(DiscreteLaw::new(vec![0.05, -0.05, 0.0], vec![0.4, 0.4, 0.2])?, 20)?;
    let profile = MomentProfile::from_family(&fam, &BoundInputs::required_alphas(p));
    BoundInputs::new(1.3, 0.3, 2.0, 0.5, p, profile)
}

fn reports(inputs: &BoundInputs, zs: &[f64]) -> Result<Vec<BoundReport>> {
    let mut out = vec![uniform_fs_bound(inputs, None, None)?];
    for &z in zs {
        out.push(nonuniform_fs_bound(inputs, z)?);
    }
    Ok(out)
}

/// Every term of the uniform and non-uniform bounds is unchanged by a
/// change of units `X ↦ cX` (relative tolerance `1e-10`).
pub fn unit_freeness(inputs: &BoundInputs, zs: &[f64], scales: &[f64], dims: &[f64]) -> Result<InvariantStatus> {
    let base = reports(inputs, zs)?;
    let (mut checks, mut violations, mut worst) = (0, 0, 0.0f64);
    for &c in scales {
        for &d in dims {
            let scaled = reports(&scale_inputs(inputs, c, d)?, zs)?;
            for (a, b) in base.iter().zip(&scaled) {
                for (ta, tb) in a.terms.iter().zip(&b.terms) {
                    let dev = if ta.label == tb.label { rel_dev(ta.value, tb.value) } else { f64::INFINITY };
                    checks += 1;
                    worst = worst.max(dev);
                    if dev > 1e-10 {
                        violations += 1;
                    }
                }
            }
        }
    }
    Ok(status("unit-freeness", checks, violations, worst))
}

fn normal_sample<R: Rng>(rng: &mut R, len: usize) -> Vec<f64> {
    let loc: f64 = rng.random_range(-2.0..2.0);
    let scale: f64 = rng.random_range(0.2..3.0);
    (0..len).map(|_| loc + scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn same(a: Outcome, b: Outcome, tol: f64) -> (bool, f64) {
    match (a, b) {
        (Outcome::Value(x), Outcome::Value(y)) => {
            let dev = (x - y).abs() / x.abs().max(y.abs()).max(1.0);
            (dev <= tol, dev)
        }
        (Outcome::Undefined(_), Outcome::Undefined(_)) => (true, 0.0),
        _ => (false, f64::INFINITY),
    }
}

/// `T(aX) = T(X)` for `a > 0`.
pub fn student_scale_invariance(samples: usize, seed: u64) -> Result<InvariantStatus> {
    let (mut bad, mut worst) = (0, 0.0f64);
    for i in 0..samples {
        let mut rng = stream_rng(seed, 0x1A, i as u64);
        let n = rng.random_range(2..40);
        let x = normal_sample(&mut rng, n);
        let a = 10f64.powf(rng.random_range(-3.0..3.0));
        let y: Vec<f64> = x.iter().map(|v| a * v).collect();
        let (ok, dev) = same(student_t(&x)?, student_t(&y)?, 1e-10);
        worst = worst.max(dev);
        bad += usize::from(!ok);
    }
    Ok(status("student-scale-invariance", samples, bad, worst))
}

/// `R` is unchanged by `x ↦ a + bx`, `y ↦ c + dy` with `b, d > 0`.
pub fn pearson_affine_invariance(samples: usize, seed: u64) -> Result<InvariantStatus> {
    let (mut bad, mut worst) = (0, 0.0f64);
    for i in 0..samples {
        let mut rng = stream_rng(seed, 0x1B, i as u64);
        let n = rng.random_range(3..40);
        let xs = normal_sample(&mut rng, n);
        let mix: f64 = rng.random_range(-1.0..1.0);
        let noise = normal_sample(&mut rng, n);
        let pts: Vec<[f64; 2]> = xs.iter().zip(&noise).map(|(x, e)| [*x, mix * x + e]).collect();
        let (a, b, c, d) = (
            rng.random_range(-5.0..5.0),
            rng.random_range(0.1..10.0),
            rng.random_range(-5.0..5.0),
            rng.random_range(0.1..10.0),
        );
        let moved: Vec<[f64; 2]> = pts.iter().map(|p| [a + b * p[0], c + d * p[1]]).collect();
        let (ok, dev) = same(pearson_r(&pts)?, pearson_r(&moved)?, 1e-9);
        worst = worst.max(dev);
        bad += usize::from(!ok);
    }
    Ok(status("pearson-affine-invariance", samples, bad, worst))
}

/// `T²(BX) = T²(X)` for nonsingular `B` (relative tolerance `1e-8`).
pub fn hotelling_nonsingular_invariance(samples: usize, seed: u64) -> Result<InvariantStatus> {
    let (mut bad, mut worst) = (0, 0.0f64);
    for i in 0..samples {
        let mut rng = stream_rng(seed, 0x1C, i as u64);
        let k = rng.random_range(2..=3);
        let n = rng.random_range(k + 2..40);
        let rows = normal_sample(&mut rng, n * k);
        // well-conditioned random B: identity plus a bounded perturbation
        let b: Vec<f64> = (0..k * k)
            .map(|j| f64::from(u8::from(j % (k + 1) == 0)) + 0.4 * rng.random_range(-1.0..1.0))
            .collect();
        let moved: Vec<f64> = rows
            .chunks_exact(k)
            .flat_map(|x| (0..k).map(|r| (0..k).map(|c| b[r * k + c] * x[c]).sum::<f64>()).collect::<Vec<_>>())
            .collect();
        let (ok, dev) = same(hotelling_t2(&rows, k)?, hotelling_t2(&moved, k)?, 1e-8);
        worst = worst.max(dev);
        bad += usize::from(!ok);
    }
    Ok(status("hotelling-nonsingular-invariance", samples, bad, worst))
}

/// `x + x²` certifies to `M̂ = 2` with no violations.
pub fn quadratic_certification(points: usize, seed: u64) -> Result<InvariantStatus> {
    let f = |x: &[f64]| x[0] + x[0] * x[0];
    let c = certify_smoothness(&f, &[1.0], 0.5, points, seed)?;
    let dev = (c.m_hat - 2.0).abs();
    Ok(status("quadratic-smoothness", points, c.violations + usize::from(dev > 1e-6), dev))
}

/// The shipped statistic models with the laws they are shipped with.
pub fn shipped_models() -> Vec<(StatisticKind, DistributionSpec)> {
    vec![
        (StatisticKind::Student { mu: 1.0 }, DistributionSpec::normal(1.0, 1.0)),
        (StatisticKind::Pearson { rho: 0.0 }, DistributionSpec::bivariate_normal(0.0)),
        (
            StatisticKind::Hotelling { mu: vec![1.0, 0.0] },
            DistributionSpec::Gaussian { mean: vec![1.0, 0.0], covariance: None },
        ),
    ]
}

/// Certification violations of the shipped models at `ε = 1/2`.
pub fn shipped_certification(points: usize) -> Result<InvariantStatus> {
    let opts = BuildOptions { certify_points: points, ..BuildOptions::default() };
    let (mut checks, mut bad) = (0, 0);
    for (kind, obs) in shipped_models() {
        let model = build_model(kind, &obs, &opts)?;
        checks += points;
        bad += model.certification_violations;
    }
    Ok(status("shipped-model-certification", checks, bad, 0.0))
}

/// `f(V̄)` reproduces each statistic on small perturbations of its centre.
pub fn linearization_identity(samples: usize, seed: u64) -> Result<InvariantStatus> {
    let (mut checks, mut bad, mut worst) = (0, 0, 0.0f64);
    for (kind, _) in shipped_models() {
        let k = kind.observation_dim();
        for i in 0..samples {
            let mut rng = stream_rng(seed, 0x1D, i as u64);
            let n = 40;
            let sample: Vec<f64> = match &kind {
                StatisticKind::Student { mu } => (0..n).map(|_| mu + rng.sample::<f64, _>(StandardNormal)).collect(),
                StatisticKind::Pearson { .. } => (0..2 * n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect(),
                StatisticKind::Hotelling { mu } => {
                    (0..n * k).map(|j| mu[j % k] + rng.sample::<f64, _>(StandardNormal)).collect()
                }
            };
            match linearization_identity_check(&kind, &sample) {
                Ok(IdentityCheck::Holds { lhs, rhs }) => {
                    checks += 1;
                    worst = worst.max(rel_dev(lhs, rhs));
                }
                Ok(IdentityCheck::Fails { lhs, rhs }) => {
                    checks += 1;
                    bad += 1;
                    worst = worst.max(rel_dev(lhs, rhs));
                }
                Ok(IdentityCheck::NotApplicable { .. }) | Err(_) => {}
            }
        }
    }
    Ok(status("linearization-identity", checks, bad, worst))
}

/// Run every suite.
pub fn run_all(section: &VerifySection, seed: u64) -> Result<Vec<InvariantStatus>> {
    let inputs = unit_freeness_fixture(3.0)?;
    Ok(vec![
        hoeffding_suite(section.families, seed).into(),
        max_suite(section.max_families, seed).into(),
        tilt_suite(section.families, seed).into(),
        unit_freeness(&inputs, &[1.5, 3.0, -2.0], &[0.5, 2.0, 10.0], &[-1.0, 0.0, 1.0])?,
        student_scale_invariance(section.samples, seed)?,
        pearson_affine_invariance(section.samples, seed)?,
        hotelling_nonsingular_invariance(section.samples, seed)?,
        quadratic_certification(10_000, seed)?,
        shipped_certification(100_000)?,
        linearization_identity(section.samples.min(200), seed)?,
    ])
}
