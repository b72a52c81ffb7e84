use berry_esseen::bounds::BoundInputs;
use berry_esseen::concentration::{
    hoeffding_tail, max_sum_check, random_standardized_family, random_symmetric_law, rosenthal_envelope, rosenthal_tail,
    sum_tail_bound, tilt,
};
use berry_esseen::family::{DiscreteFamily, DiscreteLaw};
use berry_esseen::moments::{Moment, TailSum};
use berry_esseen::rng::stream_rng;
use berry_esseen::MomentProfile;
use proptest::prelude::*;
use rand::Rng;

fn exact_upper_tail(fam: &DiscreteFamily, z: f64) -> f64 {
    fam.sum_law_merged().iter().filter(|a| a.0 >= z).map(|a| a.1).sum()
}

#[test]
fn hoeffding_on_rademacher_sums() {
    for n in 1..=8usize {
        let fam = DiscreteFamily::iid(DiscreteLaw::symmetric_pair(1.0 / (n as f64).sqrt()), n).unwrap();
        for z in [0.0, 0.5, 1.0, 2.0, 3.0] {
            for t in [0.25, 0.5, 1.0] {
                let bound = hoeffding_tail(z, t, &|s| fam.tail_sum(s)).unwrap();
                assert!(exact_upper_tail(&fam, z) <= bound, "n={n} z={z} t={t}");
            }
        }
    }
    assert!(hoeffding_tail(1.0, 0.0, &|_| 0.0).is_err());
}

#[test]
fn tilt_rejects_negative_c() {
    let fam = DiscreteFamily::iid(DiscreteLaw::symmetric_pair(0.5), 4).unwrap();
    assert!(tilt(&fam, -0.1).is_err());
    let zero = tilt(&fam, 0.0).unwrap();
    assert_eq!(zero.normalizer(), 1.0);
    assert_eq!(zero.tilted, fam);
}

#[test]
fn sum_tail_lemma_constant() {
    let profile = MomentProfile::from_sums(
        vec![(1.5, Moment::exact(0.05)), (2.0, Moment::exact(0.1)), (3.0, Moment::exact(0.2))],
        TailSum::zero(),
    );
    let inputs = BoundInputs::new(1.0, 1.0, 2.0, 1.0, 3.0, profile).unwrap();
    let s = sum_tail_bound(&inputs, 3.0).unwrap();
    assert!((s.lambda1 - 36.0 * std::f64::consts::E * 0.01).abs() < 1e-12);
    assert!(s.bound >= 0.0);
}

#[test]
fn rosenthal_arithmetic() {
    let profile = MomentProfile::from_sums(vec![(2.0, Moment::exact(0.1)), (3.0, Moment::exact(0.2))], TailSum::zero());
    assert!((rosenthal_envelope(&profile, 3.0, 1.0, 2.0).unwrap() - 0.6).abs() < 1e-12);
    let tail = rosenthal_tail(&profile, 3.0, 1.0, 1.0, 0.5).unwrap();
    assert!((tail - (0.008 + 0.001) / 0.125).abs() < 1e-12);
    assert!(rosenthal_envelope(&profile, 1.5, 1.0, 1.0).is_err());
    assert!(rosenthal_tail(&profile, 3.0, 1.0, 1.0, 0.0).is_err());
}

#[test]
fn rosenthal_envelope_dominates_rademacher_moments() {
    // ‖S‖₃ ≤ ‖S‖₄ ≤ 3^{1/4}√n, so a constant of 2 suffices for Rademacher sums
    for n in 1..=10usize {
        let fam = DiscreteFamily::iid(DiscreteLaw::symmetric_pair(1.0), n).unwrap();
        let profile = MomentProfile::from_family(&fam, &[2.0, 3.0]);
        let moment: f64 = fam.sum_law_merged().iter().map(|a| a.1 * a.0.abs().powi(3)).sum::<f64>().cbrt();
        assert!(moment <= rosenthal_envelope(&profile, 3.0, 1.0, 2.0).unwrap());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn hoeffding_holds_by_enumeration(seed in any::<u64>()) {
        let mut rng = stream_rng(seed, 1, 0);
        let fam = random_standardized_family(&mut rng, 8, 4);
        prop_assert!((fam.variance_sum() - 1.0).abs() < 1e-9);
        let z: f64 = rng.random_range(0.0..4.0);
        let t: f64 = rng.random_range(0.1..2.0);
        let exact = exact_upper_tail(&fam, z);
        let bound = hoeffding_tail(z, t, &|s| fam.tail_sum(s)).unwrap();
        prop_assert!(exact <= bound * (1.0 + 1e-12), "P = {} > {}", exact, bound);
    }

    #[test]
    fn tilt_identity_and_moment_bounds(seed in any::<u64>(), c in 0.0f64..2.0, p in 2.0f64..4.0) {
        let mut rng = stream_rng(seed, 2, 0);
        let fam = random_standardized_family(&mut rng, 6, 4);
        let tilted = tilt(&fam, c).unwrap();
        prop_assert!(tilted.identity_residual().unwrap() <= 1e-12);
        prop_assert_eq!(tilted.moment_bound_violations(p), 0);
        for comp in &tilted.tilted.components {
            prop_assert!((comp.probs.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn max_inequality_on_symmetric_families(seed in any::<u64>(), x in 0.0f64..3.0) {
        let mut rng = stream_rng(seed, 3, 0);
        let n = rng.random_range(1..=8);
        let laws: Vec<DiscreteLaw> = (0..n).map(|_| random_symmetric_law(&mut rng, 3)).collect();
        let fam = DiscreteFamily::new(laws).unwrap();
        let m = max_sum_check(&fam, x).unwrap();
        prop_assert!(m.holds, "{:?}", m);
        prop_assert!(m.lhs >= m.mid - 1e-12 && m.mid >= m.rhs - 1e-12);
    }
}
