use berry_esseen::bounds::{
    compute_uv, gamma_terms, iid_p3_constants, lambda_alpha, linear_be_bound, linearization_scalars,
    linearization_scalars_iid, nonuniform_fs_bound, scale_inputs, suboptimal_exp_bound, uniform_fs_bound, BoundInputs,
    ModelScalars, SuboptimalNorms, DEFAULT_BE_CONSTANT,
};
use berry_esseen::family::{DiscreteFamily, DiscreteLaw, PairLaw};
use berry_esseen::moments::{Moment, NormLaw, TailSum};
use berry_esseen::{Error, MomentProfile};
use proptest::prelude::*;

fn sums(s15: f64, s2: f64, s3: f64) -> MomentProfile {
    MomentProfile::from_sums(
        vec![(1.5, Moment::exact(s15)), (2.0, Moment::exact(s2)), (3.0, Moment::exact(s3))],
        TailSum::zero(),
    )
}

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * b.abs().max(1.0)
}

#[test]
fn delta_and_beta_examples() {
    for n in [1usize, 4, 25, 100] {
        let s = linearization_scalars_iid(&DiscreteLaw::symmetric_pair(1.0 / (n as f64).sqrt()), n, 3.0).unwrap();
        assert!(close(s.delta, 0.5 / (n as f64).sqrt(), 1e-9), "n = {n}: {}", s.delta);
    }
    let single = DiscreteFamily::new(vec![DiscreteLaw::symmetric_pair(1.0)]).unwrap();
    assert_eq!(linearization_scalars(&single, 3.0).unwrap().beta, 1.0);
}

#[test]
fn lambda_examples() {
    for n in [10usize, 1000] {
        let v = vec![(2.0, Moment::exact(1.0)), (3.0, Moment::exact(2.0))];
        let inputs = BoundInputs::iid(1.0, 1.0, 2.0, 1.0, 3.0, MomentProfile::iid(v, n, NormLaw::HalfNormal { sd: 1.0 })).unwrap();
        assert!(close(lambda_alpha(&inputs, 2.0).unwrap(), 1.0, 1e-12));
        assert!(close(lambda_alpha(&inputs, 3.0).unwrap(), 2.0 / (n as f64).powf(1.0 / 6.0), 1e-12));
    }
    let heavy = MomentProfile::iid(vec![(2.0, Moment::exact(1.0)), (3.0, Moment::Infinite)], 10, NormLaw::HalfNormal { sd: 1.0 });
    let inputs = BoundInputs::iid(1.0, 1.0, 2.0, 1.0, 3.0, heavy).unwrap();
    assert!(matches!(lambda_alpha(&inputs, 3.0), Err(Error::InfiniteMoment { .. })));
}

#[test]
fn uv_examples() {
    let inputs = BoundInputs::new(1.0, 1.0, 2.0, 1.0, 3.0, sums(0.05, 0.1, 0.2)).unwrap();
    let (u, v) = compute_uv(&inputs).unwrap();
    assert!(close(u, 0.2, 1e-12) && close(v, 0.1, 1e-12));

    let q = 2.5 / 1.5;
    let profile = MomentProfile::from_sums(
        vec![(q, Moment::exact(0.3)), (2.0, Moment::exact(0.1)), (2.5, Moment::exact(0.4))],
        TailSum::zero(),
    );
    let (u, v) = compute_uv(&BoundInputs::new(1.0, 1.0, 2.0, 1.0, 2.5, profile).unwrap()).unwrap();
    assert!(close(u, 0.4f64.powf(0.75), 1e-12) && (u - 0.50297).abs() < 5e-6);
    assert!(close(v, 0.1 + 0.4f64.powf(2.5), 1e-12) && (v - 0.20119).abs() < 5e-6);

    let zero = BoundInputs::new(1.0, 1.0, 2.0, 1.0, 3.0, sums(0.0, 0.0, 0.0)).unwrap();
    assert_eq!(compute_uv(&zero).unwrap(), (0.0, 0.0));
    assert_eq!(gamma_terms(&zero).unwrap(), (0.0, 0.0));
}

#[test]
fn uniform_bound_examples() {
    let inputs = BoundInputs::new(1.0, 1.0, 2.0, 1.0, 3.0, sums(0.05, 0.1, 0.2)).unwrap();
    let r = uniform_fs_bound(&inputs, Some(0.001), Some(0.002)).unwrap();
    let values: Vec<f64> = r.terms.iter().map(|t| t.value).collect();
    for (got, want) in values.iter().zip([0.001, 0.008, 0.002, 0.061]) {
        assert!(close(*got, want, 1e-12), "{values:?}");
    }
    assert!(close(r.total_modulo_constant, 0.072, 1e-12));

    let fallback = BoundInputs::new(1.0, 1.0, 2.0, 0.5, 3.0, sums(0.05, 0.1, 0.2)).unwrap();
    let r = uniform_fs_bound(&fallback, None, Some(0.0)).unwrap();
    assert!(close(r.terms[0].value, 0.04, 1e-12));

    let zero = BoundInputs::new(1.0, 1.0, 2.0, 1.0, 3.0, sums(0.0, 0.0, 0.0)).unwrap();
    assert_eq!(uniform_fs_bound(&zero, Some(0.0), Some(0.0)).unwrap().total_modulo_constant, 0.0);
    assert!(uniform_fs_bound(&inputs, Some(1.5), None).is_err());
}

#[test]
fn nonuniform_bound_examples() {
    let inputs = BoundInputs::new(1.0, 1.0, 2.0, 1.0, 3.0, sums(0.05, 0.1, 0.2)).unwrap();
    let r = nonuniform_fs_bound(&inputs, 3.0).unwrap();
    let values: Vec<f64> = r.terms.iter().map(|t| t.value).collect();
    assert_eq!(values.len(), 4);
    assert_eq!(values[0], 0.0);
    assert!(close(values[1], 1e-6 / 27.0, 1e-12));
    assert_eq!(values[2], 0.0);
    assert!(close(values[3], 0.0706 * (-1.0f64).exp(), 1e-12));
    assert!(matches!(nonuniform_fs_bound(&inputs, 5.0), Err(Error::OutOfRange { .. })));
    assert!(nonuniform_fs_bound(&inputs, 0.5).is_err());
}

#[test]
fn nonuniform_gate_closes_on_heavy_tails() {
    let profile = MomentProfile::from_sums(
        vec![(1.5, Moment::exact(0.05)), (2.0, Moment::exact(0.1)), (3.0, Moment::exact(0.2))],
        TailSum::iid(10, 1.0, NormLaw::weighted(vec![(5.0, 1.0)])),
    );
    let inputs = BoundInputs::new(1.0, 1.0, 2.0, 1.0, 3.0, profile).unwrap();
    let r = nonuniform_fs_bound(&inputs, 2.0).unwrap();
    assert_eq!(r.terms.len(), 2);
    assert!(!r.notes.is_empty());
}

#[test]
fn linear_be_examples() {
    let quarter = PairLaw::diagonal(&DiscreteLaw::symmetric_pair(0.5));
    let b = linear_be_bound(&vec![quarter; 4], 0.0, 3.0).unwrap();
    assert!(close(b.b1, 0.5, 1e-12));
    let single = vec![PairLaw::diagonal(&DiscreteLaw::symmetric_pair(1.0))];
    assert!(close(linear_be_bound(&single, 1.0, 3.0).unwrap().b1, 0.125, 1e-12));

    let bad = vec![PairLaw::new(vec![(2.0, 1.0, 0.5), (-2.0, -1.0, 0.5)]).unwrap()];
    assert!(linear_be_bound(&bad, 0.0, 3.0).is_err());
}

#[test]
fn iid_constants_examples() {
    let model = ModelScalars { norm_l: 1.0, sigma1: 1.0, m: 4.0, epsilon: 0.5 };
    let (a1, a2) = iid_p3_constants(&model, 1.0, 1.2, 100).unwrap();
    assert!(close(a1, 1.808, 1e-12) && close(a2, 10.1376, 1e-12));
    let (a1_inf, _) = iid_p3_constants(&model, 1.0, 1.2, usize::MAX).unwrap();
    assert!(close(a1_inf, 1.728, 1e-12));
    let degenerate = ModelScalars { sigma1: 0.0, ..model };
    assert!(matches!(iid_p3_constants(&degenerate, 1.0, 1.2, 100), Err(Error::Degenerate { .. })));
}

#[test]
fn suboptimal_examples() {
    let norms = SuboptimalNorms { v2: 1.3, vp: 1.7, lv: 1.1, sigma1: 0.9 };
    for n in [10_000usize, 1_000_000, 100_000_000] {
        let r = suboptimal_exp_bound(n, 3.0, norms, 2.0, 0.5, DEFAULT_BE_CONSTANT).unwrap();
        let nf = n as f64;
        assert!(close(r.term("exponential").unwrap(), 1.0 / nf, 1e-9), "n = {n}");
        let e = std::f64::consts::E;
        let want = 1.7f64.powi(3) * nf.ln().powf(1.5) / (e.powi(3) * nf.sqrt() * 1.3f64.powi(3));
        assert!(close(r.term("truncation").unwrap(), want, 1e-12));
    }
    // with D = 1 the truncated-mean check passes for every n >= 3
    for n in [3usize, 5, 50] {
        for p in [2.5, 3.0] {
            let r = suboptimal_exp_bound(n, p, norms, 2.0, 0.5, DEFAULT_BE_CONSTANT).unwrap();
            assert!(r.term("trivial").is_none() && r.term("exponential").is_some());
        }
    }
    assert!(suboptimal_exp_bound(100, 2.0, norms, 2.0, 0.5, DEFAULT_BE_CONSTANT).is_err());
}

#[test]
fn scale_by_one_is_identity() {
    let inputs = BoundInputs::new(1.3, 0.7, 2.0, 0.5, 3.0, sums(0.05, 0.1, 0.2)).unwrap();
    let same = scale_inputs(&inputs, 1.0, 0.0).unwrap();
    assert_eq!(same.norm_l, inputs.norm_l);
    assert_eq!(same.sigma, inputs.sigma);
    assert_eq!(same.profile.s(3.0).unwrap(), inputs.profile.s(3.0).unwrap());
}

fn family() -> impl Strategy<Value = DiscreteFamily> {
    (prop::collection::vec((0.01f64..0.3, 0.05f64..0.5), 1..4), 2usize..30).prop_map(|(atoms, n)| {
        let law = DiscreteLaw::new(
            atoms.iter().flat_map(|a| [a.0, -a.0]).collect(),
            atoms.iter().flat_map(|a| [a.1, a.1]).map(|p| p / (2.0 * atoms.iter().map(|a| a.1).sum::<f64>())).collect(),
        )
        .unwrap_or_else(|_| DiscreteLaw::symmetric_pair(0.1));
        DiscreteFamily::iid(law, n).unwrap()
    })
}

fn inputs_strategy() -> impl Strategy<Value = BoundInputs> {
    (family(), 0.2f64..3.0, 0.05f64..2.0, 0.2f64..10.0, 0.1f64..2.0, prop::sample::select(vec![2.5, 3.0, 4.0])).prop_map(
        |(fam, l, sigma, m, eps, p)| {
            let profile = MomentProfile::from_family(&fam, &BoundInputs::required_alphas(p));
            BoundInputs::new(l, sigma, m, eps, p, profile).unwrap()
        },
    )
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn reports_are_nonnegative_and_sum(inputs in inputs_strategy()) {
        let mut reports = vec![uniform_fs_bound(&inputs, None, None).unwrap()];
        if inputs.z_max() >= 1.0 {
            reports.push(nonuniform_fs_bound(&inputs, 1.0).unwrap());
        }
        for r in reports {
            prop_assert!(r.terms.iter().all(|t| t.value >= 0.0));
            let total: f64 = r.terms.iter().map(|t| t.value).sum();
            prop_assert!((total - r.total_modulo_constant).abs() <= 1e-12 * total.max(1.0));
        }
    }

    #[test]
    fn every_term_is_unit_free(inputs in inputs_strategy(), c in prop::sample::select(vec![0.5, 2.0, 10.0]), d in prop::sample::select(vec![-1.0, 0.0, 1.0])) {
        let scaled = scale_inputs(&inputs, c, d).unwrap();
        let a = uniform_fs_bound(&inputs, None, None).unwrap();
        let b = uniform_fs_bound(&scaled, None, None).unwrap();
        let mut pairs: Vec<(f64, f64)> = a.terms.iter().zip(&b.terms).map(|(x, y)| (x.value, y.value)).collect();
        let zmax = inputs.z_max();
        if zmax >= 1.0 {
            for z in [1.0, 0.5 * (1.0 + zmax), -(1.0 + 0.999 * (zmax - 1.0))] {
                let a = nonuniform_fs_bound(&inputs, z).unwrap();
                let b = nonuniform_fs_bound(&scaled, z).unwrap();
                prop_assert_eq!(a.terms.len(), b.terms.len());
                pairs.extend(a.terms.iter().zip(&b.terms).map(|(x, y)| (x.value, y.value)));
            }
        }
        for (x, y) in pairs {
            prop_assert!((x - y).abs() <= 1e-10 * x.abs().max(y.abs()), "{} vs {}", x, y);
        }
    }

    #[test]
    fn gate_consistency(inputs in inputs_strategy()) {
        let (g, g1) = gamma_terms(&inputs).unwrap();
        prop_assert!(g1 >= g);
        prop_assert!(inputs.q_tilde() > inputs.q() && inputs.q() > 1.0);
        prop_assert!(inputs.c1() * inputs.epsilon >= inputs.norm_l * (1.0 - 1e-15));
    }

    #[test]
    fn nonuniform_total_decreases_with_zero_tails(s2 in 0.0f64..0.5, s3 in 0.0f64..0.5, s15 in 0.0f64..0.5, p in prop::sample::select(vec![2.5, 3.0, 4.0]), a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let q = p / (p - 1.0);
        let alphas = BoundInputs::required_alphas(p);
        let profile = MomentProfile::from_sums(
            alphas.iter().map(|&al| (al, Moment::exact(if al == 2.0 { s2 } else if al == q { s15 } else { s3 }))).collect(),
            TailSum::zero(),
        );
        let inputs = BoundInputs::new(1.0, 0.1, 2.0, 1.0, p, profile).unwrap();
        let zmax = inputs.z_max();
        let (lo, hi) = (1.0 + a.min(b) * (zmax - 1.0), 1.0 + a.max(b) * (zmax - 1.0));
        let t_lo = nonuniform_fs_bound(&inputs, lo).unwrap().total_modulo_constant;
        let t_hi = nonuniform_fs_bound(&inputs, hi).unwrap().total_modulo_constant;
        prop_assert!(t_hi <= t_lo * (1.0 + 1e-12));
    }

    #[test]
    fn b1_is_nonincreasing_in_z(atoms in prop::collection::vec(0.01f64..3.0, 1..5), z1 in 0.0f64..10.0, z2 in 0.0f64..10.0) {
        let pairs: Vec<PairLaw> = atoms.iter().map(|&a| PairLaw::diagonal(&DiscreteLaw::symmetric_pair(a))).collect();
        let (lo, hi) = if z1.abs() <= z2.abs() { (z1, z2) } else { (z2, z1) };
        prop_assert!(linear_be_bound(&pairs, hi, 3.0).unwrap().b1 <= linear_be_bound(&pairs, lo, 3.0).unwrap().b1);
    }

    #[test]
    fn delta_solves_its_equation(fam in family()) {
        let v = fam.variance_sum();
        let scaled = DiscreteFamily::new(fam.components.iter().map(|c| c.scaled(1.0 / v.sqrt())).collect()).unwrap();
        let s = linearization_scalars(&scaled, 3.0).unwrap();
        let lhs: f64 = scaled.components.iter().map(|c| c.expect(|x| x.abs() * s.delta.min(x.abs()))).sum();
        prop_assert!((0.5..=0.5 + 1e-8).contains(&lhs), "sum at delta = {}", lhs);
    }
}
