use chaining_core::dist::{check_alpha_regular, check_speed_beta, DistributionModel, DEFAULT_P_GRID};
use chaining_core::metric::ProcessSpec;
use chaining_core::stochlab::RngStream;
use chaining_core::tailkit::{
    build_surrogates, convex_minorant, convexity_violations, envelope_sandwich, growth_constant, log_grid, regularity_constants,
    tail_cap, TailFunction,
};
use proptest::prelude::*;

#[test]
fn sandwich_on_certified_models() {
    for (model, alpha) in [
        (DistributionModel::gaussian(), 1.0),
        (DistributionModel::sym_exponential(), 1.0),
        (DistributionModel::sym_weibull(1.5).unwrap(), 1.0),
    ] {
        let r = envelope_sandwich(&model, alpha, 256).unwrap();
        assert_eq!(r.rows.len(), 256);
        assert!(r.passed(), "{}: {} violations", model.name(), r.violations);
        assert_eq!(r.convexity_violations, 0);
    }
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 16, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn minorant_sandwich_for_power_tails(k in 1.0f64..3.0, c in 2.0f64..4.0, t0 in 0.0f64..2.0) {
        let f = TailFunction::power(1.0, k);
        let g = convex_minorant(&f, c, t0).unwrap();
        prop_assert_eq!(g.value(c * t0), 0.0);
        let grid = log_grid(c * t0 + 1e-3, 50.0 * (c * t0 + 1.0), 200);
        for &t in &grid {
            prop_assert!(g.value(t) <= f.value(t) + 1e-8 * (1.0 + f.value(t)));
            prop_assert!(f.value(t) <= g.value(c * c * t) + 1e-8 * (1.0 + f.value(t)));
        }
        prop_assert_eq!(convexity_violations(&g, &grid), 0);
    }

    #[test]
    fn constants_scale_cubically(a in 1.0f64..10.0) {
        let k = regularity_constants(a).unwrap();
        let one = regularity_constants(1.0f64).unwrap();
        prop_assert!((k.threshold / one.threshold - a.powi(3)).abs() < 1e-9 * a.powi(3));
        prop_assert!((k.dilation - k.kappa * k.kappa).abs() < 1e-9 * k.dilation);
    }

    #[test]
    fn tail_cap_bounds_regular_models(shape in 1.0f64..2.0) {
        // every standardized model in R_α ∩ S_β obeys N(s) ≤ cap for s < 2^{k−1}
        let model = DistributionModel::sym_weibull(shape).unwrap();
        let (alpha, beta) = (1.0, 8.0);
        prop_assume!(check_alpha_regular(&model, alpha, &DEFAULT_P_GRID).unwrap().verdict.passed());
        prop_assume!(check_speed_beta(&model, beta, &DEFAULT_P_GRID).unwrap().verdict.passed());
        for k in 2..5 {
            let cap = tail_cap(alpha, beta, k);
            let s = 2f64.powi(k - 1) * 0.999;
            prop_assert!(model.tail_value(s).unwrap() <= cap);
        }
    }
}

#[test]
fn growth_constant_examples() {
    let g = growth_constant(1.0f64, 2.0, 2.0).unwrap();
    assert_eq!(g.k, 3);
    assert!((g.c - 17.0).abs() < 1e-12);
}

#[test]
fn coupled_surrogates_hold_pathwise() {
    let proc = ProcessSpec::new(vec![DistributionModel::gaussian(), DistributionModel::sym_exponential()]).unwrap();
    let fam = build_surrogates(&proc, 1.0, 8.0).unwrap();
    for i in 0..2 {
        for d in fam.sample(i, RngStream::new(3, i as u64), 20_000).unwrap() {
            let rel = 1e-9 * (1.0 + d.y.abs());
            assert!(d.y.abs() + rel >= d.x_tilde.abs() && d.x_tilde.abs() >= d.x.abs());
            assert!((d.y - d.z).abs() <= 2.0 * fam.t_alpha + rel);
        }
        assert!(fam.tilde_growth_check(i, 256).unwrap().pass);
    }
}
