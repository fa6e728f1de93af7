use bsv_sim::modes::{
    compose_fractional_m, fit_gain, mean_photons_from_gain, reduce_g2, two_mode_ratio, ModeComposition, ModeGeometry,
};
use bsv_sim::scenarios::{expected_hbt_g2, run_hbt, synthesize_gain_curve, GainCurveConfig, HbtConfig};
use bsv_sim::{DistributionKind, SeedStream};
use proptest::prelude::*;

fn hbt(kind: DistributionKind, mean: f64, m: f64, seed: u64) -> bsv_sim::G2Estimate {
    let cfg = HbtConfig {
        m,
        ..HbtConfig::new(kind, mean, 1_000_000)
    };
    run_hbt(&cfg, SeedStream::new(seed)).unwrap().estimate
}

#[test]
fn equal_thermal_modes_follow_one_over_k() {
    for k in [1usize, 2, 5, 10] {
        let e = hbt(DistributionKind::Thermal, 1000.0, k as f64, 20 + k as u64);
        let want = 1.0 + 1.0 / k as f64;
        assert!(e.z_score(want) < 3.0, "k = {k}: {e:?} vs {want}");
    }
}

#[test]
fn fractional_composition_matches_reduction_law() {
    let comp = compose_fractional_m(1.25, 8000.0).unwrap();
    assert!((comp.effective_mode_count() - 1.25).abs() < 1e-10);

    let th = hbt(DistributionKind::Thermal, 8000.0, 1.25, 31);
    assert!(th.z_score(1.8) < 3.0, "thermal {th:?}");

    let sv = hbt(DistributionKind::SqueezedVacuum, 8000.0, 1.25, 32);
    let want = expected_hbt_g2(DistributionKind::SqueezedVacuum, &comp);
    assert!((want - 2.6).abs() < 1e-3, "{want}");
    assert!(sv.z_score(want) < 3.0, "squeezed {sv:?} vs {want}");
    assert!(sv.z_score(2.6) < 3.0, "squeezed {sv:?}");
}

#[test]
fn single_mode_is_unreduced() {
    for g in [1.0, 2.0, 3.01, 7.5] {
        assert_eq!(reduce_g2(g, 1.0).unwrap(), g);
    }
    assert!((reduce_g2(2.0, 1.25).unwrap() - 1.8).abs() < 1e-15);
    assert!((reduce_g2(3.0, 1.25).unwrap() - 2.6).abs() < 1e-15);
    assert_eq!(reduce_g2(3.0, f64::INFINITY).unwrap(), 1.0);
    assert!(reduce_g2(2.0, 0.5).is_err());
}

#[test]
fn gain_law_reaches_the_bright_regime() {
    let n = mean_photons_from_gain(15.8).unwrap();
    assert!((n / 1.3e13 - 1.0).abs() < 0.05, "{n}");
}

#[test]
fn gain_fit_round_trip() {
    let cfg = GainCurveConfig::default();
    for seed in 0..20 {
        let (p, s) = synthesize_gain_curve(&cfg, SeedStream::new(seed)).unwrap();
        let fit = fit_gain(&p, &s).unwrap();
        assert!(!fit.degenerate);
        assert!((fit.gamma_max - 15.8).abs() < 0.3, "seed {seed}: {fit:?}");
        assert!(fit.gamma_std_error > 0.0 && fit.gamma_std_error < 0.3);
        let rel = fit.model(cfg.max_power) / mean_photons_from_gain(15.8).unwrap() - 1.0;
        assert!(rel.abs() < 0.05, "seed {seed}: {rel}");
    }
}

#[test]
fn weak_gain_is_flagged_degenerate() {
    let cfg = GainCurveConfig {
        gamma_max: 0.05,
        relative_noise: 0.0,
        ..GainCurveConfig::default()
    };
    let (p, s) = synthesize_gain_curve(&cfg, SeedStream::new(1)).unwrap();
    assert!(fit_gain(&p, &s).unwrap().degenerate);
}

#[test]
fn geometry_counts_modes() {
    let g = ModeGeometry::from_angles_and_bandwidths(1.0, 1.0, 1.0, 1.0).unwrap();
    assert_eq!(g.effective_mode_count(), 1.0);
    let g = ModeGeometry::from_angles_and_bandwidths(2.0, 1.0, 3.0, 1.0).unwrap();
    assert!((g.effective_mode_count() - 12.0).abs() < 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn composition_realises_target_m(m in 1.0f64..50.0, total in 1e-3f64..1e13) {
        let c = compose_fractional_m(m, total).unwrap();
        prop_assert!((c.effective_mode_count() - m).abs() < 1e-10 * m);
        prop_assert!((c.total_mean() / total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_mode_ratio_is_a_fraction(m in 1.0001f64..2.0) {
        let x = two_mode_ratio(m).unwrap();
        prop_assert!(x > 0.0 && x < 1.0);
        prop_assert!(((1.0 + x).powi(2) / (1.0 + x * x) - m).abs() < 1e-10);
    }

    #[test]
    fn reduction_stays_between_one_and_g(g in 1.0f64..10.0, m in 1.0f64..1e6) {
        let r = reduce_g2(g, m).unwrap();
        prop_assert!(r >= 1.0 && r <= g);
    }

    #[test]
    fn equal_split_has_k_modes(k in 1usize..40, total in 1e-3f64..1e9) {
        let c = ModeComposition::equal(k, total).unwrap();
        prop_assert!((c.effective_mode_count() - k as f64).abs() < 1e-9 * k as f64);
    }
}
