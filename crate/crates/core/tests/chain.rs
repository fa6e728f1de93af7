mod common;

use bsv_sim::chain::{apply_loss, detect, split, ChainElement, DEFAULT_VOLTS_PER_PHOTON};
use bsv_sim::estimate::{estimate_g2, mean_with_error, photon_number_g2};
use bsv_sim::io::{read_records_binary, read_records_csv, write_records_binary, write_records_csv};
use bsv_sim::rng::simulate_pulses;
use bsv_sim::{Detector, DistributionKind, G2Estimate, OpticalChain, PhotonDistribution, PulseRecord, SeedStream};
use common::thinned_pmf;
use proptest::prelude::*;

const PULSES: usize = 1_000_000;

fn records(kind: DistributionKind, mean: f64, chain: &OpticalChain, seed: u64) -> Vec<PulseRecord> {
    let sampler = PhotonDistribution::new(kind, mean).unwrap().sampler().unwrap();
    simulate_pulses(PULSES, SeedStream::new(seed), |rng| {
        chain.propagate(sampler.draw(rng), rng)
    })
}

fn agree(a: &G2Estimate, b: &G2Estimate) -> bool {
    (a.g2 - b.g2).abs() < 3.0 * a.std_error.hypot(b.std_error)
}

fn noiseless_hbt(t: f64) -> OpticalChain {
    OpticalChain::hbt(Detector::noiseless(DEFAULT_VOLTS_PER_PHOTON).unwrap(), t).unwrap()
}

#[test]
fn loss_preserves_normally_ordered_g2() {
    let kinds = [
        DistributionKind::Thermal,
        DistributionKind::SqueezedVacuum,
        DistributionKind::Poisson,
    ];
    for (i, kind) in kinds.into_iter().enumerate() {
        let d = PhotonDistribution::new(kind, 20.0).unwrap();
        let before = d.sample(SeedStream::new(40 + i as u64), PULSES).unwrap();
        let g_before = photon_number_g2(&before).unwrap();
        for (j, eta) in [0.1, 0.5, 0.9].into_iter().enumerate() {
            let stream = SeedStream::new(50).child((3 * i + j) as u64);
            let mut rng = stream.rng();
            let after: Vec<f64> = before.iter().map(|&n| apply_loss(n, eta, &mut rng)).collect();
            let g_after = photon_number_g2(&after).unwrap();
            assert!(
                agree(&g_before, &g_after),
                "{kind:?} η={eta}: {g_before:?} vs {g_after:?}"
            );
            assert!((g_after.g2 - d.moments().g2).abs() < 3.0 * g_after.std_error + 1e-12);
        }
    }
}

#[test]
fn thinning_oracle_matches_closed_forms() {
    // a thinned thermal law is thermal with the reduced mean
    let th = PhotonDistribution::thermal(6.0).unwrap();
    let thinned = thinned_pmf(&th.pmf_table().unwrap(), 0.3);
    let want = PhotonDistribution::thermal(1.8).unwrap();
    for (k, p) in thinned.iter().enumerate().take(60) {
        assert!((p - want.pmf(k as u64).unwrap()).abs() < 1e-12, "k {k}");
    }
    // lossy squeezed vacuum acquires odd photon numbers, mean ηN
    let sv = PhotonDistribution::squeezed_vacuum(4.0).unwrap();
    let thinned = thinned_pmf(&sv.pmf_table().unwrap(), 0.5);
    assert!(thinned[1] > 0.05 && thinned[3] > 0.01);
    let mean: f64 = thinned.iter().enumerate().map(|(k, p)| k as f64 * p).sum();
    assert!((mean - 2.0).abs() < 1e-9);
}

#[test]
fn sampled_loss_matches_thinning_oracle() {
    let sv = PhotonDistribution::squeezed_vacuum(4.0).unwrap();
    let oracle = thinned_pmf(&sv.pmf_table().unwrap(), 0.5);
    let s = sv.sample(SeedStream::new(60), PULSES).unwrap();
    let mut rng = SeedStream::new(61).rng();
    let mut counts = vec![0u64; oracle.len()];
    for &n in &s {
        counts[apply_loss(n, 0.5, &mut rng) as usize] += 1;
    }
    assert!(counts[1] > 0 && counts[3] > 0, "odd numbers must appear after loss");
    for k in 0..12 {
        let expected = oracle[k] * PULSES as f64;
        let sd = expected.sqrt();
        assert!(
            (counts[k] as f64 - expected).abs() < 5.0 * sd,
            "k {k}: {} vs {expected}",
            counts[k]
        );
    }
}

#[test]
fn cross_correlation_is_independent_of_transmittance() {
    let mut ests = Vec::new();
    for (i, t) in [0.3, 0.5, 0.7].into_iter().enumerate() {
        let e = estimate_g2(&records(
            DistributionKind::Thermal,
            50.0,
            &noiseless_hbt(t),
            70 + i as u64,
        ))
        .unwrap();
        assert!(e.z_score(2.0) < 3.0, "T={t}: {e:?}");
        ests.push(e);
    }
    assert!(agree(&ests[0], &ests[2]), "{ests:?}");
}

#[test]
fn coherent_light_splits_uncorrelated() {
    let e = estimate_g2(&records(DistributionKind::Poisson, 50.0, &noiseless_hbt(0.5), 80)).unwrap();
    assert!(e.z_score(1.0) < 3.0, "{e:?}");
}

#[test]
fn thermal_split_oracle() {
    let e = estimate_g2(&records(DistributionKind::Thermal, 10.0, &noiseless_hbt(0.5), 81)).unwrap();
    assert!(e.z_score(2.0) < 3.0, "{e:?}");
}

#[test]
fn squeezed_vacuum_hbt_noiseless() {
    let e = estimate_g2(&records(
        DistributionKind::SqueezedVacuum,
        100.0,
        &noiseless_hbt(0.5),
        82,
    ))
    .unwrap();
    assert!(e.z_score(3.01) < 3.0, "{e:?}");
}

#[test]
fn estimator_is_scale_free() {
    let a = records(DistributionKind::Thermal, 30.0, &noiseless_hbt(0.5), 90);
    let chain = OpticalChain::hbt(Detector::noiseless(2.0 * DEFAULT_VOLTS_PER_PHOTON).unwrap(), 0.5).unwrap();
    let b = records(DistributionKind::Thermal, 30.0, &chain, 90);
    let (ga, gb) = (estimate_g2(&a).unwrap(), estimate_g2(&b).unwrap());
    assert!((ga.g2 - gb.g2).abs() < 1e-12 * ga.g2, "{ga:?} vs {gb:?}");
}

#[test]
fn default_noise_bias_is_below_one_percent() {
    let noisy = estimate_g2(&records(
        DistributionKind::Thermal,
        8000.0,
        &OpticalChain::default(),
        91,
    ))
    .unwrap();
    let clean = estimate_g2(&records(DistributionKind::Thermal, 8000.0, &noiseless_hbt(0.5), 91)).unwrap();
    assert!(
        ((noisy.g2 - clean.g2) / clean.g2).abs() < 0.01,
        "{noisy:?} vs {clean:?}"
    );
}

#[test]
fn coherent_calibration_level() {
    let e = estimate_g2(&records(
        DistributionKind::Poisson,
        8000.0,
        &OpticalChain::default(),
        92,
    ))
    .unwrap();
    assert!((e.g2 - 1.0).abs() < 0.01, "{e:?}");
}

#[test]
fn dark_noise_width() {
    let det = Detector::default();
    let s: Vec<f64> = simulate_pulses(PULSES, SeedStream::new(93), |rng| detect(0.0, &det, rng));
    let (mean, se) = mean_with_error(&s);
    let sd = se * (PULSES as f64).sqrt();
    assert!(mean.abs() < 5.0 * se);
    assert!((sd - 4.247).abs() < 0.02, "{sd}");
}

#[test]
fn noiseless_conversion() {
    let det = Detector::noiseless(DEFAULT_VOLTS_PER_PHOTON).unwrap();
    let s = detect(8000.0, &det, &mut SeedStream::new(0).rng());
    assert!((s - 70.0).abs() <= f64::EPSILON * 70.0, "{s}");
}

#[test]
fn chain_validation() {
    assert!(OpticalChain::hbt(Detector::default(), 1.0).is_err());
    assert!(OpticalChain::hbt(Detector::default(), 0.0).is_err());
    assert!(OpticalChain::default().with_input_loss(0.0).is_err());
    assert!(OpticalChain::new(vec![ChainElement::Detector(Detector::default())]).is_err());
    assert!(OpticalChain::new(vec![
        ChainElement::Detector(Detector::default()),
        ChainElement::Beamsplitter { transmittance: 0.5 },
    ])
    .is_err());
    assert!(Detector::new(0.0, 10.0).is_err());
    assert!(Detector::new(1.0, -1.0).is_err());
}

#[test]
fn chain_serde_round_trip_and_validation() {
    let chain = OpticalChain::default().with_input_loss(0.8).unwrap();
    let json = serde_json::to_string(&chain).unwrap();
    let back: OpticalChain = serde_json::from_str(&json).unwrap();
    assert_eq!(back, chain);
    let (a, b) = chain.arm_efficiencies();
    assert!((a - 0.4).abs() < 1e-15 && (b - 0.4).abs() < 1e-15);
    let bad = r#"[{"element":"beamsplitter","transmittance":1.5},{"element":"detector","volts_per_photon":1.0,"noise_fwhm":0.0}]"#;
    assert!(serde_json::from_str::<OpticalChain>(bad).is_err());
}

#[test]
fn record_files_round_trip() {
    let recs = records(DistributionKind::Thermal, 5.0, &OpticalChain::default(), 95)[..1000].to_vec();
    let dir = tempfile::tempdir().unwrap();

    let bin = dir.path().join("records.bin");
    write_records_binary(std::fs::File::create(&bin).unwrap(), &recs).unwrap();
    assert_eq!(std::fs::metadata(&bin).unwrap().len(), 16 * 1000);
    assert_eq!(read_records_binary(std::fs::File::open(&bin).unwrap()).unwrap(), recs);

    let csv = dir.path().join("records.csv");
    write_records_csv(std::fs::File::create(&csv).unwrap(), &recs).unwrap();
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("pulse_index,s1_nvs,s2_nvs\n0,"));
    assert_eq!(read_records_csv(text.as_bytes()).unwrap(), recs);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn split_conserves_photons(n in 0u64..1_000_000, t in 0.01f64..0.99, seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng();
        let (a, b) = split(n as f64, t, &mut rng);
        prop_assert_eq!(a + b, n as f64);
        prop_assert!(a >= 0.0 && b >= 0.0 && a.fract() == 0.0);
    }

    #[test]
    fn continuum_split_stays_in_range(n in 1e12f64..1e15, t in 0.01f64..0.99, seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng();
        let (a, b) = split(n, t, &mut rng);
        prop_assert!(a >= 0.0 && b >= 0.0 && a <= n);
        prop_assert!((a / n - t).abs() < 1e-4);
    }

    #[test]
    fn loss_never_creates_photons(n in 0u64..10_000_000, eta in 0.001f64..=1.0, seed in any::<u64>()) {
        let mut rng = SeedStream::new(seed).rng();
        let m = apply_loss(n as f64, eta, &mut rng);
        prop_assert!(m >= 0.0 && m <= n as f64);
    }
}
