//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails.

mod common;

use std::process::ExitCode;
use std::time::Instant;

use bsv_sim::chain::{apply_loss, DEFAULT_VOLTS_PER_PHOTON};
use bsv_sim::estimate::photon_number_g2;
use bsv_sim::modes::{fit_gain, mean_photons_from_gain};
use bsv_sim::scenarios::{
    run_calibration, run_hbt, run_histogram, run_scan, synthesize_gain_curve, GainCurveConfig, HbtConfig,
    HistogramConfig, ScanConfig, ScanCoordinate, SignalSource,
};
use bsv_sim::{Detector, DistributionKind, OpticalChain, PhotonDistribution, SeedStream};
use common::{brute_force_moments, chi_square_p_value};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

/// Photon-level HBT: detector noise is switched off, as the default noise
/// (σ ≈ 4.2 nV·s) swamps signals of a few photons (≈ 0.004 nV·s each).
fn noiseless() -> OpticalChain {
    OpticalChain::hbt(Detector::noiseless(DEFAULT_VOLTS_PER_PHOTON).unwrap(), 0.5).unwrap()
}

fn hbt(kind: DistributionKind, mean: f64, m: f64, chain: OpticalChain, seed: u64) -> bsv_sim::G2Estimate {
    let cfg = HbtConfig {
        m,
        chain,
        ..HbtConfig::new(kind, mean, 1_000_000)
    };
    run_hbt(&cfg, SeedStream::new(seed))
        .expect("valid configuration")
        .estimate
}

fn superbunching() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (i, n) in [1.0, 10.0, 100.0].into_iter().enumerate() {
        let t = Instant::now();
        let e = hbt(DistributionKind::SqueezedVacuum, n, 1.0, noiseless(), 100 + i as u64);
        let secs = t.elapsed().as_secs_f64();
        let z = e.z_score(3.0 + 1.0 / n);
        ok &= z < 3.0 && secs < 10.0;
        notes.push(format!("N={n}: {:.4}±{:.4} (z {z:.2}, {secs:.2}s)", e.g2, e.std_error));
    }
    check(ok, notes.join("; "))
}

fn thermal_bunching() -> Outcome {
    let e = hbt(DistributionKind::Thermal, 100.0, 1.0, noiseless(), 200);
    check(
        (e.g2 - 2.0).abs() <= 0.02,
        format!("g2 = {:.4}±{:.4}", e.g2, e.std_error),
    )
}

fn multimode_reduction() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for k in [1usize, 2, 5, 10] {
        let e = hbt(
            DistributionKind::Thermal,
            1000.0,
            k as f64,
            OpticalChain::default(),
            300 + k as u64,
        );
        let want = 1.0 + 1.0 / k as f64;
        ok &= e.z_score(want) < 3.0;
        notes.push(format!("k={k}: {:.4}±{:.4}", e.g2, e.std_error));
    }
    for (kind, want, seed) in [
        (DistributionKind::Thermal, 1.8, 311),
        (DistributionKind::SqueezedVacuum, 2.6, 312),
    ] {
        let e = hbt(kind, 8000.0, 1.25, OpticalChain::default(), seed);
        ok &= e.z_score(want) < 3.0;
        notes.push(format!("m=1.25 {kind:?}: {:.4}±{:.4}", e.g2, e.std_error));
    }
    check(ok, notes.join("; "))
}

fn coherent_calibration() -> Outcome {
    let c = run_calibration(8000.0, 1_000_000, Detector::default(), SeedStream::new(400)).map_err(|e| e.to_string())?;
    check(
        (c.estimate.g2 - 1.0).abs() <= 0.010,
        format!("g2 = {:.4}±{:.4}", c.estimate.g2, c.estimate.std_error),
    )
}

fn gain_law() -> Outcome {
    let n = mean_photons_from_gain(15.8).map_err(|e| e.to_string())?;
    let (p, s) = synthesize_gain_curve(&GainCurveConfig::default(), SeedStream::new(500)).map_err(|e| e.to_string())?;
    let fit = fit_gain(&p, &s).map_err(|e| e.to_string())?;
    check(
        (n / 1.3e13 - 1.0).abs() < 0.05 && (fit.gamma_max - 15.8).abs() <= 0.3,
        format!(
            "N(15.8) = {n:.4e}; fitted Γ = {:.3}±{:.3}",
            fit.gamma_max, fit.gamma_std_error
        ),
    )
}

fn scan_round_trip() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (i, (coord, tol)) in [(ScanCoordinate::AngleMrad, 0.3), (ScanCoordinate::WavelengthNm, 0.03)]
        .into_iter()
        .enumerate()
    {
        let cfg = ScanConfig::standard(coord);
        let r = run_scan(&cfg, SeedStream::new(600 + i as u64)).map_err(|e| e.to_string())?;
        match r.fit {
            Some(f) => {
                ok &= (f.fwhm.value - cfg.profile_fwhm).abs() <= tol;
                notes.push(format!(
                    "{coord:?}: fwhm {:.4}±{:.4} {}",
                    f.fwhm.value,
                    f.fwhm.std_error,
                    coord.unit()
                ));
            }
            None => {
                ok = false;
                notes.push(format!("{coord:?}: {}", r.fit_error.unwrap_or_default()));
            }
        }
    }
    check(ok, notes.join("; "))
}

fn loss_invariance() -> Outcome {
    let mut notes = Vec::new();
    let mut ok = true;
    for (i, kind) in [DistributionKind::Thermal, DistributionKind::SqueezedVacuum]
        .into_iter()
        .enumerate()
    {
        let d = PhotonDistribution::new(kind, 20.0).unwrap();
        let before = d
            .sample(SeedStream::new(700 + i as u64), 1_000_000)
            .map_err(|e| e.to_string())?;
        let g0 = photon_number_g2(&before).map_err(|e| e.to_string())?;
        for (j, eta) in [0.1, 0.5, 0.9].into_iter().enumerate() {
            let mut rng = SeedStream::new(710).child((3 * i + j) as u64).rng();
            let after: Vec<f64> = before.iter().map(|&n| apply_loss(n, eta, &mut rng)).collect();
            let g = photon_number_g2(&after).map_err(|e| e.to_string())?;
            let z = (g.g2 - g0.g2).abs() / g.std_error.hypot(g0.std_error);
            ok &= z < 3.0;
            notes.push(format!("{kind:?} η={eta}: z {z:.2}"));
        }
    }
    check(ok, notes.join("; "))
}

fn oracle_equivalence() -> Outcome {
    let mut worst_p: f64 = 1.0;
    let mut worst_rel: f64 = 0.0;
    for (i, kind) in [
        DistributionKind::Thermal,
        DistributionKind::SqueezedVacuum,
        DistributionKind::Poisson,
    ]
    .into_iter()
    .enumerate()
    {
        for (j, mean) in [0.1, 1.0, 10.0, 100.0].into_iter().enumerate() {
            let d = PhotonDistribution::new(kind, mean).unwrap();
            let s = d
                .sample(SeedStream::new(800).child((4 * i + j) as u64), 1_000_000)
                .unwrap();
            worst_p = worst_p.min(chi_square_p_value(&d, &s));
            let m = d.moments();
            let (m1, m2) = brute_force_moments(&d);
            for rel in [m1 / m.mean - 1.0, (m2 - m1 * m1) / m.variance - 1.0] {
                worst_rel = worst_rel.max(rel.abs());
            }
        }
    }
    check(
        worst_p > 1e-3 && worst_rel < 1e-8,
        format!("min chi-square p = {worst_p:.4}; max moment deviation = {worst_rel:.2e}"),
    )
}

fn noise_model() -> Outcome {
    let h = run_histogram(
        &HistogramConfig::new(SignalSource::Dark, 0.0, 1_000_000),
        SeedStream::new(900),
    )
    .map_err(|e| e.to_string())?;
    let fit = h.fit_peak().map_err(|e| e.to_string())?;
    let s = bsv_sim::chain::detect(8000.0, &noiseless().detector(), &mut SeedStream::new(0).rng());
    check(
        (fit.fwhm.value - 10.0).abs() <= 0.3 && (s - 70.0).abs() <= f64::EPSILON * 70.0,
        format!(
            "dark FWHM {:.3}±{:.3} nV·s; 8000 photons → {s} nV·s",
            fit.fwhm.value, fit.fwhm.std_error
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("superbunching 3 + 1/N", superbunching),
        ("thermal bunching 2.00 ± 0.02", thermal_bunching),
        ("multimode reduction", multimode_reduction),
        ("coherent calibration 1.000 ± 0.010", coherent_calibration),
        ("gain law and gain-fit round trip", gain_law),
        ("scan round trip", scan_round_trip),
        ("loss invariance", loss_invariance),
        ("oracle equivalence", oracle_equivalence),
        ("noise model", noise_model),
    ];
    let mut failures = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        match run() {
            Ok(detail) => println!("PASS {}: {name} ({detail})", i + 1),
            Err(detail) => {
                failures += 1;
                println!("FAIL {}: {name} ({detail})", i + 1);
            }
        }
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failures,
        criteria.len()
    );
    if failures == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
