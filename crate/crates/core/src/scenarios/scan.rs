//! Angular and spectral g⁽²⁾ scans across the degenerate point.
//!
//! At scan coordinate x the overlap weight w(x) = exp(−4·ln2·(x−c)²/f²)
//! is the probability that a pulse carries degenerate light (squeezed
//! vacuum, g⁽²⁾ = 3 + 1/N); otherwise it carries nondegenerate light
//! (thermal, g⁽²⁾ = 2). Both components share the mean N and the
//! composition realising `base_m` modes, so the measured profile is
//! exactly baseline + amplitude·w(x).

use serde::{Deserialize, Serialize};

use crate::chain::OpticalChain;
use crate::distributions::DistributionKind;
use crate::error::{Error, Result};
use crate::estimate::estimate_g2;
use crate::modes::compose_fractional_m;
use crate::rng::{simulate_pulses, SeedStream};
use crate::scenarios::fit::{fit_gaussian, GaussianFit};
use crate::scenarios::hbt::expected_hbt_g2;
use crate::source::{MixtureSource, MultimodeSource};

const FOUR_LN2: f64 = 4.0 * std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanCoordinate {
    AngleMrad,
    WavelengthNm,
}

impl ScanCoordinate {
    pub fn default_center(self) -> f64 {
        match self {
            ScanCoordinate::AngleMrad => 0.0,
            ScanCoordinate::WavelengthNm => 709.3,
        }
    }

    pub fn default_fwhm(self) -> f64 {
        match self {
            ScanCoordinate::AngleMrad => 4.1,
            ScanCoordinate::WavelengthNm => 0.22,
        }
    }

    /// 25 points spanning ±3 FWHM around the centre.
    pub fn default_points(self) -> Vec<f64> {
        let (c, step) = match self {
            ScanCoordinate::AngleMrad => (0.0, 1.0),
            ScanCoordinate::WavelengthNm => (709.3, 0.05),
        };
        (-12..=12).map(|i| c + i as f64 * step).collect()
    }

    pub fn unit(self) -> &'static str {
        match self {
            ScanCoordinate::AngleMrad => "mrad",
            ScanCoordinate::WavelengthNm => "nm",
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanConfig {
    pub coordinate: ScanCoordinate,
    pub points: Vec<f64>,
    pub center: f64,
    pub profile_fwhm: f64,
    pub pulses_per_point: usize,
    pub base_m: f64,
    pub mean_photons: f64,
    pub chain: OpticalChain,
}

impl ScanConfig {
    /// Defaults: m = 1.25, 8000 photons per pulse, 10⁵ pulses per point,
    /// default detectors.
    pub fn standard(coordinate: ScanCoordinate) -> Self {
        ScanConfig {
            coordinate,
            points: coordinate.default_points(),
            center: coordinate.default_center(),
            profile_fwhm: coordinate.default_fwhm(),
            pulses_per_point: 100_000,
            base_m: 1.25,
            mean_photons: 8000.0,
            chain: OpticalChain::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.points.is_empty() {
            return Err(Error::param("scan needs at least one point"));
        }
        if self.points.iter().any(|x| !x.is_finite()) || !self.center.is_finite() {
            return Err(Error::param("scan coordinates must be finite"));
        }
        if !(self.profile_fwhm > 0.0 && self.profile_fwhm.is_finite()) {
            return Err(Error::param("profile FWHM must be positive"));
        }
        if self.pulses_per_point < 1000 {
            return Err(Error::param("pulses per point must be at least 1000"));
        }
        if !(self.base_m >= 1.0 && self.base_m.is_finite()) {
            return Err(Error::param("base m must be a finite number ≥ 1"));
        }
        if !(self.mean_photons > 0.0 && self.mean_photons.is_finite()) {
            return Err(Error::InvalidMean(self.mean_photons));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScanPoint {
    pub index: usize,
    pub coordinate: f64,
    pub overlap_weight: f64,
    pub g2: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub fit: Option<GaussianFit>,
    pub fit_error: Option<String>,
}

pub fn overlap_weight(x: f64, center: f64, fwhm: f64) -> f64 {
    (-FOUR_LN2 * (x - center).powi(2) / (fwhm * fwhm)).exp()
}

/// Model g⁽²⁾ at coordinate `x` for `config`.
pub fn expected_scan_g2(config: &ScanConfig, x: f64) -> Result<f64> {
    let comp = compose_fractional_m(config.base_m, config.mean_photons)?;
    let w = overlap_weight(x, config.center, config.profile_fwhm);
    let sv = expected_hbt_g2(DistributionKind::SqueezedVacuum, &comp);
    let th = expected_hbt_g2(DistributionKind::Thermal, &comp);
    Ok(w * sv + (1.0 - w) * th)
}

/// Runs every scan point with stream `stream.child(index)` and fits
/// baseline + Gaussian. A failed fit is reported in `fit_error`; the
/// points are kept.
pub fn run_scan(config: &ScanConfig, stream: SeedStream) -> Result<ScanResult> {
    config.validate()?;
    let comp = compose_fractional_m(config.base_m, config.mean_photons)?;
    let squeezed = MultimodeSource::new(DistributionKind::SqueezedVacuum, &comp)?;
    let thermal = MultimodeSource::new(DistributionKind::Thermal, &comp)?;
    let chain = &config.chain;

    let mut points = Vec::with_capacity(config.points.len());
    for (index, &x) in config.points.iter().enumerate() {
        let w = overlap_weight(x, config.center, config.profile_fwhm);
        let source = MixtureSource::new(squeezed.clone(), thermal.clone(), w)?;
        let records = simulate_pulses(config.pulses_per_point, stream.child(index as u64), |rng| {
            chain.propagate(source.draw(rng), rng)
        });
        let est = estimate_g2(&records)?;
        points.push(ScanPoint {
            index,
            coordinate: x,
            overlap_weight: w,
            g2: est.g2,
            std_error: est.std_error,
        });
    }

    let data: Vec<_> = points.iter().map(|p| (p.coordinate, p.g2, p.std_error)).collect();
    let (fit, fit_error) = match fit_gaussian(&data) {
        Ok(f) => (Some(f), None),
        Err(e) => (None, Some(e.to_string())),
    };
    Ok(ScanResult { points, fit, fit_error })
}
