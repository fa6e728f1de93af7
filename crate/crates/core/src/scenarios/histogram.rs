//! Single-detector signal histograms with a theoretical overlay.
//!
//! Bins have width `bin_width` (default 2 nV·s) with one bin centred on
//! zero signal, and cover the whole support: 8 noise σ below zero up to 8σ
//! above the signal of the photon-number truncation point. The overlay is
//! the photon-number law scaled by the detector conversion and convolved
//! with the Gaussian noise, integrated over each bin.

use serde::{Deserialize, Serialize};

use crate::chain::{detect, Detector};
use crate::distributions::{DistributionKind, PhotonDistribution, TAIL_EPSILON};
use crate::error::{Error, Result};
use crate::estimate::{photon_number_g2, G2Estimate};
use crate::rng::{simulate_pulses, SeedStream};
use crate::scenarios::fit::{fit_gaussian, GaussianFit};

pub const DEFAULT_BIN_WIDTH: f64 = 2.0;

/// Noise σ kept on either side of every signal value.
const NOISE_REACH: f64 = 8.0;

/// Sub-bin resolution of the photon-number envelope.
const ENVELOPE_CELLS_PER_BIN: f64 = 16.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignalSource {
    Thermal,
    SqueezedVacuum,
    /// No light: the electronic noise alone.
    Dark,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HistogramConfig {
    pub source: SignalSource,
    /// Mean noiseless signal, nV·s (ignored for [`SignalSource::Dark`]).
    pub mean_signal_nvs: f64,
    pub pulses: usize,
    pub detector: Detector,
    pub bin_width: f64,
}

impl HistogramConfig {
    pub fn new(source: SignalSource, mean_signal_nvs: f64, pulses: usize) -> Self {
        HistogramConfig {
            source,
            mean_signal_nvs,
            pulses,
            detector: Detector::default(),
            bin_width: DEFAULT_BIN_WIDTH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: u64,
    /// Fraction of pulses in the bin.
    pub probability: f64,
    /// Overlay probability of the bin.
    pub theory: f64,
}

impl HistogramBin {
    pub fn center(&self) -> f64 {
        0.5 * (self.lo + self.hi)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SignalHistogram {
    pub source: SignalSource,
    pub bin_width: f64,
    pub mean_photons: f64,
    pub pulses: usize,
    pub bins: Vec<HistogramBin>,
    pub underflow: u64,
    pub overflow: u64,
    /// Normally ordered g⁽²⁾ of the photon numbers behind the signals.
    pub photon_g2: Option<G2Estimate>,
}

impl SignalHistogram {
    pub fn theory_total(&self) -> f64 {
        self.bins.iter().map(|b| b.theory).sum()
    }

    /// Empirical fraction of pulses in bins starting at or above `threshold`.
    pub fn mass_from(&self, threshold: f64) -> f64 {
        let c: u64 = self.bins.iter().filter(|b| b.lo >= threshold).map(|b| b.count).sum();
        (c + self.overflow) as f64 / self.pulses as f64
    }

    pub fn theory_mass_from(&self, threshold: f64) -> f64 {
        self.bins.iter().filter(|b| b.lo >= threshold).map(|b| b.theory).sum()
    }

    /// Empirical fraction of pulses in bins ending at or below `threshold`.
    pub fn mass_below(&self, threshold: f64) -> f64 {
        let c: u64 = self.bins.iter().filter(|b| b.hi <= threshold).map(|b| b.count).sum();
        (c + self.underflow) as f64 / self.pulses as f64
    }

    /// Gaussian fit to the empirical probability density, e.g. to read off
    /// the noise FWHM of a dark histogram.
    pub fn fit_peak(&self) -> Result<GaussianFit> {
        let n = self.pulses as f64;
        let w = self.bin_width;
        let pts: Vec<_> = self
            .bins
            .iter()
            .map(|b| {
                (
                    b.center(),
                    b.count as f64 / (n * w),
                    (b.count.max(1) as f64).sqrt() / (n * w),
                )
            })
            .collect();
        fit_gaussian(&pts)
    }
}

fn normal_cdf(x: f64) -> f64 {
    0.5 * libm::erfc(-x / std::f64::consts::SQRT_2)
}

/// Photon-number law behind `source`, or `None` for the dark source.
fn photon_law(config: &HistogramConfig) -> Result<Option<PhotonDistribution>> {
    let kind = match config.source {
        SignalSource::Dark => return Ok(None),
        SignalSource::Thermal => DistributionKind::Thermal,
        SignalSource::SqueezedVacuum => DistributionKind::SqueezedVacuum,
    };
    if !(config.mean_signal_nvs > 0.0 && config.mean_signal_nvs.is_finite()) {
        return Err(Error::InvalidMean(config.mean_signal_nvs));
    }
    PhotonDistribution::new(kind, config.mean_signal_nvs / config.detector.volts_per_photon).map(Some)
}

/// Signal masses (position, probability) of the noiseless envelope on a
/// grid of `cell` nV·s, and the largest signal carrying mass.
fn envelope(law: Option<&PhotonDistribution>, v: f64, cell: f64) -> Result<(Vec<(f64, f64)>, f64)> {
    let Some(law) = law else {
        return Ok((vec![(0.0, 1.0)], 0.0));
    };
    if law.is_exact_regime() {
        let table = law.pmf_table()?;
        let top = v * (table.len() - 1) as f64;
        let cells = (top / cell).floor() as usize + 1;
        let mut mass = vec![0.0; cells];
        let mut moment = vec![0.0; cells];
        for (n, p) in table.iter().enumerate() {
            let s = v * n as f64;
            let k = ((s / cell) as usize).min(cells - 1);
            mass[k] += p;
            moment[k] += p * s;
        }
        let pts = mass
            .into_iter()
            .zip(moment)
            .filter(|(m, _)| *m > 0.0)
            .map(|(m, mo)| (mo / m, m))
            .collect();
        Ok((pts, top))
    } else {
        let mu = law.mean_photons();
        let mut top_photons = mu;
        while 1.0 - law.cdf_continuous(top_photons) > TAIL_EPSILON {
            top_photons *= 1.5;
        }
        let top = v * top_photons;
        let cells = (top / cell).ceil() as usize;
        let mut prev = 0.0;
        let mut pts = Vec::with_capacity(cells);
        for k in 0..cells {
            let hi = law.cdf_continuous((k + 1) as f64 * cell / v);
            if hi > prev {
                pts.push(((k as f64 + 0.5) * cell, hi - prev));
            }
            prev = hi;
        }
        Ok((pts, top))
    }
}

/// Simulates `config.pulses` single-detector signals and bins them.
pub fn run_histogram(config: &HistogramConfig, stream: SeedStream) -> Result<SignalHistogram> {
    config.detector.validate()?;
    if config.pulses < 2 {
        return Err(Error::param("pulses must be at least 2"));
    }
    if !(config.bin_width > 0.0 && config.bin_width.is_finite()) {
        return Err(Error::param("bin width must be positive"));
    }
    let law = photon_law(config)?;
    let det = config.detector;
    let bw = config.bin_width;
    let sigma = det.noise_sigma();

    let (cells, top) = envelope(law.as_ref(), det.volts_per_photon, bw / ENVELOPE_CELLS_PER_BIN)?;
    let lo = -((NOISE_REACH * sigma / bw).ceil() + 0.5) * bw;
    let hi = ((top + NOISE_REACH * sigma) / bw).ceil() * bw + 0.5 * bw;
    let nbins = ((hi - lo) / bw).round() as usize;
    let edge = |k: usize| lo + k as f64 * bw;
    let bin_of = |s: f64| ((s - lo) / bw).floor();

    let mut theory = vec![0.0; nbins];
    for (s, m) in cells {
        if sigma == 0.0 {
            let k = bin_of(s).clamp(0.0, (nbins - 1) as f64) as usize;
            theory[k] += m;
            continue;
        }
        let first = bin_of(s - NOISE_REACH * sigma).max(0.0) as usize;
        let last = (bin_of(s + NOISE_REACH * sigma).max(0.0) as usize).min(nbins - 1);
        let mut prev = normal_cdf((edge(first) - s) / sigma);
        for (k, t) in theory.iter_mut().enumerate().take(last + 1).skip(first) {
            let next = normal_cdf((edge(k + 1) - s) / sigma);
            *t += m * (next - prev);
            prev = next;
        }
    }

    let sampler = law.as_ref().map(|l| l.sampler()).transpose()?;
    let samples: Vec<(f64, f64)> = simulate_pulses(config.pulses, stream, |rng| {
        let n = sampler.as_ref().map_or(0.0, |s| s.draw(rng));
        (n, detect(n, &det, rng))
    });

    let mut counts = vec![0u64; nbins];
    let (mut underflow, mut overflow) = (0, 0);
    for &(_, s) in &samples {
        let k = bin_of(s);
        if k < 0.0 {
            underflow += 1;
        } else if k as usize >= nbins {
            overflow += 1;
        } else {
            counts[k as usize] += 1;
        }
    }
    let photon_g2 = match law {
        Some(_) => Some(photon_number_g2(&samples.iter().map(|p| p.0).collect::<Vec<_>>())?),
        None => None,
    };

    let pulses = config.pulses as f64;
    let bins = counts
        .into_iter()
        .zip(theory)
        .enumerate()
        .map(|(k, (count, t))| HistogramBin {
            lo: edge(k),
            hi: edge(k + 1),
            count,
            probability: count as f64 / pulses,
            theory: t,
        })
        .collect();

    Ok(SignalHistogram {
        source: config.source,
        bin_width: bw,
        mean_photons: law.map_or(0.0, |l| l.mean_photons()),
        pulses: config.pulses,
        bins,
        underflow,
        overflow,
        photon_g2,
    })
}
