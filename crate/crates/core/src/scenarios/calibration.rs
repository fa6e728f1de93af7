use serde::{Deserialize, Serialize};

use crate::chain::{Detector, OpticalChain, DEFAULT_TRANSMITTANCE};
use crate::distributions::DistributionKind;
use crate::error::Result;
use crate::estimate::G2Estimate;
use crate::rng::SeedStream;
use crate::scenarios::hbt::{run_hbt, HbtConfig};

/// Standard error above which a calibration is flagged as noise dominated.
pub const NOISE_DOMINATED_STD_ERROR: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CalibrationResult {
    pub estimate: G2Estimate,
    /// Noiseless mean signal expected in each channel, nV·s.
    pub mean_signal_per_channel: f64,
    pub noise_sigma: f64,
    /// Electronic noise exceeds the per-channel signal, or the standard
    /// error exceeds [`NOISE_DOMINATED_STD_ERROR`].
    pub noise_dominated: bool,
}

/// Coherent (Poisson) light through a 50:50 beamsplitter and `detector`.
pub fn run_calibration(
    mean_photons: f64,
    pulses: usize,
    detector: Detector,
    stream: SeedStream,
) -> Result<CalibrationResult> {
    let chain = OpticalChain::hbt(detector, DEFAULT_TRANSMITTANCE)?;
    let config = HbtConfig {
        chain,
        ..HbtConfig::new(DistributionKind::Poisson, mean_photons, pulses)
    };
    let run = run_hbt(&config, stream)?;
    let mean_signal_per_channel = detector.volts_per_photon * mean_photons * DEFAULT_TRANSMITTANCE;
    let noise_sigma = detector.noise_sigma();
    Ok(CalibrationResult {
        estimate: run.estimate,
        mean_signal_per_channel,
        noise_sigma,
        noise_dominated: noise_sigma >= mean_signal_per_channel || run.estimate.std_error > NOISE_DOMINATED_STD_ERROR,
    })
}
