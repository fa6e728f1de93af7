use serde::{Deserialize, Serialize};

use crate::chain::{OpticalChain, PulseRecord};
use crate::distributions::{DistributionKind, PhotonDistribution};
use crate::error::{Error, Result};
use crate::estimate::{estimate_g2, G2Estimate};
use crate::modes::{compose_fractional_m, ModeComposition};
use crate::rng::{simulate_pulses, SeedStream};
use crate::source::MultimodeSource;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HbtConfig {
    pub kind: DistributionKind,
    /// Total mean photons per pulse over all detected modes.
    pub mean_photons: f64,
    pub pulses: usize,
    /// Effective number of detected modes.
    pub m: f64,
    pub chain: OpticalChain,
}

impl HbtConfig {
    pub fn new(kind: DistributionKind, mean_photons: f64, pulses: usize) -> Self {
        HbtConfig {
            kind,
            mean_photons,
            pulses,
            m: 1.0,
            chain: OpticalChain::default(),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.mean_photons > 0.0 && self.mean_photons.is_finite()) {
            return Err(Error::InvalidMean(self.mean_photons));
        }
        if self.pulses < 2 {
            return Err(Error::param("pulses must be at least 2"));
        }
        if !(self.m >= 1.0 && self.m.is_finite()) {
            return Err(Error::param(format!("m must be a finite number ≥ 1 (got {})", self.m)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone)]
pub struct HbtRun {
    pub estimate: G2Estimate,
    pub expected_g2: f64,
    pub composition: ModeComposition,
    pub records: Vec<PulseRecord>,
}

/// Normally ordered g⁽²⁾ of independent modes of one kind:
/// 1 + Σ (gᵢ − 1)·(Nᵢ/N)². For the twin beam this is the cross-correlation
/// of the conjugate channels, gᵢ = 2 + 1/Nᵢ.
pub fn expected_hbt_g2(kind: DistributionKind, composition: &ModeComposition) -> f64 {
    let total = composition.total_mean();
    1.0 + composition
        .per_mode_means()
        .iter()
        .map(|&n| {
            let g = match kind {
                DistributionKind::TwinBeamJoint => 2.0 + 1.0 / n,
                _ => {
                    PhotonDistribution::new(kind, n)
                        .expect("composition means are positive")
                        .moments()
                        .g2
                }
            };
            (g - 1.0) * (n / total).powi(2)
        })
        .sum::<f64>()
}

/// Simulates an HBT measurement: `m` effective modes of `kind`, through the
/// chain, into the ratio estimator. Twin beams send signal and idler to the
/// two detectors directly.
pub fn run_hbt(config: &HbtConfig, stream: SeedStream) -> Result<HbtRun> {
    config.validate()?;
    let composition = compose_fractional_m(config.m, config.mean_photons)?;
    let source = MultimodeSource::new(config.kind, &composition)?;
    let chain = &config.chain;
    let records = if config.kind == DistributionKind::TwinBeamJoint {
        simulate_pulses(config.pulses, stream, |rng| {
            chain.propagate_pair(source.draw_pair(rng), rng)
        })
    } else {
        simulate_pulses(config.pulses, stream, |rng| chain.propagate(source.draw(rng), rng))
    };
    let estimate = estimate_g2(&records)?;
    Ok(HbtRun {
        estimate,
        expected_g2: expected_hbt_g2(config.kind, &composition),
        composition,
        records,
    })
}
