use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::modes::mean_photons_from_gain;
use crate::rng::SeedStream;

/// Synthetic PDC signal versus pump power, S(P) = A·sinh²(Γ_max·√(P/P_max)),
/// with multiplicative Gaussian noise.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainCurveConfig {
    pub gamma_max: f64,
    pub scale: f64,
    /// Highest pump power, mW.
    pub max_power: f64,
    pub points: usize,
    /// Relative standard deviation of each signal.
    pub relative_noise: f64,
}

impl Default for GainCurveConfig {
    fn default() -> Self {
        GainCurveConfig {
            gamma_max: 15.8,
            scale: 1.0,
            max_power: 75.0,
            points: 12,
            relative_noise: 0.01,
        }
    }
}

/// Equally spaced powers `max_power·i/points` for `i = 1..=points` and
/// their noisy signals.
pub fn synthesize_gain_curve(config: &GainCurveConfig, stream: SeedStream) -> Result<(Vec<f64>, Vec<f64>)> {
    if config.points < 5 {
        return Err(Error::param("gain curve needs at least 5 points"));
    }
    if !(config.max_power > 0.0 && config.scale > 0.0) {
        return Err(Error::param("max power and scale must be positive"));
    }
    if !(0.0..0.2).contains(&config.relative_noise) {
        return Err(Error::param("relative noise must lie in [0, 0.2)"));
    }
    let mut rng = stream.rng();
    let powers: Vec<f64> = (1..=config.points)
        .map(|i| config.max_power * i as f64 / config.points as f64)
        .collect();
    let signals = powers
        .iter()
        .map(|&p| {
            let clean = config.scale * mean_photons_from_gain(config.gamma_max * (p / config.max_power).sqrt())?;
            let z: f64 = rng.sample(StandardNormal);
            Ok(clean * (1.0 + config.relative_noise * z))
        })
        .collect::<Result<_>>()?;
    Ok((powers, signals))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GainCurvePoint {
    pub pump_power_mw: f64,
    pub signal: f64,
}

/// Reads a measured gain curve with header `pump_power_mw,signal`.
pub fn read_gain_curve_csv<R: std::io::Read>(r: R) -> Result<(Vec<f64>, Vec<f64>)> {
    let mut rdr = csv::Reader::from_reader(r);
    let mut powers = Vec::new();
    let mut signals = Vec::new();
    for row in rdr.deserialize::<GainCurvePoint>() {
        let row = row?;
        powers.push(row.pump_power_mw);
        signals.push(row.signal);
    }
    Ok((powers, signals))
}
