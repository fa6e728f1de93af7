//! Light sources assembled from per-mode photon-number laws.

use rand::Rng;

use crate::distributions::{DistributionKind, PhotonDistribution, Sampler};
use crate::error::{Error, Result};
use crate::modes::ModeComposition;

/// Sum of independent modes of one kind.
#[derive(Debug, Clone)]
pub struct MultimodeSource {
    kind: DistributionKind,
    modes: Vec<Sampler>,
}

impl MultimodeSource {
    pub fn new(kind: DistributionKind, composition: &ModeComposition) -> Result<Self> {
        let modes = composition
            .per_mode_means()
            .iter()
            .map(|&mean| PhotonDistribution::new(kind, mean)?.sampler())
            .collect::<Result<_>>()?;
        Ok(MultimodeSource { kind, modes })
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn mode_count(&self) -> usize {
        self.modes.len()
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        self.modes.iter().map(|m| m.draw(rng)).sum()
    }

    /// Two-channel draw; see [`Sampler::draw_pair`].
    pub fn draw_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        self.modes.iter().fold((0.0, 0.0), |(a, b), m| {
            let (x, y) = m.draw_pair(rng);
            (a + x, b + y)
        })
    }
}

/// Pulse-wise mixture: each pulse comes from `first` with probability
/// `first_weight`, otherwise from `second`.
#[derive(Debug, Clone)]
pub struct MixtureSource {
    first: MultimodeSource,
    second: MultimodeSource,
    first_weight: f64,
}

impl MixtureSource {
    pub fn new(first: MultimodeSource, second: MultimodeSource, first_weight: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&first_weight) {
            return Err(Error::param(format!(
                "mixture weight must lie in [0, 1] (got {first_weight})"
            )));
        }
        Ok(MixtureSource {
            first,
            second,
            first_weight,
        })
    }

    pub fn first_weight(&self) -> f64 {
        self.first_weight
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        // always consume the selector so both branches share stream layout
        let u: f64 = rng.random();
        if u < self.first_weight {
            self.first.draw(rng)
        } else {
            self.second.draw(rng)
        }
    }
}
