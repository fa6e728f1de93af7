//! Per-mode photon-number laws of down-converted light.
//!
//! PMFs are evaluated in the log domain with `lgamma` and exponentiated
//! last, so they stay finite far beyond the point where `n!` overflows.
//! Samplers draw exactly (inverse CDF over the truncated PMF table) up to
//! [`CONTINUUM_THRESHOLD`] mean photons and switch to continuum limits above
//! it, where photon numbers are carried as `f64` and are no longer integer.

use rand::Rng;
use rand_distr::{Distribution, Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::{simulate_pulses, SeedStream};

/// Largest mean for which [`PhotonDistribution::pmf`] is evaluated.
pub const PMF_MEAN_CAP: f64 = 1e6;

/// Means above this are sampled from continuum limits.
pub const CONTINUUM_THRESHOLD: f64 = 1e4;

/// Upper bound on the probability mass left beyond the truncation point.
pub const TAIL_EPSILON: f64 = 1e-13;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DistributionKind {
    /// Geometric (Bose-Einstein) law of one channel of a twin beam.
    Thermal,
    /// Single-mode squeezed vacuum: even photon numbers only.
    SqueezedVacuum,
    /// Coherent light.
    Poisson,
    /// Two conjugate channels with identical photon numbers, each thermal.
    TwinBeamJoint,
}

impl DistributionKind {
    pub const ALL: [DistributionKind; 4] = [
        DistributionKind::Thermal,
        DistributionKind::SqueezedVacuum,
        DistributionKind::Poisson,
        DistributionKind::TwinBeamJoint,
    ];
}

/// Closed-form moments of a single channel.
///
/// `g2` is the normally ordered ⟨n(n−1)⟩/⟨n⟩².
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Moments {
    pub mean: f64,
    pub variance: f64,
    pub g2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhotonDistribution {
    kind: DistributionKind,
    mean_photons: f64,
}

impl PhotonDistribution {
    pub fn new(kind: DistributionKind, mean_photons: f64) -> Result<Self> {
        if !(mean_photons > 0.0 && mean_photons.is_finite()) {
            return Err(Error::InvalidMean(mean_photons));
        }
        Ok(PhotonDistribution { kind, mean_photons })
    }

    pub fn thermal(mean_photons: f64) -> Result<Self> {
        Self::new(DistributionKind::Thermal, mean_photons)
    }

    pub fn squeezed_vacuum(mean_photons: f64) -> Result<Self> {
        Self::new(DistributionKind::SqueezedVacuum, mean_photons)
    }

    pub fn poisson(mean_photons: f64) -> Result<Self> {
        Self::new(DistributionKind::Poisson, mean_photons)
    }

    pub fn twin_beam(mean_photons: f64) -> Result<Self> {
        Self::new(DistributionKind::TwinBeamJoint, mean_photons)
    }

    pub fn kind(&self) -> DistributionKind {
        self.kind
    }

    pub fn mean_photons(&self) -> f64 {
        self.mean_photons
    }

    /// Whether [`Sampler`] draws exact integer photon numbers for this law.
    pub fn is_exact_regime(&self) -> bool {
        self.mean_photons <= CONTINUUM_THRESHOLD
    }

    fn check_cap(&self) -> Result<()> {
        if self.mean_photons > PMF_MEAN_CAP {
            return Err(Error::UseContinuumSampler {
                mean: self.mean_photons,
                cap: PMF_MEAN_CAP,
            });
        }
        Ok(())
    }

    /// Natural log of the probability of `n` photons (`-inf` where the
    /// probability is zero). For the twin beam this is the probability of
    /// the pair `(n, n)`, which equals the thermal marginal.
    pub fn ln_pmf(&self, n: u64) -> Result<f64> {
        self.check_cap()?;
        Ok(self.ln_pmf_unchecked(n))
    }

    fn ln_pmf_unchecked(&self, n: u64) -> f64 {
        let mu = self.mean_photons;
        let nf = n as f64;
        match self.kind {
            DistributionKind::Thermal | DistributionKind::TwinBeamJoint => nf * mu.ln() - (nf + 1.0) * mu.ln_1p(),
            DistributionKind::SqueezedVacuum => {
                if n % 2 == 1 {
                    return f64::NEG_INFINITY;
                }
                let half = nf / 2.0;
                libm::lgamma(nf + 1.0) - nf * std::f64::consts::LN_2 - 2.0 * libm::lgamma(half + 1.0) + half * mu.ln()
                    - (half + 0.5) * mu.ln_1p()
            }
            DistributionKind::Poisson => -mu + nf * mu.ln() - libm::lgamma(nf + 1.0),
        }
    }

    pub fn pmf(&self, n: u64) -> Result<f64> {
        Ok(self.ln_pmf(n)?.exp())
    }

    pub fn moments(&self) -> Moments {
        let mu = self.mean_photons;
        match self.kind {
            DistributionKind::Thermal | DistributionKind::TwinBeamJoint => Moments {
                mean: mu,
                variance: mu * mu + mu,
                g2: 2.0,
            },
            DistributionKind::SqueezedVacuum => Moments {
                mean: mu,
                variance: 2.0 * mu * (mu + 1.0),
                g2: 3.0 + 1.0 / mu,
            },
            DistributionKind::Poisson => Moments {
                mean: mu,
                variance: mu,
                g2: 1.0,
            },
        }
    }

    /// Log of an upper bound on Σ_{k>n} P(k), valid once the PMF is in its
    /// geometrically decaying tail. `None` while no bound applies.
    fn ln_tail_bound(&self, n: u64, ln_p: f64) -> Option<f64> {
        let mu = self.mean_photons;
        match self.kind {
            // P(k+1)/P(k) = q = μ/(μ+1); Σ_{j≥1} q^j = μ.
            DistributionKind::Thermal | DistributionKind::TwinBeamJoint => Some(ln_p + mu.ln()),
            // P(n+2)/P(n) = (n+1)/(n+2)·q ≤ q, so the same bound holds over even n.
            DistributionKind::SqueezedVacuum => n.is_multiple_of(2).then(|| ln_p + mu.ln()),
            DistributionKind::Poisson => {
                let r = mu / (n as f64 + 1.0);
                (r < 1.0).then(|| ln_p + (r / (1.0 - r)).ln())
            }
        }
    }

    /// PMF values for `0..=K` where `K` is the adaptive truncation point:
    /// the first `n ≥ mean + 20·σ` whose tail bound is below
    /// [`TAIL_EPSILON`].
    pub fn pmf_table(&self) -> Result<Vec<f64>> {
        self.check_cap()?;
        let floor = self.mean_photons + 20.0 * self.moments().variance.sqrt();
        let ln_eps = TAIL_EPSILON.ln();
        let mut table = Vec::with_capacity(floor as usize + 1);
        let mut n = 0u64;
        loop {
            let ln_p = self.ln_pmf_unchecked(n);
            table.push(ln_p.exp());
            if n as f64 >= floor {
                if let Some(bound) = self.ln_tail_bound(n, ln_p) {
                    if bound < ln_eps {
                        return Ok(table);
                    }
                }
            }
            n += 1;
        }
    }

    /// Largest photon number kept by [`pmf_table`](Self::pmf_table).
    pub fn truncation_point(&self) -> Result<u64> {
        Ok(self.pmf_table()?.len() as u64 - 1)
    }

    /// CDF of the continuum limit law sampled above [`CONTINUUM_THRESHOLD`].
    pub fn cdf_continuous(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 0.0;
        }
        let mu = self.mean_photons;
        match self.kind {
            DistributionKind::Thermal | DistributionKind::TwinBeamJoint => -(-x / mu).exp_m1(),
            DistributionKind::SqueezedVacuum => libm::erf((x / (2.0 * mu)).sqrt()),
            DistributionKind::Poisson => 0.5 * libm::erfc(-(x - mu) / (2.0 * mu).sqrt()),
        }
    }

    pub fn sampler(&self) -> Result<Sampler> {
        let mode = if self.is_exact_regime() {
            let table = self.pmf_table()?;
            let mut acc = 0.0;
            let cdf = table
                .iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect();
            SamplerMode::Table { cdf }
        } else {
            SamplerMode::Continuum
        };
        Ok(Sampler { dist: *self, mode })
    }

    /// Continuum-limit sampler regardless of the mean, for comparing the
    /// two regimes around the handover.
    pub fn continuum_sampler(&self) -> Sampler {
        Sampler {
            dist: *self,
            mode: SamplerMode::Continuum,
        }
    }

    /// `pulses` independent photon numbers. For the twin beam these are the
    /// (identical) per-channel values.
    pub fn sample(&self, stream: SeedStream, pulses: usize) -> Result<Vec<f64>> {
        if pulses == 0 {
            return Err(Error::param("pulses must be at least 1"));
        }
        let sampler = self.sampler()?;
        Ok(simulate_pulses(pulses, stream, |rng| sampler.draw(rng)))
    }
}

#[derive(Debug, Clone)]
enum SamplerMode {
    Table { cdf: Vec<f64> },
    Continuum,
}

/// Precomputed sampler for one [`PhotonDistribution`].
#[derive(Debug, Clone)]
pub struct Sampler {
    dist: PhotonDistribution,
    mode: SamplerMode,
}

impl Sampler {
    pub fn distribution(&self) -> &PhotonDistribution {
        &self.dist
    }

    pub fn is_exact(&self) -> bool {
        matches!(self.mode, SamplerMode::Table { .. })
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match &self.mode {
            SamplerMode::Table { cdf } => {
                let total = *cdf.last().expect("non-empty table");
                let u = rng.random::<f64>() * total;
                let idx = cdf.partition_point(|&c| c <= u);
                idx.min(cdf.len() - 1) as f64
            }
            SamplerMode::Continuum => {
                let mu = self.dist.mean_photons;
                match self.dist.kind {
                    DistributionKind::Thermal | DistributionKind::TwinBeamJoint => {
                        let e: f64 = Exp1.sample(rng);
                        mu * e
                    }
                    DistributionKind::SqueezedVacuum => {
                        let z: f64 = StandardNormal.sample(rng);
                        mu * z * z
                    }
                    DistributionKind::Poisson => {
                        let z: f64 = StandardNormal.sample(rng);
                        (mu + mu.sqrt() * z).max(0.0)
                    }
                }
            }
        }
    }

    /// Photon numbers of two channels. The twin beam emits one shared draw
    /// to both; every other law gives two independent draws.
    pub fn draw_pair<R: Rng + ?Sized>(&self, rng: &mut R) -> (f64, f64) {
        if self.dist.kind == DistributionKind::TwinBeamJoint {
            let n = self.draw(rng);
            (n, n)
        } else {
            (self.draw(rng), self.draw(rng))
        }
    }
}
