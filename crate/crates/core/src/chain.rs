//! Optical chain: loss, beamsplitter and analog detectors.
//!
//! Loss and splitting are binomial thinning of the photon number. Integer
//! photon numbers up to [`EXACT_THINNING_LIMIT`] are thinned with exact
//! binomial draws; anything else (continuum-regime values) uses the
//! matched-moment Gaussian η·n + N(0, η(1−η)n), clamped to [0, n].

use rand::Rng;
use rand_distr::{Binomial, Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// 70 nV·s for 8·10³ detected photons.
pub const DEFAULT_VOLTS_PER_PHOTON: f64 = 70.0 / 8000.0;

/// FWHM of the electronic noise histogram, nV·s.
pub const DEFAULT_NOISE_FWHM: f64 = 10.0;

pub const DEFAULT_TRANSMITTANCE: f64 = 0.5;

/// FWHM/σ of a Gaussian, 2·√(2·ln 2).
pub const FWHM_PER_SIGMA: f64 = 2.354_820_045_030_949_3;

pub const EXACT_THINNING_LIMIT: f64 = 1e12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Detector {
    /// nV·s per detected photon.
    pub volts_per_photon: f64,
    /// FWHM of the additive electronic noise, nV·s.
    pub noise_fwhm: f64,
}

impl Default for Detector {
    fn default() -> Self {
        Detector {
            volts_per_photon: DEFAULT_VOLTS_PER_PHOTON,
            noise_fwhm: DEFAULT_NOISE_FWHM,
        }
    }
}

impl Detector {
    pub fn new(volts_per_photon: f64, noise_fwhm: f64) -> Result<Self> {
        let d = Detector {
            volts_per_photon,
            noise_fwhm,
        };
        d.validate()?;
        Ok(d)
    }

    pub fn noiseless(volts_per_photon: f64) -> Result<Self> {
        Self::new(volts_per_photon, 0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.volts_per_photon > 0.0 && self.volts_per_photon.is_finite()) {
            return Err(Error::param(format!(
                "detector conversion must be positive (got {})",
                self.volts_per_photon
            )));
        }
        if !(self.noise_fwhm >= 0.0 && self.noise_fwhm.is_finite()) {
            return Err(Error::param(format!(
                "noise FWHM must be non-negative (got {})",
                self.noise_fwhm
            )));
        }
        Ok(())
    }

    pub fn noise_sigma(&self) -> f64 {
        self.noise_fwhm / FWHM_PER_SIGMA
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "element", rename_all = "snake_case")]
pub enum ChainElement {
    Loss { transmission: f64 },
    Beamsplitter { transmittance: f64 },
    Detector(Detector),
}

impl ChainElement {
    fn validate(&self) -> Result<()> {
        match *self {
            ChainElement::Loss { transmission } if !(transmission > 0.0 && transmission <= 1.0) => Err(Error::param(
                format!("loss transmission must lie in (0, 1] (got {transmission})"),
            )),
            ChainElement::Beamsplitter { transmittance } if !(transmittance > 0.0 && transmittance < 1.0) => {
                Err(Error::param(format!(
                    "beamsplitter transmittance must lie in (0, 1) (got {transmittance})"
                )))
            }
            ChainElement::Detector(d) => d.validate(),
            _ => Ok(()),
        }
    }
}

/// Signals of the two HBT detectors for one pulse, nV·s. Noise can make
/// either negative.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PulseRecord {
    pub s1: f64,
    pub s2: f64,
}

fn thin<R: Rng + ?Sized>(n: f64, p: f64, rng: &mut R) -> f64 {
    if p >= 1.0 || n <= 0.0 {
        return n;
    }
    if n.fract() == 0.0 && n <= EXACT_THINNING_LIMIT {
        // p ∈ (0, 1) and n ≥ 1 always form a valid binomial
        let b = Binomial::new(n as u64, p).expect("valid binomial");
        return b.sample(rng) as f64;
    }
    let z: f64 = StandardNormal.sample(rng);
    (p * n + (p * (1.0 - p) * n).sqrt() * z).clamp(0.0, n)
}

/// Photons surviving a loss of transmission `transmission` ∈ (0, 1].
pub fn apply_loss<R: Rng + ?Sized>(n: f64, transmission: f64, rng: &mut R) -> f64 {
    assert!(
        transmission > 0.0 && transmission <= 1.0,
        "transmission must lie in (0, 1]"
    );
    thin(n, transmission, rng)
}

/// Partition at a beamsplitter with transmittance `t` ∈ (0, 1).
pub fn split<R: Rng + ?Sized>(n: f64, t: f64, rng: &mut R) -> (f64, f64) {
    assert!(t > 0.0 && t < 1.0, "transmittance must lie in (0, 1)");
    let n1 = thin(n, t, rng);
    (n1, n - n1)
}

/// Integrated detector signal for `n` photons.
pub fn detect<R: Rng + ?Sized>(n: f64, det: &Detector, rng: &mut R) -> f64 {
    let signal = det.volts_per_photon * n;
    let sigma = det.noise_sigma();
    if sigma > 0.0 {
        let z: f64 = StandardNormal.sample(rng);
        signal + sigma * z
    } else {
        signal
    }
}

/// An ordered chain: losses on the input beam, one beamsplitter, losses
/// applied to each arm, and one detector model shared by both arms (with
/// independent noise), which must come last.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<ChainElement>", into = "Vec<ChainElement>")]
pub struct OpticalChain {
    elements: Vec<ChainElement>,
}

impl TryFrom<Vec<ChainElement>> for OpticalChain {
    type Error = Error;

    fn try_from(elements: Vec<ChainElement>) -> Result<Self> {
        OpticalChain::new(elements)
    }
}

impl From<OpticalChain> for Vec<ChainElement> {
    fn from(chain: OpticalChain) -> Self {
        chain.elements
    }
}

impl Default for OpticalChain {
    fn default() -> Self {
        OpticalChain::hbt(Detector::default(), DEFAULT_TRANSMITTANCE).expect("default chain is valid")
    }
}

impl OpticalChain {
    pub fn new(elements: Vec<ChainElement>) -> Result<Self> {
        for e in &elements {
            e.validate()?;
        }
        let splitters = elements
            .iter()
            .filter(|e| matches!(e, ChainElement::Beamsplitter { .. }))
            .count();
        if splitters != 1 {
            return Err(Error::param("an HBT chain needs exactly one beamsplitter"));
        }
        let detectors = elements
            .iter()
            .filter(|e| matches!(e, ChainElement::Detector(_)))
            .count();
        if detectors != 1 || !matches!(elements.last(), Some(ChainElement::Detector(_))) {
            return Err(Error::param(
                "an HBT chain needs exactly one detector, as its last element",
            ));
        }
        Ok(OpticalChain { elements })
    }

    /// Beamsplitter followed by the detectors.
    pub fn hbt(detector: Detector, transmittance: f64) -> Result<Self> {
        Self::new(vec![
            ChainElement::Beamsplitter { transmittance },
            ChainElement::Detector(detector),
        ])
    }

    /// The same chain with an extra loss in front of the beamsplitter.
    pub fn with_input_loss(&self, transmission: f64) -> Result<Self> {
        let mut elements = vec![ChainElement::Loss { transmission }];
        elements.extend_from_slice(&self.elements);
        Self::new(elements)
    }

    pub fn elements(&self) -> &[ChainElement] {
        &self.elements
    }

    pub fn detector(&self) -> Detector {
        match self.elements.last() {
            Some(ChainElement::Detector(d)) => *d,
            _ => unreachable!("validated chain ends with a detector"),
        }
    }

    pub fn transmittance(&self) -> f64 {
        self.elements
            .iter()
            .find_map(|e| match e {
                ChainElement::Beamsplitter { transmittance } => Some(*transmittance),
                _ => None,
            })
            .expect("validated chain has a beamsplitter")
    }

    /// Overall mean fraction of input photons reaching detector 1 and 2.
    pub fn arm_efficiencies(&self) -> (f64, f64) {
        let mut before = 1.0;
        let mut after = 1.0;
        let mut split = None;
        for e in &self.elements {
            match *e {
                ChainElement::Loss { transmission } if split.is_none() => before *= transmission,
                ChainElement::Loss { transmission } => after *= transmission,
                ChainElement::Beamsplitter { transmittance } => split = Some(transmittance),
                ChainElement::Detector(_) => {}
            }
        }
        let t = split.unwrap_or(DEFAULT_TRANSMITTANCE);
        (before * t * after, before * (1.0 - t) * after)
    }

    /// Sends one pulse of `n` photons through the chain.
    pub fn propagate<R: Rng + ?Sized>(&self, n: f64, rng: &mut R) -> PulseRecord {
        let mut beam = n;
        let mut arms: Option<(f64, f64)> = None;
        for e in &self.elements {
            match (*e, arms) {
                (ChainElement::Loss { transmission }, None) => beam = thin(beam, transmission, rng),
                (ChainElement::Loss { transmission }, Some((a, b))) => {
                    arms = Some((thin(a, transmission, rng), thin(b, transmission, rng)))
                }
                (ChainElement::Beamsplitter { transmittance }, _) => arms = Some(split(beam, transmittance, rng)),
                (ChainElement::Detector(d), Some((a, b))) => {
                    return PulseRecord {
                        s1: detect(a, &d, rng),
                        s2: detect(b, &d, rng),
                    }
                }
                (ChainElement::Detector(_), None) => unreachable!("detector follows the beamsplitter"),
            }
        }
        unreachable!("validated chain ends with a detector")
    }

    /// Sends two conjugate beams (e.g. signal and idler of a twin beam)
    /// straight to the two detectors. The beamsplitter is bypassed; input
    /// losses act on each beam.
    pub fn propagate_pair<R: Rng + ?Sized>(&self, pair: (f64, f64), rng: &mut R) -> PulseRecord {
        let (mut a, mut b) = pair;
        for e in &self.elements {
            match *e {
                ChainElement::Loss { transmission } => {
                    a = thin(a, transmission, rng);
                    b = thin(b, transmission, rng);
                }
                ChainElement::Beamsplitter { .. } => {}
                ChainElement::Detector(d) => {
                    return PulseRecord {
                        s1: detect(a, &d, rng),
                        s2: detect(b, &d, rng),
                    }
                }
            }
        }
        unreachable!("validated chain ends with a detector")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeedStream;

    #[test]
    fn unit_transmission_is_identity() {
        let mut rng = SeedStream::new(1).rng();
        for n in [0.0, 1.0, 17.0, 1e9, 3.7e13] {
            assert_eq!(apply_loss(n, 1.0, &mut rng), n);
        }
    }

    #[test]
    fn split_conserves_photons() {
        let mut rng = SeedStream::new(2).rng();
        assert_eq!(split(0.0, 0.3, &mut rng), (0.0, 0.0));
        for n in [1.0, 5.0, 1234.0, 2.5e13] {
            let (a, b) = split(n, 0.3, &mut rng);
            assert_eq!(a + b, n);
            assert!(a >= 0.0 && b >= 0.0);
        }
        // exact regime stays integer
        let (a, _) = split(1001.0, 0.5, &mut rng);
        assert_eq!(a.fract(), 0.0);
    }

    #[test]
    fn detector_conversion() {
        let mut rng = SeedStream::new(3).rng();
        let d = Detector::noiseless(DEFAULT_VOLTS_PER_PHOTON).unwrap();
        assert_eq!(detect(8000.0, &d, &mut rng), 70.0);
        assert_eq!(detect(0.0, &d, &mut rng), 0.0);
        assert!((Detector::default().noise_sigma() - 4.246_609).abs() < 1e-6);
    }

    #[test]
    fn chain_validation() {
        let d = Detector::default();
        assert!(OpticalChain::hbt(d, 0.0).is_err());
        assert!(OpticalChain::hbt(d, 1.0).is_err());
        assert!(OpticalChain::new(vec![ChainElement::Detector(d)]).is_err());
        assert!(OpticalChain::new(vec![
            ChainElement::Detector(d),
            ChainElement::Beamsplitter { transmittance: 0.5 }
        ])
        .is_err());
        assert!(OpticalChain::default().with_input_loss(0.0).is_err());
        assert!(OpticalChain::default().with_input_loss(1.2).is_err());
        assert!(Detector::new(0.0, 1.0).is_err());
        assert!(Detector::new(1.0, -1.0).is_err());
        let c = OpticalChain::new(vec![
            ChainElement::Loss { transmission: 0.5 },
            ChainElement::Beamsplitter { transmittance: 0.25 },
            ChainElement::Loss { transmission: 0.8 },
            ChainElement::Detector(d),
        ])
        .unwrap();
        let (e1, e2) = c.arm_efficiencies();
        assert!((e1 - 0.1).abs() < 1e-15 && (e2 - 0.3).abs() < 1e-15);
    }

    #[test]
    fn chain_serializes_with_tags() {
        let json = serde_json::to_string(&OpticalChain::default()).unwrap();
        assert!(json.contains("\"element\":\"beamsplitter\""));
        let back: OpticalChain = serde_json::from_str(&json).unwrap();
        assert_eq!(back, OpticalChain::default());
        assert!(serde_json::from_str::<OpticalChain>(r#"[{"element":"beamsplitter","transmittance":0.5}]"#).is_err());
    }
}
