//! Photon statistics of bright squeezed vacuum from high-gain parametric
//! down-conversion.
//!
//! The crate is organised the way a synthetic experiment is run:
//!
//! - [`distributions`]: per-mode photon-number laws (thermal, squeezed
//!   vacuum, Poisson, twin-beam) with log-domain PMFs, closed-form moments
//!   and samplers that switch to continuum limits for very bright light.
//! - [`modes`]: the parametric gain law, coherence/detection geometry, the
//!   effective detected-mode count and the multimode reduction of g⁽²⁾.
//! - [`source`]: multimode and mixture light sources built from the above.
//! - [`chain`]: loss, beamsplitter and analog detector elements turning
//!   photon numbers into per-pulse signal pairs.
//! - [`estimate`]: the HBT ratio estimator with block-bootstrap errors.
//! - [`scenarios`]: end-to-end runs (HBT, angular/spectral scans, signal
//!   histograms, coherent calibration, gain curve) and the Gaussian fit.
//!
//! All randomness flows from a [`rng::SeedStream`]; pulses are simulated in
//! fixed-size blocks with per-block streams, so results do not depend on
//! the number of worker threads.

pub mod chain;
pub mod distributions;
pub mod error;
pub mod estimate;
pub mod io;
pub mod lm;
pub mod modes;
pub mod rng;
pub mod scenarios;
pub mod source;

pub use chain::{ChainElement, Detector, OpticalChain, PulseRecord};
pub use distributions::{DistributionKind, Moments, PhotonDistribution, Sampler};
pub use error::{Error, Result};
pub use estimate::G2Estimate;
pub use modes::{ModeComposition, ModeGeometry};
pub use rng::SeedStream;
