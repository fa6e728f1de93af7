//! g⁽²⁾ estimators with block-bootstrap standard errors.
//!
//! Records are cut into [`BOOTSTRAP_BLOCKS`] contiguous blocks (fewer when
//! there are fewer records). Each block is summed sequentially, blocks are
//! combined by pairwise summation, and the standard error is the spread of
//! the estimator over [`BOOTSTRAP_RESAMPLES`] resamplings of whole blocks
//! with replacement, drawn from a fixed internal seed. The output is a
//! deterministic function of the records.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::chain::PulseRecord;
use crate::error::{Error, Result};
use crate::rng::{pairwise_sum, SeedStream};

pub const BOOTSTRAP_BLOCKS: usize = 100;
pub const BOOTSTRAP_RESAMPLES: usize = 1000;
const BOOTSTRAP_SEED: u64 = 0x6232_5f62_6f6f_7473;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct G2Estimate {
    pub g2: f64,
    pub std_error: f64,
}

impl G2Estimate {
    /// |g2 − expected| in units of the standard error.
    pub fn z_score(&self, expected: f64) -> f64 {
        (self.g2 - expected).abs() / self.std_error
    }
}

/// Per-block sums of three per-record quantities plus the record count.
#[derive(Debug, Clone, Copy, Default)]
struct Sums {
    count: f64,
    a: f64,
    b: f64,
    ab: f64,
}

fn block_sums<T: Sync>(items: &[T], f: impl Fn(&T) -> [f64; 3] + Sync) -> Vec<Sums> {
    let len = items.len();
    let blocks = BOOTSTRAP_BLOCKS.min(len);
    (0..blocks)
        .into_par_iter()
        .map(|k| {
            let chunk = &items[k * len / blocks..(k + 1) * len / blocks];
            let mut s = Sums {
                count: chunk.len() as f64,
                ..Sums::default()
            };
            for item in chunk {
                let [a, b, ab] = f(item);
                s.a += a;
                s.b += b;
                s.ab += ab;
            }
            s
        })
        .collect()
}

fn total(blocks: &[Sums]) -> Sums {
    let col = |f: fn(&Sums) -> f64| pairwise_sum(&blocks.iter().map(f).collect::<Vec<_>>());
    Sums {
        count: col(|s| s.count),
        a: col(|s| s.a),
        b: col(|s| s.b),
        ab: col(|s| s.ab),
    }
}

fn bootstrap(blocks: &[Sums], stat: impl Fn(&Sums) -> f64) -> f64 {
    let mut rng = SeedStream::new(BOOTSTRAP_SEED).rng();
    let k = blocks.len();
    let mut values = Vec::with_capacity(BOOTSTRAP_RESAMPLES);
    for _ in 0..BOOTSTRAP_RESAMPLES {
        let mut s = Sums::default();
        for _ in 0..k {
            let b = &blocks[rng.random_range(0..k)];
            s.count += b.count;
            s.a += b.a;
            s.b += b.b;
            s.ab += b.ab;
        }
        let v = stat(&s);
        if v.is_finite() {
            values.push(v);
        }
    }
    if values.len() < 2 {
        return f64::INFINITY;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
}

fn ratio(s: &Sums) -> f64 {
    s.count * s.ab / (s.a * s.b)
}

/// ⟨S₁·S₂⟩ / (⟨S₁⟩·⟨S₂⟩) over all records.
pub fn estimate_g2(records: &[PulseRecord]) -> Result<G2Estimate> {
    if records.len() < 2 {
        return Err(Error::UndefinedEstimator("need at least 2 records".into()));
    }
    let blocks = block_sums(records, |r| [r.s1, r.s2, r.s1 * r.s2]);
    let t = total(&blocks);
    if t.a == 0.0 || t.b == 0.0 {
        return Err(Error::UndefinedEstimator("mean signal is zero".into()));
    }
    let g2 = ratio(&t);
    if !g2.is_finite() {
        return Err(Error::UndefinedEstimator("non-finite signal moments".into()));
    }
    Ok(G2Estimate {
        g2,
        std_error: bootstrap(&blocks, ratio),
    })
}

/// Mean dark signals of the two channels and their mean product,
/// measured with the light blocked.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DarkLevels {
    pub mean_s1: f64,
    pub mean_s2: f64,
    pub mean_product: f64,
}

impl DarkLevels {
    pub fn from_records(dark: &[PulseRecord]) -> Result<Self> {
        if dark.is_empty() {
            return Err(Error::param("no dark records"));
        }
        let t = total(&block_sums(dark, |r| [r.s1, r.s2, r.s1 * r.s2]));
        Ok(DarkLevels {
            mean_s1: t.a / t.count,
            mean_s2: t.b / t.count,
            mean_product: t.ab / t.count,
        })
    }
}

/// Noise-corrected variant for diagnostics: subtracts the additive,
/// light-independent dark contribution from ⟨S₁⟩, ⟨S₂⟩ and ⟨S₁·S₂⟩
/// before forming the ratio.
pub fn estimate_g2_dark_corrected(records: &[PulseRecord], dark: &DarkLevels) -> Result<G2Estimate> {
    if records.len() < 2 {
        return Err(Error::UndefinedEstimator("need at least 2 records".into()));
    }
    let d = *dark;
    let corrected = move |s: &Sums| {
        let m1 = s.a / s.count;
        let m2 = s.b / s.count;
        let m12 = s.ab / s.count;
        let x1 = m1 - d.mean_s1;
        let x2 = m2 - d.mean_s2;
        let x12 = m12 - x1 * d.mean_s2 - d.mean_s1 * x2 - d.mean_product;
        x12 / (x1 * x2)
    };
    let blocks = block_sums(records, |r| [r.s1, r.s2, r.s1 * r.s2]);
    let g2 = corrected(&total(&blocks));
    if !g2.is_finite() {
        return Err(Error::UndefinedEstimator("dark-corrected mean signal is zero".into()));
    }
    Ok(G2Estimate {
        g2,
        std_error: bootstrap(&blocks, corrected),
    })
}

/// Normally ordered ⟨n(n−1)⟩/⟨n⟩² of photon numbers.
pub fn photon_number_g2(photons: &[f64]) -> Result<G2Estimate> {
    if photons.len() < 2 {
        return Err(Error::UndefinedEstimator("need at least 2 samples".into()));
    }
    let stat = |s: &Sums| s.count * s.ab / (s.a * s.a);
    let blocks = block_sums(photons, |&n| [n, 0.0, n * (n - 1.0)]);
    let t = total(&blocks);
    if t.a == 0.0 {
        return Err(Error::UndefinedEstimator("mean photon number is zero".into()));
    }
    Ok(G2Estimate {
        g2: stat(&t),
        std_error: bootstrap(&blocks, stat),
    })
}

/// Sample mean and its standard error.
pub fn mean_with_error(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = pairwise_sum(values) / n;
    let var = pairwise_sum(&values.iter().map(|v| (v - mean).powi(2)).collect::<Vec<_>>()) / (n - 1.0);
    (mean, (var / n).sqrt())
}
