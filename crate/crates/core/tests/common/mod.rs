#![allow(dead_code)]

use bsv_sim::{DistributionKind, PhotonDistribution};
use statrs::distribution::{ChiSquared, ContinuousCDF};

/// Chi-square goodness of fit of integer samples against the PMF. Bins are
/// merged from the tail inward until each expects at least 5 counts; odd
/// bins of squeezed vacuum are skipped (they must be empty, which is
/// asserted). Returns the p-value.
pub fn chi_square_p_value(dist: &PhotonDistribution, samples: &[f64]) -> f64 {
    let n = samples.len() as f64;
    let table = dist.pmf_table().unwrap();
    let mut counts = vec![0u64; table.len()];
    for &s in samples {
        assert_eq!(s.fract(), 0.0, "exact-regime sample {s} is not an integer");
        let k = (s as usize).min(table.len() - 1);
        counts[k] += 1;
    }
    let even_only = dist.kind() == DistributionKind::SqueezedVacuum;
    let mut bins: Vec<(f64, f64)> = Vec::new();
    let (mut obs, mut exp) = (0.0, 0.0);
    for (k, (&c, &p)) in counts.iter().zip(&table).enumerate() {
        if even_only && k % 2 == 1 {
            assert_eq!(c, 0, "odd photon number {k} drawn from squeezed vacuum");
            continue;
        }
        obs += c as f64;
        exp += p * n;
        if exp >= 5.0 {
            bins.push((obs, exp));
            obs = 0.0;
            exp = 0.0;
        }
    }
    // remaining tail joins the last bin
    if let Some(last) = bins.last_mut() {
        last.0 += obs;
        last.1 += exp + (1.0 - table.iter().sum::<f64>()) * n;
    }
    let stat: f64 = bins.iter().map(|(o, e)| (o - e).powi(2) / e).sum();
    let dof = (bins.len() - 1) as f64;
    1.0 - ChiSquared::new(dof).unwrap().cdf(stat)
}

/// Σ n·P(n) and Σ n²·P(n) over the truncated table.
pub fn brute_force_moments(dist: &PhotonDistribution) -> (f64, f64) {
    let table = dist.pmf_table().unwrap();
    let m1: f64 = table.iter().enumerate().map(|(n, p)| n as f64 * p).sum();
    let m2: f64 = table.iter().enumerate().map(|(n, p)| (n as f64).powi(2) * p).sum();
    (m1, m2)
}

/// Squeezed-vacuum photon probabilities from the state expansion, by the
/// amplitude recurrence p₀ = 1/cosh r, p₂ₖ₊₂ = p₂ₖ·(2k+1)/(2k+2)·tanh²r with
/// sinh²r = mean. No factorials or log-gamma involved.
pub fn squeezed_vacuum_by_expansion(mean: f64, max_n: usize) -> Vec<f64> {
    let tanh2 = mean / (1.0 + mean);
    let mut p = vec![0.0; max_n + 1];
    p[0] = 1.0 / (1.0 + mean).sqrt();
    let mut k = 0;
    while 2 * k + 2 <= max_n {
        p[2 * k + 2] = p[2 * k] * (2 * k + 1) as f64 / (2 * k + 2) as f64 * tanh2;
        k += 1;
    }
    p
}

/// PMF after independent survival of each photon with probability `eta`,
/// by direct summation of Σₙ P(n)·C(n, k)·ηᵏ(1−η)ⁿ⁻ᵏ.
pub fn thinned_pmf(pmf: &[f64], eta: f64) -> Vec<f64> {
    use statrs::function::factorial::ln_binomial;
    let mut out = vec![0.0; pmf.len()];
    for (n, &p) in pmf.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for (k, o) in out.iter_mut().enumerate().take(n + 1) {
            let ln = ln_binomial(n as u64, k as u64) + k as f64 * eta.ln() + (n - k) as f64 * (-eta).ln_1p();
            *o += p * ln.exp();
        }
    }
    out
}
