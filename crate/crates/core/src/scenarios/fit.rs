//! Weighted Gaussian-on-baseline fit, y = b + a·exp(−4·ln2·(x−c)²/f²).
//!
//! Levenberg-Marquardt with the damping schedule of [`crate::lm`]
//! (λ₀ = 1e-3, ×10 on rejection, ×0.1 on acceptance). Parameter
//! uncertainties are the square roots of the diagonal of the inverse
//! curvature matrix JᵀWJ, i.e. the supplied σ are taken at face value.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{minimize, LmConfig, Residuals};

const FOUR_LN2: f64 = 4.0 * std::f64::consts::LN_2;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitParameter {
    pub value: f64,
    pub std_error: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaussianFit {
    pub baseline: FitParameter,
    pub amplitude: FitParameter,
    pub center: FitParameter,
    pub fwhm: FitParameter,
    /// Standard error of baseline + amplitude, including their covariance.
    pub peak_std_error: f64,
    pub chi2: f64,
    pub dof: usize,
    pub iterations: usize,
    /// The amplitude is indistinguishable from zero, so the centre (and
    /// width) are not identified by the data.
    pub center_degenerate: bool,
}

impl GaussianFit {
    pub fn eval(&self, x: f64) -> f64 {
        gaussian(
            x,
            self.baseline.value,
            self.amplitude.value,
            self.center.value,
            self.fwhm.value,
        )
    }

    pub fn peak(&self) -> f64 {
        self.baseline.value + self.amplitude.value
    }
}

fn gaussian(x: f64, b: f64, a: f64, c: f64, f: f64) -> f64 {
    b + a * (-FOUR_LN2 * (x - c).powi(2) / (f * f)).exp()
}

struct Problem<'a> {
    points: &'a [(f64, f64, f64)],
}

impl Residuals<4> for Problem<'_> {
    fn evaluate(&self, p: &[f64; 4], r: &mut Vec<f64>, j: &mut Vec<[f64; 4]>) {
        r.clear();
        j.clear();
        let [b, a, c, f] = *p;
        let f2 = (f * f).max(f64::MIN_POSITIVE);
        for &(x, y, s) in self.points {
            let d = x - c;
            let g = (-FOUR_LN2 * d * d / f2).exp();
            r.push((b + a * g - y) / s);
            let k = 2.0 * FOUR_LN2 * a * g / f2;
            j.push([1.0 / s, g / s, k * d / s, k * d * d / (f * s)]);
        }
    }
}

fn initial_guess(points: &[(f64, f64, f64)]) -> [f64; 4] {
    let mut sorted: Vec<_> = points.to_vec();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    let n = sorted.len();
    let edge = (n / 5).max(1);
    let baseline = sorted[..edge]
        .iter()
        .chain(&sorted[n - edge..])
        .map(|p| p.1)
        .sum::<f64>()
        / (2 * edge) as f64;
    let extreme = sorted
        .iter()
        .max_by(|p, q| (p.1 - baseline).abs().total_cmp(&(q.1 - baseline).abs()))
        .unwrap();
    let amplitude = extreme.1 - baseline;
    let span = sorted[n - 1].0 - sorted[0].0;
    let above: Vec<f64> = sorted
        .iter()
        .filter(|p| amplitude != 0.0 && (p.1 - baseline) / amplitude >= 0.5)
        .map(|p| p.0)
        .collect();
    let min_step = sorted
        .windows(2)
        .map(|w| w[1].0 - w[0].0)
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    let width = match (above.first(), above.last()) {
        (Some(lo), Some(hi)) if hi > lo => (hi - lo + min_step).min(span),
        _ => span / 4.0,
    };
    [
        baseline,
        amplitude,
        extreme.0,
        width.max(min_step.min(span)).max(f64::MIN_POSITIVE),
    ]
}

/// Fits `points` given as `(x, y, σ_y)`.
pub fn fit_gaussian(points: &[(f64, f64, f64)]) -> Result<GaussianFit> {
    if points.len() < 5 {
        return Err(Error::param("Gaussian fit needs at least 5 points"));
    }
    if points
        .iter()
        .any(|&(x, y, s)| !x.is_finite() || !y.is_finite() || !(s > 0.0 && s.is_finite()))
    {
        return Err(Error::param("fit points need finite x, y and positive σ"));
    }
    let problem = Problem { points };
    let out = minimize(&problem, initial_guess(points), &LmConfig::default());
    if !out.converged {
        return Err(Error::FitNonConvergence {
            iterations: out.iterations,
            last: out.params.to_vec(),
        });
    }
    let [b, a, c, f] = out.params;

    let full = out.curvature.cholesky().map(|ch| ch.inverse());
    let peak_se = |c00: f64, c11: f64, c01: f64| (c00 + c11 + 2.0 * c01).max(0.0).sqrt();
    let (errors, peak_std_error, mut center_degenerate) = match full {
        Some(cov) if (0..4).all(|i| cov[(i, i)] > 0.0 && cov[(i, i)].is_finite()) => (
            [0, 1, 2, 3].map(|i| cov[(i, i)].sqrt()),
            peak_se(cov[(0, 0)], cov[(1, 1)], cov[(0, 1)]),
            false,
        ),
        _ => {
            let sub = out.curvature.fixed_view::<2, 2>(0, 0).into_owned();
            match sub.cholesky() {
                Some(ch) => {
                    let cov = ch.inverse();
                    (
                        [cov[(0, 0)].sqrt(), cov[(1, 1)].sqrt(), f64::INFINITY, f64::INFINITY],
                        peak_se(cov[(0, 0)], cov[(1, 1)], cov[(0, 1)]),
                        true,
                    )
                }
                None => {
                    return Err(Error::DegenerateFit(
                        "curvature matrix is singular in baseline and amplitude".into(),
                    ))
                }
            }
        }
    };
    if a.abs() <= 2.0 * errors[1] {
        center_degenerate = true;
    }

    let param = |value, std_error| FitParameter { value, std_error };
    Ok(GaussianFit {
        baseline: param(b, errors[0]),
        amplitude: param(a, errors[1]),
        center: param(c, errors[2]),
        fwhm: param(f.abs(), errors[3]),
        peak_std_error,
        chi2: out.chi2,
        dof: points.len().saturating_sub(4),
        iterations: out.iterations,
        center_degenerate,
    })
}
