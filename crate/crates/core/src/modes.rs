//! Parametric gain, mode geometry and the multimode reduction of g⁽²⁾.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lm::{minimize, LmConfig, Residuals};

/// Mean photons per mode at parametric gain `gamma`: sinh²Γ.
///
/// Evaluated as (½·e^Γ·(1 − e^{−2Γ}))² above Γ = 0.5 so it stays finite up
/// to Γ ≈ 354; gains beyond that overflow and are rejected.
pub fn mean_photons_from_gain(gamma: f64) -> Result<f64> {
    if gamma.is_nan() || gamma < 0.0 {
        return Err(Error::param(format!("gain must be non-negative (got {gamma})")));
    }
    let n = if gamma < 0.5 {
        let s = gamma.sinh();
        s * s
    } else {
        let half = 0.5 * gamma.exp() * -(-2.0 * gamma).exp_m1();
        half * half
    };
    if !n.is_finite() {
        return Err(Error::param(format!("sinh²({gamma}) overflows f64")));
    }
    Ok(n)
}

/// ln(sinh(x)/x), even in x.
fn ln_sinhc(x: f64) -> f64 {
    let x = x.abs();
    if x < 1e-4 {
        x * x / 6.0
    } else if x > 20.0 {
        x - std::f64::consts::LN_2 - x.ln() + (-(-2.0 * x).exp()).ln_1p()
    } else {
        (x.sinh() / x).ln()
    }
}

/// Langevin function coth(x) − 1/x, the derivative of [`ln_sinhc`].
fn langevin(x: f64) -> f64 {
    let ax = x.abs();
    let v = if ax < 1e-3 {
        ax / 3.0 - ax * ax * ax / 45.0
    } else if ax > 20.0 {
        1.0 - 1.0 / ax
    } else {
        1.0 / ax.tanh() - 1.0 / ax
    };
    v.copysign(x)
}

/// Result of fitting S(P) = A·sinh²(Γ_max·√(P/P_max)) to a gain curve.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GainFit {
    pub gamma_max: f64,
    pub gamma_std_error: f64,
    /// A; infinite when Γ_max collapses to zero.
    pub scale: f64,
    /// Model signal at the largest pump power, A·sinh²Γ_max.
    pub signal_at_max: f64,
    /// P_max, fixed to the largest supplied power.
    pub max_power: f64,
    /// Euclidean norm of the log-signal residuals.
    pub residual_norm: f64,
    pub iterations: usize,
    /// Set when sinh²Γ_max departs from Γ_max² by less than
    /// [`GAIN_DEGENERACY_NONLINEARITY`]: the curve is then linear in P and
    /// only the product A·Γ_max² is identifiable.
    pub degenerate: bool,
}

impl GainFit {
    pub fn model(&self, power: f64) -> f64 {
        let s = (power / self.max_power).sqrt();
        self.signal_at_max * s * s * (2.0 * (ln_sinhc(self.gamma_max * s) - ln_sinhc(self.gamma_max))).exp()
    }
}

pub const GAIN_DEGENERACY_NONLINEARITY: f64 = 0.01;

struct GainProblem {
    scaled_root: Vec<f64>,
    ln_signal: Vec<f64>,
}

impl GainProblem {
    fn shape(&self, gamma: f64, s: f64) -> f64 {
        2.0 * (s.ln() + ln_sinhc(gamma * s) - ln_sinhc(gamma))
    }
}

impl Residuals<2> for GainProblem {
    fn evaluate(&self, p: &[f64; 2], r: &mut Vec<f64>, j: &mut Vec<[f64; 2]>) {
        r.clear();
        j.clear();
        let (gamma, ln_b) = (p[0], p[1]);
        for (&s, &y) in self.scaled_root.iter().zip(&self.ln_signal) {
            r.push(ln_b + self.shape(gamma, s) - y);
            j.push([2.0 * (s * langevin(gamma * s) - langevin(gamma)), 1.0]);
        }
    }
}

/// Fits the pump-power dependence of the PDC signal. The fit runs on
/// log-signals (multiplicative noise), with P_max fixed to the largest
/// power, and starts from the best of a coarse grid of gains.
pub fn fit_gain(pump_powers: &[f64], pdc_signals: &[f64]) -> Result<GainFit> {
    if pump_powers.len() != pdc_signals.len() {
        return Err(Error::param("pump powers and signals differ in length"));
    }
    if pump_powers.len() < 5 {
        return Err(Error::param("gain fit needs at least 5 points"));
    }
    if pump_powers.iter().any(|&p| !(p > 0.0 && p.is_finite())) {
        return Err(Error::param("pump powers must be positive"));
    }
    if pump_powers.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::param("pump powers must be strictly increasing"));
    }
    if pdc_signals.iter().any(|&s| !(s > 0.0 && s.is_finite())) {
        return Err(Error::param("PDC signals must be positive"));
    }

    let max_power = *pump_powers.last().unwrap();
    let problem = GainProblem {
        scaled_root: pump_powers.iter().map(|p| (p / max_power).sqrt()).collect(),
        ln_signal: pdc_signals.iter().map(|s| s.ln()).collect(),
    };
    let n = pump_powers.len() as f64;

    let best_ln_b = |gamma: f64| {
        let offset: f64 = problem
            .scaled_root
            .iter()
            .zip(&problem.ln_signal)
            .map(|(&s, &y)| y - problem.shape(gamma, s))
            .sum::<f64>()
            / n;
        let chi2: f64 = problem
            .scaled_root
            .iter()
            .zip(&problem.ln_signal)
            .map(|(&s, &y)| (offset + problem.shape(gamma, s) - y).powi(2))
            .sum();
        (offset, chi2)
    };
    let start = [0.1, 0.5, 1.0, 2.0, 4.0, 8.0, 12.0, 16.0, 20.0, 30.0, 50.0]
        .into_iter()
        .map(|g| (g, best_ln_b(g)))
        .min_by(|a, b| a.1 .1.total_cmp(&b.1 .1))
        .map(|(g, (ln_b, _))| [g, ln_b])
        .unwrap();

    let out = minimize(&problem, start, &LmConfig::default());
    let gamma = out.params[0].abs();
    let signal_at_max = out.params[1].exp();
    if !out.converged {
        return Err(Error::FitNonConvergence {
            iterations: out.iterations,
            last: vec![gamma, signal_at_max / mean_photons_from_gain(gamma).unwrap_or(f64::NAN)],
        });
    }

    let dof = (n - 2.0).max(1.0);
    let residual_var = out.chi2 / dof;
    let gamma_std_error = out
        .curvature
        .try_inverse()
        .map(|c| (c[(0, 0)] * residual_var).sqrt())
        .unwrap_or(f64::INFINITY);
    let degenerate = (2.0 * ln_sinhc(gamma)).exp_m1() < GAIN_DEGENERACY_NONLINEARITY;
    let scale = match mean_photons_from_gain(gamma) {
        Ok(nph) if nph > 0.0 => signal_at_max / nph,
        _ => f64::INFINITY,
    };

    Ok(GainFit {
        gamma_max: gamma,
        gamma_std_error,
        scale,
        signal_at_max,
        max_power,
        residual_norm: out.chi2.sqrt(),
        iterations: out.iterations,
        degenerate,
    })
}

/// Coherence and detection geometry of one measurement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModeGeometry {
    /// τ_coh, seconds.
    pub coherence_time: f64,
    /// ρ_coh², m².
    pub coherence_radius_sq: f64,
    /// τ_det, seconds.
    pub detection_time: f64,
    /// ρ_det², m².
    pub detection_radius_sq: f64,
    /// Phase velocity of light in the medium, m/s.
    pub phase_velocity: f64,
    /// θ_det, radians.
    pub detected_angle: f64,
    /// Angular mode size (FWHM), radians.
    pub mode_angle_fwhm: f64,
    /// Δλ_det, nm.
    pub detected_bandwidth: f64,
    /// Δλ_mode, nm.
    pub mode_bandwidth: f64,
}

impl ModeGeometry {
    /// Geometry with the given angular and spectral ratios and matched
    /// coherence/detection volumes.
    pub fn from_angles_and_bandwidths(
        detected_angle: f64,
        mode_angle_fwhm: f64,
        detected_bandwidth: f64,
        mode_bandwidth: f64,
    ) -> Result<Self> {
        let g = ModeGeometry {
            coherence_time: 1e-12,
            coherence_radius_sq: 1e-8,
            detection_time: 1e-12,
            detection_radius_sq: 1e-8,
            phase_velocity: 2e8,
            detected_angle,
            mode_angle_fwhm,
            detected_bandwidth,
            mode_bandwidth,
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("coherence_time", self.coherence_time),
            ("coherence_radius_sq", self.coherence_radius_sq),
            ("detection_time", self.detection_time),
            ("detection_radius_sq", self.detection_radius_sq),
            ("phase_velocity", self.phase_velocity),
            ("detected_angle", self.detected_angle),
            ("mode_angle_fwhm", self.mode_angle_fwhm),
            ("detected_bandwidth", self.detected_bandwidth),
            ("mode_bandwidth", self.mode_bandwidth),
        ];
        for (name, v) in fields {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(format!("{name} must be positive (got {v})")));
            }
        }
        Ok(())
    }

    /// V_coh = c·τ_coh·ρ_coh².
    pub fn coherence_volume(&self) -> f64 {
        self.phase_velocity * self.coherence_time * self.coherence_radius_sq
    }

    /// V_det = c·τ_det·ρ_det².
    pub fn detection_volume(&self) -> f64 {
        self.phase_velocity * self.detection_time * self.detection_radius_sq
    }

    /// V_det/V_coh; single-mode statistics need this ≪ 1.
    pub fn volume_ratio(&self) -> f64 {
        self.detection_volume() / self.coherence_volume()
    }

    /// m = max(1, Δλ_det/Δλ_mode) · max(1, (θ_det/θ_mode)²).
    ///
    /// A detector smaller than the mode in one dimension still sees one
    /// mode there. This is advisory: scenarios take m directly.
    pub fn effective_mode_count(&self) -> f64 {
        let spectral = (self.detected_bandwidth / self.mode_bandwidth).max(1.0);
        let angular = (self.detected_angle / self.mode_angle_fwhm).powi(2).max(1.0);
        spectral * angular
    }
}

/// g⁽²⁾ measured over `m` modes: 1 + (g − 1)/m.
pub fn reduce_g2(single_mode_g2: f64, m: f64) -> Result<f64> {
    if m.is_nan() || m < 1.0 {
        return Err(Error::param(format!("mode count must be at least 1 (got {m})")));
    }
    if single_mode_g2.is_nan() || single_mode_g2 < 1.0 {
        return Err(Error::param(format!(
            "single-mode g2 must be at least 1 (got {single_mode_g2})"
        )));
    }
    if m.is_infinite() {
        return Ok(1.0);
    }
    Ok(1.0 + (single_mode_g2 - 1.0) / m)
}

/// Independent modes with unequal mean photon numbers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModeComposition {
    per_mode_means: Vec<f64>,
}

impl ModeComposition {
    pub fn new(per_mode_means: Vec<f64>) -> Result<Self> {
        if per_mode_means.is_empty() {
            return Err(Error::param("a mode composition needs at least one mode"));
        }
        if let Some(&bad) = per_mode_means.iter().find(|&&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::InvalidMean(bad));
        }
        Ok(ModeComposition { per_mode_means })
    }

    pub fn single(mean: f64) -> Result<Self> {
        Self::new(vec![mean])
    }

    /// `k` equal modes sharing `total_mean`.
    pub fn equal(k: usize, total_mean: f64) -> Result<Self> {
        if k == 0 {
            return Err(Error::param("mode count must be at least 1"));
        }
        Self::new(vec![total_mean / k as f64; k])
    }

    pub fn per_mode_means(&self) -> &[f64] {
        &self.per_mode_means
    }

    pub fn total_mean(&self) -> f64 {
        self.per_mode_means.iter().sum()
    }

    /// (Σ Nᵢ)² / Σ Nᵢ².
    pub fn effective_mode_count(&self) -> f64 {
        let sum: f64 = self.per_mode_means.iter().sum();
        let sum_sq: f64 = self.per_mode_means.iter().map(|n| n * n).sum();
        sum * sum / sum_sq
    }
}

/// Realises a fractional effective mode number as ⌊m⌋ equal modes plus one
/// weaker remainder mode of relative weight x ∈ (0, 1), where x solves
/// (⌊m⌋ + x)² / (⌊m⌋ + x²) = m. For 1 < m < 2 this is the two-mode
/// composition with ratio x; integer m gives m equal modes.
pub fn compose_fractional_m(target_m: f64, total_mean: f64) -> Result<ModeComposition> {
    if !(target_m >= 1.0 && target_m.is_finite()) {
        return Err(Error::param(format!(
            "target m must be a finite number ≥ 1 (got {target_m})"
        )));
    }
    if !(total_mean > 0.0 && total_mean.is_finite()) {
        return Err(Error::InvalidMean(total_mean));
    }
    let equal = target_m.floor();
    let frac = target_m - equal;
    let j = equal;
    let mut weights = vec![1.0; j as usize];
    if frac > 0.0 {
        // smaller root of (m−1)x² − 2jx + j(m−j) = 0, in cancellation-free form
        let disc = (j * j - (target_m - 1.0) * j * (target_m - j)).max(0.0);
        let x = j * (target_m - j) / (j + disc.sqrt());
        if x > 0.0 {
            weights.push(x);
        }
    }
    let norm: f64 = weights.iter().sum();
    ModeComposition::new(weights.into_iter().map(|w| total_mean * w / norm).collect())
}

/// The remainder-to-main mode ratio for 1 ≤ m ≤ 2 (`None` at m = 1).
pub fn two_mode_ratio(target_m: f64) -> Option<f64> {
    let c = compose_fractional_m(target_m, 1.0).ok()?;
    match c.per_mode_means() {
        [a, b] => Some(b / a),
        _ => None,
    }
}
