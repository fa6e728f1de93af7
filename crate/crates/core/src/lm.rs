//! Small fixed-size Levenberg-Marquardt solver.
//!
//! Damping schedule: the step solves (JᵀJ + λ·D)δ = −Jᵀr with D the
//! diagonal of JᵀJ (floored at 1e-12 of its largest entry). λ starts at
//! `initial_lambda`, is multiplied by `lambda_down` after an accepted step
//! and by `lambda_up` after a rejected one. The fit has converged when an
//! accepted step lowers χ² by less than `ftol`·χ² or moves every parameter
//! by less than `xtol` relative, when χ² reaches zero, or when λ exceeds
//! `lambda_max` (no downhill direction left).

use nalgebra::{SMatrix, SVector};

#[derive(Debug, Clone, Copy)]
pub struct LmConfig {
    pub max_iterations: usize,
    pub initial_lambda: f64,
    pub lambda_up: f64,
    pub lambda_down: f64,
    pub lambda_max: f64,
    pub ftol: f64,
    pub xtol: f64,
}

impl Default for LmConfig {
    fn default() -> Self {
        LmConfig {
            max_iterations: 500,
            initial_lambda: 1e-3,
            lambda_up: 10.0,
            lambda_down: 0.1,
            lambda_max: 1e14,
            ftol: 1e-15,
            xtol: 1e-13,
        }
    }
}

/// Weighted residuals (already divided by their standard deviations) and
/// the Jacobian rows, one per data point.
pub trait Residuals<const P: usize> {
    fn evaluate(&self, params: &[f64; P], residuals: &mut Vec<f64>, jacobian: &mut Vec<[f64; P]>);
}

#[derive(Debug, Clone)]
pub struct LmOutcome<const P: usize> {
    pub params: [f64; P],
    pub chi2: f64,
    /// JᵀJ at `params`.
    pub curvature: SMatrix<f64, P, P>,
    pub residuals: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
}

fn normal_equations<const P: usize>(
    residuals: &[f64],
    jacobian: &[[f64; P]],
) -> (SMatrix<f64, P, P>, SVector<f64, P>, f64) {
    let mut jtj = SMatrix::<f64, P, P>::zeros();
    let mut jtr = SVector::<f64, P>::zeros();
    let mut chi2 = 0.0;
    for (r, row) in residuals.iter().zip(jacobian) {
        chi2 += r * r;
        for i in 0..P {
            jtr[i] += row[i] * r;
            for j in 0..P {
                jtj[(i, j)] += row[i] * row[j];
            }
        }
    }
    (jtj, jtr, chi2)
}

pub fn minimize<const P: usize, F: Residuals<P>>(problem: &F, initial: [f64; P], config: &LmConfig) -> LmOutcome<P> {
    let mut params = initial;
    let mut res = Vec::new();
    let mut jac = Vec::new();
    problem.evaluate(&params, &mut res, &mut jac);
    let (mut jtj, mut jtr, mut chi2) = normal_equations(&res, &jac);
    let mut lambda = config.initial_lambda;
    let mut converged = !chi2.is_finite() || chi2 == 0.0;
    let mut iterations = 0;

    let mut trial_res = Vec::new();
    let mut trial_jac = Vec::new();
    while !converged && iterations < config.max_iterations {
        iterations += 1;
        let max_diag = (0..P).map(|i| jtj[(i, i)]).fold(0.0f64, f64::max);
        let floor = (max_diag * 1e-12).max(f64::MIN_POSITIVE);
        let mut damped = jtj;
        for i in 0..P {
            damped[(i, i)] += lambda * jtj[(i, i)].max(floor);
        }
        let step = match damped.cholesky() {
            Some(c) => c.solve(&(-jtr)),
            None => {
                lambda *= config.lambda_up;
                if lambda > config.lambda_max {
                    converged = true;
                }
                continue;
            }
        };
        let mut trial = params;
        for i in 0..P {
            trial[i] += step[i];
        }
        problem.evaluate(&trial, &mut trial_res, &mut trial_jac);
        let (t_jtj, t_jtr, t_chi2) = normal_equations(&trial_res, &trial_jac);
        if t_chi2.is_finite() && t_chi2 < chi2 {
            let small_step = (0..P).all(|i| step[i].abs() <= config.xtol * (params[i].abs() + config.xtol));
            let small_gain = chi2 - t_chi2 <= config.ftol * chi2;
            params = trial;
            std::mem::swap(&mut res, &mut trial_res);
            std::mem::swap(&mut jac, &mut trial_jac);
            jtj = t_jtj;
            jtr = t_jtr;
            chi2 = t_chi2;
            lambda = (lambda * config.lambda_down).max(1e-15);
            converged = small_step || small_gain || chi2 == 0.0;
        } else {
            lambda *= config.lambda_up;
            if lambda > config.lambda_max {
                converged = true;
            }
        }
    }

    LmOutcome {
        params,
        chi2,
        curvature: jtj,
        residuals: res,
        iterations,
        converged,
    }
}
