use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use super::{spectral_decompose, ModelParams};
use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CovarianceMode {
    /// Eigen-expansion; requires a normal, strongly connected Laplacian.
    Normal,
    /// Numerical integration of the Lyapunov differential equation; any digraph.
    General,
}

/// Fixed-step RK4 settings for the matrix ODEs.
///
/// The step used is `min(0.01, 0.1 / ||L||_inf, max_step)`, shrunk further
/// so that it divides each integration interval evenly.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Integrator {
    pub max_step: Option<f64>,
}

impl Integrator {
    pub fn with_max_step(step: f64) -> Self {
        Self {
            max_step: Some(step),
        }
    }

    pub fn step_for(&self, lap: &Laplacian) -> f64 {
        let norm = lap.inf_norm();
        let mut h = 0.01f64;
        if norm > 0.0 {
            h = h.min(0.1 / norm);
        }
        if let Some(m) = self.max_step {
            h = h.min(m);
        }
        h
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if let Some(&t) = times.iter().find(|&&t| t.is_nan() || t < 0.0) {
        return Err(Error::NegativeTime(t));
    }
    if times.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::InvalidParams("times must be nondecreasing".into()));
    }
    Ok(())
}

/// Integrates `dY/dt = f(Y)` from the current state over each interval
/// between consecutive requested times, recording the state at each.
fn rk4_trajectory(
    start: DMatrix<f64>,
    times: &[f64],
    h_max: f64,
    f: impl Fn(&DMatrix<f64>) -> DMatrix<f64>,
) -> Vec<DMatrix<f64>> {
    let mut y = start;
    let mut now = 0.0;
    let mut out = Vec::with_capacity(times.len());
    for &t in times {
        let span = t - now;
        if span > 0.0 {
            let steps = (span / h_max).ceil().max(1.0) as usize;
            let h = span / steps as f64;
            for _ in 0..steps {
                let k1 = f(&y);
                let k2 = f(&(&y + &k1 * (0.5 * h)));
                let k3 = f(&(&y + &k2 * (0.5 * h)));
                let k4 = f(&(&y + &k3 * h));
                y += (k1 + (k2 + k3) * 2.0 + k4) * (h / 6.0);
            }
        }
        now = t;
        out.push(y.clone());
    }
    out
}

/// Covariance `sigma^2 int_0^t e^{-L s} e^{-L^T s} ds` at each requested
/// time, by integrating `dP/dt = sigma^2 I - L P - P L^T` from `P(0) = 0`.
pub fn covariance_trajectory(
    lap: &Laplacian,
    params: &ModelParams,
    times: &[f64],
    integrator: &Integrator,
) -> Result<Vec<DMatrix<f64>>> {
    check_times(times)?;
    let n = lap.order();
    let l = lap.matrix();
    let forcing = DMatrix::<f64>::identity(n, n) * (params.sigma * params.sigma);
    let h = integrator.step_for(lap);
    Ok(rk4_trajectory(DMatrix::zeros(n, n), times, h, |p| {
        let lp = l * p;
        &forcing - &lp - lp.transpose()
    }))
}

/// `e^{-L t}` by integrating `dPhi/dt = -L Phi`. Rows sum to one.
pub fn propagator(lap: &Laplacian, t: f64, integrator: &Integrator) -> Result<DMatrix<f64>> {
    check_times(&[t])?;
    let n = lap.order();
    let l = lap.matrix();
    let h = integrator.step_for(lap);
    let mut out = rk4_trajectory(DMatrix::identity(n, n), &[t], h, |phi| -(l * phi));
    Ok(out.pop().expect("one time requested"))
}

/// State covariance at time `t` from a zero initial condition.
pub fn analytic_covariance(
    lap: &Laplacian,
    params: &ModelParams,
    t: f64,
    mode: CovarianceMode,
) -> Result<DMatrix<f64>> {
    if t.is_nan() || t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    match mode {
        CovarianceMode::General => {
            let mut v = covariance_trajectory(lap, params, &[t], &Integrator::default())?;
            Ok(v.pop().expect("one time requested"))
        }
        CovarianceMode::Normal => {
            let spec = spectral_decompose(lap, &Tolerances::default())?;
            let n = lap.order();
            let s2 = params.sigma * params.sigma;
            let gains: Vec<f64> = spec
                .nonzero_real_parts()
                .map(|re| -(-2.0 * re * t).exp_m1() / (2.0 * re))
                .collect();
            let mut cov = DMatrix::from_element(n, n, s2 * t / n as f64);
            for k in 0..n {
                for j in 0..n {
                    let acc: f64 = gains
                        .iter()
                        .enumerate()
                        .map(|(i, g)| {
                            let p = i + 1;
                            g * (spec.vectors[(k, p)] * spec.vectors[(j, p)].conj()).re
                        })
                        .sum();
                    cov[(k, j)] += s2 * acc;
                }
            }
            Ok(cov)
        }
    }
}
