//! Node certainty index: analytic covariance of the networked
//! drift-diffusion model and the per-node index `mu` computed by
//! independent routes.
//!
//! The certainty index of node `k` is the inverse of the asymptotic gap
//! between `Var(x_k(t))` and the smallest achievable variance
//! `sigma^2 t / n`. It is stored as `1/mu`; `1/mu = 0` encodes infinite
//! certainty (a single isolated node).

mod covariance;
mod group_inverse;
mod spectral;

pub use covariance::{
    analytic_covariance, covariance_trajectory, propagator, CovarianceMode, Integrator,
};
pub use group_inverse::{
    certainty_group_inverse, group_inverse_residuals, helmert_basis, mirror_group_inverse,
    GroupInverseResiduals,
};
pub use spectral::{certainty_spectral, spectral_decompose, SpectralData, C64};

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::centrality::{certainty_via_theorem1, information_centrality, InfoVariant};
use crate::error::{Error, Result};
use crate::graph::{classify, laplacian, mirror_graph, Laplacian, WeightedDigraph};
use crate::tolerance::Tolerances;

/// Drift `beta` and diffusion standard deviation `sigma` shared by all units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ModelParams {
    pub beta: f64,
    pub sigma: f64,
}

impl ModelParams {
    pub fn new(beta: f64, sigma: f64) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::InvalidParams(format!("sigma must be positive, got {sigma}")));
        }
        if !beta.is_finite() {
            return Err(Error::InvalidParams(format!("beta must be finite, got {beta}")));
        }
        Ok(Self { beta, sigma })
    }
}

impl Default for ModelParams {
    fn default() -> Self {
        Self {
            beta: 1.0,
            sigma: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Route {
    Spectral,
    GroupInverse,
    #[serde(rename = "theorem-1")]
    Theorem1,
    ClosedForm,
}

impl Route {
    pub fn as_str(self) -> &'static str {
        match self {
            Route::Spectral => "spectral",
            Route::GroupInverse => "group-inverse",
            Route::Theorem1 => "theorem-1",
            Route::ClosedForm => "closed-form",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CertaintyReport {
    /// Per-node `1/mu`, all nonnegative.
    pub inv_mu: Vec<f64>,
    pub route: Route,
    /// Kirchhoff index of the mirror graph, when the route produces it.
    pub kirchhoff_index: Option<f64>,
    /// Sum of `inv_mu` in node order.
    pub total_dispersion: f64,
}

impl CertaintyReport {
    /// Tiny negative values from rounding are clamped to zero.
    pub fn new(inv_mu: Vec<f64>, route: Route, kirchhoff_index: Option<f64>) -> Self {
        let inv_mu: Vec<f64> = inv_mu.into_iter().map(|x| x.max(0.0)).collect();
        let total_dispersion = inv_mu.iter().sum();
        Self {
            inv_mu,
            route,
            kirchhoff_index,
            total_dispersion,
        }
    }

    pub fn order(&self) -> usize {
        self.inv_mu.len()
    }

    /// `mu` of node `k`; `f64::INFINITY` when `1/mu == 0`.
    pub fn mu(&self, k: usize) -> f64 {
        let inv = self.inv_mu[k];
        if inv == 0.0 {
            f64::INFINITY
        } else {
            1.0 / inv
        }
    }

    pub fn mu_values(&self) -> Vec<f64> {
        (0..self.order()).map(|k| self.mu(k)).collect()
    }

    /// Largest per-node relative difference in `1/mu` against another report.
    pub fn max_relative_gap(&self, other: &CertaintyReport) -> f64 {
        self.inv_mu
            .iter()
            .zip(&other.inv_mu)
            .map(|(a, b)| (a - b).abs() / 1f64.max(a.abs()).max(b.abs()))
            .fold(0.0, f64::max)
    }
}

/// Mean `beta t` and the per-node variance bounds `[sigma^2 t / n, sigma^2 t]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct VarianceEnvelope {
    pub mean: f64,
    pub lower: f64,
    pub upper: f64,
}

pub fn variance_envelope(params: &ModelParams, n: usize, t: f64) -> Result<VarianceEnvelope> {
    if t < 0.0 {
        return Err(Error::NegativeTime(t));
    }
    let upper = params.sigma * params.sigma * t;
    Ok(VarianceEnvelope {
        mean: params.beta * t,
        lower: upper / n as f64,
        upper,
    })
}

/// `n * sum_{p>=2} 1/lambda_p` over the spectrum of a symmetric Laplacian.
pub fn kirchhoff_index(mirror: &Laplacian) -> Result<f64> {
    if !mirror.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = mirror.order();
    if n == 1 {
        return Ok(0.0);
    }
    if !mirror.is_strongly_connected() {
        return Err(Error::Disconnected);
    }
    let mut values: Vec<f64> = SymmetricEigen::new(mirror.matrix().clone())
        .eigenvalues
        .iter()
        .copied()
        .collect();
    values.sort_by(f64::total_cmp);
    Ok(n as f64 * values[1..].iter().map(|l| 1.0 / l).sum::<f64>())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DispersionSummary {
    pub kirchhoff_index: f64,
    pub total_dispersion: f64,
    /// `|sum 1/mu - sigma^2 K_f / (2n)|`.
    pub identity_residual: f64,
}

pub fn dispersion_summary(
    report: &CertaintyReport,
    mirror: &Laplacian,
    params: &ModelParams,
) -> Result<DispersionSummary> {
    let kf = kirchhoff_index(mirror)?;
    let n = mirror.order() as f64;
    let predicted = params.sigma * params.sigma * kf / (2.0 * n);
    Ok(DispersionSummary {
        kirchhoff_index: kf,
        total_dispersion: report.total_dispersion,
        identity_residual: (report.total_dispersion - predicted).abs(),
    })
}

/// Every route to `1/mu`, in the order spectral, group inverse, information centrality.
///
/// The last two work on the mirror graph, which carries the certainty of a
/// normal Laplacian; they are reported as inapplicable otherwise.
pub fn certainty_routes(
    g: &WeightedDigraph,
    params: &ModelParams,
    tol: &Tolerances,
) -> Vec<(Route, Result<CertaintyReport>)> {
    let lap = laplacian(g);
    let profile = classify(g, tol.normality);
    let ready = || -> Result<()> {
        if !profile.normal_laplacian {
            Err(Error::NotNormal {
                residual: profile.normality_residual,
            })
        } else if !profile.strongly_connected {
            Err(Error::NotStronglyConnected)
        } else {
            Ok(())
        }
    };
    let spectral = spectral_decompose(&lap, tol).map(|s| certainty_spectral(&s, params));
    let group = ready()
        .and_then(|_| mirror_group_inverse(&lap.symmetric_part()))
        .map(|x| certainty_group_inverse(&x, params));
    let theorem = ready().and_then(|_| {
        let mirror = mirror_graph(g);
        let kappa = information_centrality(&mirror, InfoVariant::Harmonic)?;
        let kf = kirchhoff_index(&laplacian(&mirror))?;
        Ok(certainty_via_theorem1(&kappa, kf, params))
    });
    vec![
        (Route::Spectral, spectral),
        (Route::GroupInverse, group),
        (Route::Theorem1, theorem),
    ]
}
