//! Numerical tolerances shared by every module.
//!
//! All thresholds live here so that checks, reports and tests agree on the
//! same numbers. Values are relative unless the field name says otherwise.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// `||L L^T - L^T L||_F <= normality * max(1, ||L||_F^2)`.
    pub normality: f64,
    /// Per-node `|deg_out - deg_in| <= balance * max(1, deg_out, deg_in)`.
    pub balance: f64,
    /// Eigenvalues with modulus below `zero_eigenvalue * max(1, ||L||_F)` count as zero.
    pub zero_eigenvalue: f64,
    /// Max deviation of `U* U` from the identity.
    pub orthonormality: f64,
    /// `||L u - lambda u|| <= eigen_residual * max(1, ||L||_F)`.
    pub eigen_residual: f64,
    /// Per-node agreement between the certainty routes (relative).
    pub route_agreement: f64,
    /// Residual allowed in group-inverse axioms and related identities (absolute, max-norm).
    pub identity_residual: f64,
    /// Ties in rankings: scores within this relative distance are equal.
    pub rank_tie: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            normality: 1e-10,
            balance: 1e-10,
            zero_eigenvalue: 1e-9,
            orthonormality: 1e-10,
            eigen_residual: 1e-9,
            route_agreement: 1e-9,
            identity_residual: 1e-9,
            rank_tie: 1e-9,
        }
    }
}

/// `|a - b| <= tol * max(1, |a|, |b|)`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    if a == b {
        return true;
    }
    (a - b).abs() <= tol * 1f64.max(a.abs()).max(b.abs())
}
