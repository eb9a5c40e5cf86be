use nalgebra::{Cholesky, DMatrix};

use super::{CertaintyReport, ModelParams, Route};
use crate::error::{Error, Result};
use crate::graph::Laplacian;

/// Orthonormal basis of the complement of the all-ones vector (n x (n-1)).
///
/// Column `p` averages the first `p + 1` coordinates against coordinate
/// `p + 1`.
pub fn helmert_basis(n: usize) -> DMatrix<f64> {
    let mut u = DMatrix::zeros(n, n.saturating_sub(1));
    for p in 0..n.saturating_sub(1) {
        let m = (p + 1) as f64;
        let scale = 1.0 / (m * (m + 1.0)).sqrt();
        for k in 0..=p {
            u[(k, p)] = scale;
        }
        u[(p + 1, p)] = -m * scale;
    }
    u
}

/// Group inverse of a connected mirror Laplacian,
/// `U_r (U_r^T L U_r)^{-1} U_r^T` with `U_r` a Helmert basis of `1^perp`.
///
/// The reduced matrix is positive definite exactly when the graph is
/// connected; its inverse is taken by Cholesky.
pub fn mirror_group_inverse(mirror: &Laplacian) -> Result<DMatrix<f64>> {
    if !mirror.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    let n = mirror.order();
    if n == 1 {
        return Ok(DMatrix::zeros(1, 1));
    }
    if !mirror.is_strongly_connected() {
        return Err(Error::Disconnected);
    }
    let u = helmert_basis(n);
    let mut reduced = u.transpose() * mirror.matrix() * &u;
    // Symmetrize away rounding before factorizing.
    reduced = (&reduced + reduced.transpose()) * 0.5;
    let chol = Cholesky::new(reduced).ok_or(Error::Disconnected)?;
    Ok(&u * chol.inverse() * u.transpose())
}

/// Max-norm residuals of `PXP = P`, `XPX = X`, `PX = XP`, plus the
/// annihilation of the all-ones vector from both sides.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct GroupInverseResiduals {
    pub pxp: f64,
    pub xpx: f64,
    pub commute: f64,
    pub ones: f64,
}

impl GroupInverseResiduals {
    pub fn max(&self) -> f64 {
        self.pxp.max(self.xpx).max(self.commute).max(self.ones)
    }
}

pub fn group_inverse_residuals(p: &DMatrix<f64>, x: &DMatrix<f64>) -> GroupInverseResiduals {
    let max_abs = |m: DMatrix<f64>| m.amax();
    let px = p * x;
    let xp = x * p;
    let ones = DMatrix::from_element(p.nrows(), 1, 1.0);
    GroupInverseResiduals {
        pxp: max_abs(&px * p - p),
        xpx: max_abs(x * p * x - x),
        commute: max_abs(&px - &xp),
        ones: max_abs(x * &ones).max(max_abs(ones.transpose() * x)),
    }
}

/// `1/mu_k = (sigma^2 / 2) X_kk`.
pub fn certainty_group_inverse(x: &DMatrix<f64>, params: &ModelParams) -> CertaintyReport {
    let half = 0.5 * params.sigma * params.sigma;
    let n = x.nrows();
    let inv_mu = (0..n).map(|k| half * x[(k, k)]).collect();
    CertaintyReport::new(inv_mu, Route::GroupInverse, Some(n as f64 * x.trace()))
}
