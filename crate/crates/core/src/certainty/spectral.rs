use nalgebra::{Complex, DMatrix, Schur, SymmetricEigen};

use super::{CertaintyReport, ModelParams, Route};
use crate::error::{Error, Result};
use crate::graph::Laplacian;
use crate::tolerance::Tolerances;

pub type C64 = Complex<f64>;

/// Unitary eigendecomposition of a normal Laplacian.
///
/// Index 0 holds the zero eigenvalue with eigenvector `1/sqrt(n)`; the
/// remaining pairs are sorted by real part, then imaginary part.
#[derive(Debug, Clone)]
pub struct SpectralData {
    pub eigenvalues: Vec<C64>,
    /// Column `p` is the eigenvector of `eigenvalues[p]`.
    pub vectors: DMatrix<C64>,
    /// Column 0 is exactly the normalized all-ones vector.
    pub consensus_vector: bool,
}

impl SpectralData {
    pub fn order(&self) -> usize {
        self.eigenvalues.len()
    }

    /// Max entry of `|U* U - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let n = self.order();
        let gram = self.vectors.adjoint() * &self.vectors;
        (gram - DMatrix::<C64>::identity(n, n))
            .iter()
            .map(|z| z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest `||L u_p - lambda_p u_p||_2` over all pairs.
    pub fn eigen_residual(&self, lap: &Laplacian) -> f64 {
        let l = lap.matrix().map(|x| C64::new(x, 0.0));
        let lu = &l * &self.vectors;
        (0..self.order())
            .map(|p| {
                let r = lu.column(p) - self.vectors.column(p) * self.eigenvalues[p];
                r.norm()
            })
            .fold(0.0, f64::max)
    }

    /// Real parts of the nonzero eigenvalues, i.e. the mirror spectrum.
    pub fn nonzero_real_parts(&self) -> impl Iterator<Item = f64> + '_ {
        self.eigenvalues.iter().skip(1).map(|z| z.re)
    }
}

/// Requires a normal, strongly connected Laplacian. Symmetric input goes
/// through a real symmetric eigensolver; other normal matrices through a
/// complex Schur form, which is diagonal for normal matrices.
pub fn spectral_decompose(lap: &Laplacian, tol: &Tolerances) -> Result<SpectralData> {
    let l = lap.matrix();
    let n = lap.order();
    let residual = lap.normality_residual();
    if residual > tol.normality * 1f64.max(l.norm_squared()) {
        return Err(Error::NotNormal { residual });
    }
    if !lap.is_strongly_connected() {
        return Err(Error::NotStronglyConnected);
    }

    let (values, vectors): (Vec<C64>, DMatrix<C64>) = if lap.is_symmetric() {
        let eig = SymmetricEigen::new(l.clone());
        (
            eig.eigenvalues.iter().map(|&x| C64::new(x, 0.0)).collect(),
            eig.eigenvectors.map(|x| C64::new(x, 0.0)),
        )
    } else {
        let schur = Schur::try_new(l.map(|x| C64::new(x, 0.0)), f64::EPSILON, 10_000)
            .ok_or_else(|| Error::Numerical("complex Schur iteration did not converge".into()))?;
        let (q, t) = schur.unpack();
        ((0..n).map(|p| t[(p, p)]).collect(), q)
    };

    let zero = (0..n)
        .min_by(|&a, &b| values[a].norm().total_cmp(&values[b].norm()))
        .expect("nonempty spectrum");
    let scale = 1f64.max(l.norm());
    if values[zero].norm() > tol.zero_eigenvalue * scale {
        return Err(Error::Numerical(format!(
            "smallest eigenvalue modulus {:e} is not zero",
            values[zero].norm()
        )));
    }

    let mut order: Vec<usize> = (0..n).filter(|&p| p != zero).collect();
    order.sort_by(|&a, &b| {
        values[a]
            .re
            .total_cmp(&values[b].re)
            .then(values[a].im.total_cmp(&values[b].im))
    });

    let mut eigenvalues = Vec::with_capacity(n);
    let mut sorted = DMatrix::<C64>::zeros(n, n);
    eigenvalues.push(C64::new(0.0, 0.0));
    let unit = C64::new(1.0 / (n as f64).sqrt(), 0.0);
    sorted.column_mut(0).fill(unit);
    for (slot, &p) in order.iter().enumerate() {
        eigenvalues.push(values[p]);
        sorted.set_column(slot + 1, &vectors.column(p));
    }

    let data = SpectralData {
        eigenvalues,
        vectors: sorted,
        consensus_vector: true,
    };

    let defect = data.orthonormality_defect();
    if defect > tol.orthonormality {
        return Err(Error::Numerical(format!(
            "eigenbasis not orthonormal (defect {defect:e})"
        )));
    }
    let res = data.eigen_residual(lap);
    if res > tol.eigen_residual * scale {
        return Err(Error::Numerical(format!("eigenpair residual {res:e}")));
    }
    if let Some(bad) = data.nonzero_real_parts().find(|&re| re <= 0.0) {
        return Err(Error::Numerical(format!(
            "nonzero eigenvalue with real part {bad:e}"
        )));
    }
    Ok(data)
}

/// `1/mu_k = sigma^2 * sum_{p>=2} |u_k^(p)|^2 / (2 Re lambda_p)`.
pub fn certainty_spectral(spec: &SpectralData, params: &ModelParams) -> CertaintyReport {
    let n = spec.order();
    let s2 = params.sigma * params.sigma;
    let inv_mu = (0..n)
        .map(|k| {
            s2 * (1..n)
                .map(|p| spec.vectors[(k, p)].norm_sqr() / (2.0 * spec.eigenvalues[p].re))
                .sum::<f64>()
        })
        .collect();
    let kirchhoff = n as f64 * spec.nonzero_real_parts().map(|re| 1.0 / re).sum::<f64>();
    CertaintyReport::new(inv_mu, Route::Spectral, Some(kirchhoff))
}
