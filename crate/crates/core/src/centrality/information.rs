use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::certainty::{CertaintyReport, ModelParams, Route};
use crate::error::{Error, Result};
use crate::graph::{laplacian, Laplacian, WeightedDigraph};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InfoVariant {
    /// Inverse of the mean combined-path length (self-term zero).
    Harmonic,
    /// Mean pairwise information over the other nodes.
    Arithmetic,
}

/// `C = (L + 1 1^T)^{-1}` and the derived combined-path lengths
/// `c_kk + c_jj - 2 c_kj` (effective resistances).
#[derive(Debug, Clone, PartialEq)]
pub struct InformationMatrix {
    pub c: DMatrix<f64>,
    pub lengths: DMatrix<f64>,
}

impl InformationMatrix {
    pub fn order(&self) -> usize {
        self.c.nrows()
    }

    /// Pairwise information `I_kj`; infinite on the diagonal.
    pub fn info(&self, k: usize, j: usize) -> f64 {
        if k == j {
            f64::INFINITY
        } else {
            1.0 / self.lengths[(k, j)]
        }
    }

    /// Information centrality of every node. A lone node has infinite centrality.
    pub fn centrality(&self, variant: InfoVariant) -> Vec<f64> {
        let n = self.order();
        (0..n)
            .map(|k| {
                if n == 1 {
                    return f64::INFINITY;
                }
                match variant {
                    InfoVariant::Harmonic => n as f64 / self.lengths.row(k).sum(),
                    InfoVariant::Arithmetic => {
                        (0..n).filter(|&j| j != k).map(|j| self.info(k, j)).sum::<f64>()
                            / (n - 1) as f64
                    }
                }
            })
            .collect()
    }
}

pub fn information_matrix(mirror: &Laplacian) -> Result<InformationMatrix> {
    if !mirror.is_symmetric() {
        return Err(Error::NotSymmetric);
    }
    if !mirror.is_strongly_connected() {
        return Err(Error::Disconnected);
    }
    let n = mirror.order();
    let shifted = mirror.matrix().add_scalar(1.0);
    let c = shifted.try_inverse().ok_or(Error::Disconnected)?;
    let c = (&c + c.transpose()) * 0.5;
    let lengths = DMatrix::from_fn(n, n, |k, j| {
        if k == j {
            0.0
        } else {
            c[(k, k)] + c[(j, j)] - 2.0 * c[(k, j)]
        }
    });
    Ok(InformationMatrix { c, lengths })
}

pub fn information_centrality(mirror: &WeightedDigraph, variant: InfoVariant) -> Result<Vec<f64>> {
    if !mirror.is_symmetric() {
        return Err(Error::NotUndirected);
    }
    Ok(information_matrix(&laplacian(mirror))?.centrality(variant))
}

/// `1/mu_k = (sigma^2 / 2) (1/kappa_info(k) - K_f / n^2)`.
pub fn certainty_via_theorem1(
    kappa_info: &[f64],
    kirchhoff: f64,
    params: &ModelParams,
) -> CertaintyReport {
    let n = kappa_info.len() as f64;
    let half = 0.5 * params.sigma * params.sigma;
    let inv_mu = kappa_info
        .iter()
        .map(|&kappa| half * (1.0 / kappa - kirchhoff / (n * n)))
        .collect();
    CertaintyReport::new(inv_mu, Route::Theorem1, Some(kirchhoff))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::certainty::{kirchhoff_index, mirror_group_inverse};

    fn fig1() -> WeightedDigraph {
        WeightedDigraph::undirected(
            5,
            [(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3)].map(|(k, j)| (k, j, 1.0)),
        )
        .unwrap()
    }

    #[test]
    fn two_node_information() {
        let l = laplacian(&WeightedDigraph::undirected(2, [(0, 1, 1.0)]).unwrap());
        let m = information_matrix(&l).unwrap();
        assert!((&m.c - DMatrix::identity(2, 2) * 0.5).amax() < 1e-15);
        assert!((m.info(0, 1) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn shifted_c_is_group_inverse() {
        let l = laplacian(&fig1());
        let m = information_matrix(&l).unwrap();
        let x = mirror_group_inverse(&l).unwrap();
        let residual = (&m.c - x).add_scalar(-1.0 / 25.0).amax();
        assert!(residual < 1e-12);
    }

    #[test]
    fn fig1_variants_disagree_on_v4_v5() {
        let h = information_centrality(&fig1(), InfoVariant::Harmonic).unwrap();
        let a = information_centrality(&fig1(), InfoVariant::Arithmetic).unwrap();
        assert!(h[3] > h[4]);
        assert!(a[4] > a[3]);
        // Exact values from rational elimination: 55/31 and 11/8.
        assert!((h[0] - 55.0 / 31.0).abs() < 1e-12);
        assert!((h[4] - 11.0 / 8.0).abs() < 1e-12);
    }

    #[test]
    fn centrality_route_star_center() {
        let g = WeightedDigraph::undirected(3, [(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let l = laplacian(&g);
        let kappa = information_centrality(&g, InfoVariant::Harmonic).unwrap();
        let rep = certainty_via_theorem1(&kappa, kirchhoff_index(&l).unwrap(), &ModelParams::default());
        assert!((rep.mu(0) - 9.0).abs() < 1e-10);
    }

    #[test]
    fn complete_graph_is_uniform() {
        let g = WeightedDigraph::new(6, (0..6).flat_map(|k| (0..6).filter(move |&j| j != k).map(move |j| (k, j, 1.0)))).unwrap();
        let l = laplacian(&g);
        let kappa = information_centrality(&g, InfoVariant::Harmonic).unwrap();
        let rep = certainty_via_theorem1(&kappa, kirchhoff_index(&l).unwrap(), &ModelParams::default());
        for k in 1..6 {
            assert!((rep.inv_mu[k] - rep.inv_mu[0]).abs() < 1e-14);
        }
    }

    #[test]
    fn disconnected_rejected() {
        let l = laplacian(&WeightedDigraph::undirected(3, [(0, 1, 1.0)]).unwrap());
        assert!(matches!(information_matrix(&l), Err(Error::Disconnected)));
    }
}
