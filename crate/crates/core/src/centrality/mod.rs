//! Closeness and information centrality on undirected (mirror) graphs, the
//! combined-path oracle for pairwise information, and the bridge from
//! information centrality to node certainty.

mod closeness;
mod information;
mod paths;
mod rank;

pub use closeness::{geodesic_closeness, DistanceMatrix};
pub use information::{
    certainty_via_theorem1, information_centrality, information_matrix, InfoVariant,
    InformationMatrix,
};
pub use paths::{enumerate_combined_paths, CombinedPath, PathBundle, PathCaps};
pub use rank::rank_nodes;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{laplacian, WeightedDigraph};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CentralityReport {
    pub closeness: Vec<f64>,
    pub info_harmonic: Vec<f64>,
    pub info_arithmetic: Vec<f64>,
    /// Nodes by decreasing harmonic information centrality (0-based).
    pub ranking: Vec<usize>,
}

impl CentralityReport {
    /// 1-based rank of each node under [`CentralityReport::ranking`].
    pub fn rank_of(&self) -> Vec<usize> {
        let mut r = vec![0; self.ranking.len()];
        for (pos, &k) in self.ranking.iter().enumerate() {
            r[k] = pos + 1;
        }
        r
    }
}

/// All centrality measures of an undirected connected graph.
pub fn centrality_report(mirror: &WeightedDigraph, tol: &Tolerances) -> Result<CentralityReport> {
    let (_, closeness) = geodesic_closeness(mirror)?;
    let info = information_matrix(&laplacian(mirror))?;
    let info_harmonic = info.centrality(InfoVariant::Harmonic);
    let info_arithmetic = info.centrality(InfoVariant::Arithmetic);
    let ranking = rank_nodes(&info_harmonic, tol.rank_tie);
    Ok(CentralityReport {
        closeness,
        info_harmonic,
        info_arithmetic,
        ranking,
    })
}

/// Undirected, connected and with exactly `n - 1` edges.
pub fn is_tree(mirror: &WeightedDigraph) -> bool {
    let n = mirror.node_count();
    mirror.is_symmetric()
        && mirror.edges().len() == 2 * (n - 1)
        && laplacian(mirror).is_strongly_connected()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PairComparison {
    pub source: usize,
    pub target: usize,
    pub path_count: usize,
    pub path_information: f64,
    pub matrix_information: f64,
}

impl PairComparison {
    pub fn gap(&self) -> f64 {
        (self.path_information - self.matrix_information).abs()
    }
}

/// Path-enumeration `I_kj` next to the matrix value for every pair `k < j`.
pub fn pairwise_oracle(mirror: &WeightedDigraph, caps: &PathCaps) -> Result<Vec<PairComparison>> {
    if !mirror.is_symmetric() {
        return Err(Error::NotUndirected);
    }
    let n = mirror.node_count();
    if n > caps.max_nodes {
        return Err(Error::CapExceeded {
            what: "node count",
            cap: caps.max_nodes,
        });
    }
    let info = information_matrix(&laplacian(mirror))?;
    let mut out = Vec::with_capacity(n * n.saturating_sub(1) / 2);
    for k in 0..n {
        for j in k + 1..n {
            let combined = enumerate_combined_paths(mirror, k, j, caps)?;
            out.push(PairComparison {
                source: k,
                target: j,
                path_count: combined.bundle.paths.len(),
                path_information: combined.information,
                matrix_information: info.info(k, j),
            });
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn trees_detected() {
        let path = WeightedDigraph::undirected(3, [(0, 1, 1.0), (1, 2, 2.0)]).unwrap();
        assert!(is_tree(&path));
        let tri = WeightedDigraph::undirected(3, [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)]).unwrap();
        assert!(!is_tree(&tri));
        assert!(is_tree(&WeightedDigraph::new(1, []).unwrap()));
    }

    #[test]
    fn oracle_exact_on_tree() {
        let g = WeightedDigraph::undirected(5, [(0, 1, 1.0), (1, 2, 0.5), (1, 3, 2.0), (3, 4, 1.5)]).unwrap();
        let pairs = pairwise_oracle(&g, &PathCaps::default()).unwrap();
        assert_eq!(pairs.len(), 10);
        assert!(pairs.iter().all(|p| p.path_count == 1 && p.gap() < 1e-12));
    }

    #[test]
    fn report_ranks() {
        let g = WeightedDigraph::undirected(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let r = centrality_report(&g, &Tolerances::default()).unwrap();
        assert_eq!(r.ranking, vec![1, 0, 2]);
        assert_eq!(r.rank_of(), vec![2, 1, 3]);
    }
}
