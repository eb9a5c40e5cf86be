use nalgebra::DMatrix;
use petgraph::algo::dijkstra;
use petgraph::graph::UnGraph;

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

/// Geodesic distances with edge length `1 / weight`.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix(pub DMatrix<f64>);

impl DistanceMatrix {
    pub fn get(&self, k: usize, j: usize) -> f64 {
        self.0[(k, j)]
    }
}

/// Distances and `kappa_close(k) = (mean_j d(k, j))^{-1}`, the mean taken
/// over all `n` nodes including `k` itself.
pub fn geodesic_closeness(mirror: &WeightedDigraph) -> Result<(DistanceMatrix, Vec<f64>)> {
    if !mirror.is_symmetric() {
        return Err(Error::NotUndirected);
    }
    let n = mirror.node_count();
    let mut g = UnGraph::<(), f64>::with_capacity(n, mirror.edges().len() / 2);
    let nodes: Vec<_> = (0..n).map(|_| g.add_node(())).collect();
    for e in mirror.edges().iter().filter(|e| e.source < e.target) {
        g.add_edge(nodes[e.source], nodes[e.target], 1.0 / e.weight);
    }

    let mut d = DMatrix::from_element(n, n, f64::INFINITY);
    for k in 0..n {
        let reached = dijkstra(&g, nodes[k], None, |e| *e.weight());
        if reached.len() != n {
            return Err(Error::Disconnected);
        }
        for (node, dist) in reached {
            d[(k, node.index())] = dist;
        }
    }
    let closeness = (0..n)
        .map(|k| n as f64 / d.row(k).sum())
        .collect();
    Ok((DistanceMatrix(d), closeness))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fig1_closeness() {
        let g = WeightedDigraph::undirected(
            5,
            [(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3)].map(|(k, j)| (k, j, 1.0)),
        )
        .unwrap();
        let (_, c) = geodesic_closeness(&g).unwrap();
        let expect = [1.0, 1.0, 5.0 / 6.0, 5.0 / 6.0, 5.0 / 6.0];
        for (a, b) in c.iter().zip(expect) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn pair_and_path() {
        let pair = WeightedDigraph::undirected(2, [(0, 1, 1.0)]).unwrap();
        let (d, c) = geodesic_closeness(&pair).unwrap();
        assert_eq!(d.get(0, 1), 1.0);
        assert_eq!(c, vec![2.0, 2.0]);

        let path = WeightedDigraph::undirected(3, [(0, 1, 1.0), (1, 2, 1.0)]).unwrap();
        let (_, c) = geodesic_closeness(&path).unwrap();
        assert_eq!(c[1], 1.5);
    }

    #[test]
    fn weights_shorten_edges() {
        // Direct edge of length 1/0.25 = 4 loses to the two-hop route of length 1.
        let g = WeightedDigraph::undirected(3, [(0, 2, 0.25), (0, 1, 2.0), (1, 2, 2.0)]).unwrap();
        let (d, _) = geodesic_closeness(&g).unwrap();
        assert_eq!(d.get(0, 2), 1.0);
    }

    #[test]
    fn errors() {
        let split = WeightedDigraph::undirected(4, [(0, 1, 1.0), (2, 3, 1.0)]).unwrap();
        assert!(matches!(geodesic_closeness(&split), Err(Error::Disconnected)));
        let directed = WeightedDigraph::new(2, [(0, 1, 1.0)]).unwrap();
        assert!(matches!(geodesic_closeness(&directed), Err(Error::NotUndirected)));
    }
}
