#![allow(dead_code)]

use node_certainty::graph::WeightedDigraph;
use rand::Rng;

/// Five-node reference graph, 0-based: edges 12, 14, 15, 23, 25, 34.
pub fn fig1() -> WeightedDigraph {
    WeightedDigraph::undirected(
        5,
        [(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3)].map(|(k, j)| (k, j, 1.0)),
    )
    .unwrap()
}

/// Random labelled tree: node `k >= 1` attaches to a uniformly chosen earlier node.
pub fn random_tree(rng: &mut impl Rng, n: usize, lo: f64, hi: f64) -> WeightedDigraph {
    let edges: Vec<_> = (1..n)
        .map(|k| (rng.random_range(0..k), k, rng.random_range(lo..=hi)))
        .collect();
    WeightedDigraph::undirected(n, edges).unwrap()
}

/// Random connected undirected graph: a random tree plus each remaining pair
/// with probability `p`.
pub fn random_connected(rng: &mut impl Rng, n: usize, p: f64, lo: f64, hi: f64) -> WeightedDigraph {
    let tree = random_tree(rng, n, lo, hi);
    let mut edges: Vec<_> = tree
        .edges()
        .iter()
        .filter(|e| e.source < e.target)
        .map(|e| (e.source, e.target, e.weight))
        .collect();
    for k in 0..n {
        for j in k + 1..n {
            if tree.weight(k, j) == 0.0 && rng.random_bool(p) {
                edges.push((k, j, rng.random_range(lo..=hi)));
            }
        }
    }
    WeightedDigraph::undirected(n, edges).unwrap()
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}
