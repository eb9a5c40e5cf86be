//! Weighted digraphs, their Laplacians, structural classification and the
//! mirror (symmetrized) graph.
//!
//! Edges follow the sensing convention: edge `(k, j)` with weight `a_kj`
//! means node `k` observes the state of node `j`, so row `k` of the
//! Laplacian carries `-a_kj` off the diagonal. Indices are 0-based in the
//! Rust API; file formats and reports use 1-based indices.

use nalgebra::DMatrix;
use petgraph::algo::kosaraju_scc;
use petgraph::graph::DiGraph;
use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Edge {
    pub source: usize,
    pub target: usize,
    pub weight: f64,
}

/// Immutable weighted digraph without self-loops or parallel edges.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    // Sorted by (source, target).
    edges: Vec<Edge>,
}

impl WeightedDigraph {
    /// Validates and canonicalizes an edge list (0-based indices).
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        if n == 0 {
            return Err(Error::Empty);
        }
        let mut list = Vec::new();
        for (source, target, weight) in edges {
            for index in [source, target] {
                if index >= n {
                    return Err(Error::IndexOutOfRange { index, n });
                }
            }
            if source == target {
                return Err(Error::SelfLoop(source));
            }
            if !(weight.is_finite() && weight > 0.0) {
                return Err(Error::BadWeight {
                    source_node: source,
                    target,
                    weight,
                });
            }
            list.push(Edge {
                source,
                target,
                weight,
            });
        }
        list.sort_by_key(|e| (e.source, e.target));
        if let Some(w) = list
            .windows(2)
            .find(|w| (w[0].source, w[0].target) == (w[1].source, w[1].target))
        {
            return Err(Error::DuplicateEdge(w[0].source, w[0].target));
        }
        Ok(Self { n, edges: list })
    }

    /// Each listed pair contributes both directions with the same weight.
    pub fn undirected(n: usize, edges: impl IntoIterator<Item = (usize, usize, f64)>) -> Result<Self> {
        let both = edges
            .into_iter()
            .flat_map(|(k, j, w)| [(k, j, w), (j, k, w)])
            .collect::<Vec<_>>();
        Self::new(n, both)
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Weight of edge `(k, j)`, zero when absent.
    pub fn weight(&self, k: usize, j: usize) -> f64 {
        self.edges
            .binary_search_by_key(&(k, j), |e| (e.source, e.target))
            .map(|i| self.edges[i].weight)
            .unwrap_or(0.0)
    }

    pub fn adjacency(&self) -> DMatrix<f64> {
        let mut a = DMatrix::zeros(self.n, self.n);
        for e in &self.edges {
            a[(e.source, e.target)] = e.weight;
        }
        a
    }

    /// Out-neighbours of `k` with weights.
    pub fn neighbors(&self, k: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let start = self.edges.partition_point(|e| e.source < k);
        self.edges[start..]
            .iter()
            .take_while(move |e| e.source == k)
            .map(|e| (e.target, e.weight))
    }

    pub fn out_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.source] += e.weight;
        }
        d
    }

    pub fn in_degrees(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for e in &self.edges {
            d[e.target] += e.weight;
        }
        d
    }

    /// True when `a_kj == a_jk` for every pair (exact comparison).
    pub fn is_symmetric(&self) -> bool {
        self.edges
            .iter()
            .all(|e| self.weight(e.target, e.source) == e.weight)
    }

    /// Relabels node `k` as `perm[k]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        if perm.len() != self.n {
            return Err(Error::InvalidParams(format!(
                "permutation of length {} for {} nodes",
                perm.len(),
                self.n
            )));
        }
        Self::new(
            self.n,
            self.edges
                .iter()
                .map(|e| (perm[e.source], perm[e.target], e.weight)),
        )
    }
}

/// `build_graph` entry point with 0-based indices.
pub fn build_graph(n: usize, edges: &[(usize, usize, f64)]) -> Result<WeightedDigraph> {
    WeightedDigraph::new(n, edges.iter().copied())
}

/// Graph Laplacian `L = D_out - A`. Rows sum to exactly zero.
#[derive(Debug, Clone, PartialEq)]
pub struct Laplacian(DMatrix<f64>);

impl Laplacian {
    /// Wraps a square matrix. Callers are responsible for the Laplacian
    /// sign pattern; use [`laplacian`] for graphs.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::ShapeMismatch {
                expected: m.nrows(),
                rows: m.nrows(),
                cols: m.ncols(),
            });
        }
        Ok(Self(m))
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.0
    }

    pub fn order(&self) -> usize {
        self.0.nrows()
    }

    /// Row sums accumulated as `diag + (off-diagonals in column order)`,
    /// which is the same order used to build the diagonal.
    pub fn row_sums(&self) -> Vec<f64> {
        let n = self.order();
        (0..n)
            .map(|k| {
                let off = (0..n).filter(|&j| j != k).fold(0.0, |s, j| s + self.0[(k, j)]);
                self.0[(k, k)] + off
            })
            .collect()
    }

    pub fn inf_norm(&self) -> f64 {
        self.0
            .row_iter()
            .map(|r| r.iter().map(|x| x.abs()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    /// `(L + L^T) / 2`.
    pub fn symmetric_part(&self) -> Laplacian {
        Laplacian((&self.0 + self.0.transpose()) * 0.5)
    }

    pub fn is_symmetric(&self) -> bool {
        self.0 == self.0.transpose()
    }

    /// Frobenius norm of the commutator `L L^T - L^T L`.
    pub fn normality_residual(&self) -> f64 {
        let lt = self.0.transpose();
        (&self.0 * &lt - &lt * &self.0).norm()
    }

    /// Strong connectivity of the off-diagonal sparsity pattern.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.order();
        let pattern = (0..n).flat_map(|k| (0..n).map(move |j| (k, j)));
        strongly_connected(
            n,
            pattern.filter(|&(k, j)| k != j && self.0[(k, j)] != 0.0),
        )
    }
}

pub fn laplacian(g: &WeightedDigraph) -> Laplacian {
    let n = g.node_count();
    let mut m = DMatrix::zeros(n, n);
    for e in g.edges() {
        m[(e.source, e.target)] = -e.weight;
    }
    for k in 0..n {
        let off = (0..n).filter(|&j| j != k).fold(0.0, |s, j| s + m[(k, j)]);
        m[(k, k)] = -off;
    }
    Laplacian(m)
}

fn strongly_connected(n: usize, arcs: impl Iterator<Item = (usize, usize)>) -> bool {
    let mut dg = DiGraph::<(), ()>::with_capacity(n, 0);
    let nodes: Vec<_> = (0..n).map(|_| dg.add_node(())).collect();
    for (k, j) in arcs {
        dg.add_edge(nodes[k], nodes[j], ());
    }
    kosaraju_scc(&dg).len() == 1
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GraphProfile {
    pub out_degree: Vec<f64>,
    pub in_degree: Vec<f64>,
    pub balanced: bool,
    pub strongly_connected: bool,
    pub normal_laplacian: bool,
    pub normality_residual: f64,
}

impl GraphProfile {
    /// Normal and strongly connected: the preconditions of the spectral route.
    pub fn spectral_ready(&self) -> bool {
        self.normal_laplacian && self.strongly_connected
    }
}

/// Degree balance, strong connectivity (edge presence only) and Laplacian
/// normality within relative tolerance `tol`.
pub fn classify(g: &WeightedDigraph, tol: f64) -> GraphProfile {
    let out_degree = g.out_degrees();
    let in_degree = g.in_degrees();
    let balanced = out_degree
        .iter()
        .zip(&in_degree)
        .all(|(&o, &i)| (o - i).abs() <= tol * 1f64.max(o).max(i));
    let strongly_connected = strongly_connected(
        g.node_count(),
        g.edges().iter().map(|e| (e.source, e.target)),
    );
    let lap = laplacian(g);
    let normality_residual = lap.normality_residual();
    let scale = 1f64.max(lap.matrix().norm_squared());
    GraphProfile {
        out_degree,
        in_degree,
        balanced,
        strongly_connected,
        normal_laplacian: normality_residual <= tol * scale,
        normality_residual,
    }
}

/// Undirected graph with weights `(a_kj + a_jk) / 2`.
pub fn mirror_graph(g: &WeightedDigraph) -> WeightedDigraph {
    let mut pairs = std::collections::BTreeMap::new();
    for e in g.edges() {
        let key = (e.source.min(e.target), e.source.max(e.target));
        *pairs.entry(key).or_insert(0.0) += e.weight;
    }
    let edges = pairs
        .into_iter()
        .flat_map(|((k, j), w)| [(k, j, 0.5 * w), (j, k, 0.5 * w)]);
    WeightedDigraph::new(g.node_count(), edges).expect("mirror of a valid graph is valid")
}
