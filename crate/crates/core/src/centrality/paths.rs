//! Brute-force pairwise information from explicit path enumeration.
//!
//! Every simple path between `k` and `j` is listed, the overlap matrix `D`
//! is assembled (`D(r, r)` = weighted length of path `r`, `D(r, s)` = summed
//! inverse weights of the edges shared by paths `r` and `s`), and the
//! information carried by the combined path is `sum_{r,s} (D^{-1})_{rs}`.

use std::collections::BTreeSet;

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::WeightedDigraph;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathCaps {
    pub max_nodes: usize,
    pub max_paths: usize,
}

impl Default for PathCaps {
    fn default() -> Self {
        Self {
            max_nodes: 10,
            max_paths: 10_000,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PathBundle {
    pub source: usize,
    pub target: usize,
    /// Vertex sequences from `source` to `target`, lexicographically sorted.
    pub paths: Vec<Vec<usize>>,
    pub overlap: DMatrix<f64>,
}

impl PathBundle {
    /// Weighted length (`sum 1/w`) of each path.
    pub fn lengths(&self) -> Vec<f64> {
        self.overlap.diagonal().iter().copied().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CombinedPath {
    pub bundle: PathBundle,
    /// `I_kj = 1 / l_w(combined path)`.
    pub information: f64,
}

fn edge_key(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

fn simple_paths(g: &WeightedDigraph, source: usize, target: usize, cap: usize) -> Result<Vec<Vec<usize>>> {
    let mut found = Vec::new();
    let mut on_path = vec![false; g.node_count()];
    let mut path = vec![source];
    on_path[source] = true;
    // One pending-neighbour list per vertex on the current path.
    let mut stack: Vec<Vec<usize>> = vec![g.neighbors(source).map(|(j, _)| j).collect()];
    while let Some(frontier) = stack.last_mut() {
        match frontier.pop() {
            None => {
                stack.pop();
                if let Some(v) = path.pop() {
                    on_path[v] = false;
                }
            }
            Some(next) if on_path[next] => {}
            Some(next) if next == target => {
                let mut p = path.clone();
                p.push(next);
                found.push(p);
                if found.len() > cap {
                    return Err(Error::CapExceeded {
                        what: "simple path count",
                        cap,
                    });
                }
            }
            Some(next) => {
                on_path[next] = true;
                path.push(next);
                stack.push(g.neighbors(next).map(|(j, _)| j).collect());
            }
        }
    }
    Ok(found)
}

pub fn enumerate_combined_paths(
    mirror: &WeightedDigraph,
    source: usize,
    target: usize,
    caps: &PathCaps,
) -> Result<CombinedPath> {
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
    if source >= n || target >= n || source == target {
        return Err(Error::InvalidPair(source, target));
    }

    let mut paths = simple_paths(mirror, source, target, caps.max_paths)?;
    paths.sort();
    if paths.is_empty() {
        return Err(Error::Disconnected);
    }

    let edge_sets: Vec<BTreeSet<(usize, usize)>> = paths
        .iter()
        .map(|p| p.windows(2).map(|w| edge_key(w[0], w[1])).collect())
        .collect();
    let m = paths.len();
    let overlap = DMatrix::from_fn(m, m, |r, s| {
        edge_sets[r]
            .intersection(&edge_sets[s])
            .fold(0.0, |acc, &(a, b)| acc + 1.0 / mirror.weight(a, b))
    });

    let chol = Cholesky::new(overlap.clone()).ok_or(Error::SingularPathMatrix(source, target))?;
    let diag_min = chol.l_dirty().diagonal().iter().fold(f64::INFINITY, |a, &b| a.min(b));
    let diag_max = chol.l_dirty().diagonal().amax();
    if diag_min <= 1e-7 * diag_max {
        return Err(Error::SingularPathMatrix(source, target));
    }
    let y = chol.solve(&DVector::from_element(m, 1.0));
    Ok(CombinedPath {
        bundle: PathBundle {
            source,
            target,
            paths,
            overlap,
        },
        information: y.sum(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig1() -> WeightedDigraph {
        WeightedDigraph::undirected(
            5,
            [(0, 1), (0, 3), (0, 4), (1, 2), (1, 4), (2, 3)].map(|(k, j)| (k, j, 1.0)),
        )
        .unwrap()
    }

    #[test]
    fn fig1_pair_1_4() {
        let c = enumerate_combined_paths(&fig1(), 0, 3, &PathCaps::default()).unwrap();
        let mut lengths = c.bundle.lengths();
        lengths.sort_by(f64::total_cmp);
        assert_eq!(lengths, vec![1.0, 3.0, 4.0]);
        assert!(c.bundle.paths.contains(&vec![0, 4, 1, 2, 3]));
        // Matrix route: 11/8.
        assert!((c.information - 1.375).abs() < 1e-12);
    }

    #[test]
    fn fig1_pair_1_5() {
        let c = enumerate_combined_paths(&fig1(), 0, 4, &PathCaps::default()).unwrap();
        let mut lengths = c.bundle.lengths();
        lengths.sort_by(f64::total_cmp);
        assert_eq!(lengths, vec![1.0, 2.0, 4.0]);
    }

    #[test]
    fn overlap_matrix_shape() {
        let c = enumerate_combined_paths(&fig1(), 2, 4, &PathCaps::default()).unwrap();
        let d = &c.bundle.overlap;
        assert_eq!(d, &d.transpose());
        for r in 0..d.nrows() {
            for s in 0..d.ncols() {
                assert!(d[(r, r)] >= d[(r, s)] && d[(r, s)] >= 0.0);
            }
        }
    }

    #[test]
    fn tree_has_single_path() {
        let g = WeightedDigraph::undirected(4, [(0, 1, 2.0), (1, 2, 0.5), (1, 3, 1.0)]).unwrap();
        let c = enumerate_combined_paths(&g, 0, 2, &PathCaps::default()).unwrap();
        assert_eq!(c.bundle.paths, vec![vec![0, 1, 2]]);
        assert!((c.information - 1.0 / 2.5).abs() < 1e-15);
    }

    #[test]
    fn caps_enforced() {
        let caps = PathCaps {
            max_nodes: 4,
            max_paths: 10_000,
        };
        assert!(matches!(
            enumerate_combined_paths(&fig1(), 0, 1, &caps),
            Err(Error::CapExceeded { .. })
        ));
        let caps = PathCaps {
            max_nodes: 10,
            max_paths: 2,
        };
        assert!(matches!(
            enumerate_combined_paths(&fig1(), 0, 1, &caps),
            Err(Error::CapExceeded { .. })
        ));
        assert!(matches!(
            enumerate_combined_paths(&fig1(), 1, 1, &PathCaps::default()),
            Err(Error::InvalidPair(1, 1))
        ));
    }
}
