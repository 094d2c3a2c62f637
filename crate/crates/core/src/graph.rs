//! Directed communication topology among followers plus leader access links.
//!
//! Indices are 0-based internally. `adjacency[i][j] == 1` means follower `i`
//! receives the output of follower `j`; `leader_links[f] == 1` means follower
//! `f` receives the leader output.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{self, LinalgError, Matrix};

/// Below this the smallest singular value is reported as exactly zero.
pub const SINGULAR_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, PartialEq)]
pub enum GraphError {
    #[error("topology needs at least 2 followers, got {0}")]
    TooFewFollowers(usize),
    #[error("adjacency must be {n}x{n}: row {row} has {len} entries")]
    BadShape { n: usize, row: usize, len: usize },
    #[error("leader link vector has length {found}, expected {expected}")]
    LeaderLinkLength { found: usize, expected: usize },
    #[error("entry ({row}, {col}) is {value}; only 0/1 weights are supported")]
    NonBinaryWeight { row: usize, col: usize, value: u8 },
    #[error("self-edge on follower {0} (nonzero adjacency diagonal)")]
    SelfEdge(usize),
    #[error("edge references follower {index}, valid range is 1..={n}")]
    IndexOutOfRange { index: usize, n: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct GraphTopology {
    adjacency: Vec<Vec<u8>>,
    leader_links: Vec<u8>,
}

impl GraphTopology {
    pub fn new(adjacency: Vec<Vec<u8>>, leader_links: Vec<u8>) -> Result<Self, GraphError> {
        let n = adjacency.len();
        if n < 2 {
            return Err(GraphError::TooFewFollowers(n));
        }
        for (row, r) in adjacency.iter().enumerate() {
            if r.len() != n {
                return Err(GraphError::BadShape {
                    n,
                    row,
                    len: r.len(),
                });
            }
            for (col, &value) in r.iter().enumerate() {
                if value > 1 {
                    return Err(GraphError::NonBinaryWeight { row, col, value });
                }
            }
            if r[row] != 0 {
                return Err(GraphError::SelfEdge(row));
            }
        }
        if leader_links.len() != n {
            return Err(GraphError::LeaderLinkLength {
                found: leader_links.len(),
                expected: n,
            });
        }
        if let Some((col, &value)) = leader_links.iter().enumerate().find(|(_, &v)| v > 1) {
            return Err(GraphError::NonBinaryWeight {
                row: n,
                col,
                value,
            });
        }
        Ok(Self {
            adjacency,
            leader_links,
        })
    }

    /// Builds a topology from 1-based `[from, to]` follower edges and the
    /// 1-based list of followers that hear the leader.
    pub fn from_edges(
        n: usize,
        edges: &[[usize; 2]],
        leader_to: &[usize],
    ) -> Result<Self, GraphError> {
        let check = |index: usize| {
            if index == 0 || index > n {
                Err(GraphError::IndexOutOfRange { index, n })
            } else {
                Ok(index - 1)
            }
        };
        let mut adjacency = vec![vec![0u8; n]; n];
        for &[from, to] in edges {
            let (from, to) = (check(from)?, check(to)?);
            adjacency[to][from] = 1;
        }
        let mut leader_links = vec![0u8; n];
        for &f in leader_to {
            leader_links[check(f)?] = 1;
        }
        Self::new(adjacency, leader_links)
    }

    pub fn follower_count(&self) -> usize {
        self.adjacency.len()
    }

    pub fn adjacency(&self) -> &[Vec<u8>] {
        &self.adjacency
    }

    pub fn leader_links(&self) -> &[u8] {
        &self.leader_links
    }

    pub fn mu(&self, f: usize) -> u8 {
        self.leader_links[f]
    }

    /// In-degree `d_f` counted over follower edges only.
    pub fn in_degree(&self, f: usize) -> usize {
        self.adjacency[f].iter().map(|&a| usize::from(a)).sum()
    }

    /// Followers whose outputs `f` receives, ascending.
    pub fn neighbors(&self, f: usize) -> Vec<usize> {
        self.adjacency[f]
            .iter()
            .enumerate()
            .filter_map(|(j, &a)| (a == 1).then_some(j))
            .collect()
    }

    /// Edge list in the scenario-file convention (1-based `[from, to]`).
    pub fn edges(&self) -> Vec<[usize; 2]> {
        let mut edges = Vec::new();
        for (to, row) in self.adjacency.iter().enumerate() {
            for (from, &a) in row.iter().enumerate() {
                if a == 1 {
                    edges.push([from + 1, to + 1]);
                }
            }
        }
        edges
    }

    pub fn leader_to(&self) -> Vec<usize> {
        self.leader_links
            .iter()
            .enumerate()
            .filter_map(|(f, &m)| (m == 1).then_some(f + 1))
            .collect()
    }

    pub fn laplacian(&self) -> LaplacianDecomposition {
        build_laplacian(self)
    }

    pub fn has_leader_rooted_spanning_tree(&self) -> bool {
        has_leader_rooted_spanning_tree(self)
    }
}

/// Integer-valued `L̄ = D̄ − Ā`, `B = diag(μ)` and `H = L̄ + B`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LaplacianDecomposition {
    pub l_bar: Vec<Vec<i64>>,
    pub b: Vec<i64>,
    pub d_bar: Vec<i64>,
    pub h: Vec<Vec<i64>>,
}

impl LaplacianDecomposition {
    pub fn h_matrix(&self) -> Matrix {
        let rows: Vec<Vec<f64>> = self
            .h
            .iter()
            .map(|r| r.iter().map(|&v| v as f64).collect())
            .collect();
        Matrix::from_rows(&rows).expect("H is square by construction")
    }

    pub fn det_h(&self) -> i128 {
        linalg::det_exact(&self.h).expect("H is square by construction")
    }
}

pub fn build_laplacian(topology: &GraphTopology) -> LaplacianDecomposition {
    let n = topology.follower_count();
    let d_bar: Vec<i64> = (0..n).map(|f| topology.in_degree(f) as i64).collect();
    let b: Vec<i64> = topology.leader_links.iter().map(|&m| i64::from(m)).collect();
    let mut l_bar = vec![vec![0i64; n]; n];
    for i in 0..n {
        for j in 0..n {
            l_bar[i][j] = -i64::from(topology.adjacency[i][j]);
        }
        l_bar[i][i] += d_bar[i];
    }
    let mut h = l_bar.clone();
    for (i, row) in h.iter_mut().enumerate() {
        row[i] += b[i];
    }
    LaplacianDecomposition { l_bar, b, d_bar, h }
}

/// True iff every follower is reachable from the leader node.
pub fn has_leader_rooted_spanning_tree(topology: &GraphTopology) -> bool {
    let n = topology.follower_count();
    let mut seen = vec![false; n];
    let mut queue: VecDeque<usize> = (0..n).filter(|&f| topology.mu(f) == 1).collect();
    for &f in &queue {
        seen[f] = true;
    }
    while let Some(j) = queue.pop_front() {
        for i in 0..n {
            if topology.adjacency[i][j] == 1 && !seen[i] {
                seen[i] = true;
                queue.push_back(i);
            }
        }
    }
    seen.into_iter().all(|s| s)
}

pub fn min_singular_value(h: &Matrix) -> Result<f64, GraphError> {
    if !h.is_square() {
        return Err(LinalgError::NotSquare {
            rows: h.rows(),
            cols: h.cols(),
        }
        .into());
    }
    let smallest = linalg::singular_values(h).last().copied().unwrap_or(0.0);
    Ok(if smallest < SINGULAR_TOLERANCE {
        0.0
    } else {
        smallest
    })
}

/// `N̄ / (N² + N − 1)` with `N̄ = ((N−1)/N)^((N−1)/2)`: a lower bound on the
/// smallest singular value of `H` that depends only on the agent count.
pub fn conservative_lambda_min_bound(n: usize) -> Result<f64, GraphError> {
    if n < 2 {
        return Err(GraphError::TooFewFollowers(n));
    }
    let nf = n as f64;
    let n_bar = ((nf - 1.0) / nf).powf((nf - 1.0) / 2.0);
    Ok(n_bar / (nf * nf + nf - 1.0))
}
