//! Consensus over weighted digraphs and pseudo-gradient play in zero-sum
//! bilinear games.

use crate::error::{Error, Result};
use crate::matrix::Matrix;

/// Weighted digraph on nodes `0..n`; `weight(i, j)` is the weight of the edge
/// `i → j` (agent `i` listens to agent `j`).
#[derive(Debug, Clone, PartialEq)]
pub struct DirectedWeightedGraph {
    weights: Matrix,
}

impl DirectedWeightedGraph {
    /// Graph with no edges.
    pub fn new(n_nodes: usize) -> Result<Self> {
        if n_nodes == 0 {
            return Err(Error::model("graph needs at least one node"));
        }
        Ok(DirectedWeightedGraph {
            weights: Matrix::zeros(n_nodes, n_nodes),
        })
    }

    pub fn from_weights(weights: Matrix) -> Result<Self> {
        weights.check_operator()?;
        for i in 0..weights.dim() {
            if weights[(i, i)] != 0.0 {
                return Err(Error::model(format!("self-loop at node {i}")));
            }
            for j in 0..weights.dim() {
                if weights[(i, j)] < 0.0 {
                    return Err(Error::model(format!("negative weight on edge ({i}, {j})")));
                }
            }
        }
        Ok(DirectedWeightedGraph { weights })
    }

    /// Builds a graph from `(i, j, w)` triples with 0-based node indices.
    pub fn from_edges(n_nodes: usize, edges: &[(usize, usize, f64)]) -> Result<Self> {
        let mut g = Self::new(n_nodes)?;
        for &(i, j, w) in edges {
            g.add_edge(i, j, w)?;
        }
        Ok(g)
    }

    pub fn add_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        let n = self.n_nodes();
        if i >= n || j >= n {
            return Err(Error::model(format!("edge ({i}, {j}) out of range for {n} nodes")));
        }
        if i == j {
            return Err(Error::model(format!("self-loop at node {i}")));
        }
        if !(w >= 0.0) || !w.is_finite() {
            return Err(Error::model(format!("edge ({i}, {j}) has invalid weight {w}")));
        }
        if self.weights[(i, j)] != 0.0 {
            return Err(Error::model(format!("duplicate edge ({i}, {j})")));
        }
        self.weights[(i, j)] = w;
        Ok(())
    }

    pub fn n_nodes(&self) -> usize {
        self.weights.dim()
    }

    pub fn weights(&self) -> &Matrix {
        &self.weights
    }

    /// Every node reaches every other node along positive-weight edges.
    pub fn is_strongly_connected(&self) -> bool {
        let n = self.n_nodes();
        let reach = |forward: bool| {
            let mut seen = vec![false; n];
            let mut stack = vec![0];
            seen[0] = true;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    let w = if forward { self.weights[(u, v)] } else { self.weights[(v, u)] };
                    if w > 0.0 && !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
            seen.into_iter().all(|s| s)
        };
        reach(true) && reach(false)
    }
}

/// `L = D_out − A` with `D_out` the diagonal of row sums.
pub fn laplacian(g: &DirectedWeightedGraph) -> Matrix {
    let w = g.weights();
    let n = g.n_nodes();
    let mut l = w.scale(-1.0);
    for i in 0..n {
        l[(i, i)] = w.row(i).iter().sum();
    }
    l
}

/// `I − L`, the operator relaxed by the consensus protocol.
pub fn consensus_operator(l: &Matrix) -> Result<Matrix> {
    l.check_operator()?;
    Ok(l.affine_with_identity(1.0, -1.0))
}

/// All entries agree with their mean to `tol·(1 + |mean|)`.
pub fn is_consensus(x: &[f64], tol: f64) -> Result<bool> {
    if !(tol > 0.0) {
        return Err(Error::parameter(format!("tolerance must be positive, got {tol}")));
    }
    if x.is_empty() {
        return Ok(true);
    }
    let mean = x.iter().sum::<f64>() / x.len() as f64;
    let spread = x.iter().fold(0.0f64, |m, v| m.max((v - mean).abs()));
    Ok(spread <= tol * (1.0 + mean.abs()))
}

/// Two-player zero-sum game with costs `f1 = x1ᵀ C x2` and `f2 = −x1ᵀ C x2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ZeroSumGame {
    c: Matrix,
}

impl ZeroSumGame {
    pub fn new(c: Matrix) -> Result<Self> {
        c.check_operator()?;
        let scale = c.max_abs();
        if scale == 0.0 {
            return Err(Error::model("coupling matrix C must be nonzero"));
        }
        if c.asymmetry() > 1e-14 * scale {
            return Err(Error::model("coupling matrix C must be symmetric"));
        }
        Ok(ZeroSumGame { c })
    }

    pub fn coupling(&self) -> &Matrix {
        &self.c
    }

    /// Dimension of each player's decision.
    pub fn player_dim(&self) -> usize {
        self.c.dim()
    }
}

/// `F = [[0, 1], [−1, 0]] ⊗ C`.
pub fn pseudogradient_matrix(game: &ZeroSumGame) -> Matrix {
    let j = Matrix::from_rows(&[[0.0, 1.0], [-1.0, 0.0]]).expect("2x2");
    j.kron(&game.c)
}

/// `I − F`.
pub fn game_iteration_operator(game: &ZeroSumGame) -> Matrix {
    pseudogradient_matrix(game).affine_with_identity(1.0, -1.0)
}
