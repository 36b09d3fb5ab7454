//! Weighted undirected communication graphs and their Laplacian spectra.

mod edgelist;
mod generate;
mod spectrum;

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{ensure_param, Result};

pub use edgelist::{parse_edge_list, read_edge_list, write_edge_list};
pub use generate::{barabasi_albert, chain, complete, generate_graph, ring_lattice, star, Family};
pub use spectrum::{spectrum, Mode, Spectrum, TOL_CONN, TOL_EIG};

/// Symmetric, nonnegative adjacency matrix with a zero diagonal.
///
/// Weights are stored dense and row-major; graphs in this crate are
/// desk-scale (a few hundred vertices at most).
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedGraph {
    n: usize,
    weights: Vec<f64>,
}

impl WeightedGraph {
    /// Edgeless graph on `n ≥ 2` vertices.
    pub fn empty(n: usize) -> Result<Self> {
        ensure_param!(n >= 2, "graph needs at least 2 vertices, got {n}");
        Ok(Self {
            n,
            weights: vec![0.0; n * n],
        })
    }

    /// Builds a graph from a full row-major weight matrix, checking symmetry,
    /// the zero diagonal and nonnegativity exactly.
    pub fn from_weights(n: usize, weights: Vec<f64>) -> Result<Self> {
        ensure_param!(n >= 2, "graph needs at least 2 vertices, got {n}");
        ensure_param!(
            weights.len() == n * n,
            "weight matrix has {} entries, expected {}",
            weights.len(),
            n * n
        );
        for i in 0..n {
            ensure_param!(weights[i * n + i] == 0.0, "nonzero diagonal at vertex {i}");
            for j in 0..n {
                let w = weights[i * n + j];
                ensure_param!(
                    w.is_finite() && w >= 0.0,
                    "invalid weight {w} at ({i}, {j})"
                );
                ensure_param!(w == weights[j * n + i], "asymmetric weight at ({i}, {j})");
            }
        }
        Ok(Self { n, weights })
    }

    /// Sets the weight of the undirected edge `{i, j}`; zero removes it.
    pub fn set_edge(&mut self, i: usize, j: usize, w: f64) -> Result<()> {
        ensure_param!(i < self.n && j < self.n, "vertex out of range: ({i}, {j})");
        ensure_param!(i != j, "self loop at vertex {i}");
        ensure_param!(w.is_finite() && w >= 0.0, "invalid weight {w}");
        self.weights[i * self.n + j] = w;
        self.weights[j * self.n + i] = w;
        Ok(())
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn weight(&self, i: usize, j: usize) -> f64 {
        self.weights[i * self.n + j]
    }

    /// Row-major weight matrix.
    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Undirected edges `(i, j, w)` with `i < j` and `w > 0`.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            ((i + 1)..self.n).filter_map(move |j| {
                let w = self.weight(i, j);
                (w > 0.0).then_some((i, j, w))
            })
        })
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    pub fn degree(&self, i: usize) -> f64 {
        self.weights[i * self.n..(i + 1) * self.n].iter().sum()
    }

    /// `L = D − A`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.n;
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.degree(i)
            } else {
                -self.weight(i, j)
            }
        })
    }

    /// Breadth-first search over strictly positive edges.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut reached = 1;
        while let Some(u) = queue.pop_front() {
            let row = &self.weights[u * self.n..(u + 1) * self.n];
            for (v, (&w, s)) in row.iter().zip(seen.iter_mut()).enumerate() {
                if !*s && w > 0.0 {
                    *s = true;
                    reached += 1;
                    queue.push_back(v);
                }
            }
        }
        reached == self.n
    }

    pub fn spectrum(&self) -> Result<Spectrum> {
        spectrum(self)
    }
}

/// Free-function form of [`WeightedGraph::laplacian`].
pub fn laplacian(g: &WeightedGraph) -> DMatrix<f64> {
    g.laplacian()
}

/// Free-function form of [`WeightedGraph::is_connected`].
pub fn is_connected(g: &WeightedGraph) -> bool {
    g.is_connected()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn laplacian_of_k3_and_p3() {
        let l = complete(3).unwrap().laplacian();
        let expected = DMatrix::from_row_slice(3, 3, &[2., -1., -1., -1., 2., -1., -1., -1., 2.]);
        assert_eq!(l, expected);

        let l = chain(3).unwrap().laplacian();
        let expected = DMatrix::from_row_slice(3, 3, &[1., -1., 0., -1., 2., -1., 0., -1., 1.]);
        assert_eq!(l, expected);
    }

    #[test]
    fn laplacian_rows_sum_to_zero() {
        let mut g = WeightedGraph::empty(4).unwrap();
        g.set_edge(0, 1, 0.5).unwrap();
        g.set_edge(1, 2, 2.0).unwrap();
        g.set_edge(2, 3, 1.25).unwrap();
        g.set_edge(0, 3, 3.0).unwrap();
        let l = g.laplacian();
        for i in 0..4 {
            assert!(l.row(i).sum().abs() < 1e-15);
        }
        assert_eq!(l, l.transpose());
    }

    #[test]
    fn connectivity_by_bfs() {
        assert!(complete(3).unwrap().is_connected());
        let mut g = WeightedGraph::empty(4).unwrap();
        g.set_edge(0, 1, 1.0).unwrap();
        g.set_edge(2, 3, 1.0).unwrap();
        assert!(!g.is_connected());
        assert!(!g.spectrum().unwrap().is_connected());
    }

    #[test]
    fn rejects_invalid_weight_matrices() {
        assert!(WeightedGraph::from_weights(2, vec![0., 1., 2., 0.]).is_err());
        assert!(WeightedGraph::from_weights(2, vec![1., 1., 1., 0.]).is_err());
        assert!(WeightedGraph::from_weights(2, vec![0., -1., -1., 0.]).is_err());
        assert!(WeightedGraph::from_weights(1, vec![0.]).is_err());
        assert!(WeightedGraph::from_weights(2, vec![0., 1., 1., 0.]).is_ok());
    }
}
