//! The banded linear model and random graphs sampled from it.
//!
//! Vertices are zero-based in this API. Files and printed output use the
//! one-based convention (see [`crate::formats`]).

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::permutation::Permutation;
use crate::solver::SymmetricOperator;

/// Size, edge probability and band half-width of the linear model.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelParams {
    n: usize,
    p: f64,
    band: usize,
}

impl ModelParams {
    /// Model with the default band `n/2 - 1`, for which the model matrix is
    /// `p(A - I)` with `A` the block-Toeplitz matrix of [`crate::model_spectrum`].
    pub fn new(n: usize, p: f64) -> Result<Self> {
        Self::with_band(n, p, (n / 2).saturating_sub(1))
    }

    pub fn with_band(n: usize, p: f64, band: usize) -> Result<Self> {
        if !n.is_multiple_of(2) {
            return Err(Error::InvalidParams(format!("n = {n} must be even")));
        }
        if n < 4 {
            return Err(Error::InvalidParams(format!("n = {n} must be at least 4")));
        }
        if !(p > 0.0 && p <= 1.0) {
            return Err(Error::InvalidParams(format!("p = {p} must lie in (0, 1]")));
        }
        if band < 1 || band > n - 1 {
            return Err(Error::InvalidParams(format!(
                "band = {band} must lie in 1..={}",
                n - 1
            )));
        }
        Ok(ModelParams { n, p, band })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn band(&self) -> usize {
        self.band
    }

    /// `s = n/2`.
    pub fn half_order(&self) -> usize {
        self.n / 2
    }

    pub fn is_default_band(&self) -> bool {
        self.band == self.n / 2 - 1
    }

    /// Per-entry variance `p(1 - p)` of the adjacency noise.
    pub fn variance(&self) -> f64 {
        self.p * (1.0 - self.p)
    }

    /// Number of upper-triangular cells inside the band.
    pub fn band_cells(&self) -> usize {
        let (n, b) = (self.n, self.band);
        // sum over offsets d = 1..=b of (n - d)
        b * n - b * (b + 1) / 2
    }
}

/// Expected adjacency: `p` at offsets `1..=band` from the diagonal.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelMatrix {
    params: ModelParams,
}

pub fn build_model_matrix(params: ModelParams) -> ModelMatrix {
    ModelMatrix { params }
}

impl ModelMatrix {
    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn entry(&self, i: usize, j: usize) -> f64 {
        let d = i.abs_diff(j);
        if d >= 1 && d <= self.params.band {
            self.params.p
        } else {
            0.0
        }
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.params.n;
        DMatrix::from_fn(n, n, |i, j| self.entry(i, j))
    }
}

impl SymmetricOperator for ModelMatrix {
    fn dim(&self) -> usize {
        self.params.n
    }

    /// Band sums through a prefix sum, O(n).
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.params.n;
        let b = self.params.band;
        let mut prefix = vec![0.0; n + 1];
        for i in 0..n {
            prefix[i + 1] = prefix[i] + x[i];
        }
        for i in 0..n {
            let lo = i.saturating_sub(b);
            let hi = (i + b).min(n - 1);
            y[i] = self.params.p * (prefix[hi + 1] - prefix[lo] - x[i]);
        }
    }
}

/// A sampled graph together with its hidden labeling.
#[derive(Clone, Debug, PartialEq)]
pub struct RandomLinearGraph {
    params: ModelParams,
    seed: u64,
    neighbors: Vec<Vec<u32>>,
    true_order: Permutation,
}

/// Draws every band cell independently as Bernoulli(p) from a ChaCha stream
/// keyed by `seed`. Cells are visited row by row, left to right.
pub fn sample_graph(params: ModelParams, seed: u64) -> RandomLinearGraph {
    let n = params.n;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    for i in 0..n {
        let hi = (i + params.band).min(n - 1);
        for j in (i + 1)..=hi {
            if rng.random::<f64>() < params.p {
                neighbors[i].push(j as u32);
                neighbors[j].push(i as u32);
            }
        }
    }
    // rows receive lower neighbors first, then upper ones, both ascending
    RandomLinearGraph {
        params,
        seed,
        neighbors,
        true_order: Permutation::identity(n),
    }
}

/// Relabels vertex `i` as `perm(i)`. The hidden order follows the vertices.
pub fn scramble(graph: &RandomLinearGraph, perm: &Permutation) -> Result<RandomLinearGraph> {
    let n = graph.n();
    if perm.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: perm.len(),
        });
    }
    let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
    let mut true_order = vec![0; n];
    for (i, row) in graph.neighbors.iter().enumerate() {
        let target = perm.get(i);
        let mut mapped: Vec<u32> = row.iter().map(|&j| perm.get(j as usize) as u32).collect();
        mapped.sort_unstable();
        neighbors[target] = mapped;
        true_order[target] = graph.true_order.get(i);
    }
    Ok(RandomLinearGraph {
        params: graph.params,
        seed: graph.seed,
        neighbors,
        true_order: Permutation::from_zero_based(true_order)?,
    })
}

pub fn degree_vector(graph: &RandomLinearGraph) -> Vec<usize> {
    graph.neighbors.iter().map(Vec::len).collect()
}

/// `|N(u) ∩ N(v)|` for distinct zero-based vertices.
pub fn common_neighbors(graph: &RandomLinearGraph, u: usize, v: usize) -> Result<usize> {
    let n = graph.n();
    for w in [u, v] {
        if w >= n {
            return Err(Error::VertexOutOfRange { vertex: w + 1, n });
        }
    }
    if u == v {
        return Err(Error::InvalidParams(format!(
            "common neighbors need distinct vertices, got {} twice",
            u + 1
        )));
    }
    Ok(sorted_intersection_len(&graph.neighbors[u], &graph.neighbors[v]))
}

fn sorted_intersection_len(a: &[u32], b: &[u32]) -> usize {
    let (mut i, mut j, mut count) = (0, 0, 0);
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                count += 1;
                i += 1;
                j += 1;
            }
        }
    }
    count
}

impl RandomLinearGraph {
    /// Builds a graph from zero-based undirected edges. Self loops and
    /// repeated edges are rejected.
    pub fn from_edges(
        params: ModelParams,
        seed: u64,
        edges: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<Self> {
        let n = params.n;
        let mut neighbors: Vec<Vec<u32>> = vec![Vec::new(); n];
        for (u, v) in edges {
            for w in [u, v] {
                if w >= n {
                    return Err(Error::VertexOutOfRange { vertex: w + 1, n });
                }
            }
            if u == v {
                return Err(Error::InvalidParams(format!("self loop at vertex {}", u + 1)));
            }
            neighbors[u].push(v as u32);
            neighbors[v].push(u as u32);
        }
        for (u, row) in neighbors.iter_mut().enumerate() {
            row.sort_unstable();
            if let Some(w) = row.windows(2).find(|w| w[0] == w[1]) {
                return Err(Error::InvalidParams(format!(
                    "duplicate edge {} {}",
                    u.min(w[0] as usize) + 1,
                    u.max(w[0] as usize) + 1
                )));
            }
        }
        Ok(RandomLinearGraph {
            params,
            seed,
            neighbors,
            true_order: Permutation::identity(n),
        })
    }

    /// Replaces the hidden labeling (row index to latent position).
    pub fn with_true_order(mut self, true_order: Permutation) -> Result<Self> {
        if true_order.len() != self.n() {
            return Err(Error::DimensionMismatch {
                expected: self.n(),
                actual: true_order.len(),
            });
        }
        self.true_order = true_order;
        Ok(self)
    }

    pub fn n(&self) -> usize {
        self.params.n
    }

    pub fn params(&self) -> ModelParams {
        self.params
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Row index to latent position.
    pub fn true_order(&self) -> &Permutation {
        &self.true_order
    }

    /// Latent position to row index: the ordering a perfect recovery returns.
    pub fn truth_ordering(&self) -> Permutation {
        self.true_order.inverse()
    }

    pub fn neighbors(&self, u: usize) -> &[u32] {
        &self.neighbors[u]
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.neighbors[u].binary_search(&(v as u32)).is_ok()
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, sorted lexicographically.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.neighbors.iter().enumerate().flat_map(|(u, row)| {
            row.iter()
                .map(|&v| v as usize)
                .filter(move |&v| v > u)
                .map(move |v| (u, v))
        })
    }

    /// True when every edge joins latent positions at most `band` apart.
    pub fn support_within_band(&self) -> bool {
        let band = self.params.band;
        self.edges().all(|(u, v)| {
            let d = self.true_order.get(u).abs_diff(self.true_order.get(v));
            d >= 1 && d <= band
        })
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let n = self.n();
        let mut m = DMatrix::zeros(n, n);
        for (u, row) in self.neighbors.iter().enumerate() {
            for &v in row {
                m[(u, v as usize)] = 1.0;
            }
        }
        m
    }
}

impl SymmetricOperator for RandomLinearGraph {
    fn dim(&self) -> usize {
        self.n()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        for (yi, row) in y.iter_mut().zip(&self.neighbors) {
            *yi = row.iter().map(|&j| x[j as usize]).sum();
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph_from_dense(m: &DMatrix<f64>, params: ModelParams) -> RandomLinearGraph {
        let n = m.nrows();
        let edges: Vec<_> = (0..n)
            .flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))
            .filter(|&(i, j)| m[(i, j)] != 0.0)
            .collect();
        RandomLinearGraph::from_edges(params, 0, edges).unwrap()
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(ModelParams::new(7, 0.5).is_err());
        assert!(ModelParams::new(2, 0.5).is_err());
        assert!(ModelParams::new(8, 0.0).is_err());
        assert!(ModelParams::new(8, 1.5).is_err());
        assert!(ModelParams::new(8, f64::NAN).is_err());
        assert!(ModelParams::with_band(8, 0.5, 0).is_err());
        assert!(ModelParams::with_band(8, 0.5, 8).is_err());
        assert!(ModelParams::with_band(8, 0.5, 7).is_ok());
        assert_eq!(ModelParams::new(8, 0.5).unwrap().band(), 3);
    }

    #[test]
    fn n4_unit_band_is_a_minus_identity() {
        // A for s = 2: ones wherever |i - j| <= s - 1 = 1
        let params = ModelParams::with_band(4, 1.0, 1).unwrap();
        let m = build_model_matrix(params).to_dense();
        let a_minus_i = DMatrix::from_fn(4, 4, |i: usize, j: usize| {
            let a = if i.abs_diff(j) <= 1 { 1.0 } else { 0.0 };
            a - if i == j { 1.0 } else { 0.0 }
        });
        assert_eq!(m, a_minus_i);
    }

    #[test]
    fn band_edge_entries() {
        let m = build_model_matrix(ModelParams::with_band(8, 0.5, 3).unwrap());
        assert_eq!(m.entry(0, 3), 0.5);
        assert_eq!(m.entry(0, 4), 0.0);
        assert_eq!(m.entry(2, 2), 0.0);
    }

    #[test]
    fn operator_matches_dense_product() {
        let m = build_model_matrix(ModelParams::with_band(10, 0.3, 4).unwrap());
        let x: Vec<f64> = (0..10).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut y = vec![0.0; 10];
        m.apply(&x, &mut y);
        let dense = m.to_dense() * nalgebra::DVector::from_column_slice(&x);
        for i in 0..10 {
            assert!((y[i] - dense[i]).abs() < 1e-12);
        }
    }

    #[test]
    fn p_one_sample_is_model_support() {
        let params = ModelParams::new(12, 1.0).unwrap();
        let g = sample_graph(params, 99);
        let dense = build_model_matrix(params).to_dense();
        assert_eq!(g.to_dense(), dense);
        assert_eq!(g.edges().collect::<Vec<_>>(), graph_from_dense(&dense, params).edges().collect::<Vec<_>>());
    }

    #[test]
    fn degrees_of_deterministic_graph() {
        let g = sample_graph(ModelParams::new(8, 1.0).unwrap(), 0);
        assert_eq!(degree_vector(&g), vec![3, 4, 5, 6, 6, 5, 4, 3]);
    }

    #[test]
    fn empty_graph_has_zero_degrees() {
        let params = ModelParams::new(6, 0.5).unwrap();
        let g = RandomLinearGraph::from_edges(params, 0, []).unwrap();
        assert_eq!(degree_vector(&g), vec![0; 6]);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn common_neighbor_counts() {
        let g = sample_graph(ModelParams::new(8, 1.0).unwrap(), 0);
        assert_eq!(common_neighbors(&g, 0, 7).unwrap(), 0);
        assert_eq!(common_neighbors(&g, 0, 1).unwrap(), 2);
        assert!(common_neighbors(&g, 0, 0).is_err());
        assert!(common_neighbors(&g, 0, 8).is_err());

        // K4: any two vertices share the other two
        let params = ModelParams::with_band(4, 1.0, 3).unwrap();
        let k4 = sample_graph(params, 0);
        assert_eq!(k4.edge_count(), 6);
        assert_eq!(common_neighbors(&k4, 1, 3).unwrap(), 2);
    }

    #[test]
    fn scramble_index_chase() {
        let g = sample_graph(ModelParams::new(6, 0.6).unwrap(), 17);
        let pi = Permutation::from_one_based(&[2, 1, 4, 3, 6, 5]).unwrap();
        let h = scramble(&g, &pi).unwrap();
        for u in 0..6 {
            for v in 0..6 {
                assert_eq!(h.has_edge(pi.get(u), pi.get(v)), g.has_edge(u, v));
            }
        }
        assert_eq!(h.has_edge(0, 1), g.has_edge(1, 0));
        assert!(h.support_within_band());
    }

    #[test]
    fn scramble_rejects_wrong_size() {
        let g = sample_graph(ModelParams::new(6, 0.6).unwrap(), 1);
        assert!(scramble(&g, &Permutation::identity(8)).is_err());
    }

    #[test]
    fn from_edges_rejects_duplicates_and_loops() {
        let params = ModelParams::new(4, 0.5).unwrap();
        assert!(RandomLinearGraph::from_edges(params, 0, [(0, 1), (1, 0)]).is_err());
        assert!(RandomLinearGraph::from_edges(params, 0, [(2, 2)]).is_err());
        assert!(RandomLinearGraph::from_edges(params, 0, [(0, 4)]).is_err());
    }

    #[test]
    fn band_cell_count() {
        for (n, b) in [(8, 3), (10, 9), (12, 1)] {
            let params = ModelParams::with_band(n, 1.0, b).unwrap();
            assert_eq!(sample_graph(params, 0).edge_count(), params.band_cells());
        }
    }
}
