//! Order recovery from the second eigenvector, and a degree-based baseline.

use crate::error::{Error, Result};
use crate::graph_model::{common_neighbors, degree_vector, RandomLinearGraph};
use crate::metrics::{kendall_distance, relative_permutation};
use crate::permutation::Permutation;
use crate::solver::{second_eigenpair, EigenResult, Selection, SolverConfig};

/// How equal scores are ordered after the descending sort.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TiePolicy {
    /// Lower index first. Tied entries then contribute no inversions.
    #[default]
    AscendingIndex,
    /// Higher index first. A tied block of size `k` contributes `k(k-1)/2`.
    DescendingIndex,
}

impl std::str::FromStr for TiePolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ascending_index" | "ascending" => Ok(TiePolicy::AscendingIndex),
            "descending_index" | "descending" => Ok(TiePolicy::DescendingIndex),
            other => Err(Error::InvalidParams(format!("unknown tie policy {other:?}"))),
        }
    }
}

impl std::fmt::Display for TiePolicy {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TiePolicy::AscendingIndex => "ascending_index",
            TiePolicy::DescendingIndex => "descending_index",
        })
    }
}

/// Indices sorted so that `v` is non-increasing along the result.
pub fn order_from_vector(v: &[f64], tie_policy: TiePolicy) -> Result<Permutation> {
    if let Some(i) = v.iter().position(|x| x.is_nan()) {
        return Err(Error::NotANumber(i));
    }
    let mut idx: Vec<usize> = (0..v.len()).collect();
    idx.sort_by(|&a, &b| {
        v[b].total_cmp(&v[a]).then_with(|| match tie_policy {
            TiePolicy::AscendingIndex => a.cmp(&b),
            TiePolicy::DescendingIndex => b.cmp(&a),
        })
    });
    Permutation::from_zero_based(idx)
}

fn count_adjacent_ties(v: &[f64], order: &Permutation) -> usize {
    order
        .as_slice()
        .windows(2)
        .filter(|w| v[w[0]] == v[w[1]])
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeriationConfig {
    pub solver: SolverConfig,
    pub tie_policy: TiePolicy,
}

impl Default for SeriationConfig {
    /// Selects the second largest eigenvalue rather than the second in
    /// magnitude: on small dense graphs a negative eigenvalue can outrank
    /// the monotone one in magnitude.
    fn default() -> Self {
        SeriationConfig {
            solver: SolverConfig {
                selection: Selection::SecondLargest,
                ..SolverConfig::default()
            },
            tie_policy: TiePolicy::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OrderingResult {
    /// Position to vertex, defined up to reversal.
    pub order: Permutation,
    pub eigen: EigenResult,
    pub reversed_applied: bool,
    /// Equal eigenvector values adjacent in the sorted order.
    pub tie_count: usize,
}

/// Sorts the vertices by their entry in the second eigenvector of the
/// adjacency matrix.
pub fn recover_order(graph: &RandomLinearGraph, config: &SeriationConfig) -> Result<OrderingResult> {
    if graph.n() < 4 {
        return Err(Error::InvalidParams(format!("need n >= 4, got {}", graph.n())));
    }
    let eigen = second_eigenpair(graph, &config.solver)?;
    let order = order_from_vector(&eigen.vector, config.tie_policy)?;
    let tie_count = count_adjacent_ties(&eigen.vector, &order);
    Ok(OrderingResult {
        order,
        eigen,
        reversed_applied: false,
        tie_count,
    })
}

/// `candidate` or its reversal, whichever is closer to `truth` in Kendall
/// distance, and whether the reversal was taken. Ties keep `candidate`.
pub fn align_up_to_reversal(candidate: &Permutation, truth: &Permutation) -> Result<(Permutation, bool)> {
    let forward = kendall_distance(&relative_permutation(candidate, truth)?);
    let reversed = candidate.reversed();
    let backward = kendall_distance(&relative_permutation(&reversed, truth)?);
    if backward < forward {
        Ok((reversed, true))
    } else {
        Ok((candidate.clone(), false))
    }
}

/// Baseline ordering from degrees alone.
///
/// A minimum-degree vertex is taken as one end. Every other vertex is put
/// on the near side if its closed neighborhood overlaps the anchor's by
/// more than the median overlap, otherwise on the far side. The near side
/// follows in ascending degree and the far side in descending degree,
/// each with ties broken by index.
pub fn degree_baseline_order(graph: &RandomLinearGraph) -> Permutation {
    let n = graph.n();
    if n == 0 {
        return Permutation::identity(0);
    }
    let deg = degree_vector(graph);
    let anchor = (0..n).min_by_key(|&v| (deg[v], v)).unwrap_or(0);
    let overlap: Vec<(usize, usize)> = (0..n)
        .filter(|&v| v != anchor)
        .map(|v| {
            let shared = common_neighbors(graph, anchor, v).unwrap_or(0);
            let adjacent = if graph.has_edge(anchor, v) { 2 } else { 0 };
            (v, shared + adjacent)
        })
        .collect();
    let mut counts: Vec<usize> = overlap.iter().map(|&(_, c)| c).collect();
    counts.sort_unstable();
    let median = counts.get(counts.len() / 2).copied().unwrap_or(0);
    let (near, far): (Vec<_>, Vec<_>) =
        overlap.into_iter().partition(|&(_, c)| c > median);
    let mut near: Vec<usize> = near.into_iter().map(|(v, _)| v).collect();
    let mut far: Vec<usize> = far.into_iter().map(|(v, _)| v).collect();
    near.sort_by_key(|&v| (deg[v], v));
    far.sort_by_key(|&v| (std::cmp::Reverse(deg[v]), v));
    let mut order = Vec::with_capacity(n);
    order.push(anchor);
    order.extend(near);
    order.extend(far);
    Permutation::from_zero_based(order).expect("anchor plus both sides cover every vertex once")
}
