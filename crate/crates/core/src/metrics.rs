//! Rank statistics on permutations and score vectors.
//!
//! Orderings are read as "position -> item". A permutation `ρ` compared
//! against the identity is scored by its inversions `D(ρ)` and total
//! displacement `F(ρ)`. Score vectors are indexed by true position and
//! are expected to decrease along the true order, so a refined count
//! `D_{k,r}(y)` records pairs that come out ascending.

use crate::error::{Error, Result};
use crate::model_spectrum::eigvec2_a_unit;
use crate::permutation::Permutation;

/// Binary indexed tree over `0..n` counting inserted ranks.
struct Fenwick {
    tree: Vec<u64>,
}

impl Fenwick {
    fn new(n: usize) -> Self {
        Fenwick {
            tree: vec![0; n + 1],
        }
    }

    fn insert(&mut self, rank: usize) {
        let mut i = rank + 1;
        while i < self.tree.len() {
            self.tree[i] += 1;
            i += i & i.wrapping_neg();
        }
    }

    /// Number of inserted ranks `< rank`.
    fn count_below(&self, rank: usize) -> u64 {
        let mut i = rank;
        let mut total = 0;
        while i > 0 {
            total += self.tree[i];
            i -= i & i.wrapping_neg();
        }
        total
    }
}

/// Inversion count `#{i < j : σ(i) > σ(j)}` in `O(n log n)`.
pub fn kendall_distance(sigma: &Permutation) -> u64 {
    let n = sigma.len();
    let mut seen = Fenwick::new(n);
    let mut inversions = 0;
    for (i, &v) in sigma.as_slice().iter().enumerate() {
        inversions += i as u64 - seen.count_below(v);
        seen.insert(v);
    }
    inversions
}

/// Quadratic reference count for [`kendall_distance`].
pub fn kendall_distance_brute(sigma: &Permutation) -> u64 {
    let s = sigma.as_slice();
    let mut count = 0;
    for i in 0..s.len() {
        for j in i + 1..s.len() {
            if s[i] > s[j] {
                count += 1;
            }
        }
    }
    count
}

fn check_dkr_args(y: &[f64], k: usize, r: usize) -> Result<()> {
    if k == 0 || r == 0 {
        return Err(Error::InvalidParams(format!("gap k = {k} and start r = {r} must be >= 1")));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::NotANumber(i));
    }
    Ok(())
}

/// Dense ranks with ties sharing a rank.
fn rank_compress(y: &[f64]) -> (Vec<usize>, usize) {
    let mut sorted: Vec<f64> = y.to_vec();
    sorted.sort_by(f64::total_cmp);
    sorted.dedup();
    let ranks = y
        .iter()
        .map(|v| sorted.partition_point(|s| s < v))
        .collect();
    (ranks, sorted.len())
}

/// Refined count `D_{k,r}(y)`: pairs of 1-based positions `i, j` with
/// `i >= r`, `j >= i + k` and `y_j > y_i`. Equal values never count.
///
/// `D_{1,1}(y)` equals the Kendall distance of the order that sorts `y`
/// decreasingly (ties by ascending index).
pub fn d_k_r(y: &[f64], k: usize, r: usize) -> Result<u64> {
    check_dkr_args(y, k, r)?;
    let n = y.len();
    if r + k > n {
        return Ok(0);
    }
    let (ranks, distinct) = rank_compress(y);
    let mut later = Fenwick::new(distinct);
    let mut inserted = 0u64;
    let mut count = 0;
    // 0-based i from n-1-k down to r-1; partners j >= i + k
    let mut next_j = n;
    for i in (r - 1..=n - 1 - k).rev() {
        while next_j > i + k {
            next_j -= 1;
            later.insert(ranks[next_j]);
            inserted += 1;
        }
        count += inserted - later.count_below(ranks[i] + 1);
    }
    Ok(count)
}

/// Quadratic reference count for [`d_k_r`].
pub fn d_k_r_brute(y: &[f64], k: usize, r: usize) -> Result<u64> {
    check_dkr_args(y, k, r)?;
    let n = y.len();
    let mut count = 0;
    for i in r.saturating_sub(1)..n {
        for j in i + k..n {
            if y[j] > y[i] {
                count += 1;
            }
        }
    }
    Ok(count)
}

/// `F(σ) = Σ |i - σ(i)|`.
pub fn spearman_footrule(sigma: &Permutation) -> u64 {
    sigma
        .as_slice()
        .iter()
        .enumerate()
        .map(|(i, &v)| i.abs_diff(v) as u64)
        .sum()
}

/// `(1 - D/(n(n-1)), 1 - 4D/(n(n-1)))`.
///
/// The second value is the usual concordant-minus-discordant coefficient
/// in `[-1, 1]`; the first is kept because it is the form quoted for the
/// convergence rate.
pub fn kendall_tau(sigma: &Permutation) -> Result<(f64, f64)> {
    let n = sigma.len();
    if n < 2 {
        return Err(Error::InvalidParams(format!("Kendall tau needs n >= 2, got {n}")));
    }
    let d = kendall_distance(sigma) as f64;
    let pairs = (n * (n - 1)) as f64;
    Ok((1.0 - d / pairs, 1.0 - 4.0 * d / pairs))
}

/// Whether `D(σ) <= F(σ) <= 2 D(σ)`.
pub fn diaconis_graham_check(sigma: &Permutation) -> bool {
    let d = kendall_distance(sigma);
    let f = spearman_footrule(sigma);
    d <= f && f <= 2 * d
}

/// The unit monotone eigenvector of the model with its first `k` entries
/// replaced by their mean, rescaled to unit norm.
pub fn adversarial_y_star(n: usize, k: usize) -> Result<Vec<f64>> {
    if k == 0 || 2 * k >= n {
        return Err(Error::IndexOutOfRange(format!("block size k = {k} must satisfy 1 <= k < n/2 = {}", n / 2)));
    }
    let mut y = eigvec2_a_unit(n)?;
    let mean = y[..k].iter().sum::<f64>() / k as f64;
    y[..k].iter_mut().for_each(|v| *v = mean);
    let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
    y.iter_mut().for_each(|v| *v /= norm);
    Ok(y)
}

/// Position-to-rank map of `order` measured against `truth`:
/// `ρ(i) = truth⁻¹(order(i))`. Identity iff the two orderings agree.
pub fn relative_permutation(order: &Permutation, truth: &Permutation) -> Result<Permutation> {
    truth.inverse().compose(order)
}

/// Scores indexed by true position that decrease along `order`: the
/// item at position `i` of `order` scores `n - i`. Feeding them to
/// [`d_k_r`] with `k = r = 1` gives `D(ρ)`.
pub fn scores_from_order(order: &Permutation, truth: &Permutation) -> Result<Vec<f64>> {
    let rho = relative_permutation(order, truth)?;
    let n = rho.len();
    let mut y = vec![0.0; n];
    for (pos, &rank) in rho.as_slice().iter().enumerate() {
        y[rank] = (n - pos) as f64;
    }
    Ok(y)
}

/// All rank statistics of one ordering against the ground truth.
#[derive(Clone, Debug, PartialEq)]
pub struct MetricReport {
    pub kendall_d: u64,
    pub footrule_f: u64,
    pub tau_paper: f64,
    pub tau_standard: f64,
    /// `(k, r, D_{k,r})` for each requested pair.
    pub dkr_table: Vec<(usize, usize, u64)>,
}

impl MetricReport {
    pub fn compute(order: &Permutation, truth: &Permutation, dkr: &[(usize, usize)]) -> Result<Self> {
        let rho = relative_permutation(order, truth)?;
        let (tau_paper, tau_standard) = kendall_tau(&rho)?;
        let y = scores_from_order(order, truth)?;
        let dkr_table = dkr
            .iter()
            .map(|&(k, r)| Ok((k, r, d_k_r(&y, k, r)?)))
            .collect::<Result<_>>()?;
        Ok(MetricReport {
            kendall_d: kendall_distance(&rho),
            footrule_f: spearman_footrule(&rho),
            tau_paper,
            tau_standard,
            dkr_table,
        })
    }

    pub const CSV_HEADER: &'static str = "kendall_D,footrule_F,tau_paper,tau_standard";

    /// Header including one `dkr_k<k>_r<r>` column per table entry.
    pub fn csv_header(&self) -> String {
        let mut h = Self::CSV_HEADER.to_string();
        for (k, r, _) in &self.dkr_table {
            h.push_str(&format!(",dkr_k{k}_r{r}"));
        }
        h
    }

    pub fn csv_row(&self) -> String {
        let mut row = format!(
            "{},{},{},{}",
            self.kendall_d, self.footrule_f, self.tau_paper, self.tau_standard
        );
        for (_, _, c) in &self.dkr_table {
            row.push_str(&format!(",{c}"));
        }
        row
    }
}
