//! Symmetric eigensolvers for the second eigenpair.
//!
//! Two independent routes: [`dense_spectrum`] (full decomposition, used as
//! the oracle at small sizes) and a thick-restart Lanczos iteration with
//! full reorthogonalization behind [`second_eigenpair`].

use nalgebra::{DMatrix, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// A real symmetric linear map `x -> Mx`.
pub trait SymmetricOperator {
    fn dim(&self) -> usize;
    /// Writes `Mx` into `y`. Both slices have length [`Self::dim`].
    fn apply(&self, x: &[f64], y: &mut [f64]);
}

impl SymmetricOperator for DMatrix<f64> {
    fn dim(&self) -> usize {
        self.nrows()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        let n = self.nrows();
        y.iter_mut().for_each(|v| *v = 0.0);
        // column-major: accumulate column by column
        for (j, &xj) in x.iter().enumerate() {
            if xj == 0.0 {
                continue;
            }
            let col = &self.as_slice()[j * n..(j + 1) * n];
            for (yi, &a) in y.iter_mut().zip(col) {
                *yi += a * xj;
            }
        }
    }
}

impl<T: SymmetricOperator + ?Sized> SymmetricOperator for &T {
    fn dim(&self) -> usize {
        (**self).dim()
    }

    fn apply(&self, x: &[f64], y: &mut [f64]) {
        (**self).apply(x, y)
    }
}

/// One eigenpair with a unit vector.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenPair {
    pub value: f64,
    pub vector: Vec<f64>,
}

/// Output of the iterative solver.
#[derive(Clone, Debug, PartialEq)]
pub struct EigenResult {
    pub value: f64,
    /// Unit norm, largest-magnitude component positive.
    pub vector: Vec<f64>,
    /// `‖Mv - λv‖` recomputed with a final product.
    pub residual: f64,
    /// Matrix-vector products spent.
    pub iterations: usize,
}

/// Which eigenvalue counts as "second".
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Selection {
    /// Second in the order `|λ|` descending, ties by `λ` descending.
    #[default]
    SecondByMagnitude,
    /// Second largest algebraic eigenvalue.
    SecondLargest,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SolverConfig {
    pub tol: f64,
    /// Budget of matrix-vector products; `None` means `10 n`.
    pub max_matvecs: Option<usize>,
    pub seed: u64,
    pub selection: Selection,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            tol: 1e-8,
            max_matvecs: None,
            seed: 0,
            selection: Selection::SecondByMagnitude,
        }
    }
}

fn symmetry_defect(m: &DMatrix<f64>) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

fn magnitude_order(a: f64, b: f64) -> std::cmp::Ordering {
    b.abs()
        .total_cmp(&a.abs())
        .then_with(|| b.total_cmp(&a))
}

/// Full eigendecomposition sorted by `|λ|` descending, ties by `λ` descending.
pub fn dense_spectrum(matrix: &DMatrix<f64>) -> Result<Vec<EigenPair>> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            actual: matrix.ncols(),
        });
    }
    let scale = matrix.amax().max(1.0);
    let defect = symmetry_defect(matrix);
    if defect > 1e-12 * scale {
        return Err(Error::NotSymmetric(defect));
    }
    let eig = SymmetricEigen::try_new(matrix.clone(), f64::EPSILON, 100 * n.max(10)).ok_or(
        Error::NoConvergence {
            matvecs: 0,
            best_residual: f64::INFINITY,
        },
    )?;
    let mut pairs: Vec<EigenPair> = (0..n)
        .map(|k| EigenPair {
            value: eig.eigenvalues[k],
            vector: eig.eigenvectors.column(k).iter().copied().collect(),
        })
        .collect();
    pairs.sort_by(|a, b| magnitude_order(a.value, b.value));
    Ok(pairs)
}

/// Eigenpair of the second-largest-in-magnitude eigenvalue.
pub fn second_abs_eigenpair<M: SymmetricOperator + ?Sized>(
    matrix: &M,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigenResult> {
    second_eigenpair(
        matrix,
        &SolverConfig {
            tol,
            max_matvecs: Some(max_iter),
            seed,
            selection: Selection::SecondByMagnitude,
        },
    )
}

/// Second eigenpair under `config.selection`, computed by Lanczos.
pub fn second_eigenpair<M: SymmetricOperator + ?Sized>(
    matrix: &M,
    config: &SolverConfig,
) -> Result<EigenResult> {
    let n = matrix.dim();
    if n < 2 {
        return Err(Error::InvalidParams(format!(
            "need at least 2 rows for a second eigenpair, got {n}"
        )));
    }
    if !(config.tol > 0.0) {
        return Err(Error::InvalidParams(format!("tol = {} must be positive", config.tol)));
    }
    let budget = config.max_matvecs.unwrap_or(10 * n);
    let wanted = 3;
    let (mut pairs, matvecs) = lanczos_extremes(matrix, wanted, config.tol, budget, config.seed)?;
    match config.selection {
        Selection::SecondByMagnitude => pairs.sort_by(|a, b| magnitude_order(a.value, b.value)),
        Selection::SecondLargest => pairs.sort_by(|a, b| b.value.total_cmp(&a.value)),
    }
    if pairs.len() >= 3 {
        let (second, third) = (pairs[1].value, pairs[2].value);
        let separation = match config.selection {
            Selection::SecondByMagnitude => second.abs() - third.abs(),
            Selection::SecondLargest => second - third,
        };
        if separation <= config.tol {
            return Err(Error::AmbiguousEigenvalue {
                second,
                third,
                tol: config.tol,
            });
        }
    }
    let EigenPair { value, mut vector } = pairs.swap_remove(1);
    canonicalize_sign(&mut vector);
    let mut mv = vec![0.0; n];
    matrix.apply(&vector, &mut mv);
    let rayleigh = dot(&vector, &mv);
    let residual = mv
        .iter()
        .zip(&vector)
        .map(|(a, v)| (a - rayleigh * v).powi(2))
        .sum::<f64>()
        .sqrt();
    debug_assert!((rayleigh - value).abs() <= 10.0 * config.tol.max(1e-12 * value.abs()));
    Ok(EigenResult {
        value: rayleigh,
        vector,
        residual,
        iterations: matvecs + 1,
    })
}

/// Flips `v` so that its largest-magnitude entry (first one on ties) is positive.
pub fn canonicalize_sign(v: &mut [f64]) {
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v.get(best).is_some_and(|&x| x < 0.0) {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

#[inline]
fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

#[inline]
fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

fn norm(v: &[f64]) -> f64 {
    dot(v, v).sqrt()
}

/// Orthogonalizes `w` against `basis` (two passes) and returns its new norm.
fn orthogonalize(w: &mut [f64], basis: &[Vec<f64>]) -> f64 {
    for _ in 0..2 {
        for b in basis {
            let c = dot(b, w);
            axpy(-c, b, w);
        }
    }
    norm(w)
}

fn random_unit_orthogonal(rng: &mut ChaCha8Rng, n: usize, basis: &[Vec<f64>]) -> Option<Vec<f64>> {
    for _ in 0..8 {
        let mut v: Vec<f64> = (0..n).map(|_| rng.random::<f64>() - 0.5).collect();
        let before = norm(&v);
        let after = orthogonalize(&mut v, basis);
        if after > 1e-8 * before {
            v.iter_mut().for_each(|x| *x /= after);
            return Some(v);
        }
    }
    None
}

/// Krylov subspace with the images `A v` of its basis kept alongside.
struct Subspace {
    basis: Vec<Vec<f64>>,
    images: Vec<Vec<f64>>,
}

impl Subspace {
    fn projected(&self) -> DMatrix<f64> {
        let m = self.basis.len();
        let mut h = DMatrix::zeros(m, m);
        for i in 0..m {
            for j in i..m {
                let v = 0.5 * (dot(&self.basis[i], &self.images[j]) + dot(&self.basis[j], &self.images[i]));
                h[(i, j)] = v;
                h[(j, i)] = v;
            }
        }
        h
    }

    fn combine(vectors: &[Vec<f64>], coeffs: impl Iterator<Item = f64>) -> Vec<f64> {
        let mut out = vec![0.0; vectors[0].len()];
        for (v, c) in vectors.iter().zip(coeffs) {
            axpy(c, v, &mut out);
        }
        out
    }
}

struct Ritz {
    value: f64,
    coeffs: Vec<f64>,
    residual: f64,
}

fn ritz_pairs(space: &Subspace) -> Vec<Ritz> {
    let h = space.projected();
    let eig = SymmetricEigen::new(h);
    let m = space.basis.len();
    let mut out: Vec<Ritz> = (0..m)
        .map(|k| {
            let coeffs: Vec<f64> = eig.eigenvectors.column(k).iter().copied().collect();
            let value = eig.eigenvalues[k];
            let y = Subspace::combine(&space.basis, coeffs.iter().copied());
            let ay = Subspace::combine(&space.images, coeffs.iter().copied());
            let residual = ay
                .iter()
                .zip(&y)
                .map(|(a, b)| (a - value * b).powi(2))
                .sum::<f64>()
                .sqrt();
            Ritz {
                value,
                coeffs,
                residual,
            }
        })
        .collect();
    out.sort_by(|a, b| b.value.total_cmp(&a.value));
    out
}

/// Indices (into the value-descending list) of the `per_end` largest and
/// `per_end` smallest entries, without repeats.
fn extreme_indices(len: usize, per_end: usize) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..per_end.min(len)).collect();
    for k in (len.saturating_sub(per_end)..len).rev() {
        if !idx.contains(&k) {
            idx.push(k);
        }
    }
    idx
}

/// Thick-restart Lanczos. Returns the converged `per_end` largest and
/// `per_end` smallest eigenpairs and the number of products spent.
fn lanczos_extremes<M: SymmetricOperator + ?Sized>(
    op: &M,
    per_end: usize,
    tol: f64,
    budget: usize,
    seed: u64,
) -> Result<(Vec<EigenPair>, usize)> {
    let n = op.dim();
    let max_basis = n.min((8 * per_end + 40).max(60));
    let keep = (2 * per_end + 4).min(max_basis.saturating_sub(2)).max(1);
    let check_every = 4;

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut space = Subspace {
        basis: Vec::with_capacity(max_basis + 1),
        images: Vec::with_capacity(max_basis + 1),
    };
    let mut next = random_unit_orthogonal(&mut rng, n, &[]).expect("nonzero random vector");
    let mut matvecs = 0;
    let mut best_residual = f64::INFINITY;
    let mut since_check = 0;

    loop {
        let mut image = vec![0.0; n];
        op.apply(&next, &mut image);
        matvecs += 1;
        since_check += 1;
        let mut w = image.clone();
        space.basis.push(next);
        space.images.push(image);
        let wnorm = orthogonalize(&mut w, &space.basis);
        let exhausted = space.basis.len() == n;
        let full = space.basis.len() >= max_basis;

        if exhausted || full || since_check >= check_every {
            since_check = 0;
            let ritz = ritz_pairs(&space);
            let wanted = extreme_indices(ritz.len(), per_end);
            let worst = wanted
                .iter()
                .map(|&k| ritz[k].residual)
                .fold(0.0_f64, f64::max);
            best_residual = best_residual.min(worst);
            // residuals from stored images drift by rounding; leave headroom
            if exhausted || worst <= 0.5 * tol {
                let pairs = wanted
                    .iter()
                    .map(|&k| {
                        let mut vector =
                            Subspace::combine(&space.basis, ritz[k].coeffs.iter().copied());
                        let nv = norm(&vector);
                        vector.iter_mut().for_each(|x| *x /= nv);
                        EigenPair {
                            value: ritz[k].value,
                            vector,
                        }
                    })
                    .collect();
                return Ok((pairs, matvecs));
            }
            if matvecs >= budget {
                return Err(Error::NoConvergence {
                    matvecs,
                    best_residual,
                });
            }
            if full {
                // keep the wanted Ritz vectors plus their neighbours
                let mut kept: Vec<usize> = extreme_indices(ritz.len(), keep / 2 + keep % 2);
                kept.truncate(keep);
                let basis: Vec<Vec<f64>> = kept
                    .iter()
                    .map(|&k| Subspace::combine(&space.basis, ritz[k].coeffs.iter().copied()))
                    .collect();
                let images: Vec<Vec<f64>> = kept
                    .iter()
                    .map(|&k| Subspace::combine(&space.images, ritz[k].coeffs.iter().copied()))
                    .collect();
                space.basis = basis;
                space.images = images;
                // the pending Krylov direction is orthogonal to the old span
                let wn = orthogonalize(&mut w, &space.basis);
                next = if wn > 1e-10 * wnorm.max(f64::MIN_POSITIVE) && wn > 0.0 {
                    w.iter().map(|x| x / wn).collect()
                } else {
                    random_unit_orthogonal(&mut rng, n, &space.basis)
                        .ok_or(Error::NoConvergence { matvecs, best_residual })?
                };
                continue;
            }
        } else if matvecs >= budget {
            return Err(Error::NoConvergence {
                matvecs,
                best_residual,
            });
        }

        let scale = space
            .images
            .last()
            .map(|v| norm(v))
            .unwrap_or(1.0)
            .max(f64::MIN_POSITIVE);
        next = if wnorm > 1e-10 * scale {
            w.iter().map(|x| x / wnorm).collect()
        } else {
            // invariant subspace: continue in a fresh direction
            random_unit_orthogonal(&mut rng, n, &space.basis)
                .ok_or(Error::NoConvergence { matvecs, best_residual })?
        };
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag(values: &[f64]) -> DMatrix<f64> {
        DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(values))
    }

    #[test]
    fn dense_orders_by_magnitude() {
        let pairs = dense_spectrum(&diag(&[2.0, -3.0])).unwrap();
        assert_eq!(pairs[0].value, -3.0);
        assert_eq!(pairs[1].value, 2.0);
    }

    #[test]
    fn dense_identity() {
        let pairs = dense_spectrum(&DMatrix::identity(3, 3)).unwrap();
        assert!(pairs.iter().all(|p| (p.value - 1.0).abs() < 1e-14));
    }

    #[test]
    fn dense_breaks_magnitude_ties_by_value() {
        let pairs = dense_spectrum(&diag(&[-1.0, 1.0, 0.5])).unwrap();
        assert_eq!(pairs[0].value, 1.0);
        assert_eq!(pairs[1].value, -1.0);
    }

    #[test]
    fn dense_rejects_asymmetric() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.5, 1.0]);
        assert!(matches!(dense_spectrum(&m), Err(Error::NotSymmetric(_))));
    }

    #[test]
    fn dense_path_graph_spectrum() {
        // A for s = 2 is tridiagonal with unit diagonal: 1 + 2cos(kπ/5)
        let a = DMatrix::from_fn(4, 4, |i: usize, j: usize| if i.abs_diff(j) <= 1 { 1.0 } else { 0.0 });
        let got: Vec<f64> = dense_spectrum(&a).unwrap().iter().map(|p| p.value.abs()).collect();
        let want = [2.618034, 1.618034, 0.618034, 0.381966];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 1e-6, "{got:?}");
        }
    }

    #[test]
    fn lanczos_diagonal_second_by_magnitude() {
        let r = second_abs_eigenpair(&diag(&[5.0, -4.0, 1.0]), 1e-10, 100, 1).unwrap();
        assert!((r.value + 4.0).abs() < 1e-10);
        assert!((r.vector[1] - 1.0).abs() < 1e-8);
        assert!(r.residual < 1e-10);
    }

    #[test]
    fn lanczos_second_largest_selection() {
        let cfg = SolverConfig {
            selection: Selection::SecondLargest,
            tol: 1e-10,
            ..Default::default()
        };
        let r = second_eigenpair(&diag(&[5.0, -4.0, 1.0, 0.2]), &cfg).unwrap();
        assert!((r.value - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lanczos_reports_ambiguity() {
        let err = second_abs_eigenpair(&diag(&[5.0, 2.0, -2.0, 1.0]), 1e-9, 100, 0).unwrap_err();
        assert!(matches!(err, Error::AmbiguousEigenvalue { .. }), "{err}");
    }

    #[test]
    fn lanczos_handles_repeated_eigenvalues() {
        let r = second_abs_eigenpair(&diag(&[3.0, 3.0, 1.0, 0.5]), 1e-9, 100, 4).unwrap();
        assert!((r.value - 3.0).abs() < 1e-9);
    }

    #[test]
    fn lanczos_budget_exhaustion() {
        let n = 400;
        let m = DMatrix::from_fn(n, n, |i: usize, j: usize| {
            (((i * 31 + j * 17) % 97) as f64 + ((j * 31 + i * 17) % 97) as f64) / 97.0
        });
        let err = second_abs_eigenpair(&m, 1e-12, 5, 0).unwrap_err();
        assert!(matches!(err, Error::NoConvergence { .. }), "{err}");
    }

    #[test]
    fn sign_convention() {
        let mut v = vec![0.1, -0.9, 0.3];
        canonicalize_sign(&mut v);
        assert_eq!(v, vec![-0.1, 0.9, -0.3]);
    }
}
