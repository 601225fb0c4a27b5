//! Closed-form spectra of the model matrix family.
//!
//! For half-order `s` and `n = 2s`:
//!
//! * `A` is the `n x n` 0/1 matrix with ones wherever `|i - j| <= s - 1`
//!   (diagonal included), so the default model matrix is `p(A - I)`.
//! * `B = J - A`.
//! * `D` is the `s x s` matrix with `D[i][j] = 1 + [i + j >= s + 2]`
//!   (1-based). If `Dx = λx` then `A [x; Px] = λ [x; Px]`, where `P`
//!   reverses the order of a vector.
//!
//! Every eigenvalue of `A` belongs either to an antisymmetric eigenvector
//! (shared with `B`, closed form) or to a symmetric one lifted from `D`
//! (roots of a trigonometric characteristic function).

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::graph_model::ModelParams;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MatrixId {
    A,
    B,
    D,
}

/// Analytic eigenpair of `A`, `B` or `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct ClosedFormEigenpair {
    pub value: f64,
    pub vector: Vec<f64>,
    pub matrix_id: MatrixId,
    /// Index of the closed-form parameterization that produced the pair.
    pub index_k: usize,
}

impl ClosedFormEigenpair {
    /// `‖Mv - λv‖ / ‖v‖` for the matrix this pair belongs to.
    pub fn relative_residual(&self) -> f64 {
        let mv = apply_family(self.matrix_id, &self.vector);
        residual(&mv, &self.vector, self.value) / norm(&self.vector)
    }
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn residual(mv: &[f64], v: &[f64], value: f64) -> f64 {
    mv.iter()
        .zip(v)
        .map(|(a, b)| (a - value * b).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `Ax` in O(n) through prefix sums.
fn apply_a(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    let s = n / 2;
    let mut prefix = vec![0.0; n + 1];
    for i in 0..n {
        prefix[i + 1] = prefix[i] + x[i];
    }
    (0..n)
        .map(|i| {
            let lo = i.saturating_sub(s - 1);
            let hi = (i + s - 1).min(n - 1);
            prefix[hi + 1] - prefix[lo]
        })
        .collect()
}

fn apply_b(x: &[f64]) -> Vec<f64> {
    let total: f64 = x.iter().sum();
    apply_a(x).into_iter().map(|ax| total - ax).collect()
}

/// `Dx` in O(s): row `i` (0-based) adds the suffix starting at `s - i`.
fn apply_d(x: &[f64]) -> Vec<f64> {
    let s = x.len();
    let total: f64 = x.iter().sum();
    let mut suffix = vec![0.0; s + 1];
    for j in (0..s).rev() {
        suffix[j] = suffix[j + 1] + x[j];
    }
    (0..s).map(|i| total + suffix[s - i]).collect()
}

fn apply_family(id: MatrixId, x: &[f64]) -> Vec<f64> {
    match id {
        MatrixId::A => apply_a(x),
        MatrixId::B => apply_b(x),
        MatrixId::D => apply_d(x),
    }
}

/// Picks the sign of `±magnitude` that gives the smaller residual.
fn signed_by_residual(id: MatrixId, v: &[f64], magnitude: f64) -> f64 {
    let mv = apply_family(id, v);
    if residual(&mv, v, magnitude) <= residual(&mv, v, -magnitude) {
        magnitude
    } else {
        -magnitude
    }
}

pub fn a_matrix(s: usize) -> DMatrix<f64> {
    let n = 2 * s;
    DMatrix::from_fn(n, n, |i, j| if i.abs_diff(j) < s { 1.0 } else { 0.0 })
}

pub fn b_matrix(s: usize) -> DMatrix<f64> {
    a_matrix(s).map(|a| 1.0 - a)
}

pub fn d_matrix(s: usize) -> DMatrix<f64> {
    // 0-based: i + j >= s
    DMatrix::from_fn(s, s, |i, j| if i + j >= s { 2.0 } else { 1.0 })
}

fn check_half_order(s: usize, min: usize) -> Result<()> {
    if s < min {
        return Err(Error::InvalidParams(format!("half-order s = {s} must be at least {min}")));
    }
    Ok(())
}

/// `|λ2(A)| = 1/√(2 + 2cos(2sπ/(2s+1)))`, evaluated as `1/(2 sin(π/(4s+2)))`.
pub fn lambda2_abs_a(s: usize) -> f64 {
    0.5 / (PI / (4 * s + 2) as f64).sin()
}

/// Monotone eigenvector of `A` for `n = 2s`, unnormalized:
/// `u_j = cos((2j-1)π/(4s+2))` on the first half, `u_j = -u_{n-j+1}` after.
pub fn eigvec2_a(n: usize) -> Result<Vec<f64>> {
    if !n.is_multiple_of(2) || n < 4 {
        return Err(Error::InvalidParams(format!("n = {n} must be even and at least 4")));
    }
    let s = n / 2;
    let denom = (4 * s + 2) as f64;
    let mut u = vec![0.0; n];
    for j in 0..s {
        let v = ((2 * j + 1) as f64 * PI / denom).cos();
        u[j] = v;
        u[n - 1 - j] = -v;
    }
    Ok(u)
}

/// [`eigvec2_a`] scaled to unit Euclidean norm. Strictly decreasing.
pub fn eigvec2_a_unit(n: usize) -> Result<Vec<f64>> {
    let mut u = eigvec2_a(n)?;
    let nu = norm(&u);
    u.iter_mut().for_each(|x| *x /= nu);
    Ok(u)
}

/// `ω² = 4θ/π` with `θ = π/(2s+1)`; makes the first half of
/// [`eigvec2_a`] unit norm.
pub fn omega_sq(s: usize) -> f64 {
    4.0 / (2 * s + 1) as f64
}

/// [`eigvec2_a`] scaled by `ω`: first half unit norm, whole vector norm `√2`.
pub fn eigvec2_a_half_normalized(n: usize) -> Result<Vec<f64>> {
    let omega = omega_sq(n / 2).sqrt();
    Ok(eigvec2_a(n)?.into_iter().map(|x| omega * x).collect())
}

/// `Σ_{i=1..s} cos²((2i-1)π/(4s+2))`, which equals `(2s+1)/4`.
pub fn half_norm_sq(s: usize) -> f64 {
    let denom = (4 * s + 2) as f64;
    (0..s)
        .map(|j| ((2 * j + 1) as f64 * PI / denom).cos().powi(2))
        .sum()
}

/// The monotone eigenpair of `A` with the sign of its eigenvalue fixed by
/// residual minimization over `±|λ2(A)|`.
pub fn signed_lambda2_a(s: usize) -> Result<ClosedFormEigenpair> {
    check_half_order(s, 2)?;
    let vector = eigvec2_a(2 * s)?;
    let value = signed_by_residual(MatrixId::A, &vector, lambda2_abs_a(s));
    Ok(ClosedFormEigenpair {
        value,
        vector,
        matrix_id: MatrixId::A,
        index_k: s,
    })
}

/// Eigenpair `k` (1-based, `1..=2s`) of `B = J - A`.
///
/// Magnitude `1/√(2 + 2cos(2kπ/(2s+1)))`. The first half of the vector,
/// read from position `s` down to position 1, is
/// `(-1)^j sin(2jkπ/(2s+1))` for `j = 1..s`; the second half extends it
/// antisymmetrically for `k <= s` and symmetrically for `k > s`. The sign
/// of the eigenvalue is fixed by residual minimization.
pub fn eig_b(k: usize, s: usize) -> Result<ClosedFormEigenpair> {
    check_half_order(s, 1)?;
    let n = 2 * s;
    if k == 0 || k > n {
        return Err(Error::IndexOutOfRange(format!("k = {k} not in 1..={n}")));
    }
    let m = (2 * s + 1) as f64;
    // |cos(kπ/m)| is π-periodic and even in k, so fold k into [0, m/2]
    let r = k % (2 * s + 1);
    let r = r.min(2 * s + 1 - r);
    let magnitude = 0.5 / (PI * (2 * s + 1 - 2 * r) as f64 / (2.0 * m)).sin();

    let mut vector = vec![0.0; n];
    for j in 1..=s {
        let arg = ((2 * j * k) % (2 * (2 * s + 1))) as f64 * PI / m;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        let entry = sign * arg.sin();
        let pos = s - j; // 0-based position of the reversed entry
        vector[pos] = entry;
        vector[n - 1 - pos] = if k <= s { -entry } else { entry };
    }
    let value = signed_by_residual(MatrixId::B, &vector, magnitude);
    Ok(ClosedFormEigenpair {
        value,
        vector,
        matrix_id: MatrixId::B,
        index_k: k,
    })
}

/// `p(θ) = sin((s+1)θ) + 3 sin(sθ) - 4 sin((s-1)θ) - 4 sin(θ)`.
pub fn char_poly_d(theta: f64, s: usize) -> f64 {
    let s = s as f64;
    ((s + 1.0) * theta).sin() + 3.0 * (s * theta).sin() - 4.0 * ((s - 1.0) * theta).sin()
        - 4.0 * theta.sin()
}

/// The same function on the line `θ = π + it`, divided by `i e^{st}/2` so
/// it stays finite for large `s`. Valid for even `s`.
pub fn char_poly_d_hyperbolic(t: f64, s: usize) -> f64 {
    let s = s as f64;
    let e = |a: f64| (-a * t).exp();
    -((t).exp() - e(2.0 * s + 1.0)) + 3.0 * (1.0 - e(2.0 * s)) + 4.0 * (e(1.0) - e(2.0 * s - 1.0))
        + 4.0 * (e(s - 1.0) - e(s + 1.0))
}

/// A certified real root of [`char_poly_d`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ThetaRoot {
    pub theta: f64,
    pub s: usize,
    /// Scan cell whose endpoints have opposite signs.
    pub bracket: (f64, f64),
}

impl ThetaRoot {
    /// `1/√(2 - 2cos θ)`, evaluated as `1/(2 sin(θ/2))`.
    pub fn eigenvalue(&self) -> f64 {
        0.5 / (0.5 * self.theta).sin()
    }
}

/// The root of [`char_poly_d_hyperbolic`]; it accounts for the one
/// eigenvalue of `D` below `1/2` in magnitude, which no real `θ` reaches.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HyperbolicRoot {
    pub t: f64,
    pub s: usize,
    pub bracket: (f64, f64),
}

impl HyperbolicRoot {
    /// `1/√(2 + 2cosh t)`, evaluated as `1/(2 cosh(t/2))`.
    pub fn eigenvalue(&self) -> f64 {
        0.5 / (0.5 * self.t).cosh()
    }
}

/// All `s` roots describing the spectrum of `D` (up to sign).
#[derive(Clone, Debug, PartialEq)]
pub struct DRoots {
    /// Ascending in `θ`, hence descending in eigenvalue.
    pub trigonometric: Vec<ThetaRoot>,
    pub hyperbolic: HyperbolicRoot,
}

impl DRoots {
    /// Eigenvalue magnitudes of `D`, descending.
    pub fn eigenvalue_magnitudes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.trigonometric.iter().map(ThetaRoot::eigenvalue).collect();
        out.push(self.hyperbolic.eigenvalue());
        out
    }
}

fn bisect(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> f64 {
    let mut flo = f(lo);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi || hi - lo <= 1e-15 {
            break;
        }
        let fm = f(mid);
        if fm == 0.0 {
            return mid;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    // endpoint with the smaller |f|
    if f(lo).abs() <= f(hi).abs() {
        lo
    } else {
        hi
    }
}

/// Sign-change brackets of `f` on the open grid `lo + i h`, `i = 1..cells`.
fn scan(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, cells: usize) -> Vec<(f64, f64)> {
    let h = (hi - lo) / cells as f64;
    let mut out = Vec::new();
    let mut prev_x = lo + h;
    let mut prev = f(prev_x);
    for i in 2..cells {
        let x = lo + i as f64 * h;
        let fx = f(x);
        if (fx < 0.0) != (prev < 0.0) {
            out.push((prev_x, x));
        }
        prev_x = x;
        prev = fx;
    }
    out
}

/// Roots of the characteristic function of `D` for even `s >= 6`.
///
/// `(0, π)` is scanned on a uniform grid of `32 s` cells, each sign
/// change is bisected to machine precision, and the one hyperbolic root is
/// located the same way on `t ∈ (0, 4)`. Fails unless exactly `s - 1`
/// real roots and one hyperbolic root are found.
pub fn theta_roots_d(s: usize) -> Result<DRoots> {
    check_half_order(s, 6)?;
    if !s.is_multiple_of(2) {
        return Err(Error::InvalidParams(format!("half-order s = {s} must be even")));
    }
    let cells = 32 * s;
    let p = |theta: f64| char_poly_d(theta, s);
    let trigonometric: Vec<ThetaRoot> = scan(&p, 0.0, PI, cells)
        .into_iter()
        .map(|(lo, hi)| ThetaRoot {
            theta: bisect(p, lo, hi),
            s,
            bracket: (lo, hi),
        })
        .collect();

    let q = |t: f64| char_poly_d_hyperbolic(t, s);
    let hyper_brackets = scan(&q, 0.0, 4.0, cells);

    let found = trigonometric.len() + hyper_brackets.len();
    if trigonometric.len() != s - 1 || hyper_brackets.len() != 1 {
        return Err(Error::RootScan {
            s,
            found,
            expected: s,
        });
    }
    let (lo, hi) = hyper_brackets[0];
    let hyperbolic = HyperbolicRoot {
        t: bisect(q, lo, hi),
        s,
        bracket: (lo, hi),
    };
    Ok(DRoots {
        trigonometric,
        hyperbolic,
    })
}

/// Perron value of `A` (equal to that of `D`) from the smallest real root.
pub fn lambda1_a(s: usize) -> Result<f64> {
    let roots = theta_roots_d(s)?;
    Ok(roots.trigonometric[0].eigenvalue())
}

/// `1/√(2 - 2cos(π/s))`. Every eigenvalue of `A` other than the Perron
/// value and `λ2(A)` is at most this in magnitude.
pub fn lambda3_a_bound(s: usize) -> f64 {
    0.5 / (PI / (2 * s) as f64).sin()
}

/// Lower bounds on the eigenvalue gaps on either side of `λ2(M)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GapBounds {
    /// `λ1(M) - λ2(M)`.
    pub gap12_lower: f64,
    /// `λ2(M)` minus the largest magnitude among the remaining eigenvalues.
    pub gap23_lower: f64,
    pub omega_sq: f64,
}

pub fn gap_bounds_m(params: &ModelParams) -> Result<GapBounds> {
    if !params.is_default_band() {
        return Err(Error::InvalidParams(format!(
            "gap bounds need band = n/2 - 1 = {}, got {}",
            params.n() / 2 - 1,
            params.band()
        )));
    }
    let s = params.half_order();
    let p = params.p();
    let l1 = lambda1_a(s)?;
    let l2 = lambda2_abs_a(s);
    let l3 = lambda3_a_bound(s);
    Ok(GapBounds {
        gap12_lower: p * (l1 - l2),
        gap23_lower: p * (l2 - l3),
        omega_sq: omega_sq(s),
    })
}

fn check_diff_indices(r: usize, k: usize, s: usize) -> Result<()> {
    if r == 0 || k == 0 || r + k > s {
        return Err(Error::IndexOutOfRange(format!(
            "need r >= 1, k >= 1, r + k <= s; got r = {r}, k = {k}, s = {s}"
        )));
    }
    Ok(())
}

/// Leading term `k²(2r + k - 1)² θ⁵ / π`, `θ = π/(2s+1)`, of
/// `(x_r - x_{r+k})²` for the half-normalized eigenvector.
pub fn diff_sq_asymptotic(r: usize, k: usize, s: usize) -> Result<f64> {
    check_diff_indices(r, k, s)?;
    let theta = PI / (2 * s + 1) as f64;
    let (r, k) = (r as f64, k as f64);
    Ok(k * k * (2.0 * r + k - 1.0).powi(2) * theta.powi(5) / PI)
}

/// Exact `(x_r - x_{r+k})²` for the half-normalized eigenvector, using
/// `cos a - cos b = 2 sin((a+b)/2) sin((b-a)/2)`.
pub fn diff_sq_exact(r: usize, k: usize, s: usize) -> Result<f64> {
    check_diff_indices(r, k, s)?;
    let theta = PI / (2 * s + 1) as f64;
    let (rf, kf) = (r as f64, k as f64);
    let diff = 2.0 * ((2.0 * rf + kf - 1.0) * theta / 2.0).sin() * (kf * theta / 2.0).sin();
    Ok(omega_sq(s) * diff * diff)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn golden_ratio_at_s2() {
        assert!((lambda2_abs_a(2) - (1.0 + 5f64.sqrt()) / 2.0).abs() < 1e-12);
        let literal = 1.0 / (2.0 + 2.0 * (4.0 * PI / 5.0).cos()).sqrt();
        assert!((lambda2_abs_a(2) - literal).abs() < 1e-12);
    }

    #[test]
    fn lambda2_increases_with_s() {
        for s in 2..100 {
            assert!(lambda2_abs_a(s + 1) > lambda2_abs_a(s));
        }
    }

    #[test]
    fn reduced_form_matches_literal_formula() {
        for s in [3, 10, 57, 400] {
            let sf = s as f64;
            let literal = 1.0 / (2.0 + 2.0 * (2.0 * sf * PI / (2.0 * sf + 1.0)).cos()).sqrt();
            assert!((lambda2_abs_a(s) / literal - 1.0).abs() < 1e-9, "s={s}");
        }
    }

    #[test]
    fn eigvec_n4_values() {
        let u = eigvec2_a(4).unwrap();
        let want = [0.951057, 0.587785, -0.587785, -0.951057];
        for (a, b) in u.iter().zip(want) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(eigvec2_a(6).is_ok());
        assert!(eigvec2_a(5).is_err());
        assert!(eigvec2_a(2).is_err());
    }

    #[test]
    fn eigvec_antisymmetric_and_monotone() {
        for n in [4, 8, 30, 256] {
            let u = eigvec2_a(n).unwrap();
            for j in 0..n {
                assert_eq!(u[j], -u[n - 1 - j]);
            }
            for j in 0..n / 2 {
                assert!(u[j] > 0.0);
            }
            assert!(u.windows(2).all(|w| w[0] > w[1]));
            let unit = eigvec2_a_unit(n).unwrap();
            assert!((norm(&unit) - 1.0).abs() < 1e-12);
            let half = eigvec2_a_half_normalized(n).unwrap();
            assert!((norm(&half[..n / 2]) - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn lambda2_sign_is_positive() {
        for s in [2, 3, 8, 32, 100] {
            let pair = signed_lambda2_a(s).unwrap();
            assert!(pair.value > 0.0);
            assert!(pair.relative_residual() < 1e-9);
        }
    }

    #[test]
    fn fast_operators_match_dense() {
        let s = 5;
        let x: Vec<f64> = (0..2 * s).map(|i| ((i * 7 % 11) as f64) - 4.5).collect();
        let xa = nalgebra::DVector::from_column_slice(&x);
        let xd = nalgebra::DVector::from_column_slice(&x[..s]);
        let cases = [
            (apply_a(&x), a_matrix(s) * &xa),
            (apply_b(&x), b_matrix(s) * &xa),
            (apply_d(&x[..s]), d_matrix(s) * &xd),
        ];
        for (fast, dense) in cases {
            for (a, b) in fast.iter().zip(dense.iter()) {
                assert!((a - b).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn d_matrix_layout() {
        let d = d_matrix(3);
        let want = DMatrix::from_row_slice(3, 3, &[1.0, 1.0, 1.0, 1.0, 1.0, 2.0, 1.0, 2.0, 2.0]);
        assert_eq!(d, want);
    }

    #[test]
    fn eig_b_index_range() {
        assert!(eig_b(0, 3).is_err());
        assert!(eig_b(7, 3).is_err());
        assert!(eig_b(6, 3).is_ok());
    }

    #[test]
    fn eig_b_antisymmetric_branch_is_orthogonal_to_ones() {
        for s in [2, 5, 9] {
            for k in 1..=s {
                let pair = eig_b(k, s).unwrap();
                assert!(pair.vector.iter().sum::<f64>().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn eig_b_pairs_have_small_residuals() {
        for s in [2, 3, 6, 11] {
            let mut values = Vec::new();
            for k in 1..=2 * s {
                let pair = eig_b(k, s).unwrap();
                assert!(pair.relative_residual() < 1e-10, "s={s} k={k}");
                values.push(pair.value);
            }
            let dense = crate::solver::dense_spectrum(&b_matrix(s)).unwrap();
            let mut want: Vec<f64> = dense.iter().map(|p| p.value).collect();
            want.sort_by(f64::total_cmp);
            values.sort_by(f64::total_cmp);
            for (a, b) in values.iter().zip(&want) {
                assert!((a - b).abs() < 1e-9, "s={s}");
            }
        }
    }

    #[test]
    fn cosine_vector_is_b_pair_at_k_equals_s() {
        let s = 7;
        let pair = eig_b(s, s).unwrap();
        let u = eigvec2_a(2 * s).unwrap();
        let dot: f64 = pair.vector.iter().zip(&u).map(|(a, b)| a * b).sum();
        assert!((dot.abs() - norm(&pair.vector) * norm(&u)).abs() < 1e-9);
    }

    #[test]
    fn roots_reproduce_dense_d_spectrum() {
        for s in [6, 8, 12, 16] {
            let mut dense: Vec<f64> = crate::solver::dense_spectrum(&d_matrix(s))
                .unwrap()
                .iter()
                .map(|p| p.value.abs())
                .collect();
            dense.sort_by(|a, b| b.total_cmp(a));
            let roots = theta_roots_d(s).unwrap().eigenvalue_magnitudes();
            assert_eq!(roots.len(), s);
            for (a, b) in roots.iter().zip(&dense) {
                assert!((a - b).abs() < 1e-9 * b.max(1.0), "s={s}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn perron_value_matches_dense_a() {
        for s in [6, 10] {
            let dense = crate::solver::dense_spectrum(&a_matrix(s)).unwrap();
            assert!((lambda1_a(s).unwrap() - dense[0].value).abs() < 1e-9);
            assert!((lambda2_abs_a(s) - dense[1].value.abs()).abs() < 1e-9);
            assert!(dense[2].value.abs() <= lambda3_a_bound(s));
        }
    }

    #[test]
    fn char_poly_special_points() {
        for s in [6, 8, 13] {
            assert_eq!(char_poly_d(0.0, s), 0.0);
            assert!(char_poly_d(PI, s).abs() < 1e-12);
        }
        let s = 6;
        let sf = s as f64;
        assert!(char_poly_d(PI / (sf * sf), s) >= 0.0);
        assert!(char_poly_d(PI / (4.0 * sf), s) < 0.0);
    }

    #[test]
    fn roots_are_certified() {
        for s in [6, 8, 12, 16, 40] {
            let roots = theta_roots_d(s).unwrap();
            assert_eq!(roots.trigonometric.len(), s - 1);
            for r in &roots.trigonometric {
                let (lo, hi) = r.bracket;
                assert!(lo < r.theta && r.theta < hi);
                assert!((char_poly_d(lo, s) < 0.0) != (char_poly_d(hi, s) < 0.0));
                assert!(char_poly_d(r.theta, s).abs() <= 1e-12);
            }
            let h = roots.hyperbolic;
            assert!(h.bracket.0 < h.t && h.t < h.bracket.1);
            assert!(char_poly_d_hyperbolic(h.t, s).abs() <= 1e-12);
        }
    }

    #[test]
    fn root_scan_preconditions() {
        assert!(theta_roots_d(4).is_err());
        assert!(theta_roots_d(7).is_err());
    }

    #[test]
    fn hyperbolic_root_tends_to_ln4() {
        let t = theta_roots_d(64).unwrap().hyperbolic.t;
        assert!((t - 4f64.ln()).abs() < 1e-10);
    }

    #[test]
    fn smallest_roots_in_stated_windows() {
        let s = 6;
        let sf = s as f64;
        let roots = theta_roots_d(s).unwrap();
        let t1 = roots.trigonometric[0].theta;
        assert!(PI / (sf * sf) < t1 && t1 < PI / (4.0 * sf));
        assert!(roots.trigonometric[1].theta > PI / sf);
    }

    #[test]
    fn gap_bounds_scale_with_p() {
        let half = gap_bounds_m(&ModelParams::new(64, 0.5).unwrap()).unwrap();
        let one = gap_bounds_m(&ModelParams::new(64, 1.0).unwrap()).unwrap();
        assert!((one.gap12_lower - 2.0 * half.gap12_lower).abs() < 1e-12);
        assert!((one.gap23_lower - 2.0 * half.gap23_lower).abs() < 1e-12);
        assert!(gap_bounds_m(&ModelParams::with_band(64, 0.5, 32).unwrap()).is_err());
    }

    #[test]
    fn gap_bounds_positive() {
        for n in (12..=256).step_by(4) {
            let g = gap_bounds_m(&ModelParams::new(n, 0.5).unwrap()).unwrap();
            assert!(g.gap12_lower > 0.0 && g.gap23_lower > 0.0, "n={n}");
        }
    }

    #[test]
    fn half_norm_identity() {
        for s in [1, 2, 7, 100, 4096] {
            let want = (2 * s + 1) as f64 / 4.0;
            assert!((half_norm_sq(s) - want).abs() <= 1e-10 * want, "s={s}");
        }
    }

    #[test]
    fn diff_sq_leading_term() {
        assert!(diff_sq_asymptotic(0, 1, 10).is_err());
        assert!(diff_sq_asymptotic(1, 0, 10).is_err());
        assert!(diff_sq_asymptotic(5, 6, 10).is_err());
        let s = 2000;
        let ratio = diff_sq_exact(3, 2, s).unwrap() / diff_sq_asymptotic(3, 2, s).unwrap();
        assert!((ratio - 1.0).abs() < 0.05, "{ratio}");
        // k²(2r+k-1)² polynomial factor
        let a = diff_sq_asymptotic(2, 3, 50).unwrap();
        let b = diff_sq_asymptotic(2, 6, 50).unwrap();
        assert!((b / a - (36.0 * 81.0) / (9.0 * 36.0)).abs() < 1e-12);
    }

    #[test]
    fn exact_diff_matches_vector() {
        let s = 40;
        let x = eigvec2_a_half_normalized(2 * s).unwrap();
        for (r, k) in [(1, 1), (3, 7), (10, 30)] {
            let direct = (x[r - 1] - x[r + k - 1]).powi(2);
            assert!((direct - diff_sq_exact(r, k, s).unwrap()).abs() < 1e-14);
        }
    }
}
