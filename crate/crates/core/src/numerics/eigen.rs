use nalgebra::{DMatrix, Schur};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

/// Matrix-free linear operator on `C^n`.
pub trait LinearOperator: Sync {
    fn dim(&self) -> usize;
    fn apply(&self, x: &[C64], y: &mut [C64]);
}

/// Closure-backed [`LinearOperator`].
pub struct FnOperator<F> {
    pub dim: usize,
    pub f: F,
}

impl<F: Fn(&[C64], &mut [C64]) + Sync> LinearOperator for FnOperator<F> {
    fn dim(&self) -> usize {
        self.dim
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        (self.f)(x, y)
    }
}

/// Explicit dense matrix as a [`LinearOperator`].
pub struct DenseOperator {
    pub matrix: DMatrix<C64>,
}

impl LinearOperator for DenseOperator {
    fn dim(&self) -> usize {
        self.matrix.nrows()
    }
    fn apply(&self, x: &[C64], y: &mut [C64]) {
        let n = self.matrix.nrows();
        for (i, yi) in y.iter_mut().enumerate().take(n) {
            *yi = C64::new(0.0, 0.0);
            for (j, xj) in x.iter().enumerate() {
                *yi += self.matrix[(i, j)] * xj;
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EigenOptions {
    /// Ritz residual target, relative to the largest modulus among the wanted values.
    pub tol: f64,
    /// Krylov basis size; defaults to `max(2k + 10, 30)`.
    pub krylov_dim: Option<usize>,
    pub max_restarts: usize,
    /// Operators of at most this dimension are assembled and solved densely.
    pub dense_limit: usize,
    /// Relative imaginary part above which an eigenvalue is flagged complex.
    pub imag_threshold: f64,
}

impl Default for EigenOptions {
    fn default() -> Self {
        Self { tol: 1e-10, krylov_dim: None, max_restarts: 400, dense_limit: 400, imag_threshold: 1e-8 }
    }
}

/// Leading eigenpairs ordered by decreasing real part.
#[derive(Debug, Clone)]
pub struct EigenResult {
    pub values: Vec<C64>,
    /// Unit-norm eigenvectors.
    pub vectors: Vec<Vec<C64>>,
    /// True residuals `‖A x − λ x‖` of the returned pairs.
    pub residuals: Vec<f64>,
    /// `true` where the imaginary part exceeds the configured threshold.
    pub complex_flags: Vec<bool>,
    /// Index pairs of (near-)degenerate neighbours.
    pub degenerate: Vec<(usize, usize)>,
    pub restarts: usize,
    pub dense: bool,
}

/// `k` eigenvalues of largest real part with default options and residual target `tol`.
pub fn leading_eigenpairs(op: &dyn LinearOperator, k: usize, tol: f64) -> Result<EigenResult> {
    leading_eigenpairs_with(op, k, &EigenOptions { tol, ..EigenOptions::default() })
}

pub fn leading_eigenpairs_with(op: &dyn LinearOperator, k: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let n = op.dim();
    assert!(k >= 1 && k <= n, "need 1 <= k <= dim");
    let m = opts.krylov_dim.unwrap_or((2 * k + 10).max(30));
    if n <= opts.dense_limit || n <= m + 1 {
        return dense_pairs(op, k, opts);
    }
    krylov_schur(op, k, m, opts)
}

fn start_vector(n: usize) -> Vec<C64> {
    // splitmix64, fixed seed
    let mut state: u64 = 0x9E37_79B9_7F4A_7C15;
    let mut v = Vec::with_capacity(n);
    for _ in 0..n {
        state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^= z >> 31;
        let u = (z >> 11) as f64 / (1u64 << 53) as f64;
        v.push(C64::new(1.0 + 0.5 * (u - 0.5), 0.0));
    }
    let nrm = norm(&v);
    v.iter_mut().for_each(|x| *x /= nrm);
    v
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt()
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x.conj() * y)
}

/// Two passes of classical Gram-Schmidt of `w` against `basis`; returns the coefficients.
fn orthogonalize(basis: &[Vec<C64>], w: &mut [C64]) -> Vec<C64> {
    let mut h = vec![C64::new(0.0, 0.0); basis.len()];
    for _ in 0..2 {
        let c: Vec<C64> = basis.iter().map(|v| dot(v, w)).collect();
        for (v, ci) in basis.iter().zip(&c) {
            for (wi, vi) in w.iter_mut().zip(v) {
                *wi -= ci * vi;
            }
        }
        for (hi, ci) in h.iter_mut().zip(&c) {
            *hi += ci;
        }
    }
    h
}

fn krylov_schur(op: &dyn LinearOperator, k: usize, m: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let n = op.dim();
    let mut basis: Vec<Vec<C64>> = vec![start_vector(n)];
    let mut h = DMatrix::<C64>::zeros(m + 1, m);
    let mut p = 0usize;
    let mut w = vec![C64::new(0.0, 0.0); n];
    let mut best = f64::INFINITY;
    let mut fresh = 1u64;
    for restart in 0..=opts.max_restarts {
        for j in p..m {
            op.apply(&basis[j], &mut w);
            let scale = norm(&w);
            let coeffs = orthogonalize(&basis, &mut w);
            for (i, c) in coeffs.iter().enumerate() {
                h[(i, j)] = *c;
            }
            let mut beta = norm(&w);
            if beta <= 1e-13 * scale.max(f64::MIN_POSITIVE) {
                // invariant subspace: continue with a fresh direction
                fresh += 1;
                let mut r = start_vector(n);
                for (i, x) in r.iter_mut().enumerate() {
                    *x *= C64::new(((i as u64 * 7919 + fresh * 104729) % 1009) as f64 / 1009.0 + 0.1, 0.0);
                }
                orthogonalize(&basis, &mut r);
                w.copy_from_slice(&r);
                beta = norm(&w);
                h[(j + 1, j)] = C64::new(0.0, 0.0);
            } else {
                h[(j + 1, j)] = C64::new(beta, 0.0);
            }
            let v: Vec<C64> = w.iter().map(|x| x / beta).collect();
            basis.push(v);
        }
        let s = h.view((0, 0), (m, m)).into_owned();
        let (mut q, mut t) = Schur::new(s).unpack();
        sort_schur(&mut t, &mut q, m);
        let b: Vec<C64> =
            (0..m).map(|j| (0..m).fold(C64::new(0.0, 0.0), |acc, i| acc + h[(m, i)] * q[(i, j)])).collect();
        let lead = t[(0, 0)].norm().max(f64::MIN_POSITIVE);
        let ys: Vec<Vec<C64>> = (0..k).map(|i| triangular_eigvec(&t, i)).collect();
        let res: Vec<f64> = ys.iter().map(|y| dot_plain(&b, y).norm()).collect();
        let worst =
            if res.iter().any(|r| r.is_nan()) { f64::INFINITY } else { res.iter().cloned().fold(0.0, f64::max) / lead };
        best = best.min(worst);
        if worst <= opts.tol {
            let mut values = Vec::with_capacity(k);
            let mut vectors = Vec::with_capacity(k);
            for (i, y) in ys.iter().enumerate() {
                let qy: Vec<C64> =
                    (0..m).map(|r| (0..m).fold(C64::new(0.0, 0.0), |acc, c| acc + q[(r, c)] * y[c])).collect();
                let mut x = vec![C64::new(0.0, 0.0); n];
                for (c, coef) in qy.iter().enumerate() {
                    for (xi, vi) in x.iter_mut().zip(&basis[c]) {
                        *xi += coef * vi;
                    }
                }
                let nx = norm(&x);
                x.iter_mut().for_each(|v| *v /= nx);
                values.push(t[(i, i)]);
                vectors.push(x);
            }
            return Ok(finish(op, values, vectors, restart, false, opts));
        }
        if restart == opts.max_restarts {
            break;
        }
        // thick restart keeping the leading p Schur vectors
        p = ((k + m) / 2).max(k + 1).min(m - 1);
        let mut newb: Vec<Vec<C64>> = Vec::with_capacity(m + 1);
        for j in 0..p {
            let mut x = vec![C64::new(0.0, 0.0); n];
            for i in 0..m {
                let c = q[(i, j)];
                for (xi, vi) in x.iter_mut().zip(&basis[i]) {
                    *xi += c * vi;
                }
            }
            newb.push(x);
        }
        newb.push(basis[m].clone());
        basis = newb;
        h.fill(C64::new(0.0, 0.0));
        for i in 0..p {
            for j in i..p {
                h[(i, j)] = t[(i, j)];
            }
            h[(p, i)] = b[i];
        }
    }
    Err(Error::EigenNoConvergence { restarts: opts.max_restarts, residual: best })
}

fn dot_plain(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).fold(C64::new(0.0, 0.0), |acc, (x, y)| acc + x * y)
}

fn dense_pairs(op: &dyn LinearOperator, k: usize, opts: &EigenOptions) -> Result<EigenResult> {
    let n = op.dim();
    let mut a = DMatrix::<C64>::zeros(n, n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    let mut col = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        op.apply(&e, &mut col);
        e[j] = C64::new(0.0, 0.0);
        for i in 0..n {
            a[(i, j)] = col[i];
        }
    }
    let (mut q, mut t) = Schur::new(a).unpack();
    sort_schur_partial(&mut t, &mut q, n, k);
    let mut values = Vec::with_capacity(k);
    let mut vectors = Vec::with_capacity(k);
    for i in 0..k {
        let y = triangular_eigvec(&t, i);
        let mut x: Vec<C64> =
            (0..n).map(|r| (0..=i).fold(C64::new(0.0, 0.0), |acc, c| acc + q[(r, c)] * y[c])).collect();
        let nx = norm(&x);
        x.iter_mut().for_each(|v| *v /= nx);
        values.push(t[(i, i)]);
        vectors.push(x);
    }
    Ok(finish(op, values, vectors, 0, true, opts))
}

fn finish(
    op: &dyn LinearOperator,
    values: Vec<C64>,
    vectors: Vec<Vec<C64>>,
    restarts: usize,
    dense: bool,
    opts: &EigenOptions,
) -> EigenResult {
    let n = op.dim();
    let mut y = vec![C64::new(0.0, 0.0); n];
    let residuals = values
        .iter()
        .zip(&vectors)
        .map(|(l, x)| {
            op.apply(x, &mut y);
            y.iter().zip(x).map(|(a, b)| (a - l * b).norm_sqr()).sum::<f64>().sqrt()
        })
        .collect();
    let complex_flags =
        values.iter().map(|v| v.im.abs() > opts.imag_threshold * v.norm().max(f64::MIN_POSITIVE)).collect();
    let degenerate = (1..values.len())
        .filter(|&i| (values[i] - values[i - 1]).norm() <= 1e-8 * values[i - 1].norm().max(f64::MIN_POSITIVE))
        .map(|i| (i - 1, i))
        .collect();
    EigenResult { values, vectors, residuals, complex_flags, degenerate, restarts, dense }
}

/// Eigenvector of upper-triangular `t` for its `i`-th diagonal entry (entries beyond `i` vanish).
fn triangular_eigvec(t: &DMatrix<C64>, i: usize) -> Vec<C64> {
    let m = t.nrows();
    let mut y = vec![C64::new(0.0, 0.0); m];
    y[i] = C64::new(1.0, 0.0);
    let lam = t[(i, i)];
    let guard = 1e-14 * t.iter().map(|x| x.norm()).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    for j in (0..i).rev() {
        let mut s = C64::new(0.0, 0.0);
        for l in j + 1..=i {
            s += t[(j, l)] * y[l];
        }
        let mut d = t[(j, j)] - lam;
        if d.norm() < guard {
            d = C64::new(guard, 0.0);
        }
        y[j] = -s / d;
    }
    let ny = norm(&y);
    y.iter_mut().for_each(|v| *v /= ny);
    y
}

fn sort_schur(t: &mut DMatrix<C64>, q: &mut DMatrix<C64>, m: usize) {
    sort_schur_partial(t, q, m, m);
}

/// Moves the `count` diagonal entries of largest real part to the front, in order.
fn sort_schur_partial(t: &mut DMatrix<C64>, q: &mut DMatrix<C64>, m: usize, count: usize) {
    for i in 0..count.min(m) {
        let mut best = i;
        for j in i + 1..m {
            if t[(j, j)].re > t[(best, best)].re {
                best = j;
            }
        }
        for j in (i..best).rev() {
            swap_adjacent(t, q, j);
        }
    }
}

fn swap_adjacent(t: &mut DMatrix<C64>, q: &mut DMatrix<C64>, k: usize) {
    let m = t.nrows();
    let a = t[(k, k)];
    let b = t[(k + 1, k + 1)];
    let x1 = t[(k, k + 1)];
    let x2 = b - a;
    let nrm = (x1.norm_sqr() + x2.norm_sqr()).sqrt();
    if nrm == 0.0 {
        return;
    }
    let z11 = x1 / nrm;
    let z21 = x2 / nrm;
    let z12 = -z21.conj();
    let z22 = z11.conj();
    for r in 0..m {
        let (u, v) = (t[(r, k)], t[(r, k + 1)]);
        t[(r, k)] = u * z11 + v * z21;
        t[(r, k + 1)] = u * z12 + v * z22;
    }
    for c in 0..m {
        let (u, v) = (t[(k, c)], t[(k + 1, c)]);
        t[(k, c)] = z11.conj() * u + z21.conj() * v;
        t[(k + 1, c)] = z12.conj() * u + z22.conj() * v;
    }
    t[(k + 1, k)] = C64::new(0.0, 0.0);
    for r in 0..q.nrows() {
        let (u, v) = (q[(r, k)], q[(r, k + 1)]);
        q[(r, k)] = u * z11 + v * z21;
        q[(r, k + 1)] = u * z12 + v * z22;
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn diag_op(d: Vec<f64>) -> impl LinearOperator {
        FnOperator {
            dim: d.len(),
            f: move |x: &[C64], y: &mut [C64]| {
                for i in 0..x.len() {
                    y[i] = x[i] * d[i];
                }
            },
        }
    }

    #[test]
    fn dense_diagonal() {
        let r = leading_eigenpairs(&diag_op(vec![3.0, 2.0, 1.0]), 2, 1e-12).unwrap();
        assert!(r.dense);
        assert!((r.values[0].re - 3.0).abs() < 1e-12);
        assert!((r.values[1].re - 2.0).abs() < 1e-12);
    }

    #[test]
    fn krylov_matches_known_spectrum() {
        let n = 1500;
        let d: Vec<f64> = (0..n).map(|i| 1.0 / (1.0 + i as f64)).collect();
        let r = leading_eigenpairs(&diag_op(d), 4, 1e-11).unwrap();
        assert!(!r.dense);
        for i in 0..4 {
            assert!((r.values[i].re - 1.0 / (1.0 + i as f64)).abs() < 1e-10, "{:?}", r.values);
            assert!(r.residuals[i] < 1e-9);
        }
    }

    #[test]
    fn krylov_nonsymmetric_agrees_with_dense() {
        let n = 600;
        let a = DMatrix::<C64>::from_fn(n, n, |i, j| {
            let x = (i as f64 - j as f64) / 40.0;
            C64::new((-x * x).exp() / 10.0 + if i == j { 1.0 / (1.0 + i as f64 / 30.0) } else { 0.0 }, 0.01 * x.sin())
        });
        let op = DenseOperator { matrix: a };
        let kr = leading_eigenpairs_with(&op, 3, &EigenOptions { tol: 1e-12, ..Default::default() }).unwrap();
        let de =
            leading_eigenpairs_with(&op, 3, &EigenOptions { tol: 1e-12, dense_limit: 10_000, ..Default::default() })
                .unwrap();
        assert!(!kr.dense && de.dense);
        for i in 0..3 {
            assert!((kr.values[i] - de.values[i]).norm() < 1e-9, "{:?} {:?}", kr.values, de.values);
            assert!(kr.residuals[i] < 1e-8 && de.residuals[i] < 1e-8);
        }
    }

    #[test]
    fn complex_pair_flagged() {
        let a = DMatrix::<C64>::from_row_slice(
            2,
            2,
            &[C64::new(0.0, 0.0), C64::new(-1.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)],
        );
        let r = leading_eigenpairs(&DenseOperator { matrix: a }, 2, 1e-12).unwrap();
        assert!(r.complex_flags.iter().all(|&f| f));
    }
}
