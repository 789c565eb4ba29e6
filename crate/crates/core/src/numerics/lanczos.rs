use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct LanczosOptions {
    /// Number of distinct lowest eigenvalues wanted.
    pub n_values: usize,
    /// Relative change between checks below which a value counts as converged.
    pub tol: f64,
    pub max_iter: usize,
    pub check_every: usize,
}

impl Default for LanczosOptions {
    fn default() -> Self {
        Self { n_values: 1, tol: 1e-12, max_iter: 20_000, check_every: 20 }
    }
}

#[derive(Debug, Clone)]
pub struct LanczosResult {
    pub values: Vec<f64>,
    pub iterations: usize,
}

/// Lowest eigenvalues of a real symmetric operator by plain Lanczos.
///
/// No reorthogonalization: spurious copies of converged values are merged, and
/// values are accepted once they are stable over two successive checks.
pub fn lanczos_lowest<F: FnMut(&[f64], &mut [f64])>(
    mut apply: F,
    start: &[f64],
    opts: &LanczosOptions,
) -> Result<LanczosResult> {
    let n = start.len();
    let s = start.iter().map(|x| x * x).sum::<f64>().sqrt();
    if s == 0.0 {
        return Err(Error::Domain("zero Lanczos start vector".into()));
    }
    let mut v: Vec<f64> = start.iter().map(|x| x / s).collect();
    let mut v_prev = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut last: Option<Vec<f64>> = None;
    let mut stable = 0;
    for it in 1..=opts.max_iter {
        apply(&v, &mut w);
        let a: f64 = w.iter().zip(&v).map(|(x, y)| x * y).sum();
        let b_prev = beta.last().copied().unwrap_or(0.0);
        for i in 0..n {
            w[i] -= a * v[i] + b_prev * v_prev[i];
        }
        alpha.push(a);
        let b = w.iter().map(|x| x * x).sum::<f64>().sqrt();
        let done_space = b <= 1e-14 * a.abs().max(1.0);
        if it % opts.check_every == 0 || done_space || it == opts.max_iter {
            let vals = distinct_lowest(&alpha, &beta, opts.n_values);
            if let Some(prev) = &last {
                let ok = vals.len() == opts.n_values
                    && prev.len() == vals.len()
                    && vals.iter().zip(prev).all(|(x, y)| (x - y).abs() <= opts.tol * x.abs().max(1.0));
                stable = if ok { stable + 1 } else { 0 };
            }
            if stable >= 2 || done_space {
                return Ok(LanczosResult { values: vals, iterations: it });
            }
            last = Some(vals);
        }
        beta.push(b);
        std::mem::swap(&mut v_prev, &mut v);
        for i in 0..n {
            v[i] = w[i] / b;
        }
    }
    Err(Error::EigenNoConvergence { restarts: opts.max_iter, residual: f64::NAN })
}

fn distinct_lowest(alpha: &[f64], beta: &[f64], count: usize) -> Vec<f64> {
    let all = tridiagonal_eigenvalues(alpha, &beta[..alpha.len() - 1], (count * 3).min(alpha.len()));
    let mut out: Vec<f64> = Vec::new();
    for v in all {
        if out.last().is_none_or(|&l| (v - l).abs() > 1e-9 * v.abs().max(1.0)) {
            out.push(v);
        }
        if out.len() == count {
            break;
        }
    }
    out
}

/// Lowest `count` eigenvalues of the symmetric tridiagonal matrix (Sturm bisection).
pub fn tridiagonal_eigenvalues(diag: &[f64], off: &[f64], count: usize) -> Vec<f64> {
    let n = diag.len();
    assert_eq!(off.len() + 1, n.max(1));
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for i in 0..n {
        let r = if i > 0 { off[i - 1].abs() } else { 0.0 } + if i + 1 < n { off[i].abs() } else { 0.0 };
        lo = lo.min(diag[i] - r);
        hi = hi.max(diag[i] + r);
    }
    let below = |x: f64| -> usize {
        let mut c = 0;
        let mut q = 1.0;
        for i in 0..n {
            let b2 = if i > 0 { off[i - 1] * off[i - 1] } else { 0.0 };
            q = diag[i] - x - if i > 0 { b2 / q } else { 0.0 };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                c += 1;
            }
        }
        c
    };
    (0..count.min(n))
        .map(|k| {
            let (mut a, mut b) = (lo, hi);
            for _ in 0..200 {
                let m = 0.5 * (a + b);
                if m <= a || m >= b {
                    break;
                }
                if below(m) > k {
                    b = m;
                } else {
                    a = m;
                }
            }
            0.5 * (a + b)
        })
        .collect()
}
