//! Coordinate-space finite-difference reference solvers.
//!
//! Two-body: `-½ d²/dξ² + v0 f(ξ)` on a uniform grid with Dirichlet walls (contact:
//! `v0/h` at the origin), lowest eigenvalue by Sturm bisection, Richardson over
//! `h, h/2, h/4`.
//!
//! Three-body: in the light-heavy separations `u = x - y/2`, `w = x + y/2`
//! (`x` light relative to the heavy pair, `y` heavy separation)
//! `H = -½(∂u² + ∂w²) - β ∂u∂w + v0 f(u) + v0 f(w)`, `β = α/(1+α)`.
//! For the contact case the scaled form `-(∂u² + ∂w²) - 2β ∂u∂w - 2δ(u) - 2δ(w)` is
//! used directly, in units of `|E0⁽²⁾|`. Heavy exchange swaps `u` and `w`. Each level
//! reports `ε(h) = E3(h)/|E2(h)|` with the two-body energy of the same spacing; levels
//! are extrapolated with an order fitted from three spacings.

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{bracket_root, lanczos_lowest, LanczosOptions};
use crate::potential::Shape;
use crate::threebody::{MassConfig, Parity};
use crate::twobody::asymptotic_q0;

/// Uniform grid `ξ_i = (i - (n-1)/2) h` on `[-extent, extent]`, `n` odd.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpatialGrid {
    pub extent: f64,
    pub n: usize,
}

impl SpatialGrid {
    pub fn new(extent: f64, n: usize) -> Result<Self> {
        if n < 5 || n.is_multiple_of(2) || !(extent > 0.0) {
            return Err(Error::Domain(format!(
                "spatial grid needs odd n >= 5 and positive extent (n = {n}, extent = {extent})"
            )));
        }
        Ok(Self { extent, n })
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.extent / (self.n - 1) as f64
    }

    /// Same extent with the spacing divided by `k`.
    pub fn refined(&self, k: usize) -> Self {
        Self { extent: self.extent, n: (self.n - 1) * k + 1 }
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 - ((self.n - 1) / 2) as f64) * self.spacing()
    }

    /// Default two-body grid: walls beyond `18.4/q0`, spacing `width/20`.
    pub fn auto_two_body(shape: &Shape, v0: f64) -> Result<Self> {
        let q = asymptotic_q0(shape, v0)?.0.abs().max(1e-6);
        let w = shape.length_scale();
        let shift = shape.params.get("shift").copied().unwrap_or(0.0).abs();
        let h = 0.05 * w.min(1.0 / q);
        let extent = (18.4 / q).max(12.0 * w + shift);
        let half = (extent / h).ceil() as usize;
        Self::new(half as f64 * h, 2 * half + 1)
    }
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OracleLevel {
    pub h: f64,
    pub n: usize,
    pub value: f64,
    pub iterations: usize,
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct OracleResult {
    /// Extrapolated energy (two-body) or `ε` (three-body).
    pub value: f64,
    /// Uncertainty of the extrapolation.
    pub error: f64,
    /// Convergence order used for the extrapolation.
    pub order: f64,
    pub levels: Vec<OracleLevel>,
    /// Ground state on the coarsest two-body grid, `(ξ, ψ)`, unit `L²` norm.
    #[serde(skip)]
    pub wavefunction: Option<(Vec<f64>, Vec<f64>)>,
}

fn potential_on(shape: &Shape, v0: f64, g: &SpatialGrid) -> Result<Vec<f64>> {
    let h = g.spacing();
    if shape.is_contact() {
        let mut v = vec![0.0; g.n];
        v[(g.n - 1) / 2] = v0 / h;
        return Ok(v);
    }
    (0..g.n).map(|i| Ok(v0 * shape.profile(g.node(i))?)).collect()
}

/// Lowest eigenvalue of `-½ d² + v` on the grid (Dirichlet), with `kin` the coefficient of `-d²`.
fn lowest_tridiagonal(v: &[f64], h: f64, kin: f64) -> f64 {
    let c = kin / (h * h);
    let below = |x: f64| -> usize {
        let mut cnt = 0;
        let mut q = 1.0;
        for (i, vi) in v.iter().enumerate() {
            q = 2.0 * c + vi - x - if i > 0 { c * c / q } else { 0.0 };
            if q == 0.0 {
                q = -1e-300;
            }
            if q < 0.0 {
                cnt += 1;
            }
        }
        cnt
    };
    let mut lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let mut hi = 4.0 * c + v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if below(0.0) >= 1 {
        hi = 0.0;
    }
    for _ in 0..200 {
        let m = 0.5 * (lo + hi);
        if m <= lo || m >= hi {
            break;
        }
        if below(m) >= 1 {
            hi = m;
        } else {
            lo = m;
        }
    }
    0.5 * (lo + hi)
}

/// Lowest eigenvalue refined by the Rayleigh quotient of its inverse-iteration vector.
///
/// Bisection alone is limited to about `ε ‖T‖ ~ ε/h²` in absolute terms, too coarse for
/// shallow states on fine grids; the quotient is formed from squared differences.
fn lowest_refined(v: &[f64], h: f64, kin: f64) -> (f64, Vec<f64>) {
    let e = lowest_tridiagonal(v, h, kin);
    let psi = inverse_iteration(v, h, kin, e);
    let c = kin / (h * h);
    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..psi.len() {
        let right = if i + 1 < psi.len() { psi[i + 1] } else { 0.0 };
        let d = right - psi[i];
        num += c * d * d + v[i] * psi[i] * psi[i];
        den += psi[i] * psi[i];
    }
    // left wall term
    num += c * psi[0] * psi[0];
    (num / den, psi)
}

fn inverse_iteration(v: &[f64], h: f64, kin: f64, e: f64) -> Vec<f64> {
    let n = v.len();
    let c = kin / (h * h);
    let sigma = e - 1e-3 * e.abs().max(1e-300);
    let mut x = vec![1.0; n];
    for _ in 0..5 {
        // Thomas algorithm for (T - σ) y = x
        let mut cp = vec![0.0; n];
        let mut dp = vec![0.0; n];
        for i in 0..n {
            let b = 2.0 * c + v[i] - sigma;
            let a = if i > 0 { -c } else { 0.0 };
            let denom = b - a * if i > 0 { cp[i - 1] } else { 0.0 };
            cp[i] = -c / denom;
            dp[i] = (x[i] - a * if i > 0 { dp[i - 1] } else { 0.0 }) / denom;
        }
        let mut y = vec![0.0; n];
        y[n - 1] = dp[n - 1];
        for i in (0..n - 1).rev() {
            y[i] = dp[i] - cp[i] * y[i + 1];
        }
        let nrm = (y.iter().map(|t| t * t).sum::<f64>() * h).sqrt();
        x = y.into_iter().map(|t| t / nrm).collect();
    }
    if x[(n - 1) / 2] < 0.0 {
        x.iter_mut().for_each(|t| *t = -*t);
    }
    x
}

/// Two-body ground-state energy on `grid`, `grid/2`, `grid/4` with Richardson extrapolation.
pub fn two_body_coordinate(shape: &Shape, v0: f64, grid: &SpatialGrid) -> Result<OracleResult> {
    let mut levels = Vec::new();
    for k in [1, 2, 4] {
        let g = grid.refined(k);
        let v = potential_on(shape, v0, &g)?;
        let (e, _) = lowest_refined(&v, g.spacing(), 0.5);
        levels.push(OracleLevel { h: g.spacing(), n: g.n, value: e, iterations: 0 });
    }
    if levels[0].value >= 0.0 {
        return Err(Error::NoBoundState(format!("no negative eigenvalue on the oracle grid (v0 = {v0})")));
    }
    let (e1, e2, e3) = (levels[0].value, levels[1].value, levels[2].value);
    let r1 = (4.0 * e3 - e2) / 3.0;
    let value = (64.0 * e3 - 20.0 * e2 + e1) / 45.0;
    let v = potential_on(shape, v0, grid)?;
    let (_, psi) = lowest_refined(&v, grid.spacing(), 0.5);
    let xi = (0..grid.n).map(|i| grid.node(i)).collect();
    Ok(OracleResult { value, error: (value - r1).abs(), order: 2.0, levels, wavefunction: Some((xi, psi)) })
}

/// Plane-wave overlap check helper: `φ(p) = ∫ dξ e^{-ipξ} ψ(ξ)` of the oracle state.
pub fn momentum_amplitude(result: &OracleResult, p: f64) -> Option<C64> {
    let (xi, psi) = result.wavefunction.as_ref()?;
    let h = xi[1] - xi[0];
    Some(xi.iter().zip(psi).fold(C64::new(0.0, 0.0), |acc, (&x, &f)| acc + C64::from_polar(f * h, -p * x)))
}

/// Three-body ground state of one parity sector in the `(u, w)` plane.
///
/// `levels` are the odd grid sizes on the common extent (at least three, coarse first).
/// For the contact shape the scaled Hamiltonian is used and `v0` is ignored.
pub fn three_body_coordinate(
    shape: &Shape,
    v0: f64,
    alpha: f64,
    parity: Parity,
    extent: f64,
    levels: &[usize],
) -> Result<OracleResult> {
    let mass = MassConfig::new(alpha)?;
    if levels.len() < 3 {
        return Err(Error::Domain("three grid levels are needed for the extrapolation".into()));
    }
    let beta = mass.alpha / (1.0 + mass.alpha);
    let contact = shape.is_contact();
    // kinetic prefactor of -∂² and mixed-term coefficient
    let (kin, mix) = if contact { (1.0, 2.0 * beta) } else { (0.5, beta) };
    let mut out = Vec::new();
    for &n in levels {
        let g = SpatialGrid::new(extent, n)?;
        let h = g.spacing();
        let v: Vec<f64> = if contact {
            let mut v = vec![0.0; n];
            v[(n - 1) / 2] = -2.0 / h;
            v
        } else {
            potential_on(shape, v0, &g)?
        };
        let (e2, _) = lowest_refined(&v, h, kin);
        if e2 >= 0.0 {
            return Err(Error::NoBoundState("no two-body bound state on the oracle grid".into()));
        }
        let (e3, iters) = lowest_2d(&v, n, h, kin, mix, parity)?;
        out.push(OracleLevel { h, n, value: e3 / e2.abs(), iterations: iters });
    }
    let m = out.len();
    let (l1, l2, l3) = (&out[m - 3], &out[m - 2], &out[m - 1]);
    let (value, order, error) = extrapolate(l1.h, l1.value, l2.h, l2.value, l3.h, l3.value);
    Ok(OracleResult { value, error, order, levels: out, wavefunction: None })
}

/// Extrapolation with fitted order from three levels; the error bar is the spread
/// against the second-order extrapolation of the two finest levels.
pub fn extrapolate(h1: f64, e1: f64, h2: f64, e2: f64, h3: f64, e3: f64) -> (f64, f64, f64) {
    let fixed = |p: f64| e3 - (e2 - e3) * h3.powf(p) / (h2.powf(p) - h3.powf(p));
    let second = fixed(2.0);
    let d1 = e1 - e2;
    let d2 = e2 - e3;
    let target = d1 / d2;
    let ratio = |p: f64| (h1.powf(p) - h2.powf(p)) / (h2.powf(p) - h3.powf(p)) - target;
    let p =
        if d1.signum() == d2.signum() && d2 != 0.0 { bracket_root(ratio, 0.5, 6.0, 1e-12).unwrap_or(2.0) } else { 2.0 };
    let value = fixed(p);
    let error = (value - second).abs().max((value - e3).abs() * 1e-3);
    (value, p, error)
}

/// `y = H x` for `H = -kin (∂u² + ∂w²) - mix ∂u∂w + V(u) + V(w)` on an `n × n` grid
/// with Dirichlet boundaries, `x[i * n + j]` at `(u_i, w_j)`.
fn apply_h2d(x: &[f64], y: &mut [f64], v: &[f64], n: usize, h: f64, kin: f64, mix: f64) {
    let c = kin / (h * h);
    let cm = mix / (4.0 * h * h);
    for i in 0..n {
        for j in 0..n {
            let at = |a: isize, b: isize| -> f64 {
                let (ii, jj) = (i as isize + a, j as isize + b);
                if ii < 0 || jj < 0 || ii >= n as isize || jj >= n as isize {
                    0.0
                } else {
                    x[ii as usize * n + jj as usize]
                }
            };
            let x0 = x[i * n + j];
            let lap = 4.0 * x0 - at(-1, 0) - at(1, 0) - at(0, -1) - at(0, 1);
            let cross = at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1);
            y[i * n + j] = c * lap - cm * cross + (v[i] + v[j]) * x0;
        }
    }
}

fn lowest_2d(v: &[f64], n: usize, h: f64, kin: f64, mix: f64, parity: Parity) -> Result<(f64, usize)> {
    let apply = |x: &[f64], y: &mut [f64]| apply_h2d(x, y, v, n, h, kin, mix);
    let s = parity.sign();
    let mut start = vec![0.0; n * n];
    let mid = ((n - 1) / 2) as f64;
    for i in 0..n {
        for j in 0..n {
            let (a, b) = ((i as f64 - mid) * h, (j as f64 - mid) * h);
            let base = (-(a.abs() + b.abs()) / 2.0).exp() * (1.0 + 0.3 * (a - b).tanh());
            let swapped = (-(a.abs() + b.abs()) / 2.0).exp() * (1.0 + 0.3 * (b - a).tanh());
            start[i * n + j] = base + s * swapped;
        }
    }
    let r =
        lanczos_lowest(apply, &start, &LanczosOptions { n_values: 1, tol: 1e-13, max_iter: 50_000, check_every: 25 })?;
    Ok((r.values[0], r.iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    #[test]
    fn contact_two_body_exact_discrete() {
        let s = Shape::by_name("contact", &BTreeMap::new()).unwrap();
        let g = SpatialGrid::new(30.0, 301).unwrap();
        let r = two_body_coordinate(&s, -1.0, &g).unwrap();
        assert!((r.value + 0.5).abs() < 1e-6, "{:?}", r);
    }

    #[test]
    fn gaussian_matches_reference() {
        let s = Shape::by_name("gaussian", &BTreeMap::new()).unwrap();
        let g = SpatialGrid::auto_two_body(&s, -0.5).unwrap();
        let r = two_body_coordinate(&s, -0.5, &g).unwrap();
        let q = (-2.0 * r.value).sqrt();
        assert!((q - 0.594972).abs() < 2e-6, "{q}");
    }

    #[test]
    fn extrapolation_recovers_power_law() {
        let f = |h: f64| -3.0 + 0.7 * h.powf(1.6);
        let (v, p, _) = extrapolate(0.1, f(0.1), 0.07, f(0.07), 0.05, f(0.05));
        assert!((v + 3.0).abs() < 1e-10 && (p - 1.6).abs() < 1e-8);
    }

    #[test]
    fn three_body_contact_coarse() {
        let s = Shape::by_name("contact", &BTreeMap::new()).unwrap();
        let r = three_body_coordinate(&s, 0.0, 1.0, Parity::Even, 10.0, &[81, 121, 161]).unwrap();
        assert!((r.value + 2.0877).abs() < 0.02, "{:?}", r);
    }

    #[test]
    fn kinetic_symbol_matches_green_coefficients() {
        // the discrete symbol approaches α_p P² + α_k K² at second order in h
        let symbol = |n: usize, h: f64, kin: f64, mix: f64, a: f64, b: f64| -> f64 {
            let c = (n - 1) / 2;
            let x: Vec<f64> = (0..n * n)
                .map(|idx| {
                    let (i, j) = (idx / n, idx % n);
                    (a * (i as f64 - c as f64) * h + b * (j as f64 - c as f64) * h).cos()
                })
                .collect();
            let mut y = vec![0.0; n * n];
            apply_h2d(&x, &mut y, &vec![0.0; n], n, h, kin, mix);
            y[c * n + c] / x[c * n + c]
        };
        for alpha in [1.0, 5.0, 20.0] {
            let m = MassConfig::new(alpha).unwrap();
            let beta = alpha / (1.0 + alpha);
            for (pp, kk) in [(0.3, 0.2), (-0.4, 0.1), (0.2, -0.5)] {
                // plane wave exp(i(P x + K y)) in the (u, w) variables
                let (a, b): (f64, f64) = (0.5 * pp - kk, 0.5 * pp + kk);
                for (kin, mix, scale) in [(1.0, 2.0 * beta, 1.0), (0.5, beta, 0.5)] {
                    let want = scale * (m.alpha_p * pp * pp + m.alpha_k * kk * kk);
                    let e1 = symbol(41, 0.1, kin, mix, a, b) - want;
                    let e2 = symbol(81, 0.05, kin, mix, a, b) - want;
                    assert!(e2.abs() < 2e-3 * want, "alpha {alpha}: error {e2} at {want}");
                    assert!((e1 / e2 - 4.0).abs() < 0.1, "alpha {alpha}: ratio {}", e1 / e2);
                }
            }
        }
    }

    #[test]
    fn interaction_arguments_match_kernel_shift() {
        // ∫∫ dx dy e^{-i(p x + k y)} f(x ∓ y/2) e^{-y²} = F(p) √π e^{-(k ± p/2)²/4}
        let s = Shape::by_name("skew-gaussian", &BTreeMap::new()).unwrap();
        let (l, h) = (12.0, 0.05);
        let m = (2.0 * l / h) as usize + 1;
        let node = |i: usize| -l + i as f64 * h;
        for (p, k) in [(0.7, 0.3), (-1.1, 0.5), (0.4, -0.9)] {
            for sign in [1.0, -1.0] {
                let mut acc = C64::new(0.0, 0.0);
                for i in 0..m {
                    for j in 0..m {
                        let (x, y) = (node(i), node(j));
                        let f = s.profile(x - sign * 0.5 * y).unwrap() * (-y * y).exp();
                        acc += C64::from_polar(f * h * h, -(p * x + k * y));
                    }
                }
                let q = k + sign * 0.5 * p;
                let want = s.transform(p).unwrap() * (std::f64::consts::PI.sqrt() * (-0.25 * q * q).exp());
                assert!((acc - want).norm() < 1e-9, "p {p} k {k} sign {sign}: {acc} vs {want}");
            }
        }
    }
}
