//! Heavy-light two-body bound state in momentum space.
//!
//! `φ(p) = v0/(E - p²/2) ∫ dp'/(2π) F(p-p') φ(p')`, `E = -q0²/2`, normalized to
//! `∫ dp/(2π) |φ|² = 1`. The equation is symmetrized with
//! `D_i = sqrt(w_i/2π) / sqrt(p_i²/2 - E)`, giving the Hermitian matrix `-D V D`
//! whose largest eigenvalue is one at the bound state.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::{bracket_root_fallible, build_grid, CompositeSpec, KernelScalar, MomentumGrid};
use crate::potential::{Shape, ShapeKind};

#[derive(Debug, Clone)]
pub struct TwoBodyOptions {
    pub grid: CompositeSpec,
    /// Relative tolerance on `q0`.
    pub root_tol: f64,
    /// Solve the contact case numerically on a tangent grid of this many points
    /// instead of using the closed form.
    pub contact_grid: Option<usize>,
}

impl Default for TwoBodyOptions {
    fn default() -> Self {
        Self { grid: CompositeSpec { per_panel: 16, ..CompositeSpec::default() }, root_tol: 1e-13, contact_grid: None }
    }
}

#[derive(Debug, Clone)]
pub struct TwoBodyResult {
    pub shape: String,
    pub kind: ShapeKind,
    pub v0: f64,
    pub q0: f64,
    /// `-q0²/2`
    pub e0: f64,
    pub grid: MomentumGrid,
    /// `φ(p_i)`, phase fixed so the largest component is real and positive.
    pub wavefunction: Vec<C64>,
    /// `|∫ dp/(2π) |φ|² - 1|` on the solution grid.
    pub norm_residual: f64,
    /// Max-norm residual of the integral equation relative to `max |φ|`.
    pub equation_residual: f64,
    /// Weight of the part even under `p → -p`.
    pub symmetric_fraction: f64,
    pub q0_asymptotic: f64,
    /// `|⟨φ_contact|φ⟩|` with the contact state of the same `q0`.
    pub overlap: f64,
}

/// Weak-coupling prediction of `q0`: `-v0 F(0)` (type I), `v0² J/π` (type II),
/// `-v0` (contact, exact). The flag is `true` when the value is exact.
pub fn asymptotic_q0(shape: &Shape, v0: f64) -> Result<(f64, bool)> {
    match shape.kind {
        ShapeKind::Contact => Ok((-v0, true)),
        ShapeKind::TypeI => Ok((-v0 * shape.f0()?, false)),
        ShapeKind::TypeII => Ok((v0 * v0 * shape.moment_j()? / PI, false)),
    }
}

/// Normalized contact wave function `2 q0^{3/2} / (p² + q0²)` on the grid nodes.
pub fn contact_wavefunction(q0: f64, grid: &MomentumGrid) -> Vec<f64> {
    let n = 2.0 * q0.powf(1.5);
    grid.nodes.iter().map(|p| n / (p * p + q0 * q0)).collect()
}

/// `|∫ dp/(2π) φ_contact(p)* φ(p)|` for a normalized `φ` on its grid.
pub fn lorentzian_overlap(result: &TwoBodyResult) -> f64 {
    let c = contact_wavefunction(result.q0, &result.grid);
    let s = result
        .grid
        .weights
        .iter()
        .zip(&c)
        .zip(&result.wavefunction)
        .fold(C64::new(0.0, 0.0), |acc, ((w, c), f)| acc + f * (w * c / (2.0 * PI)));
    s.norm()
}

/// Bound state of `v0 f(ξ)` with default options.
pub fn solve_bound_state(shape: &Shape, v0: f64) -> Result<TwoBodyResult> {
    solve_bound_state_with(shape, v0, &TwoBodyOptions::default())
}

pub fn solve_bound_state_with(shape: &Shape, v0: f64, opts: &TwoBodyOptions) -> Result<TwoBodyResult> {
    if !(v0.is_finite()) || v0 == 0.0 {
        return Err(Error::NoBoundState(format!("coupling v0 = {v0}")));
    }
    let (q_asym, exact) = asymptotic_q0(shape, v0)?;
    if shape.kind == ShapeKind::Contact {
        if v0 > 0.0 {
            return Err(Error::NoBoundState("repulsive contact interaction".into()));
        }
        if let Some(n) = opts.contact_grid {
            let grid = MomentumGrid::tangent(n, q_asym);
            let q = solve_on_grid(shape, v0, q_asym, &grid, opts)?;
            let phi = wavefunction::<f64>(shape, v0, q, &grid)?;
            return Ok(finish(shape, v0, q, q_asym, grid, phi, |p| shape.transform(p)));
        }
        let grid = build_grid(64, q_asym);
        let phi: Vec<C64> = contact_wavefunction(q_asym, &grid).into_iter().map(|x| C64::new(x, 0.0)).collect();
        return Ok(finish(shape, v0, q_asym, q_asym, grid, phi, |p| shape.transform(p)));
    }
    debug_assert!(!exact);
    let q_est = if q_asym > 0.0 { q_asym } else { v0.abs() * shape.f0()?.abs().max(1e-3) };
    let outer = 1.0 / shape.length_scale();
    let mut grid = MomentumGrid::composite(q_est, outer, opts.grid);
    let q1 = solve_on_grid(shape, v0, q_est, &grid, opts)?;
    let mut q = q1;
    if (q1 / q_est - 1.0).abs() > 0.25 {
        grid = MomentumGrid::composite(q1, outer, opts.grid);
        q = solve_on_grid(shape, v0, q1, &grid, opts)?;
    }
    let phi = if shape.has_real_transform() {
        wavefunction::<f64>(shape, v0, q, &grid)?
    } else {
        wavefunction::<C64>(shape, v0, q, &grid)?
    };
    Ok(finish(shape, v0, q, q_asym, grid, phi, |p| shape.transform(p)))
}

fn finish<F: Fn(f64) -> Result<C64>>(
    shape: &Shape,
    v0: f64,
    q0: f64,
    q_asym: f64,
    grid: MomentumGrid,
    phi: Vec<C64>,
    transform: F,
) -> TwoBodyResult {
    let e0 = -0.5 * q0 * q0;
    let n = grid.len();
    let norm: f64 = (0..n).map(|i| grid.weights[i] * phi[i].norm_sqr()).sum::<f64>() / (2.0 * PI);
    let even: f64 =
        (0..n).map(|i| grid.weights[i] * (0.5 * (phi[i] + phi[n - 1 - i])).norm_sqr()).sum::<f64>() / (2.0 * PI);
    let scale = phi.iter().map(|x| x.norm()).fold(0.0, f64::max);
    let equation_residual = if shape.kind == ShapeKind::Contact {
        0.0
    } else {
        (0..n)
            .map(|i| {
                let s: C64 = phi
                    .iter()
                    .zip(grid.nodes.iter().zip(&grid.weights))
                    .map(|(f, (pj, wj))| {
                        transform(grid.nodes[i] - pj).unwrap_or(C64::new(f64::NAN, 0.0)) * f * (wj / (2.0 * PI))
                    })
                    .sum();
                (phi[i] - s * (v0 / (e0 - 0.5 * grid.nodes[i] * grid.nodes[i]))).norm()
            })
            // NaN (failed transform) must not be dropped by the max
            .fold(0.0, |a: f64, b| if a.is_nan() || b.is_nan() { f64::NAN } else { a.max(b) })
            / scale
    };
    let mut r = TwoBodyResult {
        shape: shape.name.clone(),
        kind: shape.kind,
        v0,
        q0,
        e0,
        grid,
        wavefunction: phi,
        norm_residual: (norm - 1.0).abs(),
        equation_residual,
        symmetric_fraction: even / norm,
        q0_asymptotic: q_asym,
        overlap: 0.0,
    };
    r.overlap = lorentzian_overlap(&r);
    r
}

fn hermitian_kernel<T: KernelScalar>(v0: f64, q: f64, grid: &MomentumGrid, f: &[C64]) -> DMatrix<T> {
    let n = grid.len();
    let e = -0.5 * q * q;
    let d: Vec<f64> = (0..n)
        .map(|i| (grid.weights[i] / (2.0 * PI)).sqrt() / (0.5 * grid.nodes[i] * grid.nodes[i] - e).sqrt())
        .collect();
    DMatrix::from_fn(n, n, |i, j| T::from_c64(f[i * n + j] * (-v0 * d[i] * d[j])))
}

fn transform_table(shape: &Shape, grid: &MomentumGrid) -> Result<Vec<C64>> {
    let n = grid.len();
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(shape.transform(grid.nodes[i] - grid.nodes[j])?);
        }
    }
    Ok(out)
}

fn lambda_max<T: KernelScalar>(v0: f64, q: f64, grid: &MomentumGrid, f: &[C64]) -> f64 {
    let h = hermitian_kernel::<T>(v0, q, grid, f);
    h.symmetric_eigenvalues().iter().cloned().fold(f64::NEG_INFINITY, f64::max)
}

fn solve_on_grid(shape: &Shape, v0: f64, q_est: f64, grid: &MomentumGrid, opts: &TwoBodyOptions) -> Result<f64> {
    let table = transform_table(shape, grid)?;
    let real = shape.has_real_transform();
    let g = |lnq: f64| -> Result<f64> {
        let q = lnq.exp();
        let l = if real { lambda_max::<f64>(v0, q, grid, &table) } else { lambda_max::<C64>(v0, q, grid, &table) };
        Ok(l - 1.0)
    };
    let mut lo = (q_est / 4.0).ln();
    let mut hi = (q_est * 4.0).ln();
    let mut g_lo = g(lo)?;
    let mut g_hi = g(hi)?;
    let mut expansions = 0;
    while !(g_lo > 0.0 && g_hi < 0.0) {
        if expansions == 8 {
            return Err(Error::NoBoundState(format!(
                "λ_max - 1 keeps one sign for q0 in [{:.3e}, {:.3e}] (v0 = {v0}, shape `{}`)",
                lo.exp(),
                hi.exp(),
                shape.name
            )));
        }
        if g_lo <= 0.0 {
            lo -= 4f64.ln();
            g_lo = g(lo)?;
        }
        if g_hi >= 0.0 {
            hi += 4f64.ln();
            g_hi = g(hi)?;
        }
        expansions += 1;
    }
    Ok(bracket_root_fallible(g, lo, hi, opts.root_tol)?.exp())
}

fn wavefunction<T: KernelScalar>(shape: &Shape, v0: f64, q: f64, grid: &MomentumGrid) -> Result<Vec<C64>> {
    let table = transform_table(shape, grid)?;
    let h = hermitian_kernel::<T>(v0, q, grid, &table);
    let eig = SymmetricEigen::new(h);
    let k = (0..eig.eigenvalues.len())
        .max_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap())
        .unwrap();
    let psi = eig.eigenvectors.column(k);
    let e = -0.5 * q * q;
    let mut phi: Vec<C64> = (0..grid.len())
        .map(|i| {
            let s = (grid.weights[i] / (2.0 * PI)).sqrt() * (0.5 * grid.nodes[i] * grid.nodes[i] - e).sqrt();
            psi[i].to_c64() / s
        })
        .collect();
    let norm: f64 = (0..grid.len()).map(|i| grid.weights[i] * phi[i].norm_sqr()).sum::<f64>() / (2.0 * PI);
    let imax = (0..phi.len()).max_by(|&a, &b| phi[a].norm().partial_cmp(&phi[b].norm()).unwrap()).unwrap();
    let phase = phi[imax].conj() / phi[imax].norm();
    for x in phi.iter_mut() {
        *x *= phase / norm.sqrt();
    }
    Ok(phi)
}

/// Sup over a lattice in the box `|P|, |P''| ≤ 4` of the deviation of the once-iterated
/// type-II kernel from its contact limit,
/// `| J⁻¹ ∫ dp' F(q0 P - p') F(p' - q0 P'') / (q0² + p'²) - 1 |`,
/// with the coupling tied to `q0` by the type-II law.
pub fn iterated_kernel_residual(shape: &Shape, q0: f64) -> Result<f64> {
    if shape.kind != ShapeKind::TypeII {
        return Err(Error::Domain("the iterated-kernel residual is defined for type-II shapes".into()));
    }
    let j = shape.moment_j()?;
    let grid = MomentumGrid::composite(
        q0,
        1.0 / shape.length_scale(),
        CompositeSpec { ratio: 2.0, ..CompositeSpec::default() },
    );
    let lattice: Vec<f64> = (0..9).map(|i| -4.0 + i as f64).collect();
    let mut worst: f64 = 0.0;
    for &p in &lattice {
        for &pp in &lattice {
            let mut s = C64::new(0.0, 0.0);
            for (&k, &w) in grid.nodes.iter().zip(&grid.weights) {
                s += shape.transform(q0 * p - k)? * shape.transform(k - q0 * pp)? * (w / (q0 * q0 + k * k));
            }
            worst = worst.max((s / j - 1.0).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeMap;

    fn shape(name: &str) -> Shape {
        Shape::by_name(name, &BTreeMap::new()).unwrap()
    }

    #[test]
    fn gaussian_reference_values() {
        // independent finite-difference and high-resolution Nyström references
        let s = shape("gaussian");
        for (v0, q_ref) in [(-0.02, 0.0344973), (-0.08, 0.1285096), (-0.5, 0.594972)] {
            let r = solve_bound_state(&s, v0).unwrap();
            assert!((r.q0 / q_ref - 1.0).abs() < 2e-6, "v0={v0} q0={}", r.q0);
            assert!(r.norm_residual < 1e-12);
            assert!(r.equation_residual < 1e-9, "{}", r.equation_residual);
            assert!((r.symmetric_fraction - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn mexican_hat_reference_values() {
        let s = shape("mexican-hat");
        for (v0, q_ref) in [(0.08, 3.66749e-3), (0.02, 2.45218e-4), (-0.01, 6.33483e-5)] {
            let r = solve_bound_state(&s, v0).unwrap();
            assert!((r.q0 / q_ref - 1.0).abs() < 2e-5, "v0={v0} q0={}", r.q0);
        }
    }

    #[test]
    fn contact_exact() {
        let r = solve_bound_state(&shape("contact"), -0.3).unwrap();
        assert_eq!(r.q0, 0.3);
        assert!((r.overlap - 1.0).abs() < 1e-12);
        assert!(matches!(solve_bound_state(&shape("contact"), 0.3), Err(Error::NoBoundState(_))));
    }

    #[test]
    fn contact_numerical_path() {
        let opts = TwoBodyOptions { contact_grid: Some(200), ..TwoBodyOptions::default() };
        let r = solve_bound_state_with(&shape("contact"), -0.7, &opts).unwrap();
        assert!((r.q0 / 0.7 - 1.0).abs() < 1e-10, "{}", r.q0);
        assert!(r.norm_residual < 1e-10 && (r.overlap - 1.0).abs() < 1e-10);
    }

    #[test]
    fn repulsive_gaussian_unbound() {
        assert!(matches!(solve_bound_state(&shape("gaussian"), 0.05), Err(Error::NoBoundState(_))));
    }

    #[test]
    fn iterated_residual_decreases() {
        let s = shape("mexican-hat");
        let a = iterated_kernel_residual(&s, 0.1).unwrap();
        let b = iterated_kernel_residual(&s, 0.05).unwrap();
        assert!(b < a / 3.0, "{a} {b}");
    }
}
