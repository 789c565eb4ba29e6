//! Contact-interaction spectrum `ε_n*`.
//!
//! The default method solves the one-dimensional spectator equation
//! `h(s) [1 - 1/sqrt(-ε + α_p α_k s²)] = ∓ ∫ ds'/π G(s+s', (s'-s)/2) h(s')`
//! (upper sign for even parity), with `Φ(P,K) = G(P,K) [h(K+P/2) ± h(P/2-K)]`.
//! The tensor methods discretize `Φ(P,K) = -G ∫ dP'/π [Φ(P', K-(P-P')/2) + Φ(P', K+(P-P')/2)]`
//! directly on a `(P,K)` grid with cubic interpolation in `K`; they converge only
//! like `1/N` and serve as a cross-check.

use std::f64::consts::PI;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::{Interaction, MassConfig, Parity, TensorWavefunction, ThreeBodySpectrum};
use crate::error::{Error, Result};
use crate::numerics::{
    bracket_root_fallible, build_grid, leading_eigenpairs_with, CompositeSpec, DenseOperator, EigenOptions, FnOperator,
    LinearOperator, MomentumGrid, Stencil,
};

/// Energy just below the atom-dimer threshold used to count bound states.
pub(crate) const EPS_TOP: f64 = -1.0 - 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ContactMethod {
    /// Spectator equation on a composite grid (spectrally accurate).
    Reduced,
    /// Tensor kernel assembled as an explicit matrix.
    TensorDense,
    /// Tensor kernel applied on the fly.
    TensorMatrixFree,
}

impl ContactMethod {
    pub fn name(self) -> &'static str {
        match self {
            ContactMethod::Reduced => "reduced",
            ContactMethod::TensorDense => "tensor-dense",
            ContactMethod::TensorMatrixFree => "tensor-matrix-free",
        }
    }
}

#[derive(Debug, Clone)]
pub struct ContactOptions {
    pub method: ContactMethod,
    /// Spectator grid of the reduced method.
    pub s_grid: CompositeSpec,
    pub s_inner: f64,
    /// Tensor grid sizes; also the export grid of the wave functions.
    pub np: usize,
    pub nk: usize,
    pub export: bool,
    pub discretization_estimate: bool,
    pub eigen_tol: f64,
    pub root_tol: f64,
}

impl Default for ContactOptions {
    fn default() -> Self {
        Self {
            method: ContactMethod::Reduced,
            s_grid: CompositeSpec { per_panel: 20, ratio: 4.0, tail: 64, reach: 8.0 },
            s_inner: 1e-2,
            np: 48,
            nk: 48,
            export: true,
            discretization_estimate: true,
            eigen_tol: 1e-12,
            root_tol: 1e-13,
        }
    }
}

/// Solution of the spectator equation for one state, evaluable anywhere.
#[derive(Debug, Clone)]
pub struct ContactSolution {
    pub mass: MassConfig,
    pub parity: Parity,
    pub epsilon: f64,
    pub grid: MomentumGrid,
    /// `h(s_j)` on the spectator grid.
    pub h: Vec<f64>,
    pub residual: f64,
}

impl ContactSolution {
    /// State `n` (0 = deepest) of the given sector with default options.
    pub fn solve(mass: MassConfig, parity: Parity, n: usize) -> Result<Self> {
        let opts = ContactOptions::default();
        let grid = MomentumGrid::composite(opts.s_inner, 1.0, opts.s_grid);
        let red = Reduced { mass, parity, grid };
        let eps = red.roots(n + 1, opts.root_tol)?;
        let e = *eps
            .get(n)
            .ok_or_else(|| Error::NoBoundState(format!("state {n} does not exist in the {parity} sector")))?;
        red.state(e)
    }

    /// `h(s)` by Nyström interpolation.
    pub fn h_at(&self, s: f64) -> f64 {
        let m = &self.mass;
        let a = amplification(m, self.epsilon, s);
        let sum: f64 = self
            .grid
            .nodes
            .iter()
            .zip(&self.grid.weights)
            .zip(&self.h)
            .map(|((&sj, &wj), &hj)| wj / PI * m.green(self.epsilon, s + sj, 0.5 * (sj - s)) * hj)
            .sum();
        -self.parity.sign() * a * sum
    }

    /// `Φ(P,K) = G(P,K) [h(K+P/2) ± h(P/2-K)]`.
    pub fn phi(&self, p: f64, k: f64) -> f64 {
        self.mass.green(self.epsilon, p, k) * (self.h_at(k + 0.5 * p) + self.parity.sign() * self.h_at(0.5 * p - k))
    }

    /// Normalized `Φ` on a tensor grid.
    pub fn tensor(&self, p: MomentumGrid, k: MomentumGrid) -> TensorWavefunction {
        let mut values = Vec::with_capacity(p.len() * k.len());
        for &pi in &p.nodes {
            for &kk in &k.nodes {
                values.push(C64::new(self.phi(pi, kk), 0.0));
            }
        }
        let mut wf = TensorWavefunction { p, k, values };
        wf.normalize();
        wf
    }
}

/// `1 / (1 - 1/sqrt(-ε + α_p α_k s²))`
fn amplification(m: &MassConfig, eps: f64, s: f64) -> f64 {
    1.0 / (1.0 - 1.0 / (-eps + m.alpha_p * m.alpha_k * s * s).sqrt())
}

struct Reduced {
    mass: MassConfig,
    parity: Parity,
    grid: MomentumGrid,
}

impl Reduced {
    fn symmetric_kernel(&self, eps: f64) -> (DMatrix<f64>, Vec<f64>) {
        let g = &self.grid;
        let n = g.len();
        let d: Vec<f64> =
            (0..n).map(|i| (amplification(&self.mass, eps, g.nodes[i]) * g.weights[i] / PI).sqrt()).collect();
        let sign = -self.parity.sign();
        let m = DMatrix::from_fn(n, n, |i, j| {
            let (si, sj) = (g.nodes[i], g.nodes[j]);
            sign * d[i] * d[j] * self.mass.green(eps, si + sj, 0.5 * (sj - si))
        });
        (m, d)
    }

    fn lambdas(&self, eps: f64) -> Vec<f64> {
        let (m, _) = self.symmetric_kernel(eps);
        let mut ev: Vec<f64> = m.symmetric_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| b.partial_cmp(a).unwrap());
        ev
    }

    fn roots(&self, n_states: usize, tol: f64) -> Result<Vec<f64>> {
        sector_roots(|e| Ok(self.lambdas(e)), n_states, tol)
    }

    fn state(&self, eps: f64) -> Result<ContactSolution> {
        let (m, d) = self.symmetric_kernel(eps);
        let eig = SymmetricEigen::new(m);
        let k = (0..eig.eigenvalues.len())
            .filter(|&i| eig.eigenvalues[i] <= 1.0 + 1e-6)
            .max_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap())
            .ok_or_else(|| Error::Domain("no kernel eigenvalue at the root".into()))?;
        let lam = eig.eigenvalues[k];
        let u = eig.eigenvectors.column(k);
        let h: Vec<f64> = (0..d.len()).map(|i| u[i] * d[i] / (self.grid.weights[i] / PI)).collect();
        Ok(ContactSolution {
            mass: self.mass,
            parity: self.parity,
            epsilon: eps,
            grid: self.grid.clone(),
            h,
            residual: (lam - 1.0).abs(),
        })
    }
}

/// Roots `λ_n(ε) = 1` of the `n_states` leading kernel eigenvalues below threshold.
///
/// `lambdas` returns real eigenvalues in descending order.
pub(crate) fn sector_roots<L: FnMut(f64) -> Result<Vec<f64>>>(
    mut lambdas: L,
    n_states: usize,
    tol: f64,
) -> Result<Vec<f64>> {
    let top = lambdas(EPS_TOP)?;
    let count = top.iter().take(n_states).filter(|&&l| l > 1.0).count();
    if count == 0 {
        return Ok(vec![]);
    }
    let mut lo = -4.0;
    let mut tries = 0;
    while lambdas(lo)?.first().copied().unwrap_or(0.0) >= 1.0 {
        lo *= 2.0;
        tries += 1;
        if tries > 14 {
            return Err(Error::Domain("kernel eigenvalue stays above one at very deep energies".into()));
        }
    }
    let mut out = Vec::with_capacity(count);
    for n in 0..count {
        let r = bracket_root_fallible(
            |e| Ok(lambdas(e)?.get(n).copied().unwrap_or(f64::NEG_INFINITY) - 1.0),
            lo,
            EPS_TOP,
            tol,
        )?;
        out.push(r);
    }
    Ok(out)
}

/// Contact spectrum with default options.
pub fn solve_contact_spectrum(alpha: f64, parity: Parity, n_states: usize) -> Result<ThreeBodySpectrum> {
    solve_contact_spectrum_with(alpha, parity, n_states, &ContactOptions::default())
}

pub fn solve_contact_spectrum_with(
    alpha: f64,
    parity: Parity,
    n_states: usize,
    opts: &ContactOptions,
) -> Result<ThreeBodySpectrum> {
    let mass = MassConfig::new(alpha)?;
    if n_states == 0 {
        return Err(Error::Domain("n_states must be at least 1".into()));
    }
    let mut notes = Vec::new();
    let (epsilons, residuals, discretization, wavefunctions) = match opts.method {
        ContactMethod::Reduced => {
            let red = Reduced { mass, parity, grid: MomentumGrid::composite(opts.s_inner, 1.0, opts.s_grid) };
            let eps = red.roots(n_states, opts.root_tol)?;
            let disc = if opts.discretization_estimate {
                let coarse = CompositeSpec {
                    per_panel: opts.s_grid.per_panel * 3 / 4,
                    tail: opts.s_grid.tail * 3 / 4,
                    ..opts.s_grid
                };
                let red_c = Reduced { mass, parity, grid: MomentumGrid::composite(opts.s_inner, 1.0, coarse) };
                let eps_c = red_c.roots(n_states, opts.root_tol)?;
                eps.iter().enumerate().map(|(i, e)| eps_c.get(i).map_or(f64::NAN, |c| (e - c).abs())).collect()
            } else {
                vec![f64::NAN; eps.len()]
            };
            let mut res = Vec::new();
            let mut wfs = Vec::new();
            for &e in &eps {
                let st = red.state(e)?;
                res.push(st.residual);
                if opts.export {
                    wfs.push(st.tensor(build_grid(opts.np, 1.0), build_grid(opts.nk, 1.0)));
                }
            }
            (eps, res, disc, wfs)
        }
        ContactMethod::TensorDense | ContactMethod::TensorMatrixFree => {
            let dense = opts.method == ContactMethod::TensorDense;
            let solve = |np: usize, nk: usize| -> Result<(Vec<f64>, Vec<f64>, Vec<TensorWavefunction>)> {
                let tk = TensorKernel::new(mass, parity, np, nk);
                let k = n_states + 1;
                let eig_opts = EigenOptions { tol: opts.eigen_tol, dense_limit: 0, ..EigenOptions::default() };
                let run = |e: f64| -> Result<crate::numerics::EigenResult> {
                    if dense {
                        let op = DenseOperator { matrix: tk.assemble(e) };
                        leading_eigenpairs_with(&op, k.min(np * nk), &eig_opts)
                    } else {
                        let op = tk.operator(e);
                        leading_eigenpairs_with(&op, k.min(np * nk), &eig_opts)
                    }
                };
                let eps = sector_roots(|e| Ok(run(e)?.values.iter().map(|v| v.re).collect()), n_states, opts.root_tol)?;
                let mut res = Vec::new();
                let mut wfs = Vec::new();
                for (n, &e) in eps.iter().enumerate() {
                    let r = run(e)?;
                    res.push(r.residuals[n] + (r.values[n].re - 1.0).abs());
                    let mut wf = TensorWavefunction { p: tk.p.clone(), k: tk.k.clone(), values: r.vectors[n].clone() };
                    wf.normalize();
                    wfs.push(wf);
                }
                Ok((eps, res, wfs))
            };
            let (eps, res, wfs) = solve(opts.np, opts.nk)?;
            let disc = if opts.discretization_estimate {
                let (ec, _, _) = solve(opts.np * 3 / 4, opts.nk * 3 / 4)?;
                eps.iter().enumerate().map(|(i, e)| ec.get(i).map_or(f64::NAN, |c| (e - c).abs())).collect()
            } else {
                vec![f64::NAN; eps.len()]
            };
            (eps, res, disc, if opts.export { wfs } else { vec![] })
        }
    };
    if epsilons.len() < n_states {
        notes.push(format!(
            "{} bound state(s) below threshold in the {parity} sector at alpha = {alpha}; {n_states} requested",
            epsilons.len()
        ));
    }
    Ok(ThreeBodySpectrum {
        mass,
        parity,
        interaction: Interaction::Contact,
        method: opts.method.name().to_string(),
        epsilons,
        residuals,
        discretization,
        wavefunctions,
        grid_np: opts.np,
        grid_nk: opts.nk,
        notes,
    })
}

/// Tensor-grid contact kernel.
struct TensorKernel {
    mass: MassConfig,
    parity: Parity,
    p: MomentumGrid,
    k: MomentumGrid,
    /// Stencils for `K_k ∓ (P_i - P_j)/2`, indexed `[(i * np + j) * nk + k]`.
    minus: Vec<Stencil>,
    plus: Vec<Stencil>,
}

impl TensorKernel {
    fn new(mass: MassConfig, parity: Parity, np: usize, nk: usize) -> Self {
        let p = build_grid(np, 1.0);
        let k = build_grid(nk, 1.0);
        let mut minus = Vec::with_capacity(np * np * nk);
        let mut plus = Vec::with_capacity(np * np * nk);
        for i in 0..np {
            for j in 0..np {
                let d = 0.5 * (p.nodes[i] - p.nodes[j]);
                for &kk in &k.nodes {
                    minus.push(k.stencil(kk - d));
                    plus.push(k.stencil(kk + d));
                }
            }
        }
        Self { mass, parity, p, k, minus, plus }
    }

    fn dim(&self) -> usize {
        self.p.len() * self.k.len()
    }

    fn project(&self, x: &mut [C64]) {
        let nk = self.k.len();
        let s = self.parity.sign();
        for i in 0..self.p.len() {
            for k in 0..nk / 2 + nk % 2 {
                let a = x[i * nk + k];
                let b = x[i * nk + nk - 1 - k];
                let even = 0.5 * (a + b * s);
                x[i * nk + k] = even;
                x[i * nk + nk - 1 - k] = even * s;
            }
        }
    }

    fn apply(&self, eps: f64, x: &[C64], y: &mut [C64]) {
        let (np, nk) = (self.p.len(), self.k.len());
        let mut xp = x.to_vec();
        self.project(&mut xp);
        for i in 0..np {
            for k in 0..nk {
                let mut acc = C64::new(0.0, 0.0);
                for j in 0..np {
                    let idx = (i * np + j) * nk + k;
                    let mut inner = C64::new(0.0, 0.0);
                    for st in [&self.minus[idx], &self.plus[idx]] {
                        for (&l, &w) in st.indices.iter().zip(&st.weights) {
                            inner += xp[j * nk + l] * w;
                        }
                    }
                    acc += inner * (self.p.weights[j] / PI);
                }
                y[i * nk + k] = -acc * self.mass.green(eps, self.p.nodes[i], self.k.nodes[k]);
            }
        }
        self.project(y);
    }

    fn operator(&self, eps: f64) -> impl LinearOperator + '_ {
        FnOperator { dim: self.dim(), f: move |x: &[C64], y: &mut [C64]| self.apply(eps, x, y) }
    }

    fn assemble(&self, eps: f64) -> DMatrix<C64> {
        let n = self.dim();
        let (np, nk) = (self.p.len(), self.k.len());
        let mut raw = DMatrix::<C64>::zeros(n, n);
        for i in 0..np {
            for k in 0..nk {
                let g = self.mass.green(eps, self.p.nodes[i], self.k.nodes[k]);
                for j in 0..np {
                    let idx = (i * np + j) * nk + k;
                    let c = -g * self.p.weights[j] / PI;
                    for st in [&self.minus[idx], &self.plus[idx]] {
                        for (&l, &w) in st.indices.iter().zip(&st.weights) {
                            raw[(i * nk + k, j * nk + l)] += C64::new(c * w, 0.0);
                        }
                    }
                }
            }
        }
        // fold in the parity projector on both sides
        let s = self.parity.sign();
        let mirror = |r: usize| (r / nk) * nk + nk - 1 - r % nk;
        let right = DMatrix::from_fn(n, n, |r, c| 0.5 * (raw[(r, c)] + raw[(r, mirror(c))] * s));
        DMatrix::from_fn(n, n, |r, c| 0.5 * (right[(r, c)] + right[(mirror(r), c)] * s))
    }
}

/// Matrix-free tensor operator at energy `eps` (exposed for benchmarks and cross-checks).
pub fn tensor_contact_operator(
    alpha: f64,
    parity: Parity,
    np: usize,
    nk: usize,
    eps: f64,
) -> Result<(DMatrix<C64>, Vec<Vec<C64>>)> {
    let tk = TensorKernel::new(MassConfig::new(alpha)?, parity, np, nk);
    let dense = tk.assemble(eps);
    let n = tk.dim();
    let op = tk.operator(eps);
    let mut cols = Vec::with_capacity(n);
    let mut e = vec![C64::new(0.0, 0.0); n];
    for j in 0..n {
        e[j] = C64::new(1.0, 0.0);
        let mut y = vec![C64::new(0.0, 0.0); n];
        op.apply(&e, &mut y);
        e[j] = C64::new(0.0, 0.0);
        cols.push(y);
    }
    Ok((dense, cols))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_mass_ground_state() {
        let s = solve_contact_spectrum(1.0, Parity::Even, 2).unwrap();
        assert_eq!(s.epsilons.len(), 1);
        assert!((s.epsilons[0] + 2.087719226380194).abs() < 1e-10, "{:?}", s.epsilons);
        assert!(!s.notes.is_empty());
        assert!(s.discretization[0] < 1e-8);
        assert!((s.wavefunctions[0].norm_sqr() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn equal_mass_odd_unbound() {
        let s = solve_contact_spectrum(1.0, Parity::Odd, 1).unwrap();
        assert!(s.epsilons.is_empty());
    }

    #[test]
    fn nystrom_matches_grid() {
        let sol = ContactSolution::solve(MassConfig::new(5.0).unwrap(), Parity::Even, 0).unwrap();
        for j in [3, 17, 40] {
            let s = sol.grid.nodes[j];
            assert!((sol.h_at(s) - sol.h[j]).abs() < 1e-9 * sol.h[j].abs().max(1e-3));
        }
    }
}
