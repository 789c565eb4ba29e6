//! Finite-range spectrum from the connected spectator form.
//!
//! With `s = K + P/2` the component `h(P,s)` satisfies
//! `h = D_s h + X h`, where
//! `(D_s h)(P) = (v0/q0) ∫ dP'/π F[q0(P-P')] G(P', s-P'/2) h(P', s)` is the two-body
//! kernel at subsystem energy `ε - α_p α_k s²` and
//! `(X h)(P,s) = ± (v0/q0) ∫ ds'/π F[q0(P-s-s')] G(s+s', (s'-s)/2) h(s+s', s')`
//! exchanges the heavy particles. Bound states are the roots of
//! `λ_n[(1 - D)⁻¹ X](ε) = 1`, and `Φ(P,K) = G(P,K) [h(P,K+P/2) ± h(P,P/2-K)]`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector, LU};
use num_complex::Complex64 as C64;
use rayon::prelude::*;

use super::contact::{solve_contact_spectrum_with, ContactOptions, EPS_TOP};
use super::{Interaction, MassConfig, Parity, TensorWavefunction, ThreeBodySpectrum};
use crate::error::{Error, Result};
use crate::numerics::{
    bracket_root_fallible, build_grid, leading_eigenpairs_with, CompositeSpec, EigenOptions, EigenResult, FnOperator,
    KernelScalar, MomentumGrid, Stencil,
};
use crate::potential::Shape;
use crate::twobody::solve_bound_state;

#[derive(Debug, Clone)]
pub struct FiniteRangeOptions {
    pub p_grid: CompositeSpec,
    pub s_grid: CompositeSpec,
    pub eigen_tol: f64,
    pub root_tol: f64,
    /// Tangent export grid for the wave functions.
    pub np: usize,
    pub nk: usize,
    pub export: bool,
    /// Repeat the solve on coarser panels to estimate the discretization error.
    pub discretization_estimate: bool,
}

impl Default for FiniteRangeOptions {
    fn default() -> Self {
        Self {
            p_grid: CompositeSpec { per_panel: 12, ratio: 4.0, tail: 16, reach: 8.0 },
            s_grid: CompositeSpec { per_panel: 8, ratio: 4.0, tail: 8, reach: 8.0 },
            eigen_tol: 1e-10,
            root_tol: 1e-11,
            np: 48,
            nk: 48,
            export: true,
            discretization_estimate: false,
        }
    }
}

struct Spectator<T: KernelScalar> {
    mass: MassConfig,
    parity: Parity,
    coupling: f64,
    p: MomentumGrid,
    s: MomentumGrid,
    /// `F[q0(P_i - P_j)]`, row-major.
    fpp: Vec<T>,
    /// `F[q0(P_i - s_k - s_m)]` at `[(k * ns + m) * np + i]`.
    fx: Vec<T>,
    /// P-stencil at `s_k + s_m`, indexed `k * ns + m`.
    stencils: Vec<Stencil>,
}

struct Prepared<T: KernelScalar> {
    lu: Vec<LU<T, nalgebra::Dyn, nalgebra::Dyn>>,
    gx: Vec<f64>,
}

impl<T: KernelScalar> Spectator<T> {
    fn new(
        shape: &Shape,
        v0: f64,
        q0: f64,
        mass: MassConfig,
        parity: Parity,
        opts: &FiniteRangeOptions,
    ) -> Result<Self> {
        let outer = 1.0 / (q0 * shape.length_scale());
        let p = MomentumGrid::composite(1.0, outer, opts.p_grid);
        let s = MomentumGrid::composite(1.0, outer, opts.s_grid);
        let (np, ns) = (p.len(), s.len());
        let tf = |x: f64| -> Result<T> { Ok(T::from_c64(shape.transform(q0 * x)?)) };
        let mut fpp = Vec::with_capacity(np * np);
        for i in 0..np {
            for j in 0..np {
                fpp.push(tf(p.nodes[i] - p.nodes[j])?);
            }
        }
        let fx: Vec<T> = (0..ns * ns)
            .into_par_iter()
            .map(|km| {
                let (k, m) = (km / ns, km % ns);
                let base = s.nodes[k] + s.nodes[m];
                p.nodes.iter().map(|&pi| tf(pi - base)).collect::<Result<Vec<T>>>()
            })
            .collect::<Result<Vec<Vec<T>>>>()?
            .into_iter()
            .flatten()
            .collect();
        let stencils = (0..ns * ns).map(|km| p.stencil(s.nodes[km / ns] + s.nodes[km % ns])).collect();
        Ok(Self { mass, parity, coupling: v0 / q0, p, s, fpp, fx, stencils })
    }

    fn dim(&self) -> usize {
        self.p.len() * self.s.len()
    }

    fn prepare(&self, eps: f64) -> Result<Prepared<T>> {
        let (np, ns) = (self.p.len(), self.s.len());
        let lu = (0..ns)
            .into_par_iter()
            .map(|k| {
                let sk = self.s.nodes[k];
                let mut m = DMatrix::<T>::from_fn(np, np, |i, j| {
                    let pj = self.p.nodes[j];
                    let c = self.coupling * self.p.weights[j] / PI * self.mass.green(eps, pj, sk - 0.5 * pj);
                    -self.fpp[i * np + j] * T::from_real(c)
                });
                for i in 0..np {
                    m[(i, i)] += T::one();
                }
                m.lu()
            })
            .collect();
        let sign = self.parity.sign();
        let mut gx = Vec::with_capacity(ns * ns);
        for k in 0..ns {
            for m in 0..ns {
                let (sk, sm) = (self.s.nodes[k], self.s.nodes[m]);
                gx.push(sign * self.coupling * self.s.weights[m] / PI * self.mass.green(eps, sk + sm, 0.5 * (sm - sk)));
            }
        }
        Ok(Prepared { lu, gx })
    }

    fn apply(&self, prep: &Prepared<T>, x: &[T], y: &mut [T]) {
        let (np, ns) = (self.p.len(), self.s.len());
        let blocks: Vec<DVector<T>> = (0..ns)
            .into_par_iter()
            .map(|k| {
                let mut r = DVector::<T>::zeros(np);
                for m in 0..ns {
                    let km = k * ns + m;
                    let ym = self.stencils[km].apply(&x[m * np..(m + 1) * np]) * T::from_real(prep.gx[km]);
                    let f = &self.fx[km * np..(km + 1) * np];
                    for i in 0..np {
                        r[i] += f[i] * ym;
                    }
                }
                prep.lu[k].solve_mut(&mut r);
                r
            })
            .collect();
        for (k, b) in blocks.into_iter().enumerate() {
            y[k * np..(k + 1) * np].copy_from_slice(b.as_slice());
        }
    }

    fn eigen(&self, eps: f64, k: usize, tol: f64) -> Result<EigenResult> {
        let prep = self.prepare(eps)?;
        let op = FnOperator {
            dim: self.dim(),
            f: |x: &[C64], y: &mut [C64]| T::apply_to_complex(|a, b| self.apply(&prep, a, b), x, y),
        };
        leading_eigenpairs_with(&op, k, &EigenOptions { tol, ..EigenOptions::default() })
    }

    /// `h(P, s)` by tensor interpolation of the grid values.
    fn h_at(&self, h: &[C64], p: f64, s: f64) -> C64 {
        let np = self.p.len();
        let sp = self.p.stencil(p);
        let ss = self.s.stencil(s);
        let mut acc = C64::new(0.0, 0.0);
        for (&b, &wb) in ss.indices.iter().zip(&ss.weights) {
            for (&a, &wa) in sp.indices.iter().zip(&sp.weights) {
                acc += h[b * np + a] * (wa * wb);
            }
        }
        acc
    }

    fn export(&self, h: &[C64], eps: f64, np: usize, nk: usize) -> TensorWavefunction {
        let pg = build_grid(np, 1.0);
        let kg = build_grid(nk, 1.0);
        let sign = self.parity.sign();
        let mut values = Vec::with_capacity(np * nk);
        for &pi in &pg.nodes {
            for &kk in &kg.nodes {
                let g = self.mass.green(eps, pi, kk);
                values.push((self.h_at(h, pi, kk + 0.5 * pi) + self.h_at(h, pi, 0.5 * pi - kk) * sign) * g);
            }
        }
        let mut wf = TensorWavefunction { p: pg, k: kg, values };
        wf.normalize();
        wf
    }
}

/// Finite-range spectrum with default options.
pub fn solve_finite_range_spectrum(
    shape: &Shape,
    v0: f64,
    alpha: f64,
    parity: Parity,
    n_states: usize,
) -> Result<ThreeBodySpectrum> {
    solve_finite_range_spectrum_with(shape, v0, alpha, parity, n_states, &FiniteRangeOptions::default())
}

pub fn solve_finite_range_spectrum_with(
    shape: &Shape,
    v0: f64,
    alpha: f64,
    parity: Parity,
    n_states: usize,
    opts: &FiniteRangeOptions,
) -> Result<ThreeBodySpectrum> {
    let mass = MassConfig::new(alpha)?;
    if n_states == 0 {
        return Err(Error::Domain("n_states must be at least 1".into()));
    }
    let two = solve_bound_state(shape, v0)?;
    let q0 = two.q0;
    // contact energies seed the brackets
    let guesses = solve_contact_spectrum_with(
        alpha,
        parity,
        n_states,
        &ContactOptions { export: false, discretization_estimate: false, ..ContactOptions::default() },
    )?
    .epsilons;
    let (eps, residuals, wfs, notes) = if shape.has_real_transform() {
        run::<f64>(shape, v0, q0, mass, parity, n_states, &guesses, opts)?
    } else {
        run::<C64>(shape, v0, q0, mass, parity, n_states, &guesses, opts)?
    };
    let discretization = if opts.discretization_estimate {
        let coarse = FiniteRangeOptions {
            p_grid: CompositeSpec { per_panel: opts.p_grid.per_panel * 3 / 4, ..opts.p_grid },
            s_grid: CompositeSpec { per_panel: opts.s_grid.per_panel * 3 / 4, ..opts.s_grid },
            export: false,
            discretization_estimate: false,
            ..opts.clone()
        };
        let (ec, ..) = if shape.has_real_transform() {
            run::<f64>(shape, v0, q0, mass, parity, n_states, &eps, &coarse)?
        } else {
            run::<C64>(shape, v0, q0, mass, parity, n_states, &eps, &coarse)?
        };
        eps.iter().enumerate().map(|(i, e)| ec.get(i).map_or(f64::NAN, |c| (e - c).abs())).collect()
    } else {
        vec![f64::NAN; eps.len()]
    };
    Ok(ThreeBodySpectrum {
        mass,
        parity,
        interaction: Interaction::FiniteRange { shape: shape.name.clone(), v0, q0 },
        method: "spectator".to_string(),
        epsilons: eps,
        residuals,
        discretization,
        wavefunctions: wfs,
        grid_np: opts.np,
        grid_nk: opts.nk,
        notes,
    })
}

type Run = (Vec<f64>, Vec<f64>, Vec<TensorWavefunction>, Vec<String>);

#[allow(clippy::too_many_arguments)]
fn run<T: KernelScalar>(
    shape: &Shape,
    v0: f64,
    q0: f64,
    mass: MassConfig,
    parity: Parity,
    n_states: usize,
    guesses: &[f64],
    opts: &FiniteRangeOptions,
) -> Result<Run> {
    let sp = Spectator::<T>::new(shape, v0, q0, mass, parity, opts)?;
    let k = (n_states + 1).min(sp.dim());
    let lambda = |e: f64, n: usize| -> Result<f64> {
        let r = sp.eigen(e, k, opts.eigen_tol)?;
        let mut re: Vec<f64> = r.values.iter().map(|v| v.re).collect();
        re.sort_by(|a, b| b.partial_cmp(a).unwrap());
        Ok(re.get(n).copied().unwrap_or(f64::NEG_INFINITY) - 1.0)
    };
    let mut eps = Vec::new();
    let mut notes = Vec::new();
    for n in 0..n_states {
        let guess = match guesses.get(n) {
            Some(&g) => g,
            None => {
                notes.push(format!("no contact state {n} in the {parity} sector to continue from"));
                break;
            }
        };
        match bracket_near(|e| lambda(e, n), guess, opts.root_tol)? {
            Some(e) => eps.push(e),
            None => {
                notes.push(format!("state {n} of the {parity} sector not bound at v0 = {v0}"));
                break;
            }
        }
    }
    let mut residuals = Vec::new();
    let mut wfs = Vec::new();
    for (n, &e) in eps.iter().enumerate() {
        let r = sp.eigen(e, k, opts.eigen_tol)?;
        residuals.push(r.residuals[n] + (r.values[n].re - 1.0).abs());
        if opts.export {
            wfs.push(sp.export(&r.vectors[n], e, opts.np, opts.nk));
        }
    }
    Ok((eps, residuals, wfs, notes))
}

/// Root of the increasing `g` near `guess`, searched below threshold; `None` when unbound.
fn bracket_near<G: FnMut(f64) -> Result<f64>>(mut g: G, guess: f64, tol: f64) -> Result<Option<f64>> {
    let mut width = 0.02 * guess.abs();
    let mut hi = (guess + width).min(EPS_TOP);
    let mut lo = guess - width;
    let mut g_hi = g(hi)?;
    if g_hi < 0.0 {
        // shallower than the guess: walk up toward threshold
        while g_hi < 0.0 {
            if hi >= EPS_TOP {
                return Ok(None);
            }
            lo = hi;
            width *= 4.0;
            hi = (hi + width).min(EPS_TOP);
            g_hi = g(hi)?;
        }
    } else {
        let mut g_lo = g(lo)?;
        while g_lo > 0.0 {
            hi = lo;
            width *= 4.0;
            lo -= width;
            g_lo = g(lo)?;
            if lo < -1e4 {
                return Err(Error::Domain("no root found below the contact guess".into()));
            }
        }
    }
    Ok(Some(bracket_root_fallible(g, lo, hi, tol)?))
}
