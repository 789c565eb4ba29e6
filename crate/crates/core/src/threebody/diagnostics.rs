//! Quantities tracking the reduction of the type-II three-body equation to the
//! contact equation after one iteration.
//!
//! With `A±(P,K,P',P'') = F[q0(P-P')] F[q0(P'-P'')]/q0 · G(P', K ± (P-P')/2)`:
//!
//! * `I1 = Φ(P'', K-(P-P'')/2) ∫dP'/π A-`, `I4 = Φ(P'', K+(P-P'')/2) ∫dP'/π A+`
//!   survive as `q0 → 0`;
//! * `I2 = ∫dP'/π Φ(P'', K-(P+P'')/2+P') A-`, `I3 = ∫dP'/π Φ(P'', K+(P+P'')/2-P') A+`
//!   vanish.
//!
//! The trial state is the contact ground state at `ε0*`, and the coupling is tied to `q0`
//! by the type-II law (`v0²/q0 = π/J`).

use std::f64::consts::PI;

use num_complex::Complex64 as C64;

use super::contact::ContactSolution;
use super::{MassConfig, Parity};
use crate::error::{Error, Result};
use crate::numerics::{build_grid, CompositeSpec, MomentumGrid};
use crate::potential::{Shape, ShapeKind};

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct IterationDiagnostics {
    pub q0: f64,
    /// RMS of `|I1|..|I4|` over the `(P, K, P'')` lattice `{-2..2}³`. For an even
    /// profile `I2` and `I3` map onto each other under `K → -K` and their norms coincide.
    pub i_norms: [f64; 4],
    /// Max of `|A±|/q0` over the lattice and `|P'| ≤ 1`.
    pub a_pm_max: f64,
    /// Max of `|A±|/q0` at `P' = 0`.
    pub a_pm_origin: f64,
    /// Relative RMS difference, over the `(P, K)` lattice, between the iterated
    /// surviving terms `(π/J) G ∫dP''/π (I1+I4)` and the contact kernel action.
    pub residual_to_contact: f64,
}

pub fn iteration_diagnostics(shape: &Shape, q0: f64, alpha: f64, parity: Parity) -> Result<IterationDiagnostics> {
    if shape.kind != ShapeKind::TypeII {
        return Err(Error::Domain("iteration diagnostics are defined for type-II shapes".into()));
    }
    if !(q0 > 0.0) {
        return Err(Error::Domain(format!("q0 must be positive, got {q0}")));
    }
    let mass = MassConfig::new(alpha)?;
    let sol = ContactSolution::solve(mass, parity, 0)?;
    let eps = sol.epsilon;
    let j = shape.moment_j()?;
    let w = shape.length_scale();
    let pg = MomentumGrid::composite(1.0, 1.0 / (q0 * w), CompositeSpec { ratio: 2.0, ..CompositeSpec::default() });
    let f = |x: f64| -> Result<C64> { shape.transform(q0 * x) };
    let a = |p: f64, k: f64, pp: f64, ppp: f64, sign: f64| -> Result<C64> {
        Ok(f(p - pp)? * f(pp - ppp)? / q0 * mass.green(eps, pp, k + sign * 0.5 * (p - pp)))
    };
    let a_int = |p: f64, k: f64, ppp: f64, sign: f64| -> Result<C64> {
        let mut s = C64::new(0.0, 0.0);
        for (&x, &wx) in pg.nodes.iter().zip(&pg.weights) {
            s += a(p, k, x, ppp, sign)? * (wx / PI);
        }
        Ok(s)
    };
    let lattice = [-2.0, -1.0, 0.0, 1.0, 2.0];
    let phi = |p: f64, k: f64| sol.phi(p, k);

    let mut sums = [0.0f64; 4];
    let mut a_max: f64 = 0.0;
    let mut a_origin: f64 = 0.0;
    let mut count = 0.0;
    for &p in &lattice {
        for &k in &lattice {
            for &ppp in &lattice {
                let i1 = a_int(p, k, ppp, -1.0)? * phi(ppp, k - 0.5 * (p - ppp));
                let i4 = a_int(p, k, ppp, 1.0)? * phi(ppp, k + 0.5 * (p - ppp));
                let mut i2 = C64::new(0.0, 0.0);
                let mut i3 = C64::new(0.0, 0.0);
                for (&x, &wx) in pg.nodes.iter().zip(&pg.weights) {
                    i2 += a(p, k, x, ppp, -1.0)? * (phi(ppp, k - 0.5 * (p + ppp) + x) * wx / PI);
                    i3 += a(p, k, x, ppp, 1.0)? * (phi(ppp, k + 0.5 * (p + ppp) - x) * wx / PI);
                }
                for (s, v) in sums.iter_mut().zip([i1, i2, i3, i4]) {
                    *s += v.norm_sqr();
                }
                count += 1.0;
                for sign in [-1.0, 1.0] {
                    for x in [-1.0, -0.5, 0.0, 0.5, 1.0] {
                        let v = a(p, k, x, ppp, sign)?.norm() / q0;
                        a_max = a_max.max(v);
                        if x == 0.0 {
                            a_origin = a_origin.max(v);
                        }
                    }
                }
            }
        }
    }
    let i_norms = sums.map(|s| (s / count).sqrt());

    let outer = build_grid(64, 1.0);
    let mut diff = 0.0;
    let mut base = 0.0;
    for &p in &lattice {
        for &k in &lattice {
            let g = mass.green(eps, p, k);
            let mut iter = C64::new(0.0, 0.0);
            let mut contact = 0.0;
            for (&x, &wx) in outer.nodes.iter().zip(&outer.weights) {
                let (m, pl) = (phi(x, k - 0.5 * (p - x)), phi(x, k + 0.5 * (p - x)));
                iter += (a_int(p, k, x, -1.0)? * m + a_int(p, k, x, 1.0)? * pl) * (wx / PI);
                contact += (m + pl) * wx / PI;
            }
            let iter = iter * (PI / j * g);
            let contact = -g * contact;
            diff += (iter - contact).norm_sqr();
            base += contact * contact;
        }
    }
    Ok(IterationDiagnostics {
        q0,
        i_norms,
        a_pm_max: a_max,
        a_pm_origin: a_origin,
        residual_to_contact: (diff / base).sqrt(),
    })
}
