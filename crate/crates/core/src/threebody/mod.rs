//! Heavy-heavy-light three-body spectrum.
//!
//! Momenta are scaled by the two-body `q0` (`P = p/q0`, `K = k/q0`) and energies are
//! `ε = E/|E0⁽²⁾|`, so the atom-dimer threshold sits at `ε = -1`. With mass ratio
//! `α = M/m` the kinetic coefficients are `α_p = (1+2α)/(2(1+α))` and `α_k = 2/(1+α)`
//! (`α_p + α_k/4 = 1`) and the free propagator is `G(P,K) = 1/(ε - α_p P² - α_k K²)`.
//!
//! Wave functions `Φ(P,K)` are normalized to `∫∫ dP dK |Φ|²/(4π²) = 1`; parity refers
//! to `K → -K` (heavy-particle exchange).

mod contact;
mod diagnostics;
mod finite;
mod prediction;

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numerics::MomentumGrid;

pub use contact::{
    solve_contact_spectrum, solve_contact_spectrum_with, tensor_contact_operator, ContactMethod, ContactOptions,
    ContactSolution,
};
pub use diagnostics::{iteration_diagnostics, IterationDiagnostics};
pub use finite::{solve_finite_range_spectrum, solve_finite_range_spectrum_with, FiniteRangeOptions};
pub use prediction::{universal_prediction, Prediction};

/// Heavy/light mass ratio and the derived kinetic coefficients.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct MassConfig {
    pub alpha: f64,
    pub alpha_p: f64,
    pub alpha_k: f64,
}

impl MassConfig {
    pub fn new(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0) || !alpha.is_finite() {
            return Err(Error::Domain(format!("mass ratio must be positive and finite, got {alpha}")));
        }
        Ok(Self { alpha, alpha_p: (1.0 + 2.0 * alpha) / (2.0 * (1.0 + alpha)), alpha_k: 2.0 / (1.0 + alpha) })
    }

    /// `G(P,K)` at scaled energy `ε`.
    pub fn green(&self, eps: f64, p: f64, k: f64) -> f64 {
        1.0 / (eps - self.alpha_p * p * p - self.alpha_k * k * k)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Parity {
    #[serde(rename = "even")]
    Even,
    #[serde(rename = "odd")]
    Odd,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Even => 1.0,
            Parity::Odd => -1.0,
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "even" | "+" => Ok(Parity::Even),
            "odd" | "-" => Ok(Parity::Odd),
            other => Err(Error::Config(format!("parity must be `even` or `odd`, got `{other}`"))),
        }
    }
}

impl fmt::Display for Parity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        })
    }
}

/// `G(P_i, K_k)` on a tensor grid, rows indexed by `P`.
pub fn assemble_green(mass: &MassConfig, eps: f64, p: &MomentumGrid, k: &MomentumGrid) -> DMatrix<f64> {
    DMatrix::from_fn(p.len(), k.len(), |i, j| mass.green(eps, p.nodes[i], k.nodes[j]))
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
#[serde(tag = "type", rename_all = "kebab-case")]
pub enum Interaction {
    Contact,
    FiniteRange { shape: String, v0: f64, q0: f64 },
}

/// `Φ(P_i, K_k)` on a tensor grid, stored row-major (`values[i * nk + k]`).
#[derive(Debug, Clone)]
pub struct TensorWavefunction {
    pub p: MomentumGrid,
    pub k: MomentumGrid,
    pub values: Vec<C64>,
}

impl TensorWavefunction {
    pub fn at(&self, i: usize, k: usize) -> C64 {
        self.values[i * self.k.len() + k]
    }

    /// `∫∫ dP dK |Φ|²/(4π²)` by the grid weights.
    pub fn norm_sqr(&self) -> f64 {
        let nk = self.k.len();
        let mut s = 0.0;
        for i in 0..self.p.len() {
            for k in 0..nk {
                s += self.p.weights[i] * self.k.weights[k] * self.values[i * nk + k].norm_sqr();
            }
        }
        s / (4.0 * std::f64::consts::PI * std::f64::consts::PI)
    }

    fn normalize(&mut self) {
        let n = self.norm_sqr().sqrt();
        if n > 0.0 {
            let imax = (0..self.values.len())
                .max_by(|&a, &b| self.values[a].norm().partial_cmp(&self.values[b].norm()).unwrap())
                .unwrap();
            let phase = self.values[imax].conj() / self.values[imax].norm();
            for v in self.values.iter_mut() {
                *v *= phase / n;
            }
        }
    }
}

/// Bound states in one parity sector, ordered from the deepest.
#[derive(Debug, Clone)]
pub struct ThreeBodySpectrum {
    pub mass: MassConfig,
    pub parity: Parity,
    pub interaction: Interaction,
    pub method: String,
    /// `ε_n` below the `-1` threshold.
    pub epsilons: Vec<f64>,
    /// Eigen-equation residual of each state at its root.
    pub residuals: Vec<f64>,
    /// Estimated discretization error of each `ε_n` (coarse-grid comparison).
    pub discretization: Vec<f64>,
    pub wavefunctions: Vec<TensorWavefunction>,
    pub grid_np: usize,
    pub grid_nk: usize,
    /// Non-fatal conditions, e.g. fewer bound states than requested.
    pub notes: Vec<String>,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mass_coefficients() {
        for a in [0.1, 1.0, 5.0, 20.0, 1000.0] {
            let m = MassConfig::new(a).unwrap();
            assert!((m.alpha_p + m.alpha_k / 4.0 - 1.0).abs() < 1e-15);
        }
        let m = MassConfig::new(1.0).unwrap();
        assert_eq!((m.alpha_p, m.alpha_k), (0.75, 1.0));
        assert!(MassConfig::new(0.0).is_err());
    }
}
