use super::contact::{solve_contact_spectrum_with, ContactOptions};
use super::Parity;
use crate::error::Result;
use crate::potential::Shape;
use crate::twobody::{asymptotic_q0, solve_bound_state};

/// Weak-coupling estimate `E_n ≈ ε_n* q0²/2` by the two routes for `q0`.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct Prediction {
    pub n: usize,
    pub eps_star: f64,
    pub q0_asymptotic: f64,
    pub q0_solved: f64,
    /// `ε_n* q0²/2` with `q0` from the asymptotic law.
    pub energy_asymptotic: f64,
    /// `ε_n* q0²/2` with `q0` from the two-body solve.
    pub energy_solved: f64,
    pub relative_difference: f64,
}

/// Three-body energies predicted from the contact spectrum, in two-body units.
pub fn universal_prediction(
    shape: &Shape,
    v0: f64,
    alpha: f64,
    parity: Parity,
    n_states: usize,
) -> Result<Vec<Prediction>> {
    let spec = solve_contact_spectrum_with(
        alpha,
        parity,
        n_states,
        &ContactOptions { export: false, discretization_estimate: false, ..ContactOptions::default() },
    )?;
    let (qa, _) = asymptotic_q0(shape, v0)?;
    let qs = solve_bound_state(shape, v0)?.q0;
    Ok(spec
        .epsilons
        .iter()
        .enumerate()
        .map(|(n, &e)| {
            let ea = 0.5 * e * qa * qa;
            let es = 0.5 * e * qs * qs;
            Prediction {
                n,
                eps_star: e,
                q0_asymptotic: qa,
                q0_solved: qs,
                energy_asymptotic: ea,
                energy_solved: es,
                relative_difference: ((ea - es) / es).abs(),
            }
        })
        .collect())
}
