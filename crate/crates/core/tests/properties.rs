use std::collections::BTreeMap;

use proptest::prelude::*;

use fbu_core::harness::{fit_power_law, CouplingSection, RunConfig};
use fbu_core::numerics::{bracket_root, gauss_legendre, integrate_half_line, CompositeSpec, MomentumGrid};
use fbu_core::potential::Shape;
use fbu_core::threebody::MassConfig;
use fbu_core::twobody::solve_bound_state;

fn shape(name: &str) -> Shape {
    Shape::by_name(name, &BTreeMap::new()).unwrap()
}

fn symmetric(g: &MomentumGrid) -> bool {
    let n = g.len();
    (0..n).all(|i| (g.nodes[i] + g.nodes[n - 1 - i]).abs() <= 1e-12 * g.nodes[i].abs().max(1.0))
        && (0..n).all(|i| (g.weights[i] - g.weights[n - 1 - i]).abs() <= 1e-12 * g.weights[i])
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gauss_legendre_is_exact(n in 2usize..40, coeffs in prop::collection::vec(-1.0f64..1.0, 1..80)) {
        let deg = (2 * n - 1).min(coeffs.len() - 1);
        let (x, w) = gauss_legendre(n);
        let q: f64 = x.iter().zip(&w).map(|(x, w)| w * (0..=deg).map(|k| coeffs[k] * x.powi(k as i32)).sum::<f64>()).sum();
        let exact: f64 = (0..=deg).filter(|k| k % 2 == 0).map(|k| 2.0 * coeffs[k] / (k as f64 + 1.0)).sum();
        prop_assert!((q - exact).abs() < 1e-12);
    }

    #[test]
    fn tangent_grids_are_symmetric(order in 4usize..120, scale in 1e-3f64..10.0) {
        let g = MomentumGrid::tangent(order, scale);
        prop_assert!(symmetric(&g));
        prop_assert!(g.nodes.windows(2).all(|p| p[1] > p[0]));
        prop_assert!(g.weights.iter().all(|w| *w > 0.0));
    }

    #[test]
    fn composite_grids_integrate_lorentzians(inner in 1e-4f64..1.0, ratio in 1.0f64..1e4, per in 8usize..20) {
        let outer = inner * ratio;
        let g = MomentumGrid::composite(inner, outer, CompositeSpec { per_panel: per, ..CompositeSpec::default() });
        prop_assert!(symmetric(&g));
        prop_assert!(g.weights.iter().all(|w| *w > 0.0));
        // ∫ dp q/(p² + q²) = π at the inner scale
        let v = g.integrate(|p| inner / (p * p + inner * inner));
        prop_assert!((v - std::f64::consts::PI).abs() < 1e-6, "{}", v);
    }

    #[test]
    fn half_line_quadrature(a in 0.1f64..5.0) {
        let q = integrate_half_line(|x| (-a * x).exp(), 0.0, 1.0, 1e-12, 1e-14).unwrap();
        prop_assert!((q.value - 1.0 / a).abs() < 1e-10 / a);
    }

    #[test]
    fn root_independent_of_endpoint_order(r in -0.9f64..0.9, c in 0.1f64..3.0) {
        let f = |x: f64| (x - r) * (x * x + c);
        let a = bracket_root(f, -1.0, 1.0, 1e-14).unwrap();
        let b = bracket_root(f, 1.0, -1.0, 1e-14).unwrap();
        prop_assert_eq!(a, b);
        prop_assert!((a - r).abs() < 1e-12);
    }

    #[test]
    fn mass_coefficients(alpha in 1e-3f64..1e3) {
        let m = MassConfig::new(alpha).unwrap();
        prop_assert!((m.alpha_p + 0.25 * m.alpha_k - 1.0).abs() < 1e-14);
        prop_assert!(m.alpha_p >= 0.5 && m.alpha_p < 1.0);
        prop_assert!(m.alpha_k > 0.0 && m.alpha_k < 2.0);
        // the light-particle Green function is even in both momenta
        let g = m.green(-1.5, 0.3, -0.7);
        prop_assert_eq!(g, m.green(-1.5, -0.3, 0.7));
        prop_assert!(g < 0.0);
    }

    #[test]
    fn power_law_fit_recovers_parameters(c in 0.01f64..100.0, p in -3.0f64..3.0, x0 in 1e-3f64..1.0) {
        let x: Vec<f64> = (0..5).map(|k| x0 / 2f64.powi(k)).collect();
        let y: Vec<f64> = x.iter().map(|x| c * x.powf(p)).collect();
        let f = fit_power_law(&x, &y).unwrap();
        prop_assert!((f.exponent - p).abs() < 1e-9);
        prop_assert!((f.prefactor / c - 1.0).abs() < 1e-8);
    }

    #[test]
    fn halving_sequences_sorted(start in -1.0f64..1.0, halvings in 0usize..8) {
        prop_assume!(start.abs() > 1e-6);
        let v = CouplingSection { v0: None, start: Some(start), halvings: Some(halvings) }.values().unwrap();
        prop_assert_eq!(v.len(), halvings + 1);
        prop_assert!(v.windows(2).all(|w| w[0].abs() > w[1].abs()));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn contact_binding_is_exact(v0 in -3.0f64..-1e-3) {
        let r = solve_bound_state(&shape("contact"), v0).unwrap();
        prop_assert!((r.q0 / -v0 - 1.0).abs() < 1e-12);
        prop_assert!((r.e0 + 0.5 * v0 * v0).abs() < 1e-12 * v0 * v0);
    }

    #[test]
    fn two_body_states_are_normalized(v0 in -0.6f64..-0.01) {
        let r = solve_bound_state(&shape("gaussian"), v0).unwrap();
        prop_assert!(r.norm_residual < 1e-10);
        prop_assert!(r.equation_residual < 1e-8);
        prop_assert!((r.symmetric_fraction - 1.0).abs() < 1e-12);
        prop_assert!(r.overlap > 0.0 && r.overlap <= 1.0 + 1e-10);
        // binding is weaker than the leading-order law for an attractive Gaussian
        prop_assert!(r.q0 < r.q0_asymptotic);
    }

    #[test]
    fn reflection_leaves_energy_unchanged(v0 in 0.03f64..0.3, name in prop::sample::select(vec!["skew-mexican-hat", "shifted-mexican-hat"])) {
        let s = shape(name);
        let a = solve_bound_state(&s, v0).unwrap();
        let b = solve_bound_state(&s.mirrored().unwrap(), v0).unwrap();
        prop_assert!((a.e0 / b.e0 - 1.0).abs() < 1e-9, "{} vs {}", a.e0, b.e0);
    }

    #[test]
    fn translation_leaves_energy_unchanged(v0 in -0.5f64..-0.02) {
        let a = solve_bound_state(&shape("gaussian"), v0).unwrap();
        let b = solve_bound_state(&shape("shifted-gaussian"), v0).unwrap();
        prop_assert!((a.e0 / b.e0 - 1.0).abs() < 1e-9, "{} vs {}", a.e0, b.e0);
    }
}

#[test]
fn config_round_trips_through_toml() {
    let text = r#"
[run]
name = "rt"
mode = "sweep"

[shape]
name = "mexican-hat"
width = 1.5

[coupling]
start = 0.32
halvings = 4

[three_body]
alpha = [1.0, 5.0]
parity = ["even", "odd"]
states = 2
contact_method = "tensor-dense"

[grid]
np = 32
nk = 40

[tolerance]
root = 1e-10
"#;
    let a = RunConfig::from_toml(text).unwrap();
    let b = RunConfig::from_toml(&a.to_toml()).unwrap();
    assert_eq!(a, b);
}
