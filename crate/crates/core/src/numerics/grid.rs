use std::f64::consts::PI;

use super::gauss::gauss_legendre;
use super::scalar::KernelScalar;

/// Quadrature grid on the real momentum line.
///
/// Nodes are strictly increasing and symmetric about zero, weights positive, so
/// `Σ w_i g(p_i) ≈ ∫ g(p) dp`.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentumGrid {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    /// Momentum scale of the map (tangent) or the innermost panel (composite).
    pub map_scale: f64,
    pub order: usize,
    pub layout: GridLayout,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GridLayout {
    /// `p = L tan(π t / 2)` with Gauss-Legendre `t`; interpolation is cubic in `t`
    /// with the function taken to vanish at `t = ±1`.
    Tangent { t: Vec<f64> },
    /// Geometric Gauss-Legendre panels plus `p = B/u` tails; interpolation is
    /// panel-local Lagrange (in `u` on the tails).
    Composite { panels: Vec<Panel> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Panel {
    pub start: usize,
    pub len: usize,
    pub lo: f64,
    pub hi: f64,
    /// `Some(B)` for a tail panel `|p| ≥ B` interpolated in `u = B/|p|`.
    pub tail: Option<f64>,
}

/// Panel layout for [`MomentumGrid::composite`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeSpec {
    pub per_panel: usize,
    pub ratio: f64,
    pub tail: usize,
    /// Panels extend to `reach × outer` before the tail starts.
    pub reach: f64,
}

impl Default for CompositeSpec {
    fn default() -> Self {
        Self { per_panel: 12, ratio: 4.0, tail: 16, reach: 8.0 }
    }
}

/// Interpolation weights: `f(x) ≈ Σ weights[j] f(nodes[indices[j]])`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Stencil {
    pub indices: Vec<usize>,
    pub weights: Vec<f64>,
}

impl Stencil {
    pub fn apply<T: KernelScalar>(&self, values: &[T]) -> T {
        let mut acc = T::zero();
        for (&i, &w) in self.indices.iter().zip(&self.weights) {
            acc += values[i] * T::from_real(w);
        }
        acc
    }
}

/// Tangent-mapped grid of `order` Gauss-Legendre nodes with scale `map_scale`.
pub fn build_grid(order: usize, map_scale: f64) -> MomentumGrid {
    MomentumGrid::tangent(order, map_scale)
}

impl MomentumGrid {
    pub fn tangent(order: usize, map_scale: f64) -> Self {
        assert!(order > 0 && map_scale > 0.0);
        let (t, wt) = gauss_legendre(order);
        let mut nodes = Vec::with_capacity(order);
        let mut weights = Vec::with_capacity(order);
        for (&ti, &wi) in t.iter().zip(&wt) {
            let a = 0.5 * PI * ti;
            let c = a.cos();
            nodes.push(map_scale * a.tan());
            weights.push(wi * map_scale * 0.5 * PI / (c * c));
        }
        symmetrize(&mut nodes, &mut weights);
        Self { nodes, weights, map_scale, order, layout: GridLayout::Tangent { t } }
    }

    /// Composite grid resolving structure on both the `inner` and `outer` momentum scales.
    pub fn composite(inner: f64, outer: f64, spec: CompositeSpec) -> Self {
        assert!(inner > 0.0 && outer > 0.0 && spec.ratio > 1.0 && spec.per_panel > 0 && spec.tail > 0);
        let mut breaks = vec![0.0, 0.5 * inner];
        let end = spec.reach * outer.max(inner);
        while *breaks.last().unwrap() < end {
            let next = breaks.last().unwrap() * spec.ratio;
            breaks.push(next);
        }
        let b_tail = *breaks.last().unwrap();
        let (x, w) = gauss_legendre(spec.per_panel);
        let (xt, wt) = gauss_legendre(spec.tail);

        // positive half, ascending
        let mut pos: Vec<(f64, f64)> = Vec::new();
        let mut pos_panels: Vec<(f64, f64, Option<f64>, usize)> = Vec::new();
        for win in breaks.windows(2) {
            let (a, b) = (win[0], win[1]);
            let h = 0.5 * (b - a);
            let c = 0.5 * (a + b);
            for (&xi, &wi) in x.iter().zip(&w) {
                pos.push((c + h * xi, h * wi));
            }
            pos_panels.push((a, b, None, spec.per_panel));
        }
        // tail p = B/u, u in (0,1): ascending p means descending u
        let mut tail: Vec<(f64, f64)> = xt
            .iter()
            .zip(&wt)
            .map(|(&xi, &wi)| {
                let u = 0.5 * (xi + 1.0);
                (b_tail / u, 0.5 * wi * b_tail / (u * u))
            })
            .collect();
        tail.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        pos.extend(tail);
        pos_panels.push((b_tail, f64::INFINITY, Some(b_tail), spec.tail));

        let half = pos.len();
        let mut nodes = Vec::with_capacity(2 * half);
        let mut weights = Vec::with_capacity(2 * half);
        for &(p, wgt) in pos.iter().rev() {
            nodes.push(-p);
            weights.push(wgt);
        }
        for &(p, wgt) in &pos {
            nodes.push(p);
            weights.push(wgt);
        }
        let mut panels = Vec::with_capacity(2 * pos_panels.len());
        let mut start = 0;
        for &(a, b, t, len) in pos_panels.iter().rev() {
            panels.push(Panel { start, len, lo: -b, hi: -a, tail: t });
            start += len;
        }
        for &(a, b, t, len) in &pos_panels {
            panels.push(Panel { start, len, lo: a, hi: b, tail: t });
            start += len;
        }
        debug_assert_eq!(start, nodes.len());
        let order = nodes.len();
        Self { nodes, weights, map_scale: inner, order, layout: GridLayout::Composite { panels } }
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// Weighted sum `Σ w_i g(p_i)`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut g: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&p, &w)| w * g(p)).sum()
    }

    /// Interpolation stencil for the value at momentum `x`.
    pub fn stencil(&self, x: f64) -> Stencil {
        match &self.layout {
            GridLayout::Tangent { t } => tangent_stencil(t, self.map_scale, x),
            GridLayout::Composite { panels } => self.panel_stencil(panels, x),
        }
    }

    /// Interpolated value at `x` of a function sampled on the nodes.
    pub fn interpolate<T: KernelScalar>(&self, values: &[T], x: f64) -> T {
        self.stencil(x).apply(values)
    }

    fn panel_stencil(&self, panels: &[Panel], x: f64) -> Stencil {
        let idx =
            panels.iter().position(|p| x >= p.lo && x <= p.hi).unwrap_or(if x < 0.0 { 0 } else { panels.len() - 1 });
        let panel = &panels[idx];
        let map = |p: f64| match panel.tail {
            Some(b) => b / p.abs(),
            None => p,
        };
        let xs: Vec<f64> = (panel.start..panel.start + panel.len).map(|i| map(self.nodes[i])).collect();
        let xv = if x.is_infinite() { 0.0 } else { map(x) };
        let weights = lagrange_weights(&xs, xv);
        Stencil { indices: (panel.start..panel.start + panel.len).collect(), weights }
    }
}

fn symmetrize(nodes: &mut [f64], weights: &mut [f64]) {
    let n = nodes.len();
    for i in 0..n / 2 {
        let j = n - 1 - i;
        let p = 0.5 * (nodes[j] - nodes[i]);
        let w = 0.5 * (weights[i] + weights[j]);
        nodes[i] = -p;
        nodes[j] = p;
        weights[i] = w;
        weights[j] = w;
    }
    if n % 2 == 1 {
        nodes[n / 2] = 0.0;
    }
}

fn lagrange_weights(xs: &[f64], x: f64) -> Vec<f64> {
    if let Some(k) = xs.iter().position(|&xi| xi == x) {
        let mut w = vec![0.0; xs.len()];
        w[k] = 1.0;
        return w;
    }
    // barycentric form
    let n = xs.len();
    let mut bw = vec![1.0; n];
    for j in 0..n {
        for k in 0..n {
            if k != j {
                bw[j] /= xs[j] - xs[k];
            }
        }
    }
    let terms: Vec<f64> = (0..n).map(|j| bw[j] / (x - xs[j])).collect();
    let s: f64 = terms.iter().sum();
    terms.into_iter().map(|t| t / s).collect()
}

fn tangent_stencil(t: &[f64], scale: f64, x: f64) -> Stencil {
    let n = t.len();
    let tx = if x.is_infinite() { x.signum() } else { 2.0 / PI * (x / scale).atan() };
    // Extended abscissae: -1, t_0 .. t_{n-1}, +1 with zero values at the ends.
    let ext = |k: usize| -> f64 {
        if k == 0 {
            -1.0
        } else if k == n + 1 {
            1.0
        } else {
            t[k - 1]
        }
    };
    // interval [ext(j), ext(j+1)] containing tx
    let mut lo = 0usize;
    let mut hi = n + 1;
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if ext(mid) <= tx {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let first = lo.saturating_sub(1).min(n + 1 - 3);
    let ks: Vec<usize> = (first..(first + 4).min(n + 2)).collect();
    let xs: Vec<f64> = ks.iter().map(|&k| ext(k)).collect();
    let w = lagrange_weights(&xs, tx);
    let mut st = Stencil::default();
    for (&k, &wk) in ks.iter().zip(&w) {
        if k >= 1 && k <= n {
            st.indices.push(k - 1);
            st.weights.push(wk);
        }
    }
    st
}

#[cfg(test)]
mod tests {
    use super::*;

    fn check_invariants(g: &MomentumGrid) {
        for i in 1..g.len() {
            assert!(g.nodes[i] > g.nodes[i - 1]);
        }
        let n = g.len();
        for i in 0..n {
            assert!((g.nodes[i] + g.nodes[n - 1 - i]).abs() <= 1e-14 * g.nodes[i].abs().max(1.0));
            assert!(g.weights[i] > 0.0);
        }
    }

    #[test]
    fn tangent_integrates_lorentzian_exactly() {
        let g = build_grid(40, 0.3);
        check_invariants(&g);
        let s = g.integrate(|p| 1.0 / (p * p + 0.09));
        assert!((s - PI / 0.3).abs() < 1e-12);
    }

    #[test]
    fn composite_two_scales() {
        let g = MomentumGrid::composite(1e-3, 1.0, CompositeSpec::default());
        check_invariants(&g);
        let s = g.integrate(|p| 1.0 / (p * p + 1e-6) * (-p * p).exp());
        // ∫ e^{-p²}/(p²+a²) = π e^{a²} erfc(a)/a with a = 1e-3
        let a: f64 = 1e-3;
        let erfc = 1.0 - 2.0 / PI.sqrt() * (a - a.powi(3) / 3.0 + a.powi(5) / 10.0);
        let exact = PI * (a * a).exp() * erfc / a;
        assert!((s - exact).abs() / exact < 1e-10, "{s} {exact}");
    }

    #[test]
    fn composite_interpolation() {
        let g = MomentumGrid::composite(0.01, 1.0, CompositeSpec { ratio: 2.0, ..CompositeSpec::default() });
        let f = |p: f64| 1.0 / (1.0 + (p / 0.01).powi(2)) + (-p * p).exp();
        let v: Vec<f64> = g.nodes.iter().map(|&p| f(p)).collect();
        for &x in &[-30.0, -1.3, -0.02, 0.0, 0.003, 0.7, 5.0, 200.0] {
            let e = (g.interpolate(&v, x) - f(x)).abs();
            assert!(e < 1e-9, "x={x} err={e}");
        }
    }

    #[test]
    fn tangent_interpolation_cubic() {
        let g = build_grid(200, 1.0);
        let f = |p: f64| 1.0 / (1.0 + p * p);
        let v: Vec<f64> = g.nodes.iter().map(|&p| f(p)).collect();
        for &x in &[-7.0, -0.4, 0.0, 0.9, 3.0, 1e4] {
            assert!((g.interpolate(&v, x) - f(x)).abs() < 1e-6);
        }
    }
}
