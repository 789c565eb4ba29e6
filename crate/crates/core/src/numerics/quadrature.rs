use crate::error::{Error, Result};

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

const MAX_INTERVALS: usize = 4000;

// 15-point Kronrod extension of the 7-point Gauss rule.
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gk15<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut kron = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = h * XGK[j];
        let s = f(c - dx) + f(c + dx);
        kron += WGK[j] * s;
        if j % 2 == 1 {
            gauss += WG[j / 2] * s;
        }
    }
    (kron * h, ((kron - gauss) * h).abs())
}

/// Adaptive Gauss-Kronrod integral of `f` over `[a, b]`.
///
/// Converged when the summed error estimate is below `max(abs_tol, rel_tol |I|)`.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, rel_tol: f64, abs_tol: f64) -> Result<Quadrature> {
    integrate_breaks(f, &[a, b], rel_tol, abs_tol)
}

/// As [`integrate`] but starting from the subintervals delimited by `breaks`
/// (ascending), which should include any kinks of the integrand.
pub fn integrate_breaks<F: FnMut(f64) -> f64>(
    mut f: F,
    breaks: &[f64],
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    assert!(breaks.len() >= 2);
    let mut intervals: Vec<(f64, f64, f64, f64)> = Vec::new();
    for w in breaks.windows(2) {
        if w[1] > w[0] {
            let (v, e) = gk15(&mut f, w[0], w[1]);
            intervals.push((w[0], w[1], v, e));
        }
    }
    let mut evaluations = 15 * intervals.len();
    loop {
        let value: f64 = intervals.iter().map(|t| t.2).sum();
        let error: f64 = intervals.iter().map(|t| t.3).sum();
        if error <= abs_tol.max(rel_tol * value.abs()) {
            return Ok(Quadrature { value, error, evaluations });
        }
        if intervals.len() >= MAX_INTERVALS {
            return Err(Error::Quadrature { estimate: error, intervals: intervals.len() });
        }
        let (worst, _) =
            intervals.iter().enumerate().fold((0, -1.0), |acc, (i, t)| if t.3 > acc.1 { (i, t.3) } else { acc });
        let (a, b, _, _) = intervals[worst];
        let m = 0.5 * (a + b);
        if !(m > a && m < b) {
            return Err(Error::Quadrature { estimate: error, intervals: intervals.len() });
        }
        let (v1, e1) = gk15(&mut f, a, m);
        let (v2, e2) = gk15(&mut f, m, b);
        evaluations += 30;
        intervals[worst] = (a, m, v1, e1);
        intervals.push((m, b, v2, e2));
    }
}

/// Integral over `[a, ∞)` through the map `x = a + scale t / (1 - t)`.
pub fn integrate_half_line<F: FnMut(f64) -> f64>(
    mut f: F,
    a: f64,
    scale: f64,
    rel_tol: f64,
    abs_tol: f64,
) -> Result<Quadrature> {
    let g = |t: f64| {
        let u = 1.0 - t;
        let x = a + scale * t / u;
        let jac = scale / (u * u);
        let v = f(x) * jac;
        if v.is_finite() {
            v
        } else {
            0.0
        }
    };
    integrate_breaks(g, &[0.0, 0.25, 0.5, 0.75, 0.9, 1.0], rel_tol, abs_tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gaussian_integral() {
        let q = integrate(|x| (-x * x).exp(), -10.0, 10.0, 1e-12, 0.0).unwrap();
        assert!((q.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn kink_with_breaks() {
        let q = integrate_breaks(|x: f64| (-x.abs()).exp(), &[-30.0, 0.0, 30.0], 1e-12, 0.0).unwrap();
        assert!((q.value - 2.0).abs() < 1e-11);
    }

    #[test]
    fn half_line_lorentzian() {
        let q = integrate_half_line(|x| 1.0 / (1.0 + x * x), 0.0, 1.0, 1e-12, 0.0).unwrap();
        assert!((q.value - std::f64::consts::FRAC_PI_2).abs() < 1e-11);
    }

    #[test]
    fn reports_failure() {
        let r = integrate(|x: f64| 1.0 / x.abs().sqrt().max(1e-300) * (1.0 / x).sin(), -1.0, 1.0, 1e-15, 0.0);
        assert!(matches!(r, Err(Error::Quadrature { .. })));
    }
}
