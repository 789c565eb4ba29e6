use serde::Serialize;

use crate::error::{Error, Result};

/// Least-squares fit `y = c x^p` on log-log axes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PowerLaw {
    pub exponent: f64,
    pub prefactor: f64,
    /// Root-mean-square residual in `ln y`.
    pub rms: f64,
}

pub fn fit_power_law(x: &[f64], y: &[f64]) -> Result<PowerLaw> {
    if x.len() != y.len() || x.len() < 3 {
        return Err(Error::Domain("power-law fit needs at least three (x, y) pairs".into()));
    }
    if x.iter().chain(y).any(|v| !(*v > 0.0)) {
        return Err(Error::Domain("power-law fit needs positive data".into()));
    }
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        return Err(Error::Domain("power-law fit needs distinct x values".into()));
    }
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let p = sxy / sxx;
    let c = my - p * mx;
    let rms = (lx.iter().zip(&ly).map(|(a, b)| (b - c - p * a).powi(2)).sum::<f64>() / n).sqrt();
    Ok(PowerLaw { exponent: p, prefactor: c.exp(), rms })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exact_power_law() {
        let x = [0.08, 0.04, 0.02, 0.01];
        let y: Vec<f64> = x.iter().map(|v: &f64| 3.0 * v.powf(1.7)).collect();
        let f = fit_power_law(&x, &y).unwrap();
        assert!((f.exponent - 1.7).abs() < 1e-12 && (f.prefactor - 3.0).abs() < 1e-11);
        assert!(f.rms < 1e-12);
    }

    #[test]
    fn small_tables() {
        let f = fit_power_law(&[1.0, 2.0, 4.0], &[2.0, 8.0, 32.0]).unwrap();
        assert!((f.exponent - 2.0).abs() < 1e-14 && (f.prefactor - 2.0).abs() < 1e-13);
        let f = fit_power_law(&[1.0, 2.0, 4.0], &[1.0, 2.0, 4.0]).unwrap();
        assert!((f.exponent - 1.0).abs() < 1e-14);
    }

    #[test]
    fn rejects_bad_data() {
        assert!(fit_power_law(&[1.0, 2.0], &[1.0, 2.0]).is_err());
        assert!(fit_power_law(&[1.0, -2.0, 3.0], &[1.0, 2.0, 3.0]).is_err());
        assert!(fit_power_law(&[1.0, 2.0, 3.0], &[1.0, 0.0, 3.0]).is_err());
    }
}
