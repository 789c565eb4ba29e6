use nalgebra::ComplexField;
use num_complex::Complex64;

/// Scalar type of an assembled kernel: `f64` when every transform is real,
/// `Complex64` otherwise.
pub trait KernelScalar: ComplexField<RealField = f64> + Copy + Send + Sync + 'static {
    const IS_COMPLEX: bool;

    fn from_c64(c: Complex64) -> Self;
    fn to_c64(self) -> Complex64;

    /// Applies a map on `Self`-vectors to a complex vector (componentwise for real maps).
    fn apply_to_complex<F: Fn(&[Self], &mut [Self])>(f: F, x: &[Complex64], y: &mut [Complex64]);
}

impl KernelScalar for f64 {
    const IS_COMPLEX: bool = false;

    fn from_c64(c: Complex64) -> Self {
        c.re
    }

    fn to_c64(self) -> Complex64 {
        Complex64::new(self, 0.0)
    }

    fn apply_to_complex<F: Fn(&[Self], &mut [Self])>(f: F, x: &[Complex64], y: &mut [Complex64]) {
        let re: Vec<f64> = x.iter().map(|c| c.re).collect();
        let im: Vec<f64> = x.iter().map(|c| c.im).collect();
        let mut yr = vec![0.0; y.len()];
        let mut yi = vec![0.0; y.len()];
        f(&re, &mut yr);
        if im.iter().any(|&v| v != 0.0) {
            f(&im, &mut yi);
        }
        for (k, out) in y.iter_mut().enumerate() {
            *out = Complex64::new(yr[k], yi[k]);
        }
    }
}

impl KernelScalar for Complex64 {
    const IS_COMPLEX: bool = true;

    fn from_c64(c: Complex64) -> Self {
        c
    }

    fn to_c64(self) -> Complex64 {
        self
    }

    fn apply_to_complex<F: Fn(&[Self], &mut [Self])>(f: F, x: &[Complex64], y: &mut [Complex64]) {
        f(x, y)
    }
}
