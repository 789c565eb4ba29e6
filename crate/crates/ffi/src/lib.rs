//! C interface to the `fbu` solvers.
//!
//! Every fallible call returns an [`FbuStatus`]; on failure the message is kept
//! per thread and read back with [`fbu_last_error`]. Handles are opaque and must
//! be released with their `_free` function. Panics never cross the boundary.

use std::cell::RefCell;
use std::collections::BTreeMap;
use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use fbu_core::harness::{self, RunConfig};
use fbu_core::potential::{Shape, ShapeKind};
use fbu_core::threebody::{solve_contact_spectrum, solve_finite_range_spectrum, Parity, ThreeBodySpectrum};
use fbu_core::twobody::{solve_bound_state, TwoBodyResult};
use fbu_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbuStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    UnknownShape = 3,
    NoBoundState = 4,
    Numerical = 5,
    Io = 6,
    OutOfRange = 7,
    /// The run finished but at least one acceptance flag failed.
    ChecksFailed = 8,
    Panic = 9,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbuShapeKind {
    Contact = 0,
    TypeI = 1,
    TypeII = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FbuParity {
    Even = 0,
    Odd = 1,
}

/// Scalar results of a two-body solve.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct FbuTwoBodySummary {
    pub v0: f64,
    pub q0: f64,
    pub e0: f64,
    pub q0_asymptotic: f64,
    pub overlap: f64,
    pub symmetric_fraction: f64,
    pub norm_residual: f64,
    pub grid_points: usize,
}

pub struct FbuShape {
    inner: Shape,
}

pub struct FbuTwoBody {
    inner: TwoBodyResult,
}

pub struct FbuSpectrum {
    inner: ThreeBodySpectrum,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let s = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(CString::new(s).expect("nul bytes removed")));
}

fn status_of(e: &Error) -> FbuStatus {
    match e {
        Error::UnknownShape(_) => FbuStatus::UnknownShape,
        Error::NoBoundState(_) => FbuStatus::NoBoundState,
        Error::Io(_) => FbuStatus::Io,
        Error::Domain(_) | Error::Config(_) | Error::Classification { .. } => FbuStatus::InvalidArgument,
        Error::Quadrature { .. } | Error::Bracket { .. } | Error::EigenNoConvergence { .. } => FbuStatus::Numerical,
    }
}

/// Runs `f`, recording errors and panics.
fn guard(f: impl FnOnce() -> Result<(), (FbuStatus, String)>) -> FbuStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FbuStatus::Ok,
        Ok(Err((s, m))) => {
            set_error(m);
            s
        }
        Err(p) => {
            let m = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {m}"));
            FbuStatus::Panic
        }
    }
}

fn core(e: Error) -> (FbuStatus, String) {
    (status_of(&e), e.to_string())
}

fn null(what: &str) -> (FbuStatus, String) {
    (FbuStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (FbuStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (FbuStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn out_arg<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (FbuStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, (FbuStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

fn parity(p: FbuParity) -> Parity {
    match p {
        FbuParity::Even => Parity::Even,
        FbuParity::Odd => Parity::Odd,
    }
}

/// Message of the last failed call on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn fbu_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

#[no_mangle]
pub extern "C" fn fbu_clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fbu_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Catalog shape with parameter overrides (`keys[i] = values[i]`, `n` entries;
/// `keys` and `values` may be null when `n` is zero).
///
/// # Safety
/// `name` and each `keys[i]` must be NUL-terminated strings; `values` must hold `n` doubles.
#[no_mangle]
pub unsafe extern "C" fn fbu_shape_new(
    name: *const c_char,
    keys: *const *const c_char,
    values: *const f64,
    n: usize,
    out: *mut *mut FbuShape,
) -> FbuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let name = str_arg(name, "name")?;
        let mut params = BTreeMap::new();
        if n > 0 {
            if keys.is_null() || values.is_null() {
                return Err(null("keys/values"));
            }
            for i in 0..n {
                let k = str_arg(*keys.add(i), "key")?;
                params.insert(k.to_string(), *values.add(i));
            }
        }
        let s = Shape::by_name(name, &params).map_err(core)?;
        *out = Box::into_raw(Box::new(FbuShape { inner: s }));
        Ok(())
    })
}

/// # Safety
/// `shape` must come from [`fbu_shape_new`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fbu_shape_free(shape: *mut FbuShape) {
    if !shape.is_null() {
        drop(Box::from_raw(shape));
    }
}

/// # Safety
/// `shape` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbu_shape_kind(shape: *const FbuShape, out: *mut FbuShapeKind) -> FbuStatus {
    guard(|| {
        let s = ref_arg(shape, "shape")?;
        *out_arg(out, "out")? = match s.inner.kind {
            ShapeKind::Contact => FbuShapeKind::Contact,
            ShapeKind::TypeI => FbuShapeKind::TypeI,
            ShapeKind::TypeII => FbuShapeKind::TypeII,
        };
        Ok(())
    })
}

/// Fourier transform `F(p)` as real and imaginary parts.
///
/// # Safety
/// `shape` must be a live handle; `re` and `im` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbu_shape_transform(shape: *const FbuShape, p: f64, re: *mut f64, im: *mut f64) -> FbuStatus {
    guard(|| {
        let s = ref_arg(shape, "shape")?;
        let f = s.inner.transform(p).map_err(core)?;
        *out_arg(re, "re")? = f.re;
        *out_arg(im, "im")? = f.im;
        Ok(())
    })
}

/// # Safety
/// `shape` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbu_two_body_solve(shape: *const FbuShape, v0: f64, out: *mut *mut FbuTwoBody) -> FbuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let s = ref_arg(shape, "shape")?;
        let r = solve_bound_state(&s.inner, v0).map_err(core)?;
        *out = Box::into_raw(Box::new(FbuTwoBody { inner: r }));
        Ok(())
    })
}

/// # Safety
/// `result` must come from [`fbu_two_body_solve`] and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fbu_two_body_free(result: *mut FbuTwoBody) {
    if !result.is_null() {
        drop(Box::from_raw(result));
    }
}

/// # Safety
/// `result` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbu_two_body_summary(result: *const FbuTwoBody, out: *mut FbuTwoBodySummary) -> FbuStatus {
    guard(|| {
        let r = &ref_arg(result, "result")?.inner;
        *out_arg(out, "out")? = FbuTwoBodySummary {
            v0: r.v0,
            q0: r.q0,
            e0: r.e0,
            q0_asymptotic: r.q0_asymptotic,
            overlap: r.overlap,
            symmetric_fraction: r.symmetric_fraction,
            norm_residual: r.norm_residual,
            grid_points: r.grid.len(),
        };
        Ok(())
    })
}

/// Copies the momentum grid and `φ(p)` into caller buffers of length `len`,
/// which must be at least the `grid_points` of the summary.
///
/// # Safety
/// `result` must be a live handle; the three buffers must hold `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn fbu_two_body_wavefunction(
    result: *const FbuTwoBody,
    p: *mut f64,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> FbuStatus {
    guard(|| {
        let r = &ref_arg(result, "result")?.inner;
        let n = r.grid.len();
        if len < n {
            return Err((FbuStatus::OutOfRange, format!("buffers hold {len} values, {n} needed")));
        }
        if p.is_null() || re.is_null() || im.is_null() {
            return Err(null("buffer"));
        }
        for i in 0..n {
            *p.add(i) = r.grid.nodes[i];
            *re.add(i) = r.wavefunction[i].re;
            *im.add(i) = r.wavefunction[i].im;
        }
        Ok(())
    })
}

/// Zero-range three-body spectrum in scaled units.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbu_contact_spectrum(
    alpha: f64,
    p: FbuParity,
    n_states: usize,
    out: *mut *mut FbuSpectrum,
) -> FbuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let s = solve_contact_spectrum(alpha, parity(p), n_states).map_err(core)?;
        *out = Box::into_raw(Box::new(FbuSpectrum { inner: s }));
        Ok(())
    })
}

/// Finite-range three-body spectrum at coupling `v0`.
///
/// # Safety
/// `shape` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbu_finite_spectrum(
    shape: *const FbuShape,
    v0: f64,
    alpha: f64,
    p: FbuParity,
    n_states: usize,
    out: *mut *mut FbuSpectrum,
) -> FbuStatus {
    guard(|| {
        let out = out_arg(out, "out")?;
        *out = ptr::null_mut();
        let s = ref_arg(shape, "shape")?;
        let sp = solve_finite_range_spectrum(&s.inner, v0, alpha, parity(p), n_states).map_err(core)?;
        *out = Box::into_raw(Box::new(FbuSpectrum { inner: sp }));
        Ok(())
    })
}

/// # Safety
/// `spectrum` must come from a spectrum constructor and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fbu_spectrum_free(spectrum: *mut FbuSpectrum) {
    if !spectrum.is_null() {
        drop(Box::from_raw(spectrum));
    }
}

/// Number of bound states found (may be fewer than requested).
///
/// # Safety
/// `spectrum` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn fbu_spectrum_len(spectrum: *const FbuSpectrum, out: *mut usize) -> FbuStatus {
    guard(|| {
        *out_arg(out, "out")? = ref_arg(spectrum, "spectrum")?.inner.epsilons.len();
        Ok(())
    })
}

/// Energy ratio `ε_n` and its eigen-equation residual.
///
/// # Safety
/// `spectrum` must be a live handle; `epsilon` and `residual` must be writable
/// (`residual` may be null).
#[no_mangle]
pub unsafe extern "C" fn fbu_spectrum_state(
    spectrum: *const FbuSpectrum,
    n: usize,
    epsilon: *mut f64,
    residual: *mut f64,
) -> FbuStatus {
    guard(|| {
        let s = &ref_arg(spectrum, "spectrum")?.inner;
        if n >= s.epsilons.len() {
            return Err((FbuStatus::OutOfRange, format!("state {n} requested, {} available", s.epsilons.len())));
        }
        *out_arg(epsilon, "epsilon")? = s.epsilons[n];
        if let Some(r) = residual.as_mut() {
            *r = s.residuals[n];
        }
        Ok(())
    })
}

/// Runs a TOML experiment config and writes its files into `out_dir` (null: no files).
/// Returns [`FbuStatus::ChecksFailed`] when the run completes with failing flags.
///
/// # Safety
/// `config_toml` and `out_dir` must be NUL-terminated strings; `all_passed` may be null.
#[no_mangle]
pub unsafe extern "C" fn fbu_run_config(
    config_toml: *const c_char,
    out_dir: *const c_char,
    all_passed: *mut c_int,
) -> FbuStatus {
    guard(|| {
        let text = str_arg(config_toml, "config_toml")?;
        let cfg = RunConfig::from_toml(text).map_err(core)?;
        let out = harness::run(&cfg).map_err(core)?;
        if !out_dir.is_null() {
            let dir = str_arg(out_dir, "out_dir")?;
            out.write(Path::new(dir)).map_err(core)?;
        }
        if let Some(a) = all_passed.as_mut() {
            *a = out.all_passed() as c_int;
        }
        if out.all_passed() {
            Ok(())
        } else {
            let failed: Vec<&str> = out.report.flags.iter().filter(|f| !f.passed).map(|f| f.name.as_str()).collect();
            Err((FbuStatus::ChecksFailed, format!("failed checks: {}", failed.join(", "))))
        }
    })
}
