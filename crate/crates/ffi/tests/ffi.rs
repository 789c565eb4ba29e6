use std::ffi::{CStr, CString};
use std::ptr;

use fbu_ffi::*;

fn last_error() -> String {
    let p = fbu_last_error();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

fn shape(name: &str) -> *mut FbuShape {
    let n = CString::new(name).unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fbu_shape_new(n.as_ptr(), ptr::null(), ptr::null(), 0, &mut s) }, FbuStatus::Ok);
    s
}

#[test]
fn gaussian_two_body_round_trip() {
    let s = shape("gaussian");
    let mut kind = FbuShapeKind::Contact;
    assert_eq!(unsafe { fbu_shape_kind(s, &mut kind) }, FbuStatus::Ok);
    assert_eq!(kind, FbuShapeKind::TypeI);
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { fbu_two_body_solve(s, -0.5, &mut r) }, FbuStatus::Ok);
    let mut sum = FbuTwoBodySummary::default();
    assert_eq!(unsafe { fbu_two_body_summary(r, &mut sum) }, FbuStatus::Ok);
    assert!((sum.q0 - 0.594972).abs() < 2e-6);
    let n = sum.grid_points;
    let (mut p, mut re, mut im) = (vec![0.0; n], vec![0.0; n], vec![0.0; n]);
    assert_eq!(
        unsafe { fbu_two_body_wavefunction(r, p.as_mut_ptr(), re.as_mut_ptr(), im.as_mut_ptr(), n) },
        FbuStatus::Ok
    );
    assert!(re.iter().any(|x| *x > 0.0));
    assert_eq!(
        unsafe { fbu_two_body_wavefunction(r, p.as_mut_ptr(), re.as_mut_ptr(), im.as_mut_ptr(), n - 1) },
        FbuStatus::OutOfRange
    );
    unsafe {
        fbu_two_body_free(r);
        fbu_shape_free(s);
    }
}

#[test]
fn parameter_overrides() {
    let n = CString::new("gaussian").unwrap();
    let k = CString::new("width").unwrap();
    let keys = [k.as_ptr()];
    let vals = [2.0];
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fbu_shape_new(n.as_ptr(), keys.as_ptr(), vals.as_ptr(), 1, &mut s) }, FbuStatus::Ok);
    let (mut re, mut im) = (0.0, 0.0);
    assert_eq!(unsafe { fbu_shape_transform(s, 0.0, &mut re, &mut im) }, FbuStatus::Ok);
    assert!((re - 2.0 * std::f64::consts::PI.sqrt()).abs() < 1e-10 && im.abs() < 1e-14);
    unsafe { fbu_shape_free(s) };
}

#[test]
fn errors_are_reported_per_thread() {
    fbu_clear_error();
    assert!(fbu_last_error().is_null());
    let n = CString::new("no-such-shape").unwrap();
    let mut s = ptr::null_mut();
    assert_eq!(unsafe { fbu_shape_new(n.as_ptr(), ptr::null(), ptr::null(), 0, &mut s) }, FbuStatus::UnknownShape);
    assert!(s.is_null());
    assert!(last_error().contains("no-such-shape"));
    std::thread::spawn(|| assert!(fbu_last_error().is_null())).join().unwrap();

    let c = shape("contact");
    let mut r = ptr::null_mut();
    assert_eq!(unsafe { fbu_two_body_solve(c, 0.3, &mut r) }, FbuStatus::NoBoundState);
    assert_eq!(unsafe { fbu_two_body_solve(ptr::null(), -0.3, &mut r) }, FbuStatus::NullPointer);
    assert!(last_error().contains("null"));
    unsafe { fbu_shape_free(c) };
}

#[test]
fn contact_spectrum() {
    let mut sp = ptr::null_mut();
    assert_eq!(unsafe { fbu_contact_spectrum(1.0, FbuParity::Even, 1, &mut sp) }, FbuStatus::Ok);
    let mut n = 0;
    assert_eq!(unsafe { fbu_spectrum_len(sp, &mut n) }, FbuStatus::Ok);
    assert_eq!(n, 1);
    let (mut e, mut res) = (0.0, 0.0);
    assert_eq!(unsafe { fbu_spectrum_state(sp, 0, &mut e, &mut res) }, FbuStatus::Ok);
    assert!((e + 2.087719226380194).abs() < 1e-10);
    assert_eq!(unsafe { fbu_spectrum_state(sp, 1, &mut e, ptr::null_mut()) }, FbuStatus::OutOfRange);
    unsafe { fbu_spectrum_free(sp) };
}

#[test]
fn run_config_from_text() {
    let cfg = CString::new(
        "[run]\nname = \"c\"\nmode = \"two-body\"\n[shape]\nname = \"contact\"\n[coupling]\nv0 = [-1.0, -0.5]\n",
    )
    .unwrap();
    let dir = tempfile::tempdir().unwrap();
    let d = CString::new(dir.path().to_str().unwrap()).unwrap();
    let mut ok = 0;
    assert_eq!(unsafe { fbu_run_config(cfg.as_ptr(), d.as_ptr(), &mut ok) }, FbuStatus::Ok);
    assert_eq!(ok, 1);
    assert!(dir.path().join("c_two_body.csv").exists());
    assert!(dir.path().join("c_summary.json").exists());

    let bad =
        CString::new("[run]\nname = \"c\"\nmode = \"two-body\"\n[shape]\nname = \"contact\"\n[coupling]\nv0 = [0.5]\n")
            .unwrap();
    assert_eq!(unsafe { fbu_run_config(bad.as_ptr(), ptr::null(), &mut ok) }, FbuStatus::ChecksFailed);
    assert_eq!(ok, 0);
}

#[test]
fn header_declares_the_api() {
    let h = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/fbu.h")).unwrap();
    for sym in [
        "fbu_last_error",
        "fbu_shape_new",
        "fbu_two_body_solve",
        "fbu_contact_spectrum",
        "fbu_finite_spectrum",
        "fbu_run_config",
        "typedef struct FbuShape FbuShape",
        "FBU_STATUS_OK = 0",
    ] {
        assert!(h.contains(sym), "{sym}");
    }
}

#[test]
fn header_compiles_as_c() {
    let Ok(cc) = which_cc() else {
        eprintln!("no C compiler found; header syntax check not run");
        return;
    };
    let inc = concat!(env!("CARGO_MANIFEST_DIR"), "/include");
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("t.c");
    std::fs::write(&src, "#include \"fbu.h\"\nint main(void) { FbuShape *s = 0; return (int)fbu_shape_kind(s, 0); }\n")
        .unwrap();
    let st = std::process::Command::new(cc)
        .args(["-fsyntax-only", "-Wall", "-Werror", "-I", inc])
        .arg(&src)
        .status()
        .unwrap();
    assert!(st.success());
}

fn which_cc() -> Result<&'static str, ()> {
    for c in ["cc", "gcc", "clang"] {
        if std::process::Command::new(c).arg("--version").output().is_ok() {
            return Ok(c);
        }
    }
    Err(())
}
