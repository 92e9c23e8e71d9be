//! Exercises the C entry points exactly as a foreign caller would:
//! raw pointers, status codes, and the thread-local error message.

use std::ffi::CString;
use std::os::raw::c_char;

use polarred_ffi::*;

fn cstr(s: &str) -> CString {
    CString::new(s).unwrap()
}

fn last_error() -> String {
    let mut buf = vec![0 as c_char; 256];
    let n = unsafe { polarred_last_error(buf.as_mut_ptr(), buf.len()) };
    if n == 0 {
        return String::new();
    }
    let bytes: Vec<u8> = buf[..n.min(buf.len()) - 1].iter().map(|&c| c as u8).collect();
    String::from_utf8_lossy(&bytes).into_owned()
}

#[test]
fn version_is_a_static_string() {
    let v = unsafe { std::ffi::CStr::from_ptr(polarred_version()) };
    assert!(!v.to_str().unwrap().is_empty());
}

#[test]
fn model_lifecycle_and_dimensions() {
    let name = cstr("su3-conj");
    let model = unsafe { polarred_model_new(name.as_ptr()) };
    assert!(!model.is_null());
    unsafe {
        assert_eq!(polarred_model_rank(model), 2);
        assert_eq!(polarred_model_spin_dim(model), 6);
        polarred_model_free(model);
    }
}

#[test]
fn unknown_model_reports_the_failure() {
    let name = cstr("su99-conj");
    let model = unsafe { polarred_model_new(name.as_ptr()) };
    assert!(model.is_null());
    assert!(last_error().contains("su99-conj"), "{}", last_error());
}

#[test]
fn null_arguments_return_null_pointer_status() {
    unsafe {
        assert!(polarred_model_new(std::ptr::null()).is_null());
        assert_eq!(polarred_model_rank(std::ptr::null()), 0);
        let mut out = 0.0;
        let status = polarred_density(std::ptr::null(), &out as *const f64 as *const _, 1, &mut out);
        assert_eq!(status, PolarredStatus::NullPointer);
        assert!(!last_error().is_empty());
    }
}

#[test]
fn density_and_measure_term_match_closed_forms() {
    let name = cstr("su2-conj");
    let model = unsafe { polarred_model_new(name.as_ptr()) };
    assert!(!model.is_null());
    let q = [1.3f64];
    let mut delta = 0.0;
    let mut measure = 0.0;
    unsafe {
        assert_eq!(polarred_density(model, q.as_ptr(), 1, &mut delta), PolarredStatus::Ok);
        assert_eq!(polarred_measure_term(model, q.as_ptr(), 1, &mut measure), PolarredStatus::Ok);
        polarred_model_free(model);
    }
    let expect = 4.0 * (q[0] / 2.0).sin().powi(2);
    assert!((delta - expect).abs() < 1e-12, "delta {delta} vs {expect}");
    assert!((measure + 0.25).abs() < 1e-12, "measure {measure}");
}

#[test]
fn exterior_initial_state_returns_an_error_status() {
    let name = cstr("su2-conj");
    let model = unsafe { polarred_model_new(name.as_ptr()) };
    let mut q = [-0.5f64];
    let mut p = [0.3f64];
    let mut xi = [0.0f64, 0.0];
    let mut summary = PolarredFlowSummary {
        energy_drift: 0.0,
        casimir_drift: 0.0,
        max_isotropy_spin: 0.0,
        wall_time: 0.0,
        hit_wall: 0,
    };
    let status = unsafe {
        polarred_integrate(
            model,
            q.as_mut_ptr(),
            p.as_mut_ptr(),
            xi.as_mut_ptr(),
            0.1,
            1e-3,
            0,
            &mut summary,
        )
    };
    assert_eq!(status, PolarredStatus::NumericalError);
    assert!(!last_error().is_empty());
    unsafe { polarred_model_free(model) };
}

#[test]
fn spectrum_matches_the_character_ladder() {
    let name = cstr("su2-conj");
    let rep = cstr("trivial");
    let model = unsafe { polarred_model_new(name.as_ptr()) };
    let mut eigs = [0.0f64; 5];
    let status =
        unsafe { polarred_spectrum(model, rep.as_ptr(), 800, eigs.len(), eigs.as_mut_ptr()) };
    assert_eq!(status, PolarredStatus::Ok);
    for (e, l) in eigs.iter().zip([0.0, 0.375, 1.0, 1.875, 3.0]) {
        assert!((e - l).abs() < 1e-3, "eigenvalue {e} vs {l}");
    }
    unsafe { polarred_model_free(model) };
}

#[test]
fn integrate_conserves_energy_and_reports_no_wall() {
    let name = cstr("su2-conj");
    let model = unsafe { polarred_model_new(name.as_ptr()) };
    let mut q = [std::f64::consts::PI];
    let mut p = [0.3f64];
    let mut xi = [0.0f64, -1.0];
    let mut summary = PolarredFlowSummary {
        energy_drift: -1.0,
        casimir_drift: -1.0,
        max_isotropy_spin: -1.0,
        wall_time: -1.0,
        hit_wall: -1,
    };
    let status = unsafe {
        polarred_integrate(
            model,
            q.as_mut_ptr(),
            p.as_mut_ptr(),
            xi.as_mut_ptr(),
            0.5,
            1e-3,
            0,
            &mut summary,
        )
    };
    assert_eq!(status, PolarredStatus::Ok);
    assert_eq!(summary.hit_wall, 0);
    assert!(summary.energy_drift < 1e-10, "drift {:.3e}", summary.energy_drift);
    assert!(summary.casimir_drift < 1e-10);
    assert!((xi[0].powi(2) + xi[1].powi(2) - 1.0).abs() < 1e-10, "spin left the orbit");
    assert!(q[0] > std::f64::consts::PI, "radial point should have advanced");
    unsafe { polarred_model_free(model) };
}

#[test]
fn verify_suite_runs_with_reduced_sampling() {
    let mut failures = usize::MAX;
    let status = unsafe { polarred_verify(7, 40_000, &mut failures) };
    assert_eq!(status, PolarredStatus::Ok);
    assert_eq!(failures, 0);
}
