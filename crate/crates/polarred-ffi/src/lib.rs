//! C ABI over the reduction library. Handles are opaque boxes, every
//! fallible call returns a status code, and the last error message is
//! kept per thread for retrieval with `polarred_last_error`.

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use libc::{c_char, c_double, c_int, size_t};

use polarred::action::PolarActionModel;
use polarred::catalog::build_model;
use polarred::classical::{inertia, integrate_reduced, Integrator, ReducedState};
use polarred::lie::RVec;
use polarred::quantum::{
    assemble_reduced_operator, measure_term, spectrum, AssembleOptions, RadialGrid, SpinRep,
};
use polarred::verify::run_all_with;
use polarred::{Error, Result};

/// Opaque handle to a validated polar action model.
pub struct PolarredModel(PolarActionModel);

#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PolarredStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    BadConfig = 3,
    NumericalError = 4,
    Panicked = 5,
}

/// Conservation report of an integrated reduced trajectory.
#[repr(C)]
#[derive(Clone, Copy, Debug)]
pub struct PolarredFlowSummary {
    pub energy_drift: c_double,
    pub casimir_drift: c_double,
    pub max_isotropy_spin: c_double,
    /// Time of the alcove-wall hit; only meaningful when hit_wall is 1.
    pub wall_time: c_double,
    pub hit_wall: c_int,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg).unwrap_or_else(|_| CString::new("invalid error text").unwrap());
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn clear_error() {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
}

fn status_of(e: &Error) -> PolarredStatus {
    match e {
        Error::Config(_) | Error::Dimension(_) | Error::NotSupported(_) => {
            PolarredStatus::BadConfig
        }
        _ => PolarredStatus::NumericalError,
    }
}

fn fail(e: Error) -> PolarredStatus {
    let code = status_of(&e);
    set_error(e.to_string());
    code
}

/// Runs a fallible body with panics caught at the ABI boundary.
fn guarded(body: impl FnOnce() -> Result<()>) -> PolarredStatus {
    clear_error();
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => PolarredStatus::Ok,
        Ok(Err(e)) => fail(e),
        Err(_) => {
            set_error("internal panic".into());
            PolarredStatus::Panicked
        }
    }
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> std::result::Result<&'a str, PolarredStatus> {
    if ptr.is_null() {
        set_error("null string argument".into());
        return Err(PolarredStatus::NullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8".into());
        PolarredStatus::InvalidUtf8
    })
}

/// Copies the last error message on this thread into `buf` (truncated,
/// always NUL terminated when `cap > 0`). Returns the full length
/// including the terminator, or 0 when no error is recorded.
///
/// # Safety
/// `buf` must point to `cap` writable bytes, or be null with `cap` 0.
#[no_mangle]
pub unsafe extern "C" fn polarred_last_error(buf: *mut c_char, cap: size_t) -> size_t {
    LAST_ERROR.with(|e| match &*e.borrow() {
        None => 0,
        Some(msg) => {
            let bytes = msg.as_bytes_with_nul();
            if !buf.is_null() && cap > 0 {
                let n = bytes.len().min(cap);
                std::ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n - 1) = 0;
            }
            bytes.len()
        }
    })
}

/// Static version string of the underlying library.
#[no_mangle]
pub extern "C" fn polarred_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Builds a catalog model by name (for example "su2-conj"). Returns
/// null on failure; the cause is available via `polarred_last_error`.
///
/// # Safety
/// `name` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn polarred_model_new(name: *const c_char) -> *mut PolarredModel {
    clear_error();
    let name = match str_arg(name) {
        Ok(s) => s,
        Err(_) => return std::ptr::null_mut(),
    };
    match catch_unwind(|| build_model(name)) {
        Ok(Ok(model)) => Box::into_raw(Box::new(PolarredModel(model))),
        Ok(Err(e)) => {
            set_error(e.to_string());
            std::ptr::null_mut()
        }
        Err(_) => {
            set_error("internal panic".into());
            std::ptr::null_mut()
        }
    }
}

/// Releases a model handle. Null is ignored.
///
/// # Safety
/// `model` must come from `polarred_model_new` and not be used after.
#[no_mangle]
pub unsafe extern "C" fn polarred_model_free(model: *mut PolarredModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Dimension of the section (number of radial coordinates); 0 for null.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn polarred_model_rank(model: *const PolarredModel) -> size_t {
    model.as_ref().map_or(0, |m| m.0.r())
}

/// Dimension of the spin space (transverse isotropy complement); 0 for null.
///
/// # Safety
/// `model` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn polarred_model_spin_dim(model: *const PolarredModel) -> size_t {
    model.as_ref().map_or(0, |m| m.0.isotropy.dim_kperp())
}

unsafe fn model_arg<'a>(
    model: *const PolarredModel,
) -> std::result::Result<&'a PolarActionModel, PolarredStatus> {
    match model.as_ref() {
        Some(m) => Ok(&m.0),
        None => {
            set_error("null model handle".into());
            Err(PolarredStatus::NullPointer)
        }
    }
}

unsafe fn vec_arg(ptr: *const c_double, len: size_t) -> std::result::Result<RVec, PolarredStatus> {
    if ptr.is_null() {
        set_error("null vector argument".into());
        return Err(PolarredStatus::NullPointer);
    }
    Ok(RVec::from_row_slice(std::slice::from_raw_parts(ptr, len)))
}

/// Radial density delta(q) of the model at the interior point `q`.
///
/// # Safety
/// `q` must point to `q_len` doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn polarred_density(
    model: *const PolarredModel,
    q: *const c_double,
    q_len: size_t,
    out: *mut c_double,
) -> PolarredStatus {
    clear_error();
    let model = match model_arg(model) {
        Ok(m) => m,
        Err(s) => return s,
    };
    let q = match vec_arg(q, q_len) {
        Ok(v) => v,
        Err(s) => return s,
    };
    if out.is_null() {
        set_error("null output pointer".into());
        return PolarredStatus::NullPointer;
    }
    guarded(|| {
        *out = inertia(model, &q)?.delta;
        Ok(())
    })
}

/// Scalar measure term of the reduced quantum Hamiltonian at `q`.
///
/// # Safety
/// `q` must point to `q_len` doubles and `out` to one writable double.
#[no_mangle]
pub unsafe extern "C" fn polarred_measure_term(
    model: *const PolarredModel,
    q: *const c_double,
    q_len: size_t,
    out: *mut c_double,
) -> PolarredStatus {
    clear_error();
    let model = match model_arg(model) {
        Ok(m) => m,
        Err(s) => return s,
    };
    let q = match vec_arg(q, q_len) {
        Ok(v) => v,
        Err(s) => return s,
    };
    if out.is_null() {
        set_error("null output pointer".into());
        return PolarredStatus::NullPointer;
    }
    guarded(|| {
        *out = measure_term(model, &q)?;
        Ok(())
    })
}

/// Lowest `k` eigenvalues of the reduced radial operator on an
/// `grid_n`-point grid, written to `out`.
///
/// # Safety
/// `rep_name` must be NUL terminated; `out` must hold `k` doubles.
#[no_mangle]
pub unsafe extern "C" fn polarred_spectrum(
    model: *const PolarredModel,
    rep_name: *const c_char,
    grid_n: size_t,
    k: size_t,
    out: *mut c_double,
) -> PolarredStatus {
    clear_error();
    let model = match model_arg(model) {
        Ok(m) => m,
        Err(s) => return s,
    };
    let rep_name = match str_arg(rep_name) {
        Ok(s) => s,
        Err(s) => return s,
    };
    if out.is_null() {
        set_error("null output pointer".into());
        return PolarredStatus::NullPointer;
    }
    guarded(|| {
        let rep = SpinRep::from_name(model, rep_name)?;
        let grid = RadialGrid::new(model, grid_n)?;
        let op = assemble_reduced_operator(model, &rep, &grid, AssembleOptions::default())?;
        let eigs = spectrum(&op, k)?;
        std::ptr::copy_nonoverlapping(eigs.as_ptr(), out, k);
        Ok(())
    })
}

/// Integrates the reduced flow from (q, p, xi) for time `t_end` with
/// step `dt`, overwriting the buffers with the final state and filling
/// `summary` with conservation data. `use_strang` selects the splitting
/// integrator instead of Runge-Kutta.
///
/// # Safety
/// `q`, `p` must hold rank doubles, `xi` spin-dim doubles, and
/// `summary` one writable struct.
#[no_mangle]
pub unsafe extern "C" fn polarred_integrate(
    model: *const PolarredModel,
    q: *mut c_double,
    p: *mut c_double,
    xi: *mut c_double,
    t_end: c_double,
    dt: c_double,
    use_strang: c_int,
    summary: *mut PolarredFlowSummary,
) -> PolarredStatus {
    clear_error();
    let model = match model_arg(model) {
        Ok(m) => m,
        Err(s) => return s,
    };
    let r = model.r();
    let m = model.isotropy.dim_kperp();
    if q.is_null() || p.is_null() || xi.is_null() || summary.is_null() {
        set_error("null state or summary pointer".into());
        return PolarredStatus::NullPointer;
    }
    let q0 = RVec::from_row_slice(std::slice::from_raw_parts(q, r));
    let p0 = RVec::from_row_slice(std::slice::from_raw_parts(p, r));
    let xi0 = RVec::from_row_slice(std::slice::from_raw_parts(xi, m));
    guarded(|| {
        let state0 = ReducedState::new(model, q0, p0, xi0)?;
        let method = if use_strang != 0 { Integrator::Strang } else { Integrator::Rk4 };
        let stride = ((t_end / dt) as usize / 200).max(1);
        let out = integrate_reduced(model, &state0, t_end, dt, stride, method)?;
        let h0 = out.rows.first().map_or(0.0, |row| row.h);
        let c0 = out.rows.first().map_or(0.0, |row| row.casimir);
        let mut energy_drift = 0.0f64;
        let mut casimir_drift = 0.0f64;
        for row in &out.rows {
            energy_drift = energy_drift.max((row.h - h0).abs());
            casimir_drift = casimir_drift.max((row.casimir - c0).abs());
        }
        std::ptr::copy_nonoverlapping(out.final_state.q.as_ptr(), q, r);
        std::ptr::copy_nonoverlapping(out.final_state.p.as_ptr(), p, r);
        std::ptr::copy_nonoverlapping(out.final_state.xi.as_ptr(), xi, m);
        *summary = PolarredFlowSummary {
            energy_drift,
            casimir_drift,
            max_isotropy_spin: out.max_xi_k_norm,
            wall_time: out.wall_time.unwrap_or(0.0),
            hit_wall: out.wall_time.is_some() as c_int,
        };
        Ok(())
    })
}

/// Runs the seeded verification suite with `mc_samples` Monte Carlo
/// draws for the quadrature check. Writes the number of failed checks
/// and returns Ok even when checks fail; a nonzero status means the
/// suite itself could not run.
///
/// # Safety
/// `out_failures` must point to one writable size_t.
#[no_mangle]
pub unsafe extern "C" fn polarred_verify(
    seed: u64,
    mc_samples: size_t,
    out_failures: *mut size_t,
) -> PolarredStatus {
    clear_error();
    if out_failures.is_null() {
        set_error("null output pointer".into());
        return PolarredStatus::NullPointer;
    }
    guarded(|| {
        let results = run_all_with(seed, mc_samples)?;
        *out_failures = results.iter().filter(|r| !r.passed).count();
        Ok(())
    })
}
