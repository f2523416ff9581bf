//! C ABI for the zenochain simulator.
//!
//! Conventions:
//! - Every fallible call returns a [`ZcStatus`]; `ZC_STATUS_OK` is 0.
//! - On failure, [`zc_last_error`] returns a thread-local NUL-terminated
//!   message valid until the next failing call on the same thread.
//! - Handles created by `*_new` functions must be released with the matching
//!   `*_free`; freeing a null pointer is a no-op.
//! - Complex matrices cross the boundary as interleaved doubles
//!   `re, im, re, im, …` in row-major order.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use zenochain::ensemble::{self, SamplingProtocol, Unraveling};
use zenochain::observables::Observable;
use zenochain::params::ModelParams;
use zenochain::state::DensityMatrix;
use zenochain::{C64, DMatrix, Error};

/// Status code returned by every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ZcStatus {
    /// Success.
    Ok = 0,
    /// Invalid configuration or input (bad parameter, unknown name, …).
    Config = 1,
    /// Numerical failure during integration or analysis.
    Numerical = 2,
    /// A required pointer argument was null.
    NullPointer = 3,
    /// A string argument was not valid UTF-8.
    InvalidString = 4,
    /// Internal panic; state is unspecified but the process may continue.
    Panic = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").expect("empty"));
}

fn set_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).expect("NUL stripped above");
    });
}

fn status_of(err: &Error) -> ZcStatus {
    match err.exit_code() {
        1 => ZcStatus::Config,
        _ => ZcStatus::Numerical,
    }
}

fn fail(err: &Error) -> ZcStatus {
    set_error(&err.to_string());
    status_of(err)
}

/// Run `body` with panic containment; panics become `ZcStatus::Panic`.
fn guarded(body: impl FnOnce() -> ZcStatus) -> ZcStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic in zenochain FFI".to_string());
            set_error(&msg);
            ZcStatus::Panic
        }
    }
}

/// Last error message for this thread (empty string when no error occurred).
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn zc_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn zc_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Opaque model-parameter handle (chain length, Γ, λ, η, dt).
pub struct ZcParams {
    inner: ModelParams,
}

/// Create a parameter set for `sites` spins with field-noise strength
/// `gamma`, measurement strength `lambda`, and detector efficiency `eta`.
/// The integrator step defaults to min(0.05, 0.05/Γ, 0.05/λ).
///
/// # Safety
/// `out` must point to writable storage for one pointer.
#[no_mangle]
pub unsafe extern "C" fn zc_params_new(
    sites: u32,
    gamma: f64,
    lambda: f64,
    eta: f64,
    out: *mut *mut ZcParams,
) -> ZcStatus {
    guarded(|| {
        if out.is_null() {
            set_error("out pointer is null");
            return ZcStatus::NullPointer;
        }
        match ModelParams::new(sites as usize, gamma, lambda, eta) {
            Ok(inner) => {
                unsafe { *out = Box::into_raw(Box::new(ZcParams { inner })) };
                ZcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Override the integrator step.
///
/// # Safety
/// `params` must be a live handle from [`zc_params_new`].
#[no_mangle]
pub unsafe extern "C" fn zc_params_set_dt(params: *mut ZcParams, dt: f64) -> ZcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { params.as_mut() }) else {
            set_error("params pointer is null");
            return ZcStatus::NullPointer;
        };
        match handle.inner.clone().with_dt(dt) {
            Ok(updated) => {
                handle.inner = updated;
                ZcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Release a parameter handle.  Null is ignored.
///
/// # Safety
/// `params` must be null or a live handle from [`zc_params_new`], and must
/// not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn zc_params_free(params: *mut ZcParams) {
    if !params.is_null() {
        drop(unsafe { Box::from_raw(params) });
    }
}

fn parse_observable(name: *const c_char) -> Result<Observable, ZcStatus> {
    if name.is_null() {
        set_error("observable name pointer is null");
        return Err(ZcStatus::NullPointer);
    }
    let text = match unsafe { CStr::from_ptr(name) }.to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("observable name is not valid UTF-8");
            return Err(ZcStatus::InvalidString);
        }
    };
    text.parse::<Observable>().map_err(|e| {
        set_error(&e.to_string());
        ZcStatus::Config
    })
}

/// Trajectory-ensemble steady-state average of one observable under the
/// diffusive unraveling, starting from the Néel state.  Burn-in, averaging
/// window, sampling interval, and trajectory count follow the arguments;
/// `out_mean`/`out_stderr` receive the ensemble statistics.
///
/// # Safety
/// `params` must be a live handle; `observable` must be a NUL-terminated
/// string; `out_mean` and `out_stderr` must be writable.
#[no_mangle]
pub unsafe extern "C" fn zc_steady_state_average(
    params: *const ZcParams,
    observable: *const c_char,
    n_traj: u64,
    t_burn: f64,
    t_window: f64,
    sample_interval: f64,
    master_seed: u64,
    out_mean: *mut f64,
    out_stderr: *mut f64,
) -> ZcStatus {
    guarded(|| {
        let Some(handle) = (unsafe { params.as_ref() }) else {
            set_error("params pointer is null");
            return ZcStatus::NullPointer;
        };
        if out_mean.is_null() || out_stderr.is_null() {
            set_error("output pointer is null");
            return ZcStatus::NullPointer;
        }
        let obs = match parse_observable(observable) {
            Ok(o) => o,
            Err(status) => return status,
        };
        let protocol = SamplingProtocol {
            t_burn,
            t_window,
            sample_interval,
            n_traj: n_traj as usize,
            ..SamplingProtocol::default()
        };
        match ensemble::steady_state_average(
            &handle.inner,
            &Unraveling::Qsd,
            &protocol,
            master_seed,
            &[obs],
        ) {
            Ok(stats) => {
                unsafe {
                    *out_mean = stats[0].mean;
                    *out_stderr = stats[0].stderr;
                }
                ZcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Evaluate an observable on a caller-supplied density matrix for `sites`
/// spins.  `rho` holds 2^sites × 2^sites complex entries as interleaved
/// doubles in row-major order (length 2·4^sites).
///
/// # Safety
/// `rho` must point to `2 * 4^sites` readable doubles; `out` must be
/// writable; `observable` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn zc_observable_from_density(
    sites: u32,
    rho: *const f64,
    observable: *const c_char,
    out: *mut f64,
) -> ZcStatus {
    guarded(|| {
        if rho.is_null() || out.is_null() {
            set_error("matrix or output pointer is null");
            return ZcStatus::NullPointer;
        }
        let obs = match parse_observable(observable) {
            Ok(o) => o,
            Err(status) => return status,
        };
        let sites = sites as usize;
        if sites == 0 || sites > 12 {
            set_error("sites must lie in 1..=12");
            return ZcStatus::Config;
        }
        let dim = 1usize << sites;
        let data = unsafe { std::slice::from_raw_parts(rho, 2 * dim * dim) };
        let mut matrix = DMatrix::<C64>::zeros(dim, dim);
        for r in 0..dim {
            for c in 0..dim {
                let k = 2 * (r * dim + c);
                matrix[(r, c)] = C64::new(data[k], data[k + 1]);
            }
        }
        let rho = match DensityMatrix::from_matrix(sites, matrix) {
            Ok(m) => m,
            Err(e) => return fail(&e),
        };
        match obs.evaluate_density(&rho) {
            Ok(value) => {
                unsafe { *out = value };
                ZcStatus::Ok
            }
            Err(e) => fail(&e),
        }
    })
}

/// Run the built-in verification oracles.  Writes the number of failed and
/// total checks; returns `Numerical` when any check fails.
///
/// # Safety
/// `out_failed` and `out_total` must be writable or null (null skips the
/// write).
#[no_mangle]
pub unsafe extern "C" fn zc_verify(out_failed: *mut u32, out_total: *mut u32) -> ZcStatus {
    guarded(|| {
        let checks = zenochain::oracles::run_verification();
        let total = checks.len() as u32;
        let failed = checks.iter().filter(|c| !c.passed).count() as u32;
        unsafe {
            if !out_total.is_null() {
                *out_total = total;
            }
            if !out_failed.is_null() {
                *out_failed = failed;
            }
        }
        if failed > 0 {
            let first = checks
                .iter()
                .find(|c| !c.passed)
                .map(|c| format!("{}: {}", c.name, c.detail))
                .unwrap_or_default();
            set_error(&format!("{failed} of {total} verification checks failed: {first}"));
            ZcStatus::Numerical
        } else {
            ZcStatus::Ok
        }
    })
}
