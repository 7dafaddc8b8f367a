//! C interface to the `gffv` solver.
//!
//! Every function returns a [`GffvError`]; on failure a message is available
//! from [`gffv_last_error_message`] on the same thread.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use gffv::driver::{load_config_str, Simulation};
use gffv::timestep::RunStatus;
use gffv::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GffvError {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Config = 3,
    Numeric = 4,
    Io = 5,
    Panic = 6,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GffvRunStatus {
    Running = 0,
    Steady = 1,
    Finished = 2,
    BlowUp = 3,
}

/// Opaque simulation handle.
pub struct GffvSimulation {
    inner: Simulation,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn fail(code: GffvError, message: impl Into<String>) -> GffvError {
    set_error(message.into());
    code
}

fn from_error(e: Error) -> GffvError {
    let code = match e {
        Error::Config { .. } | Error::Parse(_) => GffvError::Config,
        Error::Precondition(_) | Error::Numeric(_) => GffvError::Numeric,
        Error::Io(_) => GffvError::Io,
    };
    fail(code, e.to_string())
}

fn status_code(s: RunStatus) -> GffvRunStatus {
    match s {
        RunStatus::Running => GffvRunStatus::Running,
        RunStatus::Steady(_) => GffvRunStatus::Steady,
        RunStatus::Finished(_) => GffvRunStatus::Finished,
        RunStatus::BlowUp(_) => GffvRunStatus::BlowUp,
    }
}

fn guard<F: FnOnce() -> GffvError>(f: F) -> GffvError {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(GffvError::Panic, "internal panic"))
}

unsafe fn sim_ref<'a>(sim: *const GffvSimulation) -> Result<&'a GffvSimulation, GffvError> {
    // SAFETY: caller passes null or a live handle from `gffv_simulation_new`.
    unsafe { sim.as_ref() }.ok_or_else(|| fail(GffvError::NullPointer, "null simulation handle"))
}

unsafe fn sim_mut<'a>(sim: *mut GffvSimulation) -> Result<&'a mut GffvSimulation, GffvError> {
    // SAFETY: as in `sim_ref`, with exclusive access.
    unsafe { sim.as_mut() }.ok_or_else(|| fail(GffvError::NullPointer, "null simulation handle"))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> GffvError {
    if out.is_null() {
        return fail(GffvError::NullPointer, "null output pointer");
    }
    // SAFETY: non-null and, per the contract, writable.
    unsafe { out.write(value) };
    GffvError::Ok
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn gffv_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or null.
/// Valid until the next `gffv_*` call on the same thread.
#[no_mangle]
pub extern "C" fn gffv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Builds a simulation from a JSON configuration, either a full
/// configuration or `{"scenario": name, ...overrides}`.
///
/// # Safety
/// `config_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_new(
    config_json: *const c_char,
    out: *mut *mut GffvSimulation,
) -> GffvError {
    guard(|| {
        if config_json.is_null() || out.is_null() {
            return fail(GffvError::NullPointer, "null argument");
        }
        // SAFETY: checked non-null; NUL termination is the caller's contract.
        let text = match unsafe { CStr::from_ptr(config_json) }.to_str() {
            Ok(t) => t,
            Err(_) => return fail(GffvError::InvalidArgument, "configuration is not UTF-8"),
        };
        let sim = match load_config_str(text).and_then(Simulation::new) {
            Ok(s) => s,
            Err(e) => return from_error(e),
        };
        let handle = Box::into_raw(Box::new(GffvSimulation { inner: sim }));
        // SAFETY: checked non-null above.
        unsafe { write_out(out, handle) }
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `sim` must be null or a handle from [`gffv_simulation_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_free(sim: *mut GffvSimulation) {
    if !sim.is_null() {
        // SAFETY: ownership returns to Rust exactly once per the contract.
        drop(unsafe { Box::from_raw(sim) });
    }
}

/// One accepted step not passing `t_stop`.
///
/// # Safety
/// `sim` must be a live handle; `status` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_step(
    sim: *mut GffvSimulation,
    t_stop: f64,
    status: *mut GffvRunStatus,
) -> GffvError {
    guard(|| {
        let s = match unsafe { sim_mut(sim) } {
            Ok(s) => s,
            Err(e) => return e,
        };
        if !t_stop.is_finite() {
            return fail(GffvError::InvalidArgument, "t_stop must be finite");
        }
        match s.inner.step(t_stop) {
            Ok(st) => unsafe { write_out(status, status_code(st)) },
            Err(e) => from_error(e),
        }
    })
}

/// Steps until steady state, `t_end` or blow-up.
///
/// # Safety
/// `sim` must be a live handle; `status` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_run(
    sim: *mut GffvSimulation,
    status: *mut GffvRunStatus,
) -> GffvError {
    guard(|| {
        let s = match unsafe { sim_mut(sim) } {
            Ok(s) => s,
            Err(e) => return e,
        };
        match s.inner.run_to_end() {
            Ok(st) => unsafe { write_out(status, status_code(st)) },
            Err(e) => from_error(e),
        }
    })
}

/// Number of cells.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_len(sim: *const GffvSimulation, out: *mut usize) -> GffvError {
    guard(|| match unsafe { sim_ref(sim) } {
        Ok(s) => unsafe { write_out(out, s.inner.values().len()) },
        Err(e) => e,
    })
}

/// Copies the cell averages (row-major in 2D) into `buf`.
///
/// # Safety
/// `sim` must be a live handle; `buf` must hold `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_values(
    sim: *const GffvSimulation,
    buf: *mut f64,
    len: usize,
) -> GffvError {
    guard(|| {
        let s = match unsafe { sim_ref(sim) } {
            Ok(s) => s,
            Err(e) => return e,
        };
        if buf.is_null() {
            return fail(GffvError::NullPointer, "null buffer");
        }
        let v = s.inner.values();
        if len < v.len() {
            return fail(
                GffvError::InvalidArgument,
                format!("buffer holds {len} values, need {}", v.len()),
            );
        }
        // SAFETY: `buf` has room for `len >= v.len()` doubles.
        unsafe { std::ptr::copy_nonoverlapping(v.as_ptr(), buf, v.len()) };
        GffvError::Ok
    })
}

/// Current model time.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_time(sim: *const GffvSimulation, out: *mut f64) -> GffvError {
    guard(|| match unsafe { sim_ref(sim) } {
        Ok(s) => unsafe { write_out(out, s.inner.t()) },
        Err(e) => e,
    })
}

/// Total mass.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_mass(sim: *const GffvSimulation, out: *mut f64) -> GffvError {
    guard(|| match unsafe { sim_ref(sim) } {
        Ok(s) => unsafe { write_out(out, s.inner.mass()) },
        Err(e) => e,
    })
}

/// Discrete free energy.
///
/// # Safety
/// `sim` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn gffv_simulation_entropy(
    sim: *const GffvSimulation,
    out: *mut f64,
) -> GffvError {
    guard(|| match unsafe { sim_ref(sim) } {
        Ok(s) => unsafe { write_out(out, s.inner.entropy_parts().total()) },
        Err(e) => e,
    })
}
