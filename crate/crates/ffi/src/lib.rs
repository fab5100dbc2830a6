//! C ABI over the bulkflux solver.
//!
//! Handles are opaque and owned by the caller once returned; release them with
//! the matching `_free`. Every call returns a [`BfStatus`]; on failure the
//! message is kept per thread and read with [`bf_last_error`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use bulkflux::cli::load_scenario;
use bulkflux::diagnostics::entropy_inequality_check;
use bulkflux::solver::{run, Scenario, Trajectory};
use bulkflux::{suites, Error};

/// Outcome of a call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BfStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Config = 3,
    Abort = 4,
    Precondition = 5,
    OutOfRange = 6,
    BufferTooSmall = 7,
    VerificationFailed = 8,
    Internal = 9,
}

/// Validated scenario.
pub struct BfScenario {
    scenario: Scenario,
}

/// Result of a run.
pub struct BfTrajectory {
    traj: Trajectory,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> BfStatus {
    match e {
        Error::Abort(_) => BfStatus::Abort,
        Error::Precondition(_) => BfStatus::Precondition,
        _ => BfStatus::Config,
    }
}

/// Runs `f`, turning errors and panics into a status plus the thread's message.
fn guard(f: impl FnOnce() -> Result<(), (BfStatus, String)>) -> BfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            set_error("");
            BfStatus::Ok
        }
        Ok(Err((s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("internal panic");
            BfStatus::Internal
        }
    }
}

fn lib<T>(r: bulkflux::Result<T>) -> Result<T, (BfStatus, String)> {
    r.map_err(|e| (status_of(&e), e.to_string()))
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, (BfStatus, String)> {
    if p.is_null() {
        return Err((BfStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p).to_str().map_err(|_| (BfStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (BfStatus, String)> {
    p.as_mut().ok_or((BfStatus::NullArgument, format!("{what} is null")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (BfStatus, String)> {
    p.as_ref().ok_or((BfStatus::NullArgument, format!("{what} is null")))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn bf_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`) and returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn bf_last_error(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let bytes = e.borrow();
        let bytes = bytes.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast::<u8>(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Loads `builtin:<name>` or a JSON path, applies `n_overrides` dotted
/// `key=value` strings and validates the result.
///
/// # Safety
/// `spec` must be a NUL-terminated string, `overrides` null or valid for
/// `n_overrides` string pointers, `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_scenario_load(
    spec: *const c_char,
    overrides: *const *const c_char,
    n_overrides: usize,
    out: *mut *mut BfScenario,
) -> BfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let spec = text(spec, "spec")?;
        let mut sets = Vec::with_capacity(n_overrides);
        if n_overrides > 0 {
            if overrides.is_null() {
                return Err((BfStatus::NullArgument, "overrides is null".into()));
            }
            for k in 0..n_overrides {
                sets.push(text(*overrides.add(k), "override")?.to_string());
            }
        }
        let desc = lib(load_scenario(spec, &sets))?;
        let scenario = lib(Scenario::build(&desc))?;
        *out = Box::into_raw(Box::new(BfScenario { scenario }));
        Ok(())
    })
}

/// # Safety
/// `s` must be null or a handle from [`bf_scenario_load`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bf_scenario_free(s: *mut BfScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// # Safety
/// `s` must be a live scenario handle; `n_cells` and `n_species` valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_scenario_shape(s: *const BfScenario, n_cells: *mut usize, n_species: *mut usize) -> BfStatus {
    guard(|| {
        let s = handle(s, "scenario")?;
        *out_ptr(n_cells, "n_cells")? = s.scenario.mesh.n_cells();
        *out_ptr(n_species, "n_species")? = s.scenario.n_species();
        Ok(())
    })
}

/// Runs the scenario to its end time.
///
/// # Safety
/// `s` must be a live scenario handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_simulate(s: *const BfScenario, out: *mut *mut BfTrajectory) -> BfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        *out = ptr::null_mut();
        let s = handle(s, "scenario")?;
        let traj = lib(run(&s.scenario))?;
        *out = Box::into_raw(Box::new(BfTrajectory { traj }));
        Ok(())
    })
}

/// # Safety
/// `t` must be null or a handle from [`bf_simulate`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn bf_trajectory_free(t: *mut BfTrajectory) {
    if !t.is_null() {
        drop(Box::from_raw(t));
    }
}

/// # Safety
/// `t` must be a live trajectory handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn bf_trajectory_len(t: *const BfTrajectory, out: *mut usize) -> BfStatus {
    guard(|| {
        *out_ptr(out, "out")? = handle(t, "trajectory")?.traj.times.len();
        Ok(())
    })
}

/// Time of snapshot `k` and its values, cell-major (`n_cells * n_species`).
///
/// # Safety
/// `t` must be a live trajectory handle, `time` a valid pointer and `values`
/// null or valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn bf_trajectory_snapshot(
    t: *const BfTrajectory,
    k: usize,
    time: *mut f64,
    values: *mut f64,
    len: usize,
) -> BfStatus {
    guard(|| {
        let traj = &handle(t, "trajectory")?.traj;
        let snap = traj
            .snapshots
            .get(k)
            .ok_or((BfStatus::OutOfRange, format!("snapshot {k} of {}", traj.snapshots.len())))?;
        *out_ptr(time, "time")? = traj.times[k];
        if values.is_null() {
            return Err((BfStatus::NullArgument, "values is null".into()));
        }
        if len < snap.values.len() {
            return Err((BfStatus::BufferTooSmall, format!("need {} doubles, got {len}", snap.values.len())));
        }
        ptr::copy_nonoverlapping(snap.values.as_ptr(), values, snap.values.len());
        Ok(())
    })
}

/// Relative mass drift and the largest positive entropy defect of the run.
///
/// # Safety
/// `t` must be a live trajectory handle; the outputs valid pointers.
#[no_mangle]
pub unsafe extern "C" fn bf_trajectory_diagnostics(
    t: *const BfTrajectory,
    mass_drift: *mut f64,
    max_entropy_defect: *mut f64,
) -> BfStatus {
    guard(|| {
        let traj = &handle(t, "trajectory")?.traj;
        *out_ptr(mass_drift, "mass_drift")? = traj.mass_drift();
        *out_ptr(max_entropy_defect, "max_entropy_defect")? = entropy_inequality_check(traj).max_defect;
        Ok(())
    })
}

/// Runs one verification suite by name; returns
/// [`BfStatus::VerificationFailed`] when it completes but does not pass.
///
/// # Safety
/// `suite` must be a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn bf_verify(suite: *const c_char, seed: u64) -> BfStatus {
    guard(|| {
        let name = text(suite, "suite")?.to_string();
        let results = lib(suites::verify_all(std::slice::from_ref(&name), seed))?;
        if results.iter().all(|r| r.passed) {
            Ok(())
        } else {
            Err((BfStatus::VerificationFailed, format!("suite `{name}` failed")))
        }
    })
}
