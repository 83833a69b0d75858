//! C interface to the fdastap simulator.
//!
//! A scenario is an opaque handle wrapping a run configuration. Every call
//! returns an [`FdaStatus`]; on failure [`fda_last_error`] gives a message for
//! the calling thread. Output buffers are caller-allocated and their length is
//! checked. Grids are row-major with azimuth as the slow index.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use fdastap::config::RunConfig;
use fdastap::stap::{sinr_loss_curve, Processor};
use fdastap::{ArrayMode, Error};

/// Status codes returned by every function.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdaStatus {
    Ok = 0,
    /// A required pointer was null.
    NullPointer = 1,
    /// Invalid configuration or argument.
    Invalid = 2,
    /// Output buffer length does not match.
    BufferSize = 3,
    /// Covariance factorisation failed.
    Singular = 4,
    /// Any other runtime failure.
    Runtime = 5,
    /// A panic was caught at the boundary.
    Panic = 6,
}

/// Array configuration used for steering and covariances.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FdaMode {
    Fda = 0,
    Mimo = 1,
    PhasedArray = 2,
}

impl From<FdaMode> for ArrayMode {
    fn from(m: FdaMode) -> Self {
        match m {
            FdaMode::Fda => ArrayMode::Fda,
            FdaMode::Mimo => ArrayMode::Mimo,
            FdaMode::PhasedArray => ArrayMode::PhasedArray,
        }
    }
}

/// Opaque scenario handle.
pub struct FdaScenario {
    cfg: RunConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FdaStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Singular => FdaStatus::Singular,
            ref other if other.is_validation() => FdaStatus::Invalid,
            _ => FdaStatus::Runtime,
        };
        Failure(status, e.to_string())
    }
}

fn null(what: &str) -> Failure {
    Failure(FdaStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FdaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FdaStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(panic) => {
            let msg = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("panic: {msg}"));
            FdaStatus::Panic
        }
    }
}

unsafe fn scenario<'a>(s: *const FdaScenario) -> Result<&'a FdaScenario, Failure> {
    s.as_ref().ok_or_else(|| null("scenario"))
}

unsafe fn scenario_mut<'a>(s: *mut FdaScenario) -> Result<&'a mut FdaScenario, Failure> {
    s.as_mut().ok_or_else(|| null("scenario"))
}

unsafe fn out_slice<'a>(out: *mut f64, len: usize, want: usize, what: &str) -> Result<&'a mut [f64], Failure> {
    if out.is_null() {
        return Err(null(what));
    }
    if len != want {
        return Err(Failure(FdaStatus::BufferSize, format!("{what} holds {len} values, need {want}")));
    }
    Ok(std::slice::from_raw_parts_mut(out, len))
}

fn install(out: *mut *mut FdaScenario, cfg: RunConfig) -> Result<(), Failure> {
    cfg.validate()?;
    let boxed = Box::into_raw(Box::new(FdaScenario { cfg }));
    // SAFETY: checked non-null by the callers
    unsafe { *out = boxed };
    Ok(())
}

/// Message of the last failure on this thread, or null. Valid until the next
/// failing call on the same thread.
#[no_mangle]
pub extern "C" fn fda_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn fda_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Creates a scenario with the default system, scene and grid.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[no_mangle]
pub unsafe extern "C" fn fda_scenario_new(out: *mut *mut FdaScenario) -> FdaStatus {
    guard(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        install(out, RunConfig::default())
    })
}

/// Creates a scenario from a JSON run configuration (UTF-8, NUL-terminated).
///
/// # Safety
/// `json` must be a valid C string and `out` valid for one handle write.
#[no_mangle]
pub unsafe extern "C" fn fda_scenario_from_json(json: *const c_char, out: *mut *mut FdaScenario) -> FdaStatus {
    guard(|| {
        if json.is_null() {
            return Err(null("json"));
        }
        if out.is_null() {
            return Err(null("out"));
        }
        let text = CStr::from_ptr(json)
            .to_str()
            .map_err(|e| Failure(FdaStatus::Invalid, format!("json is not UTF-8: {e}")))?;
        install(out, RunConfig::from_json(text)?)
    })
}

/// Releases a scenario. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn fda_scenario_free(s: *mut FdaScenario) {
    if !s.is_null() {
        drop(Box::from_raw(s));
    }
}

/// Sets the number of pulses L.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn fda_scenario_set_pulses(s: *mut FdaScenario, pulses: usize) -> FdaStatus {
    guard(|| {
        let s = scenario_mut(s)?;
        let mut cfg = s.cfg.clone();
        cfg.system.pulses = pulses;
        cfg.validate()?;
        s.cfg = cfg;
        Ok(())
    })
}

/// Selects the array mode.
///
/// # Safety
/// `s` must be a live scenario handle.
#[no_mangle]
pub unsafe extern "C" fn fda_scenario_set_mode(s: *mut FdaScenario, mode: FdaMode) -> FdaStatus {
    guard(|| {
        scenario_mut(s)?.cfg.mode = mode.into();
        Ok(())
    })
}

/// Snapshot dimension of the configured mode.
///
/// # Safety
/// `s` must be a live scenario handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn fda_snapshot_dim(s: *const FdaScenario, out: *mut usize) -> FdaStatus {
    guard(|| {
        let s = scenario(s)?;
        let out = out.as_mut().ok_or_else(|| null("out"))?;
        let sys = &s.cfg.system;
        *out = match s.cfg.mode {
            ArrayMode::PhasedArray => sys.n_rx * sys.pulses,
            _ => sys.snapshot_dim(),
        };
        Ok(())
    })
}

/// Number of azimuth and Doppler cells of the evaluation grid.
///
/// # Safety
/// `s` must be a live scenario handle and both outputs writable.
#[no_mangle]
pub unsafe extern "C" fn fda_grid_shape(s: *const FdaScenario, n_azimuth: *mut usize, n_doppler: *mut usize) -> FdaStatus {
    guard(|| {
        let s = scenario(s)?;
        let a = n_azimuth.as_mut().ok_or_else(|| null("n_azimuth"))?;
        let d = n_doppler.as_mut().ok_or_else(|| null("n_doppler"))?;
        *a = s.cfg.grid.azimuths()?.len();
        *d = s.cfg.grid.dopplers()?.len();
        Ok(())
    })
}

fn processor(s: &FdaScenario) -> Result<Processor, Failure> {
    let c = &s.cfg;
    Ok(Processor::new(&c.system, &c.scene, c.mode, c.loading)?)
}

unsafe fn write_grid(s: *const FdaScenario, out: *mut f64, len: usize, spectrum: bool) -> Result<(), Failure> {
    let s = scenario(s)?;
    let want = s.cfg.grid.azimuths()?.len() * s.cfg.grid.dopplers()?.len();
    let out = out_slice(out, len, want, "out")?;
    let p = processor(s)?;
    let g = if spectrum {
        p.interference_spectrum(&s.cfg.grid)?
    } else {
        p.adapted_pattern(&s.cfg.grid)?
    };
    for i in 0..g.azimuth_deg.len() {
        for j in 0..g.doppler_hz.len() {
            out[i * g.doppler_hz.len() + j] = g.db(i, j);
        }
    }
    Ok(())
}

/// MVDR adapted pattern in dB over the grid (target cell is 0 dB).
///
/// # Safety
/// `s` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fda_adapted_pattern_db(s: *const FdaScenario, out: *mut f64, len: usize) -> FdaStatus {
    guard(|| write_grid(s, out, len, false))
}

/// Interference spectrum `1 / (q^H R^{-1} q)` in dB over the grid.
///
/// # Safety
/// `s` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fda_interference_spectrum_db(s: *const FdaScenario, out: *mut f64, len: usize) -> FdaStatus {
    guard(|| write_grid(s, out, len, true))
}

/// SINR loss in dB at `azimuth_deg` for `n` Doppler values, using the
/// configured loss convention.
///
/// # Safety
/// `dopplers` must point to `n` readable doubles and `out` to `n` writable ones.
#[no_mangle]
pub unsafe extern "C" fn fda_sinr_loss_db(
    s: *const FdaScenario,
    azimuth_deg: f64,
    dopplers: *const f64,
    n: usize,
    out: *mut f64,
) -> FdaStatus {
    guard(|| {
        let s = scenario(s)?;
        if dopplers.is_null() {
            return Err(null("dopplers"));
        }
        let f = std::slice::from_raw_parts(dopplers, n);
        let out = out_slice(out, n, n, "out")?;
        let c = &s.cfg;
        let loss = sinr_loss_curve(&c.scene, &c.system, f, azimuth_deg, c.mode, c.loading, c.sinr_loss.convention)?;
        out.copy_from_slice(&loss);
        Ok(())
    })
}

/// MVDR weights toward the target as interleaved (re, im) pairs; `len` must
/// be twice the snapshot dimension.
///
/// # Safety
/// `s` must be a live handle and `out` point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn fda_mvdr_weights(s: *const FdaScenario, out: *mut f64, len: usize) -> FdaStatus {
    guard(|| {
        let s = scenario(s)?;
        let v = processor(s)?.mvdr()?;
        let out = out_slice(out, len, 2 * v.len(), "out")?;
        for (k, x) in v.iter().enumerate() {
            out[2 * k] = x.re;
            out[2 * k + 1] = x.im;
        }
        Ok(())
    })
}
