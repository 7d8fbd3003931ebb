//! C ABI for the `mosim` default-times simulation library.
//!
//! A model is built from the same JSON configuration documents the CLI
//! consumes and is held behind an opaque [`MosimModel`] handle. All
//! functions return a [`MosimStatus`] code; a human-readable message for the
//! most recent failure on the calling thread is available through
//! [`mosim_last_error`]. Simulated default times land in caller-provided
//! buffers; a component surviving the horizon is reported as C `INFINITY`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mosim::config::{parse_config, SimulationConfig};
use mosim::driver::{simulate_paths, survival};
use mosim::Error;

/// Status code of every C-ABI call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MosimStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    InvalidUtf8 = 2,
    /// The configuration document failed schema validation.
    InvalidConfig = 3,
    /// An argument was outside its domain (dimensions, parameters).
    InvalidArgument = 4,
    /// A numerical routine failed.
    NumericalError = 5,
    /// The requested quantity has no exact method for this model.
    Unsupported = 6,
    /// The provided output buffer is too small.
    BufferTooSmall = 7,
    /// An internal panic was caught at the boundary.
    InternalPanic = 8,
}

/// Opaque handle to a validated simulation model.
pub struct MosimModel {
    config: SimulationConfig,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(message: &str) {
    let sanitized = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn status_of(err: &Error) -> MosimStatus {
    match err {
        Error::Config(_) => MosimStatus::InvalidConfig,
        Error::InvalidParameter(_) | Error::DimensionMismatch(_) => MosimStatus::InvalidArgument,
        Error::Numerical(_) | Error::Io(_) => MosimStatus::NumericalError,
        Error::NoExactMethod(_) => MosimStatus::Unsupported,
    }
}

fn fail(err: &Error) -> MosimStatus {
    set_last_error(&err.to_string());
    status_of(err)
}

fn guarded(f: impl FnOnce() -> MosimStatus + std::panic::UnwindSafe) -> MosimStatus {
    match catch_unwind(f) {
        Ok(status) => status,
        Err(_) => {
            set_last_error("internal panic");
            MosimStatus::InternalPanic
        }
    }
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mosim_version() -> *const c_char {
    static VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");
    VERSION.as_ptr() as *const c_char
}

/// Copies the most recent error message of this thread into `buffer`
/// (NUL-terminated, truncated to `capacity`). Returns the full message
/// length in bytes, excluding the NUL.
///
/// # Safety
/// `buffer` must point to `capacity` writable bytes (or be null to query
/// the required length).
#[no_mangle]
pub unsafe extern "C" fn mosim_last_error(buffer: *mut c_char, capacity: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let message = slot.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && capacity > 0 {
            let n = bytes.len().min(capacity - 1);
            std::ptr::copy_nonoverlapping(bytes.as_ptr(), buffer as *mut u8, n);
            *buffer.add(n) = 0;
        }
        bytes.len()
    })
}

/// Parses a JSON model configuration into a model handle.
///
/// On success writes the handle to `out_model`; free it with
/// [`mosim_model_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string; `out_model` must be a valid
/// pointer to a pointer slot.
#[no_mangle]
pub unsafe extern "C" fn mosim_model_from_json(
    json: *const c_char,
    out_model: *mut *mut MosimModel,
) -> MosimStatus {
    if json.is_null() || out_model.is_null() {
        set_last_error("null pointer argument");
        return MosimStatus::NullPointer;
    }
    let text = match CStr::from_ptr(json).to_str() {
        Ok(t) => t.to_owned(),
        Err(_) => {
            set_last_error("configuration string is not valid UTF-8");
            return MosimStatus::InvalidUtf8;
        }
    };
    guarded(AssertUnwindSafe(move || match parse_config(&text) {
        Ok(config) => {
            *out_model = Box::into_raw(Box::new(MosimModel { config }));
            MosimStatus::Ok
        }
        Err(e) => fail(&e),
    }))
}

/// Releases a model handle. Null is a no-op.
///
/// # Safety
/// `model` must come from [`mosim_model_from_json`] and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn mosim_model_free(model: *mut MosimModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Writes the model dimension (number of components) to `out_dim`.
///
/// # Safety
/// `model` must be a live handle; `out_dim` must be writable.
#[no_mangle]
pub unsafe extern "C" fn mosim_model_dim(model: *const MosimModel, out_dim: *mut u32) -> MosimStatus {
    if model.is_null() || out_dim.is_null() {
        set_last_error("null pointer argument");
        return MosimStatus::NullPointer;
    }
    *out_dim = (*model).config.model.dim() as u32;
    MosimStatus::Ok
}

/// Evaluates the exact joint survival probability
/// `P(tau_1 > times[0], …, tau_d > times[d-1])`.
///
/// Returns `Unsupported` when the model admits no exact method (for example
/// heterogeneous frailty triggers, or looping models off their grid).
///
/// # Safety
/// `times` must point to `num_times` readable doubles; `out_probability`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn mosim_survival(
    model: *const MosimModel,
    times: *const f64,
    num_times: usize,
    out_probability: *mut f64,
) -> MosimStatus {
    if model.is_null() || times.is_null() || out_probability.is_null() {
        set_last_error("null pointer argument");
        return MosimStatus::NullPointer;
    }
    let t = std::slice::from_raw_parts(times, num_times);
    let config = &(*model).config;
    guarded(AssertUnwindSafe(|| match survival(config, t) {
        Ok(p) => {
            *out_probability = p;
            MosimStatus::Ok
        }
        Err(e) => fail(&e),
    }))
}

/// Simulates `num_paths` independent paths and writes the default times
/// path-major into `out_default_times` (`num_paths * dim` doubles).
/// Components surviving the horizon are written as `INFINITY`. Identical
/// `(configuration, seed)` pairs produce identical output.
///
/// # Safety
/// `out_default_times` must point to `capacity` writable doubles with
/// `capacity >= num_paths * dim`.
#[no_mangle]
pub unsafe extern "C" fn mosim_simulate(
    model: *const MosimModel,
    num_paths: u64,
    seed: u64,
    out_default_times: *mut f64,
    capacity: usize,
) -> MosimStatus {
    if model.is_null() || out_default_times.is_null() {
        set_last_error("null pointer argument");
        return MosimStatus::NullPointer;
    }
    let config = &(*model).config;
    let dim = config.model.dim();
    let needed = num_paths as usize * dim;
    if capacity < needed {
        set_last_error(&format!("buffer holds {capacity} doubles, need {needed}"));
        return MosimStatus::BufferTooSmall;
    }
    let out = std::slice::from_raw_parts_mut(out_default_times, needed);
    guarded(AssertUnwindSafe(|| match simulate_paths(config, num_paths, seed, false) {
        Ok(result) => {
            for (rec, chunk) in result.records.iter().zip(out.chunks_mut(dim)) {
                chunk.copy_from_slice(&rec.taus);
            }
            MosimStatus::Ok
        }
        Err(e) => fail(&e),
    }))
}
