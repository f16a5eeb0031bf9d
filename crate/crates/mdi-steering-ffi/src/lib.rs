//! C ABI for the steering library: opaque handles over the core types, error
//! codes with a retrievable message, and a generated header (see `build.rs`,
//! which writes `include/mdi_steering.h`).
//!
//! Conventions: every fallible function returns an [`MdiStatus`] and writes
//! its result through out-pointers; out-pointers are written only on
//! [`MdiStatus::Ok`]. On any other status, [`mdi_last_error_message`] returns
//! a NUL-terminated description valid on the calling thread until its next
//! failing call. Handles are freed exactly once by their matching `_free`
//! function; `_free` accepts NULL. Outcome indices are 0-based here (the CLI
//! speaks 1-based to match the published column names).

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use mdi_steering::error::Error;
use mdi_steering::mdi::{mdi_sm_avg, mdi_sm_lb, CorrelationTensor, QuantumInputs};
use mdi_steering::quantum::{pauli_mub_assembly, werner_state};
use mdi_steering::robustness::hierarchy_report;

/// Status codes for every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MdiStatus {
    Ok = 0,
    /// A required pointer argument was NULL.
    NullPointer = 1,
    /// A string argument was not valid UTF-8.
    Utf8 = 2,
    /// JSON parsing or serialization failed.
    Json = 3,
    /// Arguments were structurally valid but semantically rejected.
    InvalidArgument = 4,
    /// The SDP solver could not certify a solution.
    SolverFailure = 5,
    /// Unexpected internal failure (a bug; the message has details).
    Internal = 6,
}

/// Opaque handle over a validated correlation table.
pub struct MdiCorrelations {
    inner: CorrelationTensor,
}

/// Opaque handle over a validated quantum-input ensemble.
pub struct MdiInputs {
    inner: QuantumInputs,
}

/// Reference bounds for a Werner state, all from certified solves.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MdiWernerBounds {
    /// Averaged measurement-device-independent steering measure.
    pub s_lb: f64,
    /// Steering robustness of the three-MUB assemblage.
    pub sr: f64,
    /// Entanglement robustness of the state.
    pub er: f64,
    /// Incompatibility robustness of the three-MUB assembly.
    pub ir: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn fail(status: MdiStatus, message: &str) -> MdiStatus {
    let sanitized: String = message.chars().filter(|c| *c != '\0').collect();
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
    status
}

fn fail_error(e: &Error) -> MdiStatus {
    let status = match e {
        Error::Json(_) => MdiStatus::Json,
        Error::SolverFailure(_) | Error::Infeasible(_) | Error::EigenConvergence { .. } => {
            MdiStatus::SolverFailure
        }
        Error::Io(_) => MdiStatus::Internal,
        _ => MdiStatus::InvalidArgument,
    };
    fail(status, &e.to_string())
}

/// Runs a body that may touch library code, converting panics into
/// [`MdiStatus::Internal`] instead of unwinding across the ABI.
fn guarded(body: impl FnOnce() -> MdiStatus) -> MdiStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(_) => fail(MdiStatus::Internal, "internal panic"),
    }
}

/// # Safety
/// `text` must be a valid NUL-terminated string or NULL.
unsafe fn parse_json<T: serde::de::DeserializeOwned>(
    text: *const c_char,
) -> Result<T, MdiStatus> {
    if text.is_null() {
        return Err(fail(MdiStatus::NullPointer, "NULL JSON argument"));
    }
    let text = CStr::from_ptr(text)
        .to_str()
        .map_err(|e| fail(MdiStatus::Utf8, &format!("argument is not UTF-8: {e}")))?;
    serde_json::from_str(text).map_err(|e| fail(MdiStatus::Json, &e.to_string()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mdi_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Description of the calling thread's most recent failure; empty string if
/// none. Valid until the next failing call on this thread.
#[no_mangle]
pub extern "C" fn mdi_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// Parses a correlation table from JSON into a new handle.
///
/// # Safety
/// `json` must be NUL-terminated or NULL; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mdi_correlations_from_json(
    json: *const c_char,
    out: *mut *mut MdiCorrelations,
) -> MdiStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MdiStatus::NullPointer, "NULL out-pointer");
        }
        match parse_json::<CorrelationTensor>(json) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MdiCorrelations { inner }));
                MdiStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Frees a correlation handle; NULL is a no-op.
///
/// # Safety
/// `p` must be a pointer returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mdi_correlations_free(p: *mut MdiCorrelations) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Creates the six-state Pauli input ensemble.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mdi_inputs_pauli(out: *mut *mut MdiInputs) -> MdiStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MdiStatus::NullPointer, "NULL out-pointer");
        }
        *out = Box::into_raw(Box::new(MdiInputs { inner: QuantumInputs::pauli() }));
        MdiStatus::Ok
    })
}

/// Parses a quantum-input ensemble from JSON into a new handle.
///
/// # Safety
/// `json` must be NUL-terminated or NULL; `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mdi_inputs_from_json(
    json: *const c_char,
    out: *mut *mut MdiInputs,
) -> MdiStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MdiStatus::NullPointer, "NULL out-pointer");
        }
        match parse_json::<QuantumInputs>(json) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(MdiInputs { inner }));
                MdiStatus::Ok
            }
            Err(status) => status,
        }
    })
}

/// Frees an input-ensemble handle; NULL is a no-op.
///
/// # Safety
/// `p` must be a pointer returned by this library, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn mdi_inputs_free(p: *mut MdiInputs) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Certified single-outcome lower bound max{W_b − 1, 0} on the steering
/// measure, conditioning on 0-based outcome `outcome`.
///
/// # Safety
/// `p` and `inputs` must be live handles from this library; `value` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mdi_measure_lb(
    p: *const MdiCorrelations,
    inputs: *const MdiInputs,
    outcome: u32,
    value: *mut f64,
) -> MdiStatus {
    guarded(|| {
        if p.is_null() || inputs.is_null() || value.is_null() {
            return fail(MdiStatus::NullPointer, "NULL argument");
        }
        let table = &(*p).inner;
        let n_outcomes = table.dims().1;
        if outcome as usize >= n_outcomes {
            return fail(
                MdiStatus::InvalidArgument,
                &format!("outcome {outcome} out of range (table has {n_outcomes})"),
            );
        }
        match mdi_sm_lb(table, &(*inputs).inner, outcome as usize) {
            Ok((v, _)) => {
                *value = v;
                MdiStatus::Ok
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Certified averaged estimator max{(1/4)Σ_b W_b − 1, 0} over all four
/// outcomes.
///
/// # Safety
/// `p` and `inputs` must be live handles from this library; `value` must be
/// valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mdi_measure_avg(
    p: *const MdiCorrelations,
    inputs: *const MdiInputs,
    value: *mut f64,
) -> MdiStatus {
    guarded(|| {
        if p.is_null() || inputs.is_null() || value.is_null() {
            return fail(MdiStatus::NullPointer, "NULL argument");
        }
        match mdi_sm_avg(&(*p).inner, &(*inputs).inner) {
            Ok(v) => {
                *value = v;
                MdiStatus::Ok
            }
            Err(e) => fail_error(&e),
        }
    })
}

/// Computes all four reference bounds for the visibility-`v` Werner state
/// measured with the three Pauli mutually unbiased bases.
///
/// # Safety
/// `out` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn mdi_werner_bounds(v: f64, out: *mut MdiWernerBounds) -> MdiStatus {
    guarded(|| {
        if out.is_null() {
            return fail(MdiStatus::NullPointer, "NULL out-pointer");
        }
        let rho = match werner_state(v) {
            Ok(rho) => rho,
            Err(e) => return fail_error(&e),
        };
        match hierarchy_report(&rho, &pauli_mub_assembly(), &QuantumInputs::pauli()) {
            Ok(report) => {
                *out = MdiWernerBounds {
                    s_lb: report.s_lb,
                    sr: report.sr,
                    er: report.er,
                    ir: report.ir,
                };
                MdiStatus::Ok
            }
            Err(e) => fail_error(&e),
        }
    })
}
