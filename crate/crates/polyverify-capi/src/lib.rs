//! C ABI for the verifier: opaque handles, integer status codes, JSON in and
//! out. The generated header lives in `include/polyverify.h`.
//!
//! Conventions: every function that can fail returns a `PvStatusCode`; output
//! objects are returned through `out` pointers and owned by the caller, who
//! frees them with the matching `pv_*_free`. `pv_last_error_message` returns
//! a thread-local description of the most recent failure.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use polyverify::error::Error;
use polyverify::formats::{ProblemJson, VerdictJson};
use polyverify::verifier::{verify, Status, VerificationProblem, Verdict, VerifyOptions};
use polyverify::{Context, Tolerances};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum PvStatusCode {
    PvOk = 0,
    PvErrParse = 1,
    PvErrDimension = 2,
    PvErrDegenerate = 3,
    PvErrInvalidNetwork = 4,
    PvErrIterationLimit = 5,
    PvErrInternal = 6,
    PvErrNullArgument = 7,
    PvErrUtf8 = 8,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let sanitized = msg.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitized).unwrap_or_default();
    });
}

fn code_for(err: &Error) -> PvStatusCode {
    match err {
        Error::Parse(_) => PvStatusCode::PvErrParse,
        Error::DimensionMismatch { .. } => PvStatusCode::PvErrDimension,
        Error::ZeroFunctional => PvStatusCode::PvErrDegenerate,
        Error::Degenerate(_) => PvStatusCode::PvErrDegenerate,
        Error::InvalidNetwork(_) => PvStatusCode::PvErrInvalidNetwork,
        Error::IterationLimit { .. } => PvStatusCode::PvErrIterationLimit,
        Error::Invariant(_) => PvStatusCode::PvErrInternal,
    }
}

fn fail(err: &Error) -> PvStatusCode {
    set_error(&err.to_string());
    code_for(err)
}

fn guarded<F: FnOnce() -> PvStatusCode>(body: F) -> PvStatusCode {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(code) => code,
        Err(_) => {
            set_error("panic across FFI boundary");
            PvStatusCode::PvErrInternal
        }
    }
}

/// Opaque solver context: tolerances plus the LP call counter.
pub struct PvContext {
    inner: Context,
}

/// Opaque verification problem handle.
pub struct PvProblem {
    inner: VerificationProblem,
}

/// Opaque verdict handle.
pub struct PvVerdict {
    inner: Verdict,
    tol: Tolerances,
    exhaustive: bool,
}

/// Last error message of the current thread; valid until the next failing
/// call on this thread. Never null.
#[no_mangle]
pub extern "C" fn pv_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

/// New context with default tolerances.
#[no_mangle]
pub extern "C" fn pv_context_new() -> *mut PvContext {
    Box::into_raw(Box::new(PvContext {
        inner: Context::default(),
    }))
}

/// New context with explicit tolerances (pass a value ≤ 0 to keep a default).
#[no_mangle]
pub extern "C" fn pv_context_with_tolerances(
    eps_zero: f64,
    eps_feas: f64,
    eps_int: f64,
    eps_obj: f64,
) -> *mut PvContext {
    let mut tol = Tolerances::default();
    if eps_zero > 0.0 {
        tol.eps_zero = eps_zero;
    }
    if eps_feas > 0.0 {
        tol.eps_feas = eps_feas;
    }
    if eps_int > 0.0 {
        tol.eps_int = eps_int;
    }
    if eps_obj > 0.0 {
        tol.eps_obj = eps_obj;
    }
    Box::into_raw(Box::new(PvContext {
        inner: Context::new(tol),
    }))
}

/// # Safety
/// `ctx` must be null or a pointer from `pv_context_new`/`pv_context_with_tolerances`.
#[no_mangle]
pub unsafe extern "C" fn pv_context_free(ctx: *mut PvContext) {
    if !ctx.is_null() {
        drop(unsafe { Box::from_raw(ctx) });
    }
}

/// Total LPs solved through this context so far.
///
/// # Safety
/// `ctx` must be null or a valid context handle.
#[no_mangle]
pub unsafe extern "C" fn pv_context_lp_calls(ctx: *const PvContext) -> u64 {
    if ctx.is_null() {
        return 0;
    }
    unsafe { &*ctx }.inner.lp_calls()
}

unsafe fn str_arg<'a>(ptr: *const c_char) -> Result<&'a str, PvStatusCode> {
    if ptr.is_null() {
        set_error("null string argument");
        return Err(PvStatusCode::PvErrNullArgument);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| {
        set_error("string argument is not valid UTF-8");
        PvStatusCode::PvErrUtf8
    })
}

/// Parse a problem bundle (network + input/output polytopes) from JSON.
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_problem_from_json(
    ctx: *const PvContext,
    json: *const c_char,
    out: *mut *mut PvProblem,
) -> PvStatusCode {
    guarded(|| {
        if ctx.is_null() || out.is_null() {
            set_error("null argument");
            return PvStatusCode::PvErrNullArgument;
        }
        let text = match str_arg(json) {
            Ok(t) => t,
            Err(code) => return code,
        };
        let parsed: ProblemJson = match serde_json::from_str(text) {
            Ok(p) => p,
            Err(e) => {
                set_error(&format!("line {}, column {}: {e}", e.line(), e.column()));
                return PvStatusCode::PvErrParse;
            }
        };
        match parsed.to_problem(&(*ctx).inner) {
            Ok(problem) => {
                *out = Box::into_raw(Box::new(PvProblem { inner: problem }));
                PvStatusCode::PvOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `problem` must be null or a pointer from `pv_problem_from_json`.
#[no_mangle]
pub unsafe extern "C" fn pv_problem_free(problem: *mut PvProblem) {
    if !problem.is_null() {
        drop(unsafe { Box::from_raw(problem) });
    }
}

/// Decide the problem. `exhaustive` collects every violation instead of
/// stopping at the first.
///
/// # Safety
/// All pointers must be valid; `out` receives an owned verdict handle.
#[no_mangle]
pub unsafe extern "C" fn pv_verify(
    ctx: *const PvContext,
    problem: *const PvProblem,
    exhaustive: bool,
    out: *mut *mut PvVerdict,
) -> PvStatusCode {
    guarded(|| {
        if ctx.is_null() || problem.is_null() || out.is_null() {
            set_error("null argument");
            return PvStatusCode::PvErrNullArgument;
        }
        let context = &(*ctx).inner;
        let opts = VerifyOptions {
            exhaustive,
            parallel: true,
        };
        match verify(&(*problem).inner, &opts, context) {
            Ok(verdict) => {
                *out = Box::into_raw(Box::new(PvVerdict {
                    inner: verdict,
                    tol: context.tol,
                    exhaustive,
                }));
                PvStatusCode::PvOk
            }
            Err(e) => fail(&e),
        }
    })
}

/// # Safety
/// `verdict` must be null or a pointer from `pv_verify`.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_free(verdict: *mut PvVerdict) {
    if !verdict.is_null() {
        drop(unsafe { Box::from_raw(verdict) });
    }
}

/// True when the network maps the whole input polytope into the output polytope.
///
/// # Safety
/// `verdict` must be null or a valid verdict handle.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_is_sat(verdict: *const PvVerdict) -> bool {
    if verdict.is_null() {
        return false;
    }
    unsafe { &*verdict }.inner.status == Status::Sat
}

/// Dimension of the counterexample point; 0 for SAT verdicts.
///
/// # Safety
/// `verdict` must be null or a valid verdict handle.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_witness_len(verdict: *const PvVerdict) -> usize {
    if verdict.is_null() {
        return 0;
    }
    unsafe { &*verdict }
        .inner
        .violation
        .as_ref()
        .map(|v| v.witness.len())
        .unwrap_or(0)
}

/// Copy the counterexample into `buf` (length `len` ≥ witness length).
///
/// # Safety
/// `buf` must point to at least `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_witness(
    verdict: *const PvVerdict,
    buf: *mut f64,
    len: usize,
) -> PvStatusCode {
    guarded(|| {
        if verdict.is_null() || buf.is_null() {
            set_error("null argument");
            return PvStatusCode::PvErrNullArgument;
        }
        let Some(violation) = (*verdict).inner.violation.as_ref() else {
            set_error("verdict is SAT: no witness");
            return PvStatusCode::PvErrDegenerate;
        };
        if len < violation.witness.len() {
            set_error("witness buffer too small");
            return PvStatusCode::PvErrDimension;
        }
        for (i, v) in violation.witness.iter().enumerate() {
            *buf.add(i) = *v;
        }
        PvStatusCode::PvOk
    })
}

/// Violated output-constraint index, or -1 for SAT verdicts.
///
/// # Safety
/// `verdict` must be null or a valid verdict handle.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_constraint_index(verdict: *const PvVerdict) -> i64 {
    if verdict.is_null() {
        return -1;
    }
    unsafe { &*verdict }
        .inner
        .violation
        .as_ref()
        .map(|v| v.constraint_index as i64)
        .unwrap_or(-1)
}

/// Violation margin at the witness, or NaN for SAT verdicts.
///
/// # Safety
/// `verdict` must be null or a valid verdict handle.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_margin(verdict: *const PvVerdict) -> f64 {
    if verdict.is_null() {
        return f64::NAN;
    }
    unsafe { &*verdict }
        .inner
        .violation
        .as_ref()
        .map(|v| v.margin)
        .unwrap_or(f64::NAN)
}

/// # Safety
/// `verdict` must be null or a valid verdict handle.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_regions_traversed(verdict: *const PvVerdict) -> u64 {
    if verdict.is_null() {
        return 0;
    }
    unsafe { &*verdict }.inner.stats.regions_traversed as u64
}

/// # Safety
/// `verdict` must be null or a valid verdict handle.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_regions_verified(verdict: *const PvVerdict) -> u64 {
    if verdict.is_null() {
        return 0;
    }
    unsafe { &*verdict }.inner.stats.regions_verified as u64
}

/// # Safety
/// `verdict` must be null or a valid verdict handle.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_lp_calls(verdict: *const PvVerdict) -> u64 {
    if verdict.is_null() {
        return 0;
    }
    unsafe { &*verdict }.inner.stats.lp_calls
}

/// Full verdict report as JSON; free the string with `pv_string_free`.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn pv_verdict_report_json(
    verdict: *const PvVerdict,
    out: *mut *mut c_char,
) -> PvStatusCode {
    guarded(|| {
        if verdict.is_null() || out.is_null() {
            set_error("null argument");
            return PvStatusCode::PvErrNullArgument;
        }
        let v = &*verdict;
        let report = VerdictJson::from_verdict(&v.inner, &v.tol, v.exhaustive);
        let text = serde_json::to_string_pretty(&report).unwrap_or_default();
        match CString::new(text) {
            Ok(s) => {
                *out = s.into_raw();
                PvStatusCode::PvOk
            }
            Err(_) => {
                set_error("report contained an interior NUL");
                PvStatusCode::PvErrInternal
            }
        }
    })
}

/// Free a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library.
#[no_mangle]
pub unsafe extern "C" fn pv_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ptr;

    const BUNDLE: &str = r#"{
      "network": {"kind": "relu",
                  "layers": [{"W": [[1.0]], "b": [0.0], "nonlinear": true},
                             {"W": [[1.0]], "b": [0.0], "nonlinear": false}]},
      "input_polytope": {"dim": 1, "constraints": [{"w": [-1.0], "c": -1.0},
                                                    {"w": [1.0], "c": -1.0}]},
      "output_polytope": {"dim": 1, "constraints": [{"w": [-1.0], "c": 0.0},
                                                     {"w": [1.0], "c": -0.5}]}
    }"#;

    fn cstring(s: &str) -> CString {
        CString::new(s).unwrap()
    }

    #[test]
    fn verify_round_trip_through_c_abi() {
        unsafe {
            let ctx = pv_context_new();
            let json = cstring(BUNDLE);
            let mut problem: *mut PvProblem = ptr::null_mut();
            assert_eq!(
                pv_problem_from_json(ctx, json.as_ptr(), &mut problem),
                PvStatusCode::PvOk
            );
            let mut verdict: *mut PvVerdict = ptr::null_mut();
            assert_eq!(pv_verify(ctx, problem, false, &mut verdict), PvStatusCode::PvOk);
            assert!(!pv_verdict_is_sat(verdict));
            assert_eq!(pv_verdict_witness_len(verdict), 1);
            let mut buf = [0.0f64; 1];
            assert_eq!(
                pv_verdict_witness(verdict, buf.as_mut_ptr(), 1),
                PvStatusCode::PvOk
            );
            assert!((buf[0] - 1.0).abs() < 1e-9);
            assert_eq!(pv_verdict_constraint_index(verdict), 1);
            assert!((pv_verdict_margin(verdict) - 0.5).abs() < 1e-9);
            assert!(pv_verdict_lp_calls(verdict) > 0);
            assert!(pv_context_lp_calls(ctx) >= pv_verdict_lp_calls(verdict));

            let mut report: *mut c_char = ptr::null_mut();
            assert_eq!(pv_verdict_report_json(verdict, &mut report), PvStatusCode::PvOk);
            let text = CStr::from_ptr(report).to_str().unwrap();
            assert!(text.contains("\"status\": \"UNSAT\""));
            pv_string_free(report);

            pv_verdict_free(verdict);
            pv_problem_free(problem);
            pv_context_free(ctx);
        }
    }

    #[test]
    fn parse_errors_set_message_and_code() {
        unsafe {
            let ctx = pv_context_new();
            let bad = cstring("{\"network\": nonsense");
            let mut problem: *mut PvProblem = ptr::null_mut();
            let code = pv_problem_from_json(ctx, bad.as_ptr(), &mut problem);
            assert_eq!(code, PvStatusCode::PvErrParse);
            let msg = CStr::from_ptr(pv_last_error_message()).to_str().unwrap();
            assert!(msg.contains("line"), "message was: {msg}");
            pv_context_free(ctx);
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            let mut problem: *mut PvProblem = ptr::null_mut();
            let json = cstring(BUNDLE);
            assert_eq!(
                pv_problem_from_json(ptr::null(), json.as_ptr(), &mut problem),
                PvStatusCode::PvErrNullArgument
            );
            let ctx = pv_context_new();
            assert_eq!(
                pv_problem_from_json(ctx, ptr::null(), &mut problem),
                PvStatusCode::PvErrNullArgument
            );
            assert_eq!(pv_verdict_witness_len(ptr::null()), 0);
            assert!(pv_verdict_margin(ptr::null()).is_nan());
            pv_context_free(ctx);
            pv_context_free(ptr::null_mut());
        }
    }

    #[test]
    fn degenerate_input_maps_to_code() {
        unsafe {
            let ctx = pv_context_new();
            // Unbounded input polytope.
            let bundle = BUNDLE.replace(
                r#"{"w": [-1.0], "c": -1.0},
                                                    {"w": [1.0], "c": -1.0}"#,
                r#"{"w": [-1.0], "c": -1.0}"#,
            );
            let json = cstring(&bundle);
            let mut problem: *mut PvProblem = ptr::null_mut();
            assert_eq!(
                pv_problem_from_json(ctx, json.as_ptr(), &mut problem),
                PvStatusCode::PvErrDegenerate
            );
            pv_context_free(ctx);
        }
    }
}
