//! C ABI for phasecons.
//!
//! Every function returns an `int32_t` status (see the `PHASECONS_*`
//! constants) and writes results through out-pointers. On failure a
//! message is kept per thread and can be copied out with
//! [`phasecons_last_error_message`]. Panics never cross the boundary.
//!
//! Handles (`PhExpr`, `PhModel`) are opaque and owned by the caller, who
//! releases them with the matching `_free` function. Strings returned by
//! the library are released with [`phasecons_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use libc::{c_char, size_t};

use phasecons::cli::{consistency_report, CheckSettings, CliError, ModelSpec};
use phasecons::cmcheck::{cm_test, CmStatus};
use phasecons::consistency::{verdict, SeparableAD, Verdict, VerdictOptions};
use phasecons::dfinversion::eddington_invert_from;
use phasecons::expr::{parse, Expr};
use phasecons::fracops::{frac_derivative, rl_signed};
use phasecons::report::to_json_string;
use phasecons::specfun::{ml_eval, MLSpec};
use phasecons::Error;

pub const PHASECONS_OK: i32 = 0;
pub const PHASECONS_NULL_POINTER: i32 = 1;
pub const PHASECONS_INVALID_ARGUMENT: i32 = 2;
pub const PHASECONS_NUMERICAL: i32 = 3;
pub const PHASECONS_PANIC: i32 = 4;

pub const PHASECONS_VERDICT_CONSISTENT: i32 = 0;
pub const PHASECONS_VERDICT_INCONSISTENT: i32 = 1;
pub const PHASECONS_VERDICT_INCONCLUSIVE: i32 = 2;

pub const PHASECONS_CM_PASS: i32 = 0;
pub const PHASECONS_CM_FAIL: i32 = 1;
pub const PHASECONS_CM_INCONCLUSIVE: i32 = 2;

/// A parsed single-variable expression.
pub struct PhExpr {
    expr: Expr,
}

/// A separable augmented density read from a model description.
pub struct PhModel {
    spec: ModelSpec,
    ad: SeparableAD,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn null(what: &str) -> Self {
        Self { code: PHASECONS_NULL_POINTER, message: format!("{what} is null") }
    }

    fn invalid(message: impl Into<String>) -> Self {
        Self { code: PHASECONS_INVALID_ARGUMENT, message: message.into() }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_input_error() { PHASECONS_INVALID_ARGUMENT } else { PHASECONS_NUMERICAL };
        Self { code, message: e.to_string() }
    }
}

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let code = match e {
            CliError::Input(_) => PHASECONS_INVALID_ARGUMENT,
            CliError::Numerical(_) => PHASECONS_NUMERICAL,
        };
        Self { code, message: e.to_string() }
    }
}

fn set_last_error(message: &str) {
    let c = CString::new(message.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

/// Runs `body`, records any failure and converts it to a status code.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> i32 {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|slot| *slot.borrow_mut() = None);
            PHASECONS_OK
        }
        Ok(Err(f)) => {
            set_last_error(&f.message);
            f.code
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(&format!("internal panic: {msg}"));
            PHASECONS_PANIC
        }
    }
}

unsafe fn read_str<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(Failure::null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure::invalid(format!("{what} is not valid UTF-8")))
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| Failure::null(what))
}

/// Copies the calling thread's last error message into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length in
/// bytes, excluding the terminator; 0 when there is no error.
#[no_mangle]
pub unsafe extern "C" fn phasecons_last_error_message(buf: *mut c_char, len: size_t) -> size_t {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

/// Releases a string returned by this library. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn phasecons_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses an expression such as `"pow(x, 0.5)*exp(-x)"`.
#[no_mangle]
pub unsafe extern "C" fn phasecons_expr_parse(src: *const c_char, out: *mut *mut PhExpr) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let expr = parse(read_str(src, "src")?)?;
        *out = Box::into_raw(Box::new(PhExpr { expr }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn phasecons_expr_free(h: *mut PhExpr) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

#[no_mangle]
pub unsafe extern "C" fn phasecons_expr_eval(h: *const PhExpr, x: f64, out: *mut f64) -> i32 {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| Failure::null("expr"))?;
        *out_ref(out, "out")? = h.expr.eval(x)?;
        Ok(())
    })
}

/// E^λ_{p,b}(z).
#[no_mangle]
pub unsafe extern "C" fn phasecons_ml_eval(lambda: f64, p: f64, b: f64, z: f64, out: *mut f64) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ml_eval(&MLSpec::new(lambda, p, b)?, z)?;
        Ok(())
    })
}

/// D^μ_a f(x) for μ ≥ 0.
#[no_mangle]
pub unsafe extern "C" fn phasecons_frac_derivative(h: *const PhExpr, a: f64, mu: f64, x: f64, out: *mut f64) -> i32 {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| Failure::null("expr"))?;
        *out_ref(out, "out")? = frac_derivative(&h.expr, a, mu, x)?;
        Ok(())
    })
}

/// I^λ_a f(x); negative λ gives the derivative of order -λ.
#[no_mangle]
pub unsafe extern "C" fn phasecons_rl_integral(h: *const PhExpr, a: f64, lambda: f64, x: f64, out: *mut f64) -> i32 {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| Failure::null("expr"))?;
        *out_ref(out, "out")? = rl_signed(&h.expr, a, lambda, x)?;
        Ok(())
    })
}

/// Samples (-1)ⁿ f⁽ⁿ⁾ ≥ 0 for n ≤ `n_max` on `grid[0..len]`; writes a
/// `PHASECONS_CM_*` status.
#[no_mangle]
pub unsafe extern "C" fn phasecons_cm_test(
    h: *const PhExpr,
    n_max: size_t,
    grid: *const f64,
    len: size_t,
    out_status: *mut i32,
) -> i32 {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| Failure::null("expr"))?;
        if grid.is_null() {
            return Err(Failure::null("grid"));
        }
        if len == 0 {
            return Err(Failure::invalid("grid is empty"));
        }
        let points = std::slice::from_raw_parts(grid, len);
        let out = out_ref(out_status, "out_status")?;
        *out = match cm_test(&h.expr, n_max, points)?.status {
            CmStatus::Pass => PHASECONS_CM_PASS,
            CmStatus::Fail => PHASECONS_CM_FAIL,
            CmStatus::Inconclusive => PHASECONS_CM_INCONCLUSIVE,
        };
        Ok(())
    })
}

/// g(ℰ) for R = x^{-β}, with the potential part `h` and floor `e0`.
#[no_mangle]
pub unsafe extern "C" fn phasecons_eddington_invert(
    h: *const PhExpr,
    e0: f64,
    beta: f64,
    e: f64,
    out: *mut f64,
) -> i32 {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| Failure::null("expr"))?;
        *out_ref(out, "out")? = eddington_invert_from(&h.expr, e0, beta, e)?;
        Ok(())
    })
}

/// Reads a model from the same JSON accepted by `phasecons check consistency`.
#[no_mangle]
pub unsafe extern "C" fn phasecons_model_from_json(json: *const c_char, out: *mut *mut PhModel) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let spec = ModelSpec::from_json(read_str(json, "json")?)?;
        let ad = spec.augmented_density()?;
        *out = Box::into_raw(Box::new(PhModel { spec, ad }));
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn phasecons_model_free(h: *mut PhModel) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Runs the consistency checks with default settings; writes a
/// `PHASECONS_VERDICT_*` value.
#[no_mangle]
pub unsafe extern "C" fn phasecons_model_verdict(h: *const PhModel, out_verdict: *mut i32) -> i32 {
    guard(|| {
        let h = h.as_ref().ok_or_else(|| Failure::null("model"))?;
        let out = out_ref(out_verdict, "out_verdict")?;
        *out = match verdict(&h.ad, &VerdictOptions::default()).verdict {
            Verdict::Consistent => PHASECONS_VERDICT_CONSISTENT,
            Verdict::Inconsistent => PHASECONS_VERDICT_INCONSISTENT,
            Verdict::Inconclusive => PHASECONS_VERDICT_INCONCLUSIVE,
        };
        Ok(())
    })
}

/// The full JSON report, byte-identical to the CLI's. Free the result with
/// [`phasecons_string_free`].
#[no_mangle]
pub unsafe extern "C" fn phasecons_model_report_json(h: *const PhModel, out: *mut *mut c_char) -> i32 {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = ptr::null_mut();
        let h = h.as_ref().ok_or_else(|| Failure::null("model"))?;
        let report = consistency_report(&h.spec, &CheckSettings::default())?;
        let text = CString::new(to_json_string(&report)).map_err(|_| Failure::invalid("report contains NUL"))?;
        *out = text.into_raw();
        Ok(())
    })
}
