//! C ABI over the core library: opaque surface handles, integer error
//! codes mirroring the CLI exit codes, and a thread-local last-error
//! message. The header is generated into include/causal_locus.h by the
//! build script.

use std::cell::RefCell;
use std::ffi::{c_char, c_double, c_int, CStr, CString};
use std::ptr;

use causal_locus::catalog;
use causal_locus::expr::parse_with_vars;
use causal_locus::hypersurface::{CausalClass, GraphSurface};
use causal_locus::locus;
use causal_locus::metric::MetricChart;

/// Success.
pub const CL_OK: c_int = 0;
/// A required pointer argument was null.
pub const CL_ERR_NULL_ARGUMENT: c_int = 1;
/// Input text failed to parse.
pub const CL_ERR_PARSE: c_int = 2;
/// Inputs parsed but failed validation or a precondition.
pub const CL_ERR_VALIDATION: c_int = 3;
/// A numerical procedure failed to converge or left its domain.
pub const CL_ERR_NUMERIC: c_int = 4;

/// Causal classification constants returned in `ClPointData::cls`.
pub const CL_CLASS_SPACELIKE: c_int = 0;
pub const CL_CLASS_TIMELIKE: c_int = 1;
pub const CL_CLASS_LIGHTLIKE_NONDEGENERATE: c_int = 2;
pub const CL_CLASS_LIGHTLIKE_DEGENERATE: c_int = 3;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(code: c_int, message: String) -> c_int {
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(message).ok();
    });
    code
}

/// Opaque handle to a graph hypersurface in a Lorentzian chart.
pub struct ClSurface {
    inner: GraphSurface,
}

/// Point-analysis results; `h_mean` is NaN on the light-like set.
#[repr(C)]
pub struct ClPointData {
    pub b: c_double,
    pub a: c_double,
    pub theta: c_double,
    pub h_mean: c_double,
    pub cls: c_int,
}

/// Verdict and residual of the light-like line containment check.
#[repr(C)]
pub struct ClLineCheck {
    pub max_residual: c_double,
    pub all_degenerate: c_int,
    pub verdict: c_int,
}

fn class_code(cls: CausalClass) -> c_int {
    match cls {
        CausalClass::Spacelike => CL_CLASS_SPACELIKE,
        CausalClass::Timelike => CL_CLASS_TIMELIKE,
        CausalClass::LightlikeNondegenerate => CL_CLASS_LIGHTLIKE_NONDEGENERATE,
        CausalClass::LightlikeDegenerate => CL_CLASS_LIGHTLIKE_DEGENERATE,
    }
}

/// # Safety
/// `text` must be a valid NUL-terminated string.
unsafe fn cstr<'a>(text: *const c_char) -> Option<&'a str> {
    if text.is_null() {
        return None;
    }
    unsafe { CStr::from_ptr(text) }.to_str().ok()
}

/// Create a graph surface over Minkowski space from an expression in the
/// variables x1…xn. On success writes an owned handle to `out`.
///
/// # Safety
/// `f` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_surface_new_minkowski(
    n: usize,
    f: *const c_char,
    out: *mut *mut ClSurface,
) -> c_int {
    if out.is_null() {
        return CL_ERR_NULL_ARGUMENT;
    }
    let Some(text) = (unsafe { cstr(f) }) else {
        return set_error(CL_ERR_NULL_ARGUMENT, "f is null or not UTF-8".into());
    };
    if n == 0 {
        return set_error(CL_ERR_VALIDATION, "n must be positive".into());
    }
    let vars: Vec<String> = (1..=n).map(|i| format!("x{i}")).collect();
    let var_refs: Vec<&str> = vars.iter().map(|s| s.as_str()).collect();
    let expr = match parse_with_vars(text, &var_refs) {
        Ok(e) => e,
        Err(e) => return set_error(CL_ERR_PARSE, e.to_string()),
    };
    match GraphSurface::new(n, expr, vars, MetricChart::minkowski(n + 1)) {
        Ok(s) => {
            unsafe { *out = Box::into_raw(Box::new(ClSurface { inner: s })) };
            CL_OK
        }
        Err(e) => set_error(CL_ERR_VALIDATION, e.to_string()),
    }
}

/// Create a surface from the builtin example catalog (e.g. "F1",
/// "kobayashi"). The entry self-checks its closed-form oracle on load.
///
/// # Safety
/// `id` must be a valid NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_surface_from_example(
    id: *const c_char,
    out: *mut *mut ClSurface,
) -> c_int {
    if out.is_null() {
        return CL_ERR_NULL_ARGUMENT;
    }
    let Some(id) = (unsafe { cstr(id) }) else {
        return set_error(CL_ERR_NULL_ARGUMENT, "id is null or not UTF-8".into());
    };
    let entry = match catalog::get(id) {
        Ok(e) => e,
        Err(e) => return set_error(CL_ERR_VALIDATION, e.to_string()),
    };
    let Some(surface) = entry.surface() else {
        return set_error(CL_ERR_VALIDATION, format!("example \"{id}\" is not a surface"));
    };
    unsafe { *out = Box::into_raw(Box::new(ClSurface { inner: surface.clone() })) };
    CL_OK
}

/// Domain dimension n of the surface.
///
/// # Safety
/// `s` must be a handle returned by a constructor and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn cl_surface_dim(s: *const ClSurface) -> usize {
    if s.is_null() {
        return 0;
    }
    unsafe { &*s }.inner.n()
}

/// Classify a domain point and report B, A, √|B| and the mean curvature.
///
/// # Safety
/// `point` must reference `len` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_point_analyze(
    s: *const ClSurface,
    point: *const c_double,
    len: usize,
    out: *mut ClPointData,
) -> c_int {
    if s.is_null() || point.is_null() || out.is_null() {
        return CL_ERR_NULL_ARGUMENT;
    }
    let surface = &unsafe { &*s }.inner;
    let p = unsafe { std::slice::from_raw_parts(point, len) };
    if len != surface.n() {
        return set_error(
            CL_ERR_VALIDATION,
            format!("point has {len} coordinates, surface domain has {}", surface.n()),
        );
    }
    match surface.point_report_default(p) {
        Ok(r) => {
            unsafe {
                *out = ClPointData {
                    b: r.b,
                    a: r.a,
                    theta: r.theta,
                    h_mean: r.h_mean.unwrap_or(f64::NAN),
                    cls: class_code(r.cls),
                };
            }
            CL_OK
        }
        Err(e) => set_error(CL_ERR_NUMERIC, e.to_string()),
    }
}

/// Run the light-like line containment check from a degenerate point.
///
/// # Safety
/// `origin` must reference `len` doubles; `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn cl_verify_lightline(
    s: *const ClSurface,
    origin: *const c_double,
    len: usize,
    half_length: c_double,
    step: c_double,
    tol: c_double,
    out: *mut ClLineCheck,
) -> c_int {
    if s.is_null() || origin.is_null() || out.is_null() {
        return CL_ERR_NULL_ARGUMENT;
    }
    let surface = &unsafe { &*s }.inner;
    let o = unsafe { std::slice::from_raw_parts(origin, len) };
    if len != surface.n() {
        return set_error(
            CL_ERR_VALIDATION,
            format!("origin has {len} coordinates, surface domain has {}", surface.n()),
        );
    }
    match locus::verify_lightline(surface, o, half_length, step, tol) {
        Ok(rep) => {
            unsafe {
                *out = ClLineCheck {
                    max_residual: rep.max_residual,
                    all_degenerate: rep.all_degenerate as c_int,
                    verdict: rep.verdict as c_int,
                };
            }
            CL_OK
        }
        Err(e) => {
            let code = match e {
                locus::LocusError::CorrectorDiverged(_) | locus::LocusError::Geodesic(_) => {
                    CL_ERR_NUMERIC
                }
                _ => CL_ERR_VALIDATION,
            };
            set_error(code, e.to_string())
        }
    }
}

/// Release a surface handle. Null is ignored.
///
/// # Safety
/// `s` must be a handle returned by a constructor, freed at most once.
#[no_mangle]
pub unsafe extern "C" fn cl_surface_free(s: *mut ClSurface) {
    if !s.is_null() {
        drop(unsafe { Box::from_raw(s) });
    }
}

/// Copy the last error message on this thread into `buf` (truncated,
/// always NUL-terminated). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must reference `len` writable bytes (or be null to query length).
#[no_mangle]
pub unsafe extern "C" fn cl_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|slot| {
        let slot = slot.borrow();
        let Some(msg) = slot.as_ref() else {
            if !buf.is_null() && len > 0 {
                unsafe { *buf = 0 };
            }
            return 0;
        };
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr() as *const c_char, buf, n);
                *buf.add(n) = 0;
            }
        }
        bytes.len()
    })
}
