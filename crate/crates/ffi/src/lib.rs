//! C ABI for the exact q-series engine: an opaque engine handle carrying the
//! truncation order, JSON-returning expand/verify/table entry points, and
//! integer error codes. Returned strings are heap-allocated and must be
//! released with `d4frob_string_free`.

use std::ffi::{c_char, c_int, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Success.
pub const D4FROB_OK: c_int = 0;
/// A required pointer argument was null.
pub const D4FROB_ERR_NULL_ARGUMENT: c_int = 1;
/// The target name was not valid UTF-8 or is not in the registry.
pub const D4FROB_ERR_UNKNOWN_TARGET: c_int = 2;
/// The verification ran but at least one check failed (output still written).
pub const D4FROB_ERR_CHECKS_FAILED: c_int = 3;
/// The truncation order was not positive or not a multiple of 1/24.
pub const D4FROB_ERR_INVALID_ORDER: c_int = 4;
/// An internal invariant was violated; no output was written.
pub const D4FROB_ERR_INTERNAL: c_int = 5;

/// Opaque engine handle; holds the truncation order in 24ths of a power of q.
pub struct D4FrobEngine {
    trunc24: i64,
}

/// Create an engine truncating all series at q^(order_num/order_den).
/// Returns null when the order is invalid (must be positive and a multiple
/// of 1/24).
#[no_mangle]
pub extern "C" fn d4frob_engine_new(order_num: i64, order_den: i64) -> *mut D4FrobEngine {
    if order_num <= 0 || order_den <= 0 || (24 * order_num) % order_den != 0 {
        return std::ptr::null_mut();
    }
    Box::into_raw(Box::new(D4FrobEngine { trunc24: 24 * order_num / order_den }))
}

/// Release an engine created by `d4frob_engine_new`. Null is ignored.
#[no_mangle]
pub extern "C" fn d4frob_engine_free(engine: *mut D4FrobEngine) {
    if !engine.is_null() {
        drop(unsafe { Box::from_raw(engine) });
    }
}

/// Release a string returned by any of the JSON entry points. Null is ignored.
#[no_mangle]
pub extern "C" fn d4frob_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(unsafe { CString::from_raw(s) });
    }
}

fn write_out(out: *mut *mut c_char, text: String) -> c_int {
    match CString::new(text) {
        Ok(c) => {
            unsafe { *out = c.into_raw() };
            D4FROB_OK
        }
        Err(_) => D4FROB_ERR_INTERNAL,
    }
}

fn read_name(name: *const c_char) -> Option<String> {
    if name.is_null() {
        return None;
    }
    unsafe { CStr::from_ptr(name) }.to_str().ok().map(str::to_owned)
}

fn guarded(
    engine: *const D4FrobEngine,
    name: *const c_char,
    out: *mut *mut c_char,
    f: impl Fn(i64, &str, *mut *mut c_char) -> c_int,
) -> c_int {
    if engine.is_null() || out.is_null() {
        return D4FROB_ERR_NULL_ARGUMENT;
    }
    let Some(target) = read_name(name) else {
        return if name.is_null() { D4FROB_ERR_NULL_ARGUMENT } else { D4FROB_ERR_UNKNOWN_TARGET };
    };
    let trunc = unsafe { &*engine }.trunc24;
    catch_unwind(AssertUnwindSafe(|| f(trunc, &target, out))).unwrap_or(D4FROB_ERR_INTERNAL)
}

/// Expand a named series; writes a JSON object with exact rational
/// coefficient strings into `*out_json`.
#[no_mangle]
pub extern "C" fn d4frob_expand_json(
    engine: *const D4FrobEngine,
    series_name: *const c_char,
    out_json: *mut *mut c_char,
) -> c_int {
    guarded(engine, series_name, out_json, |trunc, target, out| {
        match d4frob::render::named_series(target, trunc) {
            Some(s) => {
                let v = d4frob::render::series_json(target, &s);
                write_out(out, serde_json::to_string_pretty(&v).unwrap())
            }
            None => D4FROB_ERR_UNKNOWN_TARGET,
        }
    })
}

/// Run a named verification suite ("all" for the whole registry); writes the
/// JSON report list into `*out_json`. Returns `D4FROB_ERR_CHECKS_FAILED`
/// (with the report still written) when any check fails.
#[no_mangle]
pub extern "C" fn d4frob_verify_json(
    engine: *const D4FrobEngine,
    suite_name: *const c_char,
    out_json: *mut *mut c_char,
) -> c_int {
    guarded(engine, suite_name, out_json, |trunc, target, out| {
        match d4frob::report::run_suites(target, trunc) {
            Some(reports) => {
                let ok = reports.iter().all(|r| r.passed());
                let code = write_out(out, serde_json::to_string_pretty(&reports).unwrap());
                if code != D4FROB_OK {
                    code
                } else if ok {
                    D4FROB_OK
                } else {
                    D4FROB_ERR_CHECKS_FAILED
                }
            }
            None => D4FROB_ERR_UNKNOWN_TARGET,
        }
    })
}

/// Produce a named pairing table ("j0", "j1", "duality") as a JSON object
/// with rows of exact rational or symbolic entry strings.
#[no_mangle]
pub extern "C" fn d4frob_table_json(
    engine: *const D4FrobEngine,
    table_name: *const c_char,
    out_json: *mut *mut c_char,
) -> c_int {
    guarded(engine, table_name, out_json, |trunc, target, out| {
        match d4frob::render::table_entries(target, trunc) {
            Some((title, rows)) => {
                let v = d4frob::render::table_json(target, &title, &rows);
                write_out(out, serde_json::to_string_pretty(&v).unwrap())
            }
            None => D4FROB_ERR_UNKNOWN_TARGET,
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    fn call(
        f: extern "C" fn(*const D4FrobEngine, *const c_char, *mut *mut c_char) -> c_int,
        engine: *const D4FrobEngine,
        name: &str,
    ) -> (c_int, Option<String>) {
        let cname = CString::new(name).unwrap();
        let mut out: *mut c_char = std::ptr::null_mut();
        let code = f(engine, cname.as_ptr(), &mut out);
        let text = if out.is_null() {
            None
        } else {
            let s = unsafe { CStr::from_ptr(out) }.to_str().unwrap().to_string();
            d4frob_string_free(out);
            Some(s)
        };
        (code, text)
    }

    #[test]
    fn expand_verify_table_roundtrip() {
        let engine = d4frob_engine_new(2, 1);
        assert!(!engine.is_null());

        let (code, text) = call(d4frob_expand_json, engine, "f0");
        assert_eq!(code, D4FROB_OK);
        let v: serde_json::Value = serde_json::from_str(&text.unwrap()).unwrap();
        assert_eq!(v["terms"][0]["exponent"], "1/2");
        assert_eq!(v["terms"][0]["coefficient"], "1");

        let (code, text) = call(d4frob_verify_json, engine, "halphen");
        assert_eq!(code, D4FROB_OK);
        let v: serde_json::Value = serde_json::from_str(&text.unwrap()).unwrap();
        assert_eq!(v[0]["suite"], "halphen");
        assert_eq!(v[0]["checks"].as_array().unwrap().len(), 3);

        let (code, text) = call(d4frob_table_json, engine, "j0");
        assert_eq!(code, D4FROB_OK);
        let v: serde_json::Value = serde_json::from_str(&text.unwrap()).unwrap();
        assert_eq!(v["rows"][1][1], "2");
        assert_eq!(v["rows"][0][5], "1");

        let (code, _) = call(d4frob_expand_json, engine, "no-such-series");
        assert_eq!(code, D4FROB_ERR_UNKNOWN_TARGET);

        d4frob_engine_free(engine);
    }

    #[test]
    fn error_codes_for_bad_arguments() {
        assert!(d4frob_engine_new(0, 1).is_null());
        assert!(d4frob_engine_new(1, 48).is_null());
        let mut out: *mut c_char = std::ptr::null_mut();
        let code =
            d4frob_expand_json(std::ptr::null(), std::ptr::null(), &mut out as *mut *mut c_char);
        assert_eq!(code, D4FROB_ERR_NULL_ARGUMENT);
        d4frob_string_free(std::ptr::null_mut());
        d4frob_engine_free(std::ptr::null_mut());
    }
}
