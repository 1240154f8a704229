//! C ABI for the draag toolkit.
//!
//! Conventions: every fallible call returns a [`DraagStatus`]; on failure a
//! thread-local message is readable through [`draag_last_error_message`]
//! until the next failing call on the same thread. Graphs travel across the
//! boundary as opaque handles created by [`draag_graph_parse`] and released
//! by [`draag_graph_free`]. Composite results are returned as JSON strings
//! allocated by this library and released by [`draag_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use draag::report::{build_analysis, SumModeRequest};
use draag::series::SumMode;
use draag::words::ZVector;
use draag::Graph;

/// Status code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DraagStatus {
    Ok = 0,
    /// Malformed input: JSON, schema, ranges, encodings.
    InvalidArgument = 1,
    /// Well-formed input outside an operation's domain.
    Domain = 2,
    /// A required pointer was null.
    NullPointer = 3,
    /// The caller's buffer is too small; the required length is reported.
    BufferTooSmall = 4,
    /// Unexpected internal failure.
    Internal = 5,
}

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::new("").unwrap());
}

fn set_error(message: &str) {
    let sanitised = message.replace('\0', " ");
    LAST_ERROR.with(|slot| {
        *slot.borrow_mut() = CString::new(sanitised).unwrap();
    });
}

fn fail(status: DraagStatus, message: &str) -> DraagStatus {
    set_error(message);
    status
}

/// Opaque graph handle.
pub struct DraagGraph {
    inner: Graph,
}

const VERSION: &str = concat!(env!("CARGO_PKG_VERSION"), "\0");

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn draag_version() -> *const c_char {
    VERSION.as_ptr() as *const c_char
}

/// Message of the last failure on this thread. The pointer stays valid
/// until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn draag_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ptr())
}

unsafe fn read_utf8<'a>(ptr: *const c_char) -> Result<&'a str, DraagStatus> {
    if ptr.is_null() {
        return Err(fail(DraagStatus::NullPointer, "null string pointer"));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|e| fail(DraagStatus::InvalidArgument, &format!("invalid UTF-8: {e}")))
}

fn guarded(f: impl FnOnce() -> DraagStatus) -> DraagStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => fail(DraagStatus::Internal, "internal panic"),
    }
}

fn string_out(value: String, out: *mut *mut c_char) -> DraagStatus {
    let c = match CString::new(value) {
        Ok(c) => c,
        Err(e) => return fail(DraagStatus::Internal, &e.to_string()),
    };
    unsafe {
        *out = c.into_raw();
    }
    DraagStatus::Ok
}

/// Parse a graph document `{"vertices": n, "edges": [[i,j],...]}` into a
/// handle. The caller owns the handle and must release it with
/// [`draag_graph_free`].
///
/// # Safety
/// `json` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn draag_graph_parse(
    json: *const c_char,
    out: *mut *mut DraagGraph,
) -> DraagStatus {
    guarded(|| {
        if out.is_null() {
            return fail(DraagStatus::NullPointer, "null output pointer");
        }
        let text = match read_utf8(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match Graph::parse(text) {
            Ok(graph) => {
                *out = Box::into_raw(Box::new(DraagGraph { inner: graph }));
                DraagStatus::Ok
            }
            Err(e) => {
                *out = ptr::null_mut();
                fail(DraagStatus::InvalidArgument, &e.to_string())
            }
        }
    })
}

/// Release a handle returned by [`draag_graph_parse`]. Null is ignored.
///
/// # Safety
/// `graph` must be a handle from this library, released at most once.
#[no_mangle]
pub unsafe extern "C" fn draag_graph_free(graph: *mut DraagGraph) {
    if !graph.is_null() {
        drop(Box::from_raw(graph));
    }
}

/// # Safety
/// `graph` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn draag_graph_vertex_count(graph: *const DraagGraph) -> usize {
    if graph.is_null() {
        return 0;
    }
    (*graph).inner.vertex_count()
}

/// # Safety
/// `graph` must be a live handle from this library.
#[no_mangle]
pub unsafe extern "C" fn draag_graph_edge_count(graph: *const DraagGraph) -> usize {
    if graph.is_null() {
        return 0;
    }
    (*graph).inner.edge_count()
}

/// Write the complete-subgraph counts `c_0..c_k` into `buf`. On success
/// `*len` is the number of coefficients written; when the buffer is too
/// small the call fails with [`DraagStatus::BufferTooSmall`] and `*len`
/// holds the required capacity.
///
/// # Safety
/// `graph` must be a live handle; `buf` must point to `cap` writable
/// entries; `len` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn draag_clique_polynomial(
    graph: *const DraagGraph,
    buf: *mut u64,
    cap: usize,
    len: *mut usize,
) -> DraagStatus {
    guarded(|| {
        if graph.is_null() || len.is_null() {
            return fail(DraagStatus::NullPointer, "null pointer");
        }
        let coeffs = (*graph).inner.clique_polynomial();
        let coeffs = coeffs.coefficients();
        *len = coeffs.len();
        if coeffs.len() > cap {
            return fail(
                DraagStatus::BufferTooSmall,
                &format!("need capacity {}", coeffs.len()),
            );
        }
        for (i, &c) in coeffs.iter().enumerate() {
            *buf.add(i) = c;
        }
        DraagStatus::Ok
    })
}

/// Class-membership verdict as a JSON string:
/// `{"in_GrP": bool, "witness": ..., "reason": ...}`. The caller releases
/// the string with [`draag_string_free`].
///
/// # Safety
/// `graph` must be a live handle and `out_json` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn draag_recognize_json(
    graph: *const DraagGraph,
    out_json: *mut *mut c_char,
) -> DraagStatus {
    guarded(|| {
        if graph.is_null() || out_json.is_null() {
            return fail(DraagStatus::NullPointer, "null pointer");
        }
        let value = match draag::recognition::is_in_gr_p(&(*graph).inner) {
            Ok(tree) => serde_json::json!({
                "in_GrP": true,
                "witness": tree,
                "reason": serde_json::Value::Null,
            }),
            Err(rej) => serde_json::json!({
                "in_GrP": false,
                "witness": serde_json::Value::Null,
                "reason": rej.reason.to_string(),
                "rejection_witness": rej.witness,
            }),
        };
        string_out(value.to_string(), out_json)
    })
}

/// Full analysis report as a JSON string. `z_json` may be null for the
/// trivial twist; `order` may be null for the natural generator order;
/// `sum_mode` is 0 for the calibrated default, 1 for `d`, 2 for `d+1`.
/// The caller releases the string with [`draag_string_free`].
///
/// # Safety
/// `graph_json` must be NUL-terminated; optional pointers may be null;
/// `out_json` must be valid.
#[no_mangle]
pub unsafe extern "C" fn draag_analyze_json(
    graph_json: *const c_char,
    z_json: *const c_char,
    order: *const c_char,
    trunc: u32,
    sum_mode: u32,
    out_json: *mut *mut c_char,
) -> DraagStatus {
    guarded(|| {
        if out_json.is_null() {
            return fail(DraagStatus::NullPointer, "null output pointer");
        }
        let graph_text = match read_utf8(graph_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let graph = match Graph::parse(graph_text) {
            Ok(g) => g,
            Err(e) => return fail(DraagStatus::InvalidArgument, &e.to_string()),
        };
        let z = if z_json.is_null() {
            ZVector::trivial(graph.vertex_count())
        } else {
            let text = match read_utf8(z_json) {
                Ok(t) => t,
                Err(s) => return s,
            };
            match ZVector::parse(text, graph.vertex_count()) {
                Ok(z) => z,
                Err(e) => return fail(DraagStatus::InvalidArgument, &e.to_string()),
            }
        };
        let order_text = if order.is_null() {
            None
        } else {
            match read_utf8(order) {
                Ok(t) => Some(t.to_string()),
                Err(s) => return s,
            }
        };
        let mode = match sum_mode {
            0 => SumModeRequest::Auto,
            1 => SumModeRequest::Fixed(SumMode::VertexCount),
            2 => SumModeRequest::Fixed(SumMode::VertexCountPlusOne),
            other => {
                return fail(
                    DraagStatus::InvalidArgument,
                    &format!("sum_mode must be 0, 1, or 2, got {other}"),
                )
            }
        };
        match build_analysis(&graph, &z, order_text.as_deref(), trunc as usize, mode, 0) {
            Ok(report) => string_out(serde_json::to_string(&report).unwrap(), out_json),
            Err(e) => fail(DraagStatus::Domain, &e.to_string()),
        }
    })
}

/// Release a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and be released at most once.
#[no_mangle]
pub unsafe extern "C" fn draag_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
