//! C ABI for `treegrade`.
//!
//! Spaces are opaque `TgSpace` handles. Every fallible call returns a
//! `TgStatus`; on failure `tg_last_error` gives a message for the calling
//! thread. Strings handed out by the library are NUL-terminated, owned by
//! the caller and released with `tg_string_free`.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use treegrade::gen::{generate, SpaceSpec};
use treegrade::grading::{canonical_grading, validate_grading};
use treegrade::homotopy::{is_essential, loop_from_signed};
use treegrade::quotient::metric_quotient;
use treegrade::space::Space;
use treegrade::{Error, PieceId, VertexId};

/// A graph with a grading.
pub struct TgSpace {
    space: Space,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TgStatus {
    Ok = 0,
    /// A null pointer or non-UTF-8 string was passed.
    InvalidArgument = 1,
    /// Malformed input: unknown ids, bad paths, bad parameters, bad JSON.
    Input = 2,
    /// The grading failed validation.
    Grading = 3,
    /// A hypothesis of the operation does not hold.
    Precondition = 4,
    /// A cover query left the constructed ball.
    BallTooSmall = 5,
    /// Internal invariant failure or panic.
    Internal = 6,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> TgStatus {
    match e {
        Error::Input(_) | Error::Json(_) | Error::Schema { .. } => TgStatus::Input,
        Error::Grading(_) => TgStatus::Grading,
        Error::Precondition { .. } => TgStatus::Precondition,
        Error::BallTooSmall(_) => TgStatus::BallTooSmall,
        Error::Invariant(_) => TgStatus::Internal,
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), TgStatus>) -> TgStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => TgStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => {
            set_error("panic inside treegrade");
            TgStatus::Internal
        }
    }
}

fn lib<T>(r: treegrade::Result<T>) -> Result<T, TgStatus> {
    r.map_err(|e| {
        set_error(e.to_string());
        status_of(&e)
    })
}

fn invalid(msg: &str) -> TgStatus {
    set_error(msg);
    TgStatus::InvalidArgument
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, TgStatus> {
    if p.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid(&format!("{name} is not UTF-8")))
}

unsafe fn space_arg<'a>(p: *const TgSpace) -> Result<&'a Space, TgStatus> {
    p.as_ref().map(|s| &s.space).ok_or_else(|| invalid("space is null"))
}

unsafe fn slice_arg<'a, T>(p: *const T, len: usize, name: &str) -> Result<&'a [T], TgStatus> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(invalid(&format!("{name} is null")));
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), TgStatus> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    let c = CString::new(s).map_err(|_| invalid("output contains NUL"))?;
    *out = c.into_raw();
    Ok(())
}

unsafe fn put_space(out: *mut *mut TgSpace, space: Space) -> Result<(), TgStatus> {
    if out.is_null() {
        return Err(invalid("output pointer is null"));
    }
    *out = Box::into_raw(Box::new(TgSpace { space }));
    Ok(())
}

/// Parses a graph or `{graph, grading}` document. The grading is not
/// validated; see `tg_space_validate`.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_space_from_json(json: *const c_char, out: *mut *mut TgSpace) -> TgStatus {
    guard(|| {
        let text = str_arg(json, "json")?;
        let space = lib(Space::from_json_str(text))?;
        put_space(out, space)
    })
}

/// Builds a generated space from a spec such as
/// `{"name":"triangle_chain","k":2,"circumference":"3","bridge":"1","layout":"chain"}`.
///
/// # Safety
/// `spec_json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_generate(spec_json: *const c_char, out: *mut *mut TgSpace) -> TgStatus {
    guard(|| {
        let text = str_arg(spec_json, "spec_json")?;
        let value = lib(serde_json::from_str(text).map_err(Error::from))?;
        let spec: SpaceSpec = lib(treegrade::error::from_json_value(value))?;
        let g = lib(generate(&spec))?;
        put_space(out, g.space)
    })
}

/// Releases a space. Null is ignored.
///
/// # Safety
/// `space` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tg_space_free(space: *mut TgSpace) {
    if !space.is_null() {
        drop(Box::from_raw(space));
    }
}

/// Vertex, edge and piece counts. Any output pointer may be null.
///
/// # Safety
/// `space` must be a live handle; non-null outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_space_counts(
    space: *const TgSpace,
    vertices: *mut usize,
    edges: *mut usize,
    pieces: *mut usize,
) -> TgStatus {
    guard(|| {
        let s = space_arg(space)?;
        for (p, n) in [
            (vertices, s.graph.vertex_count()),
            (edges, s.graph.edge_count()),
            (pieces, s.grading.pieces().len()),
        ] {
            if !p.is_null() {
                *p = n;
            }
        }
        Ok(())
    })
}

/// `TG_STATUS_OK` if the grading is valid, `TG_STATUS_GRADING` otherwise.
///
/// # Safety
/// `space` must be a live handle.
#[no_mangle]
pub unsafe extern "C" fn tg_space_validate(space: *const TgSpace) -> TgStatus {
    guard(|| {
        let s = space_arg(space)?;
        lib(validate_grading(&s.graph, &s.grading).map_err(Error::from))
    })
}

/// Distance between two vertices as an exact `"p/q"` string.
///
/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_space_distance(
    space: *const TgSpace,
    u: u32,
    v: u32,
    out: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        let s = space_arg(space)?;
        let d = lib(s.graph.distance(VertexId(u), VertexId(v)))?;
        put_string(out, d.to_string())
    })
}

/// `{graph, grading}` JSON of the space.
///
/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_space_to_json(space: *const TgSpace, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let s = space_arg(space)?;
        put_string(out, s.to_json().to_string())
    })
}

/// The canonical grading as `{pieces: [...]}` JSON.
///
/// # Safety
/// `space` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_space_decompose(space: *const TgSpace, out: *mut *mut c_char) -> TgStatus {
    guard(|| {
        let s = space_arg(space)?;
        let t = lib(canonical_grading(&s.graph))?;
        put_string(out, serde_json::to_string(&t.to_doc()).expect("grading serializes"))
    })
}

/// Decides whether the loop given by `len` signed edge ids is essential,
/// reading its word at `base`. `details`, when not null, receives
/// `{essential, witness, word}` JSON.
///
/// # Safety
/// `space` must be a live handle; `edges` must point to `len` values;
/// `essential` must be writable; `details` may be null.
#[no_mangle]
pub unsafe extern "C" fn tg_space_is_essential(
    space: *const TgSpace,
    edges: *const i64,
    len: usize,
    base: u32,
    essential: *mut bool,
    details: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        let s = space_arg(space)?;
        let signed = slice_arg(edges, len, "edges")?;
        if essential.is_null() {
            return Err(invalid("essential is null"));
        }
        let base = VertexId(base);
        lib(s.graph.distance(base, base))?;
        let l = lib(loop_from_signed(&s.graph, signed, base))?;
        lib(validate_grading(&s.graph, &s.grading).map_err(Error::from))?;
        let e = lib(is_essential(&s.graph, &s.grading, &l, base))?;
        *essential = e.essential;
        if !details.is_null() {
            let doc = serde_json::json!({
                "essential": e.essential,
                "witness": e.witness,
                "word": e.word.to_string(),
            });
            put_string(details, doc.to_string())?;
        }
        Ok(())
    })
}

/// Metric quotient keeping the `len` listed pieces, as
/// `{graph, grading, gamma, collapsed}` JSON.
///
/// # Safety
/// `space` must be a live handle; `keep` must point to `len` values; `out`
/// must be writable.
#[no_mangle]
pub unsafe extern "C" fn tg_space_quotient(
    space: *const TgSpace,
    keep: *const u32,
    len: usize,
    out: *mut *mut c_char,
) -> TgStatus {
    guard(|| {
        let s = space_arg(space)?;
        let kept: BTreeSet<PieceId> = slice_arg(keep, len, "keep")?.iter().map(|&x| PieceId(x)).collect();
        let mq = lib(metric_quotient(&s.graph, &s.grading, &kept))?;
        put_string(out, mq.to_json().to_string())
    })
}

/// Releases a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn tg_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Message for the last failed call on this thread, or null. Valid until
/// the next call into the library on the same thread.
#[no_mangle]
pub extern "C" fn tg_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version, statically allocated.
#[no_mangle]
pub extern "C" fn tg_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}
