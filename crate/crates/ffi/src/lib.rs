//! C interface to the `laconic` engine.
//!
//! Mappings and instances are opaque handles owned by the caller and
//! released with the matching `_free` function. Every fallible call returns
//! a [`DxStatus`]; on failure a message is available from
//! [`dx_last_error_message`] until the next call on the same thread.
//! Strings returned through `char **` out-parameters are released with
//! [`dx_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use laconic::certain::eliminate_mapping;
use laconic::chase::{naive_chase, to_term_interpretation};
use laconic::laconify::laconify;
use laconic::lang::{parse_mapping, SchemaMapping};
use laconic::model::{compute_core, instances_isomorphic, parse_facts, write_facts, Instance};
use laconic::sqlgen::interpretation_to_sql;
use laconic::verify::{check_laconic, Sampling};
use laconic::Error;

/// Result codes.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DxStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    ParseError = 3,
    SchemaError = 4,
    Unsupported = 5,
    IoError = 6,
    Panic = 7,
}

/// A parsed schema mapping.
pub struct DxMapping(SchemaMapping);

/// An instance over a mapping's source or target schema.
pub struct DxInstance(Instance);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn status_of(e: &Error) -> DxStatus {
    match e.kind() {
        Error::Syntax { .. } | Error::InvalidConstant(..) | Error::Decode(_) | Error::NotConjunctive(_) => {
            DxStatus::ParseError
        }
        Error::Arity { .. }
        | Error::UnknownRelation(_)
        | Error::Schema(_)
        | Error::UnsafeTgd(_)
        | Error::UnboundVariable(_) => DxStatus::SchemaError,
        Error::CertainPresent => DxStatus::Unsupported,
        Error::Io(_) | Error::Csv(_) => DxStatus::IoError,
        Error::Located { .. } => DxStatus::ParseError,
    }
}

struct Failure(DxStatus, String);

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure(status_of(&e), e.to_string())
    }
}

fn null_arg(name: &str) -> Failure {
    Failure(DxStatus::NullArgument, format!("{name} is null"))
}

/// Runs `body`, translating errors and panics into status codes.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> DxStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            set_error("");
            DxStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(_) => {
            set_error("internal error");
            DxStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, name: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null_arg(name));
    }
    CStr::from_ptr(p).to_str().map_err(|_| Failure(DxStatus::InvalidUtf8, format!("{name} is not valid UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null_arg(name))
}

unsafe fn put<T>(out: *mut *mut T, value: T) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null_arg("out"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

unsafe fn put_string(out: *mut *mut c_char, s: String) -> Result<(), Failure> {
    if out.is_null() {
        return Err(null_arg("out"));
    }
    let c = CString::new(s).map_err(|_| Failure(DxStatus::InvalidUtf8, "output contains a NUL byte".into()))?;
    *out = c.into_raw();
    Ok(())
}

/// Message describing the last failure on this thread; empty after success.
/// The pointer stays valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn dx_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Releases a string returned by this library.
///
/// # Safety
/// `s` must be null or a string returned by this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dx_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a mapping written in the mapping language.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_mapping_parse(text: *const c_char, out: *mut *mut DxMapping) -> DxStatus {
    guard(|| {
        let m = parse_mapping(str_arg(text, "text")?)?;
        put(out, DxMapping(m))
    })
}

/// # Safety
/// `m` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dx_mapping_free(m: *mut DxMapping) {
    if !m.is_null() {
        drop(Box::from_raw(m));
    }
}

/// Renders a mapping in the mapping language.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_mapping_to_string(m: *const DxMapping, out: *mut *mut c_char) -> DxStatus {
    guard(|| put_string(out, ref_arg(m, "mapping")?.0.to_string()))
}

/// Computes a logically equivalent laconic mapping. With `eliminate_certain`
/// the result contains only plain source formulas.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_mapping_laconify(
    m: *const DxMapping,
    eliminate_certain: bool,
    out: *mut *mut DxMapping,
) -> DxStatus {
    guard(|| {
        let mut l = laconify(&ref_arg(m, "mapping")?.0)?;
        if eliminate_certain {
            l = eliminate_mapping(&l)?;
        }
        put(out, DxMapping(l))
    })
}

/// SQL computing the mapping's target relations from source tables.
///
/// # Safety
/// `m` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_mapping_emit_sql(m: *const DxMapping, with_ddl: bool, out: *mut *mut c_char) -> DxStatus {
    guard(|| {
        let mut m = ref_arg(m, "mapping")?.0.clone();
        if m.has_certain() {
            m = eliminate_mapping(&m)?;
        }
        let art = interpretation_to_sql(&to_term_interpretation(&m)?)?;
        put_string(out, art.to_script(with_ddl))
    })
}

/// Checks laconicity on `samples` random source instances.
///
/// # Safety
/// `m` must be a live handle and `passed` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_mapping_check_laconic(
    m: *const DxMapping,
    samples: usize,
    seed: u64,
    passed: *mut bool,
) -> DxStatus {
    guard(|| {
        let report = check_laconic(&ref_arg(m, "mapping")?.0, &Sampling::new(samples, seed))?;
        if passed.is_null() {
            return Err(null_arg("passed"));
        }
        *passed = report.passed();
        Ok(())
    })
}

/// Parses a source instance of `m` from a fact file.
///
/// # Safety
/// `m` must be a live handle, `facts` a NUL-terminated string and `out` a
/// valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_instance_parse(
    m: *const DxMapping,
    facts: *const c_char,
    out: *mut *mut DxInstance,
) -> DxStatus {
    guard(|| {
        let m = ref_arg(m, "mapping")?;
        let inst = parse_facts(str_arg(facts, "facts")?, &m.0.source)?;
        put(out, DxInstance(inst))
    })
}

/// # Safety
/// `i` must be null or a handle from this library, not yet freed.
#[no_mangle]
pub unsafe extern "C" fn dx_instance_free(i: *mut DxInstance) {
    if !i.is_null() {
        drop(Box::from_raw(i));
    }
}

/// Renders an instance as a fact file.
///
/// # Safety
/// `i` must be a live handle and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_instance_to_string(i: *const DxInstance, out: *mut *mut c_char) -> DxStatus {
    guard(|| put_string(out, write_facts(&ref_arg(i, "instance")?.0)))
}

/// Number of facts in an instance; 0 for a null handle.
///
/// # Safety
/// `i` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn dx_instance_len(i: *const DxInstance) -> usize {
    i.as_ref().map_or(0, |i| i.0.len())
}

/// Canonical universal solution of a source instance.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_chase(
    m: *const DxMapping,
    source: *const DxInstance,
    out: *mut *mut DxInstance,
) -> DxStatus {
    guard(|| {
        let j = naive_chase(&ref_arg(m, "mapping")?.0, &ref_arg(source, "source")?.0)?;
        put(out, DxInstance(j))
    })
}

/// Core universal solution of a source instance.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_core(
    m: *const DxMapping,
    source: *const DxInstance,
    out: *mut *mut DxInstance,
) -> DxStatus {
    guard(|| {
        let j = naive_chase(&ref_arg(m, "mapping")?.0, &ref_arg(source, "source")?.0)?;
        put(out, DxInstance(compute_core(&j).0))
    })
}

/// Whether two instances are equal up to renaming of nulls.
///
/// # Safety
/// Handles must be live and `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn dx_instances_isomorphic(
    a: *const DxInstance,
    b: *const DxInstance,
    out: *mut bool,
) -> DxStatus {
    guard(|| {
        let (a, b) = (ref_arg(a, "a")?, ref_arg(b, "b")?);
        if out.is_null() {
            return Err(null_arg("out"));
        }
        *out = instances_isomorphic(&a.0, &b.0);
        Ok(())
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn located_errors_keep_their_kind() {
        let inner = Error::Arity { relation: "R".into(), expected: 2, found: 1 };
        let e = Error::Located { line: 1, col: 3, inner: Box::new(inner) };
        assert_eq!(status_of(&e), DxStatus::SchemaError);
        assert_eq!(status_of(&Error::CertainPresent), DxStatus::Unsupported);
    }

    #[test]
    fn panics_become_status_codes() {
        assert_eq!(guard(|| panic!("boom")), DxStatus::Panic);
        let msg = unsafe { CStr::from_ptr(dx_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "internal error");
    }
}
