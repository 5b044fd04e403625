//! C ABI over `semidec`.
//!
//! Objects cross the boundary as opaque handles owned by the caller and
//! released with the matching `*_free`. Every fallible call returns an
//! [`SdStatus`]; on failure `sd_last_error_message` describes the error for
//! the calling thread. Strings handed out by the library are released with
//! [`sd_string_free`].

#![allow(clippy::missing_safety_doc)]

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use semidec::cli_io::{parse_point, run_command};
use semidec::distributive::{distributive_constant, DeltaOptions, DeltaReport};
use semidec::error::Error;
use semidec::heights::{s_height, PlaceSet};
use semidec::ideal::{Budget, ProjDim, ProjectiveVariety};
use semidec::poly::{format_rational, HomogeneousPoly, PolyFamily};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InputError = 3,
    BudgetExceeded = 4,
    InternalError = 5,
    Panic = 6,
}

pub struct SdPoly(HomogeneousPoly);

pub struct SdFamily {
    num_vars: usize,
    members: Vec<HomogeneousPoly>,
}

pub struct SdVariety(ProjectiveVariety);

pub struct SdDeltaReport(DeltaReport);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior nul");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> SdStatus {
    match e {
        Error::BudgetExceeded(_) => SdStatus::BudgetExceeded,
        Error::Invariant(_) => SdStatus::InternalError,
        _ => SdStatus::InputError,
    }
}

enum Fail {
    Status(SdStatus, String),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Fail {
        Fail::Status(status_of(&e), e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> SdStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => SdStatus::Ok,
        Ok(Err(Fail::Status(s, msg))) => {
            set_error(&msg);
            s
        }
        Err(_) => {
            set_error("panic inside semidec");
            SdStatus::Panic
        }
    }
}

fn null() -> Fail {
    Fail::Status(SdStatus::NullPointer, "null pointer argument".into())
}

unsafe fn read_str<'a>(p: *const c_char) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(null());
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail::Status(SdStatus::InvalidUtf8, "string is not UTF-8".into()))
}

unsafe fn write_out<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

unsafe fn write_string(out: *mut *mut c_char, s: String) -> Result<(), Fail> {
    let c = CString::new(s)
        .map_err(|_| Fail::Status(SdStatus::InternalError, "interior nul in output".into()))?;
    write_out(out, c.into_raw())
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

/// Message for the most recent failure on this thread, or NULL. The pointer
/// stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn sd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

#[no_mangle]
pub unsafe extern "C" fn sd_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a nonzero homogeneous form in `x0 .. x{num_vars-1}`.
#[no_mangle]
pub unsafe extern "C" fn sd_poly_parse(
    text: *const c_char,
    num_vars: usize,
    out: *mut *mut SdPoly,
) -> SdStatus {
    guard(|| {
        let t = read_str(text)?;
        let p = HomogeneousPoly::parse(t, num_vars)?;
        if p.is_zero() {
            return Err(Error::ZeroPolynomial.into());
        }
        write_out(out, Box::into_raw(Box::new(SdPoly(p))))
    })
}

#[no_mangle]
pub unsafe extern "C" fn sd_poly_free(p: *mut SdPoly) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

#[no_mangle]
pub unsafe extern "C" fn sd_poly_to_string(p: *const SdPoly, out: *mut *mut c_char) -> SdStatus {
    guard(|| write_string(out, handle(p)?.0.to_string()))
}

#[no_mangle]
pub unsafe extern "C" fn sd_poly_degree(p: *const SdPoly, out: *mut u32) -> SdStatus {
    guard(|| write_out(out, handle(p)?.0.degree()))
}

#[no_mangle]
pub unsafe extern "C" fn sd_family_new(num_vars: usize, out: *mut *mut SdFamily) -> SdStatus {
    guard(|| {
        if num_vars == 0 {
            return Err(Error::Invalid("num_vars must be positive".into()).into());
        }
        write_out(
            out,
            Box::into_raw(Box::new(SdFamily {
                num_vars,
                members: Vec::new(),
            })),
        )
    })
}

/// Appends a member parsed from `text`.
#[no_mangle]
pub unsafe extern "C" fn sd_family_push(f: *mut SdFamily, text: *const c_char) -> SdStatus {
    guard(|| {
        let fam = f.as_mut().ok_or_else(null)?;
        let p = HomogeneousPoly::parse(read_str(text)?, fam.num_vars)?;
        if p.is_zero() {
            return Err(Error::ZeroPolynomial.into());
        }
        fam.members.push(p);
        Ok(())
    })
}

#[no_mangle]
pub unsafe extern "C" fn sd_family_len(f: *const SdFamily, out: *mut usize) -> SdStatus {
    guard(|| write_out(out, handle(f)?.members.len()))
}

#[no_mangle]
pub unsafe extern "C" fn sd_family_free(f: *mut SdFamily) {
    if !f.is_null() {
        drop(Box::from_raw(f));
    }
}

/// The variety cut out by `count` forms; `count == 0` gives projective space.
#[no_mangle]
pub unsafe extern "C" fn sd_variety_new(
    num_vars: usize,
    forms: *const *const c_char,
    count: usize,
    out: *mut *mut SdVariety,
) -> SdStatus {
    guard(|| {
        if num_vars == 0 {
            return Err(Error::Invalid("num_vars must be positive".into()).into());
        }
        let v = if count == 0 {
            ProjectiveVariety::full_space(num_vars)
        } else {
            if forms.is_null() {
                return Err(null());
            }
            let mut parsed = Vec::with_capacity(count);
            for i in 0..count {
                parsed.push(HomogeneousPoly::parse(read_str(*forms.add(i))?, num_vars)?);
            }
            ProjectiveVariety::from_forms(num_vars, &parsed, &Budget::default())?
        };
        write_out(out, Box::into_raw(Box::new(SdVariety(v))))
    })
}

/// Projective dimension, or -1 for the empty variety.
#[no_mangle]
pub unsafe extern "C" fn sd_variety_dim(v: *const SdVariety, out: *mut i64) -> SdStatus {
    guard(|| {
        let d = match handle(v)?.0.dim() {
            ProjDim::Empty => -1,
            ProjDim::Dim(k) => k as i64,
        };
        write_out(out, d)
    })
}

#[no_mangle]
pub unsafe extern "C" fn sd_variety_free(v: *mut SdVariety) {
    if !v.is_null() {
        drop(Box::from_raw(v));
    }
}

/// Distributive constant of `family` with respect to `variety` (NULL means
/// projective space).
#[no_mangle]
pub unsafe extern "C" fn sd_delta_compute(
    family: *const SdFamily,
    variety: *const SdVariety,
    prune: bool,
    out: *mut *mut SdDeltaReport,
) -> SdStatus {
    guard(|| {
        let fam = handle(family)?;
        let family = PolyFamily::new(fam.members.clone())?;
        let full;
        let v = match variety.as_ref() {
            Some(v) => &v.0,
            None => {
                full = ProjectiveVariety::full_space(fam.num_vars);
                &full
            }
        };
        let opts = DeltaOptions {
            prune,
            ..DeltaOptions::default()
        };
        let report = distributive_constant(&family, v, &opts)?;
        write_out(out, Box::into_raw(Box::new(SdDeltaReport(report))))
    })
}

/// `"p/q"` or `"inf"`.
#[no_mangle]
pub unsafe extern "C" fn sd_delta_report_delta(
    r: *const SdDeltaReport,
    out: *mut *mut c_char,
) -> SdStatus {
    guard(|| write_string(out, handle(r)?.0.delta.to_string()))
}

#[no_mangle]
pub unsafe extern "C" fn sd_delta_report_json(
    r: *const SdDeltaReport,
    out: *mut *mut c_char,
) -> SdStatus {
    guard(|| {
        let json = serde_json::to_string(&handle(r)?.0)
            .map_err(|e| Fail::Status(SdStatus::InternalError, e.to_string()))?;
        write_string(out, json)
    })
}

#[no_mangle]
pub unsafe extern "C" fn sd_delta_report_free(r: *mut SdDeltaReport) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// S-height of a point such as `"(6,4)"`, with `S = {∞} ∪ primes`, as `"p/q"`.
#[no_mangle]
pub unsafe extern "C" fn sd_s_height(
    point: *const c_char,
    primes: *const u64,
    nprimes: usize,
    out: *mut *mut c_char,
) -> SdStatus {
    guard(|| {
        let x = parse_point(read_str(point)?)?;
        let ps: &[u64] = if nprimes == 0 {
            &[]
        } else if primes.is_null() {
            return Err(null());
        } else {
            std::slice::from_raw_parts(primes, nprimes)
        };
        let s = PlaceSet::new(ps)?;
        write_string(out, format_rational(s_height(&x, &s)?.exact()))
    })
}

/// Runs a CLI command (`"delta"`, `"search"`, ...) on a JSON spec and returns
/// the JSON payload. `budget == 0` keeps the default limits.
#[no_mangle]
pub unsafe extern "C" fn sd_run_spec(
    verb: *const c_char,
    spec_json: *const c_char,
    budget: u64,
    out: *mut *mut c_char,
) -> SdStatus {
    guard(|| {
        let verb = read_str(verb)?;
        let spec = read_str(spec_json)?;
        let json = run_command(verb, spec, (budget > 0).then_some(budget))?;
        write_string(out, json)
    })
}
