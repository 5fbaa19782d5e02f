//! C ABI for the supersheaf engine.
//!
//! Every entry point returns an [`SsStatus`]. On failure a message is kept per
//! thread and can be fetched with [`ss_last_error`]. Descriptors are opaque and
//! must be released with [`ss_descriptor_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use supersheaf::cech::{build_split_complex, cohomology, ParityDims, WindowSpec};
use supersheaf::geometry::{bott_dim, SuperSpace};
use supersheaf::gluing::{cochain_from_json, exp, twisted_complex};
use supersheaf::sheaf::SheafDescriptor;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SsStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidUtf8 = 2,
    InvalidInput = 3,
    Unsupported = 4,
    BufferTooSmall = 5,
    Internal = 6,
}

/// Opaque handle to a validated sheaf descriptor.
pub struct SsDescriptor {
    inner: SheafDescriptor,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn fail(status: SsStatus, msg: impl Into<String>) -> SsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.into());
    status
}

fn guard<F: FnOnce() -> SsStatus>(f: F) -> SsStatus {
    LAST_ERROR.with(|e| e.borrow_mut().clear());
    catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|_| fail(SsStatus::Internal, "panic inside supersheaf"))
}

unsafe fn read_str<'a>(s: *const c_char) -> Result<&'a str, SsStatus> {
    if s.is_null() {
        return Err(fail(SsStatus::NullPointer, "null string"));
    }
    CStr::from_ptr(s).to_str().map_err(|_| fail(SsStatus::InvalidUtf8, "string is not UTF-8"))
}

unsafe fn read_slice<'a>(p: *const i64, len: usize) -> Result<&'a [i64], SsStatus> {
    match (p.is_null(), len) {
        (_, 0) => Ok(&[]),
        (true, _) => Err(fail(SsStatus::NullPointer, "null twist array")),
        (false, _) => Ok(slice::from_raw_parts(p, len)),
    }
}

unsafe fn descriptor<'a>(d: *const SsDescriptor) -> Result<&'a SheafDescriptor, SsStatus> {
    d.as_ref().map(|d| &d.inner).ok_or_else(|| fail(SsStatus::NullPointer, "null descriptor"))
}

fn require_p1(d: &SheafDescriptor) -> Result<(), SsStatus> {
    if d.space().n != 1 {
        return Err(fail(SsStatus::Unsupported, format!("needs n = 1, descriptor has n = {}", d.space().n)));
    }
    Ok(())
}

unsafe fn write_dims(h: &[ParityDims], even: *mut u64, odd: *mut u64) -> SsStatus {
    if even.is_null() || odd.is_null() {
        return fail(SsStatus::NullPointer, "null output array");
    }
    for (q, d) in h.iter().enumerate().take(2) {
        *even.add(q) = d.even;
        *odd.add(q) = d.odd;
    }
    SsStatus::Ok
}

/// Copies `s` plus a NUL terminator into `buf`. `needed` always receives the
/// full size, so callers can retry with a larger buffer. Leaves the last error
/// untouched.
unsafe fn copy_string(s: &str, buf: *mut c_char, cap: usize, needed: *mut usize) -> SsStatus {
    let len = s.len() + 1;
    if !needed.is_null() {
        *needed = len;
    }
    if buf.is_null() || cap < len {
        return SsStatus::BufferTooSmall;
    }
    ptr::copy_nonoverlapping(s.as_ptr(), buf as *mut u8, s.len());
    *buf.add(s.len()) = 0;
    SsStatus::Ok
}

/// Builds a descriptor on `CP^{n|m}` from two twist arrays.
///
/// # Safety
/// `even` and `odd` must point to `even_len` and `odd_len` readable values (or
/// be null when the length is 0); `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_descriptor_new(
    n: usize,
    m: usize,
    even: *const i64,
    even_len: usize,
    odd: *const i64,
    odd_len: usize,
    out: *mut *mut SsDescriptor,
) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return fail(SsStatus::NullPointer, "null out pointer");
        }
        let (e, o) = match (read_slice(even, even_len), read_slice(odd, odd_len)) {
            (Ok(e), Ok(o)) => (e, o),
            (Err(s), _) | (_, Err(s)) => return s,
        };
        let Some(space) = SuperSpace::new(n, m) else {
            return fail(SsStatus::InvalidInput, "n must be at least 1");
        };
        let inner = SheafDescriptor::new(space, e.to_vec(), o.to_vec());
        if let Err(err) = inner.validate() {
            return fail(SsStatus::InvalidInput, err.to_string());
        }
        *out = Box::into_raw(Box::new(SsDescriptor { inner }));
        SsStatus::Ok
    })
}

/// Parses a descriptor from its JSON file format.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_descriptor_from_json(json: *const c_char, out: *mut *mut SsDescriptor) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return fail(SsStatus::NullPointer, "null out pointer");
        }
        let text = match read_str(json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        match SheafDescriptor::from_json(text) {
            Ok(inner) => {
                *out = Box::into_raw(Box::new(SsDescriptor { inner }));
                SsStatus::Ok
            }
            Err(e) => fail(SsStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Releases a descriptor. Null is ignored.
///
/// # Safety
/// `d` must come from this library and not be used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ss_descriptor_free(d: *mut SsDescriptor) {
    if !d.is_null() {
        drop(Box::from_raw(d));
    }
}

/// Odd dimension `m` of the ambient superspace.
///
/// # Safety
/// `d` must be a live descriptor and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_descriptor_odd_dim(d: *const SsDescriptor, out: *mut usize) -> SsStatus {
    guard(|| match (descriptor(d), out.is_null()) {
        (Err(s), _) => s,
        (_, true) => fail(SsStatus::NullPointer, "null out pointer"),
        (Ok(d), false) => {
            *out = d.space().m;
            SsStatus::Ok
        }
    })
}

/// `dim H^q(CP^n, O(d))`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ss_bott_dim(n: usize, d: i64, q: usize, out: *mut u64) -> SsStatus {
    guard(|| {
        if out.is_null() {
            return fail(SsStatus::NullPointer, "null out pointer");
        }
        if n == 0 {
            return fail(SsStatus::InvalidInput, "n must be at least 1");
        }
        *out = bott_dim(n, d, q);
        SsStatus::Ok
    })
}

/// `dim H^0` and `dim H^1` of `End_p gr E` for `1 <= p <= m`.
///
/// # Safety
/// `d` must be a live descriptor; `h0` and `h1` writable.
#[no_mangle]
pub unsafe extern "C" fn ss_obstruction_dims(d: *const SsDescriptor, p: usize, h0: *mut u64, h1: *mut u64) -> SsStatus {
    guard(|| {
        let d = match descriptor(d) {
            Ok(d) => d,
            Err(s) => return s,
        };
        if h0.is_null() || h1.is_null() {
            return fail(SsStatus::NullPointer, "null out pointer");
        }
        let m = d.space().m;
        if p == 0 || p > m {
            return fail(SsStatus::InvalidInput, format!("p = {p} outside 1..={m}"));
        }
        let block = d.end_block(p);
        *h0 = block.cohomology(d.space().n, 0);
        *h1 = block.cohomology(d.space().n, 1);
        SsStatus::Ok
    })
}

/// Čech cohomology of `gr E` on `CP^{1|m}`. `even` and `odd` receive two
/// entries each, indexed by `q`.
///
/// # Safety
/// `d` must be a live descriptor; `even` and `odd` must hold two `uint64_t`.
#[no_mangle]
pub unsafe extern "C" fn ss_split_cohomology(d: *const SsDescriptor, even: *mut u64, odd: *mut u64) -> SsStatus {
    guard(|| {
        let d = match descriptor(d) {
            Ok(d) => d,
            Err(s) => return s,
        };
        if let Err(s) = require_p1(d) {
            return s;
        }
        match build_split_complex(d, WindowSpec::Auto) {
            Ok(cx) => write_dims(&cohomology(&cx).h, even, odd),
            Err(e) => fail(SsStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Cohomology of the sheaf glued by `exp(N)`, `N` given in the cocycle JSON
/// format.
///
/// # Safety
/// As for [`ss_split_cohomology`]; `cocycle_json` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn ss_twisted_cohomology(
    d: *const SsDescriptor,
    cocycle_json: *const c_char,
    even: *mut u64,
    odd: *mut u64,
) -> SsStatus {
    guard(|| {
        let d = match descriptor(d) {
            Ok(d) => d,
            Err(s) => return s,
        };
        let text = match read_str(cocycle_json) {
            Ok(t) => t,
            Err(s) => return s,
        };
        if let Err(s) = require_p1(d) {
            return s;
        }
        let a = match cochain_from_json(d, text) {
            Ok(n) => exp(&n),
            Err(e) => return fail(SsStatus::InvalidInput, e.to_string()),
        };
        match twisted_complex(d, &a, WindowSpec::Auto) {
            Ok(cx) => write_dims(&cohomology(&cx).h, even, odd),
            Err(e) => fail(SsStatus::InvalidInput, e.to_string()),
        }
    })
}

/// Runs the built-in `CP^{1|1}` pipeline and writes its JSON report.
/// `all_ok` receives 1 when every cross-check passed.
///
/// # Safety
/// `buf` must hold `cap` bytes; `needed` and `all_ok` may be null.
#[no_mangle]
pub unsafe extern "C" fn ss_demo_cp11(
    seed: u64,
    buf: *mut c_char,
    cap: usize,
    needed: *mut usize,
    all_ok: *mut i32,
) -> SsStatus {
    guard(|| {
        let seed = seed.to_string();
        let args = ["supersheaf", "demo-cp11", "--seed", seed.as_str(), "--json"];
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = supersheaf::cli::run(args, &mut out, &mut err);
        if !all_ok.is_null() {
            *all_ok = i32::from(code == 0);
        }
        if out.is_empty() {
            return fail(SsStatus::Internal, String::from_utf8_lossy(&err).trim().to_string());
        }
        match copy_string(&String::from_utf8_lossy(&out), buf, cap, needed) {
            SsStatus::Ok => SsStatus::Ok,
            s => fail(s, "output buffer too small"),
        }
    })
}

/// Copies the calling thread's last error message. Empty after a success.
///
/// # Safety
/// Same buffer contract as [`ss_demo_cp11`].
#[no_mangle]
pub unsafe extern "C" fn ss_last_error(buf: *mut c_char, cap: usize, needed: *mut usize) -> SsStatus {
    let msg = LAST_ERROR.with(|e| e.borrow().clone());
    copy_string(&msg, buf, cap, needed)
}

/// Static, NUL-terminated name of a status code.
#[no_mangle]
pub extern "C" fn ss_status_name(status: SsStatus) -> *const c_char {
    let s: &'static [u8] = match status {
        SsStatus::Ok => b"ok\0",
        SsStatus::NullPointer => b"null pointer\0",
        SsStatus::InvalidUtf8 => b"invalid utf-8\0",
        SsStatus::InvalidInput => b"invalid input\0",
        SsStatus::Unsupported => b"unsupported\0",
        SsStatus::BufferTooSmall => b"buffer too small\0",
        SsStatus::Internal => b"internal error\0",
    };
    s.as_ptr() as *const c_char
}
