//! C ABI surface for the knotlock codec and session harness.
//!
//! Conventions: every fallible call returns a [`KnotlockStatus`] and writes
//! results through out-pointers. Returned strings are NUL-terminated,
//! heap-allocated, and must be released with [`knotlock_string_free`];
//! opaque handles have their own `_free` functions. Passing NULL where a
//! value is required yields `KNOTLOCK_ERR_NULL_POINTER`, never undefined
//! behavior. Panics are caught at the boundary and reported as
//! `KNOTLOCK_ERR_INTERNAL`.

use knotlock::codec::{self, CodecError, EncodedPackage, EncodingPayload};
use knotlock::harness::{self, PartyConfig};
use knotlock::numeric::{BigReal, Integer};
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

/// Status codes returned by every fallible entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KnotlockStatus {
    KnotlockOk = 0,
    KnotlockErrNullPointer = 1,
    KnotlockErrUtf8 = 2,
    KnotlockErrInvalidArgument = 3,
    KnotlockErrDuplicatePrime = 4,
    KnotlockErrNotPrime = 5,
    KnotlockErrPrecisionBreach = 6,
    KnotlockErrNotAPowerOfAlpha = 7,
    KnotlockErrTooLarge = 8,
    KnotlockErrParse = 9,
    KnotlockErrProtocol = 10,
    KnotlockErrInternal = 11,
}

use KnotlockStatus::*;

fn status_of(err: &CodecError) -> KnotlockStatus {
    match err {
        CodecError::EmptyPayload | CodecError::InvalidAlpha | CodecError::InvalidInput(_) => {
            KnotlockErrInvalidArgument
        }
        CodecError::DuplicatePrime(_) => KnotlockErrDuplicatePrime,
        CodecError::NotPrime(_) => KnotlockErrNotPrime,
        CodecError::PrecisionBreach => KnotlockErrPrecisionBreach,
        CodecError::NotAPowerOfAlpha { .. } => KnotlockErrNotAPowerOfAlpha,
        CodecError::TooLarge(_) => KnotlockErrTooLarge,
    }
}

/// Opaque handle: an encoded package (N, M, alpha, beta).
pub struct KnotlockPackage {
    package: EncodedPackage,
}

/// Opaque handle: a decoded payload of (prime, twists) entries.
pub struct KnotlockPayload {
    payload: EncodingPayload,
}

fn to_c_string(s: String) -> *mut c_char {
    match CString::new(s) {
        Ok(c) => c.into_raw(),
        Err(_) => std::ptr::null_mut(),
    }
}

unsafe fn read_str<'a>(ptr: *const c_char) -> Result<&'a str, KnotlockStatus> {
    if ptr.is_null() {
        return Err(KnotlockErrNullPointer);
    }
    CStr::from_ptr(ptr).to_str().map_err(|_| KnotlockErrUtf8)
}

fn guarded(f: impl FnOnce() -> KnotlockStatus) -> KnotlockStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(status) => status,
        Err(_) => KnotlockErrInternal,
    }
}

/// Encode `len` strands of (prime, half-twists) with base `alpha` into a
/// package handle.
///
/// # Safety
/// `primes` and `twists` must point to `len` readable elements; `out` must
/// be a valid writable pointer.
#[no_mangle]
pub unsafe extern "C" fn knotlock_encode(
    primes: *const u64,
    twists: *const u32,
    len: usize,
    alpha: u32,
    out: *mut *mut KnotlockPackage,
) -> KnotlockStatus {
    guarded(|| {
        if primes.is_null() || twists.is_null() || out.is_null() || len == 0 {
            return KnotlockErrNullPointer;
        }
        let primes = std::slice::from_raw_parts(primes, len);
        let twists = std::slice::from_raw_parts(twists, len);
        let payload = match EncodingPayload::from_u64_primes(primes, twists, alpha) {
            Ok(p) => p,
            Err(e) => return status_of(&e),
        };
        match codec::encode(&payload) {
            Ok(package) => {
                *out = Box::into_raw(Box::new(KnotlockPackage { package }));
                KnotlockOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `pkg` must be a handle from [`knotlock_encode`] not yet freed (or NULL).
#[no_mangle]
pub unsafe extern "C" fn knotlock_package_free(pkg: *mut KnotlockPackage) {
    if !pkg.is_null() {
        drop(Box::from_raw(pkg));
    }
}

/// Decimal rendering of N. Free with [`knotlock_string_free`].
///
/// # Safety
/// `pkg` must be a live package handle.
#[no_mangle]
pub unsafe extern "C" fn knotlock_package_n(pkg: *const KnotlockPackage) -> *mut c_char {
    if pkg.is_null() {
        return std::ptr::null_mut();
    }
    to_c_string((*pkg).package.n().to_string())
}

/// Total half-twist count M.
///
/// # Safety
/// `pkg` must be a live package handle.
#[no_mangle]
pub unsafe extern "C" fn knotlock_package_m(pkg: *const KnotlockPackage) -> u32 {
    if pkg.is_null() {
        return u32::MAX;
    }
    (*pkg).package.m()
}

/// Canonical decimal rendering of beta at contract precision. Free with
/// [`knotlock_string_free`].
///
/// # Safety
/// `pkg` must be a live package handle.
#[no_mangle]
pub unsafe extern "C" fn knotlock_package_beta(pkg: *const KnotlockPackage) -> *mut c_char {
    if pkg.is_null() {
        return std::ptr::null_mut();
    }
    to_c_string((*pkg).package.beta().decimal().to_wire_string())
}

/// Significant digits carried by beta.
///
/// # Safety
/// `pkg` must be a live package handle.
#[no_mangle]
pub unsafe extern "C" fn knotlock_package_beta_precision(pkg: *const KnotlockPackage) -> u32 {
    if pkg.is_null() {
        return 0;
    }
    (*pkg).package.beta().decimal().precision()
}

/// Factor a decimal `N` back into (prime, twists) entries.
///
/// # Safety
/// `n_decimal` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn knotlock_decode(
    n_decimal: *const c_char,
    alpha: u32,
    out: *mut *mut KnotlockPayload,
) -> KnotlockStatus {
    guarded(|| {
        if out.is_null() {
            return KnotlockErrNullPointer;
        }
        let text = match read_str(n_decimal) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let n: Integer = match text.parse() {
            Ok(n) => n,
            Err(_) => return KnotlockErrParse,
        };
        match codec::decode(&n, alpha) {
            Ok(payload) => {
                *out = Box::into_raw(Box::new(KnotlockPayload { payload }));
                KnotlockOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// # Safety
/// `payload` must be a handle from [`knotlock_decode`] not yet freed (or NULL).
#[no_mangle]
pub unsafe extern "C" fn knotlock_payload_free(payload: *mut KnotlockPayload) {
    if !payload.is_null() {
        drop(Box::from_raw(payload));
    }
}

/// Number of strands in the payload.
///
/// # Safety
/// `payload` must be a live payload handle.
#[no_mangle]
pub unsafe extern "C" fn knotlock_payload_len(payload: *const KnotlockPayload) -> usize {
    if payload.is_null() {
        return 0;
    }
    (*payload).payload.strand_count()
}

/// Read entry `index` (ascending prime order): the prime as a decimal string
/// (free with [`knotlock_string_free`]) and its twist count.
///
/// # Safety
/// `payload` must be a live payload handle; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn knotlock_payload_entry(
    payload: *const KnotlockPayload,
    index: usize,
    prime_out: *mut *mut c_char,
    twists_out: *mut u32,
) -> KnotlockStatus {
    guarded(|| {
        if payload.is_null() || prime_out.is_null() || twists_out.is_null() {
            return KnotlockErrNullPointer;
        }
        let entries = (*payload).payload.entries();
        match entries.get(index) {
            Some((p, d)) => {
                *prime_out = to_c_string(p.to_string());
                *twists_out = *d;
                KnotlockOk
            }
            None => KnotlockErrInvalidArgument,
        }
    })
}

/// Recover N from `(alpha, beta, M)`. `beta_decimal` is the canonical wire
/// rendering (digits with an explicit decimal point) carrying exactly
/// `precision` significant digits. On success `n_out` receives a decimal
/// string (free with [`knotlock_string_free`]).
///
/// # Safety
/// `beta_decimal` must be a NUL-terminated string; `n_out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn knotlock_reconstruct_n(
    alpha: u32,
    beta_decimal: *const c_char,
    precision: u32,
    m: u32,
    n_out: *mut *mut c_char,
) -> KnotlockStatus {
    guarded(|| {
        if n_out.is_null() {
            return KnotlockErrNullPointer;
        }
        let text = match read_str(beta_decimal) {
            Ok(t) => t,
            Err(s) => return s,
        };
        let beta = match BigReal::from_wire_string(text, precision) {
            Ok(b) => b,
            Err(_) => return KnotlockErrParse,
        };
        match codec::reconstruct_n(alpha, &beta, m) {
            Ok(n) => {
                *n_out = to_c_string(n.to_string());
                KnotlockOk
            }
            Err(e) => status_of(&e),
        }
    })
}

/// Run a full in-process challenge-response session between two configs
/// (wire-grammar CONFIG documents). Writes the concatenated transcript
/// documents and sets `accepted_out` to 1 on ACCEPT, 0 otherwise.
///
/// # Safety
/// Config strings must be NUL-terminated; out-pointers must be writable.
#[no_mangle]
pub unsafe extern "C" fn knotlock_run_loopback(
    alice_config: *const c_char,
    bob_config: *const c_char,
    seed: u64,
    transcript_out: *mut *mut c_char,
    accepted_out: *mut i32,
) -> KnotlockStatus {
    guarded(|| {
        if transcript_out.is_null() || accepted_out.is_null() {
            return KnotlockErrNullPointer;
        }
        let alice = match read_str(alice_config).map(PartyConfig::parse) {
            Ok(Ok(cfg)) => cfg,
            Ok(Err(_)) => return KnotlockErrParse,
            Err(s) => return s,
        };
        let bob = match read_str(bob_config).map(PartyConfig::parse) {
            Ok(Ok(cfg)) => cfg,
            Ok(Err(_)) => return KnotlockErrParse,
            Err(s) => return s,
        };
        match harness::run_loopback_session(&alice, &bob, seed) {
            Ok(transcript) => {
                let mut text = String::new();
                for entry in &transcript.entries {
                    text.push_str(&entry.document);
                }
                *accepted_out = i32::from(transcript.accepted());
                *transcript_out = to_c_string(text);
                KnotlockOk
            }
            Err(_) => KnotlockErrProtocol,
        }
    })
}

/// Release a string returned by this library.
///
/// # Safety
/// `s` must be a string returned by a knotlock function, not yet freed (or
/// NULL).
#[no_mangle]
pub unsafe extern "C" fn knotlock_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Library version as a static string; do not free.
#[no_mangle]
pub extern "C" fn knotlock_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}
