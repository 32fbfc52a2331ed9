//! Arbitrary-size natural-number arithmetic and decimal reals.
//!
//! Naturals are [`rug::Integer`] values; the operations here validate
//! non-negativity and range at their boundaries instead of wrapping the type.
//! [`BigReal`] is a positive decimal floating-point number carried at an
//! explicit number of significant digits, with round-half-even everywhere, so
//! that the decimal strings on the wire round-trip without base-conversion
//! error.

mod primes;
mod real;

pub use primes::{
    factorize, factorize_trial_division, gcd, is_prime, mod_pow, small_primes,
    smallest_coprime_prime, totient, Factorization,
};
pub(crate) use real::real_root_tower;
pub use real::{real_pow_int, real_root, BigReal, NearestInteger};
pub use rug::Integer;

use rug::Complete;
use std::cell::RefCell;
use std::collections::HashMap;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum NumericError {
    /// Input outside the operation's domain (for example `factorize(n)` with
    /// `n < 2`).
    #[error("input outside the operation's domain: {0}")]
    InvalidInput(String),
    /// Modulus below 2 passed to a modular operation.
    #[error("modulus must be at least 2")]
    InvalidModulus,
}

thread_local! {
    static POW10_CACHE: RefCell<HashMap<u64, Integer>> = RefCell::new(HashMap::new());
}

/// 10^k with a small thread-local cache; the real arithmetic divides by the
/// same handful of powers over and over while rounding.
pub(crate) fn pow10(k: u64) -> Integer {
    assert!(k <= u32::MAX as u64, "power of ten out of supported range");
    POW10_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        if cache.len() > 96 {
            cache.clear();
        }
        cache
            .entry(k)
            .or_insert_with(|| Integer::from(Integer::u_pow_u(10, k as u32)))
            .clone()
    })
}

/// Number of decimal digits of `x >= 0` (1 for zero).
pub(crate) fn digit_count(x: &Integer) -> u64 {
    debug_assert!(*x >= 0);
    if x.is_zero() {
        return 1;
    }
    let bits = x.significant_bits() as f64;
    let mut d = ((bits - 1.0) * std::f64::consts::LOG10_2).floor() as u64 + 1;
    while *x >= pow10(d) {
        d += 1;
    }
    while d > 1 && *x < pow10(d - 1) {
        d -= 1;
    }
    d
}

/// Smallest `k >= 0` with `10^k >= x`, for `x >= 1`.
pub(crate) fn ceil_log10(x: &Integer) -> u64 {
    debug_assert!(*x >= 1);
    let d = digit_count(x);
    if *x == pow10(d - 1) {
        d - 1
    } else {
        d
    }
}

/// Round-half-even division of `m >= 0` by `10^k`. The sticky flag marks
/// that `m` already under-represents the true value, so exact ties round
/// correctly after a truncating division.
pub(crate) fn round_div_pow10_sticky(m: &Integer, k: u64, sticky: bool) -> Integer {
    debug_assert!(*m >= 0);
    let p = pow10(k);
    let (q, r) = m.div_rem_ref(&p).complete();
    let twice: Integer = r << 1u32;
    match twice.cmp(&p) {
        std::cmp::Ordering::Less => q,
        std::cmp::Ordering::Greater => q + 1u32,
        std::cmp::Ordering::Equal => {
            if sticky || q.is_odd() {
                q + 1u32
            } else {
                q
            }
        }
    }
}
