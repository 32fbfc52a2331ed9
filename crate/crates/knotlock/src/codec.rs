//! The encoding at the center of everything: a twist vector with a distinct
//! prime per strand becomes the natural number `N = prod p_k^(alpha^d_k)`,
//! transmitted as `(alpha, beta, M)` with `beta = N^(alpha^-M)`; the receiver
//! recovers `N = beta^(alpha^M)` and reads the twist counts back out of its
//! prime factorization.

use crate::numeric::{
    self, ceil_log10, digit_count, factorize, is_prime, real_root, BigReal, Integer, NearestInteger,
};
use rug::ops::Pow;
use rug::Complete;
use thiserror::Error;

/// Twist counts are capped so `alpha^d` stays a sane integer exponent;
/// beyond this the encoded number would not fit in desk-scale memory.
const MAX_STRAND_EXPONENT: u64 = 1 << 20;

/// Guard digits added on top of the information-theoretic minimum by
/// [`contract_precision`].
pub const PRECISION_GUARD_DIGITS: u32 = 10;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CodecError {
    #[error("payload must contain at least one strand")]
    EmptyPayload,
    #[error("alpha must be an integer >= 2")]
    InvalidAlpha,
    #[error("prime {0} is assigned to more than one strand")]
    DuplicatePrime(Integer),
    #[error("{0} is not prime")]
    NotPrime(Integer),
    #[error("beta does not carry enough precision to pin down an integer")]
    PrecisionBreach,
    #[error("multiplicity {multiplicity} of prime {prime} is not a power of alpha")]
    NotAPowerOfAlpha { prime: Integer, multiplicity: u64 },
    #[error("input outside the operation's domain: {0}")]
    InvalidInput(String),
    #[error("encoding exceeds the supported desk scale: {0}")]
    TooLarge(String),
}

/// The semantic message: ordered (prime, half-twists) pairs plus the base
/// `alpha`. Entries are canonicalized to ascending prime order; the payload
/// is a set, and the decoder has no way to recover a strand order anyway.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodingPayload {
    entries: Vec<(Integer, u32)>,
    alpha: u32,
}

impl EncodingPayload {
    pub fn new(mut entries: Vec<(Integer, u32)>, alpha: u32) -> Result<Self, CodecError> {
        if entries.is_empty() {
            return Err(CodecError::EmptyPayload);
        }
        if alpha < 2 {
            return Err(CodecError::InvalidAlpha);
        }
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        for window in entries.windows(2) {
            if window[0].0 == window[1].0 {
                return Err(CodecError::DuplicatePrime(window[0].0.clone()));
            }
        }
        for (p, _) in &entries {
            if !is_prime(p) {
                return Err(CodecError::NotPrime(p.clone()));
            }
        }
        Ok(EncodingPayload { entries, alpha })
    }

    /// Convenience constructor from small primes.
    pub fn from_u64_primes(primes: &[u64], twists: &[u32], alpha: u32) -> Result<Self, CodecError> {
        if primes.len() != twists.len() {
            return Err(CodecError::InvalidInput(
                "primes and twists must have the same length".into(),
            ));
        }
        let entries = primes
            .iter()
            .map(|&p| Integer::from(p))
            .zip(twists.iter().copied())
            .collect();
        Self::new(entries, alpha)
    }

    pub fn entries(&self) -> &[(Integer, u32)] {
        &self.entries
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn strand_count(&self) -> usize {
        self.entries.len()
    }

    /// The twist vector in entry order.
    pub fn twists(&self) -> Vec<u32> {
        self.entries.iter().map(|(_, d)| *d).collect()
    }

    /// M: total half-twists.
    pub fn total_twists(&self) -> u32 {
        self.entries.iter().map(|(_, d)| *d).sum()
    }

    pub fn primes(&self) -> impl Iterator<Item = &Integer> {
        self.entries.iter().map(|(p, _)| p)
    }
}

/// `beta` in both its symbolic form (base and per-prime exponent offsets
/// `d_k - M`) and its decimal rendering at contract precision.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BetaValue {
    alpha: u32,
    terms: Vec<(Integer, i64)>,
    decimal: BigReal,
}

impl BetaValue {
    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    /// `(p_k, d_k - M)` pairs; every exponent offset is <= 0.
    pub fn terms(&self) -> &[(Integer, i64)] {
        &self.terms
    }

    pub fn decimal(&self) -> &BigReal {
        &self.decimal
    }

    /// Evaluates the symbolic product `prod p^(alpha^(d-M))` numerically,
    /// factor by factor. An independent route to the same digits as
    /// `real_root(N, alpha^M, precision)`; the two must agree.
    pub fn evaluate_exact_form(&self, precision: u32) -> BigReal {
        let work = precision + 12;
        let mut acc = BigReal::one(work);
        for (p, t) in &self.terms {
            debug_assert!(*t <= 0);
            let factor = if *t == 0 {
                BigReal::from_integer(p, work)
            } else {
                let degree = Integer::from(self.alpha).pow((-*t) as u32);
                real_root(p, &degree, work)
            };
            acc = acc.mul(&factor, work);
        }
        acc.round_to(precision)
    }
}

/// A fully encoded message: the invariant `N`, the framing total `M`, the
/// base, and `beta`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EncodedPackage {
    n: Integer,
    m: u32,
    alpha: u32,
    beta: BetaValue,
}

impl EncodedPackage {
    pub fn n(&self) -> &Integer {
        &self.n
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    pub fn alpha(&self) -> u32 {
        self.alpha
    }

    pub fn beta(&self) -> &BetaValue {
        &self.beta
    }
}

/// Decimal digits `beta` must carry so that `beta^(alpha^M)` pins down `N`:
/// the digits of `N` itself, the digits the exponent amplifies away, and a
/// guard. A relative error `e` in beta becomes `alpha^M * e` in the result.
pub fn contract_precision(n: &Integer, alpha: u32, m: u32) -> Result<u32, CodecError> {
    if *n < 1 {
        return Err(CodecError::InvalidInput("n must be >= 1".into()));
    }
    if alpha < 2 {
        return Err(CodecError::InvalidAlpha);
    }
    let amplification = Integer::from(alpha).pow(m);
    let d = ceil_log10(n) + ceil_log10(&amplification) + PRECISION_GUARD_DIGITS as u64;
    u32::try_from(d).map_err(|_| CodecError::TooLarge("contract precision exceeds u32".into()))
}

/// Encode a payload into `(N, M, beta)`. `N` is exact integer arithmetic;
/// `beta` is rendered at contract precision.
pub fn encode(payload: &EncodingPayload) -> Result<EncodedPackage, CodecError> {
    let alpha = payload.alpha();
    let mut n = Integer::from(1);
    let mut m: u64 = 0;
    for (p, d) in payload.entries() {
        let exp = (alpha as u64)
            .checked_pow(*d)
            .filter(|&e| e <= MAX_STRAND_EXPONENT)
            .ok_or_else(|| {
                CodecError::TooLarge(format!("alpha^d = {alpha}^{d} exceeds the strand bound"))
            })?;
        n *= p.pow(exp as u32).complete();
        m += *d as u64;
    }
    let m = u32::try_from(m).map_err(|_| CodecError::TooLarge("M exceeds u32".into()))?;
    let precision = contract_precision(&n, alpha, m)?;
    let decimal = numeric::real_root_tower(&n, alpha, m, precision);
    let terms = payload
        .entries()
        .iter()
        .map(|(p, d)| (p.clone(), *d as i64 - m as i64))
        .collect();
    Ok(EncodedPackage {
        n,
        m,
        alpha,
        beta: BetaValue {
            alpha,
            terms,
            decimal,
        },
    })
}

/// Recover `N = beta^(alpha^M)`.
///
/// Enforces the transmission contract both ways: the powered value must land
/// within 0.25 of an integer, and `beta` must carry at least the contract
/// precision (minus guard digits) for the integer it claims to encode. An
/// under-precise beta therefore fails with [`CodecError::PrecisionBreach`]
/// instead of silently producing a wrong integer.
pub fn reconstruct_n(alpha: u32, beta: &BigReal, m: u32) -> Result<Integer, CodecError> {
    if alpha < 2 {
        return Err(CodecError::InvalidAlpha);
    }
    if !beta.is_positive() {
        return Err(CodecError::InvalidInput("beta must be positive".into()));
    }
    let amplification = Integer::from(alpha).pow(m);
    let amp_digits = ceil_log10(&amplification);

    // Cheap infeasibility estimate before paying for the powering: a lower
    // bound on the result's digit count, with an explicit allowance for the
    // f64 error (which the huge exponent amplifies). Only hopeless inputs
    // are rejected here; the exact check below is authoritative.
    let e_f64 = amplification.to_f64();
    let est_result_digits = e_f64 * beta.log10_approx();
    if !est_result_digits.is_finite() {
        return Err(CodecError::PrecisionBreach);
    }
    // log10_approx is good to ~1e-10 absolute on megabit mantissas; the
    // exponent amplifies that, so the allowance must too
    let est_error = e_f64 * 1e-9 + 4.0;
    let required_lower = (est_result_digits - est_error).floor() + amp_digits as f64;
    if (beta.precision() as f64) + 2.0 < required_lower {
        return Err(CodecError::PrecisionBreach);
    }

    let work = beta.precision() + 8;
    let powered = beta.pow_power_tower(alpha, m, work);
    // More digits than beta could possibly pin down: refuse before the
    // integer conversion materializes something astronomical.
    if powered.magnitude() > beta.precision() as i64 + 2 {
        return Err(CodecError::PrecisionBreach);
    }
    let n = match powered.nearest_integer() {
        NearestInteger::Exact(v) | NearestInteger::Within(v) => v,
        NearestInteger::Ambiguous => return Err(CodecError::PrecisionBreach),
    };
    if n < 1 {
        return Err(CodecError::PrecisionBreach);
    }
    // Post-hoc contract check against the integer actually recovered.
    // digit_count rather than ceil(log10): a beta truncated down to a round
    // number like 10^k looks exactly integral yet pins down nothing
    let required_min = digit_count(&n) + amp_digits;
    if (beta.precision() as u64) < required_min {
        return Err(CodecError::PrecisionBreach);
    }
    Ok(n)
}

/// Factor `N` and read the twist counts back: every multiplicity must be a
/// pure power of `alpha`. Entries come back in ascending prime order.
pub fn decode(n: &Integer, alpha: u32) -> Result<EncodingPayload, CodecError> {
    if *n < 2 {
        return Err(CodecError::InvalidInput("decode requires n >= 2".into()));
    }
    if alpha < 2 {
        return Err(CodecError::InvalidAlpha);
    }
    let factorization = factorize(n).map_err(|e| CodecError::InvalidInput(e.to_string()))?;
    let mut entries = Vec::new();
    for (p, multiplicity) in factorization.entries() {
        let mut rest = *multiplicity;
        let mut d = 0u32;
        while rest % alpha as u64 == 0 {
            rest /= alpha as u64;
            d += 1;
        }
        if rest != 1 {
            return Err(CodecError::NotAPowerOfAlpha {
                prime: p.clone(),
                multiplicity: *multiplicity,
            });
        }
        entries.push((p.clone(), d));
    }
    EncodingPayload::new(entries, alpha)
}

/// Numerical self-test of the twist identity
/// `M = log_alpha( sum_k alpha^(d_k) * log_beta(p_k) )`, evaluated from the
/// transmitted decimal beta. True when the recomputed M agrees with the
/// payload's total within 1e-6.
pub fn verify_twist_identity(payload: &EncodingPayload, beta: &BigReal) -> bool {
    const WORK: u32 = 48;
    if !beta.is_positive() {
        return false;
    }
    let ln_beta = beta.ln(WORK);
    if ln_beta.is_zero() {
        return false;
    }
    let alpha = payload.alpha();
    let mut total = BigReal::zero(WORK);
    for (p, d) in payload.entries() {
        let weight = Integer::from(alpha).pow(*d);
        let term = BigReal::from_integer(p, WORK)
            .ln(WORK)
            .mul(&BigReal::from_integer(&weight, WORK), WORK);
        total = total.add(&term, WORK);
    }
    let ratio = total.div(&ln_beta, WORK);
    if !ratio.is_positive() {
        return false;
    }
    let m_recomputed = ratio
        .ln(WORK)
        .div(&BigReal::from_u64(alpha as u64, WORK).ln(WORK), WORK);
    let m_stated = BigReal::from_u64(payload.total_twists() as u64, WORK);
    let diff = m_recomputed.sub(&m_stated, WORK);
    // |diff| < 1e-6 <=> leading digit sits at or below the 1e-7 place
    diff.is_zero() || diff.magnitude() <= -6
}
