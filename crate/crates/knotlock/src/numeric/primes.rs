//! Prime machinery: Miller-Rabin certification, trial division, Pollard rho
//! (Brent's variant), factorization, the Euler totient, gcd, and modular
//! exponentiation.

use super::NumericError;
use crate::rng::SplitMix64;
use rug::ops::Pow;
use rug::{Complete, Integer};
use std::sync::OnceLock;

/// Trial-division bound used by [`factorize`] before falling back to rho.
const TRIAL_BOUND: u32 = 10_000;

/// Fixed Miller-Rabin rounds for candidates beyond the deterministic 64-bit
/// witness range. Probabilistic, with deterministically derived witnesses so
/// results are reproducible.
const LARGE_MR_ROUNDS: usize = 64;

/// Witness set that decides primality for every n < 3.3e24, which covers the
/// full 64-bit range.
const SMALL_WITNESSES: [u32; 12] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37];

static SMALL_PRIMES: OnceLock<Vec<u32>> = OnceLock::new();

/// All primes below 10^4, sieved once.
pub fn small_primes() -> &'static [u32] {
    SMALL_PRIMES.get_or_init(|| {
        let bound = TRIAL_BOUND as usize;
        let mut composite = vec![false; bound];
        let mut primes = Vec::new();
        for i in 2..bound {
            if !composite[i] {
                primes.push(i as u32);
                let mut j = i * i;
                while j < bound {
                    composite[j] = true;
                    j += i;
                }
            }
        }
        primes
    })
}

/// Greatest common divisor. At least one argument must be nonzero.
pub fn gcd(a: &Integer, b: &Integer) -> Integer {
    assert!(!(a.is_zero() && b.is_zero()), "gcd(0, 0) is undefined");
    a.gcd_ref(b).complete()
}

/// `base^exp mod modulus` by square-and-multiply over the exponent bits.
pub fn mod_pow(base: &Integer, exp: &Integer, modulus: &Integer) -> Result<Integer, NumericError> {
    if *modulus < 2 {
        return Err(NumericError::InvalidModulus);
    }
    if *base < 0 || *exp < 0 {
        return Err(NumericError::InvalidInput(
            "mod_pow operates on naturals".into(),
        ));
    }
    let mut result = Integer::from(1);
    let mut b = (base % modulus).complete();
    let bits = exp.significant_bits();
    for i in 0..bits {
        if exp.get_bit(i) {
            result = result * &b % modulus;
        }
        if i + 1 < bits {
            b = b.square() % modulus;
        }
    }
    Ok(result)
}

fn miller_rabin_witness(n: &Integer, witness: &Integer) -> bool {
    // n odd, n > 3; returns true when n is a strong probable prime to base
    // `witness`.
    let n_minus_1 = (n - 1u32).complete();
    let s = n_minus_1.find_one(0).expect("n-1 > 0");
    let d = (&n_minus_1 >> s).complete();
    let w = (witness % n).complete();
    if w.is_zero() {
        return true; // witness is a multiple of n; no information
    }
    let mut x = mod_pow(&w, &d, n).expect("modulus >= 2");
    if x == 1 || x == n_minus_1 {
        return true;
    }
    for _ in 1..s {
        x = x.square() % n;
        if x == n_minus_1 {
            return true;
        }
        if x == 1 {
            return false;
        }
    }
    false
}

/// Primality test: deterministic Miller-Rabin witnesses below 2^64,
/// 64 reproducible rounds above.
pub fn is_prime(n: &Integer) -> bool {
    if *n < 2 {
        return false;
    }
    for &p in &SMALL_WITNESSES {
        if *n == p {
            return true;
        }
        if n.is_divisible_u(p) {
            return false;
        }
    }
    if n.significant_bits() <= 64 {
        return SMALL_WITNESSES
            .iter()
            .all(|&w| miller_rabin_witness(n, &Integer::from(w)));
    }
    if !SMALL_WITNESSES
        .iter()
        .all(|&w| miller_rabin_witness(n, &Integer::from(w)))
    {
        return false;
    }
    // Fixed-seed witness stream: deterministic across runs.
    let mut rng = SplitMix64::new(WITNESS_STREAM_SEED);
    let span = (n - 4u32).complete();
    for _ in 0..LARGE_MR_ROUNDS - SMALL_WITNESSES.len() {
        let raw = random_integer_below(&mut rng, &span);
        let w = raw + 2u32;
        if !miller_rabin_witness(n, &w) {
            return false;
        }
    }
    true
}

const WITNESS_STREAM_SEED: u64 = 0x5EED_0F12_3456_789A;

fn random_integer_below(rng: &mut SplitMix64, bound: &Integer) -> Integer {
    // Uniform enough for witness selection: stitch 64-bit words and reduce.
    let words = (bound.significant_bits() as usize).div_ceil(64) + 1;
    let mut v = Integer::new();
    for _ in 0..words {
        v <<= 64u32;
        v += rng.next_u64();
    }
    v % bound
}

/// One Brent-Pollard rho attempt; returns a nontrivial factor of the odd
/// composite `n` when the walk with increment `c` finds one.
fn pollard_rho_brent(n: &Integer, c: u64) -> Option<Integer> {
    let one = Integer::from(1);
    let c = Integer::from(c);
    let f = |x: &Integer| -> Integer { (x.square_ref().complete() + &c) % n };
    let mut y = Integer::from(2);
    let mut r: u64 = 1;
    let mut q = Integer::from(1);
    let mut g = Integer::from(1);
    let mut x = Integer::new();
    let mut ys = Integer::new();
    const BATCH: u64 = 128;
    while g == one {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k: u64 = 0;
        while k < r && g == one {
            ys = y.clone();
            let steps = BATCH.min(r - k);
            for _ in 0..steps {
                y = f(&y);
                let diff = (&x - &y).complete().abs();
                q = q * diff % n;
            }
            g = gcd(&q, n);
            k += BATCH;
        }
        r *= 2;
        if r > 1 << 40 {
            return None; // give up on this increment
        }
    }
    if g == *n {
        // backtrack one step at a time
        loop {
            ys = f(&ys);
            let diff = (&x - &ys).complete().abs();
            g = gcd(&diff, n);
            if g > 1 {
                break;
            }
        }
    }
    if g == *n || g == 1 {
        None
    } else {
        Some(g)
    }
}

/// Divide every power of `p` out of `remaining`, returning the multiplicity.
/// Peels exponents in power-of-two chunks so huge multiplicities cost
/// O(log^2 e) big divisions instead of O(e).
fn divide_out(remaining: &mut Integer, p: &Integer) -> u64 {
    let mut total = 0u64;
    let mut step = 1u64;
    let mut chunk = p.clone();
    loop {
        if remaining.is_divisible(&chunk) {
            remaining.div_exact_mut(&chunk);
            total += step;
            let next = chunk.square_ref().complete();
            if remaining.is_divisible(&next) {
                chunk = next;
                step *= 2;
            }
        } else if step > 1 {
            step /= 2;
            chunk = p.pow_u32_checked(step);
        } else {
            break;
        }
    }
    total
}

trait PowU32Checked {
    fn pow_u32_checked(&self, e: u64) -> Integer;
}
impl PowU32Checked for Integer {
    fn pow_u32_checked(&self, e: u64) -> Integer {
        assert!(e <= u32::MAX as u64);
        Integer::from(self.pow(e as u32))
    }
}

/// An exact prime factorization: ascending primes with multiplicities.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Factorization {
    entries: Vec<(Integer, u64)>,
}

impl Factorization {
    pub fn entries(&self) -> &[(Integer, u64)] {
        &self.entries
    }

    /// Multiplies the factorization back out.
    pub fn product(&self) -> Integer {
        let mut acc = Integer::from(1);
        for (p, e) in &self.entries {
            let mut rem = *e;
            while rem > 0 {
                let chunk = rem.min(u32::MAX as u64);
                acc *= p.pow_u32_checked(chunk);
                rem -= chunk;
            }
        }
        acc
    }

    pub fn primes(&self) -> impl Iterator<Item = &Integer> {
        self.entries.iter().map(|(p, _)| p)
    }
}

/// Exact factorization of `n >= 2`: trial division below 10^4, then
/// Brent-Pollard rho with Miller-Rabin certification of every factor.
pub fn factorize(n: &Integer) -> Result<Factorization, NumericError> {
    if *n < 2 {
        return Err(NumericError::InvalidInput(
            "factorize requires n >= 2".into(),
        ));
    }
    let mut remaining = n.clone();
    let mut entries: Vec<(Integer, u64)> = Vec::new();
    for &p in small_primes() {
        if remaining == 1 {
            break;
        }
        if remaining.is_divisible_u(p) {
            let pi = Integer::from(p);
            let e = divide_out(&mut remaining, &pi);
            entries.push((pi, e));
        }
    }
    if remaining > 1 {
        let mut stack = vec![remaining];
        let mut found: Vec<Integer> = Vec::new();
        while let Some(m) = stack.pop() {
            if is_prime(&m) {
                found.push(m);
                continue;
            }
            let mut c = 1u64;
            let d = loop {
                if let Some(d) = pollard_rho_brent(&m, c) {
                    break d;
                }
                c += 1;
                assert!(c < 10_000, "rho failed to split a composite");
            };
            let other = (&m / &d).complete();
            stack.push(d);
            stack.push(other);
        }
        found.sort();
        let mut i = 0;
        while i < found.len() {
            let mut e = 1u64;
            while i + 1 < found.len() && found[i + 1] == found[i] {
                e += 1;
                i += 1;
            }
            entries.push((found[i].clone(), e));
            i += 1;
        }
    }
    entries.sort_by(|a, b| a.0.cmp(&b.0));
    let f = Factorization { entries };
    debug_assert_eq!(f.product(), *n);
    Ok(f)
}

/// Reference backend: pure trial division up to sqrt(n). Slow; used as an
/// independent cross-check for [`factorize`] on inputs below ~10^12.
pub fn factorize_trial_division(n: &Integer) -> Result<Factorization, NumericError> {
    if *n < 2 {
        return Err(NumericError::InvalidInput(
            "factorize requires n >= 2".into(),
        ));
    }
    let mut remaining = n.to_u64().ok_or_else(|| {
        NumericError::InvalidInput("trial-division backend is 64-bit only".into())
    })?;
    let mut entries = Vec::new();
    let mut p = 2u64;
    while p.saturating_mul(p) <= remaining {
        if remaining % p == 0 {
            let mut e = 0u64;
            while remaining % p == 0 {
                remaining /= p;
                e += 1;
            }
            entries.push((Integer::from(p), e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if remaining > 1 {
        entries.push((Integer::from(remaining), 1));
    }
    Ok(Factorization { entries })
}

/// Euler's totient from a factorization: phi = prod p^(e-1) * (p - 1).
pub fn totient(f: &Factorization) -> Integer {
    let mut acc = Integer::from(1);
    for (p, e) in f.entries() {
        assert!(*e >= 1);
        if *e > 1 {
            acc *= p.pow_u32_checked(e - 1);
        }
        acc *= (p - 1u32).complete();
    }
    acc
}

/// Smallest prime not dividing `n` (the deterministic witness base used in
/// the challenge-response fast path).
pub fn smallest_coprime_prime(n: &Integer) -> Integer {
    for &p in small_primes() {
        if !n.is_divisible_u(p) {
            return Integer::from(p);
        }
    }
    // Beyond the sieve: walk odd candidates.
    let mut cand = Integer::from(TRIAL_BOUND + 1);
    loop {
        if is_prime(&cand) && !n.is_divisible(&cand) {
            return cand;
        }
        cand += 2u32;
    }
}
