//! Decimal floating-point reals with explicit significant-digit precision.
//!
//! A [`BigReal`] is `mantissa * 10^exponent` where the mantissa carries
//! exactly `precision` decimal digits (zero excepted). Every operation takes
//! the target precision explicitly and rounds half-even, so results are
//! deterministic and decimal wire strings are exact representations of the
//! value: parsing a rendered value reproduces it bit for bit.
//!
//! Negative values are supported so Newton corrections can overshoot; the
//! protocol-facing quantities are all positive.

use super::{digit_count, pow10, round_div_pow10_sticky};
use rug::ops::Pow;
use rug::{Complete, Integer};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BigReal {
    mantissa: Integer,
    exponent: i64,
    precision: u32,
}

fn normalize(mantissa: Integer, exponent: i64, precision: u32) -> BigReal {
    normalize_sticky(mantissa, exponent, precision, false)
}

fn normalize_sticky(
    mut mantissa: Integer,
    mut exponent: i64,
    precision: u32,
    sticky: bool,
) -> BigReal {
    assert!(precision >= 1, "precision must be at least 1");
    if mantissa.is_zero() {
        return BigReal {
            mantissa,
            exponent: 0,
            precision,
        };
    }
    let negative = mantissa < 0;
    if negative {
        mantissa = -mantissa;
    }
    let dc = digit_count(&mantissa);
    let p = precision as u64;
    if dc > p {
        let k = dc - p;
        mantissa = round_div_pow10_sticky(&mantissa, k, sticky);
        exponent = exponent.checked_add(k as i64).expect("exponent overflow");
        if digit_count(&mantissa) > p {
            // rounding carried into a new digit; mantissa is exactly 10^p
            mantissa /= 10u32;
            exponent = exponent.checked_add(1).expect("exponent overflow");
        }
    } else if dc < p {
        mantissa *= pow10(p - dc);
        exponent = exponent
            .checked_sub((p - dc) as i64)
            .expect("exponent overflow");
    }
    if negative {
        mantissa = -mantissa;
    }
    BigReal {
        mantissa,
        exponent,
        precision,
    }
}

impl BigReal {
    pub fn zero(precision: u32) -> Self {
        assert!(precision >= 1);
        BigReal {
            mantissa: Integer::new(),
            exponent: 0,
            precision,
        }
    }

    pub fn one(precision: u32) -> Self {
        Self::from_u64(1, precision)
    }

    pub fn from_u64(v: u64, precision: u32) -> Self {
        normalize(Integer::from(v), 0, precision)
    }

    pub fn from_integer(v: &Integer, precision: u32) -> Self {
        normalize(v.clone(), 0, precision)
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn is_zero(&self) -> bool {
        self.mantissa.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.mantissa > 0
    }

    /// Position of the leading digit: the value lies in
    /// `[10^(m-1), 10^m)` where `m` is the returned magnitude. Zero reports
    /// `i64::MIN`.
    pub fn magnitude(&self) -> i64 {
        if self.is_zero() {
            return i64::MIN;
        }
        self.exponent + self.precision as i64
    }

    pub fn neg(&self) -> Self {
        BigReal {
            mantissa: (-&self.mantissa).complete(),
            exponent: self.exponent,
            precision: self.precision,
        }
    }

    pub fn abs(&self) -> Self {
        BigReal {
            mantissa: self.mantissa.abs_ref().complete(),
            exponent: self.exponent,
            precision: self.precision,
        }
    }

    /// Re-round to a different precision.
    pub fn round_to(&self, precision: u32) -> Self {
        normalize(self.mantissa.clone(), self.exponent, precision)
    }

    pub fn mul(&self, other: &Self, precision: u32) -> Self {
        if self.is_zero() || other.is_zero() {
            return Self::zero(precision);
        }
        normalize(
            (&self.mantissa * &other.mantissa).complete(),
            self.exponent
                .checked_add(other.exponent)
                .expect("exponent overflow"),
            precision,
        )
    }

    pub fn square(&self, precision: u32) -> Self {
        if self.is_zero() {
            return Self::zero(precision);
        }
        normalize(
            self.mantissa.square_ref().complete(),
            self.exponent.checked_mul(2).expect("exponent overflow"),
            precision,
        )
    }

    pub fn add(&self, other: &Self, precision: u32) -> Self {
        if self.is_zero() {
            return other.round_to(precision);
        }
        if other.is_zero() {
            return self.round_to(precision);
        }
        let (hi, lo) = if self.exponent >= other.exponent {
            (self, other)
        } else {
            (other, self)
        };
        // When the small operand sits entirely below the kept digits it only
        // matters as a sticky bit.
        if hi.magnitude() - lo.magnitude() > precision as i64 + 4 {
            return hi.round_to(precision);
        }
        let shift = (hi.exponent - lo.exponent) as u64;
        let m = &hi.mantissa * pow10(shift) + &lo.mantissa;
        normalize(m, lo.exponent, precision)
    }

    pub fn sub(&self, other: &Self, precision: u32) -> Self {
        self.add(&other.neg(), precision)
    }

    /// Multiply by 2^k exactly (then round).
    fn mul_pow2(&self, k: u32, precision: u32) -> Self {
        normalize((&self.mantissa << k).complete(), self.exponent, precision)
    }

    pub fn div(&self, other: &Self, precision: u32) -> Self {
        assert!(!other.is_zero(), "division by zero");
        if self.is_zero() {
            return Self::zero(precision);
        }
        // Scale so the integer quotient carries `precision` + guard digits;
        // the remainder only survives as a sticky bit for tie-breaking.
        let scale = precision as u64 + 3 + other.precision as u64;
        let num = self.mantissa.abs_ref().complete() * pow10(scale);
        let den = other.mantissa.abs_ref().complete();
        let (q, r) = num.div_rem(den);
        let exponent = self
            .exponent
            .checked_sub(other.exponent)
            .and_then(|e| e.checked_sub(scale as i64))
            .expect("exponent overflow");
        let negative = (self.mantissa < 0) != (other.mantissa < 0);
        let q = if negative { -q } else { q };
        normalize_sticky(q, exponent, precision, !r.is_zero())
    }

    pub fn div_integer(&self, d: &Integer, precision: u32) -> Self {
        assert!(!d.is_zero());
        let dr = BigReal::from_integer(d, digit_count(&d.abs_ref().complete()).max(1) as u32);
        self.div(&dr, precision)
    }

    pub fn recip(&self, precision: u32) -> Self {
        BigReal::one(precision).div(self, precision)
    }

    /// `self^e` for `e >= 0` by square-and-multiply, rounding every step to
    /// `precision`.
    pub fn pow_integer(&self, e: &Integer, precision: u32) -> Self {
        assert!(*e >= 0);
        if e.is_zero() {
            return Self::one(precision);
        }
        let bits = e.significant_bits();
        let base = self.round_to(precision);
        let mut acc = base.clone();
        for i in (0..bits - 1).rev() {
            acc = acc.square(precision);
            if e.get_bit(i) {
                acc = acc.mul(&base, precision);
            }
        }
        acc
    }

    /// `self^(base^height)` as `height` successive small powers; fewer
    /// roundings than scanning the bits of the expanded exponent.
    pub(crate) fn pow_power_tower(&self, base: u32, height: u32, precision: u32) -> Self {
        assert!(base >= 1);
        let e = Integer::from(base);
        let mut acc = self.round_to(precision);
        for _ in 0..height {
            acc = acc.pow_integer(&e, precision);
        }
        acc
    }

    /// Square root via the integer square root of a scaled mantissa.
    pub fn sqrt(&self, precision: u32) -> Self {
        assert!(self.is_positive(), "sqrt of a non-positive value");
        let want = 2 * (precision as u64 + 2);
        let dc = self.precision as u64;
        let mut extra = want.saturating_sub(dc);
        if (self.exponent - extra as i64) % 2 != 0 {
            extra += 1;
        }
        let scaled = &self.mantissa * pow10(extra);
        let root = scaled.sqrt();
        normalize(root, (self.exponent - extra as i64) / 2, precision)
    }

    /// Natural logarithm.
    ///
    /// Values near 1 keep their full information: the difference `self - 1`
    /// is formed exactly before any rounding, so `ln` of a wire-precision
    /// beta close to 1 is still accurate.
    pub fn ln(&self, precision: u32) -> Self {
        assert!(self.is_positive(), "ln of a non-positive value");
        let work = precision + 30;
        let one = BigReal::one(work);
        let u = self.sub(&one, self.precision.max(work) + 4);
        if u.is_zero() {
            return BigReal::zero(precision);
        }
        if u.magnitude() <= -3 {
            // already 1 + u with |u| < 1e-3: series directly
            return ln_series(&u.round_to(work), work).round_to(precision);
        }
        // Split off the power of ten, reduce the [1, 10) part by square roots.
        let k10 = self.exponent + self.precision as i64 - 1;
        let mut y = normalize(self.mantissa.clone(), -(self.precision as i64 - 1), work);
        let mut halvings = 0u32;
        loop {
            let u = y.sub(&one, work);
            if u.is_zero() || u.magnitude() <= -6 {
                break;
            }
            y = y.sqrt(work);
            halvings += 1;
            assert!(halvings < 200, "ln reduction failed to converge");
        }
        let series = ln_series(&y.sub(&one, work), work);
        let mut result = series.mul_pow2(halvings, work);
        if k10 != 0 {
            let scale = BigReal::from_integer(&Integer::from(k10), 20);
            result = result.add(&ln10(work).mul(&scale, work), work);
        }
        result.round_to(precision)
    }

    /// e^self. Handles any magnitude by halving the argument and squaring
    /// back.
    pub fn exp(&self, precision: u32) -> Self {
        if self.is_zero() {
            return Self::one(precision);
        }
        let mut halvings = 0u32;
        // amplification of 2^halvings eats log10(2^halvings) guard digits
        let mag = self.magnitude().max(0) as u32;
        let work = precision + 20 + 2 * mag + 10;
        let two = Integer::from(2);
        let mut x = self.round_to(work);
        while x.magnitude() > -2 {
            x = x.div_integer(&two, work);
            halvings += 1;
            assert!(halvings < 256, "exp argument too large");
        }
        let mut sum = BigReal::one(work);
        let mut term = x.clone();
        let mut i = 2u64;
        while !term.is_zero() && term.magnitude() > -(work as i64) - 4 {
            sum = sum.add(&term, work);
            term = term.mul(&x, work).div_integer(&Integer::from(i), work);
            i += 1;
            assert!(i < 100_000, "exp series failed to converge");
        }
        let mut r = sum;
        for _ in 0..halvings {
            r = r.square(work);
        }
        r.round_to(precision)
    }

    /// Rough log10 of the value, good to ~1e-12 relative; used for cheap
    /// feasibility estimates only.
    pub fn log10_approx(&self) -> f64 {
        assert!(!self.is_zero());
        let (d, e2) = self.mantissa.to_f64_exp();
        d.abs().log10() + e2 as f64 * std::f64::consts::LOG10_2 + self.exponent as f64
    }

    /// Nearest-integer classification with the decisiveness threshold of a
    /// quarter: values farther than 0.25 from every integer are ambiguous.
    pub fn nearest_integer(&self) -> NearestInteger {
        assert!(self.is_positive());
        if self.exponent >= 0 {
            return NearestInteger::Exact(&self.mantissa * pow10(self.exponent as u64));
        }
        let f = (-self.exponent) as u64;
        let p = pow10(f);
        let (q, r) = self.mantissa.div_rem_ref(&p).complete();
        if r.is_zero() {
            return NearestInteger::Exact(q);
        }
        let quad: Integer = r << 2u32;
        if quad <= p {
            NearestInteger::Within(q)
        } else if quad >= &p * Integer::from(3) {
            NearestInteger::Within(q + 1u32)
        } else {
            NearestInteger::Ambiguous
        }
    }

    /// Canonical wire rendering: all `precision` significant digits with an
    /// explicit decimal point and no exponent. Requires a positive value
    /// whose integer part does not exceed the carried digits.
    pub fn to_wire_string(&self) -> String {
        assert!(self.is_positive(), "wire reals are positive");
        let digits = self.mantissa.to_string();
        debug_assert_eq!(digits.len(), self.precision as usize);
        let top = self.magnitude();
        let p = self.precision as i64;
        assert!(
            top <= p,
            "integer part wider than the carried significant digits"
        );
        if top == p {
            format!("{digits}.")
        } else if top >= 1 {
            let (int_part, frac_part) = digits.split_at(top as usize);
            format!("{int_part}.{frac_part}")
        } else {
            let zeros = (-top) as usize;
            format!("0.{}{}", "0".repeat(zeros), digits)
        }
    }

    /// Parses the canonical rendering back; `expected_precision` is the
    /// declared significant-digit count, which must match exactly.
    pub fn from_wire_string(s: &str, expected_precision: u32) -> Result<Self, String> {
        let dot = s.find('.').ok_or("missing decimal point")?;
        let (int_part, frac_part) = (&s[..dot], &s[dot + 1..]);
        if int_part.is_empty() {
            return Err("empty integer part".into());
        }
        if !int_part.bytes().all(|b| b.is_ascii_digit())
            || !frac_part.bytes().all(|b| b.is_ascii_digit())
        {
            return Err("non-digit in decimal".into());
        }
        if int_part.len() > 1 && int_part.starts_with('0') {
            return Err("leading zero in integer part".into());
        }
        let (digits, exponent) = if int_part == "0" {
            let stripped = frac_part.trim_start_matches('0');
            if stripped.is_empty() {
                return Err("value must be positive".into());
            }
            (stripped.to_string(), -(frac_part.len() as i64))
        } else {
            (format!("{int_part}{frac_part}"), -(frac_part.len() as i64))
        };
        if digits.len() != expected_precision as usize {
            return Err(format!(
                "carries {} significant digits, expected {}",
                digits.len(),
                expected_precision
            ));
        }
        let mantissa: Integer = digits.parse().map_err(|_| "bad mantissa".to_string())?;
        Ok(BigReal {
            mantissa,
            exponent,
            precision: expected_precision,
        })
    }

    /// Truncate to the first `keep` significant digits (no rounding). Used by
    /// the precision-breach tests to model lossy transmission.
    pub fn truncate_digits(&self, keep: u32) -> Self {
        assert!(keep >= 1 && keep <= self.precision);
        let drop = (self.precision - keep) as u64;
        let m = &self.mantissa / pow10(drop);
        BigReal {
            mantissa: m,
            exponent: self.exponent + drop as i64,
            precision: keep,
        }
    }
}

/// ln(1 + u) for small |u| by the alternating series.
fn ln_series(u: &BigReal, work: u32) -> BigReal {
    if u.is_zero() {
        return BigReal::zero(work);
    }
    debug_assert!(u.magnitude() <= -2);
    let mut sum = u.clone();
    let mut power = u.clone();
    let floor_mag = u.magnitude() - work as i64 - 4;
    let mut i = 2u64;
    loop {
        power = power.mul(u, work);
        if power.is_zero() || power.magnitude() < floor_mag {
            break;
        }
        let term = power.div_integer(&Integer::from(i), work);
        sum = if i.is_multiple_of(2) {
            sum.sub(&term, work)
        } else {
            sum.add(&term, work)
        };
        i += 1;
        assert!(i < 100_000, "ln series failed to converge");
    }
    sum
}

thread_local! {
    static LN10_CACHE: std::cell::RefCell<Option<(u32, BigReal)>> =
        const { std::cell::RefCell::new(None) };
}

fn ln10(work: u32) -> BigReal {
    LN10_CACHE.with(|cache| {
        let mut cache = cache.borrow_mut();
        if let Some((p, v)) = cache.as_ref() {
            if *p >= work {
                return v.round_to(work);
            }
        }
        let w = work + 10;
        let one = BigReal::one(w);
        let mut y = BigReal::from_u64(10, w);
        let mut halvings = 0u32;
        loop {
            let u = y.sub(&one, w);
            if u.magnitude() <= -6 {
                break;
            }
            y = y.sqrt(w);
            halvings += 1;
            assert!(halvings < 200);
        }
        let v = ln_series(&y.sub(&one, w), w)
            .mul_pow2(halvings, w)
            .round_to(work);
        *cache = Some((work, v.clone()));
        v
    })
}

/// Outcome of rounding a real to the nearest integer under the 0.25
/// decisiveness threshold.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NearestInteger {
    /// The value is an integer exactly.
    Exact(Integer),
    /// Within a quarter of this integer.
    Within(Integer),
    /// Farther than a quarter from every integer.
    Ambiguous,
}

impl NearestInteger {
    pub fn decisive(self) -> Option<Integer> {
        match self {
            NearestInteger::Exact(v) | NearestInteger::Within(v) => Some(v),
            NearestInteger::Ambiguous => None,
        }
    }
}

/// `n^(1/e)` to `precision` significant digits (round-half-even).
pub fn real_root(n: &Integer, e: &Integer, precision: u32) -> BigReal {
    real_root_impl(n, e, None, precision)
}

/// `real_root` specialized to tower exponents `alpha^m`; same result, cheaper
/// inner powering.
pub(crate) fn real_root_tower(n: &Integer, alpha: u32, m: u32, precision: u32) -> BigReal {
    let e = Integer::from(alpha).pow(m);
    real_root_impl(n, &e, Some((alpha, m)), precision)
}

fn real_root_impl(n: &Integer, e: &Integer, tower: Option<(u32, u32)>, precision: u32) -> BigReal {
    assert!(*n >= 1, "root argument must be at least 1");
    assert!(*e >= 1, "root degree must be at least 1");
    if *n == 1 {
        return BigReal::one(precision);
    }
    if *e == 1 {
        return BigReal::from_integer(n, precision);
    }
    let guard = 12u32;
    let target = precision as i64 + guard as i64;
    let e_digits = digit_count(e) as i64;

    // Seed z ~ n^(-1/e) through moderate-precision ln/exp: Newton's iteration
    // for the inverse root only converges once e * (relative error) < 1, so
    // the seed carries ~2*digits(e) digits.
    let seed_prec = (28 + 2 * e_digits) as u32;
    let ln_n = BigReal::from_integer(n, seed_prec + 10).ln(seed_prec + 10);
    let t = ln_n.div_integer(e, seed_prec + 10);
    let mut z = t.neg().exp(seed_prec);

    let pow_z = |z: &BigReal, w: u32| -> BigReal {
        match tower {
            Some((alpha, m)) => z.pow_power_tower(alpha, m, w),
            None => z.pow_integer(e, w),
        }
    };

    // Newton: z <- z + z * (1 - n*z^e) / e, precision roughly doubling.
    let mut correct = seed_prec as i64 - 6;
    let mut rounds = 0u32;
    while correct < target {
        let next = (2 * correct - e_digits - 4).min(target);
        assert!(next > correct, "root iteration stalled");
        let w = (next + 8) as u32;
        let n_w = BigReal::from_integer(n, w);
        let zp = pow_z(&z, w);
        let prod = zp.mul(&n_w, w);
        let h = BigReal::one(w).sub(&prod, w);
        let delta = z.mul(&h, w).div_integer(e, w);
        z = z.add(&delta, w);
        correct = next;
        rounds += 1;
        assert!(rounds < 64, "root iteration failed to converge");
    }
    z.recip(target as u32).round_to(precision)
}

/// `x^e` at `x`'s own precision (the transmitted-precision contract).
pub fn real_pow_int(x: &BigReal, e: &Integer) -> BigReal {
    assert!(*e >= 0);
    x.pow_integer(e, x.precision())
}
