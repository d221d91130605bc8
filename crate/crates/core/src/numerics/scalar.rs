//! Scalar arithmetic backends.
//!
//! Every probability-valued quantity in this crate is generic over [`Scalar`].
//! Two backends exist: exact arbitrary-precision rationals ([`BigRational`])
//! and IEEE 754 binary64 ([`f64`]). The backend is chosen once per computation
//! and carried in the type, so exact and floating-point values can never mix
//! inside a formula: mixing backends is a compile error.

use std::fmt::{Debug, Display};
use std::ops::{Add, Div, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// Which arithmetic backend a computation runs on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Backend {
    /// Arbitrary-precision rationals; identities hold to equality.
    Exact,
    /// 64-bit binary floats; long sums are compensated.
    Float,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Exact => "exact",
            Backend::Float => "float",
        }
    }
}

/// Alternating sums lose roughly `log10(condition)` decimal digits. Above
/// this condition estimate a float-mode result is flagged as unreliable.
pub const CANCELLATION_WARN_CONDITION: f64 = 1e12;

/// Accumulates many terms into one total.
///
/// The float implementation compensates rounding so that sums over up to
/// 2^28 terms do not drift; the exact implementation is a plain sum.
pub trait Accumulator<S>: Default {
    fn add(&mut self, value: S);
    fn total(&self) -> S;
}

#[derive(Debug, Default)]
pub struct ExactSum {
    total: BigRational,
}

impl Accumulator<BigRational> for ExactSum {
    fn add(&mut self, value: BigRational) {
        self.total += value;
    }

    fn total(&self) -> BigRational {
        self.total.clone()
    }
}

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Default, Clone, Copy)]
pub struct CompensatedSum {
    sum: f64,
    compensation: f64,
}

impl Accumulator<f64> for CompensatedSum {
    fn add(&mut self, value: f64) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.compensation += (self.sum - t) + value;
        } else {
            self.compensation += (value - t) + self.sum;
        }
        self.sum = t;
    }

    fn total(&self) -> f64 {
        self.sum + self.compensation
    }
}

/// A number in one fixed arithmetic backend.
pub trait Scalar:
    Sized
    + Clone
    + Debug
    + Display
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Neg<Output = Self>
{
    const BACKEND: Backend;
    type Accumulator: Accumulator<Self>;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_int(value: i64) -> Self;
    fn from_bigint(value: &BigInt) -> Self;
    /// Ratio of two big integers; `den` must be non-zero.
    fn from_big_ratio(num: &BigInt, den: &BigInt) -> Self;
    /// The value as an exact rational. Floats expand their binary value;
    /// `None` only for non-finite floats.
    fn to_exact(&self) -> Option<BigRational>;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// Multiplicative inverse; `self` must be non-zero.
    fn recip(&self) -> Self;
    /// Parse `"a/b"` ratios as well as integer and decimal literals. The
    /// exact backend reads decimals as fractions over powers of ten.
    fn parse(text: &str) -> Result<Self>;
    /// `"num/den"` rendering on the exact backend, `None` on float.
    fn as_fraction_string(&self) -> Option<String>;

    fn ratio(num: i64, den: i64) -> Self {
        Self::from_big_ratio(&BigInt::from(num), &BigInt::from(den))
    }

    /// k-th power with the convention `x^0 = 1` (also for x = 0).
    fn power(&self, k: u32) -> Self {
        if k <= 64 {
            // iterated multiplication is plenty at small exponents
            let mut acc = Self::one();
            for _ in 0..k {
                acc = acc * self.clone();
            }
            return acc;
        }
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut e = k;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc * base.clone();
            }
            e >>= 1;
            if e > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    fn is_zero(&self) -> bool {
        *self == Self::zero()
    }

    fn accumulator() -> Self::Accumulator {
        Self::Accumulator::default()
    }
}

impl Scalar for BigRational {
    const BACKEND: Backend = Backend::Exact;
    type Accumulator = ExactSum;

    fn zero() -> Self {
        Zero::zero()
    }

    fn one() -> Self {
        One::one()
    }

    fn from_int(value: i64) -> Self {
        BigRational::from_integer(BigInt::from(value))
    }

    fn from_bigint(value: &BigInt) -> Self {
        BigRational::from_integer(value.clone())
    }

    fn from_big_ratio(num: &BigInt, den: &BigInt) -> Self {
        BigRational::new(num.clone(), den.clone())
    }

    fn to_exact(&self) -> Option<BigRational> {
        Some(self.clone())
    }

    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }

    fn abs(&self) -> Self {
        Signed::abs(self)
    }

    fn recip(&self) -> Self {
        BigRational::recip(self)
    }

    fn parse(text: &str) -> Result<Self> {
        parse_exact(text)
    }

    fn as_fraction_string(&self) -> Option<String> {
        Some(format!("{}/{}", self.numer(), self.denom()))
    }
}

impl Scalar for f64 {
    const BACKEND: Backend = Backend::Float;
    type Accumulator = CompensatedSum;

    fn zero() -> Self {
        0.0
    }

    fn one() -> Self {
        1.0
    }

    fn from_int(value: i64) -> Self {
        value as f64
    }

    fn from_bigint(value: &BigInt) -> Self {
        value.to_f64().unwrap_or(f64::NAN)
    }

    fn from_big_ratio(num: &BigInt, den: &BigInt) -> Self {
        ToPrimitive::to_f64(&BigRational::new(num.clone(), den.clone())).unwrap_or(f64::NAN)
    }

    fn to_exact(&self) -> Option<BigRational> {
        BigRational::from_float(*self)
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn abs(&self) -> Self {
        f64::abs(*self)
    }

    fn recip(&self) -> Self {
        1.0 / self
    }

    fn parse(text: &str) -> Result<Self> {
        parse_float(text)
    }

    fn as_fraction_string(&self) -> Option<String> {
        None
    }
}

fn parse_error(input: &str, backend: &'static str, reason: &str) -> Error {
    Error::Parse {
        input: input.to_owned(),
        backend,
        reason: reason.to_owned(),
    }
}

fn parse_exact(text: &str) -> Result<BigRational> {
    let t = text.trim();
    let err = |reason: &str| parse_error(text, "exact", reason);
    if t.is_empty() {
        return Err(err("empty input"));
    }
    if let Some((num, den)) = t.split_once('/') {
        let n: BigInt = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: BigInt = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if d.is_zero() {
            return Err(err("zero denominator"));
        }
        return Ok(BigRational::new(n, d));
    }
    // decimal literal: [sign] digits [ '.' digits ] [ e [sign] digits ]
    let (mantissa, exp) = match t.split_once(['e', 'E']) {
        Some((m, e)) => (m, e.parse::<i32>().map_err(|_| err("bad exponent"))?),
        None => (t, 0i32),
    };
    let (int_part, frac_part) = match mantissa.split_once('.') {
        Some((i, f)) => (i, f),
        None => (mantissa, ""),
    };
    if frac_part.contains(['+', '-']) {
        return Err(err("misplaced sign"));
    }
    let digits = format!("{int_part}{frac_part}");
    if digits.is_empty() || digits == "+" || digits == "-" {
        return Err(err("no digits"));
    }
    let unscaled: BigInt = digits.parse().map_err(|_| err("bad digits"))?;
    let scale = i64::from(exp) - frac_part.len() as i64;
    if scale.unsigned_abs() > 100_000 {
        return Err(err("exponent out of range"));
    }
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(unscaled * ten.pow(scale as u32))
    } else {
        BigRational::new(unscaled, ten.pow(scale.unsigned_abs() as u32))
    })
}

fn parse_float(text: &str) -> Result<f64> {
    let t = text.trim();
    let err = |reason: &str| parse_error(text, "float", reason);
    if t.is_empty() {
        return Err(err("empty input"));
    }
    let value = if let Some((num, den)) = t.split_once('/') {
        let n: f64 = num.trim().parse().map_err(|_| err("bad numerator"))?;
        let d: f64 = den.trim().parse().map_err(|_| err("bad denominator"))?;
        if d == 0.0 {
            return Err(err("zero denominator"));
        }
        n / d
    } else {
        t.parse().map_err(|_| err("bad literal"))?
    };
    if !value.is_finite() {
        return Err(err("not finite"));
    }
    Ok(value)
}

/// Decimal expansion to 17 significant digits, suitable for CSV output.
///
/// Exact values are expanded by long division; floats expand their binary
/// value, so the text round-trips through `f64` parsing unchanged.
pub fn decimal_string<S: Scalar>(value: &S) -> String {
    let Some(exact) = value.to_exact() else {
        return format!("{}", value.to_f64());
    };
    decimal_17(&exact)
}

fn decimal_17(r: &BigRational) -> String {
    const DIGITS: usize = 17;
    if Zero::is_zero(r) {
        return "0".to_owned();
    }
    let negative = r.is_negative();
    let a = Signed::abs(r.numer());
    let b = r.denom().clone();
    // Scale so the floor quotient carries at least DIGITS + 1 digits.
    let shift =
        (DIGITS as i64 + 2 + b.to_string().len() as i64 - a.to_string().len() as i64).max(0) as u32;
    let scaled: BigInt = (&a * BigInt::from(10).pow(shift)) / &b;
    let mut digits: Vec<u8> = scaled.to_string().into_bytes();
    // exponent of the leading digit: digits[0] weighs 10^exp10
    let mut exp10 = digits.len() as i64 - 1 - i64::from(shift);
    // round half-up at DIGITS significant digits
    if digits.len() > DIGITS {
        let round_up = digits[DIGITS] >= b'5';
        digits.truncate(DIGITS);
        if round_up {
            let mut i = DIGITS;
            loop {
                if i == 0 {
                    digits.insert(0, b'1');
                    digits.truncate(DIGITS);
                    exp10 += 1;
                    break;
                }
                i -= 1;
                if digits[i] == b'9' {
                    digits[i] = b'0';
                } else {
                    digits[i] += 1;
                    break;
                }
            }
        }
    } else {
        digits.resize(DIGITS, b'0');
    }
    let digits = String::from_utf8(digits).expect("decimal digits");
    let sign = if negative { "-" } else { "" };
    if exp10 >= 0 {
        let int_len = exp10 as usize + 1;
        if int_len >= DIGITS {
            // all digits land left of the point; pad with zeros
            format!("{sign}{digits}{}", "0".repeat(int_len - DIGITS))
        } else {
            format!("{sign}{}.{}", &digits[..int_len], &digits[int_len..])
        }
    } else {
        let leading_zeros = (-exp10 - 1) as usize;
        format!("{sign}0.{}{}", "0".repeat(leading_zeros), digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rat(num: i64, den: i64) -> BigRational {
        <BigRational as Scalar>::ratio(num, den)
    }

    #[test]
    fn parse_exact_ratios_and_decimals() {
        assert_eq!(BigRational::parse("1/10").unwrap(), rat(1, 10));
        assert_eq!(BigRational::parse("-3/9").unwrap(), rat(-1, 3));
        assert_eq!(BigRational::parse("0.25").unwrap(), rat(1, 4));
        assert_eq!(BigRational::parse("1e-3").unwrap(), rat(1, 1000));
        assert_eq!(BigRational::parse("2.5e2").unwrap(), rat(250, 1));
        assert_eq!(BigRational::parse(" .5 ").unwrap(), rat(1, 2));
        assert_eq!(BigRational::parse("7").unwrap(), rat(7, 1));
        assert!(BigRational::parse("1/0").is_err());
        assert!(BigRational::parse("abc").is_err());
        assert!(BigRational::parse("").is_err());
        assert!(BigRational::parse("1.2.3").is_err());
    }

    #[test]
    fn parse_float_ratios_and_decimals() {
        assert_eq!(f64::parse("0.25").unwrap(), 0.25);
        assert_eq!(f64::parse("1/4").unwrap(), 0.25);
        assert!(f64::parse("1/0").is_err());
        assert!(f64::parse("inf").is_err());
        assert!(f64::parse("x").is_err());
    }

    #[test]
    fn rational_invariants_hold() {
        // lowest terms, positive denominator
        let v = BigRational::parse("4/-8").unwrap();
        assert_eq!(v.numer(), &BigInt::from(-1));
        assert_eq!(v.denom(), &BigInt::from(2));
        assert_eq!(v.as_fraction_string().unwrap(), "-1/2");
    }

    #[test]
    fn power_conventions() {
        assert_eq!(rat(0, 1).power(0), rat(1, 1));
        assert_eq!(rat(0, 1).power(3), rat(0, 1));
        assert_eq!(rat(2, 3).power(3), rat(8, 27));
        assert_eq!(Scalar::power(&0.0f64, 0), 1.0);
        // large exponents switch to squaring but stay exact
        assert_eq!(
            rat(1, 2).power(100),
            rat(1, 2).power(50) * rat(1, 2).power(50)
        );
    }

    #[test]
    fn compensated_sum_resists_cancellation() {
        let mut acc = CompensatedSum::default();
        for v in [1e200, 0.1, 0.2, 0.3, -1e200] {
            acc.add(v);
        }
        assert!((acc.total() - 0.6).abs() < 1e-15);
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(decimal_string(&rat(2, 9)), "0.22222222222222222");
        assert_eq!(decimal_string(&rat(1, 2)), "0.50000000000000000");
        assert_eq!(decimal_string(&rat(0, 1)), "0");
        assert_eq!(decimal_string(&rat(-1, 4)), "-0.25000000000000000");
        assert_eq!(decimal_string(&rat(119, 1)), "119.00000000000000");
        assert_eq!(decimal_string(&rat(1, 1000)), "0.0010000000000000000");
        // rounding at the 17th digit: 2/3 = 0.6666...
        assert_eq!(decimal_string(&rat(2, 3)), "0.66666666666666667");
        // float values expand their binary representation
        let text = decimal_string(&0.7f64);
        assert_eq!(text.parse::<f64>().unwrap(), 0.7);
    }

    #[test]
    fn decimal_rendering_large_values() {
        let big = BigRational::from_integer(BigInt::from(10).pow(21) * 3);
        let text = decimal_string(&big);
        assert_eq!(text, format!("3{}", "0".repeat(21)));
    }
}
