//! Arbitrary-precision real arithmetic used for every quantity the series,
//! operator, and bound computations produce.
//!
//! A [`HighPrecisionReal`] is a binary floating-point value with a
//! configurable mantissa size (at least [`MIN_PRECISION_BITS`] bits) and a
//! wide exponent range, so entries as small as `p^-q` for primes in the
//! thousands never underflow. Arithmetic between two values rounds to the
//! larger of their precisions.

use std::cell::RefCell;
use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, Consts, Radix, RoundingMode};
use serde::{Serialize, Serializer};

use crate::error::QncError;

/// Smallest permitted mantissa size.
pub const MIN_PRECISION_BITS: usize = 64;

const RM: RoundingMode = RoundingMode::ToEven;

thread_local! {
    static CONSTS: RefCell<Consts> = RefCell::new(
        Consts::new().expect("constants cache allocation cannot fail"),
    );
}

fn with_consts<R>(f: impl FnOnce(&mut Consts) -> R) -> R {
    CONSTS.with(|c| f(&mut c.borrow_mut()))
}

/// Arbitrary-precision real number. Carries no unit.
#[derive(Debug, Clone)]
pub struct HighPrecisionReal {
    value: BigFloat,
    bits: usize,
}

impl HighPrecisionReal {
    fn wrap(value: BigFloat, bits: usize) -> Self {
        Self { value, bits }
    }

    pub fn zero(bits: usize) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        Self::wrap(BigFloat::from_i64(0, bits), bits)
    }

    pub fn one(bits: usize) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        Self::wrap(BigFloat::from_i64(1, bits), bits)
    }

    pub fn from_u64(v: u64, bits: usize) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        Self::wrap(BigFloat::from_u64(v, bits), bits)
    }

    pub fn from_i64(v: i64, bits: usize) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        Self::wrap(BigFloat::from_i64(v, bits), bits)
    }

    pub fn from_f64(v: f64, bits: usize) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        Self::wrap(BigFloat::from_f64(v, bits), bits)
    }

    /// Exact power of two, `2^e`.
    pub fn pow2(e: i32, bits: usize) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        let mut v = BigFloat::from_i64(1, bits);
        // 1 is stored as 0.5 * 2^1; shifting the exponent scales by 2^e.
        v.set_exponent(1 + e);
        Self::wrap(v, bits)
    }

    /// Parse a decimal string at the given precision.
    pub fn parse_decimal(s: &str, bits: usize) -> Result<Self, QncError> {
        let bits = bits.max(MIN_PRECISION_BITS);
        let v = with_consts(|cc| BigFloat::parse(s, Radix::Dec, bits, RM, cc));
        if v.is_nan() {
            return Err(QncError::InvalidArgument(format!(
                "cannot parse {s:?} as a decimal number"
            )));
        }
        Ok(Self::wrap(v, bits))
    }

    pub fn precision_bits(&self) -> usize {
        self.bits
    }

    /// Same value rounded to a new precision.
    pub fn with_precision(&self, bits: usize) -> Self {
        let bits = bits.max(MIN_PRECISION_BITS);
        let mut v = self.value.clone();
        v.set_precision(bits, RM)
            .expect("set_precision only fails on zero target precision");
        Self::wrap(v, bits)
    }

    fn join(&self, rhs: &Self) -> usize {
        self.bits.max(rhs.bits)
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Self::wrap(self.value.add(&rhs.value, p, RM), p)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Self::wrap(self.value.sub(&rhs.value, p, RM), p)
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Self::wrap(self.value.mul(&rhs.value, p, RM), p)
    }

    pub fn div(&self, rhs: &Self) -> Self {
        let p = self.join(rhs);
        Self::wrap(self.value.div(&rhs.value, p, RM), p)
    }

    pub fn neg(&self) -> Self {
        Self::wrap(self.value.neg(), self.bits)
    }

    pub fn abs(&self) -> Self {
        let mut v = self.value.clone();
        v.set_sign(astro_float::Sign::Pos);
        Self::wrap(v, self.bits)
    }

    pub fn recip(&self) -> Self {
        Self::wrap(self.value.reciprocal(self.bits, RM), self.bits)
    }

    /// Integer power with a nonnegative exponent.
    pub fn powi(&self, n: usize) -> Self {
        Self::wrap(self.value.powi(n, self.bits, RM), self.bits)
    }

    /// Square root; `None` for negative input.
    pub fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        Some(Self::wrap(self.value.sqrt(self.bits, RM), self.bits))
    }

    /// Natural logarithm; `None` outside the domain.
    pub fn ln(&self) -> Option<Self> {
        if !self.is_positive() {
            return None;
        }
        let v = with_consts(|cc| self.value.ln(self.bits, RM, cc));
        Some(Self::wrap(v, self.bits))
    }

    /// Base-2 logarithm; `None` outside the domain.
    pub fn log2(&self) -> Option<Self> {
        if !self.is_positive() {
            return None;
        }
        let v = with_consts(|cc| self.value.log2(self.bits, RM, cc));
        Some(Self::wrap(v, self.bits))
    }

    pub fn exp(&self) -> Self {
        let v = with_consts(|cc| self.value.exp(self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    /// `2^self`.
    pub fn exp2(&self) -> Self {
        let two = BigFloat::from_i64(2, self.bits);
        let v = with_consts(|cc| two.pow(&self.value, self.bits, RM, cc));
        Self::wrap(v, self.bits)
    }

    /// Real power `self^e` for positive base.
    pub fn pow_real(&self, e: &Self) -> Option<Self> {
        if !self.is_positive() {
            return None;
        }
        let p = self.join(e);
        let v = with_consts(|cc| self.value.pow(&e.value, p, RM, cc));
        Some(Self::wrap(v, p))
    }

    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        !self.value.is_zero() && self.value.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.value.is_negative()
    }

    /// True when the stored value is an integer.
    pub fn is_integer(&self) -> bool {
        self.value.is_int()
    }

    /// Integer value as u64 when exactly representable and in range.
    pub fn to_u64_exact(&self) -> Option<u64> {
        if !self.is_integer() || self.is_negative() {
            return None;
        }
        if self.is_zero() {
            return Some(0);
        }
        let e = self.value.exponent()?;
        if !(1..=64).contains(&e) {
            return None;
        }
        let (words, _n, _sign, _e, _inexact) = self.value.as_raw_parts()?;
        // value = 0.mantissa * 2^e ; the top e bits of the mantissa form the integer
        let top = *words.last()?;
        let shifted = if e == 64 { top } else { top >> (64 - e as u32) };
        // remaining mantissa bits must be zero for exactness
        let low_bits_zero = e == 64 || (top << (e as u32)) == 0;
        let rest_zero = words[..words.len() - 1].iter().all(|w| *w == 0);
        if low_bits_zero && rest_zero {
            Some(shifted)
        } else {
            None
        }
    }

    /// Base-2 exponent of the value (`value = 0.mantissa * 2^e`), `None` for zero.
    pub fn exponent2(&self) -> Option<i32> {
        if self.value.is_zero() {
            None
        } else {
            self.value.exponent()
        }
    }

    /// Nearest binary64 value. Values with base-2 exponent below -996
    /// (about 1e-300) flush to zero; this keeps exports clear of the
    /// subnormal range.
    pub fn to_f64(&self) -> f64 {
        if self.value.is_nan() {
            return f64::NAN;
        }
        if self.value.is_zero() {
            return 0.0;
        }
        if self.value.is_inf_pos() {
            return f64::INFINITY;
        }
        if self.value.is_inf_neg() {
            return f64::NEG_INFINITY;
        }
        let Some((words, _n, sign, e, _inexact)) = self.value.as_raw_parts() else {
            return f64::NAN;
        };
        if e < -996 {
            return 0.0;
        }
        if e > 1024 {
            return if sign.is_negative() {
                f64::NEG_INFINITY
            } else {
                f64::INFINITY
            };
        }
        // top 128 mantissa bits, value = frac * 2^e with frac in [0.5, 1)
        let nw = words.len();
        let mut frac = words[nw - 1] as f64 / 2f64.powi(64);
        if nw >= 2 {
            frac += words[nw - 2] as f64 / 2f64.powi(128);
        }
        let v = frac * 2f64.powi(e);
        if sign.is_negative() {
            -v
        } else {
            v
        }
    }

    pub(crate) fn compare(&self, rhs: &Self) -> Option<Ordering> {
        self.value.cmp(&rhs.value).map(|s| s.cmp(&0))
    }

    pub fn min(self, other: Self) -> Self {
        if self <= other {
            self
        } else {
            other
        }
    }

    pub fn max(self, other: Self) -> Self {
        if self >= other {
            self
        } else {
            other
        }
    }
}

impl PartialEq for HighPrecisionReal {
    fn eq(&self, other: &Self) -> bool {
        self.compare(other) == Some(Ordering::Equal)
    }
}

impl PartialOrd for HighPrecisionReal {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        self.compare(other)
    }
}

impl fmt::Display for HighPrecisionReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.value)
    }
}

impl Serialize for HighPrecisionReal {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

/// Complex number with high-precision components, used for
/// character-weighted entries and basis computations.
#[derive(Debug, Clone)]
pub struct HpComplex {
    pub re: HighPrecisionReal,
    pub im: HighPrecisionReal,
}

impl HpComplex {
    pub fn new(re: HighPrecisionReal, im: HighPrecisionReal) -> Self {
        Self { re, im }
    }

    pub fn zero(bits: usize) -> Self {
        Self::new(HighPrecisionReal::zero(bits), HighPrecisionReal::zero(bits))
    }

    pub fn from_real(re: HighPrecisionReal) -> Self {
        let bits = re.precision_bits();
        Self::new(re, HighPrecisionReal::zero(bits))
    }

    pub fn from_f64(re: f64, im: f64, bits: usize) -> Self {
        Self::new(
            HighPrecisionReal::from_f64(re, bits),
            HighPrecisionReal::from_f64(im, bits),
        )
    }

    pub fn add(&self, rhs: &Self) -> Self {
        Self::new(self.re.add(&rhs.re), self.im.add(&rhs.im))
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        Self::new(self.re.sub(&rhs.re), self.im.sub(&rhs.im))
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let re = self.re.mul(&rhs.re).sub(&self.im.mul(&rhs.im));
        let im = self.re.mul(&rhs.im).add(&self.im.mul(&rhs.re));
        Self::new(re, im)
    }

    pub fn scale(&self, s: &HighPrecisionReal) -> Self {
        Self::new(self.re.mul(s), self.im.mul(s))
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), self.im.neg())
    }

    pub fn neg(&self) -> Self {
        Self::new(self.re.neg(), self.im.neg())
    }

    pub fn neg_conj(&self) -> Self {
        Self::new(self.re.neg(), self.im.clone())
    }

    pub fn norm_sq(&self) -> HighPrecisionReal {
        self.re.mul(&self.re).add(&self.im.mul(&self.im))
    }

    pub fn modulus(&self) -> HighPrecisionReal {
        self.norm_sq()
            .sqrt()
            .expect("norm_sq is nonnegative")
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_uses_max_precision() {
        let a = HighPrecisionReal::from_u64(1, 64);
        let b = HighPrecisionReal::from_u64(3, 256).recip();
        let s = a.add(&b);
        assert_eq!(s.precision_bits(), 256);
        let p = a.mul(&b);
        assert_eq!(p.precision_bits(), 256);
    }

    #[test]
    fn precision_floor_is_enforced() {
        let a = HighPrecisionReal::from_u64(7, 8);
        assert_eq!(a.precision_bits(), MIN_PRECISION_BITS);
    }

    #[test]
    fn pow2_is_exact() {
        let v = HighPrecisionReal::pow2(-100, 128);
        let w = HighPrecisionReal::from_u64(2, 128).powi(100).recip();
        let rel = v.sub(&w).abs().div(&w);
        assert!(rel.to_f64() < 1e-30, "pow2(-100) mismatch: {rel}");
        assert_eq!(HighPrecisionReal::pow2(3, 64).to_f64(), 8.0);
    }

    #[test]
    fn to_f64_roundtrip() {
        for &x in &[0.0, 1.0, -1.5, 0.00220482, 1.0e-300, -3.25e17, 7.0e-120] {
            let v = HighPrecisionReal::from_f64(x, 192);
            assert_eq!(v.to_f64(), x, "roundtrip failed for {x}");
        }
    }

    #[test]
    fn to_f64_flushes_deep_underflow() {
        let tiny = HighPrecisionReal::pow2(-1200, 192);
        assert!(!tiny.is_zero());
        assert_eq!(tiny.to_f64(), 0.0);
    }

    #[test]
    fn to_u64_exact() {
        assert_eq!(HighPrecisionReal::from_u64(97, 192).to_u64_exact(), Some(97));
        assert_eq!(HighPrecisionReal::from_u64(0, 192).to_u64_exact(), Some(0));
        assert_eq!(HighPrecisionReal::from_f64(2.5, 192).to_u64_exact(), None);
        assert_eq!(HighPrecisionReal::from_i64(-3, 192).to_u64_exact(), None);
        assert_eq!(
            HighPrecisionReal::from_u64(u64::MAX, 192).to_u64_exact(),
            Some(u64::MAX)
        );
    }

    #[test]
    fn subtraction_is_antisymmetric_bitwise() {
        let a = HighPrecisionReal::from_u64(3, 192).recip();
        let b = HighPrecisionReal::from_u64(7, 192).recip();
        let d1 = a.sub(&b);
        let d2 = b.sub(&a);
        assert!(d1.add(&d2).is_zero());
    }

    #[test]
    fn multiplication_commutes_bitwise() {
        let a = HighPrecisionReal::from_u64(3, 192).recip();
        let b = HighPrecisionReal::from_u64(0x1234_5678_9abc_def1, 192).recip();
        assert!(a.mul(&b).sub(&b.mul(&a)).is_zero());
    }

    #[test]
    fn parse_and_display() {
        let v = HighPrecisionReal::parse_decimal("0.00220482", 192).unwrap();
        assert!((v.to_f64() - 0.00220482).abs() < 1e-18);
        assert!(HighPrecisionReal::parse_decimal("not a number", 192).is_err());
        let s = v.to_string();
        let w = HighPrecisionReal::parse_decimal(&s, 192).unwrap();
        assert!(v.sub(&w).abs().to_f64() < 1e-60);
    }

    #[test]
    fn log2_matches_f64() {
        let v = HighPrecisionReal::from_u64(1217, 192);
        let l = v.log2().unwrap().to_f64();
        assert!((l - 1217f64.log2()).abs() < 1e-12);
        assert!(HighPrecisionReal::from_i64(-1, 64).log2().is_none());
    }

    #[test]
    fn complex_products() {
        let i = HpComplex::from_f64(0.0, 1.0, 128);
        let sq = i.mul(&i);
        assert_eq!(sq.re.to_f64(), -1.0);
        assert!(sq.im.is_zero());
        let z = HpComplex::from_f64(3.0, -4.0, 128);
        assert_eq!(z.modulus().to_f64(), 5.0);
        assert_eq!(z.norm_sq().to_f64(), 25.0);
    }

    #[test]
    fn huge_exponents_survive() {
        let b = HighPrecisionReal::from_u64(1217, 192);
        let big = b.powi(1_500_000);
        let tiny = big.recip();
        assert!(tiny.exponent2().unwrap() < -15_000_000);
        assert!(tiny.is_positive());
        assert_eq!(tiny.to_f64(), 0.0);
        let back = tiny.mul(&big);
        assert!((back.to_f64() - 1.0).abs() < 1e-40);
    }
}
