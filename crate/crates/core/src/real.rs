//! Extended-precision reals for sequence parameters.
//!
//! Parameters such as `alpha = sqrt(2)` are carried as a binary fixed-point
//! number `floor(x * 2^bits)` (default about 64 decimal digits) together with
//! an exact rational form when the input was rational. The hot loops never
//! touch the big integer: they use [`FixedAlpha`], a 128-bit fixed-point view
//! of the fractional part that supports exact wrapping products with integers.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Default working precision in decimal digits.
pub const DEFAULT_DIGITS: u32 = 64;

const GUARD_BITS: u32 = 32;

/// Number of fractional bits needed for `digits` decimal digits.
pub fn bits_for_digits(digits: u32) -> u32 {
    ((digits as f64) * std::f64::consts::LOG2_10).ceil() as u32 + 16
}

#[derive(Clone, Debug)]
pub struct ExtReal {
    /// floor(x * 2^bits)
    scaled: BigInt,
    bits: u32,
    /// (numerator, positive denominator) when the value is an exact rational.
    exact: Option<(BigInt, BigInt)>,
    label: String,
}

impl PartialEq for ExtReal {
    fn eq(&self, other: &Self) -> bool {
        match (&self.exact, &other.exact) {
            (Some((p, q)), Some((r, s))) => p * s == r * q,
            _ => self.bits == other.bits && self.scaled == other.scaled,
        }
    }
}

impl ExtReal {
    /// Parse a symbolic or decimal token at `digits` decimal digits.
    ///
    /// Accepted forms: decimal (`1.25`, `-3e-2`), rational (`7/3`), `sqrt:K`,
    /// `golden`, `pi`, optionally negated with a leading `-` and followed by an
    /// integer offset (`pi-3`, `sqrt:5+1`).
    pub fn parse(token: &str, digits: u32) -> Result<Self> {
        let bits = bits_for_digits(digits.max(1));
        let t = token.trim();
        if t.is_empty() {
            return Err(Error::InvalidInput("empty real literal".into()));
        }
        let (negate, body) = match t.strip_prefix('-') {
            Some(rest) if rest.starts_with(|c: char| c.is_ascii_alphabetic()) => (true, rest),
            _ => (false, t),
        };
        let (base, offset) = split_offset(body)?;
        let mut x = Self::parse_base(base, bits)?;
        if negate {
            x = x.neg();
        }
        if offset != 0 {
            x = x.add_int(offset);
        }
        x.label = t.to_string();
        Ok(x)
    }

    fn parse_base(base: &str, bits: u32) -> Result<Self> {
        let bad = || Error::InvalidInput(format!("cannot parse real literal `{base}`"));
        if let Some(k) = base.strip_prefix("sqrt:") {
            let k: u64 = k.parse().map_err(|_| bad())?;
            return Ok(Self::sqrt_int(k, bits));
        }
        match base {
            "golden" | "phi" => {
                let s5 = Self::sqrt_int(5, bits + 1);
                let one = BigInt::one() << (bits + 1);
                let scaled = (s5.scaled + one) >> 2u32;
                return Ok(Self { scaled, bits, exact: None, label: base.into() });
            }
            "pi" => return Ok(Self { scaled: pi_scaled(bits), bits, exact: None, label: base.into() }),
            _ => {}
        }
        if let Some((p, q)) = base.split_once('/') {
            let p: BigInt = p.trim().parse().map_err(|_| bad())?;
            let q: BigInt = q.trim().parse().map_err(|_| bad())?;
            if q.is_zero() {
                return Err(Error::InvalidInput(format!("zero denominator in `{base}`")));
            }
            return Ok(Self::from_rational(p, q, bits));
        }
        let (p, q) = parse_decimal(base).ok_or_else(bad)?;
        Ok(Self::from_rational(p, q, bits))
    }

    pub fn from_rational(p: BigInt, q: BigInt, bits: u32) -> Self {
        let (p, q) = if q.is_negative() { (-p, -q) } else { (p, q) };
        let g = p.gcd(&q);
        let (p, q) = if g.is_zero() { (p, q) } else { (p / &g, q / &g) };
        let scaled = (&p << bits).div_floor(&q);
        let label = format!("{p}/{q}");
        Self { scaled, bits, exact: Some((p, q)), label }
    }

    pub fn from_ratio(p: i64, q: i64) -> Self {
        Self::from_rational(BigInt::from(p), BigInt::from(q), bits_for_digits(DEFAULT_DIGITS))
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_ratio(n, 1)
    }

    /// Every finite double is a dyadic rational; this keeps it exactly.
    pub fn from_f64_exact(x: f64) -> Self {
        assert!(x.is_finite());
        let bits = bits_for_digits(DEFAULT_DIGITS);
        if x == 0.0 {
            return Self::from_rational(BigInt::zero(), BigInt::one(), bits);
        }
        let (mant, exp) = decompose_f64(x);
        let (p, q) = if exp >= 0 {
            (BigInt::from(mant) << exp as u32, BigInt::one())
        } else {
            (BigInt::from(mant), BigInt::one() << (-exp) as u32)
        };
        let mut r = Self::from_rational(p, q, bits);
        r.label = format!("{x:?}");
        r
    }

    pub fn sqrt_int(k: u64, bits: u32) -> Self {
        let radicand = BigInt::from(k) << (2 * bits);
        let scaled = radicand.sqrt();
        let root = (k as f64).sqrt().round() as u64;
        let exact = (root * root == k).then(|| (BigInt::from(root), BigInt::one()));
        Self { scaled, bits, exact, label: format!("sqrt:{k}") }
    }

    pub fn neg(&self) -> Self {
        // floor(-x 2^b) = -floor(x 2^b) - 1 unless x 2^b is an integer.
        let exact_scaled = self.is_dyadic_exact();
        let scaled = if exact_scaled { -&self.scaled } else { -&self.scaled - 1 };
        Self {
            scaled,
            bits: self.bits,
            exact: self.exact.as_ref().map(|(p, q)| (-p, q.clone())),
            label: format!("-({})", self.label),
        }
    }

    pub fn add_int(&self, n: i64) -> Self {
        Self {
            scaled: &self.scaled + (BigInt::from(n) << self.bits),
            bits: self.bits,
            exact: self.exact.as_ref().map(|(p, q)| (p + q * n, q.clone())),
            label: format!("{}{:+}", self.label, n),
        }
    }

    fn is_dyadic_exact(&self) -> bool {
        match &self.exact {
            Some((p, q)) => ((p << self.bits) % q).is_zero(),
            None => false,
        }
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn scaled(&self) -> &BigInt {
        &self.scaled
    }

    pub fn exact(&self) -> Option<(&BigInt, &BigInt)> {
        self.exact.as_ref().map(|(p, q)| (p, q))
    }

    pub fn is_zero(&self) -> bool {
        match &self.exact {
            Some((p, _)) => p.is_zero(),
            None => false,
        }
    }

    /// Exact integer value, if the number is one.
    pub fn as_integer(&self) -> Option<i64> {
        let (p, q) = self.exact.as_ref()?;
        if q.is_one() {
            p.to_i64()
        } else {
            None
        }
    }

    /// True when 2x is an integer (only decidable for exact rationals).
    pub fn is_half_integer(&self) -> bool {
        match &self.exact {
            Some((p, q)) => ((p * BigInt::from(2)) % q).is_zero(),
            None => false,
        }
    }

    /// Upper bound on |x - scaled / 2^bits|.
    pub fn abs_error(&self) -> f64 {
        if self.is_dyadic_exact() {
            0.0
        } else {
            2f64.powi(-(self.bits as i32) + 1)
        }
    }

    pub fn to_f64(&self) -> f64 {
        match &self.exact {
            Some((p, q)) => ratio_to_f64(p, q),
            None => ratio_to_f64(&self.scaled, &(BigInt::one() << self.bits)),
        }
    }

    pub fn floor(&self) -> BigInt {
        &self.scaled >> self.bits
    }

    /// Decimal expansion truncated toward minus infinity at `digits` places.
    pub fn decimal_string(&self, digits: u32) -> String {
        let ten = BigInt::from(10u32).pow(digits);
        let v = (&self.scaled * &ten) >> self.bits;
        let (sign, mag) = if v.sign() == Sign::Minus {
            // Round the magnitude so that the printed string is floor-correct.
            ("-", (-&v).to_string())
        } else {
            ("", v.to_string())
        };
        let mag = format!("{:0>width$}", mag, width = digits as usize + 1);
        let split = mag.len() - digits as usize;
        format!("{sign}{}.{}", &mag[..split], &mag[split..])
    }

    /// 128-bit fixed-point view used by the inner loops.
    pub fn fixed(&self) -> FixedAlpha {
        FixedAlpha::from_ext(self)
    }
}

impl fmt::Display for ExtReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.label)
    }
}

impl FromStr for ExtReal {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Self::parse(s, DEFAULT_DIGITS)
    }
}

impl Serialize for ExtReal {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.serialize_str(&self.label)
    }
}

impl<'de> Deserialize<'de> for ExtReal {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        ExtReal::parse(&s, DEFAULT_DIGITS).map_err(serde::de::Error::custom)
    }
}

/// `p / q` rounded to a double (to within one ulp).
pub fn ratio_to_f64(p: &BigInt, q: &BigInt) -> f64 {
    if p.is_zero() {
        return 0.0;
    }
    let shift = q.bits() as i64 - p.bits() as i64 + 64;
    let num = if shift >= 0 { p << shift as u32 } else { p >> (-shift) as u32 };
    let v = (num / q).to_f64().unwrap_or(f64::NAN);
    let half = shift / 2;
    v * 2f64.powi(-half as i32) * 2f64.powi(-(shift - half) as i32)
}

fn split_offset(body: &str) -> Result<(&str, i64)> {
    // Only symbolic bases take an offset; decimals like 1e-3 must not be split.
    let symbolic = body.starts_with(|c: char| c.is_ascii_alphabetic());
    if !symbolic {
        return Ok((body, 0));
    }
    if let Some(pos) = body.rfind(['+', '-']) {
        let (base, off) = body.split_at(pos);
        let off: i64 = off
            .trim_start_matches('+')
            .parse()
            .map_err(|_| Error::InvalidInput(format!("bad integer offset in `{body}`")))?;
        return Ok((base, off));
    }
    Ok((body, 0))
}

fn parse_decimal(s: &str) -> Option<(BigInt, BigInt)> {
    let (mantissa, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().ok()?),
        None => (s, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut p: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().ok()? };
    if neg {
        p = -p;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10u32);
    if scale >= 0 {
        Some((p * ten.pow(scale as u32), BigInt::one()))
    } else {
        Some((p, ten.pow((-scale) as u32)))
    }
}

fn decompose_f64(x: f64) -> (i64, i32) {
    let bits = x.to_bits();
    let sign = if bits >> 63 == 0 { 1i64 } else { -1 };
    let exponent = ((bits >> 52) & 0x7ff) as i32;
    let mantissa = if exponent == 0 {
        (bits & 0xf_ffff_ffff_ffff) << 1
    } else {
        (bits & 0xf_ffff_ffff_ffff) | 0x10_0000_0000_0000
    };
    (sign * mantissa as i64, exponent - 1075)
}

/// floor(pi * 2^bits) up to one unit, from Machin's formula.
fn pi_scaled(bits: u32) -> BigInt {
    let p = bits + GUARD_BITS;
    let pi = atan_inv(5, p) * 16 - atan_inv(239, p) * 4;
    pi >> GUARD_BITS
}

fn atan_inv(x: u32, p: u32) -> BigInt {
    let x = BigInt::from(x);
    let x2 = &x * &x;
    let mut term = (BigInt::one() << p) / &x;
    let mut sum = BigInt::zero();
    let mut k = 0u32;
    while !term.is_zero() {
        let t = &term / (2 * k + 1);
        if k.is_multiple_of(2) {
            sum += t;
        } else {
            sum -= t;
        }
        term /= &x2;
        k += 1;
    }
    sum
}

/// 128-bit fixed-point view of a real `x = int + frac / 2^128`.
///
/// Products `s * x mod 1` for integer `s` are exact modulo 2^128 via wrapping
/// multiplication, which is what keeps phases like `k n alpha / N` accurate
/// when `k n` is as large as 10^18.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FixedAlpha {
    pub int: i128,
    pub frac: u128,
    /// floor(frac^2 / 2^128)
    pub frac_sq: u128,
    pub frac_f64: f64,
    /// Bound on |x - (int + frac / 2^128)|.
    pub err: f64,
}

impl FixedAlpha {
    pub fn from_ext(x: &ExtReal) -> Self {
        let int = x.floor().to_i128().expect("integer part of parameter exceeds i128");
        let mask = (BigInt::one() << x.bits) - 1;
        let frac_big = &x.scaled & &mask;
        let frac = if x.bits >= 128 {
            (frac_big >> (x.bits - 128)).to_u128().unwrap()
        } else {
            (frac_big << (128 - x.bits)).to_u128().unwrap()
        };
        let mut err = x.abs_error();
        if x.bits > 128 {
            let low: BigInt = x.scaled() & ((BigInt::one() << (x.bits - 128)) - 1);
            if !low.is_zero() {
                err += 2f64.powi(-128);
            }
        }
        Self::from_parts(int, frac, err)
    }

    pub fn from_parts(int: i128, frac: u128, err: f64) -> Self {
        let frac_sq = mul_hi(frac, frac);
        let frac_f64 = frac_to_f64(frac);
        Self { int, frac, frac_sq, frac_f64, err }
    }

    pub fn to_f64(&self) -> f64 {
        self.int as f64 + self.frac_f64
    }

    /// frac(s * x) in [0, 1).
    #[inline]
    pub fn frac_times(&self, s: i128) -> f64 {
        // s * int is an integer; only the fractional part contributes.
        wrap_unit(frac_to_f64((s as u128).wrapping_mul(self.frac)))
    }
}

/// High 128 bits of a 128x128-bit product.
pub fn mul_hi(a: u128, b: u128) -> u128 {
    let (a1, a0) = (a >> 64, a & u64::MAX as u128);
    let (b1, b0) = (b >> 64, b & u64::MAX as u128);
    let p00 = a0 * b0;
    let p01 = a0 * b1;
    let p10 = a1 * b0;
    let p11 = a1 * b1;
    let mid = (p00 >> 64) + (p01 & u64::MAX as u128) + (p10 & u64::MAX as u128);
    p11 + (p01 >> 64) + (p10 >> 64) + (mid >> 64)
}

#[inline]
pub fn frac_to_f64(x: u128) -> f64 {
    // 2^-64 * (x >> 64) keeps 64 bits, more than a double can hold.
    (x >> 64) as u64 as f64 * (1.0 / 18446744073709551616.0)
        + (x as u64) as f64 * (1.0 / 340282366920938463463374607431768211456.0)
}

/// Reduce to [0, 1), mapping values that round up to 1.0 back to 0.
#[inline]
pub fn wrap_unit(x: f64) -> f64 {
    let r = x - x.floor();
    if r >= 1.0 {
        0.0
    } else {
        r
    }
}
