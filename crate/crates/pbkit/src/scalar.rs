//! Dual arithmetic: `f64` for speed, `BigRational` for certification.

use std::fmt::Debug;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};

use crate::error::{PbError, Result};

/// Absolute tolerance used by float comparisons throughout the crate.
pub const FLOAT_TOL: f64 = 1e-12;

/// Numeric field used by the generic algorithms.
pub trait Scalar:
    Clone + Debug + PartialOrd + num_traits::Num + Signed + Send + Sync + 'static
{
    /// True when arithmetic is exact.
    const EXACT: bool;

    fn from_int(v: i64) -> Self;
    fn from_rational(r: &BigRational) -> Self;
    fn to_f64(&self) -> f64;
    /// Rational view; exact for `f64` inputs (binary expansion).
    fn to_rational(&self) -> BigRational;

    /// Equality up to `tol` in float mode, exact equality otherwise.
    fn near(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self == other
        } else {
            (self.to_f64() - other.to_f64()).abs() <= tol
        }
    }

    /// `self < other` with float slack.
    fn definitely_lt(&self, other: &Self, tol: f64) -> bool {
        if Self::EXACT {
            self < other
        } else {
            self.to_f64() < other.to_f64() - tol
        }
    }

    /// Strictly greater than zero (`Signed::is_positive` accepts `+0.0`).
    fn gt_zero(&self) -> bool {
        self > &Self::zero()
    }

    /// Textual form: `num/den` for rationals, shortest round-trip decimal for floats.
    fn render(&self) -> String;
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn from_int(v: i64) -> Self {
        v as f64
    }
    fn from_rational(r: &BigRational) -> Self {
        rational_to_f64(r)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_rational(&self) -> BigRational {
        BigRational::from_float(*self).unwrap_or_else(BigRational::zero)
    }
    fn render(&self) -> String {
        format!("{self:?}")
    }
}

impl Scalar for BigRational {
    const EXACT: bool = true;

    fn from_int(v: i64) -> Self {
        BigRational::from_integer(BigInt::from(v))
    }
    fn from_rational(r: &BigRational) -> Self {
        r.clone()
    }
    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }
    fn to_rational(&self) -> BigRational {
        self.clone()
    }
    fn render(&self) -> String {
        render_rational(self)
    }
}

/// Build `n/d` as a rational.
pub fn ratio(n: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn rint(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// `n/d` rendering, or plain integer when the denominator is one.
pub fn render_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accurate conversion, robust to numerators and denominators beyond `f64` range.
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if r.is_zero() {
        return 0.0;
    }
    if let (Some(n), Some(d)) = (r.numer().to_f64(), r.denom().to_f64()) {
        if n.is_finite() && d.is_finite() && n.abs() < 1e300 && d < 1e300 {
            return n / d;
        }
    }
    let nb = r.numer().bits() as i64;
    let db = r.denom().bits() as i64;
    let shift = 64 - (nb - db);
    let scaled = if shift >= 0 {
        (r.numer() << shift as usize) / r.denom()
    } else {
        r.numer() / (r.denom() << (-shift) as usize)
    };
    ldexp(scaled.to_f64().unwrap_or(0.0), -shift)
}

/// `m * 2^e` without intermediate overflow.
pub fn ldexp(mut m: f64, mut e: i64) -> f64 {
    while e > 1000 {
        m *= 2f64.powi(1000);
        e -= 1000;
        if m.is_infinite() {
            return m;
        }
    }
    while e < -1000 {
        m *= 2f64.powi(-1000);
        e += 1000;
        if m == 0.0 {
            return m;
        }
    }
    m * 2f64.powi(e as i32)
}

/// Parse `a/b`, an integer, or a decimal (optionally with exponent) exactly.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let s = s.trim();
    if s.is_empty() {
        return Err(PbError::Parse("empty rational".into()));
    }
    if let Some((a, b)) = s.split_once('/') {
        let n: BigInt = a
            .trim()
            .parse()
            .map_err(|_| PbError::Parse(format!("bad numerator in {s:?}")))?;
        let d: BigInt = b
            .trim()
            .parse()
            .map_err(|_| PbError::Parse(format!("bad denominator in {s:?}")))?;
        if d.is_zero() {
            return Err(PbError::Parse(format!("zero denominator in {s:?}")));
        }
        return Ok(BigRational::new(n, d));
    }
    parse_decimal(s)
}

fn parse_decimal(s: &str) -> Result<BigRational> {
    let bad = || PbError::Parse(format!("not a number: {s:?}"));
    let (mant, exp) = match s.find(['e', 'E']) {
        Some(i) => (&s[..i], s[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (s, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (int_part, frac_part) = mant.split_once('.').unwrap_or((mant, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut n: BigInt = if digits.is_empty() { BigInt::zero() } else { digits.parse().map_err(|_| bad())? };
    if neg {
        n = -n;
    }
    let scale = exp - frac_part.len() as i32;
    let ten = BigInt::from(10);
    Ok(if scale >= 0 {
        BigRational::from_integer(n * num_traits::pow(ten, scale as usize))
    } else {
        BigRational::new(n, num_traits::pow(ten, (-scale) as usize))
    })
}

/// Best rational approximation with denominator at most `max_den` (continued fractions).
/// Returns the approximation and its absolute error.
pub fn snap_f64(x: f64, max_den: u64) -> (BigRational, f64) {
    if !x.is_finite() {
        return (BigRational::zero(), f64::INFINITY);
    }
    let exact = BigRational::from_float(x).unwrap_or_else(BigRational::zero);
    let max_den = BigInt::from(max_den.max(1));
    let (mut p0, mut q0, mut p1, mut q1) = (BigInt::zero(), BigInt::one(), BigInt::one(), BigInt::zero());
    let mut rem = exact.clone();
    let mut best = BigRational::from_integer(exact.floor().to_integer());
    loop {
        let a = rem.floor().to_integer();
        let p2 = &a * &p1 + &p0;
        let q2 = &a * &q1 + &q0;
        if q2 > max_den {
            // semiconvergent check
            let k = (&max_den - &q0).div_floor(&q1);
            let ps = &k * &p1 + &p0;
            let qs = &k * &q1 + &q0;
            if !qs.is_zero() {
                let semi = BigRational::new(ps, qs);
                if (&semi - &exact).abs() < (&best - &exact).abs() {
                    best = semi;
                }
            }
            break;
        }
        best = BigRational::new(p2.clone(), q2.clone());
        let frac = &rem - BigRational::from_integer(a);
        if frac.is_zero() {
            break;
        }
        rem = frac.recip();
        p0 = p1;
        q0 = q1;
        p1 = p2;
        q1 = q2;
    }
    let err = (rational_to_f64(&(&best - &exact))).abs();
    (best, err)
}

/// Exact dyadic rounding `round(x * 2^bits) / 2^bits`.
pub fn dyadic(x: f64, bits: u32) -> BigRational {
    let scale = 2f64.powi(bits as i32);
    let n = (x * scale).round();
    BigRational::new(
        BigInt::from_f64(n).unwrap_or_else(BigInt::zero),
        BigInt::one() << bits as usize,
    )
}
