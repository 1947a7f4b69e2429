//! Minimal arbitrary-precision binary float used by the power-sum recursion.

use num_bigint::BigInt;
use num_traits::{Float, Signed, ToPrimitive, Zero};

use crate::scalar::ldexp;

/// `m * 2^e`, mantissa truncated to `prec` bits after every operation.
#[derive(Clone, Debug)]
pub(crate) struct BigFloat {
    m: BigInt,
    e: i64,
    prec: u64,
}

impl BigFloat {
    pub fn zero(prec: u64) -> Self {
        Self { m: BigInt::zero(), e: 0, prec }
    }

    pub fn from_f64(x: f64, prec: u64) -> Self {
        if x == 0.0 {
            return Self::zero(prec);
        }
        let (mant, exp, sign) = x.integer_decode();
        let m = BigInt::from(mant) * i64::from(sign);
        Self { m, e: exp as i64, prec }.norm()
    }

    fn norm(mut self) -> Self {
        let b = self.m.bits();
        if b > self.prec {
            let s = b - self.prec;
            self.m >>= s as usize;
            self.e += s as i64;
        }
        self
    }

    /// Approximate `log2 |x|`; `-inf` for zero.
    pub fn log2_abs(&self) -> f64 {
        if self.m.is_zero() {
            return f64::NEG_INFINITY;
        }
        let b = self.m.bits() as i64;
        let top = if b > 60 { (&self.m >> (b - 60) as usize).abs() } else { self.m.abs() };
        let shift = if b > 60 { b - 60 } else { 0 };
        top.to_f64().unwrap_or(1.0).log2() + (shift + self.e) as f64
    }

    pub fn to_f64(&self) -> f64 {
        if self.m.is_zero() {
            return 0.0;
        }
        let b = self.m.bits() as i64;
        let (top, e) = if b > 62 {
            (&self.m >> (b - 62) as usize, self.e + b - 62)
        } else {
            (self.m.clone(), self.e)
        };
        ldexp(top.to_f64().unwrap_or(0.0), e)
    }

    pub fn add(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        if self.m.is_zero() {
            return Self { prec, ..o.clone() }.norm();
        }
        if o.m.is_zero() {
            return Self { prec, ..self.clone() }.norm();
        }
        let (hi, lo) = if self.e >= o.e { (self, o) } else { (o, self) };
        let top_hi = hi.m.bits() as i64 + hi.e;
        let top_lo = lo.m.bits() as i64 + lo.e;
        if top_lo < top_hi - prec as i64 - 4 {
            return Self { prec, ..hi.clone() }.norm();
        }
        let m = (&hi.m << (hi.e - lo.e) as usize) + &lo.m;
        Self { m, e: lo.e, prec }.norm()
    }

    pub fn neg(&self) -> Self {
        Self { m: -&self.m, e: self.e, prec: self.prec }
    }

    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        Self { m: &self.m * &o.m, e: self.e + o.e, prec }.norm()
    }

    pub fn div(&self, o: &Self) -> Self {
        let prec = self.prec.max(o.prec);
        let s = prec + o.m.bits() + 2;
        let m = (&self.m << s as usize) / &o.m;
        Self { m, e: self.e - o.e - s as i64, prec }.norm()
    }

    pub fn div_u64(&self, k: u64) -> Self {
        let m = (&self.m << 64usize) / BigInt::from(k);
        Self { m, e: self.e - 64, prec: self.prec }.norm()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn arithmetic_matches_f64() {
        let a = BigFloat::from_f64(0.3, 200);
        let b = BigFloat::from_f64(1.7e-5, 200);
        assert!((a.add(&b).to_f64() - (0.3 + 1.7e-5)).abs() < 1e-16);
        assert!((a.sub(&b).to_f64() - (0.3 - 1.7e-5)).abs() < 1e-16);
        assert!((a.mul(&b).to_f64() - 0.3 * 1.7e-5).abs() < 1e-20);
        assert!((a.div(&b).to_f64() / (0.3 / 1.7e-5) - 1.0).abs() < 1e-15);
        assert!((a.div_u64(7).to_f64() - 0.3 / 7.0).abs() < 1e-17);
    }

    #[test]
    fn cancellation_keeps_precision() {
        let big = BigFloat::from_f64(1e30, 300);
        let one = BigFloat::from_f64(1.0, 300);
        let r = big.add(&one).sub(&big);
        assert_eq!(r.to_f64(), 1.0);
    }

    #[test]
    fn extreme_exponents() {
        let mut x = BigFloat::from_f64(1e-300, 128);
        for _ in 0..5 {
            x = x.mul(&x);
        }
        assert_eq!(x.to_f64(), 0.0);
        assert!((x.log2_abs() - 32.0 * (1e-300f64).log2()).abs() < 1e-6);
    }
}
