//! Dense polynomials with exact rational coefficients, low-to-high.

use std::fmt;

use num_bigint::BigInt;
use num_complex::Complex64;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::error::{PbError, Result};
use crate::scalar::{parse_rational, rational_to_f64, render_rational};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct RationalPoly {
    coeffs: Vec<BigRational>,
}

fn trim(mut c: Vec<BigRational>) -> Vec<BigRational> {
    while c.last().is_some_and(|x| x.is_zero()) {
        c.pop();
    }
    c
}

impl RationalPoly {
    /// Nonzero polynomial from low-to-high coefficients; trailing zeros are dropped.
    pub fn new(coeffs: Vec<BigRational>) -> Result<Self> {
        let coeffs = trim(coeffs);
        if coeffs.is_empty() {
            return Err(PbError::Domain("zero polynomial".into()));
        }
        Ok(Self { coeffs })
    }

    /// Like [`RationalPoly::new`] but admits the zero polynomial.
    pub fn from_coeffs(coeffs: Vec<BigRational>) -> Self {
        Self { coeffs: trim(coeffs) }
    }

    pub fn from_ints(c: &[i64]) -> Self {
        Self::from_coeffs(c.iter().map(|&v| BigRational::from_integer(v.into())).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![BigRational::one()] }
    }

    /// `x - r`.
    pub fn linear_root(r: &BigRational) -> Self {
        Self { coeffs: vec![-r.clone(), BigRational::one()] }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree; the zero polynomial reports 0.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigRational {
        self.coeffs.get(i).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn leading(&self) -> BigRational {
        self.coeffs.last().cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        self.coeffs.iter().rev().fold(BigRational::zero(), |acc, c| acc * x + c)
    }

    pub fn eval_f64(&self, x: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, c| acc * x + rational_to_f64(c))
    }

    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, c| acc * z + rational_to_f64(c))
    }

    pub fn to_f64_coeffs(&self) -> Vec<f64> {
        self.coeffs.iter().map(rational_to_f64).collect()
    }

    pub fn derivative(&self) -> Self {
        Self::from_coeffs(
            self.coeffs.iter().enumerate().skip(1).map(|(i, c)| c * BigRational::from_integer(i.into())).collect(),
        )
    }

    pub fn add(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) + o.coeff(i)).collect())
    }

    pub fn sub(&self, o: &Self) -> Self {
        let n = self.coeffs.len().max(o.coeffs.len());
        Self::from_coeffs((0..n).map(|i| self.coeff(i) - o.coeff(i)).collect())
    }

    pub fn mul(&self, o: &Self) -> Self {
        if self.is_zero() || o.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        Self::from_coeffs(out)
    }

    pub fn scale(&self, c: &BigRational) -> Self {
        Self::from_coeffs(self.coeffs.iter().map(|x| x * c).collect())
    }

    /// Euclidean division; panics on a zero divisor.
    pub fn div_rem(&self, d: &Self) -> (Self, Self) {
        assert!(!d.is_zero(), "division by zero polynomial");
        let mut r = self.coeffs.clone();
        let dl = d.leading();
        let dd = d.degree();
        if r.len() < d.coeffs.len() {
            return (Self::zero(), self.clone());
        }
        let mut q = vec![BigRational::zero(); r.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &r[i + dd] / &dl;
            if !c.is_zero() {
                for (j, dj) in d.coeffs.iter().enumerate() {
                    r[i + j] -= &c * dj;
                }
            }
            q[i] = c;
        }
        r.truncate(dd);
        (Self::from_coeffs(q), Self::from_coeffs(r))
    }

    pub fn monic(&self) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let l = self.leading();
        self.scale(&(BigRational::one() / l))
    }

    /// Monic gcd (computed on primitive integer remainders to limit growth).
    pub fn gcd(&self, o: &Self) -> Self {
        let g = super::sturm::zgcd(&self.primitive_integer(), &o.primitive_integer());
        Self::from_coeffs(g.into_iter().map(BigRational::from_integer).collect()).monic()
    }

    pub fn has_nonneg_coeffs(&self) -> bool {
        self.coeffs.iter().all(|c| !c.is_negative())
    }

    pub fn is_pgf(&self) -> bool {
        self.has_nonneg_coeffs() && self.eval(&BigRational::one()).is_one()
    }

    /// Divide by `f(1)`.
    pub fn normalized(&self) -> Result<Self> {
        let s = self.eval(&BigRational::one());
        if s.is_zero() {
            return Err(PbError::Degenerate("f(1) = 0, cannot normalize".into()));
        }
        Ok(self.scale(&(BigRational::one() / s)))
    }

    /// Positive multiple with coprime integer coefficients (leading coefficient keeps its sign).
    pub fn primitive_integer(&self) -> Vec<BigInt> {
        if self.is_zero() {
            return Vec::new();
        }
        let l = self.coeffs.iter().fold(BigInt::one(), |acc, c| acc.lcm(c.denom()));
        let ints: Vec<BigInt> = self.coeffs.iter().map(|c| (c * BigRational::from_integer(l.clone())).to_integer()).collect();
        let g = ints.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
        ints.into_iter().map(|c| c / &g).collect()
    }

    /// `g(x^k)`.
    pub fn compose_power(&self, k: usize) -> Self {
        let mut out = vec![BigRational::zero(); self.degree() * k + 1];
        for (i, c) in self.coeffs.iter().enumerate() {
            out[i * k] = c.clone();
        }
        Self::from_coeffs(out)
    }

    /// `x^j g(x)`.
    pub fn shift_up(&self, j: usize) -> Self {
        if self.is_zero() {
            return Self::zero();
        }
        let mut out = vec![BigRational::zero(); j];
        out.extend(self.coeffs.iter().cloned());
        Self::from_coeffs(out)
    }

    /// Comma-separated rationals, low-to-high, e.g. `1/8,3/4,1/8`.
    pub fn parse(text: &str) -> Result<Self> {
        let coeffs = text
            .split(|c: char| c == ',' || c.is_whitespace())
            .filter(|s| !s.is_empty())
            .map(parse_rational)
            .collect::<Result<Vec<_>>>()?;
        if coeffs.is_empty() {
            return Err(PbError::Parse("no coefficients".into()));
        }
        Self::new(coeffs)
    }

    pub fn render(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        self.coeffs.iter().map(render_rational).collect::<Vec<_>>().join(",")
    }
}

impl fmt::Display for RationalPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn parse_and_render() {
        let p = RationalPoly::parse("1/8, 3/4, 1/8").unwrap();
        assert_eq!(p.degree(), 2);
        assert_eq!(p.render(), "1/8,3/4,1/8");
        assert!(p.is_pgf());
        assert!(RationalPoly::parse("0,0").is_err());
    }

    #[test]
    fn division() {
        let a = RationalPoly::from_ints(&[2, 3, 1]);
        let b = RationalPoly::from_ints(&[1, 1]);
        let (q, r) = a.div_rem(&b);
        assert_eq!(q, RationalPoly::from_ints(&[2, 1]));
        assert!(r.is_zero());
        let g = a.gcd(&RationalPoly::from_ints(&[3, 4, 1]));
        assert_eq!(g, RationalPoly::from_ints(&[1, 1]));
    }

    #[test]
    fn primitive_scaling() {
        let p = RationalPoly::from_coeffs(vec![ratio(1, 6), ratio(-1, 3), ratio(1, 2)]);
        assert_eq!(p.primitive_integer(), vec![BigInt::from(1), BigInt::from(-2), BigInt::from(3)]);
    }
}
