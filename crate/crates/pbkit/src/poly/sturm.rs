//! Sturm chains over primitive integer polynomials, real-root counting and isolation.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::rpoly::RationalPoly;
use crate::error::{PbError, Result};
use crate::scalar::rational_to_f64;

/// Integer polynomial, low-to-high, no trailing zeros.
pub(crate) type ZPoly = Vec<BigInt>;

fn ztrim(mut v: ZPoly) -> ZPoly {
    while v.last().is_some_and(|x| x.is_zero()) {
        v.pop();
    }
    v
}

/// Divide by the positive content.
fn zprimitive(v: ZPoly) -> ZPoly {
    let g = v.iter().fold(BigInt::zero(), |acc, c| acc.gcd(c));
    if g.is_zero() || g.is_one() {
        return v;
    }
    v.into_iter().map(|c| c / &g).collect()
}

fn zderiv(v: &ZPoly) -> ZPoly {
    ztrim(v.iter().enumerate().skip(1).map(|(i, c)| c * BigInt::from(i)).collect())
}

/// `lc(b)^s a - q b` with `s` the number of reduction steps taken.
fn zprem(a: &ZPoly, b: &ZPoly) -> (ZPoly, u32) {
    let mut r = a.clone();
    let lb = b.last().expect("nonzero divisor").clone();
    let mut steps = 0;
    while !r.is_empty() && r.len() >= b.len() {
        let shift = r.len() - b.len();
        let lr = r.last().cloned().expect("nonempty");
        for c in r.iter_mut() {
            *c *= &lb;
        }
        for (j, bj) in b.iter().enumerate() {
            r[j + shift] -= &lr * bj;
        }
        r = ztrim(r);
        steps += 1;
    }
    (r, steps)
}

/// Primitive gcd with positive leading coefficient.
pub(crate) fn zgcd(a: &ZPoly, b: &ZPoly) -> ZPoly {
    let (mut a, mut b) = (zprimitive(ztrim(a.clone())), zprimitive(ztrim(b.clone())));
    if a.len() < b.len() {
        std::mem::swap(&mut a, &mut b);
    }
    while !b.is_empty() {
        let (r, _) = zprem(&a, &b);
        a = b;
        b = zprimitive(r);
    }
    if a.last().is_some_and(|c| c.is_negative()) {
        a = a.into_iter().map(|c| -c).collect();
    }
    a
}

/// Sturm chain `f, f', -rem, ...`, each term rescaled by a positive constant.
pub(crate) fn sturm_chain(f: &ZPoly) -> Vec<ZPoly> {
    let mut seq = vec![zprimitive(f.clone())];
    let d = zprimitive(zderiv(f));
    if d.is_empty() {
        return seq;
    }
    seq.push(d);
    loop {
        let n = seq.len();
        let (r, steps) = zprem(&seq[n - 2], &seq[n - 1]);
        if r.is_empty() {
            return seq;
        }
        let flip = seq[n - 1].last().expect("nonzero").is_negative() && steps % 2 == 1;
        let next: ZPoly = if flip { r } else { r.into_iter().map(|c| -c).collect() };
        seq.push(zprimitive(next));
    }
}

fn sign(x: &BigInt) -> i8 {
    if x.is_positive() {
        1
    } else if x.is_negative() {
        -1
    } else {
        0
    }
}

/// Sign of `v(num/den)`, `den > 0`.
fn zsign_at(v: &ZPoly, num: &BigInt, den: &BigInt) -> i8 {
    if v.is_empty() {
        return 0;
    }
    // Homogeneous Horner: sum c_i num^i den^(d-i).
    let mut acc = BigInt::zero();
    let mut dpow = BigInt::one();
    for c in v.iter().rev() {
        acc = acc * num + c * &dpow;
        dpow *= den;
    }
    sign(&acc)
}

fn variations(signs: impl Iterator<Item = i8>) -> usize {
    let mut last = 0i8;
    let mut count = 0;
    for s in signs.filter(|&s| s != 0) {
        if last != 0 && s != last {
            count += 1;
        }
        last = s;
    }
    count
}

fn var_at(chain: &[ZPoly], x: &BigRational) -> usize {
    variations(chain.iter().map(|p| zsign_at(p, x.numer(), x.denom())))
}

fn var_pos_inf(chain: &[ZPoly]) -> usize {
    variations(chain.iter().map(|p| sign(p.last().expect("nonzero"))))
}

fn var_neg_inf(chain: &[ZPoly]) -> usize {
    variations(chain.iter().map(|p| {
        let s = sign(p.last().expect("nonzero"));
        if (p.len() - 1) % 2 == 1 {
            -s
        } else {
            s
        }
    }))
}

/// Number of distinct real roots.
pub fn count_distinct_real_roots(p: &RationalPoly) -> Result<usize> {
    if p.is_zero() {
        return Err(PbError::Domain("zero polynomial".into()));
    }
    let chain = sturm_chain(&p.primitive_integer());
    Ok(var_neg_inf(&chain) - var_pos_inf(&chain))
}

/// Square-free part `p / gcd(p, p')`, monic.
pub fn square_free_part(p: &RationalPoly) -> RationalPoly {
    if p.degree() == 0 {
        return RationalPoly::one();
    }
    let g = p.gcd(&p.derivative());
    p.div_rem(&g).0.monic()
}

/// Certified: every complex root is real.
pub fn is_real_rooted(p: &RationalPoly) -> Result<bool> {
    if p.is_zero() {
        return Err(PbError::Domain("zero polynomial".into()));
    }
    let q = square_free_part(p);
    Ok(count_distinct_real_roots(&q)? == q.degree())
}

/// Yun's square-free factorization: `p = c * prod f_i^{m_i}` with monic square-free `f_i`.
pub fn square_free_factorization(p: &RationalPoly) -> Vec<(RationalPoly, usize)> {
    let mut out = Vec::new();
    if p.degree() == 0 {
        return out;
    }
    let dp = p.derivative();
    let b = p.gcd(&dp);
    let mut c = p.div_rem(&b).0;
    let mut d = dp.div_rem(&b).0.sub(&c.derivative());
    let mut i = 1;
    while c.degree() > 0 {
        let a = c.gcd(&d);
        let nc = c.div_rem(&a).0;
        d = d.div_rem(&a).0.sub(&nc.derivative());
        if a.degree() > 0 {
            out.push((a.monic(), i));
        }
        c = nc;
        i += 1;
    }
    out
}

/// Cauchy bound: every root has modulus below the returned integer.
fn root_bound(v: &ZPoly) -> BigInt {
    let lc = v.last().expect("nonzero").abs();
    let m = v[..v.len() - 1].iter().map(|c| c.abs()).max().unwrap_or_default();
    m.div_ceil(&lc) + BigInt::from(2)
}

/// Disjoint intervals `(lo, hi]`, ascending, each holding exactly one distinct real root.
pub(crate) fn isolate(v: &ZPoly) -> Vec<(BigRational, BigRational)> {
    if v.len() <= 1 {
        return Vec::new();
    }
    let chain = sturm_chain(v);
    let b = BigRational::from_integer(root_bound(v));
    let mut out = Vec::new();
    let mut stack = vec![(-b.clone(), b)];
    let two = BigRational::from_integer(2.into());
    while let Some((lo, hi)) = stack.pop() {
        let n = var_at(&chain, &lo) - var_at(&chain, &hi);
        match n {
            0 => {}
            1 => out.push((lo, hi)),
            _ => {
                let mid = (&lo + &hi) / &two;
                stack.push((mid.clone(), hi));
                stack.push((lo, mid));
            }
        }
    }
    out.sort();
    out
}

/// Number of distinct roots of `v` in `(lo, hi]`.
pub(crate) fn count_in(v: &ZPoly, lo: &BigRational, hi: &BigRational) -> usize {
    if v.len() <= 1 {
        return 0;
    }
    let chain = sturm_chain(v);
    var_at(&chain, lo) - var_at(&chain, hi)
}

fn rsign(v: &ZPoly, x: &BigRational) -> i8 {
    zsign_at(v, x.numer(), x.denom())
}

/// Narrow `(lo, hi]` around the single simple root of square-free `v` to double precision.
pub(crate) fn refine(v: &ZPoly, lo: &BigRational, hi: &BigRational) -> f64 {
    let (mut lo, mut hi) = (lo.clone(), hi.clone());
    if rsign(v, &hi) == 0 {
        return rational_to_f64(&hi);
    }
    let right_of_lo = match rsign(v, &lo) {
        0 => rsign(&zderiv(v), &lo),
        s => s,
    };
    let two = BigRational::from_integer(2.into());
    for _ in 0..2000 {
        let width = &hi - &lo;
        let scale = if lo.abs() > hi.abs() { lo.abs() } else { hi.abs() };
        let limit = if scale > BigRational::one() { scale } else { BigRational::one() };
        if rational_to_f64(&(width / limit)) < 1e-17 {
            break;
        }
        let mid = (&lo + &hi) / &two;
        match rsign(v, &mid) {
            0 => return rational_to_f64(&mid),
            s if s == right_of_lo => lo = mid,
            _ => hi = mid,
        }
    }
    rational_to_f64(&((lo + hi) / two))
}

/// A real root with its multiplicity and an exact isolating interval `(lo, hi]`.
#[derive(Clone, Debug, PartialEq)]
pub struct RealRoot {
    pub value: f64,
    pub multiplicity: usize,
    pub lo: BigRational,
    pub hi: BigRational,
}

/// All real roots, ascending, with multiplicities.
pub fn real_roots(p: &RationalPoly) -> Vec<RealRoot> {
    let mut out = Vec::new();
    for (f, m) in square_free_factorization(p) {
        let z = f.primitive_integer();
        for (lo, hi) in isolate(&z) {
            let value = refine(&z, &lo, &hi);
            out.push(RealRoot { value, multiplicity: m, lo, hi });
        }
    }
    out.sort_by(|a, b| a.value.partial_cmp(&b.value).expect("finite roots"));
    out
}

/// Exact descending root lists of `a` and `b` (with multiplicity), encoded as ranks of distinct roots of `a * b`.
pub(crate) fn merged_root_ranks(a: &RationalPoly, b: &RationalPoly) -> (Vec<usize>, Vec<usize>) {
    let prod = a.mul(b);
    let sqf = square_free_part(&prod).primitive_integer();
    let intervals = isolate(&sqf);
    let fa = square_free_factorization(a);
    let fb = square_free_factorization(b);
    let mult = |fs: &[(RationalPoly, usize)], lo: &BigRational, hi: &BigRational| -> usize {
        fs.iter().map(|(f, m)| count_in(&f.primitive_integer(), lo, hi) * m).sum()
    };
    let (mut ra, mut rb) = (Vec::new(), Vec::new());
    let k = intervals.len();
    for (idx, (lo, hi)) in intervals.iter().enumerate() {
        let rank = k - 1 - idx;
        for _ in 0..mult(&fa, lo, hi) {
            ra.push(rank);
        }
        for _ in 0..mult(&fb, lo, hi) {
            rb.push(rank);
        }
    }
    ra.sort();
    rb.sort();
    (ra, rb)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn simple_cases() {
        assert!(is_real_rooted(&RationalPoly::from_ints(&[2, 3, 1])).unwrap());
        assert!(!is_real_rooted(&RationalPoly::from_ints(&[1, 1, 1])).unwrap());
        let p = RationalPoly::from_coeffs(vec![ratio(1, 8), ratio(3, 4), ratio(1, 8)]);
        assert!(is_real_rooted(&p).unwrap());
        let r = real_roots(&p);
        let s8 = 8f64.sqrt();
        assert!((r[0].value - (-3.0 - s8)).abs() < 1e-13);
        assert!((r[1].value - (-3.0 + s8)).abs() < 1e-13);
        assert!(is_real_rooted(&RationalPoly::zero()).is_err());
    }

    #[test]
    fn repeated_roots() {
        let p = RationalPoly::from_ints(&[1, 4, 6, 4, 1]);
        assert!(is_real_rooted(&p).unwrap());
        let r = real_roots(&p);
        assert_eq!(r.len(), 1);
        assert_eq!(r[0].multiplicity, 4);
        assert!((r[0].value + 1.0).abs() < 1e-15);
        let q = RationalPoly::from_ints(&[1, 0, 1]).mul(&RationalPoly::from_ints(&[1, 0, 1]));
        assert!(!is_real_rooted(&q).unwrap());
    }

    #[test]
    fn forced_target_has_one_real_root() {
        let p = RationalPoly::from_ints(&[1, 10, 4, 1]);
        assert_eq!(count_distinct_real_roots(&p).unwrap(), 1);
        assert!(!is_real_rooted(&p).unwrap());
    }

    #[test]
    fn yun_factors() {
        let a = RationalPoly::from_ints(&[1, 1]);
        let b = RationalPoly::from_ints(&[2, 1]);
        let p = a.mul(&a).mul(&a).mul(&b);
        let f = square_free_factorization(&p);
        assert_eq!(f, vec![(b, 1), (a, 3)]);
    }
}
