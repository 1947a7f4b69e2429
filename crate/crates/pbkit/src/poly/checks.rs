//! Coefficient-level tests: Newton, Kurtz, Toeplitz minors, stride decomposition,
//! interlacing and Routh–Hurwitz.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use super::rpoly::RationalPoly;
use super::sturm::{is_real_rooted, merged_root_ranks};
use crate::error::{PbError, Result};

/// Largest window accepted by [`toeplitz_pf_check`].
pub const MAX_TOEPLITZ_WINDOW: usize = 6;
/// Upper limit on the number of minors a single Toeplitz check may evaluate.
pub const MAX_TOEPLITZ_MINORS: u64 = 5_000_000;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonResult {
    pub holds: bool,
    /// Index `i` (in the original coefficient numbering) of the first violation.
    pub first_violation: Option<usize>,
}

fn support_range(p: &RationalPoly) -> Option<(usize, usize)> {
    let c = p.coeffs();
    let lo = c.iter().position(|x| !x.is_zero())?;
    Some((lo, c.len() - 1))
}

/// `a_i^2 >= a_{i-1} a_{i+1} (1 + 1/i)(1 + 1/(n-i))` over the nonzero-coefficient range.
pub fn newton_check(p: &RationalPoly) -> NewtonResult {
    let Some((lo, hi)) = support_range(p) else {
        return NewtonResult { holds: true, first_violation: None };
    };
    let n = hi - lo;
    let c = p.coeffs();
    for i in 1..n {
        let (a0, a1, a2) = (&c[lo + i - 1], &c[lo + i], &c[lo + i + 1]);
        let fi = BigRational::from_integer(i.into());
        let fni = BigRational::from_integer((n - i).into());
        let one = BigRational::one();
        let rhs = a0 * a2 * (&one + one.clone() / fi) * (&one + one.clone() / fni);
        if a1 * a1 < rhs {
            return NewtonResult { holds: false, first_violation: Some(lo + i) };
        }
    }
    NewtonResult { holds: true, first_violation: None }
}

/// Strict `a_i^2 > 4 a_{i-1} a_{i+1}` at every interior index; false when a coefficient is not positive.
pub fn kurtz_check(p: &RationalPoly) -> bool {
    let c = p.coeffs();
    if c.iter().any(|x| !x.is_positive()) {
        return false;
    }
    let four = BigRational::from_integer(4.into());
    (1..c.len().saturating_sub(1)).all(|i| &c[i] * &c[i] > &four * &c[i - 1] * &c[i + 1])
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ToeplitzResult {
    pub holds: bool,
    /// A negative minor certifies non-real-rootedness; passing a finite window is only necessary.
    pub conclusive: bool,
    pub minors_checked: u64,
    /// Rows and columns of the first negative minor.
    pub negative_minor: Option<(Vec<usize>, Vec<usize>)>,
}

fn det_i128(m: &[Vec<i128>]) -> Option<i128> {
    let n = m.len();
    let mut a = m.to_vec();
    let mut sign = 1i128;
    let mut prev = 1i128;
    for k in 0..n {
        if a[k][k] == 0 {
            let swap = (k + 1..n).find(|&r| a[r][k] != 0);
            match swap {
                Some(r) => {
                    a.swap(k, r);
                    sign = -sign;
                }
                None => return Some(0),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = a[i][j].checked_mul(a[k][k])?.checked_sub(a[i][k].checked_mul(a[k][j])?)?;
                a[i][j] = t / prev;
            }
        }
        prev = a[k][k];
    }
    Some(sign * a[n - 1][n - 1])
}

fn det_big(m: &[Vec<BigInt>]) -> BigInt {
    let n = m.len();
    let mut a = m.to_vec();
    let mut neg = false;
    let mut prev = BigInt::one();
    for k in 0..n {
        if a[k][k].is_zero() {
            match (k + 1..n).find(|&r| !a[r][k].is_zero()) {
                Some(r) => {
                    a.swap(k, r);
                    neg = !neg;
                }
                None => return BigInt::zero(),
            }
        }
        for i in k + 1..n {
            for j in k + 1..n {
                let t = &a[i][j] * &a[k][k] - &a[i][k] * &a[k][j];
                a[i][j] = t / &prev;
            }
        }
        prev = a[k][k].clone();
    }
    let d = a[n - 1][n - 1].clone();
    if neg {
        -d
    } else {
        d
    }
}

fn combinations(n: usize, r: usize, mut f: impl FnMut(&[usize]) -> bool) {
    if r > n {
        return;
    }
    let mut idx: Vec<usize> = (0..r).collect();
    loop {
        if !f(&idx) {
            return;
        }
        let mut i = r;
        loop {
            if i == 0 {
                return;
            }
            i -= 1;
            if idx[i] != i + n - r {
                break;
            }
        }
        idx[i] += 1;
        for j in i + 1..r {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

fn binom(n: usize, r: usize) -> u64 {
    if r > n {
        return 0;
    }
    let mut acc = 1u64;
    for i in 0..r {
        acc = acc.saturating_mul((n - i) as u64) / (i as u64 + 1);
    }
    acc
}

/// Minors of order `<= window` of the Toeplitz matrix `(a_{j-i})`, checked for nonnegativity.
///
/// By shift invariance only row sets starting at 0 are enumerated, inside the square section of
/// size `n + window`.
pub fn toeplitz_pf_check(coeffs: &[BigRational], window: usize) -> Result<ToeplitzResult> {
    if window == 0 || window > MAX_TOEPLITZ_WINDOW {
        return Err(PbError::Size(format!("window must be in 1..={MAX_TOEPLITZ_WINDOW}, got {window}")));
    }
    let p = RationalPoly::from_coeffs(coeffs.to_vec());
    if p.is_zero() {
        return Err(PbError::Domain("zero polynomial".into()));
    }
    let ints = p.primitive_integer();
    let n = ints.len() - 1;
    let size = n + window;
    let total: u64 = (1..=window).map(|r| binom(size - 1, r - 1).saturating_mul(binom(size, r))).sum();
    if total > MAX_TOEPLITZ_MINORS {
        return Err(PbError::Size(format!("{total} minors exceed the limit {MAX_TOEPLITZ_MINORS}")));
    }
    let small: Option<Vec<i128>> = ints.iter().map(|c| c.to_i128().filter(|v| v.abs() < (1i128 << 20))).collect();
    let entry_big = |i: usize, j: usize| -> BigInt {
        if j >= i && j - i <= n {
            ints[j - i].clone()
        } else {
            BigInt::zero()
        }
    };
    let mut checked = 0u64;
    let mut negative = None;
    for r in 1..=window {
        combinations(size - 1, r - 1, |rest| {
            let rows: Vec<usize> = std::iter::once(0).chain(rest.iter().map(|x| x + 1)).collect();
            combinations(size, r, |cols| {
                checked += 1;
                let sign = match &small {
                    Some(s) => {
                        let m: Vec<Vec<i128>> = rows
                            .iter()
                            .map(|&i| cols.iter().map(|&j| if j >= i && j - i <= n { s[j - i] } else { 0 }).collect())
                            .collect();
                        match det_i128(&m) {
                            Some(d) => d.signum(),
                            None => det_sign_big(&rows, cols, &entry_big),
                        }
                    }
                    None => det_sign_big(&rows, cols, &entry_big),
                };
                if sign < 0 {
                    negative = Some((rows.clone(), cols.to_vec()));
                    return false;
                }
                true
            });
            negative.is_none()
        });
        if negative.is_some() {
            break;
        }
    }
    Ok(ToeplitzResult { holds: negative.is_none(), conclusive: negative.is_some(), minors_checked: checked, negative_minor: negative })
}

fn det_sign_big(rows: &[usize], cols: &[usize], entry: &impl Fn(usize, usize) -> BigInt) -> i128 {
    let m: Vec<Vec<BigInt>> = rows.iter().map(|&i| cols.iter().map(|&j| entry(i, j)).collect()).collect();
    let d = det_big(&m);
    if d.is_positive() {
        1
    } else if d.is_negative() {
        -1
    } else {
        0
    }
}

/// `p(x) = sum_j x^j g_j(x^k)`; returns `g_0, ..., g_{k-1}`.
pub fn stride_decompose(p: &RationalPoly, k: usize) -> Result<Vec<RationalPoly>> {
    if k == 0 {
        return Err(PbError::Domain("stride must be at least 1".into()));
    }
    Ok((0..k)
        .map(|j| RationalPoly::from_coeffs(p.coeffs().iter().skip(j).step_by(k).cloned().collect()))
        .collect())
}

/// Inverse of [`stride_decompose`].
pub fn stride_reassemble(parts: &[RationalPoly]) -> RationalPoly {
    let k = parts.len();
    parts
        .iter()
        .enumerate()
        .fold(RationalPoly::zero(), |acc, (j, g)| acc.add(&g.compose_power(k).shift_up(j)))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct InterlaceReport {
    pub holds: bool,
    /// Indices of members that are not real-rooted.
    pub not_real_rooted: Vec<usize>,
    /// First adjacent pair `(j, j+1)` that fails to interlace.
    pub failed_pair: Option<usize>,
}

/// Weak interlacing of adjacent pairs: with roots `r` of `g_j` and `s` of `g_{j+1}` in descending
/// order, `r_1 >= s_1 >= r_2 >= s_2 >= ...` and `len(r) - len(s)` is 0 or 1.
pub fn interlacing_check(polys: &[RationalPoly]) -> Result<InterlaceReport> {
    if polys.iter().any(|g| g.is_zero()) {
        return Err(PbError::Domain("zero polynomial in interlacing family".into()));
    }
    let mut bad = Vec::new();
    for (i, g) in polys.iter().enumerate() {
        if !is_real_rooted(g)? {
            bad.push(i);
        }
    }
    if !bad.is_empty() {
        return Ok(InterlaceReport { holds: false, not_real_rooted: bad, failed_pair: None });
    }
    for j in 0..polys.len().saturating_sub(1) {
        if !pair_interlaces(&polys[j], &polys[j + 1]) {
            return Ok(InterlaceReport { holds: false, not_real_rooted: bad, failed_pair: Some(j) });
        }
    }
    Ok(InterlaceReport { holds: true, not_real_rooted: bad, failed_pair: None })
}

fn pair_interlaces(a: &RationalPoly, b: &RationalPoly) -> bool {
    // Ranks count distinct roots of a*b from the largest down, so a smaller rank is a larger root.
    let (r, s) = merged_root_ranks(a, b);
    if r.len() != s.len() && r.len() != s.len() + 1 {
        return false;
    }
    (0..s.len()).all(|i| r[i] <= s[i] && r.get(i + 1).is_none_or(|&next| s[i] <= next))
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct HurwitzResult {
    pub stable: bool,
    /// False when a zero Routh pivot forced the numeric fallback.
    pub certified: bool,
}

/// Tolerance on real parts in the numeric fallback.
pub const HURWITZ_NUMERIC_TOL: f64 = 1e-9;

/// Every root has negative real part (Routh array over the rationals).
pub fn hurwitz_check(p: &RationalPoly) -> Result<HurwitzResult> {
    if p.is_zero() {
        return Err(PbError::Domain("zero polynomial".into()));
    }
    let c = p.coeffs();
    let n = p.degree();
    if n == 0 {
        return Ok(HurwitzResult { stable: true, certified: true });
    }
    let lead_pos = c[n].is_positive();
    if c.iter().any(|x| x.is_zero() || x.is_positive() != lead_pos) {
        return Ok(HurwitzResult { stable: false, certified: true });
    }
    let row = |start: usize| -> Vec<BigRational> { (0..=n).rev().skip(start).step_by(2).map(|i| c[i].clone()).collect() };
    let mut prev = row(0);
    let mut cur = row(1);
    let mut first_col = vec![prev[0].clone()];
    for _ in 0..n {
        if cur.is_empty() || cur[0].is_zero() {
            let stable = super::roots::numeric_roots(p).iter().all(|z| z.re < -HURWITZ_NUMERIC_TOL);
            return Ok(HurwitzResult { stable, certified: false });
        }
        first_col.push(cur[0].clone());
        let next: Vec<BigRational> = (0..prev.len().saturating_sub(1))
            .map(|j| {
                let a = prev.get(j + 1).cloned().unwrap_or_else(BigRational::zero);
                let b = cur.get(j + 1).cloned().unwrap_or_else(BigRational::zero);
                (&cur[0] * a - &prev[0] * b) / &cur[0]
            })
            .collect();
        prev = cur;
        cur = next;
        if first_col.len() == n + 1 {
            break;
        }
    }
    let s0 = first_col[0].is_positive();
    Ok(HurwitzResult { stable: first_col.iter().all(|x| !x.is_zero() && x.is_positive() == s0), certified: true })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn ints(c: &[i64]) -> RationalPoly {
        RationalPoly::from_ints(c)
    }

    #[test]
    fn newton_and_kurtz_examples() {
        assert_eq!(newton_check(&ints(&[1, 10, 4, 1])), NewtonResult { holds: false, first_violation: Some(2) });
        assert!(newton_check(&ints(&[1, 2, 1])).holds);
        assert!(kurtz_check(&ints(&[1, 15, 15, 1])));
        assert!(!kurtz_check(&ints(&[1, 2, 1])));
    }

    #[test]
    fn toeplitz_examples() {
        let c = |v: &[i64]| v.iter().map(|&x| ratio(x, 1)).collect::<Vec<_>>();
        assert!(toeplitz_pf_check(&c(&[1, 2, 1]), 3).unwrap().holds);
        let bad = toeplitz_pf_check(&c(&[1, 10, 4, 1]), 3).unwrap();
        assert!(!bad.holds);
        assert!(toeplitz_pf_check(&c(&[1, 2, 1]), 7).is_err());
    }

    #[test]
    fn stride_examples() {
        let p = RationalPoly::from_coeffs(vec![ratio(1, 3), ratio(3, 2), ratio(2, 1), ratio(1, 1), ratio(1, 1), ratio(1, 1)]);
        let g = stride_decompose(&p, 3).unwrap();
        assert_eq!(g[0], RationalPoly::from_coeffs(vec![ratio(1, 3), ratio(1, 1)]));
        assert_eq!(g[1], RationalPoly::from_coeffs(vec![ratio(3, 2), ratio(1, 1)]));
        assert_eq!(g[2], ints(&[2, 1]));
        assert_eq!(stride_reassemble(&g), p);
        assert!(interlacing_check(&g).unwrap().holds);

        let f = ints(&[1, 1, 2]).mul(&ints(&[25, 0, 1, 2]));
        let h = stride_decompose(&f, 3).unwrap();
        assert_eq!(h, vec![ints(&[25, 3]), ints(&[25, 4]), ints(&[51, 4])]);
        let rep = interlacing_check(&h).unwrap();
        assert!(!rep.holds);
        assert_eq!(rep.failed_pair, Some(0));

        let q = ints(&[1, 4, 6, 4, 1]);
        assert_eq!(stride_decompose(&q, 2).unwrap(), vec![ints(&[1, 6, 1]), ints(&[4, 4])]);
        assert!(interlacing_check(&[ints(&[1, 1]), ints(&[1, 1])]).unwrap().holds);
    }

    #[test]
    fn hurwitz_examples() {
        assert!(hurwitz_check(&ints(&[1, 1])).unwrap().stable);
        assert!(!hurwitz_check(&ints(&[-1, 0, 1])).unwrap().stable);
        assert!(hurwitz_check(&ints(&[6, 11, 6, 1])).unwrap().stable);
        // x^3 + x^2 + x + 2 has roots with positive real part.
        assert!(!hurwitz_check(&ints(&[2, 1, 1, 1])).unwrap().stable);
        let r = hurwitz_check(&ints(&[1, 1, 1, 1])).unwrap();
        assert!(!r.certified);
        assert!(!r.stable);
    }
}
