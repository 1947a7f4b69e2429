//! Binary entropy inversion and the linear W-infinity lower bound for binomial targets.

use num_traits::ToPrimitive;

use crate::error::{PbError, Result};

/// `H(l) = -l log2 l - (1-l) log2 (1-l)`, with `H(0) = 0`.
pub fn binary_entropy(l: f64) -> f64 {
    let term = |x: f64| if x <= 0.0 { 0.0 } else { -x * x.log2() };
    term(l) + term(1.0 - l)
}

/// Unique `l` in `[0, 1/2)` with `H(l) = rhs`, by bisection.
pub fn entropy_solve(rhs: f64) -> Result<f64> {
    if !(rhs > 0.0 && rhs < 1.0) {
        return Err(PbError::Domain(format!("entropy right-hand side {rhs} outside (0, 1)")));
    }
    let (mut lo, mut hi) = (0.0f64, 0.5f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if binary_entropy(mid) < rhs {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Solution of `H(l) = 1 - (2/3) log2 e`.
pub fn lambda_eq() -> f64 {
    entropy_solve(1.0 - 2.0 / 3.0 * std::f64::consts::LOG2_E).expect("rhs in range")
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundBranch {
    /// Mass `(1-p)^{2n}` at zero drives the bound.
    Lower,
    /// Mass `p^{2n}` at `2n` drives the bound.
    Upper,
    /// `p` in `{0, 1}`: exact distance.
    Extreme,
}

#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct LinearErrBound {
    pub bound: f64,
    pub lambda: Option<f64>,
    pub branch: BoundBranch,
}

/// Lower bound on `W_inf((2/3) Bin(3n, 1/2), Bin(2n, p))`.
pub fn linearerr_bound(p: f64, n: u64) -> Result<LinearErrBound> {
    if !(0.0..=1.0).contains(&p) {
        return Err(PbError::Domain(format!("probability {p} outside [0, 1]")));
    }
    if n == 0 {
        return Err(PbError::Domain("n must be positive".into()));
    }
    let nf = n.to_f64().unwrap_or(f64::MAX);
    if p == 0.0 || p == 1.0 {
        return Ok(LinearErrBound { bound: 2.0 * nf, lambda: None, branch: BoundBranch::Extreme });
    }
    let (rhs, branch) = if p >= 0.5 {
        (2.0 / 3.0 * p.log2() + 1.0, BoundBranch::Upper)
    } else {
        (2.0 / 3.0 * (1.0 - p).log2() + 1.0, BoundBranch::Lower)
    };
    let lambda = entropy_solve(rhs)?;
    Ok(LinearErrBound { bound: 3.0 * lambda * nf, lambda: Some(lambda), branch })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn roundtrip() {
        let l = entropy_solve(binary_entropy(0.25)).unwrap();
        assert!((l - 0.25).abs() < 1e-12);
        assert!(entropy_solve(0.0).is_err());
        assert!(entropy_solve(1.0).is_err());
        assert!(entropy_solve(1.0 - 1e-12).unwrap() > 0.49);
    }

    #[test]
    fn lambda_eq_value() {
        let l = lambda_eq();
        assert!((l - 0.0041).abs() < 5e-5, "{l}");
        assert!((binary_entropy(l) - (1.0 - 2.0 / 3.0 * std::f64::consts::LOG2_E)).abs() < 1e-10);
    }

    #[test]
    fn branches() {
        let b = linearerr_bound(0.5, 5).unwrap();
        assert_eq!(b.branch, BoundBranch::Upper);
        let l = entropy_solve(1.0 / 3.0).unwrap();
        assert!((b.bound - 15.0 * l).abs() < 1e-12);
        assert_eq!(linearerr_bound(0.2, 5).unwrap().branch, BoundBranch::Lower);
        assert_eq!(linearerr_bound(1.0, 3).unwrap().bound, 6.0);
        assert!(linearerr_bound(1.5, 3).is_err());
    }
}
