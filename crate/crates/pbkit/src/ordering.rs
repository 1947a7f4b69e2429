//! Majorization, stochastic order and convex order between Poisson binomial laws.

use serde::Serialize;
use statrs::function::gamma::{gamma_lr, gamma_ur};

use crate::error::{PbError, Result};
use crate::lattice::{align, LatticeDist};
use crate::pb::{pb_pmf, PmfMethod, ProbParams};
use crate::scalar::{render_rational, Scalar, FLOAT_TOL};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Relation {
    Equal,
    StochasticallyLarger,
    StochasticallySmaller,
    /// Exactly one sign change of `F_a - F_b`.
    Crossing,
    /// Two or more sign changes.
    Incomparable,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CdfDiff {
    pub point: String,
    /// `F_a(point) - F_b(point)`.
    pub diff: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OrderReport {
    pub relation: Relation,
    pub crossing_points: Vec<String>,
    pub detail: Vec<CdfDiff>,
}

impl OrderReport {
    /// `a` is stochastically at least `b` (includes equality).
    pub fn a_dominates(&self) -> bool {
        matches!(self.relation, Relation::Equal | Relation::StochasticallyLarger)
    }

    pub fn b_dominates(&self) -> bool {
        matches!(self.relation, Relation::Equal | Relation::StochasticallySmaller)
    }
}

/// `x ⪰ y`: ascending partial sums of `x` never exceed those of `y`, equal totals.
pub fn majorize<S: Scalar>(x: &[S], y: &[S]) -> Result<bool> {
    if x.len() != y.len() {
        return Err(PbError::Domain(format!("length mismatch: {} vs {}", x.len(), y.len())));
    }
    let sorted = |v: &[S]| {
        let mut v = v.to_vec();
        v.sort_by(|a, b| a.partial_cmp(b).expect("comparable entries"));
        v
    };
    let (xs, ys) = (sorted(x), sorted(y));
    let (mut sx, mut sy) = (S::zero(), S::zero());
    for i in 0..xs.len() {
        sx = sx + xs[i].clone();
        sy = sy + ys[i].clone();
        if i + 1 < xs.len() && sy.definitely_lt(&sx, FLOAT_TOL) {
            return Ok(false);
        }
    }
    Ok(sx.near(&sy, FLOAT_TOL))
}

/// `(-log p) ⪰ (-log q)`; false when any entry is zero.
pub fn log_majorizes(p: &ProbParams<f64>, q: &ProbParams<f64>) -> Result<bool> {
    if p.probs().iter().chain(q.probs()).any(|&v| v <= 0.0) {
        return Ok(false);
    }
    let lp: Vec<f64> = p.probs().iter().map(|v| -v.ln()).collect();
    let lq: Vec<f64> = q.probs().iter().map(|v| -v.ln()).collect();
    majorize(&lp, &lq)
}

/// Pointwise CDF comparison on the union of supports.
pub fn stochastic_dominance<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>) -> OrderReport {
    let rows = align(a, b);
    let (mut fa, mut fb) = (S::zero(), S::zero());
    let mut detail = Vec::with_capacity(rows.len());
    let mut signs: Vec<(i8, String)> = Vec::new();
    for (x, ma, mb) in rows {
        fa = fa + ma;
        fb = fb + mb;
        let point = render_rational(&x);
        let s = if fa.near(&fb, FLOAT_TOL) {
            0
        } else if fa < fb {
            -1
        } else {
            1
        };
        if s != 0 {
            signs.push((s, point.clone()));
        }
        detail.push(CdfDiff { point, diff: fa.to_f64() - fb.to_f64() });
    }
    let crossing_points: Vec<String> =
        signs.windows(2).filter(|w| w[0].0 != w[1].0).map(|w| w[1].1.clone()).collect();
    let relation = match (signs.is_empty(), crossing_points.len()) {
        (true, _) => Relation::Equal,
        (false, 0) if signs[0].0 < 0 => Relation::StochasticallyLarger,
        (false, 0) => Relation::StochasticallySmaller,
        (false, 1) => Relation::Crossing,
        _ => Relation::Incomparable,
    };
    OrderReport { relation, crossing_points, detail }
}

fn pmf(p: &ProbParams<f64>) -> Result<LatticeDist<f64>> {
    Ok(pb_pmf(p, PmfMethod::Convolution)?.pmf)
}

/// `E(X - k)_+` for `k = 0..=n`.
pub fn stop_loss(masses: &[f64]) -> Vec<f64> {
    (0..masses.len())
        .map(|k| masses.iter().enumerate().skip(k + 1).map(|(x, m)| (x - k) as f64 * m).sum())
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoeffdingReport {
    pub order: OrderReport,
    pub part1_holds: bool,
    pub part1_violations: Vec<usize>,
    pub convex_order: bool,
    pub stop_loss_equal: bool,
    pub homogeneous: bool,
    pub equality_iff_holds: bool,
    pub var_pb: f64,
    pub var_bin: f64,
}

/// `PB(p)` against `Bin(n, pbar)`.
pub fn hoeffding_compare(params: &ProbParams<f64>) -> Result<HoeffdingReport> {
    let n = params.n();
    let pbar = params.pbar();
    let mu = params.mean();
    let x = pmf(params)?;
    let xb = pmf(&ProbParams::binomial(n, pbar)?)?;
    let order = stochastic_dominance(&x, &xb);
    let (fx, fb) = (x.cdf(), xb.cdf());
    let part1_violations: Vec<usize> = (0..=n)
        .filter(|&k| {
            let kf = k as f64;
            (kf <= mu - 1.0 && fx[k] > fb[k] + FLOAT_TOL) || (kf >= mu && fx[k] < fb[k] - FLOAT_TOL)
        })
        .collect();
    let (sx, sb) = (stop_loss(x.masses()), stop_loss(xb.masses()));
    let convex_order = (x.mean() - xb.mean()).abs() <= 1e-10 && sx.iter().zip(&sb).all(|(a, b)| *a <= b + FLOAT_TOL);
    let stop_loss_equal = sx.iter().zip(&sb).all(|(a, b)| (a - b).abs() <= FLOAT_TOL);
    let (lo, hi) = params.probs().iter().fold((f64::MAX, f64::MIN), |(l, h), &v| (l.min(v), h.max(v)));
    let homogeneous = hi - lo < FLOAT_TOL;
    Ok(HoeffdingReport {
        order,
        part1_holds: part1_violations.is_empty(),
        part1_violations,
        convex_order,
        stop_loss_equal,
        homogeneous,
        equality_iff_holds: stop_loss_equal == homogeneous,
        var_pb: params.variance(),
        var_bin: n as f64 * pbar * (1.0 - pbar),
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GleserReport {
    pub applicable: bool,
    pub order: Option<OrderReport>,
    pub cdf_holds: bool,
    pub variance_check: bool,
    pub var_p: f64,
    pub var_q: f64,
}

/// Requires `p ⪰ q`; otherwise reports "not applicable".
pub fn gleser_compare(p: &ProbParams<f64>, q: &ProbParams<f64>) -> Result<GleserReport> {
    if p.n() != q.n() {
        return Err(PbError::Domain(format!("length mismatch: {} vs {}", p.n(), q.n())));
    }
    let (var_p, var_q) = (p.variance(), q.variance());
    if !majorize(p.probs(), q.probs())? {
        return Ok(GleserReport { applicable: false, order: None, cdf_holds: true, variance_check: true, var_p, var_q });
    }
    let (a, b) = (pmf(p)?, pmf(q)?);
    let mu = p.mean();
    let (fa, fb) = (a.cdf(), b.cdf());
    let cdf_holds = (0..=p.n()).all(|k| {
        let kf = k as f64;
        !((kf <= mu - 2.0 && fa[k] > fb[k] + FLOAT_TOL) || (kf >= mu + 2.0 && fa[k] < fb[k] - FLOAT_TOL))
    });
    Ok(GleserReport {
        applicable: true,
        order: Some(stochastic_dominance(&a, &b)),
        cdf_holds,
        variance_check: var_p <= var_q + FLOAT_TOL,
        var_p,
        var_q,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BscReport {
    pub geometric_mean: f64,
    pub co_geometric_mean: f64,
    pub predicted_dominates_bin: bool,
    pub predicted_dominated_by_bin: bool,
    pub observed_dominates_bin: bool,
    pub observed_dominated_by_bin: bool,
    pub consistent: bool,
}

/// Closed-form geometric-mean tests against `Bin(n, q)` next to the observed CDF order.
pub fn bsc_conditions(params: &ProbParams<f64>, q: f64) -> Result<BscReport> {
    if !(0.0..=1.0).contains(&q) {
        return Err(PbError::Domain(format!("probability {q} outside [0, 1]")));
    }
    let n = params.n() as f64;
    let geometric_mean = (params.probs().iter().map(|p| p.ln()).sum::<f64>() / n).exp();
    let co_geometric_mean = 1.0 - (params.probs().iter().map(|p| (1.0 - p).ln()).sum::<f64>() / n).exp();
    let order = stochastic_dominance(&pmf(params)?, &pmf(&ProbParams::binomial(params.n(), q)?)?);
    let predicted_dominates_bin = q <= geometric_mean;
    let predicted_dominated_by_bin = q >= co_geometric_mean;
    let observed_dominates_bin = order.a_dominates();
    let observed_dominated_by_bin = order.b_dominates();
    Ok(BscReport {
        geometric_mean,
        co_geometric_mean,
        predicted_dominates_bin,
        predicted_dominated_by_bin,
        observed_dominates_bin,
        observed_dominated_by_bin,
        consistent: predicted_dominates_bin == observed_dominates_bin
            && predicted_dominated_by_bin == observed_dominated_by_bin,
    })
}

/// Outcome of a sign-pattern check: points where the stated strict inequality failed.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SignPattern {
    pub checked: usize,
    pub violations: Vec<usize>,
}

fn upper_tails(masses: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; masses.len()];
    let mut acc = 0.0;
    for k in (0..masses.len()).rev() {
        out[k] = acc;
        acc += masses[k];
    }
    out
}

/// `Bin(n, p)` vs `Poi(np)`: `F_bin - F_poi < 0` for `k <= n^2 p/(n+1)`, `> 0` for `np <= k <= n`.
pub fn as67_binomial_poisson(n: usize, p: f64) -> Result<SignPattern> {
    if !(p > 0.0 && p < 1.0) {
        return Err(PbError::Domain(format!("probability {p} outside (0, 1)")));
    }
    let lam = n as f64 * p;
    let masses = pmf(&ProbParams::binomial(n, p)?)?.masses().to_vec();
    let tb = upper_tails(&masses);
    let mut fb = 0.0;
    let mut checked = 0;
    let mut violations = Vec::new();
    for k in 0..=n {
        let kf = k as f64;
        fb += masses[k];
        let fp = gamma_ur(kf + 1.0, lam);
        // Subtract on whichever side avoids cancellation.
        let diff = if fb < 0.5 && fp < 0.5 { fb - fp } else { gamma_lr(kf + 1.0, lam) - tb[k] };
        let low = kf <= n as f64 * n as f64 * p / (n as f64 + 1.0);
        let high = kf >= lam;
        if low || high {
            checked += 1;
            if (low && !(diff < 0.0)) || (high && !(diff > 0.0)) {
                violations.push(k);
            }
        }
    }
    Ok(SignPattern { checked, violations })
}

/// Both constructions comparing `Bin(n-1, .)` with `Bin(n, lambda/n)`, checked for `k <= n - 1`.
pub fn binomial_monotonicity(n: usize, lambda: f64) -> Result<(SignPattern, SignPattern)> {
    if n < 2 || !(lambda >= 1.0 && lambda <= (n - 1) as f64) {
        return Err(PbError::Domain(format!("need n >= 2 and 1 <= lambda <= n-1, got n={n}, lambda={lambda}")));
    }
    let sides = |m: usize, q: f64| -> Result<(Vec<f64>, Vec<f64>)> {
        let d = pmf(&ProbParams::binomial(m, q)?)?;
        Ok((d.cdf(), upper_tails(d.masses())))
    };
    let (fp, tp) = sides(n, lambda / n as f64)?;
    let (fa, ta) = sides(n - 1, lambda / (n - 1) as f64)?;
    let (fb, tb) = sides(n - 1, (lambda - 1.0) / (n - 1) as f64)?;
    // `F_l - F_r`, subtracting on whichever side avoids cancellation.
    let diff = |fl: f64, tl: f64, k: usize| if fl < 0.5 && fp[k] < 0.5 { fl - fp[k] } else { tp[k] - tl };
    let check = |d: &dyn Fn(usize) -> f64| {
        let mut s = SignPattern { checked: 0, violations: Vec::new() };
        for k in 0..n {
            let kf = k as f64;
            let bad = if kf <= lambda - 1.0 {
                !(d(k) < 0.0)
            } else if kf >= lambda {
                !(d(k) > 0.0)
            } else {
                continue;
            };
            s.checked += 1;
            if bad {
                s.violations.push(k);
            }
        }
        s
    };
    let a = check(&|k| diff(fa[k], ta[k], k));
    let b = check(&|k| if k == 0 { diff(0.0, 1.0, k) } else { diff(fb[k - 1], tb[k - 1], k) });
    Ok((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pp(v: &[f64]) -> ProbParams<f64> {
        ProbParams::new(v.to_vec()).unwrap()
    }

    #[test]
    fn majorization_examples() {
        assert!(majorize(&[1.0, 0.0], &[0.5, 0.5]).unwrap());
        assert!(!majorize(&[0.5, 0.5], &[1.0, 0.0]).unwrap());
        assert!(majorize(&[0.7, 0.2, 0.1], &[0.5, 0.3, 0.2]).unwrap());
        assert!(majorize(&[0.3, 0.4], &[0.3, 0.4]).unwrap());
        assert!(majorize(&[1.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn hoeffding_example() {
        let r = hoeffding_compare(&pp(&[0.2, 0.8])).unwrap();
        assert!(r.part1_holds && r.convex_order && !r.stop_loss_equal);
        assert!((r.var_pb - 0.32).abs() < 1e-12 && (r.var_bin - 0.5).abs() < 1e-12);
        let h = hoeffding_compare(&pp(&[0.3; 4])).unwrap();
        assert!(h.homogeneous && h.stop_loss_equal && h.equality_iff_holds);
        assert_eq!(h.order.relation, Relation::Equal);
    }

    #[test]
    fn dominance_of_binomials() {
        let a = pmf(&ProbParams::binomial(2, 0.6).unwrap()).unwrap();
        let b = pmf(&ProbParams::binomial(2, 0.4).unwrap()).unwrap();
        assert_eq!(stochastic_dominance(&a, &b).relation, Relation::StochasticallyLarger);
        assert_eq!(stochastic_dominance(&b, &a).relation, Relation::StochasticallySmaller);
        assert_eq!(stochastic_dominance(&a, &a).relation, Relation::Equal);
    }

    #[test]
    fn bsc_fair_coins() {
        let r = bsc_conditions(&pp(&[0.5, 0.5]), 0.5).unwrap();
        assert!(r.predicted_dominates_bin && r.predicted_dominated_by_bin && r.consistent);
    }

    #[test]
    fn gleser_variances() {
        let r = gleser_compare(&pp(&[0.7, 0.3]), &pp(&[0.5, 0.5])).unwrap();
        assert!(r.applicable && r.variance_check && r.cdf_holds);
        assert!((r.var_p - 0.42).abs() < 1e-12);
        assert!(!gleser_compare(&pp(&[0.5, 0.5]), &pp(&[0.7, 0.3])).unwrap().applicable);
    }

    #[test]
    fn sign_patterns() {
        for n in [5, 20, 60] {
            for p in [0.05, 0.3, 0.7] {
                assert!(as67_binomial_poisson(n, p).unwrap().violations.is_empty(), "{n} {p}");
            }
        }
        let (a, b) = binomial_monotonicity(12, 3.5).unwrap();
        assert!(a.violations.is_empty() && b.violations.is_empty());
    }
}
