//! Worst-case hidden-bias sensitivity for matched-pair sign-score statistics.

use serde::Serialize;
use statrs::function::gamma::gamma_lr;

use crate::error::{PbError, Result};
use crate::pb::{pb_pmf, PmfMethod, ProbParams};

/// Bisection resolution on `Gamma`.
pub const GAMMA_RESOLUTION: f64 = 1e-6;
const GAMMA_CAP: f64 = 1e12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SensitivityInstance {
    /// `(c_k1, c_k2)` scores, each 0 or 1.
    pub pairs: Vec<(u8, u8)>,
    pub gamma: f64,
    pub t: i64,
    pub alpha: f64,
}

impl SensitivityInstance {
    pub fn new(pairs: Vec<(u8, u8)>, gamma: f64, t: i64, alpha: f64) -> Result<Self> {
        if pairs.is_empty() {
            return Err(PbError::Domain("no pairs".into()));
        }
        if pairs.iter().any(|&(a, b)| a > 1 || b > 1) {
            return Err(PbError::Domain("pair scores must be 0 or 1".into()));
        }
        if !(gamma >= 1.0) {
            return Err(PbError::Domain(format!("Gamma must be >= 1, got {gamma}")));
        }
        if !(alpha > 0.0 && alpha <= 1.0) {
            return Err(PbError::Domain(format!("alpha must lie in (0, 1], got {alpha}")));
        }
        Ok(Self { pairs, gamma, t, alpha })
    }
}

/// Each `p_k = c1 pi + c2 (1 - pi)` pushed to the end of `[1/(1+G), G/(1+G)]` that maximizes it.
pub fn worst_case_probs(pairs: &[(u8, u8)], gamma: f64) -> Vec<f64> {
    let hi = if gamma.is_infinite() { 1.0 } else { gamma / (1.0 + gamma) };
    pairs
        .iter()
        .map(|&(a, b)| match (a, b) {
            (0, 0) => 0.0,
            (1, 1) => 1.0,
            _ => hi,
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct WorstTail {
    pub probs: Vec<f64>,
    pub exact: f64,
    pub tp_approx: f64,
}

fn exact_tail(p: &[f64], t: i64) -> Result<f64> {
    let n = p.len() as i64;
    if t <= 0 {
        return Ok(1.0);
    }
    if t > n {
        return Ok(0.0);
    }
    let d = pb_pmf(&ProbParams::new(p.to_vec())?, PmfMethod::Convolution)?;
    Ok(d.masses()[t as usize..].iter().sum::<f64>().min(1.0))
}

/// `P(A + Poi(lambda) >= t)` with `A = floor(sum p^2)`, `lambda = sum p - A`.
fn tp_tail(p: &[f64], t: i64) -> f64 {
    if t > p.len() as i64 {
        return 0.0;
    }
    let a = p.iter().map(|x| x * x).sum::<f64>().floor();
    let lambda = p.iter().sum::<f64>() - a;
    let k = t - a as i64;
    if k <= 0 {
        return 1.0;
    }
    if lambda <= 0.0 {
        return 0.0;
    }
    gamma_lr(k as f64, lambda)
}

pub fn sensitivity_worst_tail(inst: &SensitivityInstance) -> Result<WorstTail> {
    let probs = worst_case_probs(&inst.pairs, inst.gamma);
    let exact = exact_tail(&probs, inst.t)?;
    let tp_approx = tp_tail(&probs, inst.t);
    Ok(WorstTail { probs, exact, tp_approx })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum GammaStar {
    Finite(f64),
    Infinite,
    RejectedAtOne,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GammaReport {
    pub gamma_star: GammaStar,
    /// Worst-case tail at `gamma_star` (or in the limit `Gamma -> inf`).
    pub worst_tail: f64,
    pub monotone_checked: bool,
}

/// Largest `Gamma` whose worst-case tail stays at or below `alpha`.
pub fn sensitivity_max_gamma(pairs: &[(u8, u8)], t: i64, alpha: f64) -> Result<GammaReport> {
    let inst = SensitivityInstance::new(pairs.to_vec(), 1.0, t, alpha)?;
    let tail = |g: f64| exact_tail(&worst_case_probs(&inst.pairs, g), t);
    let at_one = tail(1.0)?;
    if at_one > alpha {
        return Ok(GammaReport { gamma_star: GammaStar::RejectedAtOne, worst_tail: at_one, monotone_checked: false });
    }
    let at_inf = tail(f64::INFINITY)?;
    if at_inf <= alpha {
        return Ok(GammaReport { gamma_star: GammaStar::Infinite, worst_tail: at_inf, monotone_checked: false });
    }
    let mut hi = 2.0;
    while tail(hi)? <= alpha {
        hi *= 2.0;
        if hi > GAMMA_CAP {
            return Ok(GammaReport { gamma_star: GammaStar::Infinite, worst_tail: at_inf, monotone_checked: false });
        }
    }
    let grid: Vec<f64> = (0..=32).map(|i| 1.0 + (hi - 1.0) * i as f64 / 32.0).collect();
    let vals = grid.iter().map(|&g| tail(g)).collect::<Result<Vec<f64>>>()?;
    let monotone = vals.windows(2).all(|w| w[1] >= w[0] - 1e-15);
    let lo = if monotone {
        let mut lo = 1.0;
        while hi - lo > GAMMA_RESOLUTION {
            let mid = 0.5 * (lo + hi);
            if tail(mid)? <= alpha {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        lo
    } else {
        let steps = ((hi - 1.0) / GAMMA_RESOLUTION).min(1e5) as usize;
        let mut best = 1.0;
        for i in 1..=steps {
            let g = 1.0 + (hi - 1.0) * i as f64 / steps as f64;
            if tail(g)? > alpha {
                break;
            }
            best = g;
        }
        best
    };
    Ok(GammaReport { gamma_star: GammaStar::Finite(lo), worst_tail: tail(lo)?, monotone_checked: monotone })
}
