//! Poisson, translated Poisson, normal and binomial approximations with their error bounds.

mod sensitivity;

pub use sensitivity::{
    sensitivity_max_gamma, sensitivity_worst_tail, worst_case_probs, GammaReport, GammaStar, SensitivityInstance,
    WorstTail,
};

use num_rational::BigRational;
use serde::Serialize;

use crate::error::{PbError, Result};
use crate::lattice::LatticeDist;
use crate::metrics::{
    kolmogorov_vs_normal, l1_vs_normal, poisson_reference, std_normal_pdf, tv_distance, tv_vs_poisson, Bounded,
    NormalRef,
};
use crate::pb::{pb_pmf, PmfMethod, ProbParams};

/// Slack allowed on top of truncation error bars when checking a bound.
pub const BOUND_TOL: f64 = 1e-9;

fn pmf_of(params: &ProbParams<f64>) -> Result<LatticeDist<f64>> {
    Ok(pb_pmf(params, PmfMethod::Convolution)?.pmf)
}

/// `Bin(m, q)` as a float lattice distribution.
pub fn binomial_dist(m: usize, q: f64) -> Result<LatticeDist<f64>> {
    pmf_of(&ProbParams::binomial(m, q)?)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PoissonReport {
    pub mu: f64,
    pub tv: Bounded,
    pub lower: f64,
    /// `(1 - e^{-mu}) / (2 mu) * sum p^2`.
    pub upper: f64,
    /// `(1 - e^{-mu}) / mu * sum p^2`.
    pub upper_standard: f64,
    pub lower_holds: bool,
    pub upper_holds: bool,
    pub upper_standard_holds: bool,
}

pub fn poisson_approx_report(params: &ProbParams<f64>) -> Result<PoissonReport> {
    let mu = params.mean();
    let s2 = params.sum_sq();
    if mu == 0.0 {
        let zero = Bounded { value: 0.0, error_bar: 0.0 };
        return Ok(PoissonReport {
            mu,
            tv: zero,
            lower: 0.0,
            upper: 0.0,
            upper_standard: 0.0,
            lower_holds: true,
            upper_holds: true,
            upper_standard_holds: true,
        });
    }
    let tv = tv_vs_poisson(&pmf_of(params)?, mu)?;
    let lower = s2 * (1.0f64).min(1.0 / mu) / 32.0;
    let upper_standard = -(-mu).exp_m1() / mu * s2;
    let upper = upper_standard / 2.0;
    Ok(PoissonReport {
        mu,
        tv,
        lower,
        upper,
        upper_standard,
        lower_holds: lower <= tv.value + tv.error_bar + BOUND_TOL,
        upper_holds: tv.value <= upper + BOUND_TOL,
        upper_standard_holds: tv.value <= upper_standard + BOUND_TOL,
    })
}

/// `TP(mu, sigma2)`: `shift + Poi(rate)` with `shift = floor(mu - sigma2)`, `rate = mu - shift`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TranslatedPoisson {
    pub mu: f64,
    pub sigma2: f64,
    pub shift: i64,
    pub rate: f64,
}

impl TranslatedPoisson {
    pub fn new(mu: f64, sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0) || !sigma2.is_finite() || !mu.is_finite() {
            return Err(PbError::Domain(format!("translated Poisson needs positive finite variance, got {sigma2}")));
        }
        let d = mu - sigma2;
        let shift = d.floor();
        let rate = sigma2 + (d - shift);
        Ok(Self { mu, sigma2, shift: shift as i64, rate })
    }

    pub fn mean(&self) -> f64 {
        self.shift as f64 + self.rate
    }

    pub fn variance(&self) -> f64 {
        self.rate
    }

    /// Truncated pmf with its tail bound.
    pub fn dist(&self) -> Result<(LatticeDist<f64>, f64)> {
        let r = poisson_reference(self.rate)?;
        Ok((r.dist.shift(&BigRational::from_integer(self.shift.into())), r.tail_bound))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TpReport {
    pub tp: TranslatedPoisson,
    pub tv: Bounded,
    pub bound: f64,
    pub holds: bool,
}

pub fn translated_poisson_report(params: &ProbParams<f64>) -> Result<TpReport> {
    let tp = TranslatedPoisson::new(params.mean(), params.variance())?;
    let (d, tail) = tp.dist()?;
    let tv = Bounded { value: tv_distance(&pmf_of(params)?, &d), error_bar: tail };
    let s: f64 = params.probs().iter().map(|p| p.powi(3) * (1.0 - p)).sum();
    let bound = (2.0 + s.sqrt()) / tp.sigma2;
    Ok(TpReport { tp, tv, bound, holds: tv.value <= bound + BOUND_TOL })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalReport {
    pub sigma: f64,
    pub kolmogorov: f64,
    pub shi_bound: f64,
    pub shi_holds: bool,
    /// `max_k |P(X = k) - phi((k - mu)/sigma)/sigma|`.
    pub pointwise_max: f64,
    pub sigma_times_pointwise: f64,
    pub l1: f64,
    pub goldstein_bound: f64,
    pub goldstein_holds: bool,
}

pub const SHI_CONSTANT: f64 = 0.7915;

pub fn normal_bound_report(params: &ProbParams<f64>) -> Result<NormalReport> {
    let r = NormalRef::new(params.mean(), params.variance())?;
    let d = pmf_of(params)?;
    let sigma = r.sigma();
    let kolmogorov = kolmogorov_vs_normal(&d, &r);
    let pointwise_max = d
        .masses()
        .iter()
        .enumerate()
        .map(|(k, m)| (m - std_normal_pdf((k as f64 - r.mean) / sigma) / sigma).abs())
        .fold(0.0, f64::max);
    let l1 = l1_vs_normal(&d, &r);
    Ok(NormalReport {
        sigma,
        kolmogorov,
        shi_bound: SHI_CONSTANT / sigma,
        shi_holds: kolmogorov <= SHI_CONSTANT / sigma + BOUND_TOL,
        pointwise_max,
        sigma_times_pointwise: sigma * pointwise_max,
        l1,
        goldstein_bound: 1.0 / sigma,
        goldstein_holds: l1 <= 1.0 / sigma + BOUND_TOL,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EhmReport {
    pub q: f64,
    pub tv: f64,
    pub bound: f64,
    pub holds: bool,
}

pub fn ehm_binomial_report(params: &ProbParams<f64>) -> Result<EhmReport> {
    let n = params.n();
    let nf = n as f64;
    let mu = params.mean();
    if mu <= 0.0 || mu >= nf {
        return Err(PbError::Degenerate(format!("binomial approximation needs 0 < mu < n, got mu = {mu}")));
    }
    let q = mu / nf;
    let tv = tv_distance(&pmf_of(params)?, &binomial_dist(n, q)?);
    let spread: f64 = params.probs().iter().map(|p| (p - q).powi(2)).sum();
    let num = 1.0 - q.powi(n as i32 + 1) - (1.0 - q).powi(n as i32 + 1);
    let bound = num / ((nf + 1.0) * (1.0 - q) * q) * spread;
    Ok(EhmReport { q, tv, bound, holds: tv <= bound + BOUND_TOL })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ChoiXiaReport {
    pub ms: Vec<u64>,
    pub d: Vec<f64>,
    pub poisson_tv: Bounded,
    /// Smallest in-range `m` from which `d` increases and stays below the Poisson distance.
    pub m0: Option<u64>,
}

/// `d_m = TV(PB, Bin(m, mu/m))` over `m_lo..=m_hi` (clamped below at `ceil(mu)`).
pub fn choi_xia_sequence(params: &ProbParams<f64>, m_lo: u64, m_hi: u64) -> Result<ChoiXiaReport> {
    let mu = params.mean();
    if mu <= 0.0 {
        return Err(PbError::Degenerate("sequence needs mu > 0".into()));
    }
    let pmf = pmf_of(params)?;
    let start = m_lo.max(mu.ceil() as u64).max(1);
    let ms: Vec<u64> = (start..=m_hi).collect();
    let d = ms
        .iter()
        .map(|&m| Ok(tv_distance(&pmf, &binomial_dist(m as usize, (mu / m as f64).min(1.0))?)))
        .collect::<Result<Vec<f64>>>()?;
    let poisson_tv = tv_vs_poisson(&pmf, mu)?;
    let mut m0 = None;
    for i in (0..ms.len()).rev() {
        let below = d[i] < poisson_tv.value;
        let rising = i + 1 == ms.len() || d[i] < d[i + 1];
        if below && rising {
            m0 = Some(ms[i]);
        } else {
            break;
        }
    }
    Ok(ChoiXiaReport { ms, d, poisson_tv, m0 })
}

/// `(mu/t)^t ((n - mu)/(n - t))^{n - t}` with `0^0 = 1`.
pub fn binomial_tail_bound(n: u64, mu: f64, t: f64) -> Result<f64> {
    let nf = n as f64;
    if !(t > mu) {
        return Err(PbError::Domain(format!("tail bound needs t > mu, got t = {t}, mu = {mu}")));
    }
    if t > nf || mu < 0.0 {
        return Err(PbError::Domain(format!("tail bound needs 0 <= mu < t <= n, got n = {n}, t = {t}")));
    }
    if mu == 0.0 {
        return Ok(0.0);
    }
    let first = t * (mu / t).ln();
    let second = if nf - t == 0.0 { 0.0 } else { (nf - t) * ((nf - mu) / (nf - t)).ln() };
    Ok((first + second).exp())
}
