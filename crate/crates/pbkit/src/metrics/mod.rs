//! Distances between lattice distributions and against the normal law.

mod entropy;
mod transport;

pub use entropy::{binary_entropy, entropy_solve, lambda_eq, linearerr_bound, BoundBranch, LinearErrBound};
pub use transport::{coupling_feasible, monotone_coupling, winf, winf_oracle, Coupling, ORACLE_MAX_SUPPORT};

use num_rational::BigRational;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Normal};
use statrs::function::factorial::ln_factorial;

use crate::error::{PbError, Result};
use crate::lattice::{align, LatticeDist};
use crate::scalar::{rational_to_f64, Scalar};

/// Truncation target for Poisson reference measures.
pub const POISSON_TAIL: f64 = 1e-15;

/// `N(mean, variance)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormalRef {
    pub mean: f64,
    pub variance: f64,
}

impl NormalRef {
    pub fn new(mean: f64, variance: f64) -> Result<Self> {
        if !(variance > 0.0 && variance.is_finite()) || !mean.is_finite() {
            return Err(PbError::Domain(format!("normal reference needs positive finite variance, got {variance}")));
        }
        Ok(Self { mean, variance })
    }

    /// Normal with the mean and variance of `dist`.
    pub fn matched<S: Scalar>(dist: &LatticeDist<S>) -> Result<Self> {
        Self::new(dist.mean(), dist.variance())
    }

    pub fn sigma(&self) -> f64 {
        self.variance.sqrt()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        std_normal_cdf((x - self.mean) / self.sigma())
    }

    /// Density `phi(z) / sigma`.
    pub fn pdf(&self, x: f64) -> f64 {
        std_normal_pdf((x - self.mean) / self.sigma()) / self.sigma()
    }

    /// `x` with `cdf(x) = c`, `0 < c < 1`.
    pub fn quantile(&self, c: f64) -> f64 {
        let mut z = Normal::standard().inverse_cdf(c);
        for _ in 0..3 {
            let d = std_normal_pdf(z);
            if d <= 0.0 {
                break;
            }
            z -= (std_normal_cdf(z) - c) / d;
        }
        self.mean + self.sigma() * z
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * std::f64::consts::PI).sqrt()
}

/// `(1/2) sum |a - b|` over the union of supports.
pub fn tv_distance<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>) -> f64 {
    0.5 * align(a, b).iter().map(|(_, x, y)| (x.to_f64() - y.to_f64()).abs()).sum::<f64>()
}

/// Max over lattice points `k` of `|F(k) - Phi((k - mean)/sigma)|`.
pub fn kolmogorov_vs_normal<S: Scalar>(dist: &LatticeDist<S>, r: &NormalRef) -> f64 {
    let cdf = dist.cdf();
    (0..dist.len())
        .map(|i| (cdf[i].to_f64() - r.cdf(dist.value_f64(i))).abs())
        .fold(0.0, f64::max)
}

/// `int_a^b Phi((x - m)/s) dx` through the antiderivative `(x - m) Phi(z) + s phi(z)`.
fn int_phi(r: &NormalRef, a: f64, b: f64) -> f64 {
    let s = r.sigma();
    let g = |x: f64| {
        let z = (x - r.mean) / s;
        (x - r.mean) * std_normal_cdf(z) + s * std_normal_pdf(z)
    };
    g(b) - g(a)
}

/// `int_a^inf (1 - Phi) dx`.
fn upper_tail_integral(r: &NormalRef, a: f64) -> f64 {
    let s = r.sigma();
    let z = (a - r.mean) / s;
    s * std_normal_pdf(z) - (a - r.mean) * std_normal_cdf(-z)
}

/// `int_{-inf}^b Phi dx`.
fn lower_tail_integral(r: &NormalRef, b: f64) -> f64 {
    let s = r.sigma();
    let z = (b - r.mean) / s;
    (b - r.mean) * std_normal_cdf(z) + s * std_normal_pdf(z)
}

/// `int_a^b |c - Phi|` with the crossing point handled in closed form.
fn abs_gap(r: &NormalRef, c: f64, a: f64, b: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let below = |lo: f64, hi: f64| c * (hi - lo) - int_phi(r, lo, hi);
    let above = |lo: f64, hi: f64| int_phi(r, lo, hi) - c * (hi - lo);
    if c <= 0.0 {
        return int_phi(r, a, b);
    }
    if c >= 1.0 {
        return (b - a) - int_phi(r, a, b);
    }
    let x = r.quantile(c).clamp(a, b);
    below(a, x).abs() + above(x, b).abs()
}

/// `int |F(x) - Phi((x - mean)/sigma)| dx`, exact between consecutive atoms.
pub fn l1_vs_normal<S: Scalar>(dist: &LatticeDist<S>, r: &NormalRef) -> f64 {
    let atoms: Vec<(f64, f64)> = dist.atoms().into_iter().map(|(x, m)| (rational_to_f64(&x), m.to_f64())).collect();
    let mut total = lower_tail_integral(r, atoms[0].0);
    let mut f = 0.0;
    for w in atoms.windows(2) {
        f += w[0].1;
        total += abs_gap(r, f.min(1.0), w[0].0, w[1].0);
    }
    total + upper_tail_integral(r, atoms[atoms.len() - 1].0)
}

/// `W_p` through the quantile coupling.
pub fn wasserstein_p<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>, p: f64) -> Result<f64> {
    if !(p >= 1.0) || !p.is_finite() {
        return Err(PbError::Domain(format!("Wasserstein order must be finite and >= 1, got {p}")));
    }
    let c = monotone_coupling(a, b);
    let sum: f64 = c
        .plan
        .iter()
        .map(|(i, j, m)| {
            let d = rational_to_f64(&(a.value(*i) - b.value(*j)));
            m.to_f64() * d.abs().powf(p)
        })
        .sum();
    Ok(sum.powf(1.0 / p))
}

/// Truncated `Poi(lambda)` with a bound on the neglected tail mass.
#[derive(Clone, Debug)]
pub struct PoissonRef {
    pub lambda: f64,
    pub dist: LatticeDist<f64>,
    pub tail_bound: f64,
}

pub fn poisson_reference(lambda: f64) -> Result<PoissonRef> {
    if !(lambda >= 0.0) || !lambda.is_finite() {
        return Err(PbError::Domain(format!("Poisson mean must be finite and nonnegative, got {lambda}")));
    }
    if lambda == 0.0 {
        return Ok(PoissonRef { lambda, dist: LatticeDist::point(BigRational::from_integer(0.into())), tail_bound: 0.0 });
    }
    let lpmf = |k: u64| -lambda + k as f64 * lambda.ln() - ln_factorial(k);
    let mut masses = Vec::new();
    let mut k = 0u64;
    loop {
        masses.push(lpmf(k).exp());
        if k as f64 >= lambda {
            let ratio = lambda / (k as f64 + 2.0);
            let tail = lpmf(k + 1).exp() / (1.0 - ratio);
            if tail < POISSON_TAIL {
                let dist = LatticeDist::on_integers(masses)?;
                return Ok(PoissonRef { lambda, dist, tail_bound: tail });
            }
        }
        k += 1;
    }
}

/// A value known to lie in `[value, value + error_bar]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Bounded {
    pub value: f64,
    pub error_bar: f64,
}

/// TV distance to `Poi(lambda)`, carrying the truncation error bar.
pub fn tv_vs_poisson(dist: &LatticeDist<f64>, lambda: f64) -> Result<Bounded> {
    let r = poisson_reference(lambda)?;
    Ok(Bounded { value: tv_distance(dist, &r.dist), error_bar: r.tail_bound })
}
