//! Poisson binomial distributions: parameters, pmf by five methods, cdf by two, moments and mode.

mod bigfloat;
mod cl;

use std::f64::consts::PI;

use num_complex::Complex64;
use num_rational::BigRational;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{PbError, Result};
use crate::lattice::LatticeDist;
use crate::scalar::{parse_rational, rational_to_f64, Scalar};

/// Largest `n` accepted by subset enumeration.
pub const BRUTE_FORCE_MAX_N: usize = 20;
/// Above this size the Fourier pmf switches to an FFT.
pub const DFT_FAST_THRESHOLD: usize = 512;

/// The vector `(p_1, ..., p_n)`.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbParams<S = f64> {
    probs: Vec<S>,
}

impl<S: Scalar> ProbParams<S> {
    pub fn new(probs: Vec<S>) -> Result<Self> {
        if probs.is_empty() {
            return Err(PbError::Domain("need at least one probability".into()));
        }
        for (i, p) in probs.iter().enumerate() {
            let f = p.to_f64();
            if p < &S::zero() || p > &S::one() || f.is_nan() {
                return Err(PbError::Domain(format!("p[{i}] = {f} is not in [0,1]")));
            }
        }
        Ok(Self { probs })
    }

    /// `n` copies of `p`.
    pub fn binomial(n: usize, p: S) -> Result<Self> {
        Self::new(vec![p; n])
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }
    pub fn n(&self) -> usize {
        self.probs.len()
    }

    /// `mu = sum p_i`.
    pub fn mean(&self) -> S {
        self.probs.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn pbar(&self) -> S {
        self.mean() / S::from_int(self.n() as i64)
    }

    /// `sum p_i (1 - p_i)`.
    pub fn variance(&self) -> S {
        self.probs
            .iter()
            .fold(S::zero(), |a, p| a + p.clone() * (S::one() - p.clone()))
    }

    pub fn sum_sq(&self) -> S {
        self.probs.iter().fold(S::zero(), |a, p| a + p.clone() * p.clone())
    }

    pub fn to_f64(&self) -> ProbParams<f64> {
        ProbParams { probs: self.probs.iter().map(|p| p.to_f64()).collect() }
    }

    pub fn to_exact(&self) -> ProbParams<BigRational> {
        ProbParams { probs: self.probs.iter().map(|p| p.to_rational()).collect() }
    }

    /// Counts of `p = 0`, `p = 1`, and the interior probabilities.
    pub fn split_degenerate(&self) -> (usize, usize, Vec<S>) {
        let zeros = self.probs.iter().filter(|p| p.is_zero()).count();
        let ones = self.probs.iter().filter(|p| **p == S::one()).count();
        let interior = self
            .probs
            .iter()
            .filter(|p| !p.is_zero() && **p != S::one())
            .cloned()
            .collect();
        (zeros, ones, interior)
    }

    pub fn to_json(&self) -> String {
        let items: Vec<serde_json::Value> = self
            .probs
            .iter()
            .map(|p| {
                if S::EXACT {
                    serde_json::Value::String(p.render())
                } else {
                    serde_json::json!(p.to_f64())
                }
            })
            .collect();
        serde_json::json!({ "probs": items }).to_string()
    }
}

fn json_probs(text: &str) -> Result<Vec<BigRational>> {
    let v: serde_json::Value = serde_json::from_str(text).map_err(|e| PbError::Parse(e.to_string()))?;
    let arr = match &v {
        serde_json::Value::Array(a) => a,
        serde_json::Value::Object(o) => o
            .get("probs")
            .and_then(|p| p.as_array())
            .ok_or_else(|| PbError::Parse("expected {\"probs\": [...]}".into()))?,
        _ => return Err(PbError::Parse("expected a probability list".into())),
    };
    arr.iter()
        .map(|x| match x {
            serde_json::Value::Number(n) => parse_rational(&n.to_string()),
            serde_json::Value::String(s) => parse_rational(s),
            _ => Err(PbError::Parse(format!("bad probability entry {x}"))),
        })
        .collect()
}

impl ProbParams<f64> {
    /// Accepts `{"probs": [...]}` or a bare list; entries are numbers or rational strings.
    pub fn from_json(text: &str) -> Result<Self> {
        Self::new(json_probs(text)?.iter().map(rational_to_f64).collect())
    }
}

impl ProbParams<BigRational> {
    /// Decimal entries are read exactly (`0.3` becomes `3/10`).
    pub fn from_json_exact(text: &str) -> Result<Self> {
        Self::new(json_probs(text)?)
    }
}

/// The five pmf algorithms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PmfMethod {
    BruteForce,
    Convolution,
    RecursionCL,
    RecursionGLR,
    Dft,
}

impl PmfMethod {
    pub const ALL: [PmfMethod; 5] = [
        PmfMethod::BruteForce,
        PmfMethod::Convolution,
        PmfMethod::RecursionCL,
        PmfMethod::RecursionGLR,
        PmfMethod::Dft,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PmfMethod::BruteForce => "brute-force",
            PmfMethod::Convolution => "convolution",
            PmfMethod::RecursionCL => "recursion-cl",
            PmfMethod::RecursionGLR => "recursion-glr",
            PmfMethod::Dft => "dft",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Ok(match s.to_ascii_lowercase().as_str() {
            "brute-force" | "bruteforce" | "brute" => PmfMethod::BruteForce,
            "convolution" | "conv" => PmfMethod::Convolution,
            "recursion-cl" | "cl" => PmfMethod::RecursionCL,
            "recursion-glr" | "glr" => PmfMethod::RecursionGLR,
            "dft" | "fourier" => PmfMethod::Dft,
            other => return Err(PbError::Parse(format!("unknown pmf method {other:?}"))),
        })
    }
}

/// A Poisson binomial law with its pmf on `0..=n`.
#[derive(Clone, Debug)]
pub struct PbDist<S = f64> {
    pub params: ProbParams<S>,
    pub pmf: LatticeDist<S>,
    pub method: PmfMethod,
    /// Set when the power-sum recursion met partial sums above `1e6` times its result;
    /// the result is still accurate (extended precision), but `RecursionGLR` is the cheaper choice.
    pub loss_of_significance: bool,
}

impl<S: Scalar> PbDist<S> {
    pub fn masses(&self) -> &[S] {
        self.pmf.masses()
    }
}

fn brute_force<S: Scalar>(p: &[S]) -> Vec<S> {
    let n = p.len();
    let mut out = vec![S::zero(); n + 1];
    let q: Vec<S> = p.iter().map(|x| S::one() - x.clone()).collect();
    for mask in 0u32..(1u32 << n) {
        let mut w = S::one();
        for i in 0..n {
            w = w * if mask >> i & 1 == 1 { p[i].clone() } else { q[i].clone() };
        }
        let k = mask.count_ones() as usize;
        out[k] = out[k].clone() + w;
    }
    out
}

fn convolution<S: Scalar>(p: &[S]) -> Vec<S> {
    let mut out = vec![S::one()];
    for pi in p {
        let qi = S::one() - pi.clone();
        let mut next = vec![S::zero(); out.len() + 1];
        for (k, v) in out.iter().enumerate() {
            next[k] = next[k].clone() + v.clone() * qi.clone();
            next[k + 1] = next[k + 1].clone() + v.clone() * pi.clone();
        }
        out = next;
    }
    out
}

/// Element-removal recursion `R(k, B) = R(k, B\{j}) + w_j R(k-1, B\{j})`, exact fields.
fn glr_generic<S: Scalar>(p: &[S]) -> Vec<S> {
    let mut r = vec![S::one()];
    for pi in p {
        let w = pi.clone() / (S::one() - pi.clone());
        r.push(S::zero());
        for k in (1..r.len()).rev() {
            r[k] = r[k].clone() + w.clone() * r[k - 1].clone();
        }
    }
    let q = p.iter().fold(S::one(), |a, x| a * (S::one() - x.clone()));
    r.into_iter().map(|v| v * q.clone()).collect()
}

/// Same recursion in floats with running rescaling; the scale is tracked in logs.
fn glr_f64(p: &[f64]) -> Vec<f64> {
    let mut r = vec![1.0f64];
    let mut log_scale = 0.0f64;
    for &pi in p {
        let w = pi / (1.0 - pi);
        r.push(0.0);
        for k in (1..r.len()).rev() {
            r[k] += w * r[k - 1];
        }
        let m = r.iter().cloned().fold(0.0f64, f64::max);
        if !(1e-100..=1e100).contains(&m) {
            for v in r.iter_mut() {
                *v /= m;
            }
            log_scale += m.ln();
        }
    }
    let log_q: f64 = p.iter().map(|x| (1.0 - x).ln()).sum();
    r.into_iter()
        .map(|v| if v > 0.0 { (v.ln() + log_scale + log_q).exp() } else { 0.0 })
        .collect()
}

/// `x_j = prod_k (1 - p_k + p_k e^{i w j})`, `w = 2 pi / (n + 1)`.
fn characteristic_values(p: &[f64], n: usize) -> Vec<Complex64> {
    let w = 2.0 * PI / (n as f64 + 1.0);
    (0..=n)
        .map(|j| {
            let z = Complex64::from_polar(1.0, w * j as f64);
            p.iter().fold(Complex64::new(1.0, 0.0), |acc, &pk| acc * (Complex64::new(1.0 - pk, 0.0) + z * pk))
        })
        .collect()
}

fn dft_pmf(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let x = characteristic_values(p, n);
    let m = n + 1;
    let raw: Vec<f64> = if n > DFT_FAST_THRESHOLD {
        let mut buf = x;
        FftPlanner::new().plan_fft_forward(m).process(&mut buf);
        buf.iter().map(|c| c.re / m as f64).collect()
    } else {
        let w = 2.0 * PI / m as f64;
        (0..=n)
            .map(|k| {
                let s: f64 = x
                    .iter()
                    .enumerate()
                    .map(|(j, xj)| (Complex64::from_polar(1.0, -w * ((k * j) % m) as f64) * xj).re)
                    .sum();
                s / m as f64
            })
            .collect()
    };
    raw.into_iter().map(|v| v.max(0.0)).collect()
}

/// Embed the pmf of interior probabilities into the full support.
fn embed<S: Scalar>(core: Vec<S>, ones: usize, n: usize) -> Vec<S> {
    let mut out = vec![S::zero(); n + 1];
    for (k, v) in core.into_iter().enumerate() {
        out[k + ones] = v;
    }
    out
}

/// Float pmf of `PB(p)` by the chosen method.
pub fn pb_pmf(params: &ProbParams<f64>, method: PmfMethod) -> Result<PbDist<f64>> {
    let n = params.n();
    let p = params.probs();
    let mut loss = false;
    let masses = match method {
        PmfMethod::BruteForce => {
            if n > BRUTE_FORCE_MAX_N {
                return Err(PbError::Size(format!("brute force needs n <= {BRUTE_FORCE_MAX_N}, got {n}")));
            }
            brute_force(p)
        }
        PmfMethod::Convolution => convolution(p),
        PmfMethod::RecursionCL => {
            let (_, ones, interior) = params.split_degenerate();
            let out = cl::cl_pmf_f64(&interior);
            loss = out.loss_of_significance;
            embed(out.pmf, ones, n)
        }
        PmfMethod::RecursionGLR => {
            let (_, ones, interior) = params.split_degenerate();
            embed(glr_f64(&interior), ones, n)
        }
        PmfMethod::Dft => dft_pmf(p),
    };
    let pmf = LatticeDist::from_parts_unchecked(BigRational::from_integer(0.into()), BigRational::from_integer(1.into()), masses);
    Ok(PbDist { params: params.clone(), pmf, method, loss_of_significance: loss })
}

/// Exact pmf over rationals.  The Fourier method has no exact counterpart.
pub fn pb_pmf_exact(params: &ProbParams<BigRational>, method: PmfMethod) -> Result<PbDist<BigRational>> {
    let n = params.n();
    let p = params.probs();
    let masses = match method {
        PmfMethod::BruteForce => {
            if n > BRUTE_FORCE_MAX_N {
                return Err(PbError::Size(format!("brute force needs n <= {BRUTE_FORCE_MAX_N}, got {n}")));
            }
            brute_force(p)
        }
        PmfMethod::Convolution => convolution(p),
        PmfMethod::RecursionCL => {
            let (_, ones, interior) = params.split_degenerate();
            embed(cl::cl_pmf_generic(&interior), ones, n)
        }
        PmfMethod::RecursionGLR => {
            let (_, ones, interior) = params.split_degenerate();
            embed(glr_generic(&interior), ones, n)
        }
        PmfMethod::Dft => {
            return Err(PbError::Unsupported("the Fourier pmf is float-only".into()));
        }
    };
    let pmf = LatticeDist::on_integers(masses)?;
    Ok(PbDist { params: params.clone(), pmf, method, loss_of_significance: false })
}

/// `P(X <= k)` as a prefix sum of the pmf.
pub fn pb_cdf<S: Scalar>(dist: &PbDist<S>, k: usize) -> Result<S> {
    let n = dist.params.n();
    if k > n {
        return Err(PbError::Domain(format!("k = {k} outside 0..={n}")));
    }
    Ok(dist.masses()[..=k].iter().cloned().fold(S::zero(), |a, b| a + b))
}

/// `P(X <= k)` from the characteristic values:
/// `(1/(n+1)) sum_j (1 - e^{-i w (k+1) j}) / (1 - e^{-i w j}) x_j`, the `j = 0` ratio being `k + 1`.
pub fn pb_cdf_fourier(params: &ProbParams<f64>, k: usize) -> Result<f64> {
    let n = params.n();
    if k > n {
        return Err(PbError::Domain(format!("k = {k} outside 0..={n}")));
    }
    let x = characteristic_values(params.probs(), n);
    Ok(fourier_cdf_from(&x, n, k))
}

/// All `n + 1` Fourier cdf values, sharing the characteristic values.
pub fn pb_cdf_fourier_all(params: &ProbParams<f64>) -> Vec<f64> {
    let n = params.n();
    let x = characteristic_values(params.probs(), n);
    (0..=n).map(|k| fourier_cdf_from(&x, n, k)).collect()
}

fn fourier_cdf_from(x: &[Complex64], n: usize, k: usize) -> f64 {
    let m = n + 1;
    let w = 2.0 * PI / m as f64;
    let mut s = Complex64::new((k + 1) as f64, 0.0) * x[0];
    for (j, xj) in x.iter().enumerate().skip(1) {
        let num = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w * (((k + 1) * j) % m) as f64);
        let den = Complex64::new(1.0, 0.0) - Complex64::from_polar(1.0, -w * j as f64);
        s += num / den * xj;
    }
    (s.re / m as f64).clamp(0.0, 1.0)
}

/// `(mean, variance)` with variance `n pbar (1 - pbar) - sum (p_i - pbar)^2`.
pub fn mean_var<S: Scalar>(params: &ProbParams<S>) -> (S, S) {
    let n = S::from_int(params.n() as i64);
    let pbar = params.pbar();
    let spread = params
        .probs()
        .iter()
        .fold(S::zero(), |a, p| a + (p.clone() - pbar.clone()) * (p.clone() - pbar.clone()));
    let mean = n.clone() * pbar.clone();
    let var = n * pbar.clone() * (S::one() - pbar) - spread;
    (mean, var)
}

/// One mode, or two adjacent modes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModeResult {
    Single(usize),
    Either(usize, usize),
}

impl ModeResult {
    pub fn contains(&self, k: usize) -> bool {
        match *self {
            ModeResult::Single(m) => m == k,
            ModeResult::Either(a, b) => k == a || k == b,
        }
    }
}

/// Three-branch mode rule on `mu`, with `k = floor(mu)`:
/// `k` if `mu < k + 1/(k+2)`; `k+1` if `mu > k + 1 - 1/(n-k+1)`; otherwise `k` or `k+1`.
pub fn darroch_mode<S: Scalar>(params: &ProbParams<S>) -> ModeResult {
    let n = params.n();
    let mu = params.mean().to_f64();
    if mu <= 0.0 {
        return ModeResult::Single(0);
    }
    if mu >= n as f64 {
        return ModeResult::Single(n);
    }
    let k = (mu.floor() as usize).min(n - 1);
    let kf = k as f64;
    if mu < kf + 1.0 / (kf + 2.0) {
        ModeResult::Single(k)
    } else if mu > kf + 1.0 - 1.0 / ((n - k) as f64 + 1.0) {
        ModeResult::Single(k + 1)
    } else {
        ModeResult::Either(k, k + 1)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    fn params(p: &[f64]) -> ProbParams<f64> {
        ProbParams::new(p.to_vec()).unwrap()
    }

    #[test]
    fn fair_coins_all_methods() {
        for m in PmfMethod::ALL {
            let d = pb_pmf(&params(&[0.5, 0.5]), m).unwrap();
            for (a, b) in d.masses().iter().zip([0.25, 0.5, 0.25]) {
                assert!((a - b).abs() < 1e-14, "{m:?}");
            }
        }
    }

    #[test]
    fn two_unequal_coins() {
        for m in PmfMethod::ALL {
            let d = pb_pmf(&params(&[0.3, 0.5]), m).unwrap();
            for (a, b) in d.masses().iter().zip([0.35, 0.5, 0.15]) {
                assert!((a - b).abs() < 1e-14, "{m:?}");
            }
        }
    }

    #[test]
    fn exact_rational_pmf() {
        let p = ProbParams::new(vec![ratio(3, 10), ratio(1, 2)]).unwrap();
        for m in [PmfMethod::BruteForce, PmfMethod::Convolution, PmfMethod::RecursionCL, PmfMethod::RecursionGLR] {
            let d = pb_pmf_exact(&p, m).unwrap();
            assert_eq!(d.masses(), &[ratio(35, 100), ratio(1, 2), ratio(15, 100)]);
        }
        assert!(matches!(pb_pmf_exact(&p, PmfMethod::Dft), Err(PbError::Unsupported(_))));
    }

    #[test]
    fn degenerate_coordinates() {
        let p = params(&[1.0, 0.0, 0.5, 1.0]);
        for m in PmfMethod::ALL {
            let d = pb_pmf(&p, m).unwrap();
            let want = [0.0, 0.0, 0.5, 0.5, 0.0];
            for (a, b) in d.masses().iter().zip(want) {
                assert!((a - b).abs() < 1e-14, "{m:?} {:?}", d.masses());
            }
        }
    }

    #[test]
    fn brute_force_size_guard() {
        let p = params(&[0.5; 21]);
        assert!(matches!(pb_pmf(&p, PmfMethod::BruteForce), Err(PbError::Size(_))));
    }

    #[test]
    fn invalid_probability() {
        assert!(ProbParams::new(vec![1.2]).is_err());
        assert!(ProbParams::new(vec![f64::NAN]).is_err());
        assert!(ProbParams::<f64>::new(vec![]).is_err());
    }

    #[test]
    fn cdf_paths() {
        let b = params(&[0.5, 0.5]);
        let d = pb_pmf(&b, PmfMethod::Convolution).unwrap();
        assert!((pb_cdf(&d, 1).unwrap() - 0.75).abs() < 1e-15);
        assert!((pb_cdf_fourier(&b, 1).unwrap() - 0.75).abs() < 1e-14);
        let q = params(&[0.3, 0.5]);
        assert!((pb_cdf_fourier(&q, 0).unwrap() - 0.35).abs() < 1e-14);
        assert!(pb_cdf(&d, 3).is_err());
        assert!((pb_cdf_fourier(&q, 2).unwrap() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn moments() {
        let (m, v) = mean_var(&params(&[0.5, 0.5]));
        assert!((m - 1.0).abs() < 1e-15 && (v - 0.5).abs() < 1e-15);
        let (m, v) = mean_var(&params(&[0.3, 0.5]));
        assert!((m - 0.8).abs() < 1e-15 && (v - 0.46).abs() < 1e-15);
        let (_, v1) = mean_var(&params(&[0.5, 0.5]));
        let (_, v2) = mean_var(&params(&[0.2, 0.8]));
        assert!(v1 > v2);
        let e = ProbParams::new(vec![ratio(3, 10), ratio(1, 2)]).unwrap();
        assert_eq!(mean_var(&e).1, e.variance());
    }

    #[test]
    fn darroch_examples() {
        assert_eq!(darroch_mode(&params(&[0.5; 4])), ModeResult::Single(2));
        assert_eq!(darroch_mode(&params(&[0.1, 0.2, 0.9])), ModeResult::Single(1));
        assert_eq!(darroch_mode(&params(&[0.5])), ModeResult::Either(0, 1));
    }

    #[test]
    fn json_forms() {
        let p = ProbParams::from_json(r#"{"probs":[0.5,"1/4"]}"#).unwrap();
        assert_eq!(p.probs(), &[0.5, 0.25]);
        let e = ProbParams::from_json_exact("[0.3, 0.5]").unwrap();
        assert_eq!(e.probs(), &[ratio(3, 10), ratio(1, 2)]);
        assert!(ProbParams::from_json("[2]").is_err());
        let back = ProbParams::from_json_exact(&e.to_json()).unwrap();
        assert_eq!(back, e);
    }

    #[test]
    fn cl_extreme_probabilities() {
        let mut p: Vec<f64> = (0..400).map(|i| ((i * 37 % 400) as f64 + 0.5) / 400.0).collect();
        p[3] = 1e-9;
        p[7] = 1.0 - 1e-9;
        let pp = params(&p);
        let a = pb_pmf(&pp, PmfMethod::RecursionCL).unwrap();
        let b = pb_pmf(&pp, PmfMethod::Convolution).unwrap();
        let err = a.masses().iter().zip(b.masses()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
        assert!(err < 1e-12, "{err}");
        assert!(a.loss_of_significance);
    }
}
