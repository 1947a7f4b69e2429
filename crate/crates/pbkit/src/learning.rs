//! Proper learning of PB laws from samples: a sampler, a two-branch learner and an evaluation harness.
//!
//! The learner splits on the empirical variance. Small variance goes to the sparse branch, which fits
//! `PB` parameters to the empirical pmf on a window around the mean. Large variance goes to the heavy
//! branch, which matches mean and variance with `k` coordinates at a common `p` and the rest at 0 or 1.

use rand::distr::weighted::WeightedIndex;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{PbError, Result};
use crate::metrics::tv_distance;
use crate::optim::NelderMead;
use crate::pb::{pb_pmf, PmfMethod, ProbParams};

/// Sample-size constant `C` in `m >= C log(1/delta) / eps^2`.
pub const SAMPLE_CONSTANT: f64 = 100.0;
/// Empirical variances at or below this go to the sparse branch.
pub const SPARSE_VARIANCE_THRESHOLD: f64 = 10.0;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleSet {
    pub draws: Vec<usize>,
    pub n: usize,
    pub seed: u64,
}

impl SampleSet {
    pub fn new(draws: Vec<usize>, n: usize, seed: u64) -> Result<Self> {
        if let Some(d) = draws.iter().find(|&&d| d > n) {
            return Err(PbError::Domain(format!("draw {d} exceeds n = {n}")));
        }
        Ok(Self { draws, n, seed })
    }

    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn empirical_pmf(&self) -> Vec<f64> {
        let mut h = vec![0.0; self.n + 1];
        for &d in &self.draws {
            h[d] += 1.0;
        }
        let m = self.draws.len().max(1) as f64;
        h.iter_mut().for_each(|v| *v /= m);
        h
    }

    /// Empirical mean and unbiased variance.
    pub fn moments(&self) -> (f64, f64) {
        let m = self.draws.len() as f64;
        let mean = self.draws.iter().sum::<usize>() as f64 / m;
        if self.draws.len() < 2 {
            return (mean, 0.0);
        }
        let ss: f64 = self.draws.iter().map(|&d| (d as f64 - mean).powi(2)).sum();
        (mean, ss / (m - 1.0))
    }

    /// One integer per line.
    pub fn from_csv(text: &str, n: usize, seed: u64) -> Result<Self> {
        let mut draws = Vec::new();
        for (i, line) in text.lines().enumerate() {
            let t = line.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            let d = t.parse::<usize>().map_err(|e| PbError::Parse(format!("line {}: {e}", i + 1)))?;
            draws.push(d);
        }
        Self::new(draws, n, seed)
    }

    pub fn to_csv(&self) -> String {
        self.draws.iter().map(|d| format!("{d}\n")).collect()
    }
}

/// Seeded generator on stream `stream`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn sample_with(params: &ProbParams<f64>, m: usize, rng: &mut ChaCha8Rng) -> Result<Vec<usize>> {
    let pmf = pb_pmf(params, PmfMethod::Convolution)?;
    let n = params.n();
    let masses = pmf.masses();
    if let Some(k) = masses.iter().position(|&v| v >= 1.0) {
        return Ok(vec![k.min(n); m]);
    }
    let dist = WeightedIndex::new(masses).map_err(|e| PbError::Degenerate(format!("sampler: {e}")))?;
    Ok((0..m).map(|_| rng.sample(&dist)).collect())
}

/// `m` independent draws of `PB(params)`, reproducible under `seed`.
pub fn sample(params: &ProbParams<f64>, m: usize, seed: u64) -> Result<SampleSet> {
    if m == 0 {
        return Err(PbError::Domain("need m >= 1".into()));
    }
    let draws = sample_with(params, m, &mut stream_rng(seed, 0))?;
    SampleSet::new(draws, params.n(), seed)
}

/// `ceil(C log(1/delta) / eps^2)`.
pub fn required_samples(eps: f64, delta: f64) -> Result<usize> {
    if !(eps > 0.0 && eps < 1.0) || !(delta > 0.0 && delta < 1.0) {
        return Err(PbError::Domain("eps and delta must lie in (0, 1)".into()));
    }
    Ok((SAMPLE_CONSTANT * (1.0 / delta).ln() / (eps * eps)).ceil() as usize)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Branch {
    Sparse,
    Heavy,
}

#[derive(Clone, Debug, Serialize)]
pub struct LearnDiagnostics {
    pub sample_size: usize,
    pub required_samples: usize,
    pub sample_constant: f64,
    pub variance_threshold: f64,
    pub empirical_mean: f64,
    pub empirical_variance: f64,
    pub model_mean: f64,
    pub model_variance: f64,
    /// Window `[lo, hi]` carrying the non-degenerate coordinates.
    pub effective_support: (usize, usize),
    /// TV between the model pmf and the empirical pmf.
    pub empirical_tv: f64,
}

#[derive(Clone, Debug)]
pub struct LearnedModel {
    pub params: ProbParams<f64>,
    pub branch: Branch,
    pub diagnostics: LearnDiagnostics,
}

impl LearnedModel {
    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::json!({
            "params": self.params.probs(),
            "branch": self.branch,
            "diagnostics": self.diagnostics,
        })
    }
}

/// Best `(ones, k, p)` with `ones + k p ~ mean` and `k p (1 - p) ~ var`, `ones + k <= n`.
fn moment_form(mean: f64, var: f64, n: usize) -> (usize, usize, f64) {
    let mut best = (mean.round().clamp(0.0, n as f64) as usize, 0, 0.0, f64::INFINITY);
    if n == 0 {
        return (0, 0, 0.0);
    }
    for k in 1..=n {
        let kf = k as f64;
        let disc = 1.0 - 4.0 * var / kf;
        let roots: Vec<f64> = if disc >= 0.0 {
            let s = disc.sqrt();
            vec![(1.0 - s) / 2.0, (1.0 + s) / 2.0]
        } else {
            vec![0.5]
        };
        for p0 in roots {
            let ones = (mean - kf * p0).round().clamp(0.0, (n - k) as f64) as usize;
            let p = ((mean - ones as f64) / kf).clamp(0.0, 1.0);
            let err = (ones as f64 + kf * p - mean).abs() + (kf * p * (1.0 - p) - var).abs();
            if err < best.3 - 1e-12 {
                best = (ones, k, p, err);
            }
        }
    }
    (best.0, best.1, best.2)
}

fn expand_form(ones: usize, k: usize, p: f64, n: usize) -> Vec<f64> {
    let mut out = vec![1.0; ones];
    out.extend(std::iter::repeat_n(p, k));
    out.resize(n, 0.0);
    out
}

fn conv_pmf(p: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    for &pi in p {
        out.push(0.0);
        for k in (0..out.len()).rev() {
            let prev = if k > 0 { out[k - 1] } else { 0.0 };
            out[k] = out[k] * (1.0 - pi) + prev * pi;
        }
    }
    out
}

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn logit(p: f64) -> f64 {
    let p = p.clamp(1e-6, 1.0 - 1e-6);
    (p / (1.0 - p)).ln()
}

/// Smallest window `[lo, hi]` leaving at most `tail` empirical mass on each side.
fn window(h: &[f64], tail: f64) -> (usize, usize) {
    let mut acc = 0.0;
    let mut lo = 0;
    for (k, v) in h.iter().enumerate() {
        acc += v;
        if acc > tail {
            lo = k;
            break;
        }
    }
    let mut acc = 0.0;
    let mut hi = h.len() - 1;
    for (k, v) in h.iter().enumerate().rev() {
        acc += v;
        if acc > tail {
            hi = k;
            break;
        }
    }
    (lo, hi.max(lo))
}

/// TV on `0..=n` between `lo + PB(free)` and the empirical pmf `h`.
fn window_tv(free: &[f64], lo: usize, h: &[f64]) -> f64 {
    let q = conv_pmf(free);
    let mut tv = 0.0;
    for (k, hk) in h.iter().enumerate() {
        let qk = if k >= lo && k - lo < q.len() { q[k - lo] } else { 0.0 };
        tv += (qk - hk).abs();
    }
    0.5 * tv
}

fn fit_sparse(h: &[f64], mean: f64, var: f64, eps: f64) -> (Vec<f64>, (usize, usize)) {
    let n = h.len() - 1;
    let (lo, hi) = window(h, eps / 40.0);
    // `K` free coordinates carry variance at most `K / 4`.
    let need = (4.0 * var).ceil() as usize + 2;
    let width = (hi - lo).max(need).min((8.0 / eps).ceil() as usize).min(n);
    let lo = lo.saturating_sub((width.saturating_sub(hi - lo)) / 2).min(n - width);
    let hi = lo + width;
    let (ones, k, p) = moment_form(mean - lo as f64, var, width);
    let start = expand_form(ones, k, p, width);
    let free = if width == 0 {
        Vec::new()
    } else {
        let x0: Vec<f64> = start.iter().map(|&p| logit(p)).collect();
        let nm = NelderMead { max_evals: 200 * width.max(5), step: 1.0, ..Default::default() };
        let best = nm.minimize(|z: &[f64]| window_tv(&z.iter().map(|&v| sigmoid(v)).collect::<Vec<_>>(), lo, h), &x0);
        let fitted: Vec<f64> = best.x.iter().map(|&v| sigmoid(v)).collect();
        if window_tv(&fitted, lo, h) <= window_tv(&start, lo, h) {
            fitted
        } else {
            start
        }
    };
    let mut params = vec![1.0; lo];
    params.extend(free);
    params.resize(n, 0.0);
    (params, (lo, hi))
}

/// Learn a PB vector from `samples`. Sample sizes below the required bound are accepted and flagged.
pub fn learn_pb(samples: &SampleSet, eps: f64, delta: f64) -> Result<LearnedModel> {
    if samples.is_empty() {
        return Err(PbError::Domain("empty sample".into()));
    }
    if samples.n == 0 {
        return Err(PbError::Domain("need n >= 1".into()));
    }
    let required = required_samples(eps, delta)?;
    let h = samples.empirical_pmf();
    let (mean, var) = samples.moments();
    let n = samples.n;
    let (mut probs, branch, support) = if var <= SPARSE_VARIANCE_THRESHOLD {
        let (p, w) = fit_sparse(&h, mean, var, eps);
        (p, Branch::Sparse, w)
    } else {
        let (ones, k, p) = moment_form(mean, var, n);
        (expand_form(ones, k, p, n), Branch::Heavy, (ones, ones + k))
    };
    probs.sort_by(f64::total_cmp);
    let params = ProbParams::new(probs)?;
    let empirical_tv = window_tv(params.probs(), 0, &h);
    let diagnostics = LearnDiagnostics {
        sample_size: samples.len(),
        required_samples: required,
        sample_constant: SAMPLE_CONSTANT,
        variance_threshold: SPARSE_VARIANCE_THRESHOLD,
        empirical_mean: mean,
        empirical_variance: var,
        model_mean: params.mean(),
        model_variance: params.variance(),
        effective_support: support,
        empirical_tv,
    };
    Ok(LearnedModel { params, branch, diagnostics })
}

/// TV between two PB laws through their pmfs.
pub fn pb_tv(a: &ProbParams<f64>, b: &ProbParams<f64>) -> Result<f64> {
    Ok(tv_distance(&pb_pmf(a, PmfMethod::Convolution)?.pmf, &pb_pmf(b, PmfMethod::Convolution)?.pmf))
}

#[derive(Clone, Debug, Serialize)]
pub struct EvalReport {
    pub success_rate: f64,
    pub mean_tv: f64,
    pub median_tv: f64,
    pub sample_size: usize,
    pub trials: usize,
    pub eps: f64,
    pub delta: f64,
    pub seed: u64,
    pub sample_constant: f64,
    /// `1 - delta - 3 sqrt(delta (1 - delta) / trials)`.
    pub threshold: f64,
    pub passed: bool,
    pub sparse_trials: usize,
    pub heavy_trials: usize,
}

fn run_trials<T: Send>(trials: usize, job: impl Fn(usize) -> Result<T> + Sync) -> Result<Vec<T>> {
    let workers = std::thread::available_parallelism().map_or(1, |n| n.get()).min(trials.max(1));
    let results: Vec<Result<Vec<(usize, T)>>> = std::thread::scope(|s| {
        let handles: Vec<_> = (0..workers)
            .map(|w| {
                let job = &job;
                s.spawn(move || (w..trials).step_by(workers).map(|t| job(t).map(|v| (t, v))).collect::<Result<Vec<_>>>())
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
    });
    let mut all = Vec::with_capacity(trials);
    for r in results {
        all.extend(r?);
    }
    all.sort_by_key(|(t, _)| *t);
    Ok(all.into_iter().map(|(_, v)| v).collect())
}

fn median(v: &mut [f64]) -> f64 {
    v.sort_by(f64::total_cmp);
    let m = v.len();
    if m % 2 == 1 {
        v[m / 2]
    } else {
        0.5 * (v[m / 2 - 1] + v[m / 2])
    }
}

/// Learn from `trials` independent seeded samples of `truth`; `sample_size` defaults to the required bound.
pub fn evaluate_learner(
    truth: &ProbParams<f64>,
    eps: f64,
    delta: f64,
    trials: usize,
    seed: u64,
    sample_size: Option<usize>,
) -> Result<EvalReport> {
    if trials == 0 {
        return Err(PbError::Domain("need trials >= 1".into()));
    }
    let m = match sample_size {
        Some(m) if m >= 1 => m,
        Some(_) => return Err(PbError::Domain("need sample size >= 1".into())),
        None => required_samples(eps, delta)?,
    };
    let truth_pmf = pb_pmf(truth, PmfMethod::Convolution)?.pmf;
    let outcomes = run_trials(trials, |t| {
        let draws = sample_with(truth, m, &mut stream_rng(seed, t as u64))?;
        let model = learn_pb(&SampleSet::new(draws, truth.n(), seed)?, eps, delta)?;
        let tv = tv_distance(&pb_pmf(&model.params, PmfMethod::Convolution)?.pmf, &truth_pmf);
        Ok((tv, model.branch))
    })?;
    let mut tvs: Vec<f64> = outcomes.iter().map(|o| o.0).collect();
    let success_rate = tvs.iter().filter(|&&v| v <= eps).count() as f64 / trials as f64;
    let mean_tv = tvs.iter().sum::<f64>() / trials as f64;
    let sparse_trials = outcomes.iter().filter(|o| o.1 == Branch::Sparse).count();
    let threshold = 1.0 - delta - 3.0 * (delta * (1.0 - delta) / trials as f64).sqrt();
    Ok(EvalReport {
        success_rate,
        mean_tv,
        median_tv: median(&mut tvs),
        sample_size: m,
        trials,
        eps,
        delta,
        seed,
        sample_constant: SAMPLE_CONSTANT,
        threshold,
        passed: success_rate >= threshold,
        sparse_trials,
        heavy_trials: trials - sparse_trials,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct SeparationReport {
    pub n: usize,
    pub eps: f64,
    pub p_low: f64,
    pub p_high: f64,
    pub pair_tv: f64,
    pub sample_size: usize,
    pub trials: usize,
    /// Fraction of trials whose learned model is strictly closer in TV to the law that generated it.
    pub identification_rate: f64,
    /// Identification at rate at least `1 - delta`.
    pub separated: bool,
}

/// Learn from samples of `Bin(n, 1/2 - eps/sqrt(n))` or `Bin(n, 1/2 + eps/sqrt(n))` and check whether
/// the output identifies the generating law.
pub fn separation_check(n: usize, eps: f64, delta: f64, m: usize, trials: usize, seed: u64) -> Result<SeparationReport> {
    if n == 0 || trials == 0 || m == 0 {
        return Err(PbError::Domain("need n, m, trials >= 1".into()));
    }
    let shift = eps / (n as f64).sqrt();
    if shift >= 0.5 {
        return Err(PbError::Domain("eps / sqrt(n) must be below 1/2".into()));
    }
    let low = ProbParams::binomial(n, 0.5 - shift)?;
    let high = ProbParams::binomial(n, 0.5 + shift)?;
    let pmfs = [pb_pmf(&low, PmfMethod::Convolution)?.pmf, pb_pmf(&high, PmfMethod::Convolution)?.pmf];
    let hits = run_trials(trials, |t| {
        let which = t % 2;
        let truth = if which == 0 { &low } else { &high };
        let draws = sample_with(truth, m, &mut stream_rng(seed, t as u64))?;
        let model = learn_pb(&SampleSet::new(draws, n, seed)?, eps, delta)?;
        let q = pb_pmf(&model.params, PmfMethod::Convolution)?.pmf;
        let d = [tv_distance(&q, &pmfs[0]), tv_distance(&q, &pmfs[1])];
        Ok(d[which] < d[1 - which])
    })?;
    let identification_rate = hits.iter().filter(|&&h| h).count() as f64 / trials as f64;
    Ok(SeparationReport {
        n,
        eps,
        p_low: 0.5 - shift,
        p_high: 0.5 + shift,
        pair_tv: tv_distance(&pmfs[0], &pmfs[1]),
        sample_size: m,
        trials,
        identification_rate,
        separated: identification_rate >= 1.0 - delta,
    })
}
