//! Power-sum (Newton identity) recursion
//! `R(k) = (1/k) sum_{i=1..k} (-1)^{i+1} T(i) R(k-i)`, `T(i) = sum_j w_j^i`, `w_j = p_j / (1 - p_j)`.
//!
//! The alternating sum cancels badly when the `w_j` are spread out.  The float
//! path evaluates the lower half of the support with `w` and the upper half with
//! `1/w` (the complementary variable), bounds the rounding error through the
//! complete homogeneous sums `h_k(w)`, and switches to [`BigFloat`] with enough
//! bits when `f64` cannot meet the target accuracy.

use super::bigfloat::BigFloat;
use crate::scalar::Scalar;

/// Absolute accuracy targeted for every pmf entry.
const TARGET_ABS_ERR: f64 = 1e-15;
/// Partial sums beyond this multiple of the result count as loss of significance.
const SIGNIFICANCE_RATIO: f64 = 1e6;

pub(crate) struct ClOutput {
    pub pmf: Vec<f64>,
    pub loss_of_significance: bool,
}

trait ClNum: Clone {
    fn add(&self, o: &Self) -> Self;
    fn sub(&self, o: &Self) -> Self;
    fn mul(&self, o: &Self) -> Self;
    fn div_u64(&self, k: u64) -> Self;
    fn log2_abs(&self) -> f64;
}

impl ClNum for f64 {
    fn add(&self, o: &Self) -> Self {
        self + o
    }
    fn sub(&self, o: &Self) -> Self {
        self - o
    }
    fn mul(&self, o: &Self) -> Self {
        self * o
    }
    fn div_u64(&self, k: u64) -> Self {
        self / k as f64
    }
    fn log2_abs(&self) -> f64 {
        self.abs().log2()
    }
}

impl ClNum for BigFloat {
    fn add(&self, o: &Self) -> Self {
        BigFloat::add(self, o)
    }
    fn sub(&self, o: &Self) -> Self {
        BigFloat::sub(self, o)
    }
    fn mul(&self, o: &Self) -> Self {
        BigFloat::mul(self, o)
    }
    fn div_u64(&self, k: u64) -> Self {
        BigFloat::div_u64(self, k)
    }
    fn log2_abs(&self) -> f64 {
        BigFloat::log2_abs(self)
    }
}

/// `R(0..=kmax)` for ratios `w`; also reports the worst partial-sum amplification (log2).
fn recursion<N: ClNum>(w: &[N], one: N, kmax: usize) -> (Vec<N>, f64) {
    let mut t: Vec<N> = Vec::with_capacity(kmax + 1);
    t.push(one.clone());
    let mut pow: Vec<N> = w.to_vec();
    for i in 1..=kmax {
        if i > 1 {
            for (pj, wj) in pow.iter_mut().zip(w) {
                *pj = pj.mul(wj);
            }
        }
        let mut s = pow[0].clone();
        for pj in &pow[1..] {
            s = s.add(pj);
        }
        t.push(s);
    }
    let mut r = vec![one];
    let mut worst = f64::NEG_INFINITY;
    for k in 1..=kmax {
        let mut acc = t[1].mul(&r[k - 1]);
        let mut peak = acc.log2_abs();
        for i in 2..=k {
            let term = t[i].mul(&r[k - i]);
            acc = if i % 2 == 1 { acc.add(&term) } else { acc.sub(&term) };
            peak = peak.max(acc.log2_abs());
        }
        let rk = acc.div_u64(k as u64);
        worst = worst.max(peak - acc.log2_abs());
        r.push(rk);
    }
    (r, worst)
}

fn log_sum_exp(xs: impl Iterator<Item = f64>) -> f64 {
    let v: Vec<f64> = xs.collect();
    let m = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if m == f64::NEG_INFINITY {
        return m;
    }
    m + v.iter().map(|x| (x - m).exp()).sum::<f64>().ln()
}

/// Bits needed so that every entry `R(k) * scale` has absolute error below the target,
/// plus the largest natural-log magnitude met along the way (to rule out `f64` overflow).
/// `log_w` are natural logs of the ratios, `log_scale` the natural log of the final multiplier.
fn required_bits(log_w: &[f64], kmax: usize, log_scale: f64) -> (f64, f64) {
    if kmax == 0 {
        return (0.0, log_scale.abs());
    }
    let n = log_w.len() as f64;
    let log_t: Vec<f64> = (0..=kmax)
        .map(|i| if i == 0 { 0.0 } else { log_sum_exp(log_w.iter().map(|lw| i as f64 * lw)) })
        .collect();
    let mut log_h = vec![0.0f64];
    let mut worst = f64::NEG_INFINITY;
    let mut mag = log_scale.abs();
    for k in 1..=kmax {
        let lh = log_sum_exp((1..=k).map(|i| log_t[i] + log_h[k - i])) - (k as f64).ln();
        log_h.push(lh);
        mag = mag.max(lh.abs()).max(log_t[k].abs());
        let err = (16.0 * (k as f64 + n) * k as f64).ln() + lh + log_scale - TARGET_ABS_ERR.ln();
        worst = worst.max(err);
    }
    (worst / std::f64::consts::LN_2, mag)
}

/// Interior probabilities only (`0 < p < 1`).  Returns the pmf on `0..=n`.
pub(crate) fn cl_pmf_f64(p: &[f64]) -> ClOutput {
    let n = p.len();
    if n == 0 {
        return ClOutput { pmf: vec![1.0], loss_of_significance: false };
    }
    let mu: f64 = p.iter().sum();
    let split = (mu.floor() as usize).min(n - 1);
    let kl = split;
    let ku = n - split - 1;
    let ln_q: f64 = p.iter().map(|x| (1.0 - x).ln()).sum();
    let ln_p: f64 = p.iter().map(|x| x.ln()).sum();
    let lw: Vec<f64> = p.iter().map(|x| x.ln() - (1.0 - x).ln()).collect();
    let lw_inv: Vec<f64> = lw.iter().map(|x| -x).collect();
    let (bits_l, mag_l) = required_bits(&lw, kl, ln_q);
    let (bits_u, mag_u) = required_bits(&lw_inv, ku, ln_p);
    let bits = bits_l.max(bits_u);
    let fits_f64 = mag_l.max(mag_u) < 600.0;

    let mut pmf = vec![0.0; n + 1];
    let loss = if bits <= 52.0 && fits_f64 {
        let w: Vec<f64> = p.iter().map(|x| x / (1.0 - x)).collect();
        let winv: Vec<f64> = p.iter().map(|x| (1.0 - x) / x).collect();
        let (rl, al) = recursion(&w, 1.0, kl);
        let sq = ln_q.exp();
        for k in 0..=kl {
            pmf[k] = rl[k] * sq;
        }
        let (ru, au) = recursion(&winv, 1.0, ku);
        let sp = ln_p.exp();
        for kk in 0..=ku {
            pmf[n - kk] = ru[kk] * sp;
        }
        al.max(au)
    } else {
        let prec = bits.max(0.0).ceil() as u64 + 64;
        let one = BigFloat::from_f64(1.0, prec);
        let bp: Vec<BigFloat> = p.iter().map(|x| BigFloat::from_f64(*x, prec)).collect();
        let bq: Vec<BigFloat> = bp.iter().map(|x| one.sub(x)).collect();
        let w: Vec<BigFloat> = bp.iter().zip(&bq).map(|(a, b)| a.div(b)).collect();
        let (rl, al) = recursion(&w, one.clone(), kl);
        let prod_q = bq.iter().fold(one.clone(), |a, b| a.mul(b));
        for k in 0..=kl {
            pmf[k] = rl[k].mul(&prod_q).to_f64();
        }
        let winv: Vec<BigFloat> = bq.iter().zip(&bp).map(|(a, b)| a.div(b)).collect();
        let (ru, au) = recursion(&winv, one.clone(), ku);
        let prod_p = bp.iter().fold(one.clone(), |a, b| a.mul(b));
        for kk in 0..=ku {
            pmf[n - kk] = ru[kk].mul(&prod_p).to_f64();
        }
        al.max(au)
    };
    ClOutput {
        pmf: pmf.into_iter().map(|v| v.max(0.0)).collect(),
        loss_of_significance: loss > SIGNIFICANCE_RATIO.log2(),
    }
}

/// Exact recursion over any field (no cancellation issue for rationals).
pub(crate) fn cl_pmf_generic<S: Scalar>(p: &[S]) -> Vec<S> {
    let n = p.len();
    let w: Vec<S> = p.iter().map(|x| x.clone() / (S::one() - x.clone())).collect();
    let mut t = vec![S::one()];
    let mut pow = w.clone();
    for i in 1..=n {
        if i > 1 {
            for (pj, wj) in pow.iter_mut().zip(&w) {
                *pj = pj.clone() * wj.clone();
            }
        }
        t.push(pow.iter().cloned().fold(S::zero(), |a, b| a + b));
    }
    let mut r = vec![S::one()];
    for k in 1..=n {
        let mut acc = S::zero();
        for i in 1..=k {
            let term = t[i].clone() * r[k - i].clone();
            acc = if i % 2 == 1 { acc + term } else { acc - term };
        }
        r.push(acc / S::from_int(k as i64));
    }
    let q = p.iter().fold(S::one(), |a, x| a * (S::one() - x.clone()));
    r.into_iter().map(|v| v * q.clone()).collect()
}
