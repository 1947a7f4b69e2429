//! Heuristic witness search. Every candidate is snapped to dyadic rationals and verified exactly.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::polytope::FeasiblePolytope;
use super::{try_witness, SearchOptions, Witness, WitnessSource};
use crate::optim::NelderMead;
use crate::poly::numeric_roots_f64;
use crate::scalar::dyadic;

const SNAP_BITS: u32 = 40;

fn sigmoid(z: f64) -> f64 {
    1.0 / (1.0 + (-z).exp())
}

fn softmax(z: &[f64]) -> Vec<f64> {
    let m = z.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let e: Vec<f64> = z.iter().map(|x| (x - m).exp()).collect();
    let s: f64 = e.iter().sum();
    e.into_iter().map(|x| x / s).collect()
}

/// Largest relative violation of Newton's inequalities over the nonzero range (0 when all hold).
fn newton_violation(q: &[f64]) -> f64 {
    let scale = q.iter().cloned().fold(0.0, f64::max);
    let nz = |x: f64| x > 1e-15 * scale;
    let Some(lo) = q.iter().position(|&x| nz(x)) else { return 0.0 };
    let hi = q.iter().rposition(|&x| nz(x)).expect("nonzero");
    let n = (hi - lo) as f64;
    let mut worst: f64 = 0.0;
    for j in lo + 1..hi {
        let i = (j - lo) as f64;
        let rhs = q[j - 1] * q[j + 1] * (1.0 + 1.0 / i) * (1.0 + 1.0 / (n - i));
        let v = if nz(q[j]) { rhs / (q[j] * q[j]) - 1.0 } else { 1e3 };
        worst = worst.max(v);
    }
    worst
}

fn max_im(q: &[f64]) -> f64 {
    let roots = numeric_roots_f64(q);
    let scale = roots.iter().map(|z| z.norm()).fold(1.0, f64::max);
    roots.iter().map(|z| z.im.abs()).fold(0.0, f64::max) / scale
}

/// Row amounts from logits, exact after dyadic rounding of the weights.
fn exact_amounts(poly: &FeasiblePolytope, logits: &[Vec<f64>]) -> Option<Vec<Vec<BigRational>>> {
    let mut out = Vec::with_capacity(poly.atoms.len());
    for (i, z) in logits.iter().enumerate() {
        let m = &poly.atoms[i].2;
        if z.len() == 1 {
            out.push(vec![m.clone()]);
            continue;
        }
        let w = softmax(z);
        let mut ws: Vec<BigRational> = w[..w.len() - 1].iter().map(|&x| dyadic(x, SNAP_BITS)).collect();
        let rest = BigRational::one() - ws.iter().cloned().sum::<BigRational>();
        if rest.is_negative() {
            return None;
        }
        ws.push(rest);
        out.push(ws.into_iter().map(|x| x * m).collect());
    }
    Some(out)
}

fn split_logits(poly: &FeasiblePolytope, x: &[f64]) -> Vec<Vec<f64>> {
    let mut k = 0;
    poly.ranges
        .iter()
        .map(|r| {
            let (lo, hi) = r.expect("nonempty rows");
            if hi == lo {
                vec![0.0]
            } else {
                let v = x[k..k + hi - lo + 1].to_vec();
                k += hi - lo + 1;
                v
            }
        })
        .collect()
}

fn float_q(poly: &FeasiblePolytope, logits: &[Vec<f64>]) -> Vec<f64> {
    let masses: Vec<f64> = poly.masses();
    let amounts: Vec<Vec<f64>> = logits.iter().zip(&masses).map(|(z, m)| softmax(z).into_iter().map(|w| w * m).collect()).collect();
    poly.q_from_amounts(&amounts)
}

/// Coupling-space search: minimize the Newton violation, with the largest imaginary part as tiebreaker.
fn theta_search(poly: &FeasiblePolytope, opts: &SearchOptions, rng: &mut ChaCha8Rng) -> Option<Witness> {
    let dim: usize = poly.free_rows().iter().map(|r| r.2 + 1).sum();
    let nm = NelderMead { max_evals: opts.max_evals, step: 1.0, target: 1e-12, ..Default::default() };
    for restart in 0..opts.restarts {
        let x0: Vec<f64> = if restart == 0 { vec![0.0; dim] } else { (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect() };
        let obj = |x: &[f64]| {
            let q = float_q(poly, &split_logits(poly, x));
            newton_violation(&q) + 1e-3 * max_im(&q)
        };
        let best = nm.minimize(obj, &x0);
        if best.value < 1e-6 {
            let logits = split_logits(poly, &best.x);
            if let Some(amounts) = exact_amounts(poly, &logits) {
                let q = poly.q_from_amounts(&amounts);
                if let Some(w) = try_witness(poly, &q, WitnessSource::ThetaSearch) {
                    return Some(w);
                }
            }
        }
    }
    None
}

fn pb_pmf_f64(p: &[f64]) -> Vec<f64> {
    let mut out = vec![1.0];
    for &pi in p {
        let mut next = vec![0.0; out.len() + 1];
        for (k, &v) in out.iter().enumerate() {
            next[k] += v * (1.0 - pi);
            next[k + 1] += v * pi;
        }
        out = next;
    }
    out
}

fn pb_pmf_rational(p: &[BigRational]) -> Vec<BigRational> {
    let mut out = vec![BigRational::one()];
    for pi in p {
        let qi = BigRational::one() - pi;
        let mut next = vec![BigRational::zero(); out.len() + 1];
        for (k, v) in out.iter().enumerate() {
            next[k] += v * &qi;
            next[k + 1] += v * pi;
        }
        out = next;
    }
    out
}

fn expand(z: &[f64], degree: usize, symmetric: bool) -> Vec<f64> {
    if !symmetric {
        return z.iter().map(|&v| sigmoid(v)).collect();
    }
    let mut p = Vec::with_capacity(degree);
    for &v in z {
        let s = sigmoid(v);
        p.push(s);
        p.push(1.0 - s);
    }
    if degree % 2 == 1 {
        p.push(0.5);
    }
    p
}

/// Parameter-space search over `PB(p_1, ..., p_D)`: every candidate is real-rooted, so only the
/// transport deficit has to be driven to zero. `symmetric` pairs `p` with `1 - p`.
fn pb_search(poly: &FeasiblePolytope, opts: &SearchOptions, rng: &mut ChaCha8Rng, symmetric: bool) -> Option<Witness> {
    let degree = poly.max_target;
    let dim = if symmetric { degree / 2 } else { degree };
    if dim == 0 {
        return None;
    }
    let nm = NelderMead { max_evals: opts.max_evals, step: 1.0, target: 0.0, ..Default::default() };
    let deficit = |z: &[f64]| {
        let mut q = pb_pmf_f64(&expand(z, degree, symmetric));
        q.resize(degree + 1, 0.0);
        poly.deficit(&q)
    };
    for restart in 0..opts.restarts {
        let x0: Vec<f64> = (0..dim)
            .map(|i| if restart == 0 { 2.0 * (i as f64 + 0.5) / dim as f64 - 1.0 } else { rng.random_range(-4.0..4.0) })
            .collect();
        let best = nm.minimize(deficit, &x0);
        if best.value <= 1e-13 {
            let p: Vec<BigRational> = expand(&best.x, degree, symmetric).into_iter().map(|v| dyadic(v, 32)).collect();
            let mut q = pb_pmf_rational(&p);
            q.resize(degree + 1, BigRational::zero());
            if q.len() == degree + 1 {
                if let Some(w) = try_witness(poly, &q, WitnessSource::PbSearch) {
                    return Some(w);
                }
            }
        }
    }
    None
}

/// Symmetric parameter ansatz, then coupling-space search, then the full parameter search.
pub(crate) fn local_search(poly: &FeasiblePolytope, opts: &SearchOptions) -> Option<Witness> {
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ poly.free_dim() as u64);
    pb_search(poly, opts, &mut rng, true)
        .or_else(|| theta_search(poly, opts, &mut rng))
        .or_else(|| pb_search(poly, opts, &mut rng, false))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn newton_violation_signs() {
        assert_eq!(newton_violation(&[1.0, 2.0, 1.0]), 0.0);
        assert!(newton_violation(&[1.0, 10.0, 4.0, 1.0]) > 0.0);
        assert!(newton_violation(&[1.0, 0.0, 1.0]) > 1.0);
    }
}
