//! Numeric root diagnostics, PB recovery from a PGF, and the floor-pushforward harness.

use nalgebra::DMatrix;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::Serialize;

use super::checks::hurwitz_check;
use super::rpoly::RationalPoly;
use super::sturm::{is_real_rooted, real_roots};
use crate::error::{PbError, Result};
use crate::lattice::LatticeDist;
use crate::pb::ProbParams;

/// Roots of `p` from the companion matrix, each polished by a few Newton steps.
pub fn numeric_roots(p: &RationalPoly) -> Vec<Complex64> {
    numeric_roots_f64(&p.to_f64_coeffs())
}

fn eval_c(c: &[f64], z: Complex64) -> Complex64 {
    c.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, &a| acc * z + a)
}

/// Float version of [`numeric_roots`] on low-to-high coefficients (trailing zeros ignored).
pub fn numeric_roots_f64(coeffs: &[f64]) -> Vec<Complex64> {
    let end = coeffs.iter().rposition(|&x| x != 0.0).map_or(0, |i| i + 1);
    let c = &coeffs[..end];
    if c.len() <= 1 {
        return Vec::new();
    }
    let n = c.len() - 1;
    let lead = c[n];
    let mut m = DMatrix::<f64>::zeros(n, n);
    for i in 1..n {
        m[(i, i - 1)] = 1.0;
    }
    for i in 0..n {
        m[(i, n - 1)] = -c[i] / lead;
    }
    let eig = m.complex_eigenvalues();
    let dc: Vec<f64> = c.iter().enumerate().skip(1).map(|(i, a)| a * i as f64).collect();
    eig.iter()
        .map(|&z0| {
            let mut z = z0;
            for _ in 0..8 {
                let f = eval_c(c, z);
                let d = eval_c(&dc, z);
                if d.norm() == 0.0 {
                    break;
                }
                let step = f / d;
                let cand = z - step;
                if !cand.re.is_finite() || !cand.im.is_finite() || eval_c(c, cand).norm() > f.norm() {
                    break;
                }
                z = cand;
                if step.norm() <= 1e-16 * z.norm().max(1.0) {
                    break;
                }
            }
            z
        })
        .collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RootDiagnostics {
    pub real_roots: Vec<f64>,
    /// One representative (positive imaginary part) per conjugate pair.
    pub complex_pairs: Vec<(f64, f64)>,
    pub max_im: f64,
    /// Sturm-certified.
    pub all_real: bool,
    pub hurwitz: bool,
    /// Max relative coefficient error of `lead * prod (x - z_i)` against `p`.
    pub reconstruction_error: f64,
}

fn reconstruct(lead: f64, roots: &[Complex64]) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(lead, 0.0)];
    for &z in roots {
        let mut next = vec![Complex64::new(0.0, 0.0); out.len() + 1];
        for (i, &c) in out.iter().enumerate() {
            next[i + 1] += c;
            next[i] -= c * z;
        }
        out = next;
    }
    out
}

/// Certified real-rootedness plus numeric root locations.
pub fn root_diagnostics(p: &RationalPoly) -> Result<RootDiagnostics> {
    if p.degree() == 0 {
        return Err(PbError::Domain("root diagnostics need degree >= 1".into()));
    }
    let all_real = is_real_rooted(p)?;
    let hurwitz = hurwitz_check(p)?.stable;
    let (real, pairs, roots) = if all_real {
        let mut v = Vec::new();
        for r in real_roots(p) {
            v.extend(std::iter::repeat_n(r.value, r.multiplicity));
        }
        let zs: Vec<Complex64> = v.iter().map(|&x| Complex64::new(x, 0.0)).collect();
        (v, Vec::new(), zs)
    } else {
        let zs = numeric_roots(p);
        let scale = zs.iter().map(|z| z.norm()).fold(1.0f64, f64::max);
        let mut real = Vec::new();
        let mut pairs = Vec::new();
        for z in &zs {
            if z.im.abs() <= 1e-12 * scale {
                real.push(z.re);
            } else if z.im > 0.0 {
                pairs.push((z.re, z.im));
            }
        }
        real.sort_by(f64::total_cmp);
        pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
        (real, pairs, zs)
    };
    let max_im = pairs.iter().map(|&(_, im)| im).fold(0.0, f64::max);
    let c = p.to_f64_coeffs();
    let rec = reconstruct(c[c.len() - 1], &roots);
    let norm = c.iter().map(|x| x.abs()).fold(0.0, f64::max);
    let reconstruction_error = c.iter().zip(&rec).map(|(a, b)| (Complex64::new(*a, 0.0) - b).norm() / norm).fold(0.0, f64::max);
    Ok(RootDiagnostics { real_roots: real, complex_pairs: pairs, max_im, all_real, hurwitz, reconstruction_error })
}

/// Exact `prod (p_i x + 1 - p_i)`.
pub fn pgf_of(params: &ProbParams<BigRational>) -> RationalPoly {
    params.probs().iter().fold(RationalPoly::one(), |acc, p| {
        acc.mul(&RationalPoly::from_coeffs(vec![BigRational::one() - p, p.clone()]))
    })
}

/// PGF of a distribution supported on `0, 1, ..., m` (integer lattice starting at 0).
pub fn pgf_of_dist(dist: &LatticeDist<BigRational>) -> Result<RationalPoly> {
    if !dist.offset().is_zero() || !dist.step().is_one() {
        return Err(PbError::Domain("PGF needs support on 0, 1, 2, ...".into()));
    }
    RationalPoly::new(dist.masses().to_vec())
}

#[derive(Clone, Debug)]
pub enum PgfRecovery {
    Params {
        params: ProbParams<f64>,
        /// Zero-probability coordinates appended to reach the requested length.
        deficit: usize,
    },
    NotStronglyRayleigh(RootDiagnostics),
}

/// Invert `f(x) = prod (p_i x + 1 - p_i)`: root `r` maps to `p = 1/(1 - r)`.
///
/// `len`, when given, pads with zero probabilities up to that many coordinates.
pub fn pb_from_pgf(p: &RationalPoly, len: Option<usize>) -> Result<PgfRecovery> {
    if p.is_zero() || !p.has_nonneg_coeffs() {
        return Err(PbError::Domain("PGF needs nonnegative coefficients, not all zero".into()));
    }
    let f = p.normalized()?;
    let deg = f.degree();
    if let Some(n) = len {
        if n < deg {
            return Err(PbError::Domain(format!("requested length {n} below degree {deg}")));
        }
    }
    if deg == 0 {
        let n = len.unwrap_or(0);
        if n == 0 {
            return Err(PbError::Degenerate("constant PGF carries no coordinates".into()));
        }
        return Ok(PgfRecovery::Params { params: ProbParams::new(vec![0.0; n])?, deficit: n });
    }
    if !is_real_rooted(&f)? {
        return Ok(PgfRecovery::NotStronglyRayleigh(root_diagnostics(&f)?));
    }
    let mut probs = Vec::with_capacity(deg);
    for r in real_roots(&f) {
        let prob = (1.0 / (1.0 - r.value)).clamp(0.0, 1.0);
        probs.extend(std::iter::repeat_n(prob, r.multiplicity));
    }
    let deficit = len.map_or(0, |n| n - deg);
    probs.extend(std::iter::repeat_n(0.0, deficit));
    Ok(PgfRecovery::Params { params: ProbParams::new(probs)?, deficit })
}

/// `sqrt((9n^2 - 9n - 1)/2)` for the floor(2X/3) pushforward of `Bin(3n, 1/2)`; 0 when the radicand is negative.
pub fn imaginary_part_bound(n: u64) -> f64 {
    let n = n as f64;
    let r = (9.0 * n * n - 9.0 * n - 1.0) / 2.0;
    if r <= 0.0 {
        0.0
    } else {
        r.sqrt()
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct FactorAttempt {
    pub j: u64,
    pub k: u64,
    pub success: bool,
    /// Degrees of the factors found (only meaningful on success).
    pub factor_degrees: Vec<usize>,
}

fn positive_poly(c: &[f64]) -> bool {
    c.iter().all(|&x| x > -1e-12)
}

fn poly_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; a.len() + b.len() - 1];
    for (i, x) in a.iter().enumerate() {
        for (k, y) in b.iter().enumerate() {
            out[i + k] += x * y;
        }
    }
    out
}

/// Exploratory: try to split the PGF of `floor(jX/k)` into nonnegative factors of degree `<= j`.
///
/// Numeric and greedy. Linear factors come from negative real roots, quadratics from conjugate
/// pairs; a quadratic with a negative coefficient is merged with real roots while the degree stays `<= j`.
pub fn floor_factorization_attempt(params: &ProbParams<BigRational>, j: u64, k: u64) -> Result<FactorAttempt> {
    let x = LatticeDist::on_integers(crate::pb::pb_pmf_exact(params, crate::pb::PmfMethod::Convolution)?.masses().to_vec())?;
    let y = x.floor_pushforward(j, k)?;
    let f = pgf_of_dist(&y)?;
    let fail = FactorAttempt { j, k, success: false, factor_degrees: Vec::new() };
    if f.degree() == 0 {
        return Ok(FactorAttempt { success: true, ..fail });
    }
    let roots = numeric_roots(&f);
    let mut reals: Vec<f64> = roots.iter().filter(|z| z.im.abs() < 1e-9).map(|z| z.re).collect();
    let pairs: Vec<Complex64> = roots.iter().filter(|z| z.im >= 1e-9).copied().collect();
    if reals.iter().any(|&r| r > 1e-9) {
        return Ok(fail);
    }
    let mut degrees = Vec::new();
    for z in pairs {
        let mut factor = vec![z.norm_sqr(), -2.0 * z.re, 1.0];
        while !positive_poly(&factor) && (factor.len() as u64) <= j && !reals.is_empty() {
            let r = reals.pop().expect("nonempty");
            factor = poly_mul(&factor, &[-r, 1.0]);
        }
        if !positive_poly(&factor) || (factor.len() as u64 - 1) > j {
            return Ok(fail);
        }
        degrees.push(factor.len() - 1);
    }
    if j == 0 && !reals.is_empty() {
        return Ok(fail);
    }
    degrees.extend(std::iter::repeat_n(1, reals.len()));
    Ok(FactorAttempt { j, k, success: true, factor_degrees: degrees })
}
