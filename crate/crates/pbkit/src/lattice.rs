//! Finitely supported distributions on an affine lattice `offset + step * {0..m}`.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{PbError, Result};
use crate::scalar::{parse_rational, rational_to_f64, render_rational, Scalar, FLOAT_TOL};

/// Distribution on `offset + step * i`, `i = 0..masses.len()`.
#[derive(Clone, Debug, PartialEq)]
pub struct LatticeDist<S = f64> {
    offset: BigRational,
    step: BigRational,
    masses: Vec<S>,
}

#[derive(Serialize, Deserialize)]
struct LatticeJson {
    offset: String,
    step: String,
    masses: Vec<String>,
}

impl<S: Scalar> LatticeDist<S> {
    /// Validating constructor: positive step, nonnegative masses summing to one.
    pub fn new(offset: BigRational, step: BigRational, masses: Vec<S>) -> Result<Self> {
        if !step.gt_zero() {
            return Err(PbError::Domain("lattice step must be positive".into()));
        }
        if masses.is_empty() {
            return Err(PbError::Domain("empty mass vector".into()));
        }
        let mut total = S::zero();
        for m in &masses {
            if m.definitely_lt(&S::zero(), FLOAT_TOL) {
                return Err(PbError::Domain(format!("negative mass {m:?}")));
            }
            total = total + m.clone();
        }
        if !total.near(&S::one(), 1e-9) {
            return Err(PbError::Domain(format!("masses sum to {}, not 1", total.to_f64())));
        }
        Ok(Self { offset, step, masses })
    }

    /// Integer lattice `{0..m}`.
    pub fn on_integers(masses: Vec<S>) -> Result<Self> {
        Self::new(BigRational::zero(), BigRational::one(), masses)
    }

    pub(crate) fn from_parts_unchecked(offset: BigRational, step: BigRational, masses: Vec<S>) -> Self {
        Self { offset, step, masses }
    }

    /// Unit mass at `value`.
    pub fn point(value: BigRational) -> Self {
        Self { offset: value, step: BigRational::one(), masses: vec![S::one()] }
    }

    pub fn offset(&self) -> &BigRational {
        &self.offset
    }
    pub fn step(&self) -> &BigRational {
        &self.step
    }
    pub fn masses(&self) -> &[S] {
        &self.masses
    }
    pub fn len(&self) -> usize {
        self.masses.len()
    }
    pub fn is_empty(&self) -> bool {
        self.masses.is_empty()
    }

    /// Support point `offset + step * i`.
    pub fn value(&self, i: usize) -> BigRational {
        &self.offset + &self.step * BigRational::from_integer(i.into())
    }

    pub fn value_f64(&self, i: usize) -> f64 {
        rational_to_f64(&self.value(i))
    }

    pub fn is_integer_lattice(&self) -> bool {
        self.offset.is_zero() && self.step.is_one()
    }

    /// Support points with strictly positive mass, in ascending order.
    pub fn atoms(&self) -> Vec<(BigRational, S)> {
        self.masses
            .iter()
            .enumerate()
            .filter(|(_, m)| m.gt_zero())
            .map(|(i, m)| (self.value(i), m.clone()))
            .collect()
    }

    pub fn total(&self) -> S {
        self.masses.iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn mean(&self) -> f64 {
        (0..self.len()).map(|i| self.value_f64(i) * self.masses[i].to_f64()).sum()
    }

    pub fn variance(&self) -> f64 {
        let mu = self.mean();
        (0..self.len())
            .map(|i| (self.value_f64(i) - mu).powi(2) * self.masses[i].to_f64())
            .sum()
    }

    /// Law of `factor * X`: offset and step scale, masses unchanged.
    pub fn scale(&self, factor: &BigRational) -> Result<Self> {
        if !factor.gt_zero() {
            return Err(PbError::Domain("scale factor must be positive".into()));
        }
        Ok(Self {
            offset: &self.offset * factor,
            step: &self.step * factor,
            masses: self.masses.clone(),
        })
    }

    /// Law of `X + c`.
    pub fn shift(&self, c: &BigRational) -> Self {
        Self { offset: &self.offset + c, step: self.step.clone(), masses: self.masses.clone() }
    }

    /// Law of `floor(j X / k)` for `X` on the integer lattice.
    pub fn floor_pushforward(&self, j: u64, k: u64) -> Result<Self> {
        if j == 0 || k == 0 {
            return Err(PbError::Domain("floor pushforward needs positive j and k".into()));
        }
        if !self.is_integer_lattice() {
            return Err(PbError::Domain("floor pushforward needs an integer lattice from 0".into()));
        }
        let top = (j as usize * (self.len() - 1)) / k as usize;
        let mut out = vec![S::zero(); top + 1];
        for (x, m) in self.masses.iter().enumerate() {
            let y = (j as usize * x) / k as usize;
            out[y] = out[y].clone() + m.clone();
        }
        Ok(Self { offset: BigRational::zero(), step: BigRational::one(), masses: out })
    }

    /// Drop zero masses at both ends.
    pub fn trimmed(&self) -> Self {
        let first = self.masses.iter().position(|m| !m.is_zero()).unwrap_or(0);
        let last = self.masses.iter().rposition(|m| !m.is_zero()).unwrap_or(0);
        Self {
            offset: self.value(first),
            step: self.step.clone(),
            masses: self.masses[first..=last].to_vec(),
        }
    }

    /// Cumulative masses `F(value(i))`.
    pub fn cdf(&self) -> Vec<S> {
        let mut acc = S::zero();
        self.masses
            .iter()
            .map(|m| {
                acc = acc.clone() + m.clone();
                acc.clone()
            })
            .collect()
    }

    /// `P(X <= x)` for arbitrary rational `x`.
    pub fn cdf_at(&self, x: &BigRational) -> S {
        if x < &self.offset {
            return S::zero();
        }
        let idx = ((x - &self.offset) / &self.step).floor().to_integer();
        let idx = idx.to_usize().unwrap_or(usize::MAX).min(self.len() - 1);
        self.masses[..=idx].iter().cloned().fold(S::zero(), |a, b| a + b)
    }

    pub fn to_f64(&self) -> LatticeDist<f64> {
        LatticeDist {
            offset: self.offset.clone(),
            step: self.step.clone(),
            masses: self.masses.iter().map(|m| m.to_f64()).collect(),
        }
    }

    pub fn to_json_value(&self) -> serde_json::Value {
        serde_json::to_value(LatticeJson {
            offset: render_rational(&self.offset),
            step: render_rational(&self.step),
            masses: self.masses.iter().map(|m| m.render()).collect(),
        })
        .expect("lattice json")
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(&self.to_json_value()).expect("lattice json")
    }

    /// `value,mass` rows with a header.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("value,mass\n");
        for (i, m) in self.masses.iter().enumerate() {
            s.push_str(&format!("{},{}\n", render_rational(&self.value(i)), m.render()));
        }
        s
    }
}

impl LatticeDist<f64> {
    pub fn from_json(text: &str) -> Result<Self> {
        let raw: LatticeJson = serde_json::from_str(text).map_err(|e| PbError::Parse(e.to_string()))?;
        let masses = raw
            .masses
            .iter()
            .map(|m| parse_rational(m).map(|r| rational_to_f64(&r)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(parse_rational(&raw.offset)?, parse_rational(&raw.step)?, masses)
    }
}

impl LatticeDist<BigRational> {
    pub fn from_json_exact(text: &str) -> Result<Self> {
        let raw: LatticeJson = serde_json::from_str(text).map_err(|e| PbError::Parse(e.to_string()))?;
        let masses = raw.masses.iter().map(|m| parse_rational(m)).collect::<Result<Vec<_>>>()?;
        Self::new(parse_rational(&raw.offset)?, parse_rational(&raw.step)?, masses)
    }
}

/// Masses of two distributions aligned on the union of their support points.
pub fn align<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>) -> Vec<(BigRational, S, S)> {
    let mut map: BTreeMap<BigRational, (S, S)> = BTreeMap::new();
    for i in 0..a.len() {
        let e = map.entry(a.value(i)).or_insert((S::zero(), S::zero()));
        e.0 = e.0.clone() + a.masses[i].clone();
    }
    for i in 0..b.len() {
        let e = map.entry(b.value(i)).or_insert((S::zero(), S::zero()));
        e.1 = e.1.clone() + b.masses[i].clone();
    }
    map.into_iter().map(|(v, (x, y))| (v, x, y)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::{ratio, rint};

    fn bin_exact(n: u64) -> LatticeDist<BigRational> {
        let mut c = vec![rint(1)];
        for _ in 0..n {
            let mut next = vec![rint(0); c.len() + 1];
            for (i, v) in c.iter().enumerate() {
                next[i] = &next[i] + v * ratio(1, 2);
                next[i + 1] = &next[i + 1] + v * ratio(1, 2);
            }
            c = next;
        }
        LatticeDist::on_integers(c).unwrap()
    }

    #[test]
    fn floor_two_thirds_of_bin3() {
        let d = bin_exact(3).floor_pushforward(2, 3).unwrap();
        assert_eq!(d.masses(), &[ratio(1, 2), ratio(3, 8), ratio(1, 8)]);
    }

    #[test]
    fn floor_identity() {
        let d = bin_exact(5);
        assert_eq!(d.floor_pushforward(1, 1).unwrap(), d);
        assert!(d.floor_pushforward(0, 1).is_err());
    }

    #[test]
    fn scaling() {
        let d = bin_exact(2).scale(&ratio(2, 3)).unwrap();
        assert_eq!(d.value(1), ratio(2, 3));
        assert_eq!(d.value(2), ratio(4, 3));
        assert_eq!(d.masses(), &[ratio(1, 4), ratio(1, 2), ratio(1, 4)]);
        let e = bin_exact(9).scale(&ratio(2, 3)).unwrap();
        assert_eq!(e.value(9), rint(6));
        assert_eq!(e.step(), &ratio(2, 3));
        assert_eq!(bin_exact(4).scale(&rint(1)).unwrap(), bin_exact(4));
    }

    #[test]
    fn json_roundtrip() {
        let d = bin_exact(3).scale(&ratio(2, 3)).unwrap();
        let back = LatticeDist::from_json_exact(&d.to_json()).unwrap();
        assert_eq!(back, d);
        let f = LatticeDist::from_json(r#"{"offset":"0","step":"1","masses":["0.25","1/2","0.25"]}"#).unwrap();
        assert_eq!(f.masses(), &[0.25, 0.5, 0.25]);
        assert!(LatticeDist::from_json(r#"{"offset":"0","step":"1","masses":["0.25","0.25"]}"#).is_err());
    }

    #[test]
    fn csv_rows() {
        let d = bin_exact(1);
        assert_eq!(d.to_csv(), "value,mass\n0,1/2\n1,1/2\n");
    }

    #[test]
    fn cdf_at_points() {
        let d = bin_exact(2).scale(&ratio(2, 3)).unwrap();
        assert_eq!(d.cdf_at(&ratio(-1, 3)), rint(0));
        assert_eq!(d.cdf_at(&rint(1)), ratio(3, 4));
        assert_eq!(d.cdf_at(&rint(10)), rint(1));
    }
}
