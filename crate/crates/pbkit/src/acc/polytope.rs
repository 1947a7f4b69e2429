//! Couplings with displacement at most `t` from a lattice source onto `{0, ..., D}`.

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::Zero;

use crate::lattice::LatticeDist;
use crate::metrics::Coupling;
use crate::scalar::{rational_to_f64, Scalar};

/// Admissible-target structure at threshold `t`.
///
/// Source atom `i` may send mass to the integers `lo_i..=hi_i`. Both ends are nondecreasing in `i`.
#[derive(Clone, Debug)]
pub struct FeasiblePolytope {
    pub source: LatticeDist<BigRational>,
    /// Lattice index, value and mass of every positive source atom, ascending.
    pub atoms: Vec<(usize, BigRational, BigRational)>,
    pub t: BigRational,
    pub max_target: usize,
    pub ranges: Vec<Option<(usize, usize)>>,
}

fn ceil_int(x: &BigRational) -> BigInt {
    x.numer().div_ceil(x.denom())
}

fn floor_int(x: &BigRational) -> BigInt {
    x.numer().div_floor(x.denom())
}

impl FeasiblePolytope {
    pub fn new(source: &LatticeDist<BigRational>, max_target: usize, t: &BigRational) -> Self {
        let atoms: Vec<(usize, BigRational, BigRational)> = (0..source.len())
            .filter(|&i| source.masses()[i].gt_zero())
            .map(|i| (i, source.value(i), source.masses()[i].clone()))
            .collect();
        let top = BigInt::from(max_target);
        let ranges = atoms
            .iter()
            .map(|(_, x, _)| {
                let lo = ceil_int(&(x - t)).max(BigInt::zero());
                let hi = floor_int(&(x + t)).min(top.clone());
                if lo > hi {
                    None
                } else {
                    Some((lo.try_into().expect("small"), hi.try_into().expect("small")))
                }
            })
            .collect();
        Self { source: source.clone(), atoms, t: t.clone(), max_target, ranges }
    }

    /// Value of the first source atom with no admissible target.
    pub fn empty_row(&self) -> Option<BigRational> {
        self.ranges.iter().zip(&self.atoms).find(|(r, _)| r.is_none()).map(|(_, a)| a.1.clone())
    }

    fn range(&self, i: usize) -> (usize, usize) {
        self.ranges[i].expect("nonempty rows only")
    }

    /// Every atom has exactly one admissible target.
    pub fn is_forced(&self) -> bool {
        self.ranges.iter().all(|r| matches!(r, Some((lo, hi)) if lo == hi))
    }

    /// Number of free coupling coordinates (each row contributes its target count minus one).
    pub fn free_dim(&self) -> usize {
        (0..self.atoms.len()).map(|i| self.range(i).1 - self.range(i).0).sum()
    }

    pub fn vertex_count(&self) -> u128 {
        (0..self.atoms.len()).fold(1u128, |acc, i| {
            let (lo, hi) = self.range(i);
            acc.saturating_mul((hi - lo + 1) as u128)
        })
    }

    /// Target masses when atom `i` goes entirely to `lo_i + choice[i]`.
    pub fn vertex_q(&self, choice: &[usize]) -> Vec<BigRational> {
        let mut q = vec![BigRational::zero(); self.max_target + 1];
        for (i, (_, _, m)) in self.atoms.iter().enumerate() {
            q[self.range(i).0 + choice[i]] += m;
        }
        q
    }

    /// Rows that carry free coordinates, with their lowest target and number of extra targets.
    pub fn free_rows(&self) -> Vec<(usize, usize, usize)> {
        (0..self.atoms.len())
            .filter_map(|i| {
                let (lo, hi) = self.range(i);
                (hi > lo).then_some((i, lo, hi - lo))
            })
            .collect()
    }

    /// Target masses for explicit per-row amounts: `amounts[i][k]` goes to `lo_i + k`.
    pub fn q_from_amounts<S: Scalar>(&self, amounts: &[Vec<S>]) -> Vec<S> {
        let mut q = vec![S::zero(); self.max_target + 1];
        for (i, row) in amounts.iter().enumerate() {
            let lo = self.range(i).0;
            for (k, a) in row.iter().enumerate() {
                q[lo + k] = q[lo + k].clone() + a.clone();
            }
        }
        q
    }

    pub fn masses<S: Scalar>(&self) -> Vec<S> {
        self.atoms.iter().map(|(_, _, m)| S::from_rational(m)).collect()
    }

    /// Greedy transport into `q` respecting the admissible ranges; returns the matched mass and the plan.
    ///
    /// Optimal because the ranges are intervals with nondecreasing ends.
    pub fn greedy_flow<S: Scalar>(&self, q: &[S]) -> (S, Vec<(usize, usize, S)>) {
        let mut cap: Vec<S> = q.to_vec();
        let mut matched = S::zero();
        let mut plan = Vec::new();
        let masses: Vec<S> = self.masses();
        let mut ptr = 0usize;
        for (i, m) in masses.into_iter().enumerate() {
            let Some((lo, hi)) = self.ranges[i] else { continue };
            let mut rem = m;
            let mut j = lo.max(ptr);
            while j <= hi && rem.gt_zero() {
                let d = if cap[j] < rem { cap[j].clone() } else { rem.clone() };
                if d.gt_zero() {
                    cap[j] = cap[j].clone() - d.clone();
                    rem = rem - d.clone();
                    matched = matched + d.clone();
                    plan.push((i, j, d));
                }
                if !cap[j].gt_zero() {
                    j += 1;
                }
            }
            ptr = j;
        }
        (matched, plan)
    }

    /// Exact coupling onto `q` when one exists within `t`.
    pub fn coupling_for(&self, q: &[BigRational]) -> Option<Coupling<BigRational>> {
        let (matched, plan) = self.greedy_flow(q);
        let total: BigRational = self.atoms.iter().map(|a| a.2.clone()).sum();
        if matched != total {
            return None;
        }
        let target = LatticeDist::on_integers(q.to_vec()).ok()?;
        let plan = plan.into_iter().map(|(i, j, m)| (self.atoms[i].0, j, m)).collect();
        Some(Coupling { source: self.source.clone(), target, plan })
    }

    /// Unmatched mass for a float target vector.
    pub fn deficit(&self, q: &[f64]) -> f64 {
        let (matched, _) = self.greedy_flow(q);
        let total: f64 = self.atoms.iter().map(|a| rational_to_f64(&a.2)).sum();
        (total - matched).max(0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scalar::ratio;

    #[test]
    fn float_flow_terminates_on_exact_fill() {
        let src = LatticeDist::on_integers(vec![ratio(1, 2), ratio(1, 2)]).unwrap();
        let poly = FeasiblePolytope::new(&src, 2, &ratio(1, 1));
        let (matched, plan) = poly.greedy_flow(&[0.25, 0.5, 0.25]);
        assert_eq!(matched, 1.0);
        assert_eq!(plan.len(), 4);
        assert_eq!(poly.deficit(&[0.0, 0.5, 0.0]), 0.5);
    }
}
