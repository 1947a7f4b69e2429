//! Certified box subdivision over at most three free coupling coordinates.

use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::polytope::FeasiblePolytope;
use super::{try_witness, Infeasibility, SearchOptions, Witness, WitnessSource};

pub(crate) enum BnbOutcome {
    Witness(Witness),
    Excluded(Infeasibility),
    Undecided,
}

#[derive(Clone, Debug)]
struct Iv {
    lo: BigRational,
    hi: BigRational,
}

impl Iv {
    fn point(x: BigRational) -> Self {
        Self { lo: x.clone(), hi: x }
    }
    fn add(&self, o: &Iv) -> Iv {
        Iv { lo: &self.lo + &o.lo, hi: &self.hi + &o.hi }
    }
    fn sub(&self, o: &Iv) -> Iv {
        Iv { lo: &self.lo - &o.hi, hi: &self.hi - &o.lo }
    }
    fn mul(&self, o: &Iv) -> Iv {
        let c = [&self.lo * &o.lo, &self.lo * &o.hi, &self.hi * &o.lo, &self.hi * &o.hi];
        let lo = c.iter().min().expect("nonempty").clone();
        let hi = c.iter().max().expect("nonempty").clone();
        Iv { lo, hi }
    }
    fn scale(&self, k: i64) -> Iv {
        let k = BigRational::from_integer(k.into());
        if k.is_negative() {
            Iv { lo: &self.hi * &k, hi: &self.lo * &k }
        } else {
            Iv { lo: &self.lo * &k, hi: &self.hi * &k }
        }
    }
}

/// One free coordinate: amount of row `row` sent to target `target` (base target `base`).
struct Var {
    row: usize,
    base: usize,
    target: usize,
    cap: BigRational,
}

fn coefficient_intervals(poly: &FeasiblePolytope, vars: &[Var], bx: &[Iv]) -> Option<Vec<Iv>> {
    let d = poly.max_target;
    let mut q: Vec<Iv> = vec![Iv::point(BigRational::zero()); d + 1];
    for (i, r) in poly.ranges.iter().enumerate() {
        let (lo, _) = r.expect("nonempty rows");
        q[lo] = q[lo].add(&Iv::point(poly.atoms[i].2.clone()));
    }
    // Row sums of the lower corners must leave room in each row.
    let mut used: Vec<BigRational> = vec![BigRational::zero(); poly.atoms.len()];
    for (v, b) in vars.iter().zip(bx) {
        used[v.row] += &b.lo;
        q[v.target] = q[v.target].add(b);
        q[v.base] = q[v.base].sub(b);
    }
    for (i, u) in used.iter().enumerate() {
        if u > &poly.atoms[i].2 {
            return None;
        }
    }
    for c in q.iter_mut() {
        if c.lo.is_negative() {
            c.lo = BigRational::zero();
        }
    }
    Some(q)
}

/// Sound exclusion: no point of the box yields a real-rooted polynomial.
fn excluded(q: &[Iv]) -> bool {
    let Some(top) = q.iter().rposition(|c| c.hi.is_positive()) else { return true };
    let bottom = q.iter().position(|c| c.hi.is_positive()).expect("some positive");
    let one = BigRational::one();
    for j in bottom + 1..top {
        if q[j - 1].lo.is_positive() && q[j + 1].lo.is_positive() {
            let a = BigRational::from_integer((j - bottom).into());
            let b = BigRational::from_integer((top - j).into());
            let factor = (&one + &one / a) * (&one + &one / b);
            if &q[j].hi * &q[j].hi < &q[j - 1].lo * &q[j + 1].lo * factor {
                return true;
            }
        }
    }
    if top - bottom == 3 && q[bottom].lo.is_positive() && q[top].lo.is_positive() {
        let (d, c, b, a) = (&q[bottom], &q[bottom + 1], &q[bottom + 2], &q[top]);
        let t1 = a.mul(b).mul(c).mul(d).scale(18);
        let t2 = b.mul(b).mul(b).mul(d).scale(4);
        let t3 = b.mul(b).mul(c).mul(c);
        let t4 = a.mul(c).mul(c).mul(c).scale(4);
        let t5 = a.mul(a).mul(d).mul(d).scale(27);
        let disc = t1.sub(&t2).add(&t3).sub(&t4).sub(&t5);
        if disc.hi.is_negative() {
            return true;
        }
    }
    false
}

pub(crate) fn branch_and_bound(poly: &FeasiblePolytope, opts: &SearchOptions) -> BnbOutcome {
    let mut vars = Vec::new();
    for (row, base, extra) in poly.free_rows() {
        for k in 1..=extra {
            vars.push(Var { row, base, target: base + k, cap: poly.atoms[row].2.clone() });
        }
    }
    let dim = vars.len();
    if dim > 3 {
        return BnbOutcome::Undecided;
    }
    let two = BigRational::from_integer(2.into());
    let min_width: Vec<BigRational> = vars
        .iter()
        .map(|v| &v.cap / BigRational::from_integer(num_bigint::BigInt::one() << opts.bnb_resolution_bits as usize))
        .collect();
    let mut stack: Vec<Vec<Iv>> = vec![vars.iter().map(|v| Iv { lo: BigRational::zero(), hi: v.cap.clone() }).collect()];
    let mut boxes = 0usize;
    let mut stuck = false;
    while let Some(bx) = stack.pop() {
        boxes += 1;
        if boxes > opts.bnb_max_boxes {
            return BnbOutcome::Undecided;
        }
        let Some(q) = coefficient_intervals(poly, &vars, &bx) else { continue };
        if excluded(&q) {
            continue;
        }
        let mid: Vec<BigRational> = bx.iter().map(|b| (&b.lo + &b.hi) / &two).collect();
        let mut amounts: Vec<Vec<BigRational>> = poly
            .ranges
            .iter()
            .enumerate()
            .map(|(i, r)| {
                let (lo, hi) = r.expect("nonempty rows");
                let mut row = vec![BigRational::zero(); hi - lo + 1];
                row[0] = poly.atoms[i].2.clone();
                row
            })
            .collect();
        let mut inside = true;
        for (v, m) in vars.iter().zip(&mid) {
            let row = &mut amounts[v.row];
            row[v.target - v.base] = m.clone();
            row[0] -= m;
            if row[0].is_negative() {
                inside = false;
            }
        }
        if inside {
            let qp = poly.q_from_amounts(&amounts);
            if let Some(w) = try_witness(poly, &qp, WitnessSource::BranchAndBound) {
                return BnbOutcome::Witness(w);
            }
        }
        let widest = (0..dim)
            .max_by(|&a, &b| {
                let wa = (&bx[a].hi - &bx[a].lo) / &vars[a].cap;
                let wb = (&bx[b].hi - &bx[b].lo) / &vars[b].cap;
                wa.cmp(&wb)
            })
            .expect("dim >= 1");
        if &bx[widest].hi - &bx[widest].lo <= min_width[widest] {
            stuck = true;
            continue;
        }
        let m = mid[widest].clone();
        let mut left = bx.clone();
        left[widest].hi = m.clone();
        let mut right = bx;
        right[widest].lo = m;
        stack.push(right);
        stack.push(left);
    }
    if stuck {
        return BnbOutcome::Undecided;
    }
    if dim <= 2 {
        BnbOutcome::Excluded(Infeasibility::DiscriminantRegionEmpty { dimension: dim, boxes })
    } else {
        BnbOutcome::Excluded(Infeasibility::ExhaustiveGridEmpty { resolution_bits: opts.bnb_resolution_bits, boxes })
    }
}
