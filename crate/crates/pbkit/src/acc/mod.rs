//! Strongly Rayleigh approximation accuracy of a scaled lattice variable.
//!
//! `Acc` is the smallest `W_inf` distance from the source to a distribution on `{0, ..., D}` whose
//! generating polynomial has only real roots. Candidate thresholds are the distinct distances between
//! source atoms and target integers; each is either certified infeasible, witnessed, or left undecided.

mod tables;
mod bnb;
mod local;
mod polytope;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde_json::{json, Value};

use crate::error::{PbError, Result};
use crate::lattice::LatticeDist;
use crate::metrics::{winf, Coupling};
use crate::pb::{pb_pmf_exact, PmfMethod, ProbParams};
use crate::poly::{is_real_rooted, newton_check, RationalPoly};
use crate::scalar::{parse_rational, render_rational};

pub use tables::{
    published_witnesses, binomial_source, forced_n4_poly, n4_region_pgf, reproduce_acc_table, symmetric_fixtures,
    symmetric_fixtures_check, valid_region, AccTableRow, BinIndexing, FixtureReport, ACC_TABLE,
};
pub use polytope::FeasiblePolytope;

/// How a witness was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum WitnessSource {
    Forced,
    PointMass,
    Vertex,
    BranchAndBound,
    ThetaSearch,
    PbSearch,
}

impl WitnessSource {
    pub fn name(self) -> &'static str {
        match self {
            WitnessSource::Forced => "forced",
            WitnessSource::PointMass => "point_mass",
            WitnessSource::Vertex => "vertex",
            WitnessSource::BranchAndBound => "branch_and_bound",
            WitnessSource::ThetaSearch => "theta_search",
            WitnessSource::PbSearch => "pb_search",
        }
    }

    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "forced" => WitnessSource::Forced,
            "point_mass" => WitnessSource::PointMass,
            "vertex" => WitnessSource::Vertex,
            "branch_and_bound" => WitnessSource::BranchAndBound,
            "theta_search" => WitnessSource::ThetaSearch,
            "pb_search" => WitnessSource::PbSearch,
            other => return Err(PbError::Parse(format!("unknown witness source {other}"))),
        })
    }
}

/// Proof that no real-rooted target exists at one threshold.
#[derive(Clone, Debug, PartialEq)]
pub enum Infeasibility {
    /// A source atom has no integer target within `t`.
    NoAdmissibleTarget { source_value: BigRational },
    /// Every atom has a single admissible target, and the resulting PGF has a non-real root.
    ForcedCouplingNonRealRooted(RationalPoly),
    /// Box subdivision of a free space of dimension at most 2 excluded every box.
    DiscriminantRegionEmpty { dimension: usize, boxes: usize },
    /// Box subdivision of a 3-dimensional free space, at `2^-resolution_bits` relative width, excluded every box.
    ExhaustiveGridEmpty { resolution_bits: u32, boxes: usize },
}

#[derive(Clone, Debug, PartialEq)]
pub enum ThresholdOutcome {
    Infeasible(Infeasibility),
    Feasible(WitnessSource),
    Undecided,
}

#[derive(Clone, Debug)]
pub struct ThresholdEntry {
    pub t: BigRational,
    pub free_dim: usize,
    pub outcome: ThresholdOutcome,
}

/// A real-rooted target and a coupling that reaches it within the threshold.
#[derive(Clone, Debug)]
pub struct Witness {
    pub pgf: RationalPoly,
    pub coupling: Coupling<BigRational>,
    pub found_by: WitnessSource,
}

/// Result of [`acc_search`].
#[derive(Clone, Debug)]
pub struct Certificate {
    pub source: LatticeDist<BigRational>,
    pub max_degree: usize,
    /// Exact value when every smaller threshold is certified infeasible.
    pub value: Option<BigRational>,
    /// Smallest threshold not certified infeasible.
    pub lower: BigRational,
    /// Threshold of the witness.
    pub upper: BigRational,
    pub witness: Witness,
    pub thresholds: Vec<ThresholdEntry>,
}

#[derive(Clone, Debug)]
pub struct SearchOptions {
    pub max_vertices: u128,
    pub bnb_resolution_bits: u32,
    pub bnb_max_boxes: usize,
    pub restarts: usize,
    pub max_evals: usize,
    pub seed: u64,
}

impl Default for SearchOptions {
    fn default() -> Self {
        Self { max_vertices: 1 << 14, bnb_resolution_bits: 10, bnb_max_boxes: 200_000, restarts: 6, max_evals: 3000, seed: 0x5eed_acc }
    }
}

/// Exact real-rootedness of the target and a coupling within `t`.
pub(crate) fn try_witness(poly: &FeasiblePolytope, q: &[BigRational], found_by: WitnessSource) -> Option<Witness> {
    if q.iter().any(|x| x.is_negative()) {
        return None;
    }
    let pgf = RationalPoly::new(q.to_vec()).ok()?;
    if !newton_check(&pgf).holds || !is_real_rooted(&pgf).ok()? {
        return None;
    }
    let coupling = poly.coupling_for(q)?;
    Some(Witness { pgf, coupling, found_by })
}

/// Decide a single threshold.
pub fn decide_threshold(poly: &FeasiblePolytope, opts: &SearchOptions) -> (ThresholdOutcome, Option<Witness>) {
    if let Some(v) = poly.empty_row() {
        return (ThresholdOutcome::Infeasible(Infeasibility::NoAdmissibleTarget { source_value: v }), None);
    }
    if poly.is_forced() {
        let q = poly.vertex_q(&vec![0; poly.atoms.len()]);
        return match try_witness(poly, &q, WitnessSource::Forced) {
            Some(w) => (ThresholdOutcome::Feasible(WitnessSource::Forced), Some(w)),
            None => {
                let p = RationalPoly::from_coeffs(q);
                (ThresholdOutcome::Infeasible(Infeasibility::ForcedCouplingNonRealRooted(p)), None)
            }
        };
    }
    for j in 0..=poly.max_target {
        if poly.ranges.iter().all(|r| matches!(r, Some((lo, hi)) if *lo <= j && j <= *hi)) {
            let mut q = vec![BigRational::zero(); poly.max_target + 1];
            q[j] = poly.atoms.iter().map(|a| a.2.clone()).sum();
            if let Some(w) = try_witness(poly, &q, WitnessSource::PointMass) {
                return (ThresholdOutcome::Feasible(WitnessSource::PointMass), Some(w));
            }
        }
    }
    if poly.vertex_count() <= opts.max_vertices {
        if let Some(w) = enumerate_vertices(poly) {
            return (ThresholdOutcome::Feasible(WitnessSource::Vertex), Some(w));
        }
    }
    if poly.free_dim() <= 3 {
        match bnb::branch_and_bound(poly, opts) {
            bnb::BnbOutcome::Witness(w) => return (ThresholdOutcome::Feasible(WitnessSource::BranchAndBound), Some(w)),
            bnb::BnbOutcome::Excluded(inf) => return (ThresholdOutcome::Infeasible(inf), None),
            bnb::BnbOutcome::Undecided => {}
        }
    }
    match local::local_search(poly, opts) {
        Some(w) => (ThresholdOutcome::Feasible(w.found_by), Some(w)),
        None => (ThresholdOutcome::Undecided, None),
    }
}

fn enumerate_vertices(poly: &FeasiblePolytope) -> Option<Witness> {
    let sizes: Vec<usize> = poly.ranges.iter().map(|r| r.map_or(1, |(lo, hi)| hi - lo + 1)).collect();
    let mut choice = vec![0usize; sizes.len()];
    loop {
        let q = poly.vertex_q(&choice);
        if let Some(w) = try_witness(poly, &q, WitnessSource::Vertex) {
            return Some(w);
        }
        let mut i = 0;
        loop {
            if i == choice.len() {
                return None;
            }
            choice[i] += 1;
            if choice[i] < sizes[i] {
                break;
            }
            choice[i] = 0;
            i += 1;
        }
    }
}

/// Distinct distances between positive source atoms and the integers `0..=max_degree`, ascending.
pub fn candidate_thresholds(source: &LatticeDist<BigRational>, max_degree: usize) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::new();
    for i in 0..source.len() {
        if !source.masses()[i].is_positive() {
            continue;
        }
        let x = source.value(i);
        for j in 0..=max_degree {
            out.push((&x - BigRational::from_integer(j.into())).abs());
        }
    }
    out.sort();
    out.dedup();
    out
}

/// Default target degree `ceil(scale * n)`.
pub fn default_max_degree(n: usize, scale: &BigRational) -> usize {
    let v = scale * BigRational::from_integer(n.into());
    v.numer().div_ceil(v.denom()).try_into().expect("degree fits usize")
}

/// Accuracy search for `scale * X`, `X ~ PB(source_params)`.
pub fn acc_search(
    source_params: &ProbParams<BigRational>,
    scale: &BigRational,
    max_degree: Option<usize>,
    opts: &SearchOptions,
) -> Result<Certificate> {
    if !scale.is_positive() {
        return Err(PbError::Domain("scale must be positive".into()));
    }
    let pmf = pb_pmf_exact(source_params, PmfMethod::Convolution)?;
    let source = pmf.pmf.scale(scale)?;
    let d = max_degree.unwrap_or_else(|| default_max_degree(source_params.n(), scale));
    acc_search_dist(&source, d, opts)
}

/// Accuracy search for an arbitrary nonnegative lattice source.
pub fn acc_search_dist(source: &LatticeDist<BigRational>, max_degree: usize, opts: &SearchOptions) -> Result<Certificate> {
    if source.value(0).is_negative() {
        return Err(PbError::Domain("source support must be nonnegative".into()));
    }
    let mut entries = Vec::new();
    let mut lower: Option<BigRational> = None;
    for t in candidate_thresholds(source, max_degree) {
        let poly = FeasiblePolytope::new(source, max_degree, &t);
        let free_dim = if poly.empty_row().is_some() { 0 } else { poly.free_dim() };
        let (outcome, witness) = decide_threshold(&poly, opts);
        let infeasible = matches!(outcome, ThresholdOutcome::Infeasible(_));
        entries.push(ThresholdEntry { t: t.clone(), free_dim, outcome });
        if !infeasible && lower.is_none() {
            lower = Some(t.clone());
        }
        if let Some(w) = witness {
            let lower = lower.expect("set when a witness appears");
            let value = (lower == t).then(|| t.clone());
            return Ok(Certificate {
                source: source.clone(),
                max_degree,
                value,
                lower,
                upper: t,
                witness: w,
                thresholds: entries,
            });
        }
    }
    Err(PbError::Degenerate(format!("no real-rooted target on 0..={max_degree} within any candidate threshold")))
}

fn infeasibility_json(inf: &Infeasibility) -> Value {
    match inf {
        Infeasibility::NoAdmissibleTarget { source_value } => {
            json!({"kind": "no_admissible_target", "source_value": render_rational(source_value)})
        }
        Infeasibility::ForcedCouplingNonRealRooted(p) => {
            json!({"kind": "forced_coupling_non_real_rooted", "poly": p.render()})
        }
        Infeasibility::DiscriminantRegionEmpty { dimension, boxes } => {
            json!({"kind": "discriminant_region_empty", "dimension": dimension, "boxes": boxes})
        }
        Infeasibility::ExhaustiveGridEmpty { resolution_bits, boxes } => {
            json!({"kind": "exhaustive_grid_empty", "resolution_bits": resolution_bits, "boxes": boxes})
        }
    }
}

fn str_field<'a>(v: &'a Value, key: &str) -> Result<&'a str> {
    v.get(key).and_then(Value::as_str).ok_or_else(|| PbError::Parse(format!("missing string field {key}")))
}

fn u64_field(v: &Value, key: &str) -> Result<u64> {
    v.get(key).and_then(Value::as_u64).ok_or_else(|| PbError::Parse(format!("missing integer field {key}")))
}

fn infeasibility_from_json(v: &Value) -> Result<Infeasibility> {
    Ok(match str_field(v, "kind")? {
        "no_admissible_target" => Infeasibility::NoAdmissibleTarget { source_value: parse_rational(str_field(v, "source_value")?)? },
        "forced_coupling_non_real_rooted" => {
            Infeasibility::ForcedCouplingNonRealRooted(RationalPoly::parse(str_field(v, "poly")?)?)
        }
        "discriminant_region_empty" => Infeasibility::DiscriminantRegionEmpty {
            dimension: u64_field(v, "dimension")? as usize,
            boxes: u64_field(v, "boxes")? as usize,
        },
        "exhaustive_grid_empty" => Infeasibility::ExhaustiveGridEmpty {
            resolution_bits: u64_field(v, "resolution_bits")? as u32,
            boxes: u64_field(v, "boxes")? as usize,
        },
        other => return Err(PbError::Parse(format!("unknown infeasibility kind {other}"))),
    })
}

impl Infeasibility {
    pub fn kind(&self) -> &'static str {
        match self {
            Infeasibility::NoAdmissibleTarget { .. } => "no_admissible_target",
            Infeasibility::ForcedCouplingNonRealRooted(_) => "forced_coupling_non_real_rooted",
            Infeasibility::DiscriminantRegionEmpty { .. } => "discriminant_region_empty",
            Infeasibility::ExhaustiveGridEmpty { .. } => "exhaustive_grid_empty",
        }
    }
}

impl Certificate {
    pub fn to_json_value(&self) -> Value {
        let thresholds: Vec<Value> = self
            .thresholds
            .iter()
            .map(|e| {
                let mut v = json!({"t": render_rational(&e.t), "free_dim": e.free_dim});
                match &e.outcome {
                    ThresholdOutcome::Infeasible(inf) => {
                        v["outcome"] = json!("infeasible");
                        v["proof"] = infeasibility_json(inf);
                    }
                    ThresholdOutcome::Feasible(src) => {
                        v["outcome"] = json!("feasible");
                        v["found_by"] = json!(src.name());
                    }
                    ThresholdOutcome::Undecided => v["outcome"] = json!("undecided"),
                }
                v
            })
            .collect();
        let c = &self.witness.coupling;
        let plan: Vec<Value> = c
            .plan
            .iter()
            .map(|(i, j, m)| json!([render_rational(&c.source.value(*i)), render_rational(&c.target.value(*j)), render_rational(m)]))
            .collect();
        json!({
            "source": self.source.to_json_value(),
            "max_degree": self.max_degree,
            "value": self.value.as_ref().map(render_rational),
            "lower": render_rational(&self.lower),
            "upper": render_rational(&self.upper),
            "witness": {
                "pgf": self.witness.pgf.render(),
                "found_by": self.witness.found_by.name(),
                "plan": plan,
            },
            "thresholds": thresholds,
        })
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.to_json_value()).expect("certificate json")
    }

    /// Parse and rebuild; the coupling is reconstructed from the plan and checked by [`Certificate::verify`].
    pub fn from_json(text: &str) -> Result<Self> {
        let v: Value = serde_json::from_str(text).map_err(|e| PbError::Parse(e.to_string()))?;
        let source = LatticeDist::from_json_exact(&v["source"].to_string())?;
        let max_degree = u64_field(&v, "max_degree")? as usize;
        let value = match v.get("value") {
            Some(Value::String(s)) => Some(parse_rational(s)?),
            _ => None,
        };
        let lower = parse_rational(str_field(&v, "lower")?)?;
        let upper = parse_rational(str_field(&v, "upper")?)?;
        let w = &v["witness"];
        let pgf = RationalPoly::parse(str_field(w, "pgf")?)?;
        let found_by = WitnessSource::parse(str_field(w, "found_by")?)?;
        let mut q = pgf.coeffs().to_vec();
        q.resize(max_degree + 1, BigRational::zero());
        let target = LatticeDist::on_integers(q)?;
        let mut plan = Vec::new();
        for item in w.get("plan").and_then(Value::as_array).ok_or_else(|| PbError::Parse("missing plan".into()))? {
            let arr = item.as_array().filter(|a| a.len() == 3).ok_or_else(|| PbError::Parse("bad plan entry".into()))?;
            let get = |k: usize| -> Result<BigRational> {
                parse_rational(arr[k].as_str().ok_or_else(|| PbError::Parse("bad plan entry".into()))?)
            };
            let (x, y, m) = (get(0)?, get(1)?, get(2)?);
            let i = (0..source.len()).find(|&i| source.value(i) == x).ok_or_else(|| PbError::Parse("plan source off lattice".into()))?;
            let j = (0..target.len()).find(|&j| target.value(j) == y).ok_or_else(|| PbError::Parse("plan target off lattice".into()))?;
            plan.push((i, j, m));
        }
        let coupling = Coupling { source: source.clone(), target, plan };
        let mut thresholds = Vec::new();
        for e in v.get("thresholds").and_then(Value::as_array).ok_or_else(|| PbError::Parse("missing thresholds".into()))? {
            let t = parse_rational(str_field(e, "t")?)?;
            let free_dim = u64_field(e, "free_dim")? as usize;
            let outcome = match str_field(e, "outcome")? {
                "infeasible" => ThresholdOutcome::Infeasible(infeasibility_from_json(&e["proof"])?),
                "feasible" => ThresholdOutcome::Feasible(WitnessSource::parse(str_field(e, "found_by")?)?),
                "undecided" => ThresholdOutcome::Undecided,
                other => return Err(PbError::Parse(format!("unknown outcome {other}"))),
            };
            thresholds.push(ThresholdEntry { t, free_dim, outcome });
        }
        Ok(Self { source, max_degree, value, lower, upper, witness: Witness { pgf, coupling, found_by }, thresholds })
    }

    /// Recheck the witness (Sturm, marginals, displacement, exact `W_inf`) and every infeasibility proof.
    pub fn verify(&self, opts: &SearchOptions) -> Result<bool> {
        let w = &self.witness;
        if !is_real_rooted(&w.pgf)? || !w.pgf.is_pgf() {
            return Ok(false);
        }
        let c = &w.coupling;
        if !c.marginals_ok(0.0) || c.source != self.source || c.max_displacement() > self.upper {
            return Ok(false);
        }
        if c.target.masses().iter().zip(w.pgf.coeffs()).any(|(a, b)| a != b) {
            return Ok(false);
        }
        if winf(&self.source, &c.target) > self.upper {
            return Ok(false);
        }
        let cands = candidate_thresholds(&self.source, self.max_degree);
        let below: Vec<&BigRational> = cands.iter().filter(|t| **t < self.lower).collect();
        for t in below {
            let Some(entry) = self.thresholds.iter().find(|e| &e.t == t) else { return Ok(false) };
            let ThresholdOutcome::Infeasible(inf) = &entry.outcome else { return Ok(false) };
            let poly = FeasiblePolytope::new(&self.source, self.max_degree, t);
            let ok = match inf {
                Infeasibility::NoAdmissibleTarget { source_value } => poly.empty_row().as_ref() == Some(source_value),
                Infeasibility::ForcedCouplingNonRealRooted(p) => {
                    poly.empty_row().is_none()
                        && poly.is_forced()
                        && &RationalPoly::from_coeffs(poly.vertex_q(&vec![0; poly.atoms.len()])) == p
                        && !is_real_rooted(p)?
                }
                Infeasibility::DiscriminantRegionEmpty { .. } | Infeasibility::ExhaustiveGridEmpty { .. } => {
                    poly.empty_row().is_none()
                        && matches!(bnb::branch_and_bound(&poly, opts), bnb::BnbOutcome::Excluded(ref x) if x == inf)
                }
            };
            if !ok {
                return Ok(false);
            }
        }
        if let Some(v) = &self.value {
            if v != &self.lower || v != &self.upper || winf(&self.source, &c.target) != *v {
                return Ok(false);
            }
        }
        Ok(true)
    }
}
