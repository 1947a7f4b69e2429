use num_rational::BigRational;
use pbkit::acc::{
    acc_search, acc_search_dist, binomial_source, forced_n4_poly, n4_region_pgf, reproduce_acc_table, valid_region,
    BinIndexing, Certificate, FeasiblePolytope, Infeasibility, SearchOptions, ThresholdOutcome, WitnessSource,
};
use pbkit::metrics::{coupling_feasible, winf};
use pbkit::poly::{is_real_rooted, pb_from_pgf, PgfRecovery, RationalPoly};
use pbkit::scalar::{ratio, rint};
use pbkit::{pb_pmf_exact, LatticeDist, PmfMethod, ProbParams};
use proptest::prelude::*;

fn q(n: i64, d: i64) -> BigRational {
    ratio(n, d)
}

#[test]
fn acc_table_values_and_witnesses() {
    let opts = SearchOptions::default();
    let rows = reproduce_acc_table(&opts).unwrap();
    let expected = [q(1, 3), q(1, 3), q(1, 3), q(2, 3), q(2, 3), q(2, 3)];
    for (row, e) in rows.iter().zip(&expected) {
        assert_eq!(row.acc.as_ref(), Some(e), "n = {}", row.n);
        assert!(row.published_witness_ok, "n = {}", row.n);
        assert!(row.matches, "n = {}", row.n);
    }
    let forced = forced_n4_poly(&rows[3]).expect("n = 4 forced proof");
    assert_eq!(forced, RationalPoly::from_coeffs(vec![q(1, 16), q(10, 16), q(4, 16), q(1, 16)]));
    // n = 1 is witnessed by Ber(1/2) through the forced coupling.
    assert_eq!(rows[0].certificate.witness.pgf, RationalPoly::from_coeffs(vec![q(1, 2), q(1, 2)]));
    assert_eq!(rows[1].certificate.witness.pgf, RationalPoly::from_coeffs(vec![q(1, 4), q(3, 4)]));
    assert_eq!(rows[2].certificate.witness.pgf, RationalPoly::from_coeffs(vec![q(1, 8), q(6, 8), q(1, 8)]));
}

#[test]
fn acc_table_n3_parameters() {
    let p = RationalPoly::from_coeffs(vec![q(1, 8), q(3, 4), q(1, 8)]);
    let PgfRecovery::Params { params, .. } = pb_from_pgf(&p, None).unwrap() else { panic!("not SR") };
    let mut got = params.probs().to_vec();
    got.sort_by(f64::total_cmp);
    let s8 = 8f64.sqrt();
    assert!((got[0] - 1.0 / (4.0 + s8)).abs() < 1e-12);
    assert!((got[1] - 1.0 / (4.0 - s8)).abs() < 1e-12);

    let w4 = RationalPoly::from_coeffs(vec![q(1, 16), q(10, 16), q(5, 16)]);
    let PgfRecovery::Params { params, .. } = pb_from_pgf(&w4, None).unwrap() else { panic!("not SR") };
    let mut got = params.probs().to_vec();
    got.sort_by(f64::total_cmp);
    let s = 2.0 / 5f64.sqrt();
    assert!((got[0] - 1.0 / (2.0 + s)).abs() < 1e-12);
    assert!((got[1] - 1.0 / (2.0 - s)).abs() < 1e-12);
}

#[test]
fn bin4_threshold_sequence() {
    let cert = acc_search(&binomial_source(4, BinIndexing::Trials).unwrap(), &q(2, 3), None, &SearchOptions::default()).unwrap();
    assert_eq!(cert.value, Some(q(2, 3)));
    let kinds: Vec<_> = cert.thresholds.iter().map(|e| (e.t.clone(), e.outcome.clone())).collect();
    assert!(matches!(kinds[0].1, ThresholdOutcome::Infeasible(Infeasibility::NoAdmissibleTarget { .. })));
    assert!(matches!(kinds[1].1, ThresholdOutcome::Infeasible(Infeasibility::ForcedCouplingNonRealRooted(_))));
    assert_eq!(kinds[1].0, q(1, 3));
    assert_eq!(cert.thresholds[2].free_dim, 3);
}

#[test]
fn bin8_reaches_two_thirds() {
    let opts = SearchOptions::default();
    let cert = acc_search(&binomial_source(3, BinIndexing::ThreeNMinusOne).unwrap(), &q(2, 3), None, &opts).unwrap();
    assert!(cert.upper <= q(2, 3));
    assert!(cert.verify(&opts).unwrap());
}

#[test]
fn certificate_json_roundtrip() {
    let opts = SearchOptions::default();
    let cert = acc_search(&binomial_source(5, BinIndexing::Trials).unwrap(), &q(2, 3), None, &opts).unwrap();
    let back = Certificate::from_json(&cert.to_json()).unwrap();
    assert_eq!(back.value, cert.value);
    assert_eq!(back.witness.pgf, cert.witness.pgf);
    assert!(back.verify(&opts).unwrap());
    assert_eq!(back.to_json(), cert.to_json());
}

#[test]
fn tampered_certificate_fails() {
    let opts = SearchOptions::default();
    let cert = acc_search(&binomial_source(4, BinIndexing::Trials).unwrap(), &q(2, 3), None, &opts).unwrap();
    let mut bad = cert.clone();
    bad.value = Some(q(1, 3));
    bad.lower = q(1, 3);
    bad.upper = q(1, 3);
    assert!(!bad.verify(&opts).unwrap());
    let mut bad = cert;
    bad.witness.pgf = RationalPoly::from_coeffs(vec![q(1, 16), q(10, 16), q(4, 16), q(1, 16)]);
    assert!(!bad.verify(&opts).unwrap());
}

#[test]
fn polytope_examples() {
    let src = pb_pmf_exact(&ProbParams::binomial(4, q(1, 2)).unwrap(), PmfMethod::Convolution).unwrap().pmf.scale(&q(2, 3)).unwrap();
    let p = FeasiblePolytope::new(&src, 3, &q(1, 3));
    assert!(p.is_forced());
    assert_eq!(p.vertex_q(&[0; 5]), vec![q(1, 16), q(10, 16), q(4, 16), q(1, 16)]);
    let big = FeasiblePolytope::new(&src, 3, &rint(3));
    assert_eq!(big.free_dim(), 5 * 3);
    let empty = FeasiblePolytope::new(&src, 3, &BigRational::from_integer(0.into()));
    assert_eq!(empty.empty_row(), Some(q(2, 3)));
}

#[test]
fn bin8_local_allocation_polytope() {
    // At t = 2/3 the points 3k/ (scaled 2k) are pinned, so a_{2k} + a_{2k+1} aggregation is one face.
    let src = pb_pmf_exact(&ProbParams::binomial(8, q(1, 2)).unwrap(), PmfMethod::Convolution).unwrap().pmf.scale(&q(2, 3)).unwrap();
    let p = FeasiblePolytope::new(&src, 6, &q(2, 3));
    assert_eq!(p.free_dim(), 6);
    let fixture = [3i64, 34, 91, 91, 34, 3, 0].iter().map(|&c| q(c, 256)).collect::<Vec<_>>();
    assert!(p.coupling_for(&fixture).is_some());
}

#[test]
fn region_boundary_has_repeated_root() {
    // (t1 + t2)^2 = 4 (5 - t1)(11 - t2) at t1 = 4, t2 = 2 / ... pick t1 = 1: (1 + t2)^2 = 16 (11 - t2).
    // t2 = -9 + sqrt(81 + 175) ... choose an exact rational boundary point instead: t1 = 4, t2 = 0: 16 vs 4*1*11 = 44 (outside).
    // (t1, t2) = (4, 5): 81 vs 4*1*6 = 24 (inside); (t1, t2) = (1, 3): 16 vs 4*4*8 = 128 (outside).
    assert!(valid_region(&[rint(4), rint(5)]).unwrap());
    assert!(!valid_region(&[rint(1), rint(3)]).unwrap());
    // Exact boundary: t1 = 4, (4 + t2)^2 = 4 (11 - t2)  =>  t2^2 + 12 t2 - 28 = 0  =>  t2 = 2.
    let b = [rint(4), rint(2)];
    assert!(valid_region(&b).unwrap());
    let pgf = n4_region_pgf(&b).unwrap();
    let d = pgf.derivative();
    assert!(pgf.gcd(&d).degree() >= 1, "boundary point must give a double root");
}

#[test]
fn point_mass_and_small_sources() {
    let opts = SearchOptions::default();
    let src = LatticeDist::new(q(0, 1), q(1, 1), vec![rint(1)]).unwrap();
    let cert = acc_search_dist(&src, 0, &opts).unwrap();
    assert_eq!(cert.value, Some(q(0, 1)));
    let half = LatticeDist::new(q(1, 2), q(1, 1), vec![rint(1)]).unwrap();
    let cert = acc_search_dist(&half, 1, &opts).unwrap();
    assert_eq!(cert.value, Some(q(1, 2)));
    assert!(matches!(cert.witness.found_by, WitnessSource::PointMass | WitnessSource::Vertex | WitnessSource::Forced));
}

fn small_source() -> impl Strategy<Value = Vec<u32>> {
    prop::collection::vec(1u32..20, 2..6)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn n4_region_matches_sturm(t1 in 0i64..=64, t2 in 0i64..=96, t3 in prop::option::of(0i64..=16)) {
        let mut theta = vec![q(t1, 16), q(t2, 16)];
        if let Some(t) = t3 { theta.push(q(t, 16)); }
        let pgf = n4_region_pgf(&theta).unwrap();
        prop_assert_eq!(valid_region(&theta).unwrap(), is_real_rooted(&pgf).unwrap());
    }

    #[test]
    fn certificates_verify_on_random_sources(w in small_source(), num in 1i64..4) {
        let total: u32 = w.iter().sum();
        let masses: Vec<BigRational> = w.iter().map(|&x| q(x as i64, total as i64)).collect();
        let src = LatticeDist::new(q(0, 1), q(num, 3), masses).unwrap();
        let d = ((w.len() as i64 - 1) * num).div_euclid(3) as usize + 1;
        let opts = SearchOptions { restarts: 2, max_evals: 600, ..SearchOptions::default() };
        let cert = acc_search_dist(&src, d, &opts).unwrap();
        prop_assert!(cert.verify(&opts).unwrap());
        let target = cert.witness.coupling.target.clone();
        prop_assert!(winf(&src, &target) <= cert.upper);
        prop_assert!(coupling_feasible(&src, &target, &cert.upper));
    }
}
