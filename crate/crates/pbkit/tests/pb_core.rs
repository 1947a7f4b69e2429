use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use pbkit::pb::pb_cdf_fourier_all;
use pbkit::poly::{newton_check, RationalPoly};
use pbkit::scalar::{ratio, rint};
use pbkit::{
    darroch_mode, mean_var, pb_cdf, pb_cdf_fourier, pb_pmf, pb_pmf_exact, LatticeDist, ModeResult, PbError, PmfMethod,
    ProbParams,
};
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Independent subset-sum oracle.
fn subset_oracle(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut out = vec![0.0; n + 1];
    for mask in 0u64..(1u64 << n) {
        let w: f64 = (0..n).map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] }).product();
        out[mask.count_ones() as usize] += w;
    }
    out
}

fn binom(n: u64, k: u64) -> BigInt {
    (0..k).fold(BigInt::one(), |a, i| a * BigInt::from(n - i) / BigInt::from(i + 1))
}

fn probs(max_n: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.0f64..=1.0, 1..=max_n)
}

#[test]
fn spec_examples() {
    let p = ProbParams::new(vec![0.3, 0.5]).unwrap();
    for m in PmfMethod::ALL {
        let d = pb_pmf(&p, m).unwrap();
        for (a, b) in d.masses().iter().zip([0.35, 0.5, 0.15]) {
            assert!((a - b).abs() < 1e-12, "{m:?}");
        }
    }
    let d = pb_pmf(&p, PmfMethod::Convolution).unwrap();
    assert!((pb_cdf(&d, 0).unwrap() - 0.35).abs() < 1e-12);
    let b2 = pb_pmf(&ProbParams::binomial(2, 0.5).unwrap(), PmfMethod::Dft).unwrap();
    assert!((pb_cdf(&b2, 1).unwrap() - 0.75).abs() < 1e-12);
    assert!(matches!(pb_cdf(&b2, 3), Err(PbError::Domain(_))));
    let (mu, var) = mean_var(&p);
    assert!((mu - 0.8).abs() < 1e-12 && (var - 0.46).abs() < 1e-12);
    let pm = pb_pmf(&ProbParams::new(vec![0.1, 0.2, 0.9]).unwrap(), PmfMethod::BruteForce).unwrap();
    assert!((pm.masses()[0] - 0.072).abs() < 1e-12 && (pm.masses()[1] - 0.674).abs() < 1e-12);
    assert_eq!(darroch_mode(&ProbParams::new(vec![0.1, 0.2, 0.9]).unwrap()), ModeResult::Single(1));
}

#[test]
fn variance_is_largest_for_equal_probabilities() {
    let (_, a) = mean_var(&ProbParams::new(vec![0.5, 0.5]).unwrap());
    let (_, b) = mean_var(&ProbParams::new(vec![0.2, 0.8]).unwrap());
    assert!(a > b);
}

#[test]
fn n12_recursion_matches_subsets() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let p: Vec<f64> = (0..12).map(|_| rng.random_range(0.1..0.9)).collect();
    let oracle = subset_oracle(&p);
    let got = pb_pmf(&ProbParams::new(p).unwrap(), PmfMethod::RecursionCL).unwrap();
    for (a, b) in got.masses().iter().zip(&oracle) {
        assert!((a - b).abs() < 1e-10);
    }
}

#[test]
fn scalable_methods_agree_at_n500() {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    for _ in 0..5 {
        let p: Vec<f64> = (0..500).map(|_| rng.random_range(0.0..1.0)).collect();
        let params = ProbParams::new(p).unwrap();
        let base = pb_pmf(&params, PmfMethod::Convolution).unwrap();
        for m in [PmfMethod::RecursionCL, PmfMethod::RecursionGLR, PmfMethod::Dft] {
            let d = pb_pmf(&params, m).unwrap();
            let worst = d.masses().iter().zip(base.masses()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            assert!(worst < 1e-10, "{m:?}: {worst}");
        }
    }
}

#[test]
fn exact_binomial_matches_closed_form() {
    for n in [1u64, 5, 17, 40] {
        let d = pb_pmf_exact(&ProbParams::binomial(n as usize, ratio(1, 3)).unwrap(), PmfMethod::RecursionGLR).unwrap();
        for k in 0..=n {
            let expect = BigRational::new(binom(n, k) * BigInt::from(2).pow((n - k) as u32), BigInt::from(3).pow(n as u32));
            assert_eq!(d.masses()[k as usize], expect);
        }
        assert!(d.pmf.total().is_one());
    }
}

#[test]
fn floor_two_thirds_unbalanced_allocation() {
    for n in 1..=6u64 {
        let x = pb_pmf_exact(&ProbParams::binomial(3 * n as usize, ratio(1, 2)).unwrap(), PmfMethod::Convolution).unwrap();
        let y = x.pmf.floor_pushforward(2, 3).unwrap();
        let den = BigInt::one() << (3 * n);
        for k in 0..=n {
            let expect = BigRational::new(binom(3 * n + 1, 3 * k + 1), den.clone());
            assert_eq!(y.masses()[2 * k as usize], expect, "n = {n}, k = {k}");
        }
        for k in 0..n {
            let expect = BigRational::new(binom(3 * n, 3 * k + 2), den.clone());
            assert_eq!(y.masses()[2 * k as usize + 1], expect);
        }
    }
}

#[test]
fn scale_pushforward_examples() {
    let b9 = pb_pmf_exact(&ProbParams::binomial(9, ratio(1, 2)).unwrap(), PmfMethod::Convolution).unwrap().pmf;
    let s = b9.scale(&ratio(2, 3)).unwrap();
    assert_eq!(s.step(), &ratio(2, 3));
    assert_eq!(s.value(9), rint(6));
    assert_eq!(s.masses(), b9.masses());
    assert_eq!(b9.scale(&rint(1)).unwrap(), b9);
    assert!(b9.floor_pushforward(0, 1).is_err());
}

#[test]
fn float_json_roundtrip() {
    let p = ProbParams::new(vec![0.25, 0.125, 1.0]).unwrap();
    assert_eq!(ProbParams::from_json(&p.to_json()).unwrap(), p);
    let d = pb_pmf_exact(&p.to_exact(), PmfMethod::Convolution).unwrap().pmf;
    assert_eq!(LatticeDist::from_json_exact(&d.to_json()).unwrap(), d);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn five_methods_agree(p in probs(20)) {
        let params = ProbParams::new(p.clone()).unwrap();
        let oracle = subset_oracle(&p);
        for m in PmfMethod::ALL {
            let d = pb_pmf(&params, m).unwrap();
            prop_assert_eq!(d.masses().len(), p.len() + 1);
            for (a, b) in d.masses().iter().zip(&oracle) {
                prop_assert!((a - b).abs() < 1e-10, "{:?}: {} vs {}", m, a, b);
            }
        }
    }

    #[test]
    fn cdf_paths_agree_and_are_monotone(p in probs(40)) {
        let params = ProbParams::new(p).unwrap();
        let d = pb_pmf(&params, PmfMethod::Convolution).unwrap();
        let fourier = pb_cdf_fourier_all(&params);
        let mut prev = 0.0;
        for k in 0..=params.n() {
            let a = pb_cdf(&d, k).unwrap();
            prop_assert!((a - fourier[k]).abs() < 1e-10);
            prop_assert!((a - pb_cdf_fourier(&params, k).unwrap()).abs() < 1e-10);
            prop_assert!(a >= prev - 1e-15);
            prev = a;
        }
        prop_assert!((prev - 1.0).abs() < 1e-12);
    }

    #[test]
    fn variance_identity(p in probs(60)) {
        let params = ProbParams::new(p).unwrap();
        let (mu, var) = mean_var(&params);
        prop_assert!((mu - params.mean()).abs() < 1e-12);
        prop_assert!((var - params.variance()).abs() < 1e-12);
    }

    #[test]
    fn darroch_contains_argmax(p in probs(30)) {
        let params = ProbParams::new(p).unwrap();
        let d = pb_pmf(&params, PmfMethod::Convolution).unwrap();
        let m = d.masses();
        let best = m.iter().cloned().fold(f64::MIN, f64::max);
        let mode = darroch_mode(&params);
        // Every exact maximizer up to rounding is acceptable.
        let hit = (0..m.len()).any(|k| mode.contains(k) && m[k] >= best - 1e-12);
        prop_assert!(hit, "{:?} vs {:?}", mode, m);
    }

    #[test]
    fn exact_pmf_is_ultra_log_concave(num in prop::collection::vec(0i64..=12, 1..10)) {
        let params = ProbParams::new(num.iter().map(|&a| ratio(a, 12)).collect()).unwrap();
        let d = pb_pmf_exact(&params, PmfMethod::Convolution).unwrap();
        prop_assert!(d.pmf.total().is_one());
        prop_assert!(newton_check(&RationalPoly::from_coeffs(d.masses().to_vec())).holds);
    }

    #[test]
    fn floor_pushforward_preserves_mass(num in prop::collection::vec(0i64..=8, 1..12), j in 1u64..4, k in 1u64..6) {
        let params = ProbParams::new(num.iter().map(|&a| ratio(a, 8)).collect()).unwrap();
        let x = pb_pmf_exact(&params, PmfMethod::Convolution).unwrap().pmf;
        let y = x.floor_pushforward(j, k).unwrap();
        prop_assert!(y.total().is_one());
        for (i, m) in x.masses().iter().enumerate() {
            let target = (j as usize * i) / k as usize;
            prop_assert!(y.masses()[target] >= *m || m.is_zero());
        }
    }
}
