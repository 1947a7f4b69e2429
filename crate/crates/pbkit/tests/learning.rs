use pbkit::learning::{
    evaluate_learner, learn_pb, pb_tv, required_samples, sample, separation_check, Branch, SampleSet,
};
use pbkit::ProbParams;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_truth(rng: &mut ChaCha8Rng) -> ProbParams<f64> {
    let n = rng.random_range(5..=40);
    ProbParams::new((0..n).map(|_| rng.random_range(0.0..1.0)).collect()).unwrap()
}

#[test]
fn sampler_degenerate_params() {
    let s = sample(&ProbParams::new(vec![0.0; 7]).unwrap(), 50, 1).unwrap();
    assert!(s.draws.iter().all(|&d| d == 0));
    let s = sample(&ProbParams::new(vec![1.0; 7]).unwrap(), 50, 1).unwrap();
    assert!(s.draws.iter().all(|&d| d == 7));
    assert!(sample(&ProbParams::new(vec![0.5]).unwrap(), 0, 1).is_err());
}

#[test]
fn sampler_multinomial_bands() {
    let m = 1_000_000usize;
    let s = sample(&ProbParams::binomial(2, 0.5).unwrap(), m, 2024).unwrap();
    let h = s.empirical_pmf();
    for (k, p) in [0.25, 0.5, 0.25].iter().enumerate() {
        let band = 3.0 * (p * (1.0 - p) / m as f64).sqrt();
        assert!((h[k] - p).abs() <= band, "k = {k}: {} vs {p}", h[k]);
    }
}

#[test]
fn sampler_is_reproducible() {
    let p = ProbParams::new(vec![0.1, 0.7, 0.4, 0.9]).unwrap();
    assert_eq!(sample(&p, 500, 9).unwrap(), sample(&p, 500, 9).unwrap());
    assert_ne!(sample(&p, 500, 9).unwrap().draws, sample(&p, 500, 10).unwrap().draws);
}

#[test]
fn csv_roundtrip() {
    let s = SampleSet::new(vec![0, 3, 2, 2], 3, 5).unwrap();
    assert_eq!(SampleSet::from_csv(&s.to_csv(), 3, 5).unwrap(), s);
    assert!(SampleSet::from_csv("1\n4\n", 3, 0).is_err());
    assert!(SampleSet::from_csv("1\nx\n", 3, 0).is_err());
}

#[test]
fn empty_sample_is_rejected() {
    let s = SampleSet::new(vec![], 4, 0).unwrap();
    assert!(learn_pb(&s, 0.1, 0.1).is_err());
}

#[test]
fn constant_samples_give_point_mass() {
    let s = SampleSet::new(vec![0; 200], 12, 0).unwrap();
    let model = learn_pb(&s, 0.1, 0.1).unwrap();
    assert!(model.params.probs().iter().all(|&p| p < 1e-9));
    let truth = ProbParams::new(vec![0.0; 12]).unwrap();
    assert!(pb_tv(&model.params, &truth).unwrap() < 1e-9);

    let s = SampleSet::new(vec![5; 200], 12, 0).unwrap();
    let model = learn_pb(&s, 0.1, 0.1).unwrap();
    assert!((model.params.mean() - 5.0).abs() < 1e-9);
}

#[test]
fn required_sample_size() {
    assert_eq!(required_samples(0.1, 0.1).unwrap(), 23026);
    assert!(required_samples(0.0, 0.1).is_err());
}

#[test]
fn both_branches_are_used() {
    let small = sample(&ProbParams::binomial(20, 0.5).unwrap(), 5000, 3).unwrap();
    assert_eq!(learn_pb(&small, 0.1, 0.1).unwrap().branch, Branch::Sparse);
    let big = sample(&ProbParams::binomial(200, 0.5).unwrap(), 5000, 3).unwrap();
    let model = learn_pb(&big, 0.1, 0.1).unwrap();
    assert_eq!(model.branch, Branch::Heavy);
    assert!(pb_tv(&model.params, &ProbParams::binomial(200, 0.5).unwrap()).unwrap() < 0.1);
}

#[test]
fn bin20_meets_target() {
    let truth = ProbParams::binomial(20, 0.5).unwrap();
    let r = evaluate_learner(&truth, 0.1, 0.1, 100, 11, None).unwrap();
    assert_eq!(r.sample_size, 23026);
    assert!(r.success_rate >= 0.9, "{r:?}");
    assert!(r.passed);
}

#[test]
fn point_mass_truths_always_succeed() {
    for probs in [vec![0.0; 6], vec![1.0; 6], vec![1.0, 1.0, 0.0, 0.0]] {
        let r = evaluate_learner(&ProbParams::new(probs).unwrap(), 0.1, 0.1, 10, 1, None).unwrap();
        assert_eq!(r.success_rate, 1.0);
    }
}

#[test]
fn heavy_truth_meets_target() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let truth = ProbParams::new((0..150).map(|_| rng.random_range(0.05..0.95)).collect()).unwrap();
    let r = evaluate_learner(&truth, 0.1, 0.1, 40, 5, None).unwrap();
    assert!(r.heavy_trials > 0);
    assert!(r.success_rate >= 0.85, "{r:?}");
}

#[test]
fn median_tv_decreases_with_m() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = random_truth(&mut rng);
    let medians: Vec<f64> = [100usize, 1000, 10_000, 100_000]
        .iter()
        .map(|&m| evaluate_learner(&truth, 0.1, 0.1, 20, 8, Some(m)).unwrap().median_tv)
        .collect();
    for w in medians.windows(2) {
        assert!(w[1] < w[0], "{medians:?}");
    }
}

#[test]
fn success_rate_nondecreasing_in_m() {
    let truth = ProbParams::binomial(20, 0.5).unwrap();
    let rates: Vec<f64> = [30usize, 300, 3000, 30_000]
        .iter()
        .map(|&m| {
            let seeds = [1u64, 2, 3];
            seeds.iter().map(|&s| evaluate_learner(&truth, 0.1, 0.1, 20, s, Some(m)).unwrap().success_rate).sum::<f64>()
                / seeds.len() as f64
        })
        .collect();
    for w in rates.windows(2) {
        assert!(w[1] >= w[0], "{rates:?}");
    }
}

#[test]
fn close_binomials_not_separated_with_few_samples() {
    let eps: f64 = 0.1;
    let m = (1.0 / (10.0 * eps * eps)).round() as usize;
    let few = separation_check(20, eps, 0.1, m, 200, 4).unwrap();
    assert_eq!(few.sample_size, 10);
    assert!(!few.separated, "{few:?}");
    let many = separation_check(20, eps, 0.1, required_samples(eps, 0.1).unwrap(), 40, 4).unwrap();
    assert!(many.separated, "{many:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn output_is_always_proper(probs in prop::collection::vec(0.0f64..=1.0, 1..25), m in 1usize..400, seed in any::<u64>()) {
        let truth = ProbParams::new(probs).unwrap();
        let s = sample(&truth, m, seed).unwrap();
        prop_assert!(s.draws.iter().all(|&d| d <= truth.n()));
        let model = learn_pb(&s, 0.1, 0.1).unwrap();
        prop_assert_eq!(model.params.n(), truth.n());
        prop_assert!(model.params.probs().iter().all(|p| (0.0..=1.0).contains(p)));
        let expected = if model.diagnostics.empirical_variance <= 10.0 { Branch::Sparse } else { Branch::Heavy };
        prop_assert_eq!(model.branch, expected);
    }
}
