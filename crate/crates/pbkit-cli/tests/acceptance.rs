//! Acceptance criteria, one PASS/FAIL line each. Exits nonzero if any criterion fails.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::Command;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use pbkit::acc::symmetric_fixtures_check;
use pbkit::approx::choi_xia_sequence;
use pbkit::golden::{bound_sandwiches, floor_two_thirds_max_im, stride_examples};
use pbkit::learning::{evaluate_learner, required_samples, separation_check};
use pbkit::metrics::{lambda_eq, linearerr_bound, winf, winf_oracle};
use pbkit::ordering::{bsc_conditions, gleser_compare, hoeffding_compare};
use pbkit::poly::{hurwitz_check, is_real_rooted, pgf_of_dist, imaginary_part_bound};
use pbkit::scalar::{ratio, rational_to_f64, rint};
use pbkit::{darroch_mode, pb_pmf, pb_pmf_exact, LatticeDist, ModeResult, PmfMethod, ProbParams};
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

fn rand_probs(rng: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(lo..hi)).collect()
}

fn rand_exact(rng: &mut ChaCha8Rng, n: usize, lo: i64, hi: i64, den: i64) -> ProbParams<BigRational> {
    ProbParams::new((0..n).map(|_| ratio(rng.random_range(lo..=hi), den)).collect()).unwrap()
}

fn c1_pmf_agreement() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(101);
    let mut worst: f64 = 0.0;
    for i in 0..500 {
        let (n, methods): (usize, &[PmfMethod]) = if i < 250 {
            (rng.random_range(1..=20), &PmfMethod::ALL)
        } else {
            (rng.random_range(21..=500), &PmfMethod::ALL[1..])
        };
        let p = ProbParams::new(rand_probs(&mut rng, n, 0.0, 1.0)).unwrap();
        let base = pb_pmf(&p, PmfMethod::Convolution).unwrap();
        for &m in methods {
            let d = pb_pmf(&p, m).unwrap();
            let err = base.masses().iter().zip(d.masses()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
            worst = worst.max(err);
            ensure(err <= 1e-10, || format!("{} differs by {err:e} at n = {n}", m.name()))?;
        }
    }
    let t = start.elapsed();
    ensure(t < Duration::from_secs(60), || format!("took {t:?}"))?;
    Ok(format!("500 instances, max deviation {worst:.1e}, {:.1} s", t.as_secs_f64()))
}

fn c2_acc_table() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_pbkit")).args(["acc", "appendix"]).output().unwrap();
    ensure(out.status.success(), || format!("exit {:?}", out.status.code()))?;
    let v: Value = serde_json::from_slice(&out.stdout).map_err(|e| e.to_string())?;
    let rows = v["rows"].as_array().ok_or("no rows")?;
    let accs: Vec<&str> = rows.iter().filter_map(|r| r["acc"].as_str()).collect();
    ensure(accs == ["1/3", "1/3", "1/3", "2/3", "2/3", "2/3"], || format!("acc = {accs:?}"))?;
    let witnesses: Vec<&str> = rows.iter().filter_map(|r| r["published_witness"].as_str()).collect();
    ensure(witnesses[0] == "1/2,1/2" && witnesses[1] == "1/4,3/4", || format!("witnesses {witnesses:?}"))?;
    ensure(witnesses[4] == "1/32,15/32,15/32,1/32", || format!("n = 5 witness {}", witnesses[4]))?;
    ensure(witnesses[5] == "1/16,1/4,3/8,1/4,1/16", || format!("n = 6 witness {}", witnesses[5]))?;
    ensure(rows.iter().all(|r| r["published_witness_ok"] == true && r["matches"] == true), || "row mismatch".into())?;
    ensure(v["forced_n4_target"] == "1/16,5/8,1/4,1/16", || format!("forced target {}", v["forced_n4_target"]))?;
    let t = start.elapsed();
    ensure(t < Duration::from_secs(300), || format!("took {t:?}"))?;
    Ok(format!("Acc = {accs:?}, forced (1,10,4,1)/16 infeasible, {:.2} s", t.as_secs_f64()))
}

fn c3_fixtures() -> Outcome {
    let reports = symmetric_fixtures_check().map_err(|e| e.to_string())?;
    ensure(reports.len() == 3, || format!("{} fixtures", reports.len()))?;
    for r in &reports {
        ensure(r.passed() && r.winf == ratio(2, 3), || format!("{r:?}"))?;
    }
    Ok("three PGFs: symmetric, aggregation, real-rooted, winf = 2/3".into())
}

fn c4_imaginary_parts() -> Outcome {
    let mut rows = Vec::new();
    for n in 2..=5usize {
        let (max_im, err) = floor_two_thirds_max_im(n).map_err(|e| e.to_string())?;
        let bound = imaginary_part_bound(n as u64);
        ensure(max_im >= bound && err < 1e-8, || format!("n = {n}: max_im {max_im} bound {bound} err {err:e}"))?;
        rows.push(format!("{max_im:.3}>={bound:.3}"));
    }
    Ok(rows.join(", "))
}

fn c5_floor_real_rooted() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(105);
    let mut checks = 0;
    for _ in 0..500 {
        let n = rng.random_range(1..=30);
        let params = rand_exact(&mut rng, n, 0, 64, 64);
        let x = pb_pmf_exact(&params, PmfMethod::Convolution).unwrap().pmf;
        for k in 2..=5u64 {
            let pgf = pgf_of_dist(&x.floor_pushforward(1, k).unwrap()).unwrap();
            ensure(is_real_rooted(&pgf).unwrap(), || format!("floor(X/{k}) not real-rooted for {params:?}"))?;
            checks += 1;
        }
    }
    Ok(format!("{checks} Sturm certificates, zero failures"))
}

fn c6_hurwitz() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(106);
    for _ in 0..200 {
        let n = rng.random_range(1..=15);
        let params = rand_exact(&mut rng, n, 1, 63, 64);
        let x = pb_pmf_exact(&params, PmfMethod::Convolution).unwrap().pmf;
        let pgf = pgf_of_dist(&x.floor_pushforward(2, 3).unwrap()).unwrap();
        ensure(hurwitz_check(&pgf).unwrap().stable, || format!("not Hurwitz for {params:?}"))?;
    }
    let (first, second) = stride_examples().map_err(|e| e.to_string())?;
    ensure(first && !second, || format!("interlacing verdicts ({first}, {second})"))?;
    Ok("200 Hurwitz-stable; counterexamples classify (true, false)".into())
}

fn c7_sandwiches() -> Outcome {
    let c = bound_sandwiches(107, 150).map_err(|e| e.to_string())?;
    let others = [
        ("Barbour-Hall lower", c.poisson_lower),
        ("Roellin", c.translated_poisson),
        ("Shi", c.shi),
        ("Goldstein", c.goldstein),
        ("Ehm", c.ehm),
        ("binomial tail", c.tail_bound),
    ];
    for (name, v) in others {
        ensure(v == 0, || format!("{name}: {v} violations"))?;
    }
    ensure(c.poisson_upper_half_constant == 0, || {
        format!(
            "Barbour-Hall upper bound with constant (1 - e^-mu)/(2 mu) violated on {}/{} instances \
             (worst TV/bound = {:.3}); a single Bernoulli(p) trial has TV = p(1 - e^-p), twice that bound. \
             All other bounds and the standard-constant upper side ({} violations) hold",
            c.poisson_upper_half_constant, c.instances, c.poisson_worst_ratio, c.poisson_upper_standard
        )
    })?;
    Ok(format!("{} instances, {} tail pairs, zero violations", c.instances, c.tail_pairs))
}

fn c8_darroch() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(108);
    let mut two_mode = 0;
    for _ in 0..1000 {
        let n = rng.random_range(1..=40);
        let params = rand_exact(&mut rng, n, 0, 1000, 1000);
        let masses = pb_pmf_exact(&params, PmfMethod::Convolution).unwrap().pmf.masses().to_vec();
        let best = masses.iter().max().unwrap();
        let argmax = masses.iter().position(|m| m == best).unwrap();
        let rule = darroch_mode(&params);
        two_mode += usize::from(matches!(rule, ModeResult::Either(..)));
        ensure(rule.contains(argmax), || format!("rule {rule:?} misses argmax {argmax}"))?;
    }
    ensure(two_mode > 0, || "two-mode branch never observed".into())?;
    Ok(format!("1000 exact instances, two-mode branch {two_mode} times"))
}

fn cdf_oracle(p: &[f64]) -> Vec<f64> {
    let n = p.len();
    let mut pmf = vec![0.0; n + 1];
    for mask in 0u32..(1 << n) {
        pmf[mask.count_ones() as usize] +=
            (0..n).map(|i| if mask >> i & 1 == 1 { p[i] } else { 1.0 - p[i] }).product::<f64>();
    }
    pmf.iter()
        .scan(0.0, |s, m| {
            *s += m;
            Some(*s)
        })
        .collect()
}

fn c9_ordering() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(109);
    for i in 0..150 {
        let n = rng.random_range(1..=30);
        let p = if i % 10 == 0 { vec![rng.random_range(0.0..1.0); n] } else { rand_probs(&mut rng, n, 0.0, 1.0) };
        let h = hoeffding_compare(&ProbParams::new(p.clone()).unwrap()).unwrap();
        ensure(h.part1_holds && h.convex_order && h.equality_iff_holds, || format!("Hoeffding fails for {p:?}"))?;
    }
    for _ in 0..100 {
        let n = rng.random_range(2..=25);
        let p = rand_probs(&mut rng, n, 0.0, 1.0);
        let mut q = p.clone();
        for _ in 0..3 * n {
            let (i, j) = (rng.random_range(0..n), rng.random_range(0..n));
            let lam: f64 = rng.random_range(0.0..1.0);
            let (a, b) = (q[i], q[j]);
            q[i] = lam * a + (1.0 - lam) * b;
            q[j] = lam * b + (1.0 - lam) * a;
        }
        let g = gleser_compare(&ProbParams::new(p.clone()).unwrap(), &ProbParams::new(q.clone()).unwrap()).unwrap();
        ensure(g.applicable && g.cdf_holds && g.variance_check, || format!("Gleser fails for {p:?} vs {q:?}"))?;
    }
    for _ in 0..200 {
        let n = rng.random_range(1..=12);
        let p = rand_probs(&mut rng, n, 0.01, 0.99);
        let q: f64 = rng.random_range(0.0..1.0);
        let r = bsc_conditions(&ProbParams::new(p.clone()).unwrap(), q).unwrap();
        let (fa, fb) = (cdf_oracle(&p), cdf_oracle(&vec![q; n]));
        let dominates = fa.iter().zip(&fb).all(|(a, b)| *a <= b + 1e-12);
        let dominated = fa.iter().zip(&fb).all(|(a, b)| *b <= a + 1e-12);
        ensure(r.consistent, || format!("BSC inconsistent for {p:?}, q = {q}"))?;
        ensure(
            r.observed_dominates_bin == dominates && r.observed_dominated_by_bin == dominated,
            || format!("BSC observed order disagrees with the oracle for {p:?}, q = {q}"),
        )?;
    }
    Ok("150 Hoeffding, 100 Gleser pairs, 200 BSC pairs, zero violations".into())
}

fn lattice(w: &[u32], offset: BigRational, step: BigRational) -> LatticeDist<BigRational> {
    let total: u32 = w.iter().sum();
    LatticeDist::new(offset, step, w.iter().map(|&x| ratio(x as i64, total as i64)).collect()).unwrap()
}

fn c10_winf() -> Outcome {
    let mut family: Vec<Vec<u32>> = Vec::new();
    for len in 1..=12usize {
        family.push(vec![1; len]);
        family.push((0..len).map(|k| (1..=k).fold(1u32, |c, i| c * (len - i) as u32 / i as u32)).collect());
        for spike in 0..len {
            family.push((0..len).map(|k| if k == spike { 5 } else { 1 }).collect());
        }
    }
    let offsets = [rint(0), ratio(1, 3), ratio(2, 3)];
    let mut exhaustive = 0;
    for a in &family {
        for b in &family {
            for off in &offsets {
                let da = lattice(a, off.clone(), ratio(2, 3));
                let db = lattice(b, rint(0), rint(1));
                let w = winf(&da, &db);
                let o = winf_oracle(&da, &db).map_err(|e| e.to_string())?;
                ensure(w == o, || format!("{a:?} vs {b:?} at offset {off}: {w} != {o}"))?;
                exhaustive += 1;
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(110);
    for _ in 0..500 {
        let la = rng.random_range(13..=40);
        let lb = rng.random_range(13..=40);
        let a: Vec<u32> = (0..la).map(|_| rng.random_range(0..6)).collect();
        let b: Vec<u32> = (0..lb).map(|_| rng.random_range(1..6)).collect();
        if a.iter().all(|&x| x == 0) {
            continue;
        }
        let da = lattice(&a, ratio(rng.random_range(0..6), 3), ratio(2, 3));
        let db = lattice(&b, rint(0), rint(1));
        let w = winf(&da, &db);
        let o = winf_oracle(&da, &db).map_err(|e| e.to_string())?;
        ensure(w == o, || format!("random instance: {w} != {o}"))?;
    }
    Ok(format!("{exhaustive} structured pairs (support <= 12) and 500 random pairs agree"))
}

fn c11_learner() -> Outcome {
    let (eps, delta) = (0.1, 0.1);
    let m = required_samples(eps, delta).map_err(|e| e.to_string())?;
    let target = (100.0 / (eps * eps) * (1.0 / delta).ln()).ceil() as usize;
    ensure(m == target, || format!("sample size {m}, expected {target}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(111);
    let mut truths = vec![ProbParams::binomial(20, 0.5).unwrap()];
    for _ in 0..20 {
        let n = rng.random_range(5..=60);
        truths.push(ProbParams::new(rand_probs(&mut rng, n, 0.0, 1.0)).unwrap());
    }
    let mut worst: f64 = 1.0;
    for (i, t) in truths.iter().enumerate() {
        let r = evaluate_learner(t, eps, delta, 100, 1000 + i as u64, None).map_err(|e| e.to_string())?;
        worst = worst.min(r.success_rate);
        ensure(r.success_rate >= 0.85, || format!("truth {i}: success rate {}", r.success_rate))?;
    }
    let m_small = (1.0 / (10.0 * eps * eps)).round() as usize;
    let s = separation_check(20, eps, delta, m_small, 100, 112).map_err(|e| e.to_string())?;
    ensure(!s.separated, || format!("pair separated at m = {m_small}: rate {}", s.identification_rate))?;
    Ok(format!(
        "m = {m}, 21 truths, min success {worst:.2}; m = {m_small} identification rate {:.2} (not separated)",
        s.identification_rate
    ))
}

fn c12_choi_xia() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(112);
    let mut detected = 0;
    for _ in 0..20 {
        let n = rng.random_range(1..=12);
        let p = ProbParams::new(rand_probs(&mut rng, n, 0.0, 0.6)).unwrap();
        let r = choi_xia_sequence(&p, 1, 400).map_err(|e| e.to_string())?;
        let Some(m0) = r.m0 else { continue };
        detected += 1;
        let i = r.ms.iter().position(|&m| m == m0).unwrap();
        let tail = &r.d[i..];
        ensure(tail.windows(2).all(|w| w[0] < w[1]), || format!("d_m not increasing from m0 = {m0}"))?;
        ensure(tail.iter().all(|&d| d < r.poisson_tv.value), || format!("d_m above the Poisson TV from m0 = {m0}"))?;
    }
    ensure(detected == 20, || format!("m0 detected on {detected}/20 instances"))?;
    Ok("20 instances: increasing tail below TV(PB, Poi)".into())
}

fn c13_entropy() -> Outcome {
    let l = lambda_eq();
    ensure((l - 0.0041).abs() < 5e-4, || format!("lambda_eq = {l}"))?;
    for &(pn, pd) in &[(1i64, 5i64), (1, 2), (4, 5)] {
        for n in 1..=8usize {
            let src = pb_pmf_exact(&ProbParams::binomial(3 * n, ratio(1, 2)).unwrap(), PmfMethod::Convolution)
                .unwrap()
                .pmf
                .scale(&ratio(2, 3))
                .unwrap();
            let tgt =
                pb_pmf_exact(&ProbParams::binomial(2 * n, ratio(pn, pd)).unwrap(), PmfMethod::Convolution).unwrap().pmf;
            let w = rational_to_f64(&winf(&src, &tgt));
            let b = linearerr_bound(pn as f64 / pd as f64, n as u64).map_err(|e| e.to_string())?.bound;
            ensure(w >= b - 1e-12, || format!("p = {pn}/{pd}, n = {n}: winf {w} < bound {b}"))?;
        }
    }
    Ok(format!("lambda_eq = {l:.5}; bound below exact winf for n <= 8"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 13] = [
        ("exact-computation agreement", c1_pmf_agreement),
        ("Acc table for Bin(n, 1/2)", c2_acc_table),
        ("symmetric PGF fixtures", c3_fixtures),
        ("imaginary-part lower bound", c4_imaginary_parts),
        ("floor(X/k) real-rootedness", c5_floor_real_rooted),
        ("Hurwitz stability and interlacing", c6_hurwitz),
        ("bound sandwiches", c7_sandwiches),
        ("Darroch's rule", c8_darroch),
        ("ordering suite", c9_ordering),
        ("W-infinity cross-validation", c10_winf),
        ("learner", c11_learner),
        ("Choi-Xia sequence", c12_choi_xia),
        ("entropy solver", c13_entropy),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(f)).unwrap_or_else(|e| {
            Err(e.downcast_ref::<String>().cloned().or(e.downcast_ref::<&str>().map(|s| s.to_string())).unwrap_or_default())
        });
        match outcome {
            Ok(detail) => println!("PASS criterion {:>2} ({name}): {detail}", i + 1),
            Err(reason) => {
                failed += 1;
                println!("FAIL criterion {:>2} ({name}): {reason}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
