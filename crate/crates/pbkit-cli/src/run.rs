use num_rational::BigRational;
use pbkit::acc::{
    acc_search, forced_n4_poly, reproduce_acc_table, symmetric_fixtures_check, Certificate, SearchOptions,
};
use pbkit::approx::{
    binomial_tail_bound, choi_xia_sequence, ehm_binomial_report, normal_bound_report, poisson_approx_report,
    sensitivity_max_gamma, sensitivity_worst_tail, translated_poisson_report, SensitivityInstance,
};
use pbkit::golden::run_golden_suite;
use pbkit::lattice::align;
use pbkit::learning::{evaluate_learner, learn_pb, required_samples, sample, separation_check, SampleSet};
use pbkit::metrics::{
    coupling_feasible, kolmogorov_vs_normal, tv_distance, wasserstein_p, winf, winf_oracle, NormalRef,
    ORACLE_MAX_SUPPORT,
};
use pbkit::ordering::{
    as67_binomial_poisson, bsc_conditions, gleser_compare, hoeffding_compare, majorize, stochastic_dominance,
};
use pbkit::poly::{
    floor_factorization_attempt, hurwitz_check, interlacing_check, is_real_rooted, kurtz_check, newton_check,
    pb_from_pgf, pgf_of_dist, root_diagnostics, stride_decompose, toeplitz_pf_check, PgfRecovery, RationalPoly,
};
use pbkit::scalar::{parse_rational, render_rational, Scalar};
use pbkit::{darroch_mode, pb_cdf, pb_pmf, pb_pmf_exact, LatticeDist, PbError, PmfMethod, ProbParams, Result};
use serde_json::{json, Value};

use crate::args::*;
use crate::input::{parse_pairs, Ctx};

pub enum Body {
    Json(Value),
    Text(String),
}

pub struct Output {
    pub body: Body,
    /// A check ran to completion and reported failure.
    pub failed: bool,
}

fn ok(v: Value) -> Result<Output> {
    Ok(Output { body: Body::Json(v), failed: false })
}

fn to_value<T: serde::Serialize>(x: &T) -> Value {
    serde_json::to_value(x).expect("serializable report")
}

fn render_all<S: Scalar>(xs: &[S]) -> Value {
    if S::EXACT {
        json!(xs.iter().map(|x| x.render()).collect::<Vec<_>>())
    } else {
        json!(xs.iter().map(|x| x.to_f64()).collect::<Vec<_>>())
    }
}

fn render_one<S: Scalar>(x: &S) -> Value {
    if S::EXACT {
        json!(x.render())
    } else {
        json!(x.to_f64())
    }
}

pub fn execute(cmd: &Command, mode: Mode, ctx: &mut Ctx) -> Result<Output> {
    match cmd {
        Command::Pmf { probs, method, format } => pmf(ctx, mode, probs, method, *format),
        Command::Cdf { probs, k, method } => cdf(ctx, mode, probs, *k, method),
        Command::Mode { probs } => mode_cmd(ctx, mode, probs),
        Command::Approx { cmd } => approx(ctx, cmd),
        Command::Sensitivity { pairs, t, alpha, gamma } => {
            let pairs = parse_pairs(&ctx.read(pairs)?)?;
            match gamma {
                Some(g) => ok(to_value(&sensitivity_worst_tail(&SensitivityInstance::new(pairs, *g, *t, *alpha)?)?)),
                None => ok(to_value(&sensitivity_max_gamma(&pairs, *t, *alpha)?)),
            }
        }
        Command::Order { cmd } => order(ctx, mode, cmd),
        Command::Poly { cmd } => poly(ctx, cmd),
        Command::Dist { cmd } => match mode {
            Mode::Float => dist::<f64>(ctx, cmd, |c, s| c.dist_f64(s)),
            Mode::Rational => dist::<BigRational>(ctx, cmd, |c, s| c.dist(s)),
        },
        Command::Acc { cmd, search } => acc(ctx, cmd.as_ref(), search),
        Command::Learn { cmd, fit } => learn(ctx, cmd.as_ref(), fit),
        Command::GoldenSuite { seed, instances } => {
            let seed = ctx.seed(*seed);
            let report = run_golden_suite(seed, *instances, &SearchOptions::default())?;
            Ok(Output { failed: !report.passed, body: Body::Json(to_value(&report)) })
        }
        Command::Replay { .. } => unreachable!("replay is handled by the caller"),
    }
}

fn pmf(ctx: &mut Ctx, mode: Mode, probs: &str, method: &str, format: Format) -> Result<Output> {
    let params = ctx.params(probs)?;
    let method = PmfMethod::parse(method)?;
    let (dist_json, csv, lost) = match mode {
        Mode::Float => {
            let d = pb_pmf(&params.to_f64(), method)?;
            (render_all(d.masses()), d.pmf.to_csv(), d.loss_of_significance)
        }
        Mode::Rational => {
            let d = pb_pmf_exact(&params, method)?;
            (render_all(d.masses()), d.pmf.to_csv(), d.loss_of_significance)
        }
    };
    Ok(Output {
        body: match format {
            Format::Csv => Body::Text(csv),
            Format::Json => Body::Json(json!({
                "n": params.n(),
                "method": method.name(),
                "pmf": dist_json,
                "loss_of_significance": lost,
            })),
        },
        failed: false,
    })
}

fn cdf(ctx: &mut Ctx, mode: Mode, probs: &str, k: Option<usize>, method: &str) -> Result<Output> {
    let params = ctx.params(probs)?;
    let n = params.n();
    let ks: Vec<usize> = match k {
        Some(k) => vec![k],
        None => (0..=n).collect(),
    };
    let (name, values) = if method.eq_ignore_ascii_case("fourier") {
        let p = params.to_f64();
        let v = ks.iter().map(|&k| pbkit::pb_cdf_fourier(&p, k)).collect::<Result<Vec<_>>>()?;
        ("fourier", render_all(&v))
    } else {
        let m = PmfMethod::parse(method)?;
        match mode {
            Mode::Float => {
                let d = pb_pmf(&params.to_f64(), m)?;
                (m.name(), render_all(&ks.iter().map(|&k| pb_cdf(&d, k)).collect::<Result<Vec<_>>>()?))
            }
            Mode::Rational => {
                let d = pb_pmf_exact(&params, m)?;
                (m.name(), render_all(&ks.iter().map(|&k| pb_cdf(&d, k)).collect::<Result<Vec<_>>>()?))
            }
        }
    };
    let cdf = match k {
        Some(_) => values[0].clone(),
        None => values,
    };
    ok(json!({ "n": n, "k": k, "method": name, "cdf": cdf }))
}

fn argmax<S: Scalar>(m: &[S]) -> Vec<usize> {
    let best = m.iter().map(|x| x.to_rational()).max().unwrap_or_default();
    (0..m.len()).filter(|&i| m[i].to_rational() == best).collect()
}

fn mode_cmd(ctx: &mut Ctx, mode: Mode, probs: &str) -> Result<Output> {
    let params = ctx.params(probs)?;
    let (rule, top) = match mode {
        Mode::Float => {
            let p = params.to_f64();
            (darroch_mode(&p), argmax(pb_pmf(&p, PmfMethod::Convolution)?.masses()))
        }
        Mode::Rational => (darroch_mode(&params), argmax(pb_pmf_exact(&params, PmfMethod::Convolution)?.masses())),
    };
    let agrees = top.iter().any(|&k| rule.contains(k));
    ok(json!({
        "mean": render_one(&params.mean()),
        "rule": rule,
        "pmf_argmax": top,
        "rule_contains_argmax": agrees,
    }))
}

fn approx(ctx: &mut Ctx, cmd: &ApproxCmd) -> Result<Output> {
    match cmd {
        ApproxCmd::Report { probs, family } => {
            let p = ctx.params(probs)?.to_f64();
            let report = match family {
                Family::Poisson => to_value(&poisson_approx_report(&p)?),
                Family::Tp => to_value(&translated_poisson_report(&p)?),
                Family::Normal => to_value(&normal_bound_report(&p)?),
                Family::Binomial => to_value(&ehm_binomial_report(&p)?),
            };
            ok(json!({ "family": format!("{family:?}").to_lowercase(), "report": report }))
        }
        ApproxCmd::ChoiXia { probs, m_lo, m_hi } => {
            let p = ctx.params(probs)?.to_f64();
            ok(to_value(&choi_xia_sequence(&p, *m_lo, *m_hi)?))
        }
        ApproxCmd::Tail { n, mu, t } => ok(json!({ "n": n, "mu": mu, "t": t, "bound": binomial_tail_bound(*n, *mu, *t)? })),
    }
}

fn order(ctx: &mut Ctx, mode: Mode, cmd: &OrderCmd) -> Result<Output> {
    match cmd {
        OrderCmd::Compare { p, q, test } => {
            let pa = ctx.params(p)?;
            let need_q = || PbError::Domain("--q is required for this test".into());
            let report = match test {
                OrderTest::Hoeffding => to_value(&hoeffding_compare(&pa.to_f64())?),
                OrderTest::Gleser => {
                    let qa = ctx.params(q.as_deref().ok_or_else(need_q)?)?;
                    to_value(&gleser_compare(&pa.to_f64(), &qa.to_f64())?)
                }
                OrderTest::Dominance => {
                    let qa = ctx.params(q.as_deref().ok_or_else(need_q)?)?;
                    match mode {
                        Mode::Float => to_value(&stochastic_dominance(
                            &pb_pmf(&pa.to_f64(), PmfMethod::Convolution)?.pmf,
                            &pb_pmf(&qa.to_f64(), PmfMethod::Convolution)?.pmf,
                        )),
                        Mode::Rational => to_value(&stochastic_dominance(
                            &pb_pmf_exact(&pa, PmfMethod::Convolution)?.pmf,
                            &pb_pmf_exact(&qa, PmfMethod::Convolution)?.pmf,
                        )),
                    }
                }
                OrderTest::Bsc => {
                    let qv = parse_rational(q.as_deref().ok_or_else(need_q)?)?;
                    to_value(&bsc_conditions(&pa.to_f64(), qv.to_f64())?)
                }
            };
            ok(json!({ "test": format!("{test:?}").to_lowercase(), "report": report }))
        }
        OrderCmd::Majorize { x, y } => {
            let x = ctx.params(x)?;
            let y = ctx.params(y)?;
            ok(json!({ "majorizes": majorize(x.probs(), y.probs())? }))
        }
        OrderCmd::SignPattern { n, p } => ok(to_value(&as67_binomial_poisson(*n, *p)?)),
    }
}

fn poly_test(p: &RationalPoly, test: PolyTest, window: usize) -> Result<Value> {
    Ok(match test {
        PolyTest::Real => json!({ "real_rooted": is_real_rooted(p)? }),
        PolyTest::Newton => to_value(&newton_check(p)),
        PolyTest::Kurtz => json!({ "kurtz": kurtz_check(p) }),
        PolyTest::Hurwitz => to_value(&hurwitz_check(p)?),
        PolyTest::Toeplitz => to_value(&toeplitz_pf_check(p.coeffs(), window)?),
        PolyTest::Roots => to_value(&root_diagnostics(p)?),
        PolyTest::Interlace => unreachable!(),
    })
}

fn poly(ctx: &mut Ctx, cmd: &PolyCmd) -> Result<Output> {
    match cmd {
        PolyCmd::Check { input, test, stride, window } => {
            let p = ctx.poly(input)?;
            let mut out = json!({ "poly": p.render(), "test": format!("{test:?}").to_lowercase() });
            if *test == PolyTest::Interlace {
                let k = stride.unwrap_or(2);
                let parts = stride_decompose(&p, k)?;
                out["stride"] = json!(k);
                out["components"] = json!(parts.iter().map(RationalPoly::render).collect::<Vec<_>>());
                out["result"] = to_value(&interlacing_check(&parts)?);
            } else if let Some(k) = stride {
                let parts = stride_decompose(&p, *k)?;
                out["stride"] = json!(k);
                out["components"] = json!(parts.iter().map(RationalPoly::render).collect::<Vec<_>>());
                out["result"] = json!(parts.iter().map(|c| poly_test(c, *test, *window)).collect::<Result<Vec<_>>>()?);
            } else {
                out["result"] = poly_test(&p, *test, *window)?;
            }
            ok(out)
        }
        PolyCmd::Recover { input, len } => {
            let p = ctx.poly(input)?;
            ok(match pb_from_pgf(&p, *len)? {
                PgfRecovery::Params { params, deficit } => {
                    json!({ "strongly_rayleigh": true, "probs": params.probs(), "deficit": deficit })
                }
                PgfRecovery::NotStronglyRayleigh(d) => json!({ "strongly_rayleigh": false, "diagnostics": to_value(&d) }),
            })
        }
        PolyCmd::Floor { probs, j, k } => {
            let params = ctx.params(probs)?;
            let x = pb_pmf_exact(&params, PmfMethod::Convolution)?.pmf;
            let pgf = pgf_of_dist(&x.floor_pushforward(*j, *k)?)?;
            ok(json!({
                "j": j,
                "k": k,
                "pgf": pgf.render(),
                "roots": to_value(&root_diagnostics(&pgf)?),
                "hurwitz": to_value(&hurwitz_check(&pgf)?),
                "factorization": to_value(&floor_factorization_attempt(&params, *j, *k)?),
            }))
        }
    }
}

fn scaled<S: Scalar>(d: LatticeDist<S>, factor: Option<&String>) -> Result<LatticeDist<S>> {
    match factor {
        Some(f) => d.scale(&parse_rational(f)?),
        None => Ok(d),
    }
}

fn cdf_gaps<S: Scalar>(a: &LatticeDist<S>, b: &LatticeDist<S>) -> Vec<(BigRational, f64)> {
    let (mut fa, mut fb) = (S::zero(), S::zero());
    align(a, b)
        .into_iter()
        .map(|(x, ma, mb)| {
            fa = fa.clone() + ma;
            fb = fb.clone() + mb;
            (x, (fa.clone() - fb.clone()).to_f64().abs())
        })
        .collect()
}

fn dist<S: Scalar>(
    ctx: &mut Ctx,
    cmd: &DistCmd,
    load: impl Fn(&mut Ctx, &str) -> Result<LatticeDist<S>>,
) -> Result<Output> {
    let args = match cmd {
        DistCmd::Tv(d) | DistCmd::Kolmogorov(d) | DistCmd::Winf(d) | DistCmd::Wp { d, .. } => d,
    };
    let a = scaled(load(ctx, &args.a)?, args.scale_a.as_ref())?;
    let b = match &args.b {
        Some(s) => Some(scaled(load(ctx, s)?, args.scale_b.as_ref())?),
        None => None,
    };
    let need_b = || PbError::Domain("--b is required for this metric".into());
    let out = match cmd {
        DistCmd::Tv(_) => {
            let b = b.ok_or_else(need_b)?;
            let v = tv_distance(&a, &b);
            let pos: f64 = align(&a, &b)
                .into_iter()
                .map(|(_, x, y)| (x - y).to_f64())
                .filter(|d| *d > 0.0)
                .sum();
            json!({
                "metric": "tv",
                "value": v,
                "method": "half_l1",
                "crosscheck": { "positive_part": pos, "agree": (v - pos).abs() <= 1e-12 },
            })
        }
        DistCmd::Kolmogorov(_) => match b {
            Some(b) => {
                let v = cdf_gaps(&a, &b).into_iter().map(|(_, g)| g).fold(0.0, f64::max);
                let tv = tv_distance(&a, &b);
                json!({
                    "metric": "kolmogorov",
                    "value": v,
                    "method": "cdf_sup",
                    "crosscheck": { "tv": tv, "below_tv": v <= tv + 1e-12 },
                })
            }
            None => {
                let r = NormalRef::matched(&a)?;
                json!({
                    "metric": "kolmogorov",
                    "value": kolmogorov_vs_normal(&a, &r),
                    "method": "vs_matched_normal",
                    "crosscheck": { "mean": r.mean, "variance": r.variance },
                })
            }
        },
        DistCmd::Wp { p, .. } => {
            let b = b.ok_or_else(need_b)?;
            let v = wasserstein_p(&a, &b, *p)?;
            let w = render_rational(&winf(&a, &b));
            let wf = parse_rational(&w)?.to_f64();
            let mut check = json!({ "winf": w, "below_winf": v <= wf + 1e-12 });
            if *p == 1.0 {
                let gaps = cdf_gaps(&a, &b);
                let area: f64 = gaps.windows(2).map(|g| g[0].1 * (&g[1].0 - &g[0].0).to_f64()).sum();
                check["cdf_area"] = json!(area);
                check["agree"] = json!((area - v).abs() <= 1e-9);
            }
            json!({ "metric": "wp", "p": p, "value": v, "method": "quantile", "crosscheck": check })
        }
        DistCmd::Winf(_) => {
            let b = b.ok_or_else(need_b)?;
            let v = winf(&a, &b);
            let check = if a.len().max(b.len()) <= ORACLE_MAX_SUPPORT {
                let o = winf_oracle(&a, &b)?;
                json!({ "oracle": render_rational(&o), "agree": o == v })
            } else {
                json!({ "feasible_at_value": coupling_feasible(&a, &b, &v) })
            };
            json!({
                "metric": "winf",
                "value": render_rational(&v),
                "value_f64": v.to_f64(),
                "method": "quantile",
                "crosscheck": check,
            })
        }
    };
    ok(out)
}

fn search_opts(seed: Option<u64>) -> SearchOptions {
    let mut o = SearchOptions::default();
    if let Some(s) = seed {
        o.seed = s;
    }
    o
}

fn acc(ctx: &mut Ctx, cmd: Option<&AccCmd>, search: &AccSearch) -> Result<Output> {
    match cmd {
        None => {
            let src = search
                .source
                .as_deref()
                .ok_or_else(|| PbError::Domain("--source or a subcommand is required".into()))?;
            let params = ctx.params(src)?;
            let scale = parse_rational(&search.scale)?;
            ok(acc_search(&params, &scale, search.max_degree, &search_opts(search.seed))?.to_json_value())
        }
        Some(AccCmd::Table { seed }) => {
            let rows = reproduce_acc_table(&search_opts(*seed))?;
            let forced = rows.get(3).and_then(forced_n4_poly).map(|p| p.render());
            let table: Vec<Value> = rows
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "acc": r.acc.as_ref().map(render_rational),
                        "expected": render_rational(&r.expected),
                        "witness": r.certificate.witness.pgf.render(),
                        "found_by": r.certificate.witness.found_by.name(),
                        "published_witness": r.published_witness.render(),
                        "published_witness_ok": r.published_witness_ok,
                        "lower_proofs": r.lower_proofs.iter()
                            .map(|(t, k)| json!({ "t": render_rational(t), "proof": k }))
                            .collect::<Vec<_>>(),
                        "matches": r.matches,
                    })
                })
                .collect();
            let all = rows.iter().all(|r| r.matches);
            ok(json!({ "rows": table, "forced_n4_target": forced, "all_match": all }))
        }
        Some(AccCmd::Fixtures) => {
            let reports = symmetric_fixtures_check()?;
            let rows: Vec<Value> = reports
                .iter()
                .map(|r| {
                    json!({
                        "n": r.n,
                        "degree": r.degree,
                        "sums_to_one": r.sums_to_one,
                        "local_allocation": r.local_allocation,
                        "symmetric": r.symmetric,
                        "real_rooted": r.real_rooted,
                        "winf": render_rational(&r.winf),
                        "passed": r.passed(),
                    })
                })
                .collect();
            let all = reports.iter().all(|r| r.passed());
            Ok(Output { body: Body::Json(json!({ "fixtures": rows, "all_passed": all })), failed: !all })
        }
        Some(AccCmd::Verify { cert }) => {
            let text = ctx.read(&cert.to_string_lossy())?;
            let c = Certificate::from_json(&text)?;
            let valid = c.verify(&SearchOptions::default())?;
            Ok(Output {
                body: Body::Json(json!({ "valid": valid, "value": c.value.as_ref().map(render_rational) })),
                failed: !valid,
            })
        }
    }
}

fn learn(ctx: &mut Ctx, cmd: Option<&LearnCmd>, fit: &LearnFit) -> Result<Output> {
    match cmd {
        None => {
            let src = fit
                .samples
                .as_deref()
                .ok_or_else(|| PbError::Domain("--samples or a subcommand is required".into()))?;
            let text = ctx.read(src)?;
            let n = match fit.n {
                Some(n) => n,
                None => text.lines().filter_map(|l| l.trim().parse::<usize>().ok()).max().unwrap_or(0),
            };
            let samples = SampleSet::from_csv(&text, n, 0)?;
            let model = learn_pb(&samples, fit.eps, fit.delta)?;
            let mut v = model.to_json_value();
            v["sample_size"] = json!(samples.len());
            v["required_samples"] = json!(required_samples(fit.eps, fit.delta)?);
            ok(v)
        }
        Some(LearnCmd::Sample { probs, m, seed, format }) => {
            let params = ctx.params(probs)?.to_f64();
            let seed = ctx.seed(*seed);
            let s = sample(&params, *m, seed)?;
            ok_or_text(match format {
                Format::Csv => Body::Text(s.to_csv()),
                Format::Json => Body::Json(to_value(&s)),
            })
        }
        Some(LearnCmd::Eval { truth, eps, delta, trials, m, seed }) => {
            let params: ProbParams<f64> = ctx.params(truth)?.to_f64();
            let seed = ctx.seed(*seed);
            ok(to_value(&evaluate_learner(&params, *eps, *delta, *trials, seed, *m)?))
        }
        Some(LearnCmd::Separation { n, eps, delta, m, trials, seed }) => {
            let seed = ctx.seed(*seed);
            let m = m.unwrap_or_else(|| (1.0 / (10.0 * eps * eps)).ceil() as usize);
            ok(to_value(&separation_check(*n, *eps, *delta, m, *trials, seed)?))
        }
    }
}

fn ok_or_text(body: Body) -> Result<Output> {
    Ok(Output { body, failed: false })
}
