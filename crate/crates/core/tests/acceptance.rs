//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit if any fail.

use std::time::{Duration, Instant};

use greedylab::fundfn::{
    bidemocracy_constant, concave_envelope, delta_at, democracy_constant, dual_fundamental_exact,
    dual_fundamental_function, fundamental_function, measure::rationals_to_f64, regularize_dilation,
    FundamentalFunction,
};
use greedylab::greedy::{property_A_constant_search, random_vector, SearchBudget};
use greedylab::renorm::{
    renorm_bidemocratic, renorm_bidemocratic_greedy, renorm_democratic, renorm_greedy, FlatContext, GreedyRenorm,
};
use greedylab::spaces::{
    build_prescribed_space, build_prescribed_space_partial, dual_norm_eval, indicator_norm_exact,
    lp::rational_from_f64, tsirelson_materialize, CoefVector, IndexSet, NormDescriptor, SetFamily,
};
use greedylab::verify::greedy_bound_check;
use greedylab::Caps;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Outcome = Result<String, String>;
type Criterion = (&'static str, u64, fn(&Caps) -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn ok<T, E: std::fmt::Display>(r: std::result::Result<T, E>) -> Result<T, String> {
    r.map_err(|e| e.to_string())
}

fn bidemocracy_of(space: &NormDescriptor, caps: &Caps) -> Result<f64, String> {
    let phi = ok(fundamental_function(space, caps))?.table(space.dim());
    let star = ok(dual_fundamental_function(space, caps))?.values;
    Ok(bidemocracy_constant(&phi, &star))
}

fn lp_conformance(caps: &Caps) -> Outcome {
    let n = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let xs: Vec<CoefVector> = (0..1000).map(|_| random_vector(&mut rng, n)).collect();
    for p in [1.0, 1.5, 2.0, 3.0, f64::INFINITY] {
        let s = NormDescriptor::lp(n, p);
        let phi = ok(fundamental_function(&s, caps))?.table(n);
        let star = ok(dual_fundamental_function(&s, caps))?.values;
        for k in 1..=n {
            let kf = k as f64;
            let want = if p.is_infinite() { 1.0 } else { kf.powf(1.0 / p) };
            let want_star = if p.is_infinite() { kf } else { kf.powf(1.0 - 1.0 / p) };
            ensure!((phi[k - 1] - want).abs() <= 1e-9, "p={p}: phi({k}) = {}", phi[k - 1]);
            ensure!(
                (star[k - 1] - want_star).abs() <= 1e-9,
                "p={p}: phi*({k}) = {}",
                star[k - 1]
            );
        }
        let delta = ok(democracy_constant(&s, caps))?;
        ensure!((delta - 1.0).abs() <= 1e-9, "p={p}: democracy {delta}");
        let bidem = bidemocracy_constant(&phi, &star);
        ensure!((bidem - 1.0).abs() <= 1e-9, "p={p}: bidemocracy {bidem}");
        let r = ok(renorm_bidemocratic(&s, caps))?;
        for x in &xs {
            let (a, b) = (s.value(x.as_slice()), r.value(x.as_slice()));
            ensure!((a - b).abs() <= 1e-12, "p={p}: renorm changed {a} to {b}");
        }
    }
    Ok("5 exponents, 1000 vectors each".into())
}

fn schreier_space(caps: &Caps) -> Result<NormDescriptor, String> {
    let phi = ok(FundamentalFunction::power(1.0, 8))?;
    let s = ok(build_prescribed_space_partial(&phi, &SetFamily::schreier(8)))?;
    ok(s.validate(caps))?;
    Ok(s)
}

fn bidemocratic_renorm(caps: &Caps) -> Outcome {
    let mut detail = Vec::new();
    for (name, s) in [
        ("tsirelson-10", ok(tsirelson_materialize(10, caps))?),
        ("schreier-8", schreier_space(caps)?),
    ] {
        let r = ok(renorm_bidemocratic(&s, caps))?;
        let n = s.dim();
        let phi = ok(fundamental_function(&r, caps))?.table(n);
        let star = rationals_to_f64(&ok(dual_fundamental_exact(&r, caps))?);
        let bidem = bidemocracy_constant(&phi, &star);
        ensure!((bidem - 1.0).abs() <= 1e-9, "{name}: bidemocracy {bidem}");
        detail.push(format!("{name} {bidem:.12}"));
    }
    Ok(detail.join(", "))
}

fn bidemocratic_greedy_renorm(caps: &Caps) -> Outcome {
    let s = NormDescriptor::lp(6, 2.0);
    let eps = 0.25;
    let r = ok(renorm_bidemocratic_greedy(&s, eps, caps))?;
    let budget = SearchBudget {
        refinements: 10_000,
        ..SearchBudget::default()
    };
    let pa = ok(property_A_constant_search(&r.intermediate, &budget, caps))?;
    ensure!(pa.vertex_cases > 0, "no vertex cases enumerated");
    ensure!(
        pa.lower_bound <= 1.0 + eps + 1e-6,
        "Property (A) ratio {}",
        pa.lower_bound
    );
    let bidem = bidemocracy_of(&r.composed, caps)?;
    ensure!((bidem - 1.0).abs() <= 1e-9, "composed bidemocracy {bidem}");
    Ok(format!(
        "Property (A) {:.9} over {} vertex cases, composed bidemocracy {bidem:.12}",
        pa.lower_bound, pa.vertex_cases
    ))
}

fn flat_extraction(caps: &Caps) -> Outcome {
    let s = ok(tsirelson_materialize(10, caps))?;
    let delta = ok(democracy_constant(&s, caps))?;
    let q = 0.5;
    let c = 1.01 * delta / (q * (1.0 - q));
    let ctx = ok(FlatContext::new(&s, q, c, caps))?;
    let phi = ok(fundamental_function(&s, caps))?;
    let mut worst_dual = 0.0f64;
    let mut most_steps = 0usize;
    for mask in 1u64..1 << 10 {
        let e = IndexSet(mask);
        let t = ok(ctx.extract(e))?;
        ensure!(
            t.step_count as f64 <= t.step_bound,
            "E={mask:#b}: {} steps > {}",
            t.step_count,
            t.step_bound
        );
        ensure!(t.a.is_subset(e), "E={mask:#b}: A not inside E");
        ensure!(
            t.a.len() as f64 >= q * e.len() as f64,
            "E={mask:#b}: |A| = {}",
            t.a.len()
        );
        let k = t.a.len() as f64;
        let g = CoefVector::indicator(10, t.a).scale(phi.eval(k) / k);
        let dual = ok(dual_norm_eval(&s, &g))?;
        ensure!(dual <= c + 1e-9, "E={mask:#b}: dual norm {dual} > C = {c}");
        worst_dual = worst_dual.max(dual);
        most_steps = most_steps.max(t.step_count);
    }
    Ok(format!(
        "1023 sets, C = {c:.4}, worst dual {worst_dual:.6}, at most {most_steps} steps"
    ))
}

fn democratic_renorm(caps: &Caps) -> Outcome {
    let s = ok(tsirelson_materialize(10, caps))?;
    let mut detail = Vec::new();
    for eps in [1.0, 0.5] {
        let (r, params, _) = ok(renorm_democratic(&s, eps, caps))?;
        let c = params.c.ok_or("missing C")?;
        let delta = ok(democracy_constant(&r, caps))?;
        ensure!(delta <= 1.0 + eps + 1e-9, "eps={eps}: democracy {delta}");
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
        for _ in 0..1000 {
            let x = random_vector(&mut rng, 10);
            if x.is_zero() {
                continue;
            }
            let ratio = r.value(x.as_slice()) / s.value(x.as_slice());
            lo = lo.min(ratio);
            hi = hi.max(ratio);
        }
        ensure!(
            lo >= 1.0 - 1e-9 && hi <= c + 1e-9,
            "eps={eps}: ratios in [{lo}, {hi}], C = {c}"
        );
        detail.push(format!(
            "eps {eps}: democracy {delta:.6}, ratios [{lo:.4}, {hi:.4}] within C {c:.4}"
        ));
    }
    Ok(detail.join("; "))
}

fn calculus(_caps: &Caps) -> Outcome {
    let sqrt = ok(FundamentalFunction::power(0.5, 100_000))?;
    let (d, _) = ok(delta_at(&sqrt, 4, 100_000))?;
    ensure!((d - 0.5).abs() <= 1e-6, "delta_sqrt(4) = {d}");

    let samples = ok(FundamentalFunction::grid(vec![1.0, 1.2, 1.8]))?;
    let env = ok(concave_envelope(&samples))?;
    let at2 = env.eval(2.0);
    ensure!(
        rational_from_f64(at2) == rational_from_f64(1.4),
        "envelope at 2 = {at2:?}"
    );
    for k in 1..=3 {
        let (f, e) = (samples.eval(k as f64), env.eval(k as f64));
        ensure!(f <= e && e <= 2.0 * f, "envelope at {k}: {e} vs {f}");
    }

    let phi = ok(FundamentalFunction::power(0.9, 1 << 14))?;
    let reg = ok(regularize_dilation(&phi, 2, 0.5))?;
    ensure!(reg.all_checks_pass(), "regularization grid checks failed");
    ensure!(reg.delta_psi_m > 2.0 / 3.0, "delta_psi(2) = {}", reg.delta_psi_m);
    Ok(format!(
        "delta {d:.9}, envelope(2) {at2}, delta_psi(2) {:.6}",
        reg.delta_psi_m
    ))
}

fn prescribed(caps: &Caps) -> Outcome {
    let n = 8;
    let full = SetFamily::all_subsets(n);
    let phis = [
        ("sqrt", ok(FundamentalFunction::power(0.5, n))?),
        ("x^0.9", ok(FundamentalFunction::power(0.9, n))?),
        ("linear", ok(FundamentalFunction::power(1.0, n))?),
        (
            "steps",
            ok(FundamentalFunction::grid(vec![1.0, 1.5, 2.0, 2.0, 2.5, 3.0, 3.0, 3.2]))?,
        ),
    ];
    for (name, phi) in &phis {
        let s = ok(build_prescribed_space(phi, &full))?;
        for mask in 1u64..1 << n {
            let set = IndexSet(mask);
            let want = rational_from_f64(phi.eval(set.len() as f64));
            let got = indicator_norm_exact(&s, set).ok_or("no exact indicator norm")?;
            ensure!(got == want, "{name}: ||1_A|| for A = {mask:#b}");
        }
    }
    // The Schreier family in {1..8} only has sets of sizes 1..=4, so the
    // input is reproduced exactly on those sizes and saturates beyond.
    let s = schreier_space(caps)?;
    let got = ok(fundamental_function(&s, caps))?.table(n);
    let largest = (1..=n)
        .filter(|&k| IndexSet::interval(n - k, n - 1).is_schreier())
        .max()
        .unwrap_or(0);
    for (k, v) in got.iter().enumerate().map(|(k, v)| (k + 1, *v)) {
        let want = k.min(largest) as f64;
        ensure!(v == want, "schreier: phi({k}) = {v}, expected {want}");
    }
    let delta = ok(democracy_constant(&s, caps))?;
    ensure!(delta == 2.0, "schreier: democracy {delta}");
    Ok(format!(
        "4 functions on all subsets exact; schreier phi = {got:?}, democracy {delta}"
    ))
}

/// `sup <g, x>` over functionals `g = s x* + sign (f + L 1_A)` taken jointly:
/// `x*` a vertex of the dual ball of `l_1`, `f` from at most `m` disjoint
/// flat sets (with sub-indicators), `|A| <= n0`, and all sign patterns.
fn joint_sup_l1(r: &GreedyRenorm, x: &[f64]) -> f64 {
    let n = x.len();
    let p = &r.params;
    let (s, l, n0, m) = (p.s.unwrap(), p.l.unwrap(), p.n0.unwrap(), p.m.unwrap());
    let psi = p.psi.as_ref().unwrap();
    let sets = &r.family.sets.sets;
    let mut fs: Vec<Vec<f64>> = vec![vec![0.0; n]];
    let mut frontier: Vec<(IndexSet, Vec<f64>)> = vec![(IndexSet(0), vec![0.0; n])];
    for _ in 0..m {
        let mut next = Vec::new();
        for (used, acc) in &frontier {
            for a in sets.iter().filter(|a| a.is_disjoint(*used)) {
                let w = psi.eval(a.len() as f64) / a.len() as f64;
                for sub in (1..=a.0).filter(|b| b & !a.0 == 0) {
                    let mut f = acc.clone();
                    for i in IndexSet(sub).iter() {
                        f[i] += w;
                    }
                    fs.push(f.clone());
                    next.push((used.union(*a), f));
                }
            }
        }
        frontier = next;
    }
    let tops: Vec<u64> = (0u64..1 << n).filter(|a| a.count_ones() as usize <= n0).collect();
    let mut best = 0.0f64;
    for signs in 0u64..1 << n {
        let sg: Vec<f64> = (0..n).map(|i| if signs >> i & 1 == 1 { -1.0 } else { 1.0 }).collect();
        for star in 0u64..1 << n {
            for f in &fs {
                for &a in &tops {
                    let v: f64 = (0..n)
                        .map(|i| {
                            let xs = if star >> i & 1 == 1 { -s } else { s };
                            let rest = f[i] + if a >> i & 1 == 1 { l } else { 0.0 };
                            (xs + sg[i] * rest) * x[i]
                        })
                        .sum();
                    best = best.max(v);
                }
            }
        }
    }
    best
}

fn greedy_renorm(caps: &Caps) -> Outcome {
    let l1 = ok(renorm_greedy(&NormDescriptor::lp(4, 1.0), 1.0, caps))?;
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let x = random_vector(&mut rng, 4);
        let want = joint_sup_l1(&l1, x.as_slice());
        let got = l1.unscaled.value(x.as_slice());
        worst = worst.max((got - want).abs());
    }
    ensure!(worst <= 1e-6, "l1 separable vs joint sup differ by {worst}");

    let eps = 0.5;
    let ts = ok(tsirelson_materialize(12, caps))?;
    let r = ok(renorm_greedy(&ts, eps, caps))?;
    for i in 0..12 {
        let v = r.space.value(CoefVector::unit(12, i).as_slice());
        ensure!((v - 1.0).abs() <= 1e-12, "||e_{i}|| = {v}");
    }
    let budget = SearchBudget {
        refinements: 10_000,
        ..SearchBudget::default()
    };
    let pa = ok(property_A_constant_search(&r.space, &budget, caps))?;
    ensure!(
        pa.lower_bound <= 1.0 + 4.0 * eps,
        "Property (A) ratio {}",
        pa.lower_bound
    );
    Ok(format!(
        "l1 joint sup gap {worst:.2e}; tsirelson-12 n0 = {}, Property (A) {:.6} over {} vertex cases",
        r.params.n0.unwrap_or(0),
        pa.lower_bound,
        pa.vertex_cases
    ))
}

fn greedy_error_ledger(caps: &Caps) -> Outcome {
    let mut spaces: Vec<(String, NormDescriptor)> = [1.0, 1.5, 2.0, 3.0, f64::INFINITY]
        .iter()
        .map(|&p| (format!("l{p}-8"), NormDescriptor::lp(8, p)))
        .collect();
    let ts = ok(tsirelson_materialize(10, caps))?;
    spaces.push(("tsirelson-10".into(), ts.clone()));
    spaces.push(("schreier-8".into(), schreier_space(caps)?));
    spaces.push(("bidemocratic-tsirelson-10".into(), ok(renorm_bidemocratic(&ts, caps))?));
    spaces.push((
        "democratic-tsirelson-10".into(),
        ok(renorm_democratic(&ts, 1.0, caps))?.0,
    ));
    let mut detail = Vec::new();
    for (name, s) in &spaces {
        ensure!(s.is_unconditional(), "{name} is not 1-unconditional");
        let delta = ok(democracy_constant(s, caps))?;
        let bound = 1.0 + delta;
        let (check, worst) = ok(greedy_bound_check(s, name, bound, 10_000, 9, caps))?;
        ensure!(check.passed(), "{name}: {}", check.note.unwrap_or_default());
        detail.push(format!("{name} {worst:.3}/{bound:.3}"));
    }
    Ok(detail.join(", "))
}

fn main() {
    let caps = Caps::default();
    let criteria: [Criterion; 9] = [
        ("lp-conformance", 10, lp_conformance),
        ("bidemocratic-renorm", 120, bidemocratic_renorm),
        ("bidemocratic-greedy-renorm", 120, bidemocratic_greedy_renorm),
        ("flat-extraction", 300, flat_extraction),
        ("democratic-renorm", 300, democratic_renorm),
        ("fundamental-function-calculus", 30, calculus),
        ("prescribed-fundamental-function", 30, prescribed),
        ("greedy-renorm", 600, greedy_renorm),
        ("greedy-error-bound", 300, greedy_error_ledger),
    ];
    let mut failed = 0;
    for (i, (name, limit, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let mut outcome = run(&caps);
        let took = start.elapsed();
        if outcome.is_ok() && took > Duration::from_secs(*limit) {
            outcome = Err(format!("took {took:.1?}, limit {limit} s"));
        }
        match outcome {
            Ok(detail) => println!("PASS {} {name} ({took:.1?}): {detail}", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {} {name} ({took:.1?}): {why}", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
