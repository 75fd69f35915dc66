//! Acceptance suite. Each criterion prints one `PASS`/`FAIL` line; the test
//! fails if any criterion does.

mod common;

use std::time::Instant;

use common::*;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use segment_forge::compile::{compile, compile_source, CompileOptions, FREE, OUTPUT};
use segment_forge::construct::{
    expand, interpret, step_census, validate, Program, StepError, StepErrorKind,
};
use segment_forge::emit::{
    figure_to_svg, locus_to_svg, program_from_json, program_to_json, SvgStyle,
};
use segment_forge::expr::{eval_oracle, parse, CoeffEnv, EvalError, Expr, Schedule};
use segment_forge::kernel::{Field, Sign, TowerElem};
use segment_forge::locus::{reflect, trace, BreakReason, TraceOptions};
use segment_forge::registry::Registry;

struct Outcome {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, f: impl FnOnce() -> Result<String, String>) -> Outcome {
    let start = Instant::now();
    let (passed, detail) = match f() {
        Ok(d) => (true, d),
        Err(d) => (false, d),
    };
    let o = Outcome {
        name,
        passed,
        detail: format!("{detail} ({:.1}s)", start.elapsed().as_secs_f64()),
    };
    println!(
        "{} {}: {}",
        if o.passed { "PASS" } else { "FAIL" },
        o.name,
        o.detail
    );
    o
}

fn errors_agree(oracle: &EvalError, step: &StepError) -> bool {
    use StepErrorKind as K;
    match oracle {
        EvalError::NegativeResult { .. } => step.kind == K::NegativeTransfer,
        EvalError::DivisionByZero { .. } => {
            matches!(step.kind, K::DivisionDegenerate | K::ParallelLines)
        }
        EvalError::MissingCoefficient(_) => step.kind == K::MissingCoefficient,
        EvalError::NegativeInput => step.kind == K::NegativeInput,
        _ => false,
    }
}

fn float_close(got: f64, want: f64) -> bool {
    (got - want).abs() <= 1e-9
}

fn compiler_sweep() -> Result<String, String> {
    const EXPRS: usize = 500;
    const XS: usize = 100;
    let mut rng = ChaCha8Rng::seed_from_u64(0x5e6);
    let cases: Vec<(Expr, CoeffEnv, Vec<BigRational>)> = (0..EXPRS)
        .map(|_| {
            let e = random_expr(&mut rng, 5);
            let env = random_env(&mut rng);
            let xs = (0..XS).map(|_| rational_in(&mut rng, 8, 12)).collect();
            (e, env, xs)
        })
        .collect();
    let opts = CompileOptions::default();
    let results: Vec<Result<(usize, usize), String>> = cases
        .par_iter()
        .map(|(e, env, xs)| {
            let p = compile(e, &opts).map_err(|err| format!("{e}: {err}"))?;
            let (mut ok, mut failing) = (0, 0);
            for x in xs {
                let xt = TowerElem::from_rational(x.clone());
                let exact = interpret(&p, &xt, env).map(|f| f.output);
                let float = interpret(&p, &<f64 as Field>::from_rational(x), env).map(|f| f.output);
                match (eval_oracle(e, &xt, env), exact, float) {
                    (Ok(want), Ok(got), Ok(fl)) => {
                        if !got.equals(&want) {
                            return Err(format!("{e} at x={x}: exact {got} != {want}"));
                        }
                        if !float_close(fl, want.to_f64()) {
                            return Err(format!("{e} at x={x}: float {fl} vs {}", want.to_f64()));
                        }
                        ok += 1;
                    }
                    (Err(o), Err(s), _) => {
                        if !errors_agree(&o, &s) {
                            return Err(format!("{e} at x={x}: oracle `{o}` vs step `{s}`"));
                        }
                        failing += 1;
                    }
                    (o, s, f) => {
                        return Err(format!(
                            "{e} at x={x}: oracle {:?}, exact {:?}, float {:?}",
                            o.map(|v| v.to_f64()),
                            s.map(|v| v.to_f64()),
                            f
                        ))
                    }
                }
            }
            Ok((ok, failing))
        })
        .collect();
    let (mut ok, mut failing) = (0, 0);
    for r in results {
        let (a, b) = r?;
        ok += a;
        failing += b;
    }
    Ok(format!(
        "{EXPRS} expressions x {XS} inputs: {ok} values equal exactly and within 1e-9 in f64, {failing} undefined with agreeing errors"
    ))
}

fn oracle_f64(e: &Expr, x: f64, env: &CoeffEnv) -> Option<f64> {
    eval_oracle(e, &x, env).ok()
}

fn worked_examples() -> Result<String, String> {
    let env = demo_env();
    let registry = Registry::builtin();
    let mut checked = 0usize;
    let mut names = Vec::new();
    for (name, src) in worked_example_sources() {
        let schedules: &[Schedule] = if name == "fourth" { &Schedule::ALL } else { &[Schedule::SquareAndMultiply] };
        for &schedule in schedules {
            let label = format!("{name}/{schedule}");
            let opts = registry
                .compile_options(Some(schedule.name()), None, true)
                .map_err(|e| e.to_string())?;
            let p = compile_source(src, &opts).map_err(|e| format!("{label}: {e}"))?;
            validate(&p).map_err(|d| format!("{label}: {}", d[0]))?;
            let expanded = expand(&p).map_err(|d| format!("{label}: {}", d[0]))?;
            validate(&expanded).map_err(|d| format!("{label} expanded: {}", d[0]))?;
            if expanded.has_macros() {
                return Err(format!("{label}: expansion left macros"));
            }
            let e = parse(src).map_err(|e| e.to_string())?;
            let locus = trace(&p, &env, (&q(0, 1), &q(4, 1)), 401, &TraceOptions::default())
                .map_err(|e| format!("{label}: {e}"))?;
            for &[x, y] in locus.points() {
                let want = oracle_f64(&e, x, &env)
                    .ok_or_else(|| format!("{label}: traced point at x={x} where the oracle fails"))?;
                if !float_close(y, want) {
                    return Err(format!("{label}: y({x}) = {y}, oracle {want}"));
                }
                checked += 1;
            }
            if name == "reciprocal" {
                let ok = locus.breaks.len() == 1
                    && locus.breaks[0].sweep_x == Some(0.0)
                    && locus.breaks[0].branch == 0
                    && locus.branches.len() == 1
                    && matches!(&locus.breaks[0].reason, BreakReason::StepError { error_kind, .. } if error_kind == "division_degenerate");
                if !ok {
                    return Err(format!("{label}: breaks {:?}", locus.breaks));
                }
            } else if !locus.breaks.is_empty() || locus.branches.len() != 1 {
                return Err(format!("{label}: unexpected breaks {:?}", locus.breaks));
            }
            names.push(label);
        }
    }
    Ok(format!(
        "{} programs compiled, validated, expanded and traced on [0,4]; {checked} points within 1e-9; 1/x has one break at x=0",
        names.len()
    ))
}

fn symptom() -> Result<String, String> {
    let p = compile_source("x^2", &CompileOptions::default()).map_err(|e| e.to_string())?;
    let mut rng = ChaCha8Rng::seed_from_u64(41);
    for _ in 0..20 {
        let x = rational_in(&mut rng, 8, 9);
        let fig = interpret(&p, &TowerElem::from_rational(x.clone()), &CoeffEnv::new())
            .map_err(|e| e.to_string())?;
        let xp = fig.point(FREE).ok_or("no free point")?;
        let yp = fig.point(OUTPUT).ok_or("no output point")?;
        let lhs = yp.y.mul(&TowerElem::one());
        let rhs = xp.x.mul(&xp.x);
        if !lhs.equals(&rhs) || !yp.x.equals(&xp.x) {
            return Err(format!("x={x}: y = {}, x·x = {rhs}", yp.y));
        }
    }
    Ok("y·1 = x·x exactly at 20 rational points".into())
}

fn inverse_reflection() -> Result<String, String> {
    let p = compile_source("x^2", &CompileOptions::default()).map_err(|e| e.to_string())?;
    let locus = trace(&p, &CoeffEnv::new(), (&q(0, 1), &q(2, 1)), 801, &TraceOptions::default())
        .map_err(|e| e.to_string())?;
    let r = reflect(&locus);
    let mut worst: f64 = 0.0;
    for &[x, y] in r.points() {
        worst = worst.max((y - x.sqrt()).abs());
    }
    if worst > 1e-4 {
        return Err(format!("max |y - sqrt(x)| = {worst:e}"));
    }
    let back = reflect(&r);
    let flat = |l: &segment_forge::locus::Locus| l.points().copied().collect::<Vec<_>>();
    if flat(&back) != flat(&locus) || back.reflected != locus.reflected {
        return Err("reflect(reflect(l)) differs from l".into());
    }
    Ok(format!(
        "{} points, max |y - sqrt(x)| = {worst:.2e}; double reflection restores every point",
        r.point_count()
    ))
}

/// A random element over a fixed tower of depth 3.
fn random_tower(rng: &mut ChaCha8Rng, gens: &[TowerElem]) -> TowerElem {
    let mut acc = TowerElem::zero();
    for g in gens.iter().take(rng.gen_range(1..=gens.len())) {
        let c = TowerElem::from_ratio(rng.gen_range(-6..=6), rng.gen_range(1..=5));
        acc = acc.add(&c.mul(g));
    }
    acc
}

fn kernel_suite() -> Result<String, String> {
    let two = TowerElem::from_int(2);
    let r2 = two.sqrt().map_err(|e| e.to_string())?;
    let r3 = TowerElem::from_int(3).sqrt().map_err(|e| e.to_string())?;
    let t = TowerElem::one().add(&r2).sqrt().map_err(|e| e.to_string())?;
    let gens = vec![TowerElem::one(), r2.clone(), r3.clone(), t.clone(), r2.mul(&t)];
    let mut rng = ChaCha8Rng::seed_from_u64(10_000);
    let zero = TowerElem::zero();
    let one = TowerElem::one();
    for i in 0..10_000 {
        let (a, b, c) = (
            random_tower(&mut rng, &gens),
            random_tower(&mut rng, &gens),
            random_tower(&mut rng, &gens),
        );
        let fail = |what: &str| Err(format!("case {i}: {what} for a={a}, b={b}, c={c}"));
        if !a.add(&b).add(&c).equals(&a.add(&b.add(&c))) {
            return fail("additive associativity");
        }
        if !a.mul(&b).mul(&c).equals(&a.mul(&b.mul(&c))) {
            return fail("multiplicative associativity");
        }
        if !a.add(&b).equals(&b.add(&a)) || !a.mul(&b).equals(&b.mul(&a)) {
            return fail("commutativity");
        }
        if !a.mul(&b.add(&c)).equals(&a.mul(&b).add(&a.mul(&c))) {
            return fail("distributivity");
        }
        if !a.add(&a.neg()).equals(&zero) {
            return fail("additive inverse");
        }
        let za = a.sign().map_err(|e| e.to_string())?;
        if za != Sign::Zero {
            let inv = one.div(&a).map_err(|e| e.to_string())?;
            if !a.mul(&inv).equals(&one) {
                return fail("multiplicative inverse");
            }
        }
        let m = a.abs().map_err(|e| e.to_string())?;
        let s = m.sqrt().map_err(|e| e.to_string())?;
        if !s.mul(&s).equals(&m) {
            return fail("square root identity");
        }
        let zero_test = a.is_zero().map_err(|e| e.to_string())?;
        if zero_test != (za == Sign::Zero) {
            return fail("trichotomy");
        }
        let f = a.to_f64();
        if f.abs() > 1e-9 && (f > 0.0) != (za == Sign::Positive) {
            return fail("sign against float");
        }
        let zb = b.sign().map_err(|e| e.to_string())?;
        let zab = a.mul(&b).sign().map_err(|e| e.to_string())?;
        if zab.as_i8() != za.as_i8() * zb.as_i8() {
            return fail("sign multiplicativity");
        }
    }
    Ok("10000 random depth-3 cases: field axioms, sqrt identity, sign trichotomy and multiplicativity".into())
}

fn sample_xs() -> Vec<BigRational> {
    let mut rng = ChaCha8Rng::seed_from_u64(50);
    let mut xs = vec![q(0, 1), q(1, 1), q(2, 1), q(1, 2)];
    while xs.len() < 12 {
        xs.push(rational_in(&mut rng, 6, 7));
    }
    xs
}

fn same_outcome(a: &Program, b: &Program, x: &BigRational, env: &CoeffEnv) -> Result<(), String> {
    let xt = TowerElem::from_rational(x.clone());
    match (interpret(a, &xt, env), interpret(b, &xt, env)) {
        (Ok(fa), Ok(fb)) if fa.output.equals(&fb.output) => Ok(()),
        (Err(ea), Err(eb)) if ea.kind == eb.kind => Ok(()),
        (ra, rb) => Err(format!(
            "x={x}: {:?} vs {:?}",
            ra.map(|f| f.output.to_f64()),
            rb.map(|f| f.output.to_f64())
        )),
    }
}

fn expansion_equivalence() -> Result<String, String> {
    let env = demo_env();
    let corpus = corpus();
    let xs = sample_xs();
    let checks: Result<Vec<usize>, String> = corpus
        .par_iter()
        .map(|(label, p)| {
            let e = expand(p).map_err(|d| format!("{label}: {}", d[0]))?;
            for x in &xs {
                same_outcome(p, &e, x, &env).map_err(|m| format!("{label}: {m}"))?;
            }
            Ok(xs.len())
        })
        .collect();
    let n: usize = checks?.iter().sum();
    Ok(format!(
        "{} corpus programs x {} inputs (including x=0): {n} exact agreements",
        corpus.len(),
        xs.len()
    ))
}

fn schedule_census() -> Result<String, String> {
    let registry = Registry::builtin();
    let build = |s: &str| {
        let opts = registry.compile_options(Some(s), None, true).unwrap();
        compile_source("x^4", &opts).unwrap()
    };
    let (sam, chain) = (build("square-and-multiply"), build("left-chain"));
    let (ms, mc) = (
        step_census(&sam).gadget_count("mul"),
        step_census(&chain).gadget_count("mul"),
    );
    if (ms, mc) != (2, 3) {
        return Err(format!("product gadgets: square-and-multiply {ms}, left-chain {mc}"));
    }
    let xs = sample_xs();
    for x in &xs {
        same_outcome(&sam, &chain, x, &CoeffEnv::new())?;
    }
    Ok(format!(
        "x^4: square-and-multiply 2 product gadgets, left-chain 3; equal at {} inputs",
        xs.len()
    ))
}

fn serialization() -> Result<String, String> {
    let env = demo_env();
    let corpus = corpus();
    let style = SvgStyle::default();
    let mut svgs = 0;
    for (label, p) in &corpus {
        for prog in [p.clone(), expand(p).map_err(|d| d[0].to_string())?] {
            let text = program_to_json(&prog);
            let back = program_from_json(&text).map_err(|e| format!("{label}: {e}"))?;
            if back != prog || program_to_json(&back) != text {
                return Err(format!("{label}: JSON round trip changed the program"));
            }
        }
        let fig = interpret(p, &(3.0 / 2.0), &env).map_err(|e| format!("{label}: {e}"))?;
        let locus = trace(p, &env, (&q(0, 1), &q(4, 1)), 101, &TraceOptions::default())
            .map_err(|e| e.to_string())?;
        for (a, b) in [
            (figure_to_svg(&fig, &style), figure_to_svg(&fig, &style)),
            (
                locus_to_svg(&locus, Some(&fig), &style),
                locus_to_svg(&locus, Some(&fig), &style),
            ),
        ] {
            if a != b {
                return Err(format!("{label}: SVG bytes differ between renders"));
            }
            let s = String::from_utf8(a).map_err(|e| e.to_string())?;
            if s.contains("NaN") || s.contains("inf") {
                return Err(format!("{label}: non-finite SVG coordinate"));
            }
            svgs += 1;
        }
    }
    Ok(format!(
        "{} programs and their expansions round-trip; {svgs} SVG renders byte-identical with finite coordinates",
        corpus.len()
    ))
}

#[test]
fn acceptance() {
    let outcomes = [
        check("compiler correctness sweep", compiler_sweep),
        check("worked-example suite", worked_examples),
        check("symptom y·1 = x·x", symptom),
        check("inverse reflection", inverse_reflection),
        check("exact kernel suite", kernel_suite),
        check("macro-expansion equivalence", expansion_equivalence),
        check("schedule census", schedule_census),
        check("JSON round trip and SVG determinism", serialization),
    ];
    let failed: Vec<&str> = outcomes.iter().filter(|o| !o.passed).map(|o| o.name).collect();
    println!(
        "acceptance: {}/{} criteria passed",
        outcomes.len() - failed.len(),
        outcomes.len()
    );
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
