#![allow(dead_code)]

use num_rational::BigRational;
use rand::Rng;
use segment_forge::compile::{compile_source, CompileOptions, Layout};
use segment_forge::construct::Program;
use segment_forge::expr::{CoeffEnv, Expr, Schedule};

pub const COEFFS: [&str; 3] = ["a", "b", "c"];

pub fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(p.into(), d.into())
}

/// Rational in `[0, hi]` with a small denominator.
pub fn rational_in<R: Rng>(rng: &mut R, hi: i64, max_den: i64) -> BigRational {
    let d = rng.gen_range(1..=max_den);
    q(rng.gen_range(0..=hi * d), d)
}

pub fn random_env<R: Rng>(rng: &mut R) -> CoeffEnv {
    let mut env = CoeffEnv::new();
    for name in COEFFS {
        env.insert(name, rational_in(rng, 4, 6)).unwrap();
    }
    env
}

fn leaf<R: Rng>(rng: &mut R) -> Expr {
    match rng.gen_range(0..10) {
        0..=3 => Expr::Var,
        4 => Expr::Unit,
        5 => Expr::lit(rng.gen_range(2..=5)),
        _ => Expr::coeff(COEFFS[rng.gen_range(0..COEFFS.len())]),
    }
}

/// Random tree over `+ - * / sqrt` with at most `depth` levels.
pub fn random_expr<R: Rng>(rng: &mut R, depth: usize) -> Expr {
    if depth <= 1 || rng.gen_bool(0.25) {
        return leaf(rng);
    }
    let op = rng.gen_range(0..5);
    let mut sub = || random_expr(rng, depth - 1);
    match op {
        0 => {
            let (l, r) = (sub(), sub());
            Expr::add(l, r)
        }
        1 => {
            let (l, r) = (sub(), sub());
            Expr::sub(l, r)
        }
        2 => {
            let (l, r) = (sub(), sub());
            Expr::mul(l, r)
        }
        3 => {
            let (l, r) = (sub(), sub());
            Expr::div(l, r)
        }
        _ => Expr::sqrt(sub()),
    }
}

/// Expressions from the worked examples, with demo coefficient values.
pub fn worked_example_sources() -> Vec<(&'static str, &'static str)> {
    vec![
        ("square", "x^2"),
        ("cube", "x^3"),
        ("fourth", "x^4"),
        ("quadratic", "a0 + a1*x + a2*x^2"),
        ("reciprocal", "1/x"),
        ("root", "sqrt(x)"),
    ]
}

pub fn demo_env() -> CoeffEnv {
    CoeffEnv::new()
        .with("a0", q(1, 2))
        .unwrap()
        .with("a1", q(1, 1))
        .unwrap()
        .with("a2", q(3, 4))
        .unwrap()
}

/// Every worked example under every schedule and layout, plus a few mixed
/// expressions.
pub fn corpus() -> Vec<(String, Program)> {
    let mut sources: Vec<String> = worked_example_sources().into_iter().map(|(_, s)| s.to_string()).collect();
    sources.extend(
        [
            "x*x*x*x",
            "(x + 1)/(x + 2)",
            "sqrt(x^2 + 1)",
            "2 - x/3 + sqrt(x)*x",
            "sqrt(sqrt(x) + 1)",
            "x",
        ]
        .map(String::from),
    );
    let mut out = Vec::new();
    for src in &sources {
        for schedule in Schedule::ALL {
            for layout in Layout::ALL {
                let opts = CompileOptions {
                    schedule: schedule.arc(),
                    layout: layout.arc(),
                    ..Default::default()
                };
                let p = compile_source(src, &opts).unwrap();
                out.push((format!("{src} [{schedule}, {layout}]"), p));
            }
        }
    }
    out
}
