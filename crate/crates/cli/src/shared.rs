use std::collections::BTreeMap;

use num_rational::BigRational;
use segment_forge::construct::{Program, ScalarFigure};
use segment_forge::expr::CoeffEnv;
use segment_forge::kernel::{parse_rational, rational_to_string, Scalar};
use segment_forge::locus::{reflect, trace, Locus, TraceError, TraceOptions};
use serde_json::{json, Value};

pub(crate) fn rational(text: &str, what: &str) -> Result<BigRational, String> {
    parse_rational(text).ok_or_else(|| format!("{what}: `{text}` is not a rational number"))
}

/// Program defaults overridden by explicit values. Names the program does
/// not declare are rejected.
pub(crate) fn env_for(
    program: &Program,
    overrides: &BTreeMap<String, BigRational>,
) -> Result<CoeffEnv, String> {
    let declared = program.coefficient_names();
    let mut env = CoeffEnv::new();
    for c in &program.inputs.coefficients {
        if let Some(d) = &c.default {
            env.insert(&c.name, d.clone()).map_err(|e| e.to_string())?;
        }
    }
    for (name, value) in overrides {
        if !declared.iter().any(|d| d == name) {
            return Err(format!("the program has no coefficient `{name}`"));
        }
        env.insert(name, value.clone()).map_err(|e| e.to_string())?;
    }
    Ok(env)
}

/// `NAME=VALUE` pairs.
pub(crate) fn parse_assignments(pairs: &[String]) -> Result<BTreeMap<String, BigRational>, String> {
    let mut out = BTreeMap::new();
    for pair in pairs {
        let (name, value) = pair
            .split_once('=')
            .ok_or_else(|| format!("expected NAME=VALUE, got `{pair}`"))?;
        let name = name.trim();
        let v = rational(value, name)?;
        if out.insert(name.to_string(), v).is_some() {
            return Err(format!("coefficient `{name}` given twice"));
        }
    }
    Ok(out)
}

/// Human-readable value: reduced rationals print as `9/4` or `3`.
pub(crate) fn display_scalar(s: &Scalar) -> String {
    match s {
        Scalar::Exact(t) => match t.as_rational() {
            Some(r) => r.to_string(),
            None => t.to_string(),
        },
        other => format!("{}", other.to_f64()),
    }
}

/// Wire form: a float shadow, plus the exact value when there is one.
pub(crate) fn output_value(fig: &ScalarFigure) -> Value {
    let out = fig.output();
    match &out {
        Scalar::Exact(t) => json!({
            "float": out.to_f64(),
            "exact": match t.as_rational() {
                Some(r) => rational_to_string(r),
                None => t.to_string(),
            },
        }),
        _ => json!({ "float": out.to_f64() }),
    }
}

pub(crate) fn run_trace(
    program: &Program,
    env: &CoeffEnv,
    range: (&BigRational, &BigRational),
    samples: usize,
    opts: &TraceOptions,
    inverse: bool,
) -> Result<Locus, TraceError> {
    let locus = trace(program, env, range, samples, opts)?;
    Ok(if inverse { reflect(&locus) } else { locus })
}
