//! The program wire format.
//!
//! ```json
//! {
//!   "version": 1,
//!   "inputs": {"free": "X", "coefficients": [{"name": "a", "default": "1/2"}]},
//!   "steps": [
//!     {"id": "O", "kind": "given", "args": {"role": "origin"}},
//!     {"id": "ax", "kind": "line", "args": {"p": "O", "q": "U"}},
//!     {"id": "q", "kind": "meet_lc", "args": {"line": "co", "circle": "c"}, "selector": "second"}
//!   ],
//!   "output": "Yp",
//!   "metadata": {"source": "x^2", "schedule": "square-and-multiply", ...}
//! }
//! ```

use std::collections::BTreeMap;

use serde_json::{json, Map, Value};
use thiserror::Error;

use crate::construct::{
    validate, CoeffInput, Defect, DefectKind, Degeneracy, Figure, GeoObject, GivenRole, Inputs,
    Metadata, Program, RayGuard, Step, StepKind,
};
use crate::kernel::{parse_rational, rational_to_string, CcSelector, LcSelector, Point};

pub const SCHEMA_VERSION: u64 = 1;

/// A schema violation located by a JSON pointer.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message} at `{pointer}`")]
pub struct SchemaError {
    pub pointer: String,
    pub message: String,
}

fn err<T>(pointer: &str, message: impl Into<String>) -> Result<T, SchemaError> {
    Err(SchemaError {
        pointer: pointer.to_string(),
        message: message.into(),
    })
}

fn role_value(role: &GivenRole) -> Value {
    match role {
        GivenRole::Origin => json!({"role": "origin"}),
        GivenRole::UnitOnAxis => json!({"role": "unit_on_axis"}),
        GivenRole::UnitOnCoAxis => json!({"role": "unit_on_co_axis"}),
        GivenRole::Free => json!({"role": "free"}),
        GivenRole::Coeff(name) => json!({"role": "coefficient", "name": name}),
    }
}

fn args_value(kind: &StepKind) -> Value {
    match kind {
        StepKind::Given(role) => role_value(role),
        StepKind::Line { p, q } | StepKind::Midpoint { p, q } => json!({"p": p, "q": q}),
        StepKind::Circle {
            center,
            through,
            allow_zero,
        } => json!({"center": center, "through": through, "allow_zero": allow_zero}),
        StepKind::MeetLL { l1, l2 } => json!({"l1": l1, "l2": l2}),
        StepKind::MeetLC { line, circle, .. } => json!({"line": line, "circle": circle}),
        StepKind::MeetCC { c1, c2, .. } => json!({"c1": c1, "c2": c2}),
        StepKind::ParallelThrough { line, point } | StepKind::PerpThrough { line, point } => {
            json!({"line": line, "point": point})
        }
        StepKind::TransferSegment { from, at, along } => {
            json!({"from": [from.0, from.1], "at": at, "along": along})
        }
        StepKind::MeanProportional { first, second } => {
            json!({"first": [first.0, first.1], "second": [second.0, second.1]})
        }
    }
}

fn step_value(step: &Step) -> Value {
    let mut m = Map::new();
    m.insert("id".into(), json!(step.id));
    m.insert("kind".into(), json!(step.kind.name()));
    m.insert("args".into(), args_value(&step.kind));
    match &step.kind {
        StepKind::MeetLC {
            selector: Some(s), ..
        } => {
            m.insert("selector".into(), json!(s));
        }
        StepKind::MeetCC {
            selector: Some(s), ..
        } => {
            m.insert("selector".into(), json!(s));
        }
        _ => {}
    }
    if let Some(g) = &step.guard {
        m.insert("guard".into(), json!({"origin": g.origin, "toward": g.toward}));
    }
    if let Some(d) = &step.degenerate_as {
        m.insert("degenerate_as".into(), json!(d));
    }
    if let Some(g) = &step.gadget {
        m.insert("gadget".into(), json!(g));
    }
    Value::Object(m)
}

pub fn program_to_value(p: &Program) -> Value {
    let coefficients: Vec<Value> = p
        .inputs
        .coefficients
        .iter()
        .map(|c| {
            let mut m = Map::new();
            m.insert("name".into(), json!(c.name));
            if let Some(d) = &c.default {
                m.insert("default".into(), json!(rational_to_string(d)));
            }
            Value::Object(m)
        })
        .collect();
    let mut meta = Map::new();
    let md = &p.metadata;
    if let Some(s) = &md.source {
        meta.insert("source".into(), json!(s));
    }
    if let Some(s) = &md.schedule {
        meta.insert("schedule".into(), json!(s));
    }
    if let Some(l) = &md.layout {
        meta.insert("layout".into(), json!(l));
    }
    if let Some(s) = md.share {
        meta.insert("share".into(), json!(s));
    }
    meta.insert("step_counts".into(), json!(md.step_counts));
    json!({
        "version": SCHEMA_VERSION,
        "inputs": {"free": p.inputs.free, "coefficients": coefficients},
        "steps": p.steps.iter().map(step_value).collect::<Vec<_>>(),
        "output": p.output,
        "metadata": Value::Object(meta),
    })
}

/// Pretty-printed canonical JSON with a trailing newline.
pub fn program_to_json(p: &Program) -> String {
    let mut s = serde_json::to_string_pretty(&program_to_value(p)).expect("values serialize");
    s.push('\n');
    s
}

struct Obj<'a> {
    map: &'a Map<String, Value>,
    at: String,
}

impl<'a> Obj<'a> {
    fn new(v: &'a Value, at: &str) -> Result<Obj<'a>, SchemaError> {
        match v.as_object() {
            Some(map) => Ok(Obj {
                map,
                at: at.to_string(),
            }),
            None => err(at, "expected an object"),
        }
    }

    fn only(&self, allowed: &[&str]) -> Result<(), SchemaError> {
        for k in self.map.keys() {
            if !allowed.contains(&k.as_str()) {
                return err(&self.ptr(k), format!("unknown field `{k}`"));
            }
        }
        Ok(())
    }

    fn ptr(&self, key: &str) -> String {
        format!("{}/{}", self.at, key.replace('~', "~0").replace('/', "~1"))
    }

    fn get(&self, key: &str) -> Result<&'a Value, SchemaError> {
        match self.map.get(key) {
            Some(v) => Ok(v),
            None => err(&self.at, format!("missing field `{key}`")),
        }
    }

    fn opt(&self, key: &str) -> Option<&'a Value> {
        self.map.get(key).filter(|v| !v.is_null())
    }

    fn str(&self, key: &str) -> Result<String, SchemaError> {
        match self.get(key)?.as_str() {
            Some(s) => Ok(s.to_string()),
            None => err(&self.ptr(key), "expected a string"),
        }
    }

    fn opt_str(&self, key: &str) -> Result<Option<String>, SchemaError> {
        match self.opt(key) {
            None => Ok(None),
            Some(Value::String(s)) => Ok(Some(s.clone())),
            Some(_) => err(&self.ptr(key), "expected a string"),
        }
    }

    fn pair(&self, key: &str) -> Result<(String, String), SchemaError> {
        let at = self.ptr(key);
        match self.get(key)?.as_array().map(Vec::as_slice) {
            Some([Value::String(a), Value::String(b)]) => Ok((a.clone(), b.clone())),
            _ => err(&at, "expected a pair of ids"),
        }
    }

    fn bool_or(&self, key: &str, default: bool) -> Result<bool, SchemaError> {
        match self.opt(key) {
            None => Ok(default),
            Some(Value::Bool(b)) => Ok(*b),
            Some(_) => err(&self.ptr(key), "expected a boolean"),
        }
    }
}

fn enum_value<T: serde::de::DeserializeOwned>(v: &Value, at: &str, what: &str) -> Result<T, SchemaError> {
    serde_json::from_value(v.clone()).or_else(|_| err(at, format!("invalid {what} {v}")))
}

fn parse_kind(step: &Obj<'_>, kind: &str) -> Result<StepKind, SchemaError> {
    let args_v = step.get("args")?;
    let a = Obj::new(args_v, &step.ptr("args"))?;
    let lc_selector = || -> Result<Option<LcSelector>, SchemaError> {
        match step.opt("selector") {
            None => err(&step.at, "two-valued intersection `meet_lc` needs a `selector`"),
            Some(v) => enum_value(v, &step.ptr("selector"), "line-circle selector").map(Some),
        }
    };
    let cc_selector = || -> Result<Option<CcSelector>, SchemaError> {
        match step.opt("selector") {
            None => err(&step.at, "two-valued intersection `meet_cc` needs a `selector`"),
            Some(v) => enum_value(v, &step.ptr("selector"), "circle-circle selector").map(Some),
        }
    };
    let k = match kind {
        "given" => {
            let role = a.str("role")?;
            a.only(if role == "coefficient" { &["role", "name"] } else { &["role"] })?;
            StepKind::Given(match role.as_str() {
                "origin" => GivenRole::Origin,
                "unit_on_axis" => GivenRole::UnitOnAxis,
                "unit_on_co_axis" => GivenRole::UnitOnCoAxis,
                "free" => GivenRole::Free,
                "coefficient" => GivenRole::Coeff(a.str("name")?),
                other => return err(&a.ptr("role"), format!("unknown role `{other}`")),
            })
        }
        "line" | "midpoint" => {
            a.only(&["p", "q"])?;
            let (p, q) = (a.str("p")?, a.str("q")?);
            if kind == "line" {
                StepKind::Line { p, q }
            } else {
                StepKind::Midpoint { p, q }
            }
        }
        "circle" => {
            a.only(&["center", "through", "allow_zero"])?;
            StepKind::Circle {
                center: a.str("center")?,
                through: a.str("through")?,
                allow_zero: a.bool_or("allow_zero", false)?,
            }
        }
        "meet_ll" => {
            a.only(&["l1", "l2"])?;
            StepKind::MeetLL {
                l1: a.str("l1")?,
                l2: a.str("l2")?,
            }
        }
        "meet_lc" => {
            a.only(&["line", "circle"])?;
            StepKind::MeetLC {
                line: a.str("line")?,
                circle: a.str("circle")?,
                selector: lc_selector()?,
            }
        }
        "meet_cc" => {
            a.only(&["c1", "c2"])?;
            StepKind::MeetCC {
                c1: a.str("c1")?,
                c2: a.str("c2")?,
                selector: cc_selector()?,
            }
        }
        "parallel_through" | "perp_through" => {
            a.only(&["line", "point"])?;
            let (line, point) = (a.str("line")?, a.str("point")?);
            if kind == "parallel_through" {
                StepKind::ParallelThrough { line, point }
            } else {
                StepKind::PerpThrough { line, point }
            }
        }
        "transfer_segment" => {
            a.only(&["from", "at", "along"])?;
            StepKind::TransferSegment {
                from: a.pair("from")?,
                at: a.str("at")?,
                along: a.str("along")?,
            }
        }
        "mean_proportional" => {
            a.only(&["first", "second"])?;
            StepKind::MeanProportional {
                first: a.pair("first")?,
                second: a.pair("second")?,
            }
        }
        other => return err(&step.ptr("kind"), format!("unknown step kind `{other}`")),
    };
    if step.opt("selector").is_some()
        && !matches!(k, StepKind::MeetLC { .. } | StepKind::MeetCC { .. })
    {
        return err(&step.ptr("selector"), format!("`{kind}` takes no selector"));
    }
    Ok(k)
}

fn parse_step(v: &Value, at: &str) -> Result<Step, SchemaError> {
    let o = Obj::new(v, at)?;
    o.only(&["id", "kind", "args", "selector", "guard", "degenerate_as", "gadget"])?;
    let kind = parse_kind(&o, &o.str("kind")?)?;
    let guard = match o.opt("guard") {
        None => None,
        Some(g) => {
            let g = Obj::new(g, &o.ptr("guard"))?;
            g.only(&["origin", "toward"])?;
            Some(RayGuard {
                origin: g.str("origin")?,
                toward: g.str("toward")?,
            })
        }
    };
    let degenerate_as: Option<Degeneracy> = match o.opt("degenerate_as") {
        None => None,
        Some(d) => Some(enum_value(d, &o.ptr("degenerate_as"), "degeneracy")?),
    };
    Ok(Step {
        id: o.str("id")?,
        kind,
        guard,
        degenerate_as,
        gadget: o.opt_str("gadget")?,
    })
}

fn parse_metadata(v: Option<&Value>) -> Result<Metadata, SchemaError> {
    let Some(v) = v else {
        return Ok(Metadata::default());
    };
    let o = Obj::new(v, "/metadata")?;
    o.only(&["source", "schedule", "layout", "share", "step_counts"])?;
    let share = match o.opt("share") {
        None => None,
        Some(Value::Bool(b)) => Some(*b),
        Some(_) => return err(&o.ptr("share"), "expected a boolean"),
    };
    let mut step_counts = BTreeMap::new();
    if let Some(c) = o.opt("step_counts") {
        let c = Obj::new(c, &o.ptr("step_counts"))?;
        for (k, v) in c.map {
            match v.as_u64() {
                Some(n) => {
                    step_counts.insert(k.clone(), n as usize);
                }
                None => return err(&c.ptr(k), "expected a count"),
            }
        }
    }
    Ok(Metadata {
        source: o.opt_str("source")?,
        schedule: o.opt_str("schedule")?,
        layout: o.opt_str("layout")?,
        share,
        step_counts,
    })
}

fn defect_pointer(d: &Defect) -> String {
    match (d.index, d.kind) {
        (Some(i), _) => format!("/steps/{i}"),
        (None, DefectKind::BadOutput) => "/output".into(),
        (None, DefectKind::BadFreeInput) => "/inputs/free".into(),
        (None, _) => "/steps".into(),
    }
}

/// Structural decoding only; see [`program_from_value`] for validation.
pub fn decode_program(v: &Value) -> Result<Program, SchemaError> {
    let root = Obj::new(v, "")?;
    root.only(&["version", "inputs", "steps", "output", "metadata"])?;
    match root.get("version")?.as_u64() {
        Some(SCHEMA_VERSION) => {}
        _ => return err("/version", format!("unsupported version {}", root.get("version")?)),
    }
    let inputs = Obj::new(root.get("inputs")?, "/inputs")?;
    inputs.only(&["free", "coefficients"])?;
    let mut coefficients = Vec::new();
    if let Some(cs) = inputs.opt("coefficients") {
        let Some(items) = cs.as_array() else {
            return err("/inputs/coefficients", "expected an array");
        };
        for (i, c) in items.iter().enumerate() {
            let c = Obj::new(c, &format!("/inputs/coefficients/{i}"))?;
            c.only(&["name", "default"])?;
            let default = match c.opt_str("default")? {
                None => None,
                Some(t) => match parse_rational(&t) {
                    Some(r) => Some(r),
                    None => return err(&c.ptr("default"), format!("`{t}` is not a rational")),
                },
            };
            coefficients.push(CoeffInput {
                name: c.str("name")?,
                default,
            });
        }
    }
    let Some(steps_v) = root.get("steps")?.as_array() else {
        return err("/steps", "expected an array");
    };
    let steps = steps_v
        .iter()
        .enumerate()
        .map(|(i, s)| parse_step(s, &format!("/steps/{i}")))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(Program {
        steps,
        inputs: Inputs {
            free: inputs.str("free")?,
            coefficients,
        },
        output: root.str("output")?,
        metadata: parse_metadata(root.opt("metadata"))?,
    })
}

/// Decodes and validates; the first defect is reported at its step.
pub fn program_from_value(v: &Value) -> Result<Program, SchemaError> {
    let p = decode_program(v)?;
    if let Err(defects) = validate(&p) {
        let d = &defects[0];
        return err(&defect_pointer(d), d.message.clone());
    }
    Ok(p)
}

pub fn program_from_json(text: &str) -> Result<Program, SchemaError> {
    let v: Value = serde_json::from_str(text).or_else(|e| err("", format!("invalid JSON: {e}")))?;
    program_from_value(&v)
}

fn xy(p: &Point<f64>) -> Value {
    json!([p.x, p.y])
}

/// Float-exported figure: every object in program order.
pub fn figure_to_value(fig: &Figure<f64>) -> Value {
    let objects: Vec<Value> = fig
        .objects
        .iter()
        .map(|(id, o)| match o {
            GeoObject::Point(p) => json!({"id": id, "kind": "point", "at": xy(p)}),
            GeoObject::Line(l) => json!({"id": id, "kind": "line", "p": xy(&l.p), "q": xy(&l.q)}),
            GeoObject::Circle(c) => json!({
                "id": id,
                "kind": "circle",
                "center": xy(&c.center),
                "through": xy(&c.through),
            }),
        })
        .collect();
    json!({"output_id": fig.output_id, "output": fig.output, "objects": objects})
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compile::{compile_source, CompileOptions};
    use crate::expr::CoeffEnv;
    use num_rational::BigRational;

    fn x2() -> Program {
        compile_source("x^2", &CompileOptions::default()).unwrap()
    }

    #[test]
    fn round_trip() {
        let opts = CompileOptions {
            defaults: CoeffEnv::new().with("a", BigRational::new(1.into(), 3.into())).unwrap(),
            ..Default::default()
        };
        for src in ["x^2", "a*x + 1/x", "sqrt(x - 1/2)"] {
            let p = compile_source(src, &opts).unwrap();
            let text = program_to_json(&p);
            assert_eq!(program_from_json(&text).unwrap(), p, "{src}");
            assert_eq!(program_to_json(&program_from_json(&text).unwrap()), text);
        }
    }

    #[test]
    fn fixed_field_order() {
        let text = program_to_json(&x2());
        let pos = |k: &str| text.find(&format!("\"{k}\"")).unwrap();
        assert!(pos("version") < pos("inputs"));
        assert!(pos("inputs") < pos("steps"));
        assert!(pos("steps") < pos("output"));
        assert!(pos("output") < pos("metadata"));
    }

    #[test]
    fn rejects_other_versions() {
        let mut v = program_to_value(&x2());
        v["version"] = json!(2);
        let e = program_from_value(&v).unwrap_err();
        assert!(e.message.contains("unsupported version"));
        assert_eq!(e.pointer, "/version");
    }

    #[test]
    fn missing_selector_points_at_step() {
        let p = x2();
        let i = p
            .steps
            .iter()
            .position(|s| matches!(s.kind, StepKind::MeetLC { .. }))
            .unwrap();
        let mut v = program_to_value(&p);
        v["steps"][i].as_object_mut().unwrap().remove("selector");
        let e = program_from_value(&v).unwrap_err();
        assert_eq!(e.pointer, format!("/steps/{i}"));
    }

    #[test]
    fn reports_bad_reference_and_fields() {
        let mut v = program_to_value(&x2());
        v["steps"][4]["args"]["p"] = json!("nowhere");
        assert_eq!(program_from_value(&v).unwrap_err().pointer, "/steps/4");
        let mut v = program_to_value(&x2());
        v["steps"][2]["colour"] = json!("red");
        assert_eq!(program_from_value(&v).unwrap_err().pointer, "/steps/2/colour");
        let mut v = program_to_value(&x2());
        v["steps"][1]["kind"] = json!("spiral");
        assert_eq!(program_from_value(&v).unwrap_err().pointer, "/steps/1/kind");
    }
}
