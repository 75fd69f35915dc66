use std::collections::HashMap;
use std::fmt;

use num_rational::BigRational;
use serde::Serialize;

use super::{Degeneracy, GivenRole, Id, Program, Step, StepKind};
use crate::expr::CoeffEnv;
use crate::kernel::geom::{intersect_circle_circle, intersect_line_circle, intersect_line_line};
use crate::kernel::{
    CircleObj, Field, GeomError, IntervalReal, KernelError, LineObj, Point, Scalar, Sign, TowerElem,
};

#[derive(Debug, Clone, PartialEq)]
pub enum GeoObject<F> {
    Point(Point<F>),
    Line(LineObj<F>),
    Circle(CircleObj<F>),
}

impl<F: Field> GeoObject<F> {
    pub fn to_f64(&self) -> GeoObject<f64> {
        let p = |pt: &Point<F>| {
            let (x, y) = pt.to_f64();
            Point::new(x, y)
        };
        match self {
            GeoObject::Point(a) => GeoObject::Point(p(a)),
            GeoObject::Line(l) => GeoObject::Line(LineObj { p: p(&l.p), q: p(&l.q) }),
            GeoObject::Circle(c) => GeoObject::Circle(CircleObj {
                center: p(&c.center),
                through: p(&c.through),
            }),
        }
    }

    fn as_point(&self) -> Option<&Point<F>> {
        match self {
            GeoObject::Point(p) => Some(p),
            _ => None,
        }
    }
}

/// Every object of a program evaluated at one input, in program order.
#[derive(Debug, Clone, PartialEq)]
pub struct Figure<F> {
    pub objects: Vec<(Id, GeoObject<F>)>,
    pub output_id: Id,
    /// Ordinate of the output point.
    pub output: F,
}

impl<F: Field> Figure<F> {
    pub fn object(&self, id: &str) -> Option<&GeoObject<F>> {
        self.objects.iter().find(|(k, _)| k == id).map(|(_, o)| o)
    }

    pub fn point(&self, id: &str) -> Option<&Point<F>> {
        self.object(id).and_then(GeoObject::as_point)
    }

    pub fn output_point(&self) -> &Point<F> {
        self.point(&self.output_id).expect("output is a point")
    }

    /// Float export for rendering and transport.
    pub fn to_f64(&self) -> Figure<f64> {
        Figure {
            objects: self.objects.iter().map(|(k, o)| (k.clone(), o.to_f64())).collect(),
            output_id: self.output_id.clone(),
            output: self.output.to_f64(),
        }
    }
}

/// A figure from whichever backend was selected at runtime.
#[derive(Debug, Clone)]
pub enum ScalarFigure {
    F64(Figure<f64>),
    Interval(Figure<IntervalReal>),
    Exact(Figure<TowerElem>),
}

impl ScalarFigure {
    pub fn output(&self) -> Scalar {
        match self {
            ScalarFigure::F64(f) => f.output.into_scalar(),
            ScalarFigure::Interval(f) => f.output.clone().into_scalar(),
            ScalarFigure::Exact(f) => f.output.clone().into_scalar(),
        }
    }

    pub fn to_f64(&self) -> Figure<f64> {
        match self {
            ScalarFigure::F64(f) => f.clone(),
            ScalarFigure::Interval(f) => f.to_f64(),
            ScalarFigure::Exact(f) => f.to_f64(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StepErrorKind {
    ParallelLines,
    CoincidentLines,
    NoIntersection,
    CoincidentPoints,
    CoincidentCircles,
    DegenerateCircle,
    DivisionDegenerate,
    NegativeTransfer,
    NegativeInput,
    MissingCoefficient,
    TowerDepthExceeded,
    PrecisionExhausted,
    ArithmeticFailure,
    MalformedProgram,
}

impl StepErrorKind {
    pub fn name(self) -> &'static str {
        match self {
            StepErrorKind::ParallelLines => "parallel_lines",
            StepErrorKind::CoincidentLines => "coincident_lines",
            StepErrorKind::NoIntersection => "no_intersection",
            StepErrorKind::CoincidentPoints => "coincident_points",
            StepErrorKind::CoincidentCircles => "coincident_circles",
            StepErrorKind::DegenerateCircle => "degenerate_circle",
            StepErrorKind::DivisionDegenerate => "division_degenerate",
            StepErrorKind::NegativeTransfer => "negative_transfer",
            StepErrorKind::NegativeInput => "negative_input",
            StepErrorKind::MissingCoefficient => "missing_coefficient",
            StepErrorKind::TowerDepthExceeded => "tower_depth_exceeded",
            StepErrorKind::PrecisionExhausted => "precision_exhausted",
            StepErrorKind::ArithmeticFailure => "arithmetic_failure",
            StepErrorKind::MalformedProgram => "malformed_program",
        }
    }

    fn is_geometric(self) -> bool {
        matches!(
            self,
            StepErrorKind::ParallelLines
                | StepErrorKind::CoincidentLines
                | StepErrorKind::NoIntersection
                | StepErrorKind::CoincidentPoints
                | StepErrorKind::CoincidentCircles
                | StepErrorKind::DegenerateCircle
                | StepErrorKind::ArithmeticFailure
        )
    }
}

impl From<&KernelError> for StepErrorKind {
    fn from(e: &KernelError) -> Self {
        match e {
            KernelError::TowerDepthExceeded { .. } => StepErrorKind::TowerDepthExceeded,
            KernelError::PrecisionExhausted => StepErrorKind::PrecisionExhausted,
            _ => StepErrorKind::ArithmeticFailure,
        }
    }
}

impl From<&GeomError> for StepErrorKind {
    fn from(e: &GeomError) -> Self {
        match e {
            GeomError::Kernel(k) => k.into(),
            GeomError::ParallelLines => StepErrorKind::ParallelLines,
            GeomError::CoincidentLines => StepErrorKind::CoincidentLines,
            GeomError::NoIntersection => StepErrorKind::NoIntersection,
            GeomError::CoincidentCircles => StepErrorKind::CoincidentCircles,
            GeomError::CoincidentPoints => StepErrorKind::CoincidentPoints,
            GeomError::DegenerateCircle => StepErrorKind::DegenerateCircle,
        }
    }
}

/// The first step whose object could not be constructed.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepError {
    pub step: Id,
    pub index: usize,
    pub kind: StepErrorKind,
    pub detail: String,
}

impl fmt::Display for StepError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "step {} (`{}`): {}", self.index, self.step, self.kind.name())?;
        if !self.detail.is_empty() {
            write!(f, ": {}", self.detail)?;
        }
        Ok(())
    }
}

impl std::error::Error for StepError {}

struct Fail(StepErrorKind, String);

impl From<GeomError> for Fail {
    fn from(e: GeomError) -> Self {
        Fail((&e).into(), e.to_string())
    }
}

impl From<KernelError> for Fail {
    fn from(e: KernelError) -> Self {
        Fail((&e).into(), e.to_string())
    }
}

fn fail(kind: StepErrorKind, detail: impl Into<String>) -> Fail {
    Fail(kind, detail.into())
}

struct Env<'a, F> {
    index: HashMap<&'a str, usize>,
    objects: Vec<(Id, GeoObject<F>)>,
}

impl<F: Field> Env<'_, F> {
    fn get(&self, id: &str) -> Result<&GeoObject<F>, Fail> {
        self.index
            .get(id)
            .map(|&i| &self.objects[i].1)
            .ok_or_else(|| fail(StepErrorKind::MalformedProgram, format!("`{id}` is not defined")))
    }

    fn point(&self, id: &str) -> Result<&Point<F>, Fail> {
        match self.get(id)? {
            GeoObject::Point(p) => Ok(p),
            _ => Err(fail(StepErrorKind::MalformedProgram, format!("`{id}` is not a point"))),
        }
    }

    fn line(&self, id: &str) -> Result<&LineObj<F>, Fail> {
        match self.get(id)? {
            GeoObject::Line(l) => Ok(l),
            _ => Err(fail(StepErrorKind::MalformedProgram, format!("`{id}` is not a line"))),
        }
    }

    fn circle(&self, id: &str) -> Result<&CircleObj<F>, Fail> {
        match self.get(id)? {
            GeoObject::Circle(c) => Ok(c),
            _ => Err(fail(StepErrorKind::MalformedProgram, format!("`{id}` is not a circle"))),
        }
    }
}

fn on_axis<F: Field>(v: F) -> Point<F> {
    Point::new(v, F::zero())
}

fn missing_selector() -> Fail {
    fail(StepErrorKind::MalformedProgram, "intersection step without a selector")
}

fn eval_step<F: Field>(
    step: &Step,
    env: &Env<'_, F>,
    x: &F,
    coeffs: &CoeffEnv,
) -> Result<GeoObject<F>, Fail> {
    Ok(match &step.kind {
        StepKind::Given(role) => GeoObject::Point(match role {
            GivenRole::Origin => on_axis(F::zero()),
            GivenRole::UnitOnAxis => on_axis(F::one()),
            GivenRole::UnitOnCoAxis => Point::new(F::zero(), F::one()),
            GivenRole::Free => {
                if x.sign()? == Sign::Negative {
                    return Err(fail(StepErrorKind::NegativeInput, "x must be non-negative"));
                }
                on_axis(x.clone())
            }
            GivenRole::Coeff(name) => {
                let v = coeffs.get(name).ok_or_else(|| {
                    fail(StepErrorKind::MissingCoefficient, format!("no value for `{name}`"))
                })?;
                on_axis(F::from_rational(v))
            }
        }),
        StepKind::Line { p, q } => {
            GeoObject::Line(LineObj::new(env.point(p)?.clone(), env.point(q)?.clone())?)
        }
        StepKind::Circle {
            center,
            through,
            allow_zero,
        } => GeoObject::Circle(CircleObj::new(
            env.point(center)?.clone(),
            env.point(through)?.clone(),
            *allow_zero,
        )?),
        StepKind::MeetLL { l1, l2 } => {
            GeoObject::Point(intersect_line_line(env.line(l1)?, env.line(l2)?)?)
        }
        StepKind::MeetLC {
            line,
            circle,
            selector,
        } => {
            let sel = selector.ok_or_else(missing_selector)?;
            GeoObject::Point(intersect_line_circle(env.line(line)?, env.circle(circle)?, sel)?)
        }
        StepKind::MeetCC { c1, c2, selector } => {
            let sel = selector.ok_or_else(missing_selector)?;
            GeoObject::Point(intersect_circle_circle(env.circle(c1)?, env.circle(c2)?, sel)?)
        }
        StepKind::Midpoint { p, q } => {
            let (a, b) = (env.point(p)?, env.point(q)?);
            if a.coincides(b)? {
                return Err(GeomError::CoincidentPoints.into());
            }
            GeoObject::Point(a.midpoint(b))
        }
        StepKind::ParallelThrough { line, point } => {
            let r = env.point(point)?.clone();
            let q = r.add(&env.line(line)?.direction());
            GeoObject::Line(LineObj { p: r, q })
        }
        StepKind::PerpThrough { line, point } => {
            let r = env.point(point)?.clone();
            let q = r.add(&env.line(line)?.direction().perp());
            GeoObject::Line(LineObj { p: r, q })
        }
        StepKind::TransferSegment { from, at, along } => {
            let len = crate::kernel::geom::distance(env.point(&from.0)?, env.point(&from.1)?)?;
            let dir = env.line(along)?.direction();
            let k = len.div(&dir.norm()?)?;
            GeoObject::Point(env.point(at)?.add(&dir.scale(&k)))
        }
        StepKind::MeanProportional { first, second } => {
            let f = env.point(&first.0)?;
            let g = env.point(&first.1)?;
            let h = env.point(&second.1)?;
            let fh = h.sub(f);
            if f.coincides(h)? {
                return Err(GeomError::CoincidentPoints.into());
            }
            let fg = g.sub(f);
            let gh = h.sub(g);
            if !fg.cross(&fh).is_zero()? || fg.dot(&gh).sign()? == Sign::Negative {
                return Err(GeomError::NoIntersection.into());
            }
            let m = fg.norm()?.mul(&gh.norm()?).sqrt()?;
            let k = m.div(&fh.norm()?)?;
            GeoObject::Point(g.add(&fh.perp().scale(&k)))
        }
    })
}

fn check_guard<F: Field>(step: &Step, obj: &GeoObject<F>, env: &Env<'_, F>) -> Result<(), Fail> {
    let Some(g) = &step.guard else {
        return Ok(());
    };
    let Some(p) = obj.as_point() else {
        return Ok(());
    };
    let o = env.point(&g.origin)?;
    let t = env.point(&g.toward)?;
    if p.sub(o).dot(&t.sub(o)).sign()? == Sign::Negative {
        return Err(fail(
            StepErrorKind::NegativeTransfer,
            "difference would be negative",
        ));
    }
    Ok(())
}

/// Evaluates `program` at `x` with coefficient lengths from `coeffs`.
///
/// Steps run in order; the first failure is reported with its step id and
/// index. A program is assumed to have passed [`super::validate`]; dangling
/// references surface as `MalformedProgram`.
pub fn interpret<F: Field>(
    program: &Program,
    x: &F,
    coeffs: &CoeffEnv,
) -> Result<Figure<F>, StepError> {
    let mut env = Env {
        index: HashMap::with_capacity(program.steps.len()),
        objects: Vec::with_capacity(program.steps.len()),
    };
    for (i, step) in program.steps.iter().enumerate() {
        let result = eval_step(step, &env, x, coeffs).and_then(|obj| {
            check_guard(step, &obj, &env)?;
            Ok(obj)
        });
        match result {
            Ok(obj) => {
                env.index.insert(step.id.as_str(), i);
                env.objects.push((step.id.clone(), obj));
            }
            Err(Fail(mut kind, detail)) => {
                if step.degenerate_as == Some(Degeneracy::DivisionDegenerate) && kind.is_geometric() {
                    kind = StepErrorKind::DivisionDegenerate;
                }
                return Err(StepError {
                    step: step.id.clone(),
                    index: i,
                    kind,
                    detail,
                });
            }
        }
    }
    let output = env
        .point(&program.output)
        .map(|p| p.y.clone())
        .map_err(|Fail(kind, detail)| StepError {
            step: program.output.clone(),
            index: program.steps.len(),
            kind,
            detail,
        })?;
    Ok(Figure {
        objects: env.objects,
        output_id: program.output.clone(),
        output,
    })
}

/// Runs [`interpret`] on the backend `x` belongs to.
pub fn interpret_scalar(
    program: &Program,
    x: &Scalar,
    coeffs: &CoeffEnv,
) -> Result<ScalarFigure, StepError> {
    Ok(match x {
        Scalar::F64(v) => ScalarFigure::F64(interpret(program, v, coeffs)?),
        Scalar::Interval(v) => ScalarFigure::Interval(interpret(program, v, coeffs)?),
        Scalar::Exact(v) => ScalarFigure::Exact(interpret(program, v, coeffs)?),
    })
}

/// Convenience for exact evaluation at a rational input.
pub fn interpret_exact(
    program: &Program,
    x: &BigRational,
    coeffs: &CoeffEnv,
) -> Result<Figure<TowerElem>, StepError> {
    interpret(program, &TowerElem::from_rational(x.clone()), coeffs)
}
