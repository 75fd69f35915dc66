//! Expression-to-construction compiler.
//!
//! Every subexpression value `v` is realized as the point `(v, 0)` on the
//! axis through the origin and the unit. Sums and differences are segment
//! translations along the axis, products and quotients come from a
//! [`GadgetLayout`], square roots from a mean proportional. The final value is raised as the
//! ordinate of `Y′ = (x, f(x))`.

mod layout;

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::construct::{
    validate, CoeffInput, Defect, Degeneracy, GivenRole, Id, Inputs, Metadata, Program, Step,
    StepKind, DEFAULT_STEP_CAP,
};
use crate::kernel::LcSelector;
use crate::expr::{desugar, parse, CoeffEnv, Expr, ParseError, PowerSchedule, Schedule};

use layout::{onto_axis, onto_co_axis};
pub use layout::{GadgetLayout, Layout, ParallelTransport, QuarterCircle};

pub const ORIGIN: &str = "O";
pub const UNIT: &str = "U";
pub const UNIT_CO: &str = "V";
pub const FREE: &str = "X";
pub const AXIS: &str = "ax";
pub const CO_AXIS: &str = "co";
pub const REVERSED_AXIS: &str = "rax";
pub const VALUE: &str = "Y";
pub const PERPENDICULAR: &str = "perp";
pub const OUTPUT: &str = "Yp";

/// Upper bound on the node count of a power-expanded expression tree.
pub const MAX_EXPANDED_NODES: u64 = 4_000_000;

pub fn coefficient_id(name: &str) -> Id {
    format!("C_{name}")
}

#[derive(Clone)]
pub struct CompileOptions {
    pub schedule: Arc<dyn PowerSchedule>,
    pub layout: Arc<dyn GadgetLayout>,
    /// Reuse the construction of structurally equal subexpressions.
    pub share: bool,
    pub step_cap: usize,
    /// Default coefficient lengths recorded in the program inputs.
    pub defaults: CoeffEnv,
}

impl Default for CompileOptions {
    fn default() -> Self {
        CompileOptions {
            schedule: Schedule::default().arc(),
            layout: Layout::default().arc(),
            share: true,
            step_cap: DEFAULT_STEP_CAP,
            defaults: CoeffEnv::new(),
        }
    }
}

impl fmt::Debug for CompileOptions {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CompileOptions")
            .field("schedule", &self.schedule.name())
            .field("layout", &self.layout.name())
            .field("share", &self.share)
            .field("step_cap", &self.step_cap)
            .field("defaults", &self.defaults)
            .finish()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CompileError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("construction needs more than {cap} steps")]
    TooManySteps { cap: usize },
    #[error("compiler produced an ill-formed program: {}", .0.first().map(|d| d.to_string()).unwrap_or_default())]
    Internal(Vec<Defect>),
}

impl CompileError {
    /// Pipeline stage that failed.
    pub fn stage(&self) -> &'static str {
        match self {
            CompileError::Parse(_) => "parse",
            CompileError::TooManySteps { .. } | CompileError::Internal(_) => "compile",
        }
    }
}

/// Appends steps on behalf of the gadget currently being emitted.
pub struct Builder {
    steps: Vec<Step>,
    label: Option<String>,
    degenerate_as: Option<Degeneracy>,
    local: usize,
    gadgets: HashMap<&'static str, usize>,
    cap: usize,
}

impl Builder {
    fn new(cap: usize) -> Builder {
        Builder {
            steps: Vec::new(),
            label: None,
            degenerate_as: None,
            local: 0,
            gadgets: HashMap::new(),
            cap,
        }
    }

    /// Appends a step with a fresh id derived from the gadget label and `part`.
    pub fn push(&mut self, part: &str, kind: StepKind) -> Id {
        let id = match &self.label {
            Some(l) => format!("{l}.{part}{}", self.local),
            None => format!("{part}{}", self.local),
        };
        self.local += 1;
        self.push_named(id, kind)
    }

    fn push_named(&mut self, id: Id, kind: StepKind) -> Id {
        self.steps.push(Step {
            id: id.clone(),
            kind,
            guard: None,
            degenerate_as: self.degenerate_as,
            gadget: self.label.clone(),
        });
        id
    }

    fn guard_last(&mut self, origin: &str, toward: &str) {
        if let Some(s) = self.steps.pop() {
            self.steps.push(s.with_guard(origin, toward));
        }
    }

    fn open(&mut self, kind: &'static str, degenerate_as: Option<Degeneracy>) {
        let n = self.gadgets.entry(kind).or_default();
        self.label = Some(format!("{kind}#{n}"));
        *n += 1;
        self.degenerate_as = degenerate_as;
        self.local = 0;
    }

    fn close(&mut self) -> Result<(), CompileError> {
        self.label = None;
        self.degenerate_as = None;
        if self.steps.len() > self.cap {
            return Err(CompileError::TooManySteps { cap: self.cap });
        }
        Ok(())
    }

    fn given(&mut self, id: &str, role: GivenRole) {
        self.push_named(id.into(), StepKind::Given(role));
    }

    fn line(&mut self, id: &str, p: &str, q: &str) {
        self.push_named(
            id.into(),
            StepKind::Line {
                p: p.into(),
                q: q.into(),
            },
        );
    }

    /// `(a ± b, 0)`: the point `(a, b)` is found as the corner of the
    /// rectangle over `Pa` and the swung `b`, then turned down onto `along`
    /// about `Pa`. The reversed axis gives the difference.
    fn translate(&mut self, a: &Id, b: &Id, along: &str) -> Id {
        let qb = onto_co_axis(self, b);
        let up = self.push(
            "v",
            StepKind::ParallelThrough {
                line: CO_AXIS.into(),
                point: a.clone(),
            },
        );
        let across = self.push(
            "h",
            StepKind::ParallelThrough {
                line: AXIS.into(),
                point: qb,
            },
        );
        let corner = self.push("k", StepKind::MeetLL { l1: up, l2: across });
        let c = self.push(
            "c",
            StepKind::Circle {
                center: a.clone(),
                through: corner,
                allow_zero: true,
            },
        );
        self.push(
            "t",
            StepKind::MeetLC {
                line: along.into(),
                circle: c,
                selector: Some(LcSelector::Second),
            },
        )
    }
}

struct Compiler<'a> {
    b: Builder,
    layout: &'a dyn GadgetLayout,
    memo: Option<HashMap<Expr, Id>>,
}

impl Compiler<'_> {
    fn node(&mut self, e: &Expr) -> Result<Id, CompileError> {
        if let Some(id) = self.memo.as_ref().and_then(|m| m.get(e)) {
            return Ok(id.clone());
        }
        let id = match e {
            Expr::Unit => UNIT.into(),
            Expr::Var => FREE.into(),
            Expr::Coeff(name) => coefficient_id(name),
            Expr::Lit(n) => self.literal(n)?,
            Expr::Add(l, r) => {
                let (a, c) = (self.node(l)?, self.node(r)?);
                self.b.open("add", None);
                let id = self.b.translate(&a, &c, AXIS);
                self.b.close()?;
                id
            }
            Expr::Sub(l, r) => {
                let (a, c) = (self.node(l)?, self.node(r)?);
                self.b.open("sub", None);
                let id = self.b.translate(&a, &c, REVERSED_AXIS);
                self.b.guard_last(ORIGIN, UNIT);
                self.b.close()?;
                id
            }
            Expr::Mul(l, r) if **l == Expr::Unit => self.node(r)?,
            Expr::Mul(l, r) if **r == Expr::Unit => self.node(l)?,
            Expr::Mul(l, r) => {
                let (a, c) = (self.node(l)?, self.node(r)?);
                self.b.open("mul", None);
                let id = self.layout.mul(&mut self.b, &a, &c);
                self.b.close()?;
                id
            }
            Expr::Div(l, r) if **r == Expr::Unit => self.node(l)?,
            Expr::Div(l, r) => {
                let (a, c) = (self.node(l)?, self.node(r)?);
                self.b.open("div", Some(Degeneracy::DivisionDegenerate));
                let id = self.layout.div(&mut self.b, &a, &c);
                self.b.close()?;
                id
            }
            Expr::Sqrt(inner) => {
                let a = self.node(inner)?;
                self.b.open("sqrt", None);
                let h = self.b.translate(&UNIT.into(), &a, AXIS);
                let i = self.b.push(
                    "g",
                    StepKind::MeanProportional {
                        first: (ORIGIN.into(), UNIT.into()),
                        second: (UNIT.into(), h),
                    },
                );
                let across = self.b.push(
                    "h",
                    StepKind::PerpThrough {
                        line: CO_AXIS.into(),
                        point: i,
                    },
                );
                let q = self.b.push(
                    "p",
                    StepKind::MeetLL {
                        l1: across,
                        l2: CO_AXIS.into(),
                    },
                );
                let id = onto_axis(&mut self.b, &q);
                self.b.close()?;
                id
            }
            Expr::Pow(..) => unreachable!("powers are desugared before compilation"),
        };
        if let Some(m) = self.memo.as_mut() {
            m.insert(e.clone(), id.clone());
        }
        Ok(id)
    }

    /// Binary doubling from the unit.
    fn literal(&mut self, n: &BigUint) -> Result<Id, CompileError> {
        if n.is_zero() {
            return Ok(ORIGIN.into());
        }
        if n.is_one() {
            return Ok(UNIT.into());
        }
        let key = Expr::Lit(n.clone());
        if let Some(id) = self.memo.as_ref().and_then(|m| m.get(&key)) {
            return Ok(id.clone());
        }
        let half: BigUint = n >> 1u32;
        let h = self.literal(&half)?;
        self.b.open("lit", None);
        let mut id = self.b.translate(&h, &h, AXIS);
        if n.bit(0) {
            id = self.b.translate(&id, &UNIT.into(), AXIS);
        }
        self.b.close()?;
        if let Some(m) = self.memo.as_mut() {
            m.insert(key, id.clone());
        }
        Ok(id)
    }
}

/// Node count of `e` after power expansion, saturating.
fn expanded_size(e: &Expr) -> u64 {
    match e {
        Expr::Unit | Expr::Var | Expr::Lit(_) | Expr::Coeff(_) => 1,
        Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
            expanded_size(l).saturating_add(expanded_size(r)).saturating_add(1)
        }
        Expr::Sqrt(a) => expanded_size(a).saturating_add(1),
        Expr::Pow(b, n) => expanded_size(b).saturating_mul(u64::from(*n)).saturating_mul(2),
    }
}

/// Compiles `e` into a program whose output `Y′` has ordinate `e(x)`.
pub fn compile(e: &Expr, opts: &CompileOptions) -> Result<Program, CompileError> {
    if expanded_size(e) > MAX_EXPANDED_NODES {
        return Err(CompileError::TooManySteps { cap: opts.step_cap });
    }
    let flat = desugar(e, opts.schedule.as_ref());
    let names = flat.coefficients();
    let mut b = Builder::new(opts.step_cap);
    b.given(ORIGIN, GivenRole::Origin);
    b.given(UNIT, GivenRole::UnitOnAxis);
    b.given(UNIT_CO, GivenRole::UnitOnCoAxis);
    b.given(FREE, GivenRole::Free);
    for n in &names {
        b.given(&coefficient_id(n), GivenRole::Coeff(n.clone()));
    }
    b.line(AXIS, ORIGIN, UNIT);
    b.line(CO_AXIS, ORIGIN, UNIT_CO);
    b.line(REVERSED_AXIS, UNIT, ORIGIN);

    let mut c = Compiler {
        b,
        layout: opts.layout.as_ref(),
        memo: opts.share.then(HashMap::new),
    };
    let mut value = c.node(&flat)?;
    let mut b = c.b;
    if b.steps.last().is_some_and(|s| s.id == value && !matches!(s.kind, StepKind::Given(_))) {
        b.steps.last_mut().unwrap().id = VALUE.into();
        value = VALUE.into();
    }
    let level = onto_co_axis(&mut b, &value);
    let across = b.push(
        "h",
        StepKind::ParallelThrough {
            line: AXIS.into(),
            point: level,
        },
    );
    b.push_named(
        PERPENDICULAR.into(),
        StepKind::PerpThrough {
            line: AXIS.into(),
            point: FREE.into(),
        },
    );
    b.push_named(
        OUTPUT.into(),
        StepKind::MeetLL {
            l1: PERPENDICULAR.into(),
            l2: across,
        },
    );
    b.close()?;

    let mut program = Program {
        steps: b.steps,
        inputs: Inputs {
            free: FREE.into(),
            coefficients: names
                .iter()
                .map(|n| CoeffInput {
                    name: n.clone(),
                    default: opts.defaults.get(n).cloned(),
                })
                .collect(),
        },
        output: OUTPUT.into(),
        metadata: Metadata {
            source: Some(e.to_string()),
            schedule: Some(opts.schedule.name().to_string()),
            layout: Some(opts.layout.name().to_string()),
            share: Some(opts.share),
            step_counts: Default::default(),
        },
    };
    program.refresh_step_counts();
    validate(&program).map_err(CompileError::Internal)?;
    Ok(program)
}

/// Parse, desugar and compile in one call.
pub fn compile_source(text: &str, opts: &CompileOptions) -> Result<Program, CompileError> {
    let e = parse(text)?;
    let mut program = compile(&e, opts)?;
    program.metadata.source = Some(text.to_string());
    Ok(program)
}
