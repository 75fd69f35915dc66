//! Named strategies selected at runtime: numeric backends, power schedules
//! and product/quotient gadget layouts.

use std::collections::BTreeMap;
use std::marker::PhantomData;
use std::sync::Arc;

use num_rational::BigRational;
use thiserror::Error;

use crate::compile::{CompileOptions, GadgetLayout, Layout};
use crate::construct::{interpret, Figure, Program, ScalarFigure, StepError};
use crate::expr::{eval_oracle, CoeffEnv, EvalError, Expr, PowerSchedule, Schedule};
use crate::kernel::{BackendKind, Field, IntervalReal, Scalar, TowerElem};

/// A numeric backend usable without knowing its field type.
pub trait Backend: Send + Sync {
    fn name(&self) -> &'static str;
    fn kind(&self) -> BackendKind;
    fn scalar(&self, r: &BigRational) -> Scalar;
    fn interpret(
        &self,
        program: &Program,
        x: &BigRational,
        coeffs: &CoeffEnv,
    ) -> Result<ScalarFigure, StepError>;
    fn oracle(&self, e: &Expr, x: &BigRational, coeffs: &CoeffEnv) -> Result<Scalar, EvalError>;
}

trait WrapFigure: Field {
    fn wrap(fig: Figure<Self>) -> ScalarFigure;
}

impl WrapFigure for f64 {
    fn wrap(fig: Figure<Self>) -> ScalarFigure {
        ScalarFigure::F64(fig)
    }
}

impl WrapFigure for IntervalReal {
    fn wrap(fig: Figure<Self>) -> ScalarFigure {
        ScalarFigure::Interval(fig)
    }
}

impl WrapFigure for TowerElem {
    fn wrap(fig: Figure<Self>) -> ScalarFigure {
        ScalarFigure::Exact(fig)
    }
}

struct FieldBackend<F>(PhantomData<fn() -> F>);

impl<F: WrapFigure> Backend for FieldBackend<F> {
    fn name(&self) -> &'static str {
        F::KIND.name()
    }

    fn kind(&self) -> BackendKind {
        F::KIND
    }

    fn scalar(&self, r: &BigRational) -> Scalar {
        F::from_rational(r).into_scalar()
    }

    fn interpret(
        &self,
        program: &Program,
        x: &BigRational,
        coeffs: &CoeffEnv,
    ) -> Result<ScalarFigure, StepError> {
        interpret(program, &F::from_rational(x), coeffs).map(F::wrap)
    }

    fn oracle(&self, e: &Expr, x: &BigRational, coeffs: &CoeffEnv) -> Result<Scalar, EvalError> {
        eval_oracle(e, &F::from_rational(x), coeffs).map(F::into_scalar)
    }
}

fn field_backend<F: WrapFigure>() -> Arc<dyn Backend> {
    Arc::new(FieldBackend::<F>(PhantomData))
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("unknown {what} `{name}` (available: {})", .available.join(", "))]
pub struct UnknownStrategy {
    pub what: &'static str,
    pub name: String,
    pub available: Vec<String>,
}

#[derive(Clone, Default)]
pub struct Registry {
    backends: BTreeMap<String, Arc<dyn Backend>>,
    schedules: BTreeMap<String, Arc<dyn PowerSchedule>>,
    layouts: BTreeMap<String, Arc<dyn GadgetLayout>>,
}

fn lookup<T: ?Sized>(
    map: &BTreeMap<String, Arc<T>>,
    what: &'static str,
    name: &str,
) -> Result<Arc<T>, UnknownStrategy> {
    map.get(name).cloned().ok_or_else(|| UnknownStrategy {
        what,
        name: name.to_string(),
        available: map.keys().cloned().collect(),
    })
}

impl Registry {
    /// Every built-in strategy; `float` is an alias of `f64`.
    pub fn builtin() -> Registry {
        let mut r = Registry::default();
        r.register_backend("f64", field_backend::<f64>());
        r.register_backend("float", field_backend::<f64>());
        r.register_backend("interval", field_backend::<IntervalReal>());
        r.register_backend("exact", field_backend::<TowerElem>());
        for s in Schedule::ALL {
            r.register_schedule(s.name(), s.arc());
        }
        for l in Layout::ALL {
            r.register_layout(l.name(), l.arc());
        }
        r
    }

    pub fn register_backend(&mut self, name: &str, b: Arc<dyn Backend>) {
        self.backends.insert(name.to_string(), b);
    }

    pub fn register_schedule(&mut self, name: &str, s: Arc<dyn PowerSchedule>) {
        self.schedules.insert(name.to_string(), s);
    }

    pub fn register_layout(&mut self, name: &str, l: Arc<dyn GadgetLayout>) {
        self.layouts.insert(name.to_string(), l);
    }

    pub fn backend(&self, name: &str) -> Result<Arc<dyn Backend>, UnknownStrategy> {
        lookup(&self.backends, "backend", name)
    }

    pub fn schedule(&self, name: &str) -> Result<Arc<dyn PowerSchedule>, UnknownStrategy> {
        lookup(&self.schedules, "schedule", name)
    }

    pub fn layout(&self, name: &str) -> Result<Arc<dyn GadgetLayout>, UnknownStrategy> {
        lookup(&self.layouts, "layout", name)
    }

    pub fn backend_names(&self) -> Vec<&str> {
        self.backends.keys().map(String::as_str).collect()
    }

    pub fn schedule_names(&self) -> Vec<&str> {
        self.schedules.keys().map(String::as_str).collect()
    }

    pub fn layout_names(&self) -> Vec<&str> {
        self.layouts.keys().map(String::as_str).collect()
    }

    /// Compile options from strategy names; `None` keeps the default.
    pub fn compile_options(
        &self,
        schedule: Option<&str>,
        layout: Option<&str>,
        share: bool,
    ) -> Result<CompileOptions, UnknownStrategy> {
        let mut opts = CompileOptions {
            share,
            ..Default::default()
        };
        if let Some(s) = schedule {
            opts.schedule = self.schedule(s)?;
        }
        if let Some(l) = layout {
            opts.layout = self.layout(l)?;
        }
        Ok(opts)
    }
}
