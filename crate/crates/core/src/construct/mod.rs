//! The construction IR: straight-line programs of ruler-and-compass steps.
//!
//! Every step defines exactly one object (point, line or circle) under a
//! fresh id and may only refer to ids defined before it. Macro steps
//! (midpoint, parallel, perpendicular, segment transfer, mean proportional)
//! have analytic semantics in [`interpret`] and classical primitive
//! realizations in [`expand`].

mod census;
mod expand;
mod interpret;
mod validate;

use std::collections::BTreeMap;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use crate::kernel::{CcSelector, LcSelector};

pub use census::{step_census, Census};
pub use expand::expand;
pub use interpret::{
    interpret, interpret_exact, interpret_scalar, Figure, GeoObject, ScalarFigure, StepError,
    StepErrorKind,
};
pub use validate::{validate, Defect, DefectKind};

pub type Id = String;

/// Default upper bound on program length.
pub const DEFAULT_STEP_CAP: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ObjKind {
    Point,
    Line,
    Circle,
}

impl ObjKind {
    pub fn name(self) -> &'static str {
        match self {
            ObjKind::Point => "point",
            ObjKind::Line => "line",
            ObjKind::Circle => "circle",
        }
    }
}

/// Where a given point sits in the scene.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GivenRole {
    /// `(0, 0)`.
    Origin,
    /// `(1, 0)`, fixing the unit segment.
    UnitOnAxis,
    /// `(0, 1)`, the unit laid on the perpendicular semi-axis.
    UnitOnCoAxis,
    /// `(x, 0)`: the free point on the ray from the origin through the unit.
    Free,
    /// `(value, 0)`: endpoint of a coefficient segment on the same ray.
    Coeff(String),
}

/// The result point must lie on the closed ray from `origin` through
/// `toward`; otherwise the step fails with a negative transfer.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RayGuard {
    pub origin: Id,
    pub toward: Id,
}

/// How a geometric degeneracy at a step is reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Degeneracy {
    /// The step belongs to a quotient gadget; any degeneracy means a zero divisor.
    DivisionDegenerate,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum StepKind {
    Given(GivenRole),
    Line {
        p: Id,
        q: Id,
    },
    Circle {
        center: Id,
        through: Id,
        allow_zero: bool,
    },
    MeetLL {
        l1: Id,
        l2: Id,
    },
    MeetLC {
        line: Id,
        circle: Id,
        selector: Option<LcSelector>,
    },
    MeetCC {
        c1: Id,
        c2: Id,
        selector: Option<CcSelector>,
    },
    Midpoint {
        p: Id,
        q: Id,
    },
    ParallelThrough {
        line: Id,
        point: Id,
    },
    PerpThrough {
        line: Id,
        point: Id,
    },
    /// Places at `at`, along the orientation of `along`, a segment
    /// congruent to `from` (Euclid I.2 followed by a compass cut).
    TransferSegment {
        from: (Id, Id),
        at: Id,
        along: Id,
    },
    /// For collinear `f, g, h` with `g` between, the point on the left
    /// perpendicular at `g` at distance `√(|fg|·|gh|)`.
    MeanProportional {
        first: (Id, Id),
        second: (Id, Id),
    },
}

impl StepKind {
    pub fn name(&self) -> &'static str {
        match self {
            StepKind::Given(_) => "given",
            StepKind::Line { .. } => "line",
            StepKind::Circle { .. } => "circle",
            StepKind::MeetLL { .. } => "meet_ll",
            StepKind::MeetLC { .. } => "meet_lc",
            StepKind::MeetCC { .. } => "meet_cc",
            StepKind::Midpoint { .. } => "midpoint",
            StepKind::ParallelThrough { .. } => "parallel_through",
            StepKind::PerpThrough { .. } => "perp_through",
            StepKind::TransferSegment { .. } => "transfer_segment",
            StepKind::MeanProportional { .. } => "mean_proportional",
        }
    }

    pub fn is_macro(&self) -> bool {
        matches!(
            self,
            StepKind::Midpoint { .. }
                | StepKind::ParallelThrough { .. }
                | StepKind::PerpThrough { .. }
                | StepKind::TransferSegment { .. }
                | StepKind::MeanProportional { .. }
        )
    }

    pub fn output_kind(&self) -> ObjKind {
        match self {
            StepKind::Line { .. } | StepKind::ParallelThrough { .. } | StepKind::PerpThrough { .. } => {
                ObjKind::Line
            }
            StepKind::Circle { .. } => ObjKind::Circle,
            _ => ObjKind::Point,
        }
    }

    /// Referenced ids with the object kind each must have.
    pub fn refs(&self) -> Vec<(&Id, ObjKind)> {
        use ObjKind::*;
        match self {
            StepKind::Given(_) => vec![],
            StepKind::Line { p, q } | StepKind::Midpoint { p, q } => vec![(p, Point), (q, Point)],
            StepKind::Circle { center, through, .. } => vec![(center, Point), (through, Point)],
            StepKind::MeetLL { l1, l2 } => vec![(l1, Line), (l2, Line)],
            StepKind::MeetLC { line, circle, .. } => vec![(line, Line), (circle, Circle)],
            StepKind::MeetCC { c1, c2, .. } => vec![(c1, Circle), (c2, Circle)],
            StepKind::ParallelThrough { line, point } | StepKind::PerpThrough { line, point } => {
                vec![(line, Line), (point, Point)]
            }
            StepKind::TransferSegment { from, at, along } => {
                vec![(&from.0, Point), (&from.1, Point), (at, Point), (along, Line)]
            }
            StepKind::MeanProportional { first, second } => vec![
                (&first.0, Point),
                (&first.1, Point),
                (&second.0, Point),
                (&second.1, Point),
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Step {
    pub id: Id,
    pub kind: StepKind,
    pub guard: Option<RayGuard>,
    pub degenerate_as: Option<Degeneracy>,
    /// Label of the compiler gadget that emitted the step, e.g. `mul#2`.
    pub gadget: Option<String>,
}

impl Step {
    pub fn new(id: impl Into<Id>, kind: StepKind) -> Step {
        Step {
            id: id.into(),
            kind,
            guard: None,
            degenerate_as: None,
            gadget: None,
        }
    }

    pub fn with_guard(mut self, origin: &str, toward: &str) -> Step {
        self.guard = Some(RayGuard {
            origin: origin.to_string(),
            toward: toward.to_string(),
        });
        self
    }

    pub fn with_gadget(mut self, gadget: Option<String>) -> Step {
        self.gadget = gadget;
        self
    }

    pub fn with_degeneracy(mut self, d: Option<Degeneracy>) -> Step {
        self.degenerate_as = d;
        self
    }

    /// All referenced ids including the guard's.
    pub fn all_refs(&self) -> Vec<(&Id, ObjKind)> {
        let mut refs = self.kind.refs();
        if let Some(g) = &self.guard {
            refs.push((&g.origin, ObjKind::Point));
            refs.push((&g.toward, ObjKind::Point));
        }
        refs
    }
}

/// A coefficient segment the program reads, with an optional default length.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CoeffInput {
    pub name: String,
    pub default: Option<BigRational>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Inputs {
    /// Id of the free point `X`.
    pub free: Id,
    pub coefficients: Vec<CoeffInput>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct Metadata {
    pub source: Option<String>,
    pub schedule: Option<String>,
    pub layout: Option<String>,
    pub share: Option<bool>,
    /// Step counts by kind at emission time.
    pub step_counts: BTreeMap<String, usize>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Program {
    pub steps: Vec<Step>,
    pub inputs: Inputs,
    /// Id of `Y′`, whose ordinate is the function value.
    pub output: Id,
    pub metadata: Metadata,
}

impl Program {
    pub fn step(&self, id: &str) -> Option<&Step> {
        self.steps.iter().find(|s| s.id == id)
    }

    pub fn coefficient_names(&self) -> Vec<String> {
        self.inputs.coefficients.iter().map(|c| c.name.clone()).collect()
    }

    pub fn has_macros(&self) -> bool {
        self.steps.iter().any(|s| s.kind.is_macro())
    }

    pub fn refresh_step_counts(&mut self) {
        self.metadata.step_counts = step_census(self).by_kind;
    }
}
