use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::{Builder, AXIS, CO_AXIS, ORIGIN, UNIT, UNIT_CO};
use crate::construct::{Id, StepKind};
use crate::kernel::LcSelector;

/// Ruler-and-compass realization of products and quotients of two
/// segment lengths laid on the axis. Implementations append steps through
/// the builder and return the id of the point `(result, 0)`.
pub trait GadgetLayout: Send + Sync {
    fn name(&self) -> &'static str;
    fn mul(&self, b: &mut Builder, lhs: &Id, rhs: &Id) -> Id;
    fn div(&self, b: &mut Builder, num: &Id, den: &Id) -> Id;
}

/// `(0, v)` from `(v, 0)` by a quarter turn of the compass about the origin.
pub(crate) fn onto_co_axis(b: &mut Builder, p: &Id) -> Id {
    let c = b.push(
        "c",
        StepKind::Circle {
            center: ORIGIN.into(),
            through: p.clone(),
            allow_zero: true,
        },
    );
    b.push(
        "q",
        StepKind::MeetLC {
            line: CO_AXIS.into(),
            circle: c,
            selector: Some(LcSelector::Second),
        },
    )
}

/// `(v, 0)` from `(0, v)`.
pub(crate) fn onto_axis(b: &mut Builder, p: &Id) -> Id {
    let c = b.push(
        "c",
        StepKind::Circle {
            center: ORIGIN.into(),
            through: p.clone(),
            allow_zero: true,
        },
    );
    b.push(
        "r",
        StepKind::MeetLC {
            line: AXIS.into(),
            circle: c,
            selector: Some(LcSelector::Second),
        },
    )
}

fn line(b: &mut Builder, p: &Id, q: &Id) -> Id {
    b.push("l", StepKind::Line { p: p.clone(), q: q.clone() })
}

fn meet(b: &mut Builder, l1: Id, l2: &str) -> Id {
    b.push("p", StepKind::MeetLL { l1, l2: l2.into() })
}

/// Vertical through a point on the axis or the diagonal.
fn vertical(b: &mut Builder, p: &Id) -> Id {
    b.push(
        "v",
        StepKind::ParallelThrough {
            line: CO_AXIS.into(),
            point: p.clone(),
        },
    )
}

/// Horizontal through a point on the co-axis or the diagonal.
fn horizontal(b: &mut Builder, p: &Id) -> Id {
    b.push(
        "h",
        StepKind::ParallelThrough {
            line: AXIS.into(),
            point: p.clone(),
        },
    )
}

/// Foot of `p` on `onto`, which is the axis or the co-axis.
fn foot(b: &mut Builder, p: &Id, onto: &str) -> Id {
    let l = b.push(
        "n",
        StepKind::PerpThrough {
            line: onto.into(),
            point: p.clone(),
        },
    );
    meet(b, l, onto)
}

/// The ray from the origin through `(1, s)`, where `s` is given at height
/// `level` on the co-axis or the diagonal.
fn slope_ray(b: &mut Builder, level: &Id) -> Id {
    let up = vertical(b, &UNIT.into());
    let across = horizontal(b, level);
    let corner = b.push("k", StepKind::MeetLL { l1: up, l2: across });
    line(b, &ORIGIN.into(), &corner)
}

/// Thales with the factors swung onto the co-axis by quarter circles. The
/// ray of slope `b` is cut by the vertical at `a` for a product, and by
/// the horizontal at `a` for a quotient.
#[derive(Debug, Clone, Copy, Default)]
pub struct QuarterCircle;

impl GadgetLayout for QuarterCircle {
    fn name(&self) -> &'static str {
        "quarter-circle"
    }

    fn mul(&self, b: &mut Builder, lhs: &Id, rhs: &Id) -> Id {
        let qb = onto_co_axis(b, rhs);
        let ray = slope_ray(b, &qb);
        let at = vertical(b, lhs);
        let p = b.push("p", StepKind::MeetLL { l1: ray, l2: at });
        let q = foot(b, &p, CO_AXIS);
        onto_axis(b, &q)
    }

    fn div(&self, b: &mut Builder, num: &Id, den: &Id) -> Id {
        let qb = onto_co_axis(b, den);
        let ray = slope_ray(b, &qb);
        let qa = onto_co_axis(b, num);
        let at = horizontal(b, &qa);
        let p = b.push("p", StepKind::MeetLL { l1: ray, l2: at });
        foot(b, &p, AXIS)
    }
}

/// The same Thales figure with lengths carried between axis and co-axis by
/// parallels through the diagonal instead of by circles.
#[derive(Debug, Clone, Copy, Default)]
pub struct ParallelTransport;

fn diagonal(b: &mut Builder) -> Id {
    let up = vertical(b, &UNIT.into());
    let across = horizontal(b, &UNIT_CO.into());
    let w = b.push("k", StepKind::MeetLL { l1: up, l2: across });
    line(b, &ORIGIN.into(), &w)
}

/// `(v, v)` from `(v, 0)`.
fn onto_diagonal(b: &mut Builder, diag: &Id, p: &Id) -> Id {
    let up = vertical(b, p);
    b.push(
        "d",
        StepKind::MeetLL {
            l1: up,
            l2: diag.clone(),
        },
    )
}

impl GadgetLayout for ParallelTransport {
    fn name(&self) -> &'static str {
        "parallel-transport"
    }

    fn mul(&self, b: &mut Builder, lhs: &Id, rhs: &Id) -> Id {
        let diag = diagonal(b);
        let db = onto_diagonal(b, &diag, rhs);
        let ray = slope_ray(b, &db);
        let at = vertical(b, lhs);
        let p = b.push("p", StepKind::MeetLL { l1: ray, l2: at });
        let across = b.push(
            "n",
            StepKind::PerpThrough {
                line: CO_AXIS.into(),
                point: p,
            },
        );
        let d = b.push("d", StepKind::MeetLL { l1: across, l2: diag });
        let down = vertical(b, &d);
        meet(b, down, AXIS)
    }

    fn div(&self, b: &mut Builder, num: &Id, den: &Id) -> Id {
        let diag = diagonal(b);
        let db = onto_diagonal(b, &diag, den);
        let ray = slope_ray(b, &db);
        let da = onto_diagonal(b, &diag, num);
        let at = horizontal(b, &da);
        let p = b.push("p", StepKind::MeetLL { l1: ray, l2: at });
        foot(b, &p, AXIS)
    }
}

/// The built-in layouts by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Layout {
    #[default]
    QuarterCircle,
    ParallelTransport,
}

impl Layout {
    pub const ALL: [Layout; 2] = [Layout::QuarterCircle, Layout::ParallelTransport];

    pub fn strategy(self) -> &'static dyn GadgetLayout {
        match self {
            Layout::QuarterCircle => &QuarterCircle,
            Layout::ParallelTransport => &ParallelTransport,
        }
    }

    pub fn arc(self) -> Arc<dyn GadgetLayout> {
        match self {
            Layout::QuarterCircle => Arc::new(QuarterCircle),
            Layout::ParallelTransport => Arc::new(ParallelTransport),
        }
    }

    pub fn name(self) -> &'static str {
        self.strategy().name()
    }
}

impl fmt::Display for Layout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Layout {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Layout::ALL
            .into_iter()
            .find(|l| l.name() == s)
            .ok_or_else(|| format!("unknown layout `{s}`"))
    }
}
