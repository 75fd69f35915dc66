//! Points, lines and circles over any [`Field`], with intersections whose
//! two-valued cases are resolved by explicit selectors.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::{Field, KernelError, Sign};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeomError {
    #[error(transparent)]
    Kernel(#[from] KernelError),
    #[error("lines are parallel")]
    ParallelLines,
    #[error("lines coincide")]
    CoincidentLines,
    #[error("objects do not intersect")]
    NoIntersection,
    #[error("circles coincide")]
    CoincidentCircles,
    #[error("defining points coincide")]
    CoincidentPoints,
    #[error("circle has zero radius")]
    DegenerateCircle,
}

/// Root order along the line's `p → q` orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LcSelector {
    First,
    Second,
}

/// Side of the oriented segment from the first center to the second.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CcSelector {
    Left,
    Right,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Point<F> {
    pub x: F,
    pub y: F,
}

impl<F: Field> Point<F> {
    pub fn new(x: F, y: F) -> Self {
        Point { x, y }
    }

    pub fn add(&self, o: &Self) -> Self {
        Point::new(self.x.add(&o.x), self.y.add(&o.y))
    }

    pub fn sub(&self, o: &Self) -> Self {
        Point::new(self.x.sub(&o.x), self.y.sub(&o.y))
    }

    pub fn scale(&self, k: &F) -> Self {
        Point::new(self.x.mul(k), self.y.mul(k))
    }

    pub fn dot(&self, o: &Self) -> F {
        self.x.mul(&o.x).add(&self.y.mul(&o.y))
    }

    pub fn cross(&self, o: &Self) -> F {
        self.x.mul(&o.y).sub(&self.y.mul(&o.x))
    }

    /// Counterclockwise quarter turn.
    pub fn perp(&self) -> Self {
        Point::new(self.y.neg(), self.x.clone())
    }

    pub fn midpoint(&self, o: &Self) -> Self {
        self.add(o).map(|c| c.half())
    }

    fn map(&self, f: impl Fn(&F) -> F) -> Self {
        Point::new(f(&self.x), f(&self.y))
    }

    pub fn coincides(&self, o: &Self) -> Result<bool, KernelError> {
        Ok(self.x.sub(&o.x).is_zero()? && self.y.sub(&o.y).is_zero()?)
    }

    /// Euclidean norm, avoiding a radical when the vector is axis-aligned.
    pub fn norm(&self) -> Result<F, KernelError> {
        if self.y.is_zero()? {
            return self.x.abs();
        }
        if self.x.is_zero()? {
            return self.y.abs();
        }
        self.dot(self).sqrt()
    }

    pub fn to_f64(&self) -> (f64, f64) {
        (self.x.to_f64(), self.y.to_f64())
    }
}

pub fn distance<F: Field>(a: &Point<F>, b: &Point<F>) -> Result<F, KernelError> {
    b.sub(a).norm()
}

/// An oriented line through two distinct points.
#[derive(Debug, Clone, PartialEq)]
pub struct LineObj<F> {
    pub p: Point<F>,
    pub q: Point<F>,
}

impl<F: Field> LineObj<F> {
    pub fn new(p: Point<F>, q: Point<F>) -> Result<Self, GeomError> {
        if p.coincides(&q)? {
            return Err(GeomError::CoincidentPoints);
        }
        Ok(LineObj { p, q })
    }

    pub fn direction(&self) -> Point<F> {
        self.q.sub(&self.p)
    }

    pub fn contains(&self, pt: &Point<F>) -> Result<bool, KernelError> {
        pt.sub(&self.p).cross(&self.direction()).is_zero()
    }

    /// Position of `pt` along the line in units of `q - p`.
    pub fn param_of(&self, pt: &Point<F>) -> Result<F, KernelError> {
        let d = self.direction();
        pt.sub(&self.p).dot(&d).div(&d.dot(&d))
    }

    pub fn at(&self, t: &F) -> Point<F> {
        self.p.add(&self.direction().scale(t))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CircleObj<F> {
    pub center: Point<F>,
    pub through: Point<F>,
}

impl<F: Field> CircleObj<F> {
    pub fn new(center: Point<F>, through: Point<F>, allow_zero_radius: bool) -> Result<Self, GeomError> {
        if !allow_zero_radius && center.coincides(&through)? {
            return Err(GeomError::DegenerateCircle);
        }
        Ok(CircleObj { center, through })
    }

    pub fn radius_sq(&self) -> F {
        let r = self.through.sub(&self.center);
        r.dot(&r)
    }

    pub fn radius(&self) -> Result<F, KernelError> {
        distance(&self.center, &self.through)
    }

    pub fn contains(&self, pt: &Point<F>) -> Result<bool, KernelError> {
        let r = pt.sub(&self.center);
        r.dot(&r).sub(&self.radius_sq()).is_zero()
    }
}

pub fn intersect_line_line<F: Field>(l1: &LineObj<F>, l2: &LineObj<F>) -> Result<Point<F>, GeomError> {
    let d1 = l1.direction();
    let d2 = l2.direction();
    let denom = d1.cross(&d2);
    let w = l2.p.sub(&l1.p);
    if denom.is_zero()? {
        return Err(if w.cross(&d1).is_zero()? {
            GeomError::CoincidentLines
        } else {
            GeomError::ParallelLines
        });
    }
    let t = w.cross(&d2).div(&denom)?;
    Ok(l1.at(&t))
}

pub fn intersect_line_circle<F: Field>(
    line: &LineObj<F>,
    circle: &CircleObj<F>,
    selector: LcSelector,
) -> Result<Point<F>, GeomError> {
    let d = line.direction();
    let a = d.dot(&d);
    let w = line.p.sub(&circle.center);
    let b = d.dot(&w);
    let (t1, t2) = if w.cross(&d).is_zero()? {
        // Line through the center: roots are center ± r along the line.
        let t0 = b.neg().div(&a)?;
        let dt = circle.radius()?.div(&d.norm()?)?;
        (t0.sub(&dt), t0.add(&dt))
    } else {
        let c = w.dot(&w).sub(&circle.radius_sq());
        let disc = b.mul(&b).sub(&a.mul(&c));
        if disc.sign()? == Sign::Negative {
            return Err(GeomError::NoIntersection);
        }
        let s = disc.sqrt()?;
        let nb = b.neg();
        (nb.sub(&s).div(&a)?, nb.add(&s).div(&a)?)
    };
    Ok(match selector {
        LcSelector::First => line.at(&t1),
        LcSelector::Second => line.at(&t2),
    })
}

pub fn intersect_circle_circle<F: Field>(
    c1: &CircleObj<F>,
    c2: &CircleObj<F>,
    selector: CcSelector,
) -> Result<Point<F>, GeomError> {
    let d = c2.center.sub(&c1.center);
    let dd = d.dot(&d);
    let r1 = c1.radius_sq();
    let r2 = c2.radius_sq();
    if dd.is_zero()? {
        return Err(if r1.sub(&r2).is_zero()? {
            GeomError::CoincidentCircles
        } else {
            GeomError::NoIntersection
        });
    }
    // Foot of the radical line at c1 + a·d, offset ±h·perp(d).
    let two_dd = dd.add(&dd);
    let a = dd.add(&r1).sub(&r2).div(&two_dd)?;
    let h_sq = r1.div(&dd)?.sub(&a.mul(&a));
    if h_sq.sign()? == Sign::Negative {
        return Err(GeomError::NoIntersection);
    }
    let h = h_sq.sqrt()?;
    let base = c1.center.add(&d.scale(&a));
    let off = d.perp().scale(&h);
    Ok(match selector {
        CcSelector::Left => base.add(&off),
        CcSelector::Right => base.sub(&off),
    })
}
