use std::fmt;
use std::str::FromStr;

use num_rational::BigRational;
use serde::{Deserialize, Serialize};

use super::{Field, IntervalReal, KernelError, Sign, TowerElem};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BackendKind {
    F64,
    Interval,
    Exact,
}

impl BackendKind {
    pub fn name(self) -> &'static str {
        match self {
            BackendKind::F64 => "f64",
            BackendKind::Interval => "interval",
            BackendKind::Exact => "exact",
        }
    }
}

impl fmt::Display for BackendKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BackendKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "f64" | "float" => Ok(BackendKind::F64),
            "interval" => Ok(BackendKind::Interval),
            "exact" => Ok(BackendKind::Exact),
            other => Err(format!("unknown backend `{other}`")),
        }
    }
}

/// A value tagged with the backend that produced it.
#[derive(Debug, Clone)]
pub enum Scalar {
    F64(f64),
    Interval(IntervalReal),
    Exact(TowerElem),
}

macro_rules! dispatch2 {
    ($a:expr, $b:expr, |$x:ident, $y:ident| $body:expr) => {
        match ($a, $b) {
            (Scalar::F64($x), Scalar::F64($y)) => Ok($body),
            (Scalar::Interval($x), Scalar::Interval($y)) => Ok($body),
            (Scalar::Exact($x), Scalar::Exact($y)) => Ok($body),
            (l, r) => Err(KernelError::BackendMismatch {
                left: l.kind(),
                right: r.kind(),
            }),
        }
    };
}

impl Scalar {
    pub fn from_rational(kind: BackendKind, r: &BigRational) -> Scalar {
        match kind {
            BackendKind::F64 => Scalar::F64(<f64 as Field>::from_rational(r)),
            BackendKind::Interval => Scalar::Interval(IntervalReal::from_rational(r)),
            BackendKind::Exact => Scalar::Exact(TowerElem::from_rational(r.clone())),
        }
    }

    pub fn kind(&self) -> BackendKind {
        match self {
            Scalar::F64(_) => BackendKind::F64,
            Scalar::Interval(_) => BackendKind::Interval,
            Scalar::Exact(_) => BackendKind::Exact,
        }
    }

    pub fn add(&self, o: &Scalar) -> Result<Scalar, KernelError> {
        dispatch2!(self, o, |a, b| Field::add(a, b).into_scalar())
    }

    pub fn sub(&self, o: &Scalar) -> Result<Scalar, KernelError> {
        dispatch2!(self, o, |a, b| Field::sub(a, b).into_scalar())
    }

    pub fn mul(&self, o: &Scalar) -> Result<Scalar, KernelError> {
        dispatch2!(self, o, |a, b| Field::mul(a, b).into_scalar())
    }

    pub fn div(&self, o: &Scalar) -> Result<Scalar, KernelError> {
        dispatch2!(self, o, |a, b| Field::div(a, b)?.into_scalar())
    }

    pub fn sqrt_adjoin(&self) -> Result<Scalar, KernelError> {
        Ok(match self {
            Scalar::F64(v) => Scalar::F64(Field::sqrt(v)?),
            Scalar::Interval(v) => Scalar::Interval(Field::sqrt(v)?),
            Scalar::Exact(v) => Scalar::Exact(v.sqrt_adjoin()?),
        })
    }

    pub fn sign(&self) -> Result<Sign, KernelError> {
        match self {
            Scalar::F64(v) => Field::sign(v),
            Scalar::Interval(v) => Field::sign(v),
            Scalar::Exact(v) => Ok(v.sign_exact()),
        }
    }

    pub fn is_zero(&self) -> Result<bool, KernelError> {
        Ok(self.sign()? == Sign::Zero)
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::F64(v) => *v,
            Scalar::Interval(v) => Field::to_f64(v),
            Scalar::Exact(v) => v.to_f64(),
        }
    }

    pub fn as_exact(&self) -> Option<&TowerElem> {
        match self {
            Scalar::Exact(t) => Some(t),
            _ => None,
        }
    }

    /// Rational value, when the exact backend produced a rational.
    pub fn as_rational(&self) -> Option<&BigRational> {
        self.as_exact().and_then(TowerElem::as_rational)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::F64(v) => write!(f, "{v}"),
            Scalar::Interval(v) => write!(f, "{}", Field::to_f64(v)),
            Scalar::Exact(t) => write!(f, "{t}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> BigRational {
        BigRational::new(p.into(), d.into())
    }

    #[test]
    fn mixing_backends_is_an_error() {
        let a = Scalar::from_rational(BackendKind::F64, &q(1, 2));
        let b = Scalar::from_rational(BackendKind::Exact, &q(1, 2));
        assert_eq!(
            a.add(&b).unwrap_err(),
            KernelError::BackendMismatch {
                left: BackendKind::F64,
                right: BackendKind::Exact
            }
        );
    }

    #[test]
    fn same_backend_dispatch() {
        for kind in [BackendKind::F64, BackendKind::Interval, BackendKind::Exact] {
            let a = Scalar::from_rational(kind, &q(3, 2));
            let s = a.add(&a).unwrap();
            assert_eq!(s.to_f64(), 3.0);
            assert_eq!(s.kind(), kind);
            let z = a.sub(&a).unwrap();
            assert!(z.is_zero().unwrap());
            assert_eq!(a.div(&z).unwrap_err(), KernelError::DivisionByZero);
        }
    }

    #[test]
    fn backend_names_round_trip() {
        for kind in [BackendKind::F64, BackendKind::Interval, BackendKind::Exact] {
            assert_eq!(kind.name().parse::<BackendKind>().unwrap(), kind);
        }
    }
}
