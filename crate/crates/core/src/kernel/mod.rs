//! Numeric backends and the analytic geometry built on top of them.
//!
//! Every backend implements [`Field`]: ordered-field arithmetic plus square
//! roots of nonnegative elements, which is exactly the arithmetic reachable
//! with ruler and compass from a unit segment. Geometry in [`geom`] is
//! generic over the field, so one interpreter serves all backends.

mod float;
pub mod geom;
pub mod interval;
mod scalar;
pub mod tower;

use std::fmt;

use num_rational::BigRational;
use thiserror::Error;

pub use float::FLOAT_ZERO_TOLERANCE;
pub use geom::{
    distance, intersect_circle_circle, intersect_line_circle, intersect_line_line, CcSelector,
    CircleObj, GeomError, LcSelector, LineObj, Point,
};
pub use interval::IntervalReal;
pub use scalar::{BackendKind, Scalar};
pub use tower::{TowerElem, DEFAULT_TOWER_DEPTH_CAP};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sign {
    Negative,
    Zero,
    Positive,
}

impl Sign {
    pub fn as_i8(self) -> i8 {
        match self {
            Sign::Negative => -1,
            Sign::Zero => 0,
            Sign::Positive => 1,
        }
    }

    pub fn from_i8(v: i8) -> Sign {
        match v.signum() {
            -1 => Sign::Negative,
            0 => Sign::Zero,
            _ => Sign::Positive,
        }
    }
}

impl std::ops::Mul for Sign {
    type Output = Sign;

    fn mul(self, rhs: Sign) -> Sign {
        Sign::from_i8(self.as_i8() * rhs.as_i8())
    }
}

impl std::ops::Neg for Sign {
    type Output = Sign;

    fn neg(self) -> Sign {
        Sign::from_i8(-self.as_i8())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum KernelError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("square root of a negative quantity")]
    SqrtOfNegative,
    #[error("quadratic tower deeper than {cap} levels")]
    TowerDepthExceeded { cap: u32 },
    #[error("interval precision exhausted before the sign could be separated from zero")]
    PrecisionExhausted,
    #[error("operands come from different backends ({left} and {right})")]
    BackendMismatch {
        left: BackendKind,
        right: BackendKind,
    },
}

/// Arithmetic of one numeric backend.
///
/// `add`, `sub`, `mul` and `neg` are total. Division and square root are
/// partial, and so is `sign` for backends that can only approximate.
pub trait Field: Clone + fmt::Debug + Send + Sync + 'static {
    const KIND: BackendKind;

    fn from_rational(r: &BigRational) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn div(&self, other: &Self) -> Result<Self, KernelError>;
    fn sqrt(&self) -> Result<Self, KernelError>;
    fn sign(&self) -> Result<Sign, KernelError>;
    fn to_f64(&self) -> f64;
    fn into_scalar(self) -> Scalar;

    fn zero() -> Self {
        Self::from_rational(&BigRational::from_integer(0.into()))
    }

    fn one() -> Self {
        Self::from_rational(&BigRational::from_integer(1.into()))
    }

    fn is_zero(&self) -> Result<bool, KernelError> {
        Ok(self.sign()? == Sign::Zero)
    }

    fn abs(&self) -> Result<Self, KernelError> {
        Ok(match self.sign()? {
            Sign::Negative => self.neg(),
            _ => self.clone(),
        })
    }

    fn half(&self) -> Self {
        let two = Self::from_rational(&BigRational::from_integer(2.into()));
        self.div(&two).expect("two is nonzero")
    }
}

/// Parses `p/q`, an integer, or a terminating decimal into an exact rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    use num_bigint::BigInt;
    use num_traits::{One, Zero};

    let text = text.trim();
    if let Some((p, q)) = text.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        if q.is_zero() {
            return None;
        }
        return Some(BigRational::new(p, q));
    }
    let (neg, body) = match text.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, text),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let (int, frac) = body.split_once('.').unwrap_or((body, ""));
    if int.is_empty() && frac.is_empty() || frac.contains('.') {
        return None;
    }
    let digits = format!("{int}{frac}");
    let mant: BigInt = digits.parse().ok()?;
    let mut den = BigInt::one();
    for _ in 0..frac.len() {
        den *= 10;
    }
    let v = BigRational::new(mant, den);
    Some(if neg { -v } else { v })
}

/// Formats a rational as `p/q` (denominator always present).
pub fn rational_to_string(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_text_forms() {
        let r = |p: i64, q: i64| BigRational::new(p.into(), q.into());
        assert_eq!(parse_rational("3/2"), Some(r(3, 2)));
        assert_eq!(parse_rational("1.25"), Some(r(5, 4)));
        assert_eq!(parse_rational("-4"), Some(r(-4, 1)));
        assert_eq!(parse_rational(".5"), Some(r(1, 2)));
        assert_eq!(parse_rational("1/0"), None);
        assert_eq!(parse_rational("abc"), None);
        assert_eq!(parse_rational("."), None);
        assert_eq!(rational_to_string(&r(6, 4)), "3/2");
        assert_eq!(rational_to_string(&r(0, 5)), "0/1");
    }

    #[test]
    fn sign_algebra() {
        assert_eq!(Sign::Negative * Sign::Negative, Sign::Positive);
        assert_eq!(Sign::Zero * Sign::Negative, Sign::Zero);
        assert_eq!(-Sign::Positive, Sign::Negative);
    }
}
