use num_rational::BigRational;
use num_traits::ToPrimitive;

use super::{BackendKind, Field, KernelError, Scalar, Sign};

/// Absolute threshold below which a float is treated as zero.
///
/// Heuristic only: the exact backend decides degeneracy in tests.
pub const FLOAT_ZERO_TOLERANCE: f64 = 1e-12;

impl Field for f64 {
    const KIND: BackendKind = BackendKind::F64;

    fn from_rational(r: &BigRational) -> Self {
        r.to_f64().unwrap_or(f64::NAN)
    }

    fn add(&self, other: &Self) -> Self {
        self + other
    }

    fn sub(&self, other: &Self) -> Self {
        self - other
    }

    fn mul(&self, other: &Self) -> Self {
        self * other
    }

    fn neg(&self) -> Self {
        -self
    }

    fn div(&self, other: &Self) -> Result<Self, KernelError> {
        if other.sign()? == Sign::Zero {
            return Err(KernelError::DivisionByZero);
        }
        Ok(self / other)
    }

    fn sqrt(&self) -> Result<Self, KernelError> {
        match self.sign()? {
            Sign::Negative => Err(KernelError::SqrtOfNegative),
            Sign::Zero => Ok(0.0),
            Sign::Positive => Ok(f64::sqrt(*self)),
        }
    }

    fn sign(&self) -> Result<Sign, KernelError> {
        Ok(if f64::abs(*self) <= FLOAT_ZERO_TOLERANCE {
            Sign::Zero
        } else if *self > 0.0 {
            Sign::Positive
        } else {
            Sign::Negative
        })
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn into_scalar(self) -> Scalar {
        Scalar::F64(self)
    }
}
