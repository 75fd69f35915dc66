//! Exact constructible numbers as elements of a tower of quadratic extensions
//! of the rationals.
//!
//! An element is either a reduced rational or `lo + hi·√rad`, where every
//! radical occurring in `lo`, `hi` and `rad` precedes `√rad` in a fixed total
//! order (nesting level first, then structure). Two operands living in
//! different extensions are aligned on the fly by treating the one with the
//! smaller top radical as a coefficient of the other; no global field
//! registry is kept.

use std::cmp::Ordering;
use std::fmt;
use std::sync::Arc;

use num_bigint::{BigInt, Sign as BigSign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{interval, BackendKind, Field, KernelError, Scalar, Sign};

/// Maximum radical nesting level produced by [`TowerElem::sqrt_adjoin`].
pub const DEFAULT_TOWER_DEPTH_CAP: u32 = 16;

/// Small primes used to pull square factors out of rational radicands so that
/// `√8` and `√2` share one radical.
const SQUARE_FACTOR_PRIMES: [u32; 25] = [
    2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71, 73, 79, 83, 89, 97,
];

/// Outward-rounded float enclosure cached on every node; lets most sign
/// queries skip the exact recursion.
#[derive(Debug, Clone, Copy)]
struct Approx {
    lo: f64,
    hi: f64,
}

impl Approx {
    const ENTIRE: Approx = Approx {
        lo: f64::NEG_INFINITY,
        hi: f64::INFINITY,
    };

    fn new(lo: f64, hi: f64) -> Approx {
        if lo.is_nan() || hi.is_nan() {
            Approx::ENTIRE
        } else {
            Approx {
                lo: lo.next_down(),
                hi: hi.next_up(),
            }
        }
    }

    fn of_rational(r: &BigRational) -> Approx {
        match r.to_f64() {
            Some(v) if v.is_finite() => Approx {
                lo: v.next_down().next_down(),
                hi: v.next_up().next_up(),
            },
            _ => Approx::ENTIRE,
        }
    }

    fn add(self, o: Approx) -> Approx {
        Approx::new(self.lo + o.lo, self.hi + o.hi)
    }

    fn mul(self, o: Approx) -> Approx {
        let c = [self.lo * o.lo, self.lo * o.hi, self.hi * o.lo, self.hi * o.hi];
        if c.iter().any(|v| v.is_nan()) {
            return Approx::ENTIRE;
        }
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Approx::new(lo, hi)
    }

    fn sqrt(self) -> Approx {
        Approx::new(self.lo.max(0.0).sqrt(), self.hi.max(0.0).sqrt())
    }

    fn sign(self) -> Option<Sign> {
        if self.lo > 0.0 {
            Some(Sign::Positive)
        } else if self.hi < 0.0 {
            Some(Sign::Negative)
        } else {
            None
        }
    }
}

#[derive(Debug)]
enum Node {
    Rat {
        value: BigRational,
        approx: Approx,
    },
    Ext {
        lo: TowerElem,
        hi: TowerElem,
        rad: TowerElem,
        level: u32,
        approx: Approx,
    },
}

/// An exact constructible number.
#[derive(Clone)]
pub struct TowerElem(Arc<Node>);

impl TowerElem {
    pub fn from_rational(value: BigRational) -> TowerElem {
        let approx = Approx::of_rational(&value);
        TowerElem(Arc::new(Node::Rat { value, approx }))
    }

    pub fn from_int(v: i64) -> TowerElem {
        TowerElem::from_rational(BigRational::from_integer(v.into()))
    }

    pub fn from_ratio(p: i64, q: i64) -> TowerElem {
        TowerElem::from_rational(BigRational::new(p.into(), q.into()))
    }

    /// `lo + hi·√rad` built through ordinary tower arithmetic, so the parts
    /// may come from any extensions. `rad` must be nonnegative.
    pub fn from_parts(lo: &TowerElem, hi: &TowerElem, rad: &TowerElem) -> Result<TowerElem, KernelError> {
        let root = rad.sqrt_adjoin()?;
        Ok(lo + &(hi * &root))
    }

    /// Radical nesting level; rationals are level 0.
    pub fn level(&self) -> u32 {
        match &*self.0 {
            Node::Rat { .. } => 0,
            Node::Ext { level, .. } => *level,
        }
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match &*self.0 {
            Node::Rat { value, .. } => Some(value),
            Node::Ext { .. } => None,
        }
    }

    /// `(lo, hi, rad)` for an extension element.
    pub fn parts(&self) -> Option<(&TowerElem, &TowerElem, &TowerElem)> {
        match &*self.0 {
            Node::Rat { .. } => None,
            Node::Ext { lo, hi, rad, .. } => Some((lo, hi, rad)),
        }
    }

    fn approx(&self) -> Approx {
        match &*self.0 {
            Node::Rat { approx, .. } | Node::Ext { approx, .. } => *approx,
        }
    }

    pub(crate) fn node_id(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    fn top_radicand(&self) -> Option<&TowerElem> {
        match &*self.0 {
            Node::Rat { .. } => None,
            Node::Ext { rad, .. } => Some(rad),
        }
    }

    /// Builds `lo + hi·√rad` without checking `hi` for zero. Callers guarantee
    /// `hi ≠ 0`, `rad > 0` and the radical ordering invariant.
    fn ext_unchecked(lo: TowerElem, hi: TowerElem, rad: TowerElem) -> TowerElem {
        let level = lo.level().max(hi.level()).max(rad.level() + 1);
        let approx = lo.approx().add(hi.approx().mul(rad.approx().sqrt()));
        TowerElem(Arc::new(Node::Ext {
            lo,
            hi,
            rad,
            level,
            approx,
        }))
    }

    /// Like `ext_unchecked` but collapses to `lo` when `hi` is zero.
    fn ext(lo: TowerElem, hi: TowerElem, rad: TowerElem) -> TowerElem {
        if hi.is_zero_exact() {
            lo
        } else {
            TowerElem::ext_unchecked(lo, hi, rad)
        }
    }

    pub fn sign_exact(&self) -> Sign {
        match &*self.0 {
            Node::Rat { value, .. } => match value.numer().sign() {
                BigSign::Minus => Sign::Negative,
                BigSign::NoSign => Sign::Zero,
                BigSign::Plus => Sign::Positive,
            },
            Node::Ext {
                lo, hi, rad, approx, ..
            } => {
                if let Some(s) = approx.sign() {
                    return s;
                }
                let s_lo = lo.sign_exact();
                let s_hi = hi.sign_exact();
                if s_hi == Sign::Zero {
                    return s_lo;
                }
                if s_lo == Sign::Zero || s_lo == s_hi {
                    return s_hi;
                }
                // Mixed signs: |lo| against |hi|·√rad.
                let norm = &(lo * lo) - &(&(hi * hi) * rad);
                s_lo * norm.sign_exact()
            }
        }
    }

    pub fn is_zero_exact(&self) -> bool {
        self.sign_exact() == Sign::Zero
    }

    pub fn is_one(&self) -> bool {
        self.as_rational().is_some_and(|r| r.is_one())
    }

    /// Multiplicative inverse.
    pub fn inv(&self) -> Result<TowerElem, KernelError> {
        match &*self.0 {
            Node::Rat { value, .. } => {
                if value.is_zero() {
                    Err(KernelError::DivisionByZero)
                } else {
                    Ok(TowerElem::from_rational(value.recip()))
                }
            }
            Node::Ext { lo, hi, rad, .. } => {
                let norm = &(lo * lo) - &(&(hi * hi) * rad);
                if norm.is_zero_exact() {
                    // √rad lies in the lower field: lo = ±hi·√rad.
                    return if lo.sign_exact() == hi.sign_exact() {
                        (lo + lo).inv()
                    } else {
                        Err(KernelError::DivisionByZero)
                    };
                }
                let inv_norm = norm.inv()?;
                Ok(TowerElem::ext_unchecked(
                    lo * &inv_norm,
                    -&(hi * &inv_norm),
                    rad.clone(),
                ))
            }
        }
    }

    /// Square root of a nonnegative element.
    ///
    /// Returns a root inside the current tower when one is found by
    /// denesting (`√(p² + q²r + 2pq√r) = p + q√r`) or when a rational is a
    /// perfect square; otherwise adjoins a new radical.
    pub fn sqrt_adjoin(&self) -> Result<TowerElem, KernelError> {
        self.sqrt_adjoin_capped(DEFAULT_TOWER_DEPTH_CAP)
    }

    pub fn sqrt_adjoin_capped(&self, cap: u32) -> Result<TowerElem, KernelError> {
        match self.sign_exact() {
            Sign::Negative => return Err(KernelError::SqrtOfNegative),
            Sign::Zero => return Ok(TowerElem::from_int(0)),
            Sign::Positive => {}
        }
        if let Some(root) = self.try_sqrt() {
            return Ok(root);
        }
        if self.level() + 1 > cap {
            return Err(KernelError::TowerDepthExceeded { cap });
        }
        Ok(match self.as_rational() {
            Some(r) => {
                // √(p/q) = √(pq)/q, with square factors of pq pulled out.
                let (square, free) = split_square_factors(r.numer() * r.denom());
                let coeff = BigRational::new(square, r.denom().clone());
                TowerElem::ext_unchecked(
                    TowerElem::from_int(0),
                    TowerElem::from_rational(coeff),
                    TowerElem::from_rational(BigRational::from_integer(free)),
                )
            }
            None => TowerElem::ext_unchecked(TowerElem::from_int(0), TowerElem::from_int(1), self.clone()),
        })
    }

    /// A nonnegative square root within the radicals already present, if one
    /// is found.
    fn try_sqrt(&self) -> Option<TowerElem> {
        if self.sign_exact() == Sign::Negative {
            return None;
        }
        match &*self.0 {
            Node::Rat { value, .. } => {
                let p = exact_isqrt(value.numer())?;
                let q = exact_isqrt(value.denom())?;
                Some(TowerElem::from_rational(BigRational::new(p, q)))
            }
            Node::Ext { lo, hi, rad, .. } => {
                let norm = &(lo * lo) - &(&(hi * hi) * rad);
                let s = norm.try_sqrt()?;
                let half = TowerElem::from_ratio(1, 2);
                for t in [lo + &s, lo - &s] {
                    let p_sq = &t * &half;
                    if p_sq.sign_exact() != Sign::Positive {
                        continue;
                    }
                    let Some(p) = p_sq.try_sqrt() else { continue };
                    let q = &(hi * &half) * &p.inv().ok()?;
                    let root = TowerElem::ext(p, q, rad.clone());
                    return Some(if root.sign_exact() == Sign::Negative {
                        -&root
                    } else {
                        root
                    });
                }
                None
            }
        }
    }

    /// Numeric equality, decided exactly.
    pub fn equals(&self, other: &TowerElem) -> bool {
        if Arc::ptr_eq(&self.0, &other.0) {
            return true;
        }
        (self - other).is_zero_exact()
    }

    pub fn to_f64(&self) -> f64 {
        let a = self.approx();
        if a.lo.is_finite() && a.hi.is_finite() {
            let mid = 0.5 * (a.lo + a.hi);
            if a.hi - a.lo < 1e-15 * mid.abs().max(1.0) {
                return mid;
            }
        }
        interval::tower_to_f64(self)
    }
}

/// Structural total order used to rank radicals.
fn cmp_struct(a: &TowerElem, b: &TowerElem) -> Ordering {
    if Arc::ptr_eq(&a.0, &b.0) {
        return Ordering::Equal;
    }
    match (&*a.0, &*b.0) {
        (Node::Rat { value: x, .. }, Node::Rat { value: y, .. }) => x.cmp(y),
        (Node::Rat { .. }, Node::Ext { .. }) => Ordering::Less,
        (Node::Ext { .. }, Node::Rat { .. }) => Ordering::Greater,
        (
            Node::Ext {
                lo: l1,
                hi: h1,
                rad: r1,
                level: v1,
                ..
            },
            Node::Ext {
                lo: l2,
                hi: h2,
                rad: r2,
                level: v2,
                ..
            },
        ) => v1
            .cmp(v2)
            .then_with(|| cmp_struct(r1, r2))
            .then_with(|| cmp_struct(h1, h2))
            .then_with(|| cmp_struct(l1, l2)),
    }
}

/// Which operand carries the higher top radical.
fn cmp_top(a: &TowerElem, b: &TowerElem) -> Ordering {
    match (a.top_radicand(), b.top_radicand()) {
        (None, None) => Ordering::Equal,
        (None, Some(_)) => Ordering::Less,
        (Some(_), None) => Ordering::Greater,
        (Some(x), Some(y)) => cmp_struct(x, y),
    }
}

fn exact_isqrt(n: &BigInt) -> Option<BigInt> {
    if n.is_negative() {
        return None;
    }
    let r = n.sqrt();
    (&r * &r == *n).then_some(r)
}

/// Splits a positive integer into `s²·m`, returning `(s, m)`; only small
/// prime squares are extracted, so `m` need not be squarefree.
fn split_square_factors(n: BigInt) -> (BigInt, BigInt) {
    let mut m = n;
    let mut s = BigInt::one();
    for p in SQUARE_FACTOR_PRIMES {
        let p = BigInt::from(p);
        let p2 = &p * &p;
        if p2 > m {
            break;
        }
        loop {
            let (q, r) = m.div_rem(&p2);
            if !r.is_zero() {
                break;
            }
            m = q;
            s *= &p;
        }
    }
    if let Some(r) = exact_isqrt(&m) {
        return (s * r, BigInt::one());
    }
    (s, m)
}

impl<'a> std::ops::Add<&'a TowerElem> for &'a TowerElem {
    type Output = TowerElem;

    fn add(self, other: &TowerElem) -> TowerElem {
        if let (Some(x), Some(y)) = (self.as_rational(), other.as_rational()) {
            return TowerElem::from_rational(x + y);
        }
        if other.as_rational().is_some_and(|r| r.is_zero()) {
            return self.clone();
        }
        if self.as_rational().is_some_and(|r| r.is_zero()) {
            return other.clone();
        }
        let (a, b) = (self.parts(), other.parts());
        match cmp_top(self, other) {
            Ordering::Equal => {
                let ((l1, h1, r), (l2, h2, _)) = (a.unwrap(), b.unwrap());
                TowerElem::ext(l1 + l2, h1 + h2, r.clone())
            }
            Ordering::Greater => {
                let (l1, h1, r) = a.unwrap();
                TowerElem::ext_unchecked(l1 + other, h1.clone(), r.clone())
            }
            Ordering::Less => {
                let (l2, h2, r) = b.unwrap();
                TowerElem::ext_unchecked(self + l2, h2.clone(), r.clone())
            }
        }
    }
}

impl std::ops::Neg for &TowerElem {
    type Output = TowerElem;

    fn neg(self) -> TowerElem {
        match &*self.0 {
            Node::Rat { value, .. } => TowerElem::from_rational(-value),
            Node::Ext { lo, hi, rad, .. } => TowerElem::ext_unchecked(-lo, -hi, rad.clone()),
        }
    }
}

impl<'a> std::ops::Sub<&'a TowerElem> for &'a TowerElem {
    type Output = TowerElem;

    fn sub(self, other: &TowerElem) -> TowerElem {
        self + &(-other)
    }
}

impl<'a> std::ops::Mul<&'a TowerElem> for &'a TowerElem {
    type Output = TowerElem;

    fn mul(self, other: &TowerElem) -> TowerElem {
        if let (Some(x), Some(y)) = (self.as_rational(), other.as_rational()) {
            return TowerElem::from_rational(x * y);
        }
        for (z, w) in [(self, other), (other, self)] {
            if let Some(r) = z.as_rational() {
                if r.is_zero() {
                    return z.clone();
                }
                if r.is_one() {
                    return w.clone();
                }
            }
        }
        let (a, b) = (self.parts(), other.parts());
        match cmp_top(self, other) {
            Ordering::Equal => {
                let ((l1, h1, r), (l2, h2, _)) = (a.unwrap(), b.unwrap());
                let lo = &(l1 * l2) + &(&(h1 * h2) * r);
                let hi = &(l1 * h2) + &(h1 * l2);
                TowerElem::ext(lo, hi, r.clone())
            }
            Ordering::Greater => {
                let (l1, h1, r) = a.unwrap();
                TowerElem::ext(l1 * other, h1 * other, r.clone())
            }
            Ordering::Less => {
                let (l2, h2, r) = b.unwrap();
                TowerElem::ext(self * l2, self * h2, r.clone())
            }
        }
    }
}

impl PartialEq for TowerElem {
    fn eq(&self, other: &TowerElem) -> bool {
        self.equals(other)
    }
}

impl fmt::Display for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &*self.0 {
            Node::Rat { value, .. } => write!(f, "{value}"),
            Node::Ext { lo, hi, rad, .. } => write!(f, "({lo}) + ({hi})*sqrt({rad})"),
        }
    }
}

impl fmt::Debug for TowerElem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Tower[{self}]")
    }
}

impl Field for TowerElem {
    const KIND: BackendKind = BackendKind::Exact;

    fn from_rational(r: &BigRational) -> Self {
        TowerElem::from_rational(r.clone())
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
        Ok(self * &other.inv()?)
    }

    fn sqrt(&self) -> Result<Self, KernelError> {
        self.sqrt_adjoin()
    }

    fn sign(&self) -> Result<Sign, KernelError> {
        Ok(self.sign_exact())
    }

    fn to_f64(&self) -> f64 {
        TowerElem::to_f64(self)
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Exact(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, d: i64) -> TowerElem {
        TowerElem::from_ratio(p, d)
    }

    fn sqrt2() -> TowerElem {
        q(2, 1).sqrt_adjoin().unwrap()
    }

    #[test]
    fn conjugate_product_is_minus_one() {
        let a = &q(1, 1) + &sqrt2();
        let b = &q(1, 1) - &sqrt2();
        let p = &a * &b;
        assert_eq!(p.as_rational(), Some(&BigRational::from_integer((-1).into())));
    }

    #[test]
    fn rational_arithmetic_stays_rational() {
        let s = &q(3, 2) + &q(3, 2);
        assert_eq!(s.as_rational(), Some(&BigRational::from_integer(3.into())));
        let r2 = &sqrt2() * &sqrt2();
        assert_eq!(r2.as_rational(), Some(&BigRational::from_integer(2.into())));
    }

    #[test]
    fn sqrt_of_perfect_square_does_not_grow_tower() {
        let r = q(9, 4).sqrt_adjoin().unwrap();
        assert_eq!(r.as_rational(), Some(&BigRational::new(3.into(), 2.into())));
        assert_eq!(r.level(), 0);
    }

    #[test]
    fn sqrt_two_is_a_new_radical() {
        let r = sqrt2();
        let (lo, hi, rad) = r.parts().unwrap();
        assert!(lo.is_zero_exact());
        assert!(hi.is_one());
        assert_eq!(rad.as_rational(), Some(&BigRational::from_integer(2.into())));
    }

    #[test]
    fn nested_radical_squares_back() {
        let a = &q(2, 1) + &sqrt2();
        let r = a.sqrt_adjoin().unwrap();
        let (lo, hi, rad) = r.parts().unwrap();
        assert!(lo.is_zero_exact() && hi.is_one());
        assert!(rad.equals(&a));
        assert_eq!(r.level(), 2);
        let sq = &r * &r;
        assert!(sq.equals(&a));
        assert_eq!(sq.level(), 1);
    }

    #[test]
    fn denesting_finds_square_in_field() {
        // (1 + √2)² = 3 + 2√2
        let base = &q(1, 1) + &sqrt2();
        let sq = &base * &base;
        let root = sq.sqrt_adjoin().unwrap();
        assert_eq!(root.level(), 1);
        assert!(root.equals(&base));
        // (1 - √2)² has the positive root √2 - 1.
        let neg = &q(1, 1) - &sqrt2();
        let root = (&neg * &neg).sqrt_adjoin().unwrap();
        assert!(root.equals(&(-&neg)));
    }

    #[test]
    fn square_factors_share_radicals() {
        let r8 = q(8, 1).sqrt_adjoin().unwrap();
        let twice = &sqrt2() + &sqrt2();
        assert!(r8.equals(&twice));
        // Same top radical, so the difference collapses structurally.
        assert_eq!((&r8 - &twice).level(), 0);
        let half = q(1, 2).sqrt_adjoin().unwrap();
        assert!((&half * &sqrt2()).is_one());
    }

    #[test]
    fn signs_of_mixed_elements() {
        assert_eq!((&q(1, 1) + &sqrt2()).sign_exact(), Sign::Positive);
        assert_eq!((&q(1, 1) - &sqrt2()).sign_exact(), Sign::Negative);
        let prod = &(&sqrt2() + &q(1, 1)) * &(&sqrt2() - &q(1, 1));
        assert!((&prod - &q(1, 1)).is_zero_exact());
    }

    #[test]
    fn exact_sign_recursion_handles_tiny_differences() {
        // 1e-30 + (√2 - p/q) with p/q a very close convergent: the float
        // approximation cannot decide, the recursion must.
        let p = BigInt::parse_bytes(b"1414213562373095048801688724209698078569", 10).unwrap();
        let d = BigInt::parse_bytes(b"1000000000000000000000000000000000000000", 10).unwrap();
        let approx = TowerElem::from_rational(BigRational::new(p, d));
        let diff = &sqrt2() - &approx;
        assert_eq!(diff.sign_exact(), Sign::Positive);
        assert_eq!((-&diff).sign_exact(), Sign::Negative);
    }

    #[test]
    fn inverse_when_radical_lies_in_lower_field() {
        // r = (1+√2)², so √r = 1+√2 is already in Q(√2); the element
        // (1+√2) + 1·√r has zero norm but equals 2(1+√2).
        let base = &q(1, 1) + &sqrt2();
        let r = &base * &base;
        let elem = TowerElem::ext_unchecked(base.clone(), q(1, 1), r);
        let inv = elem.inv().unwrap();
        let expect = (&base + &base).inv().unwrap();
        assert!(inv.equals(&expect));
        let zero = TowerElem::ext_unchecked(-&base, q(1, 1), &base * &base);
        assert!(zero.is_zero_exact());
        assert_eq!(zero.inv().unwrap_err(), KernelError::DivisionByZero);
    }

    #[test]
    fn depth_cap_is_enforced() {
        let mut v = q(3, 1);
        for _ in 0..3 {
            v = &v.sqrt_adjoin_capped(3).unwrap() + &q(1, 1);
        }
        assert_eq!(v.level(), 3);
        assert_eq!(
            v.sqrt_adjoin_capped(3).unwrap_err(),
            KernelError::TowerDepthExceeded { cap: 3 }
        );
    }

    #[test]
    fn negative_sqrt_rejected() {
        assert_eq!(q(-1, 3).sqrt_adjoin().unwrap_err(), KernelError::SqrtOfNegative);
        assert!(q(0, 1).sqrt_adjoin().unwrap().is_zero_exact());
    }

    #[test]
    fn float_export() {
        assert_eq!(q(3, 2).to_f64(), 1.5);
        assert_eq!(sqrt2().to_f64(), std::f64::consts::SQRT_2);
        assert_eq!(q(0, 1).to_f64(), 0.0);
    }
}
