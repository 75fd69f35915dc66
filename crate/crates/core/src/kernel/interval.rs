//! Arbitrary-precision interval arithmetic on dyadic bounds.
//!
//! [`IntervalReal`] keeps the expression DAG that produced it, so a sign
//! query can re-evaluate at doubled precision until the enclosure either
//! excludes zero or becomes narrower than 10^-60.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use super::{BackendKind, Field, KernelError, Scalar, Sign, TowerElem};

/// Working precision (mantissa bits) of freshly created interval values.
pub const DEFAULT_PRECISION: u32 = 64;
/// Escalation stops here and reports [`KernelError::PrecisionExhausted`].
pub const MAX_PRECISION: u32 = 8192;
/// An enclosure of zero narrower than 10^-60 is reported as zero.
pub const ZERO_WIDTH_EXP10: u32 = 60;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Round {
    Down,
    Up,
}

/// `mant · 2^exp`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Dyadic {
    mant: BigInt,
    exp: i64,
}

fn floor_div(n: &BigInt, d: &BigInt) -> BigInt {
    n.div_floor(d)
}

fn ceil_div(n: &BigInt, d: &BigInt) -> BigInt {
    -((-n).div_floor(d))
}

impl Dyadic {
    pub fn zero() -> Dyadic {
        Dyadic {
            mant: BigInt::zero(),
            exp: 0,
        }
    }

    fn bits(&self) -> i64 {
        self.mant.bits() as i64
    }

    fn neg(&self) -> Dyadic {
        Dyadic {
            mant: -&self.mant,
            exp: self.exp,
        }
    }

    fn add(&self, o: &Dyadic) -> Dyadic {
        if self.mant.is_zero() {
            return o.clone();
        }
        if o.mant.is_zero() {
            return self.clone();
        }
        let exp = self.exp.min(o.exp);
        let a = &self.mant << (self.exp - exp) as usize;
        let b = &o.mant << (o.exp - exp) as usize;
        Dyadic { mant: a + b, exp }
    }

    fn mul(&self, o: &Dyadic) -> Dyadic {
        Dyadic {
            mant: &self.mant * &o.mant,
            exp: self.exp + o.exp,
        }
    }

    fn sign(&self) -> Sign {
        if self.mant.is_zero() {
            Sign::Zero
        } else if self.mant.is_positive() {
            Sign::Positive
        } else {
            Sign::Negative
        }
    }

    fn cmp(&self, o: &Dyadic) -> std::cmp::Ordering {
        match self.add(&o.neg()).sign() {
            Sign::Negative => std::cmp::Ordering::Less,
            Sign::Zero => std::cmp::Ordering::Equal,
            Sign::Positive => std::cmp::Ordering::Greater,
        }
    }

    fn round(&self, prec: u32, dir: Round) -> Dyadic {
        let excess = self.bits() - prec as i64;
        if excess <= 0 {
            return self.clone();
        }
        let d = BigInt::one() << excess as usize;
        let mant = match dir {
            Round::Down => floor_div(&self.mant, &d),
            Round::Up => ceil_div(&self.mant, &d),
        };
        Dyadic {
            mant,
            exp: self.exp + excess,
        }
    }

    fn from_rational(r: &BigRational, prec: u32, dir: Round) -> Dyadic {
        if r.denom().is_one() {
            return Dyadic {
                mant: r.numer().clone(),
                exp: 0,
            }
            .round(prec, dir);
        }
        let k = (prec as i64 + r.denom().bits() as i64 - r.numer().bits() as i64 + 2).max(0);
        let n = r.numer() << k as usize;
        let mant = match dir {
            Round::Down => floor_div(&n, r.denom()),
            Round::Up => ceil_div(&n, r.denom()),
        };
        Dyadic { mant, exp: -k }.round(prec, dir)
    }

    fn div(&self, o: &Dyadic, prec: u32, dir: Round) -> Dyadic {
        let k = (prec as i64 + o.bits() - self.bits() + 2).max(0);
        let n = &self.mant << k as usize;
        let mant = match dir {
            Round::Down => floor_div(&n, &o.mant),
            Round::Up => ceil_div(&n, &o.mant),
        };
        Dyadic {
            mant,
            exp: self.exp - o.exp - k,
        }
        .round(prec, dir)
    }

    /// Square root of a nonnegative dyadic, rounded in `dir`.
    fn sqrt(&self, prec: u32, dir: Round) -> Dyadic {
        if self.mant.is_zero() {
            return Dyadic::zero();
        }
        let mut shift = (2 * prec as i64 + 2 - self.bits()).max(0);
        if (self.exp - shift).is_odd() {
            shift += 1;
        }
        let m = &self.mant << shift as usize;
        let mut r = m.sqrt();
        if dir == Round::Up && &r * &r != m {
            r += 1;
        }
        Dyadic {
            mant: r,
            exp: (self.exp - shift) / 2,
        }
        .round(prec, dir)
    }

    pub fn to_f64(&self) -> f64 {
        let r = self.round(60, Round::Down);
        let m = r.mant.to_f64().unwrap_or(f64::NAN);
        let mut e = r.exp;
        let mut v = m;
        while e > 0 {
            let step = e.min(1000);
            v *= 2f64.powi(step as i32);
            e -= step;
        }
        while e < 0 {
            let step = (-e).min(1000);
            v /= 2f64.powi(step as i32);
            e += step;
        }
        v
    }

    fn to_rational(&self) -> BigRational {
        if self.exp >= 0 {
            BigRational::from_integer(&self.mant << self.exp as usize)
        } else {
            BigRational::new(self.mant.clone(), BigInt::one() << (-self.exp) as usize)
        }
    }
}

/// A closed interval `[lo, hi]` with dyadic endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Enclosure {
    pub lo: Dyadic,
    pub hi: Dyadic,
}

impl Enclosure {
    pub fn of_rational(r: &BigRational, prec: u32) -> Enclosure {
        Enclosure {
            lo: Dyadic::from_rational(r, prec, Round::Down),
            hi: Dyadic::from_rational(r, prec, Round::Up),
        }
    }

    pub fn add(&self, o: &Enclosure, prec: u32) -> Enclosure {
        Enclosure {
            lo: self.lo.add(&o.lo).round(prec, Round::Down),
            hi: self.hi.add(&o.hi).round(prec, Round::Up),
        }
    }

    pub fn neg(&self) -> Enclosure {
        Enclosure {
            lo: self.hi.neg(),
            hi: self.lo.neg(),
        }
    }

    pub fn sub(&self, o: &Enclosure, prec: u32) -> Enclosure {
        self.add(&o.neg(), prec)
    }

    pub fn mul(&self, o: &Enclosure, prec: u32) -> Enclosure {
        let c = [
            self.lo.mul(&o.lo),
            self.lo.mul(&o.hi),
            self.hi.mul(&o.lo),
            self.hi.mul(&o.hi),
        ];
        let lo = c.iter().min_by(|a, b| a.cmp(b)).unwrap();
        let hi = c.iter().max_by(|a, b| a.cmp(b)).unwrap();
        Enclosure {
            lo: lo.round(prec, Round::Down),
            hi: hi.round(prec, Round::Up),
        }
    }

    /// `None` when the divisor straddles zero.
    pub fn div(&self, o: &Enclosure, prec: u32) -> Option<Enclosure> {
        if o.contains_zero() {
            return None;
        }
        let pairs = [(&self.lo, &o.lo), (&self.lo, &o.hi), (&self.hi, &o.lo), (&self.hi, &o.hi)];
        let lows: Vec<Dyadic> = pairs.iter().map(|(a, b)| a.div(b, prec, Round::Down)).collect();
        let highs: Vec<Dyadic> = pairs.iter().map(|(a, b)| a.div(b, prec, Round::Up)).collect();
        Some(Enclosure {
            lo: lows.into_iter().min_by(|a, b| a.cmp(b)).unwrap(),
            hi: highs.into_iter().max_by(|a, b| a.cmp(b)).unwrap(),
        })
    }

    /// Square root with the lower bound clamped at zero; `None` if entirely negative.
    pub fn sqrt(&self, prec: u32) -> Option<Enclosure> {
        if self.hi.sign() == Sign::Negative {
            return None;
        }
        let lo = if self.lo.sign() == Sign::Positive {
            self.lo.sqrt(prec, Round::Down)
        } else {
            Dyadic::zero()
        };
        Some(Enclosure {
            lo,
            hi: self.hi.sqrt(prec, Round::Up),
        })
    }

    pub fn contains_zero(&self) -> bool {
        self.lo.sign() != Sign::Positive && self.hi.sign() != Sign::Negative
    }

    pub fn sign(&self) -> Option<Sign> {
        if self.lo.sign() == Sign::Positive {
            Some(Sign::Positive)
        } else if self.hi.sign() == Sign::Negative {
            Some(Sign::Negative)
        } else {
            None
        }
    }

    pub fn width_below_zero_threshold(&self) -> bool {
        let w = self.hi.add(&self.lo.neg()).to_rational();
        let limit = BigRational::new(BigInt::one(), BigInt::from(10).pow(ZERO_WIDTH_EXP10));
        w < limit
    }

    pub fn mid_f64(&self) -> f64 {
        0.5 * (self.lo.to_f64() + self.hi.to_f64())
    }

    fn narrow_for_export(&self) -> bool {
        let (lo, hi) = (self.lo.to_f64(), self.hi.to_f64());
        let mid = 0.5 * (lo + hi);
        mid.is_finite() && hi - lo <= 1e-15 * mid.abs().max(1.0)
    }
}

#[derive(Debug)]
enum RNode {
    Const(BigRational),
    Add(Arc<RNode>, Arc<RNode>),
    Sub(Arc<RNode>, Arc<RNode>),
    Mul(Arc<RNode>, Arc<RNode>),
    Div(Arc<RNode>, Arc<RNode>),
    Neg(Arc<RNode>),
    Sqrt(Arc<RNode>),
}

type Memo = HashMap<usize, Option<Enclosure>>;

fn eval_node(node: &Arc<RNode>, prec: u32, memo: &mut Memo) -> Option<Enclosure> {
    let key = Arc::as_ptr(node) as usize;
    if let Some(e) = memo.get(&key) {
        return e.clone();
    }
    let out = match &**node {
        RNode::Const(r) => Some(Enclosure::of_rational(r, prec)),
        RNode::Add(a, b) => Some(eval_node(a, prec, memo)?.add(&eval_node(b, prec, memo)?, prec)),
        RNode::Sub(a, b) => Some(eval_node(a, prec, memo)?.sub(&eval_node(b, prec, memo)?, prec)),
        RNode::Mul(a, b) => Some(eval_node(a, prec, memo)?.mul(&eval_node(b, prec, memo)?, prec)),
        RNode::Div(a, b) => eval_node(a, prec, memo)?.div(&eval_node(b, prec, memo)?, prec),
        RNode::Neg(a) => Some(eval_node(a, prec, memo)?.neg()),
        RNode::Sqrt(a) => eval_node(a, prec, memo)?.sqrt(prec),
    };
    memo.insert(key, out.clone());
    out
}

/// A real number known through its construction DAG and an enclosure at the
/// current working precision.
#[derive(Clone)]
pub struct IntervalReal {
    node: Arc<RNode>,
    enclosure: Option<Enclosure>,
    precision: u32,
}

impl IntervalReal {
    fn build(node: RNode, precision: u32) -> IntervalReal {
        let node = Arc::new(node);
        let enclosure = eval_node(&node, precision, &mut Memo::new());
        IntervalReal {
            node,
            enclosure,
            precision,
        }
    }

    fn binary(&self, o: &IntervalReal, f: fn(Arc<RNode>, Arc<RNode>) -> RNode) -> IntervalReal {
        let precision = self.precision.max(o.precision);
        let node = Arc::new(f(self.node.clone(), o.node.clone()));
        let enclosure = match (&*node, &self.enclosure, &o.enclosure) {
            (_, Some(a), Some(b)) if self.precision == o.precision => match &*node {
                RNode::Add(..) => Some(a.add(b, precision)),
                RNode::Sub(..) => Some(a.sub(b, precision)),
                RNode::Mul(..) => Some(a.mul(b, precision)),
                _ => eval_node(&node, precision, &mut Memo::new()),
            },
            _ => eval_node(&node, precision, &mut Memo::new()),
        };
        IntervalReal {
            node,
            enclosure,
            precision,
        }
    }

    pub fn precision(&self) -> u32 {
        self.precision
    }

    pub fn enclosure(&self) -> Option<&Enclosure> {
        self.enclosure.as_ref()
    }

    /// Sign together with the precision at which it was decided.
    fn sign_escalating(&self) -> Result<(Sign, u32), KernelError> {
        let mut prec = self.precision;
        let mut enc = self.enclosure.clone();
        loop {
            if let Some(e) = &enc {
                if let Some(s) = e.sign() {
                    return Ok((s, prec));
                }
                if e.width_below_zero_threshold() {
                    return Ok((Sign::Zero, prec));
                }
            }
            prec = prec.saturating_mul(2);
            if prec > MAX_PRECISION {
                return Err(KernelError::PrecisionExhausted);
            }
            enc = eval_node(&self.node, prec, &mut Memo::new());
        }
    }

    /// The same value re-evaluated at `prec` bits.
    pub fn at_precision(&self, prec: u32) -> IntervalReal {
        IntervalReal {
            node: self.node.clone(),
            enclosure: eval_node(&self.node, prec, &mut Memo::new()),
            precision: prec,
        }
    }
}

impl fmt::Debug for IntervalReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.enclosure {
            Some(e) => write!(
                f,
                "Interval[{:e}, {:e}]@{}",
                e.lo.to_f64(),
                e.hi.to_f64(),
                self.precision
            ),
            None => write!(f, "Interval[unbounded]@{}", self.precision),
        }
    }
}

impl Field for IntervalReal {
    const KIND: BackendKind = BackendKind::Interval;

    fn from_rational(r: &BigRational) -> Self {
        IntervalReal::build(RNode::Const(r.clone()), DEFAULT_PRECISION)
    }

    fn add(&self, other: &Self) -> Self {
        self.binary(other, RNode::Add)
    }

    fn sub(&self, other: &Self) -> Self {
        self.binary(other, RNode::Sub)
    }

    fn mul(&self, other: &Self) -> Self {
        self.binary(other, RNode::Mul)
    }

    fn neg(&self) -> Self {
        IntervalReal {
            node: Arc::new(RNode::Neg(self.node.clone())),
            enclosure: self.enclosure.as_ref().map(Enclosure::neg),
            precision: self.precision,
        }
    }

    fn div(&self, other: &Self) -> Result<Self, KernelError> {
        let (s, prec) = other.sign_escalating()?;
        if s == Sign::Zero {
            return Err(KernelError::DivisionByZero);
        }
        let prec = prec.max(self.precision);
        Ok(IntervalReal::build(
            RNode::Div(self.node.clone(), other.node.clone()),
            prec,
        ))
    }

    fn sqrt(&self) -> Result<Self, KernelError> {
        let (s, prec) = self.sign_escalating()?;
        if s == Sign::Negative {
            return Err(KernelError::SqrtOfNegative);
        }
        Ok(IntervalReal::build(RNode::Sqrt(self.node.clone()), prec))
    }

    fn sign(&self) -> Result<Sign, KernelError> {
        Ok(self.sign_escalating()?.0)
    }

    fn to_f64(&self) -> f64 {
        let mut prec = self.precision;
        let mut enc = self.enclosure.clone();
        loop {
            if let Some(e) = &enc {
                if e.narrow_for_export() || prec >= MAX_PRECISION {
                    return e.mid_f64();
                }
            } else if prec >= MAX_PRECISION {
                return f64::NAN;
            }
            prec *= 2;
            enc = eval_node(&self.node, prec, &mut Memo::new());
        }
    }

    fn into_scalar(self) -> Scalar {
        Scalar::Interval(self)
    }
}

/// Enclosure of an exact tower element at `prec` bits.
pub fn enclose_tower(t: &TowerElem, prec: u32) -> Option<Enclosure> {
    fn go(t: &TowerElem, prec: u32, memo: &mut Memo) -> Option<Enclosure> {
        let key = t.node_id();
        if let Some(e) = memo.get(&key) {
            return e.clone();
        }
        let out = match t.parts() {
            None => Some(Enclosure::of_rational(t.as_rational().unwrap(), prec)),
            Some((lo, hi, rad)) => {
                let root = go(rad, prec, memo)?.sqrt(prec)?;
                Some(go(lo, prec, memo)?.add(&go(hi, prec, memo)?.mul(&root, prec), prec))
            }
        };
        memo.insert(key, out.clone());
        out
    }
    go(t, prec, &mut Memo::new())
}

/// Float export of an exact element by interval refinement until the
/// enclosure is narrower than `1e-15 · max(1, |mid|)`.
pub fn tower_to_f64(t: &TowerElem) -> f64 {
    let mut prec = DEFAULT_PRECISION;
    loop {
        let enc = enclose_tower(t, prec);
        match enc {
            Some(e) if e.narrow_for_export() || prec >= MAX_PRECISION => return e.mid_f64(),
            None if prec >= MAX_PRECISION => return f64::NAN,
            _ => prec *= 2,
        }
    }
}
