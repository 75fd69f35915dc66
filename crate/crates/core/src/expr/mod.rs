//! Segment-algebra expressions in one variable `x`.
//!
//! Values are lengths measured in multiples of the unit segment, so every
//! operation is partial in the way ruler-and-compass constructions are: a
//! difference must not be negative and a divisor must not vanish.

mod desugar;
mod oracle;
mod parse;
mod pretty;

use std::collections::BTreeMap;

use num_bigint::BigUint;
use num_rational::BigRational;
use num_traits::Signed;
use thiserror::Error;

pub use desugar::{desugar, LeftChain, PowerSchedule, Schedule, SquareAndMultiply};
pub use oracle::{eval_oracle, eval_oracle_scalar};
pub use parse::{parse, ParseError, MAX_EXPONENT};

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Expr {
    /// The unit segment.
    Unit,
    /// The variable segment `x`.
    Var,
    /// `n` unit segments laid end to end (`n ≠ 1`).
    Lit(BigUint),
    /// A named coefficient segment.
    Coeff(String),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Sqrt(Box<Expr>),
    /// Surface sugar; removed by [`desugar`].
    Pow(Box<Expr>, u32),
}

#[allow(clippy::should_implement_trait)]
impl Expr {
    pub fn lit(n: u64) -> Expr {
        if n == 1 {
            Expr::Unit
        } else {
            Expr::Lit(BigUint::from(n))
        }
    }

    pub fn coeff(name: &str) -> Expr {
        Expr::Coeff(name.to_string())
    }

    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::Add(Box::new(l), Box::new(r))
    }

    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::Sub(Box::new(l), Box::new(r))
    }

    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::Mul(Box::new(l), Box::new(r))
    }

    pub fn div(l: Expr, r: Expr) -> Expr {
        Expr::Div(Box::new(l), Box::new(r))
    }

    pub fn sqrt(e: Expr) -> Expr {
        Expr::Sqrt(Box::new(e))
    }

    pub fn pow(base: Expr, exp: u32) -> Expr {
        Expr::Pow(Box::new(base), exp)
    }

    pub fn depth(&self) -> usize {
        match self {
            Expr::Unit | Expr::Var | Expr::Lit(_) | Expr::Coeff(_) => 1,
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                1 + l.depth().max(r.depth())
            }
            Expr::Sqrt(e) | Expr::Pow(e, _) => 1 + e.depth(),
        }
    }

    pub fn contains_pow(&self) -> bool {
        match self {
            Expr::Pow(..) => true,
            Expr::Unit | Expr::Var | Expr::Lit(_) | Expr::Coeff(_) => false,
            Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                l.contains_pow() || r.contains_pow()
            }
            Expr::Sqrt(e) => e.contains_pow(),
        }
    }

    /// Coefficient names in first-occurrence order.
    pub fn coefficients(&self) -> Vec<String> {
        fn walk(e: &Expr, out: &mut Vec<String>) {
            match e {
                Expr::Coeff(n) => {
                    if !out.contains(n) {
                        out.push(n.clone());
                    }
                }
                Expr::Unit | Expr::Var | Expr::Lit(_) => {}
                Expr::Add(l, r) | Expr::Sub(l, r) | Expr::Mul(l, r) | Expr::Div(l, r) => {
                    walk(l, out);
                    walk(r, out);
                }
                Expr::Sqrt(e) | Expr::Pow(e, _) => walk(e, out),
            }
        }
        let mut out = Vec::new();
        walk(self, &mut out);
        out
    }
}

/// `true` for names matching `[a-z][a-z0-9]*` other than the reserved words.
pub fn is_coefficient_name(name: &str) -> bool {
    let mut chars = name.chars();
    matches!(chars.next(), Some('a'..='z'))
        && chars.all(|c| c.is_ascii_lowercase() || c.is_ascii_digit())
        && name != "x"
        && name != "sqrt"
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EnvError {
    #[error("`{0}` is not a valid coefficient name")]
    BadName(String),
    #[error("coefficient `{0}` must be nonnegative")]
    Negative(String),
}

/// Values of the coefficient segments, in unit multiples.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CoeffEnv {
    values: BTreeMap<String, BigRational>,
}

impl CoeffEnv {
    pub fn new() -> CoeffEnv {
        CoeffEnv::default()
    }

    pub fn insert(&mut self, name: &str, value: BigRational) -> Result<(), EnvError> {
        if !is_coefficient_name(name) {
            return Err(EnvError::BadName(name.to_string()));
        }
        if value.is_negative() {
            return Err(EnvError::Negative(name.to_string()));
        }
        self.values.insert(name.to_string(), value);
        Ok(())
    }

    pub fn with(mut self, name: &str, value: BigRational) -> Result<CoeffEnv, EnvError> {
        self.insert(name, value)?;
        Ok(self)
    }

    pub fn get(&self, name: &str) -> Option<&BigRational> {
        self.values.get(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, &BigRational)> {
        self.values.iter()
    }

    pub fn missing<'a>(&self, names: impl IntoIterator<Item = &'a String>) -> Vec<String> {
        names
            .into_iter()
            .filter(|n| !self.values.contains_key(*n))
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("`{node}` would be a negative segment")]
    NegativeResult { node: Expr },
    #[error("`{node}` divides by a zero segment")]
    DivisionByZero { node: Expr },
    #[error("`{node}` takes the square root of a negative quantity")]
    SqrtOfNegative { node: Expr },
    #[error("the variable segment must be nonnegative")]
    NegativeInput,
    #[error("coefficient `{0}` has no value")]
    MissingCoefficient(String),
    #[error(transparent)]
    Kernel(#[from] crate::kernel::KernelError),
}
