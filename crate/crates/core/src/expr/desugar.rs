use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use super::Expr;

/// A way of expanding `base^n` into products.
pub trait PowerSchedule: Send + Sync {
    fn name(&self) -> &'static str;

    /// `base^n` for `n ≥ 1`, as a Pow-free product tree of copies of `base`.
    fn expand(&self, base: &Expr, n: u32) -> Expr;
}

/// `((b·b)·b)…`, one more factor per step.
#[derive(Debug, Clone, Copy, Default)]
pub struct LeftChain;

impl PowerSchedule for LeftChain {
    fn name(&self) -> &'static str {
        "left-chain"
    }

    fn expand(&self, base: &Expr, n: u32) -> Expr {
        (1..n.max(1)).fold(base.clone(), |acc, _| Expr::mul(acc, base.clone()))
    }
}

/// Binary exponentiation: even powers square a half power, odd powers
/// multiply the previous power by the base. Repeated subtrees are left for
/// the compiler to share.
#[derive(Debug, Clone, Copy, Default)]
pub struct SquareAndMultiply;

impl PowerSchedule for SquareAndMultiply {
    fn name(&self) -> &'static str {
        "square-and-multiply"
    }

    fn expand(&self, base: &Expr, n: u32) -> Expr {
        match n {
            0 | 1 => base.clone(),
            n if n % 2 == 0 => {
                let half = self.expand(base, n / 2);
                Expr::mul(half.clone(), half)
            }
            n => Expr::mul(self.expand(base, n - 1), base.clone()),
        }
    }
}

/// The built-in schedules by name.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Schedule {
    LeftChain,
    #[default]
    SquareAndMultiply,
}

impl Schedule {
    pub const ALL: [Schedule; 2] = [Schedule::LeftChain, Schedule::SquareAndMultiply];

    pub fn arc(self) -> Arc<dyn PowerSchedule> {
        match self {
            Schedule::LeftChain => Arc::new(LeftChain),
            Schedule::SquareAndMultiply => Arc::new(SquareAndMultiply),
        }
    }

    pub fn strategy(self) -> &'static dyn PowerSchedule {
        match self {
            Schedule::LeftChain => &LeftChain,
            Schedule::SquareAndMultiply => &SquareAndMultiply,
        }
    }

    pub fn name(self) -> &'static str {
        self.strategy().name()
    }
}

impl fmt::Display for Schedule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Schedule {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "left-chain" => Ok(Schedule::LeftChain),
            "square-and-multiply" => Ok(Schedule::SquareAndMultiply),
            other => Err(format!("unknown schedule `{other}`")),
        }
    }
}

/// Removes every `Pow` node using `schedule`. A zero exponent (not produced
/// by the parser) becomes the unit.
pub fn desugar(e: &Expr, schedule: &dyn PowerSchedule) -> Expr {
    match e {
        Expr::Unit | Expr::Var | Expr::Lit(_) | Expr::Coeff(_) => e.clone(),
        Expr::Add(l, r) => Expr::add(desugar(l, schedule), desugar(r, schedule)),
        Expr::Sub(l, r) => Expr::sub(desugar(l, schedule), desugar(r, schedule)),
        Expr::Mul(l, r) => Expr::mul(desugar(l, schedule), desugar(r, schedule)),
        Expr::Div(l, r) => Expr::div(desugar(l, schedule), desugar(r, schedule)),
        Expr::Sqrt(a) => Expr::sqrt(desugar(a, schedule)),
        Expr::Pow(_, 0) => Expr::Unit,
        Expr::Pow(b, n) => schedule.expand(&desugar(b, schedule), *n),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn xx() -> Expr {
        Expr::mul(Expr::Var, Expr::Var)
    }

    #[test]
    fn cube_by_left_chain() {
        let e = desugar(&Expr::pow(Expr::Var, 3), &LeftChain);
        assert_eq!(e, Expr::mul(xx(), Expr::Var));
    }

    #[test]
    fn fourth_power_by_squaring() {
        let e = desugar(&Expr::pow(Expr::Var, 4), &SquareAndMultiply);
        assert_eq!(e, Expr::mul(xx(), xx()));
        let e = desugar(&Expr::pow(Expr::Var, 4), &LeftChain);
        assert_eq!(e, Expr::mul(Expr::mul(xx(), Expr::Var), Expr::Var));
    }

    #[test]
    fn exponent_one_is_identity() {
        for s in [Schedule::LeftChain, Schedule::SquareAndMultiply] {
            assert_eq!(desugar(&Expr::pow(Expr::Var, 1), s.strategy()), Expr::Var);
        }
    }

    #[test]
    fn nested_powers_vanish() {
        let e = crate::expr::parse("sqrt(x^3 + 1)^2 * a^5").unwrap();
        for s in [Schedule::LeftChain, Schedule::SquareAndMultiply] {
            assert!(!desugar(&e, s.strategy()).contains_pow());
        }
    }

    #[test]
    fn schedule_names_parse() {
        for s in [Schedule::LeftChain, Schedule::SquareAndMultiply] {
            assert_eq!(s.name().parse::<Schedule>().unwrap(), s);
        }
    }
}
