//! Reference semantics: plain field arithmetic by structural recursion.
//! The compiled constructions are checked against this.

use num_rational::BigRational;

use super::{CoeffEnv, EvalError, Expr};
use crate::kernel::{Field, KernelError, Scalar, Sign, TowerElem};

pub fn eval_oracle<F: Field>(e: &Expr, x: &F, env: &CoeffEnv) -> Result<F, EvalError> {
    if x.sign()? == Sign::Negative {
        return Err(EvalError::NegativeInput);
    }
    eval(e, x, env)
}

fn eval<F: Field>(e: &Expr, x: &F, env: &CoeffEnv) -> Result<F, EvalError> {
    Ok(match e {
        Expr::Unit => F::one(),
        Expr::Var => x.clone(),
        Expr::Lit(n) => F::from_rational(&BigRational::from_integer(n.clone().into())),
        Expr::Coeff(name) => {
            let v = env
                .get(name)
                .ok_or_else(|| EvalError::MissingCoefficient(name.clone()))?;
            F::from_rational(v)
        }
        Expr::Add(l, r) => eval(l, x, env)?.add(&eval(r, x, env)?),
        Expr::Sub(l, r) => {
            let d = eval(l, x, env)?.sub(&eval(r, x, env)?);
            if d.sign()? == Sign::Negative {
                return Err(EvalError::NegativeResult { node: e.clone() });
            }
            d
        }
        Expr::Mul(l, r) => eval(l, x, env)?.mul(&eval(r, x, env)?),
        Expr::Div(l, r) => {
            let num = eval(l, x, env)?;
            let den = eval(r, x, env)?;
            match num.div(&den) {
                Err(KernelError::DivisionByZero) => {
                    return Err(EvalError::DivisionByZero { node: e.clone() })
                }
                other => other?,
            }
        }
        Expr::Sqrt(a) => match eval(a, x, env)?.sqrt() {
            Err(KernelError::SqrtOfNegative) => {
                return Err(EvalError::SqrtOfNegative { node: e.clone() })
            }
            other => other?,
        },
        Expr::Pow(b, n) => {
            let base = eval(b, x, env)?;
            let mut acc = F::one();
            for _ in 0..*n {
                acc = acc.mul(&base);
            }
            acc
        }
    })
}

/// Backend-dispatching form of [`eval_oracle`].
pub fn eval_oracle_scalar(e: &Expr, x: &Scalar, env: &CoeffEnv) -> Result<Scalar, EvalError> {
    Ok(match x {
        Scalar::F64(v) => Scalar::F64(eval_oracle(e, v, env)?),
        Scalar::Interval(v) => Scalar::Interval(eval_oracle(e, v, env)?),
        Scalar::Exact(v) => Scalar::Exact(eval_oracle::<TowerElem>(e, v, env)?),
    })
}
