use std::fmt;

use super::Expr;

// Binding strength: sums 1, products 2, powers 4, atoms 5.
fn strength(e: &Expr) -> u8 {
    match e {
        Expr::Add(..) | Expr::Sub(..) => 1,
        Expr::Mul(..) | Expr::Div(..) => 2,
        Expr::Pow(..) => 4,
        _ => 5,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if strength(e) < min {
        write!(f, "(")?;
        write_expr(f, e)?;
        write!(f, ")")
    } else {
        write_expr(f, e)
    }
}

fn write_expr(f: &mut fmt::Formatter<'_>, e: &Expr) -> fmt::Result {
    match e {
        Expr::Unit => write!(f, "1"),
        Expr::Var => write!(f, "x"),
        Expr::Lit(n) => write!(f, "{n}"),
        Expr::Coeff(name) => write!(f, "{name}"),
        Expr::Add(l, r) | Expr::Sub(l, r) => {
            write_at(f, l, 1)?;
            write!(f, " {} ", if matches!(e, Expr::Add(..)) { '+' } else { '-' })?;
            write_at(f, r, 2)
        }
        Expr::Mul(l, r) | Expr::Div(l, r) => {
            write_at(f, l, 2)?;
            write!(f, "{}", if matches!(e, Expr::Mul(..)) { '*' } else { '/' })?;
            write_at(f, r, 3)
        }
        Expr::Pow(b, n) => {
            write_at(f, b, 4)?;
            write!(f, "^{n}")
        }
        Expr::Sqrt(a) => {
            write!(f, "sqrt(")?;
            write_expr(f, a)?;
            write!(f, ")")
        }
    }
}

/// Minimal-parenthesis rendering that parses back to the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_expr(f, self)
    }
}
