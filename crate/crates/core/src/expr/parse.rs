use std::fmt;

use num_bigint::BigUint;
use num_traits::One;
use thiserror::Error;

use super::{is_coefficient_name, Expr};

/// Largest exponent accepted after `^`.
pub const MAX_EXPONENT: u32 = 64;

const MAX_NESTING: usize = 200;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {offset}: {message} (expected {})", expected_list(.expected))]
pub struct ParseError {
    pub offset: usize,
    pub expected: Vec<String>,
    pub message: String,
}

fn expected_list(expected: &[String]) -> String {
    if expected.is_empty() {
        "nothing".to_string()
    } else {
        expected.join(" or ")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Num { int: String, frac: Option<String> },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Tok::Num { int, frac: None } => write!(f, "number `{int}`"),
            Tok::Num { int, frac: Some(d) } => write!(f, "number `{int}.{d}`"),
            Tok::Ident(s) => write!(f, "identifier `{s}`"),
            Tok::Plus => f.write_str("`+`"),
            Tok::Minus => f.write_str("`-`"),
            Tok::Star => f.write_str("`*`"),
            Tok::Slash => f.write_str("`/`"),
            Tok::Caret => f.write_str("`^`"),
            Tok::LParen => f.write_str("`(`"),
            Tok::RParen => f.write_str("`)`"),
            Tok::Eof => f.write_str("end of input"),
        }
    }
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                let int = text[start..i].to_string();
                let frac = if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    let fs = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    Some(text[fs..i].to_string())
                } else {
                    None
                };
                if int.is_empty() && frac.as_deref().is_none_or(str::is_empty)
                    || frac.as_deref() == Some("")
                {
                    return Err(ParseError {
                        offset: start,
                        expected: vec!["digit".into()],
                        message: "malformed number".into(),
                    });
                }
                out.push((start, Tok::Num { int, frac }));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
                continue;
            }
            _ => {
                return Err(ParseError {
                    offset: start,
                    expected: vec!["expression".into()],
                    message: format!(
                        "unexpected character `{}`",
                        text[start..].chars().next().unwrap_or('?')
                    ),
                })
            }
        };
        i += 1;
        out.push((start, tok));
    }
    out.push((text.len(), Tok::Eof));
    Ok(out)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    pos: usize,
    nesting: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].1
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].0
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].1.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error(&self, expected: &[&str], message: impl Into<String>) -> ParseError {
        ParseError {
            offset: self.offset(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            message: message.into(),
        }
    }

    fn unexpected(&self, expected: &[&str]) -> ParseError {
        self.error(expected, format!("unexpected {}", self.peek()))
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        self.nesting += 1;
        if self.nesting > MAX_NESTING {
            return Err(self.error(&["shallower expression"], "expression nested too deeply"));
        }
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    lhs = Expr::add(lhs, self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    lhs = Expr::sub(lhs, self.term()?);
                }
                _ => break,
            }
        }
        self.nesting -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    lhs = Expr::mul(lhs, self.power()?);
                }
                Tok::Slash => {
                    self.bump();
                    lhs = Expr::div(lhs, self.power()?);
                }
                _ => break,
            }
        }
        Ok(lhs)
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let mut base = self.primary()?;
        while *self.peek() == Tok::Caret {
            self.bump();
            let exp = match self.peek().clone() {
                Tok::Num { int, frac: None } => {
                    let n: Option<u32> = int.parse().ok();
                    match n {
                        Some(n) if (1..=MAX_EXPONENT).contains(&n) => n,
                        _ => {
                            return Err(self.error(
                                &["integer exponent in 1..=64"],
                                format!("exponent `{int}` out of range"),
                            ))
                        }
                    }
                }
                Tok::Minus => {
                    return Err(self.error(&["integer exponent in 1..=64"], "negative exponents are not allowed"))
                }
                _ => return Err(self.unexpected(&["integer exponent"])),
            };
            self.bump();
            base = Expr::pow(base, exp);
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek().clone() {
            Tok::Num { int, frac } => {
                self.bump();
                Ok(number(&int, frac.as_deref()))
            }
            Tok::Ident(name) => {
                let at = self.offset();
                self.bump();
                if name == "x" {
                    return Ok(Expr::Var);
                }
                if name == "sqrt" {
                    if *self.peek() != Tok::LParen {
                        return Err(self.unexpected(&["`(`"]));
                    }
                    self.bump();
                    let arg = self.expr()?;
                    self.expect_rparen()?;
                    return Ok(Expr::sqrt(arg));
                }
                if !is_coefficient_name(&name) {
                    return Err(ParseError {
                        offset: at,
                        expected: vec!["coefficient name matching [a-z][a-z0-9]*".into()],
                        message: format!("invalid identifier `{name}`"),
                    });
                }
                Ok(Expr::Coeff(name))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                self.expect_rparen()?;
                Ok(e)
            }
            Tok::Minus => {
                let msg = if matches!(self.toks[self.pos + 1].1, Tok::Num { .. }) {
                    "negative literals are not allowed; segments are nonnegative"
                } else {
                    "unary minus is not allowed; segments are nonnegative"
                };
                Err(self.error(&["number", "identifier", "`(`"], msg))
            }
            _ => Err(self.unexpected(&["number", "identifier", "`(`"])),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        if *self.peek() == Tok::RParen {
            self.bump();
            Ok(())
        } else {
            Err(self.unexpected(&["`)`"]))
        }
    }
}

/// Integer literals are unit sums; a decimal `i.f` is the quotient of the
/// digit string by the matching power of ten.
fn number(int: &str, frac: Option<&str>) -> Expr {
    let lit = |digits: &str| -> Expr {
        let n: BigUint = if digits.is_empty() {
            BigUint::default()
        } else {
            digits.parse().expect("lexer only passes digits")
        };
        if n.is_one() {
            Expr::Unit
        } else {
            Expr::Lit(n)
        }
    };
    match frac {
        None => lit(int),
        Some(f) => {
            let num = lit(&format!("{int}{f}"));
            let den = lit(&format!("1{}", "0".repeat(f.len())));
            Expr::div(num, den)
        }
    }
}

/// Parses segment-algebra text: `+ - * /`, `^` with a positive integer
/// exponent, `sqrt(…)`, parentheses, nonnegative numbers, `x`, and
/// coefficient identifiers.
pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        nesting: 0,
    };
    if *p.peek() == Tok::Eof {
        return Err(p.error(&["expression"], "empty input"));
    }
    let e = p.expr()?;
    if *p.peek() != Tok::Eof {
        return Err(p.unexpected(&["operator", "end of input"]));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn power_sugar() {
        assert_eq!(parse("x^2").unwrap(), Expr::pow(Expr::Var, 2));
    }

    #[test]
    fn polynomial_shape() {
        let e = parse("a0 + a1*x + a2*x^2").unwrap();
        let expect = Expr::add(
            Expr::add(Expr::coeff("a0"), Expr::mul(Expr::coeff("a1"), Expr::Var)),
            Expr::mul(Expr::coeff("a2"), Expr::pow(Expr::Var, 2)),
        );
        assert_eq!(e, expect);
    }

    #[test]
    fn unbalanced_paren_location() {
        let err = parse("sqrt(x").unwrap_err();
        assert_eq!(err.offset, 6);
        assert_eq!(err.expected, vec!["`)`".to_string()]);
    }

    #[test]
    fn rejects_negative_literals() {
        let err = parse("-3 + x").unwrap_err();
        assert_eq!(err.offset, 0);
        assert!(err.message.contains("negative literals"));
        assert!(parse("x^-2").is_err());
        assert!(parse("x * (-x)").is_err());
    }

    #[test]
    fn double_caret_is_an_error() {
        let err = parse("x^^2").unwrap_err();
        assert_eq!(err.offset, 2);
    }

    #[test]
    fn precedence_and_associativity() {
        assert_eq!(
            parse("x - 1 - x").unwrap(),
            Expr::sub(Expr::sub(Expr::Var, Expr::Unit), Expr::Var)
        );
        assert_eq!(
            parse("x / x * 1").unwrap(),
            Expr::mul(Expr::div(Expr::Var, Expr::Var), Expr::Unit)
        );
        assert_eq!(
            parse("x*x^3").unwrap(),
            Expr::mul(Expr::Var, Expr::pow(Expr::Var, 3))
        );
        assert_eq!(
            parse("sqrt(x)^2").unwrap(),
            Expr::pow(Expr::sqrt(Expr::Var), 2)
        );
        assert_eq!(
            parse("x^2^3").unwrap(),
            Expr::pow(Expr::pow(Expr::Var, 2), 3)
        );
    }

    #[test]
    fn literals() {
        assert_eq!(parse("1").unwrap(), Expr::Unit);
        assert_eq!(parse("3").unwrap(), Expr::lit(3));
        assert_eq!(parse("0").unwrap(), Expr::lit(0));
        assert_eq!(parse("2.5").unwrap(), Expr::div(Expr::lit(25), Expr::lit(10)));
        assert_eq!(parse("0.1").unwrap(), Expr::div(Expr::Unit, Expr::lit(10)));
        assert!(parse("1.").is_err());
        assert!(parse(".").is_err());
    }

    #[test]
    fn exponent_cap() {
        assert!(parse("x^64").is_ok());
        let err = parse("x^65").unwrap_err();
        assert_eq!(err.offset, 2);
        assert!(parse("x^0").is_err());
    }

    #[test]
    fn junk_is_located() {
        assert_eq!(parse("").unwrap_err().offset, 0);
        assert_eq!(parse("x + ").unwrap_err().offset, 4);
        assert_eq!(parse("x $").unwrap_err().offset, 2);
        assert_eq!(parse("x x").unwrap_err().offset, 2);
        assert_eq!(parse("Ab + x").unwrap_err().offset, 0);
        assert_eq!(parse("sqrt x").unwrap_err().offset, 5);
        assert!(parse("é").is_err());
    }

    #[test]
    fn deep_nesting_is_an_error_not_a_crash() {
        let text = format!("{}x{}", "(".repeat(5000), ")".repeat(5000));
        assert!(parse(&text).is_err());
    }
}
