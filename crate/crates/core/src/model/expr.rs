//! A tiny expression language in one variable `x`.
//!
//! Grammar (precedence low to high):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'x' | ('exp' | 'log') '(' expr ')' | 'pow' '(' expr ',' expr ')' | '(' expr ')'
//! ```

use std::fmt;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
#[error("syntax error at offset {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("log of negative argument {arg} at x = {x}")]
    LogOfNegative { x: f64, arg: f64 },
    #[error("expression is undefined (NaN) at x = {x}")]
    Undefined { x: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Exp(Box<Expr>),
    Log(Box<Expr>),
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let mut p = Parser { src: text.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.skip_ws();
        if p.pos < p.src.len() {
            return Err(p.error("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.eval(x),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x), b.eval(x));
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Exp(e) => e.eval(x).exp(),
            Expr::Log(e) => e.eval(x).ln(),
        }
    }

    /// Checked evaluation: reports logs of negative numbers and NaN results.
    pub fn try_eval(&self, x: f64) -> Result<f64, EvalError> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Var => x,
            Expr::Neg(e) => -e.try_eval(x)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.try_eval(x)?, b.try_eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => a / b,
                    BinOp::Pow => pow(a, b),
                }
            }
            Expr::Exp(e) => e.try_eval(x)?.exp(),
            Expr::Log(e) => {
                let arg = e.try_eval(x)?;
                if arg < 0.0 {
                    return Err(EvalError::LogOfNegative { x, arg });
                }
                arg.ln()
            }
        };
        if v.is_nan() {
            return Err(EvalError::Undefined { x });
        }
        Ok(v)
    }

    /// `ln(self(x))`, simplified structurally so that e.g. `exp(-x)` stays
    /// representable far beyond the underflow point of its value.
    pub fn ln_eval(&self, x: f64) -> f64 {
        let structural = match self {
            Expr::Exp(e) => e.eval(x),
            Expr::Bin(BinOp::Mul, a, b) => a.ln_eval(x) + b.ln_eval(x),
            Expr::Bin(BinOp::Div, a, b) => a.ln_eval(x) - b.ln_eval(x),
            Expr::Bin(BinOp::Pow, a, b) => {
                let p = b.eval(x);
                if p == 0.0 {
                    0.0
                } else {
                    p * a.ln_eval(x)
                }
            }
            _ => self.eval(x).ln(),
        };
        if structural.is_nan() {
            self.eval(x).ln()
        } else {
            structural
        }
    }
}

fn pow(a: f64, b: f64) -> f64 {
    if b == b.trunc() && b.abs() <= 64.0 {
        a.powi(b as i32)
    } else {
        a.powf(b)
    }
}

fn prec(e: &Expr) -> u8 {
    match e {
        Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Expr::Neg(_) => 3,
        Expr::Bin(BinOp::Pow, ..) => 4,
        Expr::Num(v) if *v < 0.0 || v.is_sign_negative() => 3,
        _ => 5,
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let wrap = |f: &mut fmt::Formatter<'_>, e: &Expr, min: u8| -> fmt::Result {
            if prec(e) < min {
                write!(f, "({e})")
            } else {
                write!(f, "{e}")
            }
        };
        match self {
            Expr::Num(v) => {
                if v.is_sign_negative() {
                    write!(f, "-{:?}", -v)
                } else {
                    write!(f, "{v:?}")
                }
            }
            Expr::Var => write!(f, "x"),
            Expr::Neg(e) => {
                write!(f, "-")?;
                wrap(f, e, 3)
            }
            Expr::Bin(op, a, b) => {
                let (sym, lmin, rmin) = match op {
                    BinOp::Add => ("+", 1, 2),
                    BinOp::Sub => ("-", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                wrap(f, a, lmin)?;
                write!(f, " {sym} ")?;
                wrap(f, b, rmin)
            }
            Expr::Exp(e) => write!(f, "exp({e})"),
            Expr::Log(e) => write!(f, "log({e})"),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, message: &str) -> ParseError {
        ParseError { position: self.pos, message: message.to_string() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
                match name {
                    "x" => Ok(Expr::Var),
                    "exp" | "log" => {
                        self.expect(b'(')?;
                        let arg = self.expr()?;
                        self.expect(b')')?;
                        Ok(if name == "exp" { Expr::Exp(Box::new(arg)) } else { Expr::Log(Box::new(arg)) })
                    }
                    "pow" => {
                        self.expect(b'(')?;
                        let a = self.expr()?;
                        self.expect(b',')?;
                        let b = self.expr()?;
                        self.expect(b')')?;
                        Ok(Expr::Bin(BinOp::Pow, Box::new(a), Box::new(b)))
                    }
                    _ => Err(ParseError { position: start, message: format!("unknown identifier '{name}'") }),
                }
            }
            Some(c) => Err(self.error(&format!("unexpected '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        let digits = |p: &mut Self| {
            while p.pos < p.src.len() && p.src[p.pos].is_ascii_digit() {
                p.pos += 1;
            }
        };
        digits(self);
        if self.src.get(self.pos) == Some(&b'.') {
            self.pos += 1;
            digits(self);
        }
        if matches!(self.src.get(self.pos), Some(b'e' | b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+' | b'-')) {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                digits(self);
            } else {
                // `2exp(x)` is not valid anyway; report at the exponent marker.
                self.pos = save;
                return Err(self.error("malformed exponent"));
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
        match text.parse::<f64>() {
            Ok(v) if v.is_finite() => Ok(Expr::Num(v)),
            _ => Err(ParseError { position: start, message: format!("invalid number '{text}'") }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn examples() {
        assert_eq!(Expr::parse("2*x^2").unwrap().eval(3.0), 18.0);
        assert_eq!(Expr::parse("exp(-x)").unwrap().eval(0.0), 1.0);
        let err = Expr::parse("x+*2").unwrap_err();
        assert_eq!(err.position, 2);
    }

    #[test]
    fn precedence_and_associativity() {
        let e = |s: &str, x: f64| Expr::parse(s).unwrap().eval(x);
        assert_eq!(e("-x^2", 3.0), -9.0);
        assert_eq!(e("2^3^2", 0.0), 512.0);
        assert_eq!(e("x^-1", 4.0), 0.25);
        assert_eq!(e("8/2/2", 0.0), 2.0);
        assert_eq!(e("1 - 2 - 3", 0.0), -4.0);
        assert_eq!(e("pow(x, 0.5) + log(exp(2))", 9.0), 5.0);
        assert_eq!(e("1.5e2 * x", 2.0), 300.0);
    }

    #[test]
    fn rejects_outside_grammar() {
        for bad in ["", "x +", "sin(x)", "y", "(x", "x)", "2 x", "1e", "exp x", "pow(x)"] {
            assert!(Expr::parse(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn domain_errors_are_per_call() {
        let e = Expr::parse("log(x - 1)").unwrap();
        assert!(e.try_eval(2.0).is_ok());
        assert!(matches!(e.try_eval(0.5), Err(EvalError::LogOfNegative { .. })));
        assert!(matches!(Expr::parse("0/0").unwrap().try_eval(1.0), Err(EvalError::Undefined { .. })));
    }

    #[test]
    fn log_evaluation_survives_underflow() {
        let e = Expr::parse("2*exp(-x)/x^3").unwrap();
        let x = 2000.0;
        let expected = 2f64.ln() - x - 3.0 * x.ln();
        assert!((e.ln_eval(x) - expected).abs() < 1e-12);
        assert_eq!(e.eval(x), 0.0);
    }

    fn arb_expr() -> impl Strategy<Value = Expr> {
        let leaf = prop_oneof![(-5.0f64..5.0).prop_map(Expr::Num), Just(Expr::Var)];
        leaf.prop_recursive(4, 24, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(|e| Expr::Neg(Box::new(e))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(BinOp::Add, Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(BinOp::Sub, Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(BinOp::Mul, Box::new(a), Box::new(b))),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Expr::Bin(BinOp::Div, Box::new(a), Box::new(b))),
                (inner.clone(), 0u8..4).prop_map(|(a, p)| Expr::Bin(BinOp::Pow, Box::new(a), Box::new(Expr::Num(p as f64)))),
                inner.clone().prop_map(|e| Expr::Exp(Box::new(Expr::Bin(BinOp::Mul, Box::new(Expr::Num(0.1)), Box::new(e))))),
                inner.prop_map(|e| Expr::Log(Box::new(e))),
            ]
        })
    }

    proptest! {
        #[test]
        fn print_parse_roundtrip(e in arb_expr(), xs in prop::collection::vec(0.01f64..50.0, 8)) {
            let printed = e.to_string();
            let back = Expr::parse(&printed).unwrap();
            for x in xs {
                let (u, v) = (e.eval(x), back.eval(x));
                prop_assert!(u.to_bits() == v.to_bits() || (u.is_nan() && v.is_nan()), "{printed}: {u} vs {v}");
            }
        }
    }
}
