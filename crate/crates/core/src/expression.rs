//! A tiny expression language in one variable `m`:
//! constants, `+ - * /`, integer powers `^k`, and `exp ln cos abs`.
//!
//! `print` writes every compound node inside parentheses, so
//! `parse(&print(e)) == e` for any tree the parser can produce
//! (constants are non-negative; a leading minus is a `Neg` node).

use std::fmt;

use crate::error::{Error, Result};
use crate::numerics::jet::Jet;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Func(Func, Box<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Ln,
    Cos,
    Abs,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Cos => "cos",
            Func::Abs => "abs",
        }
    }

    fn from_name(s: &str) -> Option<Self> {
        Some(match s {
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "cos" => Func::Cos,
            "abs" => Func::Abs,
            _ => return None,
        })
    }
}

impl Expr {
    pub fn eval(&self, m: f64) -> Result<f64> {
        let v = match self {
            Expr::Const(c) => *c,
            Expr::Var => m,
            Expr::Neg(a) => -a.eval(m)?,
            Expr::Add(a, b) => a.eval(m)? + b.eval(m)?,
            Expr::Sub(a, b) => a.eval(m)? - b.eval(m)?,
            Expr::Mul(a, b) => a.eval(m)? * b.eval(m)?,
            Expr::Div(a, b) => {
                let d = b.eval(m)?;
                if d == 0.0 {
                    return Err(Error::Domain(format!("division by zero at m = {m}")));
                }
                a.eval(m)? / d
            }
            Expr::Pow(a, k) => {
                let base = a.eval(m)?;
                if base == 0.0 && *k < 0 {
                    return Err(Error::Domain(format!("zero to a negative power at m = {m}")));
                }
                base.powi(*k)
            }
            Expr::Func(f, a) => {
                let x = a.eval(m)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x <= 0.0 {
                            return Err(Error::Domain(format!("ln of {x} at m = {m}")));
                        }
                        x.ln()
                    }
                    Func::Cos => x.cos(),
                    Func::Abs => x.abs(),
                }
            }
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Domain(format!("non-finite value at m = {m}")))
        }
    }

    /// Taylor jet of the expression at `m`; fails where `abs` has a kink.
    pub fn eval_jet(&self, m: f64, order: usize) -> Result<Jet> {
        Ok(match self {
            Expr::Const(c) => Jet::constant(*c, order),
            Expr::Var => Jet::variable(m, order),
            Expr::Neg(a) => -a.eval_jet(m, order)?,
            Expr::Add(a, b) => a.eval_jet(m, order)? + b.eval_jet(m, order)?,
            Expr::Sub(a, b) => a.eval_jet(m, order)? - b.eval_jet(m, order)?,
            Expr::Mul(a, b) => a.eval_jet(m, order)? * b.eval_jet(m, order)?,
            Expr::Div(a, b) => {
                let d = b.eval_jet(m, order)?;
                if d.value() == 0.0 {
                    return Err(Error::Domain(format!("division by zero at m = {m}")));
                }
                a.eval_jet(m, order)? / d
            }
            Expr::Pow(a, k) => a.eval_jet(m, order)?.powi(*k),
            Expr::Func(f, a) => {
                let x = a.eval_jet(m, order)?;
                match f {
                    Func::Exp => x.exp(),
                    Func::Ln => {
                        if x.value() <= 0.0 {
                            return Err(Error::Domain(format!("ln of {} at m = {m}", x.value())));
                        }
                        x.ln()
                    }
                    Func::Cos => x.cos(),
                    Func::Abs => {
                        x.abs().ok_or_else(|| Error::Domain(format!("abs is not differentiable at m = {m}")))?
                    }
                }
            }
        })
    }

    pub fn print(&self) -> String {
        self.to_string()
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Const(c) => write!(f, "{c:?}"),
            Expr::Var => write!(f, "m"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, k) => write!(f, "({a}^{k})"),
            Expr::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

/// Parses an expression in `m`.
pub fn parse(text: &str) -> Result<Expr> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.error("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn error(&self, msg: &str) -> Error {
        Error::Parse { pos: self.pos, msg: msg.to_string() }
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

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.peek() == Some(c) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        let start = {
            self.skip_ws();
            self.pos
        };
        if self.src.get(self.pos) == Some(&b'-') {
            self.pos += 1;
        }
        let digits = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.error("expected an integer exponent"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let k: i32 =
            text.parse().map_err(|_| Error::Parse { pos: start, msg: format!("exponent {text} out of range") })?;
        Ok(Expr::Pow(Box::new(base), k))
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
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
                let word = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if word == "m" {
                    return Ok(Expr::Var);
                }
                let Some(func) = Func::from_name(word) else {
                    self.pos = start;
                    return Err(self.error(&format!("unknown identifier '{word}'")));
                };
                self.expect(b'(')?;
                let arg = self.expr()?;
                self.expect(b')')?;
                Ok(Expr::Func(func, Box::new(arg)))
            }
            Some(_) => Err(self.error("unexpected character")),
            None => Err(self.error("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
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
        if matches!(self.src.get(self.pos), Some(b'e') | Some(b'E')) {
            let save = self.pos;
            self.pos += 1;
            if matches!(self.src.get(self.pos), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let exp_start = self.pos;
            digits(self);
            if self.pos == exp_start {
                self.pos = save;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .map(Expr::Const)
            .ok_or(Error::Parse { pos: start, msg: format!("invalid number '{text}'") })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_evaluation() {
        let e = parse("1 + 2*m^2 - m/4").unwrap();
        assert!((e.eval(0.5).unwrap() - (1.0 + 0.5 - 0.125)).abs() < 1e-15);
        let e = parse("-m^2").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), -9.0);
        let e = parse("exp(ln(2)) * cos(0) + abs(-3)").unwrap();
        assert!((e.eval(0.0).unwrap() - 5.0).abs() < 1e-15);
        let e = parse("m^-2").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 0.25);
        let e = parse("1.5e-1*m").unwrap();
        assert!((e.eval(2.0).unwrap() - 0.3).abs() < 1e-15);
    }

    #[test]
    fn errors_carry_positions() {
        match parse("1 + * m") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        match parse("sin(m)") {
            Err(Error::Parse { pos, msg }) => {
                assert_eq!(pos, 0);
                assert!(msg.contains("sin"));
            }
            other => panic!("{other:?}"),
        }
        assert!(parse("m^x").is_err());
        assert!(parse("(m + 1").is_err());
        assert!(parse("m m").is_err());
        assert!(parse("").is_err());
    }

    #[test]
    fn domain_errors() {
        let e = parse("ln(m-2)").unwrap();
        assert!(matches!(e.eval(0.0), Err(Error::Domain(_))));
        assert!(parse("1/m").unwrap().eval(0.0).is_err());
    }

    #[test]
    fn print_round_trip() {
        for src in ["0.5*m^2", "-(m - 1)^3 / exp(m)", "abs(m) + ln(2 + cos(m))", "m^-2 + 1e-7"] {
            let e = parse(src).unwrap();
            assert_eq!(parse(&e.print()).unwrap(), e, "{src} -> {}", e.print());
        }
    }

    #[test]
    fn jets_match_eval() {
        let e = parse("exp(0.3*m) * cos(m)^2 - ln(2 + m) / m").unwrap();
        let j = e.eval_jet(0.4, 3).unwrap();
        assert!((j.value() - e.eval(0.4).unwrap()).abs() < 1e-14);
        let h = 1e-5;
        let fd = (e.eval(0.4 + h).unwrap() - e.eval(0.4 - h).unwrap()) / (2.0 * h);
        assert!((j.derivative(1) - fd).abs() < 1e-8);
        assert!(parse("abs(m)").unwrap().eval_jet(0.0, 2).is_err());
    }
}
