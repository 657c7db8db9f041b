//! Recursive-descent parser for the expression grammar.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | var | 'pi' | func '(' args ')' | '(' expr ')'
//! func  := pow(u, c) | exp(u) | log(u) | ln(u) | sqrt(u) | mlf(λ, p, b; u)
//! ```
//!
//! Exponents must fold to constants. The variable may be spelled `x`, `psi`,
//! `Psi`, `t`, `w`, `y`, `z` or `E`.

use super::Expr;
use crate::error::{Error, Result};
use crate::specfun::MLSpec;

const VARIABLES: [&str; 8] = ["x", "psi", "Psi", "t", "w", "y", "z", "E"];

/// Parse an expression in the single variable.
pub fn parse(src: &str) -> Result<Expr> {
    let mut p = Parser { src: src.as_bytes(), pos: 0 };
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

impl<'a> Parser<'a> {
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

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<()> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.error(&format!("expected '{}'", c as char)))
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut acc = self.term()?;
        loop {
            if self.eat(b'+') {
                acc = acc.add(&self.term()?);
            } else if self.eat(b'-') {
                acc = acc.sub(&self.term()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut acc = self.unary()?;
        loop {
            if self.eat(b'*') {
                acc = acc.mul(&self.unary()?);
            } else if self.eat(b'/') {
                acc = acc.div(&self.unary()?);
            } else {
                return Ok(acc);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(self.unary()?.neg());
        }
        if self.eat(b'+') {
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.eat(b'^') {
            let at = self.pos;
            let exponent = self.unary()?;
            let alpha = exponent
                .as_const()
                .ok_or(Error::Parse { pos: at, msg: "exponent must be a constant".into() })?;
            return Ok(base.powf(alpha));
        }
        Ok(base)
    }

    fn constant(&mut self) -> Result<f64> {
        let at = self.pos;
        self.expr()?
            .as_const()
            .ok_or(Error::Parse { pos: at, msg: "expected a constant".into() })
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.error("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.identifier(),
            Some(c) => Err(self.error(&format!("unexpected character '{}'", c as char))),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        let s = self.src;
        let digits = |p: &mut usize| {
            while *p < s.len() && s[*p].is_ascii_digit() {
                *p += 1;
            }
        };
        digits(&mut self.pos);
        if self.pos < s.len() && s[self.pos] == b'.' {
            self.pos += 1;
            digits(&mut self.pos);
        }
        if self.pos < s.len() && (s[self.pos] == b'e' || s[self.pos] == b'E') {
            let mut q = self.pos + 1;
            if q < s.len() && (s[q] == b'+' || s[q] == b'-') {
                q += 1;
            }
            if q < s.len() && s[q].is_ascii_digit() {
                self.pos = q;
                digits(&mut self.pos);
            }
        }
        let text = std::str::from_utf8(&s[start..self.pos]).expect("ascii");
        text.parse::<f64>()
            .map(Expr::constant)
            .map_err(|_| Error::Parse { pos: start, msg: format!("bad number '{text}'") })
    }

    fn identifier(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        if VARIABLES.contains(&name) {
            return Ok(Expr::x());
        }
        if name == "pi" {
            return Ok(Expr::constant(std::f64::consts::PI));
        }
        let unknown = || Error::Parse { pos: start, msg: format!("unknown identifier '{name}'") };
        if !matches!(name, "pow" | "exp" | "log" | "ln" | "sqrt" | "mlf") {
            return Err(unknown());
        }
        self.expect(b'(')?;
        let out = match name {
            "pow" => {
                let u = self.expr()?;
                self.expect(b',')?;
                let alpha = self.constant()?;
                u.powf(alpha)
            }
            "exp" => self.expr()?.exp(),
            "log" | "ln" => self.expr()?.ln(),
            "sqrt" => self.expr()?.powf(0.5),
            "mlf" => {
                let lambda = self.constant()?;
                self.expect(b',')?;
                let p = self.constant()?;
                self.expect(b',')?;
                let b = self.constant()?;
                self.expect(b';')?;
                let u = self.expr()?;
                let spec = MLSpec::new(lambda, p, b).map_err(|e| Error::Parse { pos: start, msg: e.to_string() })?;
                u.ml(spec)
            }
            _ => return Err(unknown()),
        };
        self.expect(b')')?;
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn precedence_and_associativity() {
        let e = parse("1 + 2*x^2 - x/4").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 1.0 + 8.0 - 0.5);
        let e = parse("-x^2").unwrap();
        assert_eq!(e.eval(3.0).unwrap(), -9.0);
        let e = parse("2^-1").unwrap();
        assert_eq!(e.as_const(), Some(0.5));
    }

    #[test]
    fn functions_and_variables() {
        let e = parse("sqrt(Psi) + pow(psi, 2) + exp(0) + ln(E)").unwrap();
        assert!((e.eval(4.0).unwrap() - (2.0 + 16.0 + 1.0 + 4f64.ln())).abs() < 1e-14);
        let e = parse("1.5e-1*x").unwrap();
        assert_eq!(e.eval(2.0).unwrap(), 0.3);
    }

    #[test]
    fn errors_carry_positions() {
        match parse("x + foo(x)") {
            Err(Error::Parse { pos, .. }) => assert_eq!(pos, 4),
            other => panic!("{other:?}"),
        }
        assert!(matches!(parse("x^x"), Err(Error::Parse { .. })));
        assert!(matches!(parse("(x"), Err(Error::Parse { .. })));
        assert!(matches!(parse("x 2"), Err(Error::Parse { .. })));
        assert!(matches!(parse("mlf(1, 0, 1; x)"), Err(Error::Parse { .. })));
    }
}
