//! Recursive-descent parser for the expression grammar.

use super::{Exponent, Expr, Var};
use std::fmt;

/// Parse failure with the byte offset of the offending token.
#[derive(Clone, Debug, PartialEq, Eq, thiserror::Error)]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "parse error at byte {}: {}", self.position, self.message)
    }
}

pub fn parse(text: &str) -> Result<Expr, ParseError> {
    let mut p = Parser {
        src: text.as_bytes(),
        pos: 0,
    };
    p.skip_ws();
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError {
            position: self.pos.min(self.src.len()),
            message: msg.into(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            self.skip_ws();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.err(format!("expected '{}'", c as char)))
        }
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                let rhs = self.term()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'-') {
                let rhs = self.term()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    // term := unary (('*'|'/') unary)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                let rhs = self.unary()?;
                lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(b'/') {
                let rhs = self.unary()?;
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    // unary := '-' unary | power
    // A minus directly on a bare numeric literal folds into the literal so
    // that printed negative constants round-trip structurally.
    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat(b'-') {
            let inner = self.unary()?;
            return Ok(match inner {
                Expr::Num(v) => Expr::Num(-v),
                other => Expr::Neg(Box::new(other)),
            });
        }
        self.power()
    }

    // power := primary ('^' exponent)?
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let q = self.exponent()?;
            return Ok(Expr::Pow(Box::new(base), q));
        }
        Ok(base)
    }

    // exponent := '(' rational ')' | ['-'] integer
    // A bare exponent stops before '/': in `x^2/2` the slash divides, so
    // fractional exponents are written parenthesized (`x^(4/3)`) or with
    // the pow/spow/apow call forms.
    fn exponent(&mut self) -> Result<Exponent, ParseError> {
        if self.eat(b'(') {
            let q = self.rational()?;
            self.expect(b')')?;
            return Ok(q);
        }
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let start = self.pos;
        let num = self.integer().map_err(|_| ParseError {
            position: start,
            message: "exponent must be a rational literal like 3, 4/3 or -1/2".into(),
        })?;
        let q = Exponent::from(num);
        Ok(if neg { -q } else { q })
    }

    // rational := ['-'|'+'] integer ('/' integer)?
    fn rational(&mut self) -> Result<Exponent, ParseError> {
        let neg = if self.eat(b'-') {
            true
        } else {
            self.eat(b'+');
            false
        };
        let start = self.pos;
        let num = self.integer().map_err(|_| ParseError {
            position: start,
            message: "exponent must be a rational literal like 3, 4/3 or -1/2".into(),
        })?;
        let den = if self.eat(b'/') {
            let d = self.integer()?;
            if d == 0 {
                return Err(self.err("zero denominator in exponent"));
            }
            d
        } else {
            1
        };
        let q = Exponent::new(num, den);
        Ok(if neg { -q } else { q })
    }

    fn integer(&mut self) -> Result<i64, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected an integer"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v = text.parse::<i64>().map_err(|_| ParseError {
            position: start,
            message: "integer literal out of range".into(),
        })?;
        self.skip_ws();
        Ok(v)
    }

    // primary := number | ident call? | '(' expr ')'
    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                self.skip_ws();
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(c) => Err(self.err(format!("unexpected character '{}'", c as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
        }
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mark = self.pos;
            self.pos += 1;
            if matches!(self.peek(), Some(b'+') | Some(b'-')) {
                self.pos += 1;
            }
            let digits_start = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits_start {
                // not an exponent suffix after all (e.g. "2e" would be junk,
                // but "2*e" never reaches here); rewind
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        let v = text.parse::<f64>().map_err(|_| ParseError {
            position: start,
            message: format!("bad number literal '{}'", text),
        })?;
        self.skip_ws();
        Ok(Expr::Num(v))
    }

    fn ident(&mut self) -> Result<Expr, ParseError> {
        let start = self.pos;
        while self.pos < self.src.len()
            && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        self.skip_ws();
        match name {
            "t" => Ok(Expr::Var(Var::T)),
            "abs" | "sqrt" => {
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b')')?;
                Ok(if name == "abs" {
                    Expr::Abs(Box::new(e))
                } else {
                    Expr::Sqrt(Box::new(e))
                })
            }
            "pow" | "spow" | "apow" => {
                self.expect(b'(')?;
                let e = self.expr()?;
                self.expect(b',')?;
                let q = self.rational()?;
                self.expect(b')')?;
                Ok(match name {
                    "pow" => Expr::Pow(Box::new(e), q),
                    "spow" => Expr::SPow(Box::new(e), q),
                    _ => Expr::APow(Box::new(e), q),
                })
            }
            _ => {
                if let Some(rest) = name.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                        let idx: usize = rest.parse().map_err(|_| ParseError {
                            position: start,
                            message: format!("state index out of range in '{}'", name),
                        })?;
                        if idx == 0 {
                            return Err(ParseError {
                                position: start,
                                message: "state variables are 1-based (x1, x2, ...)".into(),
                            });
                        }
                        return Ok(Expr::Var(Var::X(idx - 1)));
                    }
                }
                Err(ParseError {
                    position: start,
                    message: format!("unknown identifier '{}'", name),
                })
            }
        }
    }
}
