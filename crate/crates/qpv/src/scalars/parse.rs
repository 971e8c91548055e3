//! Recursive-descent parser for scalar literals.
//!
//! Grammar (no implicit multiplication; `^` binds tightest and takes an
//! optionally negative integer exponent):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := factor (('*' | '/') factor)*
//! factor := '-'* atom ('^' int)?
//! atom   := integer | 'q' | 'zeta' | '(' expr ')'
//! ```
//!
//! `q` names the field's designated element; `zeta` is an alias accepted in
//! root-of-unity fields.

use super::{FieldKind, Scalar, ScalarField};
use crate::error::Error;
use crate::Result;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Int(i64),
    Q,
    Zeta,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn lex(input: &str) -> Result<Vec<Tok>> {
    let mut toks = Vec::new();
    let mut chars = input.chars().peekable();
    while let Some(&c) = chars.peek() {
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                chars.next();
            }
            '0'..='9' => {
                let mut v: i64 = 0;
                while let Some(&d) = chars.peek() {
                    if let Some(dig) = d.to_digit(10) {
                        v = v
                            .checked_mul(10)
                            .and_then(|v| v.checked_add(dig as i64))
                            .ok_or_else(|| Error::parse("integer literal overflows"))?;
                        chars.next();
                    } else {
                        break;
                    }
                }
                toks.push(Tok::Int(v));
            }
            '+' => {
                chars.next();
                toks.push(Tok::Plus);
            }
            '-' => {
                chars.next();
                toks.push(Tok::Minus);
            }
            '*' => {
                chars.next();
                toks.push(Tok::Star);
            }
            '/' => {
                chars.next();
                toks.push(Tok::Slash);
            }
            '^' => {
                chars.next();
                toks.push(Tok::Caret);
            }
            '(' => {
                chars.next();
                toks.push(Tok::LParen);
            }
            ')' => {
                chars.next();
                toks.push(Tok::RParen);
            }
            c if c.is_ascii_alphabetic() => {
                let mut name = String::new();
                while let Some(&d) = chars.peek() {
                    if d.is_ascii_alphanumeric() || d == '_' {
                        name.push(d);
                        chars.next();
                    } else {
                        break;
                    }
                }
                match name.as_str() {
                    "q" => toks.push(Tok::Q),
                    "zeta" => toks.push(Tok::Zeta),
                    other => {
                        return Err(Error::parse(format!(
                            "unknown name {other:?} in scalar expression"
                        )))
                    }
                }
            }
            other => {
                return Err(Error::parse(format!(
                    "unexpected character {other:?} in scalar expression"
                )))
            }
        }
    }
    Ok(toks)
}

struct Parser<'a> {
    toks: Vec<Tok>,
    pos: usize,
    field: &'a ScalarField,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn bump(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == Some(t) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Scalar> {
        let mut acc = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                let rhs = self.term()?;
                acc = &acc + &rhs;
            } else if self.eat(&Tok::Minus) {
                let rhs = self.term()?;
                acc = &acc - &rhs;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Scalar> {
        let mut acc = self.factor()?;
        loop {
            if self.eat(&Tok::Star) {
                let rhs = self.factor()?;
                acc = &acc * &rhs;
            } else if self.eat(&Tok::Slash) {
                let rhs = self.factor()?;
                acc = acc.div(&rhs, self.field)?;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    fn factor(&mut self) -> Result<Scalar> {
        let mut negate = false;
        while self.eat(&Tok::Minus) {
            negate = !negate;
        }
        let base = self.atom()?;
        let val = if self.eat(&Tok::Caret) {
            let exp = self.exponent()?;
            base.pow(exp, self.field)?
        } else {
            base
        };
        Ok(if negate { -&val } else { val })
    }

    fn exponent(&mut self) -> Result<i64> {
        let mut neg = false;
        while self.eat(&Tok::Minus) {
            neg = !neg;
        }
        if self.eat(&Tok::LParen) {
            let e = self.exponent()?;
            if !self.eat(&Tok::RParen) {
                return Err(Error::parse("expected ')' after exponent"));
            }
            return Ok(if neg { -e } else { e });
        }
        match self.bump() {
            Some(Tok::Int(v)) => Ok(if neg { -v } else { v }),
            other => Err(Error::parse(format!(
                "expected integer exponent, found {other:?}"
            ))),
        }
    }

    fn atom(&mut self) -> Result<Scalar> {
        match self.bump() {
            Some(Tok::Int(v)) => Ok(self.field.from_i64(v)),
            Some(Tok::Q) => Ok(self.field.q()),
            Some(Tok::Zeta) => match self.field.kind {
                FieldKind::Cyclotomic { .. } => Ok(self.field.q()),
                _ => Err(Error::parse(
                    "'zeta' is only meaningful in a root-of-unity field",
                )),
            },
            Some(Tok::LParen) => {
                let e = self.expr()?;
                if !self.eat(&Tok::RParen) {
                    return Err(Error::parse("expected ')'"));
                }
                Ok(e)
            }
            other => Err(Error::parse(format!(
                "expected a value, found {other:?}"
            ))),
        }
    }
}

pub fn parse_scalar(input: &str, field: &ScalarField) -> Result<Scalar> {
    let toks = lex(input)?;
    if toks.is_empty() {
        return Err(Error::parse("empty scalar expression"));
    }
    let mut p = Parser {
        toks,
        pos: 0,
        field,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(Error::parse(format!(
            "trailing input after scalar expression at token {}",
            p.pos
        )));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_literals() {
        let f = ScalarField::rationals_i64(2, 1).unwrap();
        assert_eq!(f.parse("3/4").unwrap(), f.ratio(3, 4));
        assert_eq!(f.parse("-5").unwrap(), f.from_i64(-5));
        assert_eq!(f.parse("q^2").unwrap(), f.from_i64(4));
        assert_eq!(f.parse("q^-1").unwrap(), f.ratio(1, 2));
    }

    #[test]
    fn indeterminate_expressions() {
        let f = ScalarField::rational_functions();
        let lhs = f.parse("q^2 - 1/(q+1)").unwrap();
        let q = f.q();
        let q2 = q.pow(2, &f).unwrap();
        let inv = (&q + &f.one()).inv_in(&f).unwrap();
        assert_eq!(lhs, &q2 - &inv);
        // ^ binds tighter than unary minus on the base: -q^2 = -(q^2)
        assert_eq!(f.parse("-q^2").unwrap(), -&q2);
    }

    #[test]
    fn zeta_requires_cyclotomic() {
        let f = ScalarField::cyclotomic(3).unwrap();
        assert_eq!(f.parse("zeta").unwrap(), f.q());
        let r = ScalarField::rationals_i64(2, 1).unwrap();
        assert!(r.parse("zeta").is_err());
    }

    #[test]
    fn rejects_garbage() {
        let f = ScalarField::rational_functions();
        assert!(f.parse("").is_err());
        assert!(f.parse("q q").is_err());
        assert!(f.parse("2t").is_err());
        assert!(f.parse("(q").is_err());
        assert!(f.parse("1/0").is_err());
    }
}
