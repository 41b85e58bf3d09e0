//! Parser for element expressions such as `theta^-1 + 2*g^3*theta^2`.
//!
//! Grammar:
//! ```text
//! expr   := ['-'] term (('+' | '-') term)*
//! term   := power (('*' | '/') power)*
//! power  := atom ['^' ['-'] integer]
//! atom   := integer | 'theta' | 'g' | '(' expr ')'
//! ```
//! `g` is the stored generator of `F_{q^m}^×`; integers are read mod `p`.

use std::sync::Arc;

use drinfeld_core::{Cinf, Error, Result, Tower};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Int(i64),
    Ident(String),
    Op(char),
}

fn lex(src: &str) -> Result<Vec<Tok>> {
    let mut out = Vec::new();
    let mut it = src.chars().peekable();
    while let Some(&c) = it.peek() {
        if c.is_whitespace() {
            it.next();
        } else if c.is_ascii_digit() {
            let mut n: i64 = 0;
            while let Some(d) = it.peek().and_then(|c| c.to_digit(10)) {
                n = n
                    .checked_mul(10)
                    .and_then(|n| n.checked_add(d as i64))
                    .ok_or_else(|| syntax(src, "integer overflow"))?;
                it.next();
            }
            out.push(Tok::Int(n));
        } else if c.is_ascii_alphabetic() {
            let mut s = String::new();
            while let Some(&c) = it.peek().filter(|c| c.is_ascii_alphanumeric() || **c == '_') {
                s.push(c);
                it.next();
            }
            out.push(Tok::Ident(s));
        } else if "+-*/^()".contains(c) {
            out.push(Tok::Op(c));
            it.next();
        } else {
            return Err(syntax(src, &format!("unexpected character {c:?}")));
        }
    }
    Ok(out)
}

fn syntax(src: &str, what: &str) -> Error {
    Error::Config(format!("cannot parse element {src:?}: {what}"))
}

struct Parser<'a> {
    src: &'a str,
    toks: Vec<Tok>,
    pos: usize,
    tower: &'a Arc<Tower>,
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn eat(&mut self, op: char) -> bool {
        if self.peek() == Some(&Tok::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Cinf> {
        let neg = self.eat('-');
        let mut acc = self.term()?;
        if neg {
            acc = -acc;
        }
        loop {
            if self.eat('+') {
                acc = &acc + &self.term()?;
            } else if self.eat('-') {
                acc = &acc - &self.term()?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn term(&mut self) -> Result<Cinf> {
        let mut acc = self.power()?;
        loop {
            if self.eat('*') {
                acc = &acc * &self.power()?;
            } else if self.eat('/') {
                acc = acc.div(&self.power()?)?;
            } else {
                return Ok(acc);
            }
        }
    }

    fn power(&mut self) -> Result<Cinf> {
        let base = self.atom()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let neg = self.eat('-');
        match self.toks.get(self.pos).cloned() {
            Some(Tok::Int(k)) => {
                self.pos += 1;
                base.powi(if neg { -k } else { k })
            }
            _ => Err(syntax(self.src, "exponent must be an integer")),
        }
    }

    fn atom(&mut self) -> Result<Cinf> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        match t {
            Some(Tok::Int(n)) => Ok(Cinf::from_int(self.tower, n)),
            Some(Tok::Ident(s)) if s == "theta" => Ok(Cinf::theta(self.tower)),
            Some(Tok::Ident(s)) if s == "g" => Ok(Cinf::constant(self.tower, self.tower.gf().generator())),
            Some(Tok::Op('(')) => {
                let v = self.expr()?;
                if !self.eat(')') {
                    return Err(syntax(self.src, "missing ')'"));
                }
                Ok(v)
            }
            Some(other) => Err(syntax(self.src, &format!("unexpected {other:?}"))),
            None => Err(syntax(self.src, "unexpected end")),
        }
    }
}

pub fn parse(src: &str, tower: &Arc<Tower>) -> Result<Cinf> {
    let mut p = Parser {
        src,
        toks: lex(src)?,
        pos: 0,
        tower,
    };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(syntax(src, "trailing input"));
    }
    Ok(v)
}
