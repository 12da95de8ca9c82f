//! Text grammar for operator expressions.
//!
//! ```text
//! expr    = term { ("+" | "-") term } ;
//! term    = unary { ("*" | "/") unary } ;
//! unary   = ("+" | "-") unary | power ;
//! power   = atom [ "^" [ "-" ] integer ] ;
//! atom    = number | "i" | "lambda" | "omega" | "hbar" | "D"
//!         | "q" index | "p" index | "(" expr ")" ;
//! number  = digits [ "." digits ] ;
//! index   = digits ;            (* 1-based, at most N *)
//! ```
//!
//! `D` stands for `1 + lambda*(q1^2 + ... + qN^2)`. Division and negative
//! powers are only allowed when the divisor is a nonzero number times an
//! integer power of `D`. The Unicode minus sign is accepted as `-`.
//! The result is returned in normal order.

use num_bigint::BigInt;
use num_rational::BigRational;

use super::gauss::GaussRat;
use super::operator::OperatorExpr;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(BigRational),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    End,
}

struct Lexer {
    toks: Vec<(Tok, usize)>,
}

fn lex(text: &str) -> Result<Lexer> {
    let chars: Vec<char> = text.chars().collect();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let start = i;
        match c {
            ' ' | '\t' | '\n' | '\r' => {
                i += 1;
                continue;
            }
            '+' => toks.push((Tok::Plus, start)),
            '-' | '\u{2212}' => toks.push((Tok::Minus, start)),
            '*' | '\u{b7}' => toks.push((Tok::Star, start)),
            '/' => toks.push((Tok::Slash, start)),
            '^' => toks.push((Tok::Caret, start)),
            '(' => toks.push((Tok::LParen, start)),
            ')' => toks.push((Tok::RParen, start)),
            d if d.is_ascii_digit() => {
                let mut j = i;
                while j < chars.len() && chars[j].is_ascii_digit() {
                    j += 1;
                }
                let int_part: String = chars[i..j].iter().collect();
                let mut value = BigRational::from_integer(int_part.parse::<BigInt>().unwrap());
                if j < chars.len() && chars[j] == '.' {
                    let k0 = j + 1;
                    let mut k = k0;
                    while k < chars.len() && chars[k].is_ascii_digit() {
                        k += 1;
                    }
                    if k == k0 {
                        return Err(Error::Parse { position: j, message: "expected digits after '.'".into() });
                    }
                    let frac: String = chars[k0..k].iter().collect();
                    let den = BigInt::from(10).pow((k - k0) as u32);
                    value += BigRational::new(frac.parse::<BigInt>().unwrap(), den);
                    j = k;
                }
                toks.push((Tok::Num(value), start));
                i = j;
                continue;
            }
            a if a.is_ascii_alphabetic() => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                toks.push((Tok::Ident(chars[i..j].iter().collect()), start));
                i = j;
                continue;
            }
            other => {
                return Err(Error::Parse { position: start, message: format!("unexpected character '{other}'") })
            }
        }
        i += 1;
    }
    toks.push((Tok::End, chars.len()));
    Ok(Lexer { toks })
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    dim: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn position(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn err<T>(&self, position: usize, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse { position, message: message.into() })
    }

    fn expr(&mut self) -> Result<OperatorExpr> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Tok::Plus => {
                    self.bump();
                    acc = acc.add(&self.term()?);
                }
                Tok::Minus => {
                    self.bump();
                    acc = acc.sub(&self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<OperatorExpr> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Tok::Star => {
                    self.bump();
                    acc = acc.mul(&self.unary()?);
                }
                Tok::Slash => {
                    self.bump();
                    let at = self.position();
                    let divisor = self.unary()?;
                    acc = acc.mul(&self.invert(&divisor, at)?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn invert(&self, x: &OperatorExpr, at: usize) -> Result<OperatorExpr> {
        let inv = x
            .as_function()
            .and_then(|c| c.invert_scalar_d_power());
        match inv {
            Some(c) => Ok(OperatorExpr::from_coeff(c)),
            None => self.err(at, format!("cannot divide by `{x}`: only nonzero numbers times powers of D are invertible")),
        }
    }

    fn unary(&mut self) -> Result<OperatorExpr> {
        match self.peek() {
            Tok::Minus => {
                self.bump();
                Ok(self.unary()?.neg())
            }
            Tok::Plus => {
                self.bump();
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<OperatorExpr> {
        let at = self.position();
        let base = self.atom()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        self.bump();
        let negative = if *self.peek() == Tok::Minus {
            self.bump();
            true
        } else {
            false
        };
        let exp_at = self.position();
        let e = match self.bump() {
            Tok::Num(n) if n.is_integer() => n.to_integer(),
            _ => return self.err(exp_at, "exponent must be an integer"),
        };
        let e: u32 = match e.try_into() {
            Ok(v) if v <= 64 => v,
            _ => return self.err(exp_at, "exponent out of range"),
        };
        if negative {
            Ok(self.invert(&base, at)?.pow(e))
        } else {
            Ok(base.pow(e))
        }
    }

    fn index(&self, name: &str, at: usize) -> Result<usize> {
        let digits = &name[1..];
        let k: usize = digits
            .parse()
            .map_err(|_| Error::Parse { position: at, message: format!("unknown symbol `{name}`") })?;
        if k == 0 || k > self.dim {
            return self.err(at, format!("index in `{name}` outside 1..={}", self.dim));
        }
        Ok(k - 1)
    }

    fn atom(&mut self) -> Result<OperatorExpr> {
        let at = self.position();
        let dim = self.dim;
        match self.bump() {
            Tok::Num(n) => Ok(OperatorExpr::scalar(dim, GaussRat::real(n))),
            Tok::LParen => {
                let inner = self.expr()?;
                match self.bump() {
                    Tok::RParen => Ok(inner),
                    _ => self.err(self.toks[self.pos.saturating_sub(1)].1, "expected ')'"),
                }
            }
            Tok::Ident(name) => match name.as_str() {
                "i" => Ok(OperatorExpr::scalar(dim, GaussRat::i())),
                "lambda" => Ok(OperatorExpr::lambda(dim)),
                "omega" => Ok(OperatorExpr::omega(dim)),
                "hbar" => Ok(OperatorExpr::hbar(dim)),
                "D" => Ok(OperatorExpr::d(dim)),
                s if s.starts_with('q') && s.len() > 1 => Ok(OperatorExpr::q(dim, self.index(s, at)?)),
                s if s.starts_with('p') && s.len() > 1 => Ok(OperatorExpr::p(dim, self.index(s, at)?)),
                s => self.err(at, format!("unknown symbol `{s}`")),
            },
            Tok::End => self.err(at, "unexpected end of input"),
            t => self.err(at, format!("unexpected token {t:?}")),
        }
    }
}

/// Parses `text` as an operator on `dim` coordinates and normal-orders it.
pub fn parse(text: &str, dim: usize) -> Result<OperatorExpr> {
    if !(1..=super::poly::MAX_DIM).contains(&dim) {
        return Err(Error::InvalidParams(format!("dimension {dim} unsupported")));
    }
    let lexer = lex(text)?;
    let mut p = Parser { toks: lexer.toks, pos: 0, dim };
    let out = p.expr()?;
    if *p.peek() != Tok::End {
        return p.err(p.position(), "unexpected trailing input");
    }
    Ok(out)
}
