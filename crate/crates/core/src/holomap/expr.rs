//! Expression trees for maps and a small infix parser.
//!
//! Grammar (whitespace ignored, juxtaposition multiplies):
//!
//! ```text
//! expr    = term { ("+" | "-") term }
//! term    = unary { ["*" | "/"] unary }
//! unary   = "-" unary | power
//! power   = primary [ "^" ["-"] integer ]
//! primary = number | "i" | "z" | "wp" | "wpp" | "(" expr ")"
//! ```
//!
//! `wp` and `wpp` stand for `℘` and `℘'` on the lattice of an elliptic map.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::poly::Poly;
use crate::elliptic::WeierstrassData;
use crate::error::{Error, Result};
use crate::C64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Expr {
    /// The domain coordinate; rational maps only.
    Z,
    Wp,
    WpPrime,
    Const(C64),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Neg(Box<Expr>),
    Pow(Box<Expr>, i32),
}

macro_rules! binary_op {
    ($trait:ident, $method:ident, $variant:ident) => {
        impl std::ops::$trait for Expr {
            type Output = Expr;
            fn $method(self, rhs: Expr) -> Expr {
                Expr::$variant(Box::new(self), Box::new(rhs))
            }
        }
    };
}

binary_op!(Add, add, Add);
binary_op!(Sub, sub, Sub);
binary_op!(Mul, mul, Mul);
binary_op!(Div, div, Div);

impl Expr {
    pub fn constant(c: C64) -> Expr {
        Expr::Const(c)
    }

    pub fn parse(src: &str) -> Result<Expr> {
        let tokens = tokenize(src)?;
        let mut p = Parser { tokens, pos: 0 };
        let e = p.expr()?;
        if p.pos != p.tokens.len() {
            return Err(Error::Parse(format!("unexpected trailing input in {src:?}")));
        }
        Ok(e)
    }

    fn any(&self, pred: &impl Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => a.any(pred) || b.any(pred),
            Expr::Neg(a) | Expr::Pow(a, _) => a.any(pred),
            _ => false,
        }
    }

    pub fn uses_z(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Z))
    }

    pub fn uses_elliptic(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Wp | Expr::WpPrime))
    }

    /// Numerator and denominator polynomials of a rational expression in `z`.
    pub fn to_rational(&self) -> Result<(Poly, Poly)> {
        let one = || Poly::constant(Complex64::new(1.0, 0.0));
        Ok(match self {
            Expr::Z => (Poly::z(), one()),
            Expr::Const(c) => (Poly::constant(*c), one()),
            Expr::Wp | Expr::WpPrime => {
                return Err(Error::Parse("elliptic atom in a rational expression".into()));
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let (an, ad) = a.to_rational()?;
                let (bn, bd) = b.to_rational()?;
                let right = bn.mul(&ad);
                let left = an.mul(&bd);
                let num = if matches!(self, Expr::Add(..)) { left.add(&right) } else { left.sub(&right) };
                (num, ad.mul(&bd))
            }
            Expr::Mul(a, b) => {
                let (an, ad) = a.to_rational()?;
                let (bn, bd) = b.to_rational()?;
                (an.mul(&bn), ad.mul(&bd))
            }
            Expr::Div(a, b) => {
                let (an, ad) = a.to_rational()?;
                let (bn, bd) = b.to_rational()?;
                if bn.is_zero() {
                    return Err(Error::DegenerateMap("division by zero".into()));
                }
                (an.mul(&bd), ad.mul(&bn))
            }
            Expr::Neg(a) => {
                let (n, d) = a.to_rational()?;
                (n.scale(Complex64::new(-1.0, 0.0)), d)
            }
            Expr::Pow(a, e) => {
                let (n, d) = a.to_rational()?;
                if *e >= 0 {
                    (n.pow(*e as u32), d.pow(*e as u32))
                } else {
                    if n.is_zero() {
                        return Err(Error::DegenerateMap("division by zero".into()));
                    }
                    (d.pow(e.unsigned_abs()), n.pow(e.unsigned_abs()))
                }
            }
        })
    }

    /// Value and complex derivative of an elliptic expression at `z`.
    pub fn eval_elliptic(&self, data: &WeierstrassData, z: C64) -> Result<(C64, C64)> {
        let mut cache = None;
        self.eval_cached(data, z, &mut cache)
    }

    fn eval_cached(&self, data: &WeierstrassData, z: C64, cache: &mut Option<(C64, C64)>) -> Result<(C64, C64)> {
        let mut wp = || -> Result<(C64, C64)> {
            if cache.is_none() {
                *cache = Some(data.wp_pair(z)?);
            }
            Ok(cache.expect("filled above"))
        };
        let zero = Complex64::new(0.0, 0.0);
        Ok(match self {
            Expr::Z => (z, Complex64::new(1.0, 0.0)),
            Expr::Const(c) => (*c, zero),
            Expr::Wp => wp()?,
            Expr::WpPrime => {
                let (p, dp) = wp()?;
                (dp, p * p * 6.0 - data.g2 / 2.0)
            }
            Expr::Add(a, b) => {
                let (x, dx) = a.eval_cached(data, z, cache)?;
                let (y, dy) = b.eval_cached(data, z, cache)?;
                (x + y, dx + dy)
            }
            Expr::Sub(a, b) => {
                let (x, dx) = a.eval_cached(data, z, cache)?;
                let (y, dy) = b.eval_cached(data, z, cache)?;
                (x - y, dx - dy)
            }
            Expr::Mul(a, b) => {
                let (x, dx) = a.eval_cached(data, z, cache)?;
                let (y, dy) = b.eval_cached(data, z, cache)?;
                (x * y, dx * y + x * dy)
            }
            Expr::Div(a, b) => {
                let (x, dx) = a.eval_cached(data, z, cache)?;
                let (y, dy) = b.eval_cached(data, z, cache)?;
                if y.norm() == 0.0 {
                    return Err(Error::Pole(z, 0.0));
                }
                (x / y, (dx * y - x * dy) / (y * y))
            }
            Expr::Neg(a) => {
                let (x, dx) = a.eval_cached(data, z, cache)?;
                (-x, -dx)
            }
            Expr::Pow(a, e) => {
                let (x, dx) = a.eval_cached(data, z, cache)?;
                if *e == 0 {
                    return Ok((Complex64::new(1.0, 0.0), zero));
                }
                if *e < 0 && x.norm() == 0.0 {
                    return Err(Error::Pole(z, 0.0));
                }
                let v = x.powi(*e);
                (v, dx * x.powi(e - 1) * (*e as f64))
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
}

fn tokenize(src: &str) -> Result<Vec<Token>> {
    let chars: Vec<char> = src.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let ch = chars[i];
        if ch.is_whitespace() {
            i += 1;
        } else if ch.is_ascii_digit() || ch == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            if i < chars.len() && (chars[i] == 'e' || chars[i] == 'E') {
                let save = i;
                i += 1;
                if i < chars.len() && (chars[i] == '+' || chars[i] == '-') {
                    i += 1;
                }
                if i < chars.len() && chars[i].is_ascii_digit() {
                    while i < chars.len() && chars[i].is_ascii_digit() {
                        i += 1;
                    }
                } else {
                    i = save;
                }
            }
            let text: String = chars[start..i].iter().collect();
            let v = text.parse::<f64>().map_err(|_| Error::Parse(format!("bad number {text:?}")))?;
            out.push(Token::Num(v));
        } else if ch.is_ascii_alphabetic() {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_alphanumeric() || chars[i] == '\'') {
                i += 1;
            }
            out.push(Token::Ident(chars[start..i].iter().collect()));
        } else if "+-*/^()".contains(ch) {
            out.push(Token::Op(ch));
            i += 1;
        } else {
            return Err(Error::Parse(format!("unexpected character {ch:?}")));
        }
    }
    if out.is_empty() {
        return Err(Error::Parse("empty expression".into()));
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos)
    }

    fn eat_op(&mut self, op: char) -> bool {
        if self.peek() == Some(&Token::Op(op)) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat_op('+') {
                lhs = lhs + self.term()?;
            } else if self.eat_op('-') {
                lhs = lhs - self.term()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn starts_primary(&self) -> bool {
        matches!(self.peek(), Some(Token::Num(_)) | Some(Token::Ident(_)) | Some(Token::Op('(')))
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat_op('*') {
                lhs = lhs * self.unary()?;
            } else if self.eat_op('/') {
                lhs = lhs / self.unary()?;
            } else if self.starts_primary() {
                lhs = lhs * self.power()?;
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if !self.eat_op('^') {
            return Ok(base);
        }
        let negative = self.eat_op('-');
        match self.peek().cloned() {
            Some(Token::Num(v)) if v.fract() == 0.0 && v.abs() < 1e4 => {
                self.pos += 1;
                let e = if negative { -(v as i32) } else { v as i32 };
                Ok(Expr::Pow(Box::new(base), e))
            }
            _ => Err(Error::Parse("exponent must be an integer literal".into())),
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Num(v)) => {
                self.pos += 1;
                Ok(Expr::Const(Complex64::new(v, 0.0)))
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                match name.as_str() {
                    "z" => Ok(Expr::Z),
                    "i" => Ok(Expr::Const(Complex64::i())),
                    "wp" => Ok(Expr::Wp),
                    "wpp" | "wp'" => Ok(Expr::WpPrime),
                    other => Err(Error::Parse(format!("unknown identifier {other:?}"))),
                }
            }
            Some(Token::Op('(')) => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat_op(')') {
                    return Err(Error::Parse("missing closing parenthesis".into()));
                }
                Ok(e)
            }
            Some(tok) => Err(Error::Parse(format!("unexpected token {tok:?}"))),
            None => Err(Error::Parse("unexpected end of expression".into())),
        }
    }
}
