//! Text syntax for polynomial vector fields.
//!
//! ```text
//! expr  := sum
//! sum   := prod (('+' | '-') prod)*
//! prod  := unary (('*' | '/') unary)*
//! unary := ('+' | '-') unary | power
//! power := atom ('^' integer)?
//! atom  := number | identifier | '(' expr ')'
//! ```
//!
//! An identifier is either a variable name or `d<name>`, the coordinate
//! field `∂/∂name`. Numbers are integers, decimals or `p/q` (parsed as a
//! division). A product may contain at most one vector-field factor, so
//! `(x^2 - 1/2*y)*dx + 3*dy` and `x*(dx + dy)` are both accepted. The
//! literal `0` denotes the zero field.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::ParseError;
use crate::poly::Poly;
use crate::vfield::VectorField;

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
}

fn syntax(column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Syntax {
        line: 1,
        column,
        message: message.into(),
    }
}

fn arity(column: usize, message: impl Into<String>) -> ParseError {
    ParseError::Arity {
        line: 1,
        column,
        message: message.into(),
    }
}

/// Parses a decimal or integer literal exactly.
fn decimal_literal(text: &str) -> Option<BigRational> {
    let (int_part, frac_part) = match text.split_once('.') {
        Some((a, b)) => (a, b),
        None => (text, ""),
    };
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let numer: BigInt = if digits.is_empty() {
        BigInt::zero()
    } else {
        digits.parse().ok()?
    };
    let denom = num_traits::pow(BigInt::from(10), frac_part.len());
    Some(BigRational::new(numer, denom))
}

/// Parses `p`, `-p`, `p/q` or a decimal such as `-0.25` into an exact
/// rational.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    let (neg, body) = match t.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, t.strip_prefix('+').unwrap_or(t)),
    };
    let body = body.trim();
    if body.is_empty() || body.starts_with(['+', '-']) {
        return None;
    }
    let value = match body.split_once('/') {
        Some((p, q)) => {
            let p = decimal_literal(p.trim())?;
            let q = decimal_literal(q.trim())?;
            if q.is_zero() {
                return None;
            }
            p / q
        }
        None => decimal_literal(body)?,
    };
    Some(if neg { -value } else { value })
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut i = 0;
    while i < chars.len() {
        let c = chars[i];
        let col = i + 1;
        if c.is_whitespace() {
            i += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(t) = simple {
            out.push((t, col));
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < chars.len() && (chars[i].is_ascii_digit() || chars[i] == '.') {
                i += 1;
            }
            let lit: String = chars[start..i].iter().collect();
            let value = decimal_literal(&lit)
                .filter(|_| lit.matches('.').count() <= 1)
                .ok_or_else(|| syntax(col, format!("malformed number `{lit}`")))?;
            out.push((Tok::Num(value), col));
        } else if c.is_alphabetic() || c == '_' {
            let start = i;
            while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                i += 1;
            }
            out.push((Tok::Ident(chars[start..i].iter().collect()), col));
        } else {
            return Err(syntax(col, format!("unexpected character `{c}`")));
        }
    }
    Ok(out)
}

#[derive(Clone, Debug)]
enum Value {
    Scalar(Poly),
    Field(VectorField),
}

struct Parser<'a> {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    vars: &'a [String],
    end_col: usize,
}

impl Parser<'_> {
    fn n(&self) -> usize {
        self.vars.len()
    }

    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos).map(|(t, _)| t)
    }

    fn col(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end_col, |(_, c)| *c)
    }

    fn sum(&mut self) -> Result<Value, ParseError> {
        let mut acc = self.product()?;
        while let Some(op @ (Tok::Plus | Tok::Minus)) = self.peek().cloned() {
            let col = self.col();
            self.pos += 1;
            let rhs = self.product()?;
            acc = match (acc, rhs, op) {
                (Value::Scalar(a), Value::Scalar(b), Tok::Plus) => Value::Scalar(&a + &b),
                (Value::Scalar(a), Value::Scalar(b), _) => Value::Scalar(&a - &b),
                (Value::Field(a), Value::Field(b), Tok::Plus) => {
                    Value::Field(a.try_add(&b).expect("same arity"))
                }
                (Value::Field(a), Value::Field(b), _) => {
                    Value::Field(a.try_sub(&b).expect("same arity"))
                }
                _ => return Err(arity(col, "cannot add a scalar and a vector field")),
            };
        }
        Ok(acc)
    }

    fn product(&mut self) -> Result<Value, ParseError> {
        let mut acc = self.unary()?;
        while let Some(op @ (Tok::Star | Tok::Slash)) = self.peek().cloned() {
            let col = self.col();
            self.pos += 1;
            let rhs = self.unary()?;
            acc = match (op, acc, rhs) {
                (Tok::Star, Value::Scalar(a), Value::Scalar(b)) => Value::Scalar(&a * &b),
                (Tok::Star, Value::Scalar(f), Value::Field(v))
                | (Tok::Star, Value::Field(v), Value::Scalar(f)) => Value::Field(v.scale(&f)),
                (Tok::Star, Value::Field(_), Value::Field(_)) => {
                    return Err(arity(col, "product of two vector fields"))
                }
                (_, lhs, Value::Scalar(b)) => {
                    let c = b
                        .as_constant()
                        .ok_or_else(|| syntax(col, "division by a non-constant polynomial"))?;
                    if c.is_zero() {
                        return Err(syntax(col, "division by zero"));
                    }
                    let inv = BigRational::one() / c;
                    match lhs {
                        Value::Scalar(a) => Value::Scalar(a.scale(&inv)),
                        Value::Field(v) => Value::Field(v.scale_rational(&inv)),
                    }
                }
                (_, _, Value::Field(_)) => {
                    return Err(arity(col, "division by a vector field"))
                }
            };
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value, ParseError> {
        match self.peek() {
            Some(Tok::Minus) => {
                self.pos += 1;
                Ok(match self.unary()? {
                    Value::Scalar(p) => Value::Scalar(-&p),
                    Value::Field(v) => Value::Field(v.scale_rational(&-BigRational::one())),
                })
            }
            Some(Tok::Plus) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Value, ParseError> {
        let base = self.atom()?;
        if self.peek() != Some(&Tok::Caret) {
            return Ok(base);
        }
        let col = self.col();
        self.pos += 1;
        let exp_col = self.col();
        let exp = match self.toks.get(self.pos) {
            Some((Tok::Num(q), _)) if q.is_integer() => q.to_integer(),
            _ => return Err(syntax(exp_col, "exponent must be a nonnegative integer")),
        };
        self.pos += 1;
        let exp: u32 = exp
            .try_into()
            .map_err(|_| syntax(exp_col, "exponent out of range"))?;
        match base {
            Value::Scalar(p) => Ok(Value::Scalar(p.pow(exp))),
            Value::Field(_) => Err(arity(col, "cannot raise a vector field to a power")),
        }
    }

    fn atom(&mut self) -> Result<Value, ParseError> {
        let col = self.col();
        let Some((tok, _)) = self.toks.get(self.pos).cloned() else {
            return Err(syntax(col, "unexpected end of input"));
        };
        self.pos += 1;
        match tok {
            Tok::Num(q) => Ok(Value::Scalar(Poly::constant(self.n(), q))),
            Tok::Ident(name) => self.identifier(&name, col),
            Tok::LParen => {
                let v = self.sum()?;
                if self.peek() != Some(&Tok::RParen) {
                    return Err(syntax(self.col(), "expected `)`"));
                }
                self.pos += 1;
                Ok(v)
            }
            other => Err(syntax(col, format!("unexpected token {}", describe(&other)))),
        }
    }

    fn identifier(&self, name: &str, col: usize) -> Result<Value, ParseError> {
        if let Some(i) = self.vars.iter().position(|v| v == name) {
            return Ok(Value::Scalar(Poly::var(self.n(), i)));
        }
        if let Some(rest) = name.strip_prefix('d') {
            if let Some(i) = self.vars.iter().position(|v| v == rest) {
                return Ok(Value::Field(VectorField::coordinate(self.n(), i)));
            }
        }
        Err(ParseError::UnknownVariable {
            name: name.to_string(),
            line: 1,
            column: col,
        })
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Num(q) => format!("number `{q}`"),
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Plus => "`+`".into(),
        Tok::Minus => "`-`".into(),
        Tok::Star => "`*`".into(),
        Tok::Slash => "`/`".into(),
        Tok::Caret => "`^`".into(),
        Tok::LParen => "`(`".into(),
        Tok::RParen => "`)`".into(),
    }
}

fn parse_value(text: &str, vars: &[String]) -> Result<Value, ParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser {
        toks,
        pos: 0,
        vars,
        end_col: text.chars().count() + 1,
    };
    let v = p.sum()?;
    if p.pos < p.toks.len() {
        let (t, col) = &p.toks[p.pos];
        return Err(syntax(*col, format!("unexpected token {}", describe(t))));
    }
    Ok(v)
}

/// Parses a vector field over the ordered variable list `vars`.
pub fn parse_vector_field(text: &str, vars: &[String]) -> Result<VectorField, ParseError> {
    match parse_value(text, vars)? {
        Value::Field(v) => Ok(v),
        Value::Scalar(p) if p.is_zero() => Ok(VectorField::zero(vars.len())),
        Value::Scalar(_) => Err(arity(1, "expected a vector field, found a scalar polynomial")),
    }
}

/// Parses a scalar polynomial over the ordered variable list `vars`.
pub fn parse_poly(text: &str, vars: &[String]) -> Result<Poly, ParseError> {
    match parse_value(text, vars)? {
        Value::Scalar(p) => Ok(p),
        Value::Field(_) => Err(arity(1, "expected a polynomial, found a vector field")),
    }
}
