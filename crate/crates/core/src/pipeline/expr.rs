//! Polynomial vector field expressions.
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor ('*' factor)*
//! factor := atom ('^' uint)?
//! atom   := 'x' | 'y' | decimal | '(' expr ')' | '-' atom
//! ```

use thiserror::Error;

use super::interval::Interval;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    X,
    Y,
    /// Decimal constant; `exact` when the literal is representable.
    Const {
        value: f64,
        exact: bool,
    },
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, u32),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("syntax error at offset {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
    base: usize,
}

impl Parser<'_> {
    fn err<T>(&self, at: usize, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError { offset: self.base + at, message: message.into() })
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == b'+' { Expr::Add(lhs.into(), rhs.into()) } else { Expr::Sub(lhs.into(), rhs.into()) };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        while self.peek() == Some(b'*') {
            self.pos += 1;
            lhs = Expr::Mul(lhs.into(), self.factor()?.into());
        }
        Ok(lhs)
    }

    fn factor(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            self.skip_ws();
            let start = self.pos;
            while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if start == self.pos {
                return self.err(start, "malformed exponent: expected a nonnegative integer");
            }
            let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii digits");
            let n: u32 = match text.parse() {
                Ok(n) => n,
                Err(_) => return self.err(start, "malformed exponent: too large"),
            };
            return Ok(Expr::Pow(base.into(), n));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some(c) = self.peek() else {
            return self.err(self.pos, "unexpected end of input");
        };
        let start = self.pos;
        match c {
            b'-' => {
                self.pos += 1;
                Ok(Expr::Neg(self.atom()?.into()))
            }
            b'(' => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return self.err(self.pos, "unbalanced parentheses: expected ')'");
                }
                self.pos += 1;
                Ok(e)
            }
            b'0'..=b'9' | b'.' => {
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).expect("ascii");
                match text.parse::<f64>() {
                    Ok(value) if text.matches('.').count() <= 1 && text != "." => Ok(Expr::Const { value, exact: decimal_is_exact(text, value) }),
                    _ => self.err(start, format!("malformed number '{text}'")),
                }
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_alphanumeric() || self.s[self.pos] == b'_') {
                    self.pos += 1;
                }
                match &self.s[start..self.pos] {
                    b"x" => Ok(Expr::X),
                    b"y" => Ok(Expr::Y),
                    other => self.err(start, format!("unknown identifier '{}'", String::from_utf8_lossy(other))),
                }
            }
            b')' => self.err(start, "unbalanced parentheses: unexpected ')'"),
            _ => self.err(start, format!("unexpected character '{}'", c as char)),
        }
    }
}

/// Integer literals below 2^53 are exact; every other literal is widened.
fn decimal_is_exact(text: &str, value: f64) -> bool {
    !text.contains('.') && value.abs() < 9.007_199_254_740_992e15
}

pub fn parse_expr(text: &str) -> Result<Expr, ParseError> {
    parse_at(text, 0)
}

fn parse_at(text: &str, base: usize) -> Result<Expr, ParseError> {
    let mut p = Parser { s: text.as_bytes(), pos: 0, base };
    let e = p.expr()?;
    if let Some(c) = p.peek() {
        return match c {
            b')' => p.err(p.pos, "unbalanced parentheses: unexpected ')'"),
            _ => p.err(p.pos, format!("unexpected character '{}'", c as char)),
        };
    }
    Ok(e)
}

impl Expr {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::X => x,
            Expr::Y => y,
            Expr::Const { value, .. } => *value,
            Expr::Neg(a) => -a.eval(x, y),
            Expr::Add(a, b) => a.eval(x, y) + b.eval(x, y),
            Expr::Sub(a, b) => a.eval(x, y) - b.eval(x, y),
            Expr::Mul(a, b) => a.eval(x, y) * b.eval(x, y),
            Expr::Pow(a, n) => a.eval(x, y).powi(*n as i32),
        }
    }

    pub fn eval_interval(&self, x: Interval, y: Interval) -> Interval {
        match self {
            Expr::X => x,
            Expr::Y => y,
            Expr::Const { value, exact } => {
                if *exact {
                    Interval::point(*value)
                } else {
                    Interval::new(value.next_down(), value.next_up())
                }
            }
            Expr::Neg(a) => -a.eval_interval(x, y),
            Expr::Add(a, b) => a.eval_interval(x, y) + b.eval_interval(x, y),
            Expr::Sub(a, b) => a.eval_interval(x, y) - b.eval_interval(x, y),
            Expr::Mul(a, b) => a.eval_interval(x, y) * b.eval_interval(x, y),
            Expr::Pow(a, n) => a.eval_interval(x, y).powi(*n),
        }
    }
}

/// Planar vector field `(f_x, f_y)` with its source text.
#[derive(Debug, Clone, PartialEq)]
pub struct VectorField {
    pub fx: Expr,
    pub fy: Expr,
    pub text: String,
}

impl VectorField {
    /// Two components separated by newlines or `;`. Blank lines and `#`
    /// comments are skipped; an optional `name =` prefix is ignored.
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut parts = Vec::new();
        let mut offset = 0;
        for line in text.split_inclusive(['\n', ';']) {
            let start = offset;
            offset += line.len();
            let body = line.trim_end_matches(['\n', ';', '\r']);
            let body = match body.find('#') {
                Some(i) => &body[..i],
                None => body,
            };
            if body.trim().is_empty() {
                continue;
            }
            let (skip, expr) = match body.find('=') {
                Some(i) => (i + 1, &body[i + 1..]),
                None => (0, body),
            };
            parts.push(parse_at(expr, start + skip)?);
        }
        if parts.len() != 2 {
            return Err(ParseError { offset: text.len(), message: format!("expected two components, found {}", parts.len()) });
        }
        let fy = parts.pop().expect("two parts");
        let fx = parts.pop().expect("two parts");
        Ok(VectorField { fx, fy, text: text.to_string() })
    }

    pub fn eval(&self, x: f64, y: f64) -> (f64, f64) {
        (self.fx.eval(x, y), self.fy.eval(x, y))
    }

    pub fn eval_box(&self, x: Interval, y: Interval) -> (Interval, Interval) {
        (self.fx.eval_interval(x, y), self.fy.eval_interval(x, y))
    }
}
