//! Arithmetic expression trees for constraint and objective formulas.
//!
//! The grammar is the smallest one that covers every formula the problem
//! files need: `+ - * / ^`, parentheses, unary minus, decimal literals and
//! identifiers. Exponents must fold to integer constants at parse time and
//! are evaluated by repeated squaring, with `0^0 = 1`.

use std::collections::{BTreeSet, HashMap};
use std::fmt;

use serde::Serialize;
use thiserror::Error;

/// A parsed arithmetic expression over named variables.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    Var(String),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    /// Base raised to an integer constant exponent.
    Pow(Box<Expr>, i32),
}

#[derive(Debug, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("exponent at byte {offset} does not fold to a constant")]
    NonConstantExponent { offset: usize },
    #[error("exponent at byte {offset} is not an integer")]
    NonIntegerExponent { offset: usize },
}

#[derive(Debug, Error, PartialEq)]
pub enum EvalError {
    #[error("division by zero in `{0}`")]
    DivisionByZero(String),
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
}

/// Variable lookup used by [`Expr::eval`].
pub trait Binding {
    fn value_of(&self, name: &str) -> Option<f64>;
}

impl Binding for HashMap<String, f64> {
    fn value_of(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

impl Binding for HashMap<&str, f64> {
    fn value_of(&self, name: &str) -> Option<f64> {
        self.get(name).copied()
    }
}

/// Binds an ordered variable list to a coordinate slice.
pub struct PointBinding<'a> {
    names: &'a [String],
    values: &'a [f64],
}

impl<'a> PointBinding<'a> {
    pub fn new(names: &'a [String], values: &'a [f64]) -> Self {
        PointBinding { names, values }
    }
}

impl Binding for PointBinding<'_> {
    fn value_of(&self, name: &str) -> Option<f64> {
        self.names
            .iter()
            .position(|n| n == name)
            .and_then(|i| self.values.get(i).copied())
    }
}

/// `base^exp` by repeated squaring for a nonnegative exponent; `0^0 = 1`.
fn pow_by_squaring(mut base: f64, mut exp: u32) -> f64 {
    let mut acc = 1.0;
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= base;
        }
        base *= base;
        exp >>= 1;
    }
    acc
}

impl Expr {
    /// Parse an expression; see the module docs for the grammar.
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let tokens = tokenize(text)?;
        let mut parser = Parser { tokens, pos: 0, end: text.len() };
        let expr = parser.expr()?;
        match parser.peek() {
            None => Ok(expr),
            Some((tok, offset)) => Err(ParseError::Syntax {
                offset: *offset,
                message: format!("unexpected `{tok}`"),
            }),
        }
    }

    /// Evaluate the tree in double precision. No simplification happens
    /// here, so results are bit-stable across calls.
    pub fn eval(&self, binding: &dyn Binding) -> Result<f64, EvalError> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::Var(name) => binding
                .value_of(name)
                .ok_or_else(|| EvalError::UnboundVariable(name.clone())),
            Expr::Neg(a) => Ok(-a.eval(binding)?),
            Expr::Add(a, b) => Ok(a.eval(binding)? + b.eval(binding)?),
            Expr::Sub(a, b) => Ok(a.eval(binding)? - b.eval(binding)?),
            Expr::Mul(a, b) => Ok(a.eval(binding)? * b.eval(binding)?),
            Expr::Div(a, b) => {
                let num = a.eval(binding)?;
                let den = b.eval(binding)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero(self.to_string()));
                }
                Ok(num / den)
            }
            Expr::Pow(base, exp) => {
                let b = base.eval(binding)?;
                if *exp >= 0 {
                    Ok(pow_by_squaring(b, *exp as u32))
                } else if b == 0.0 {
                    Err(EvalError::DivisionByZero(self.to_string()))
                } else {
                    Ok(1.0 / pow_by_squaring(b, exp.unsigned_abs()))
                }
            }
        }
    }

    /// Collect every variable name referenced by the tree.
    pub fn variables(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_vars(&mut out);
        out
    }

    fn collect_vars(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Const(_) => {}
            Expr::Var(name) => {
                out.insert(name.clone());
            }
            Expr::Neg(a) | Expr::Pow(a, _) => a.collect_vars(out),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.collect_vars(out);
                b.collect_vars(out);
            }
        }
    }

    /// Replace each variable `v` by `v + offset(v)`. Offsets of exactly zero
    /// leave the node untouched.
    pub fn shift_vars(&self, offsets: &HashMap<String, f64>) -> Expr {
        match self {
            Expr::Const(c) => Expr::Const(*c),
            Expr::Var(name) => match offsets.get(name) {
                Some(&o) if o != 0.0 => Expr::Add(
                    Box::new(Expr::Var(name.clone())),
                    Box::new(Expr::Const(o)),
                ),
                _ => Expr::Var(name.clone()),
            },
            Expr::Neg(a) => Expr::Neg(Box::new(a.shift_vars(offsets))),
            Expr::Add(a, b) => Expr::Add(
                Box::new(a.shift_vars(offsets)),
                Box::new(b.shift_vars(offsets)),
            ),
            Expr::Sub(a, b) => Expr::Sub(
                Box::new(a.shift_vars(offsets)),
                Box::new(b.shift_vars(offsets)),
            ),
            Expr::Mul(a, b) => Expr::Mul(
                Box::new(a.shift_vars(offsets)),
                Box::new(b.shift_vars(offsets)),
            ),
            Expr::Div(a, b) => Expr::Div(
                Box::new(a.shift_vars(offsets)),
                Box::new(b.shift_vars(offsets)),
            ),
            Expr::Pow(a, e) => Expr::Pow(Box::new(a.shift_vars(offsets)), *e),
        }
    }

    /// Value of the tree if it contains no variables.
    fn const_value(&self) -> Option<f64> {
        match self {
            Expr::Const(c) => Some(*c),
            Expr::Var(_) => None,
            Expr::Neg(a) => a.const_value().map(|v| -v),
            Expr::Add(a, b) => Some(a.const_value()? + b.const_value()?),
            Expr::Sub(a, b) => Some(a.const_value()? - b.const_value()?),
            Expr::Mul(a, b) => Some(a.const_value()? * b.const_value()?),
            Expr::Div(a, b) => {
                let den = b.const_value()?;
                if den == 0.0 {
                    return None;
                }
                Some(a.const_value()? / den)
            }
            Expr::Pow(a, e) => {
                let base = a.const_value()?;
                if *e >= 0 {
                    Some(pow_by_squaring(base, *e as u32))
                } else if base == 0.0 {
                    None
                } else {
                    Some(1.0 / pow_by_squaring(base, e.unsigned_abs()))
                }
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(_) => 3,
            Expr::Pow(..) => 4,
            Expr::Const(_) | Expr::Var(_) => 5,
        }
    }
}

/// Coefficients of an affine expression `sum_i coeffs[i] * x_i + constant`
/// over an ordered variable list.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AffineForm {
    pub coeffs: Vec<f64>,
    pub constant: f64,
}

impl AffineForm {
    fn constant_only(n: usize, c: f64) -> AffineForm {
        AffineForm { coeffs: vec![0.0; n], constant: c }
    }

    fn is_constant(&self) -> Option<f64> {
        if self.coeffs.iter().all(|&c| c == 0.0) {
            Some(self.constant)
        } else {
            None
        }
    }

    fn scale(mut self, factor: f64) -> AffineForm {
        for c in &mut self.coeffs {
            *c *= factor;
        }
        self.constant *= factor;
        self
    }

    pub fn eval(&self, values: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(values)
            .map(|(c, v)| c * v)
            .sum::<f64>()
            + self.constant
    }
}

/// Extract the coefficients of `e` when it is affine in `vars`. Constant
/// subtrees are folded; anything of higher degree yields `None`.
pub fn extract_affine(e: &Expr, vars: &[String]) -> Option<AffineForm> {
    let n = vars.len();
    match e {
        Expr::Const(c) => Some(AffineForm::constant_only(n, *c)),
        Expr::Var(name) => {
            let idx = vars.iter().position(|v| v == name)?;
            let mut coeffs = vec![0.0; n];
            coeffs[idx] = 1.0;
            Some(AffineForm { coeffs, constant: 0.0 })
        }
        Expr::Neg(a) => Some(extract_affine(a, vars)?.scale(-1.0)),
        Expr::Add(a, b) => {
            let fa = extract_affine(a, vars)?;
            let fb = extract_affine(b, vars)?;
            Some(AffineForm {
                coeffs: fa.coeffs.iter().zip(&fb.coeffs).map(|(x, y)| x + y).collect(),
                constant: fa.constant + fb.constant,
            })
        }
        Expr::Sub(a, b) => {
            let fa = extract_affine(a, vars)?;
            let fb = extract_affine(b, vars)?;
            Some(AffineForm {
                coeffs: fa.coeffs.iter().zip(&fb.coeffs).map(|(x, y)| x - y).collect(),
                constant: fa.constant - fb.constant,
            })
        }
        Expr::Mul(a, b) => {
            let fa = extract_affine(a, vars)?;
            let fb = extract_affine(b, vars)?;
            if let Some(c) = fa.is_constant() {
                Some(fb.scale(c))
            } else {
                fb.is_constant().map(|c| fa.scale(c))
            }
        }
        Expr::Div(a, b) => {
            let fa = extract_affine(a, vars)?;
            let den = extract_affine(b, vars)?.is_constant()?;
            if den == 0.0 {
                return None;
            }
            Some(fa.scale(1.0 / den))
        }
        Expr::Pow(a, exp) => {
            let fa = extract_affine(a, vars)?;
            if let Some(c) = fa.is_constant() {
                let v = if *exp >= 0 {
                    pow_by_squaring(c, *exp as u32)
                } else if c == 0.0 {
                    return None;
                } else {
                    1.0 / pow_by_squaring(c, exp.unsigned_abs())
                };
                Some(AffineForm::constant_only(n, v))
            } else if *exp == 1 {
                Some(fa)
            } else if *exp == 0 {
                Some(AffineForm::constant_only(n, 1.0))
            } else {
                None
            }
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn write_child(f: &mut fmt::Formatter<'_>, child: &Expr, parens: bool) -> fmt::Result {
            if parens {
                write!(f, "({child})")
            } else {
                write!(f, "{child}")
            }
        }
        match self {
            Expr::Const(c) => {
                if c.is_sign_negative() {
                    // Negative literals are not in the grammar; keep them
                    // reparseable as Neg(Const).
                    write!(f, "({c})")
                } else {
                    write!(f, "{c}")
                }
            }
            Expr::Var(name) => write!(f, "{name}"),
            Expr::Neg(a) => {
                write!(f, "-")?;
                write_child(f, a, a.precedence() < 3)
            }
            Expr::Add(a, b) => {
                write_child(f, a, a.precedence() < 1)?;
                write!(f, " + ")?;
                write_child(f, b, b.precedence() <= 1)
            }
            Expr::Sub(a, b) => {
                write_child(f, a, a.precedence() < 1)?;
                write!(f, " - ")?;
                write_child(f, b, b.precedence() <= 1)
            }
            Expr::Mul(a, b) => {
                write_child(f, a, a.precedence() < 2)?;
                write!(f, " * ")?;
                write_child(f, b, b.precedence() <= 2)
            }
            Expr::Div(a, b) => {
                write_child(f, a, a.precedence() < 2)?;
                write!(f, " / ")?;
                write_child(f, b, b.precedence() <= 2)
            }
            Expr::Pow(base, exp) => {
                write_child(f, base, base.precedence() < 5)?;
                write!(f, "^{exp}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Plus => write!(f, "+"),
            Token::Minus => write!(f, "-"),
            Token::Star => write!(f, "*"),
            Token::Slash => write!(f, "/"),
            Token::Caret => write!(f, "^"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
        }
    }
}

fn tokenize(text: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = text.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'+' => {
                tokens.push((Token::Plus, i));
                i += 1;
            }
            b'-' => {
                tokens.push((Token::Minus, i));
                i += 1;
            }
            b'*' => {
                tokens.push((Token::Star, i));
                i += 1;
            }
            b'/' => {
                tokens.push((Token::Slash, i));
                i += 1;
            }
            b'^' => {
                tokens.push((Token::Caret, i));
                i += 1;
            }
            b'(' => {
                tokens.push((Token::LParen, i));
                i += 1;
            }
            b')' => {
                tokens.push((Token::RParen, i));
                i += 1;
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < bytes.len() && bytes[i].is_ascii_digit() {
                    i += 1;
                }
                if i < bytes.len() && bytes[i] == b'.' {
                    i += 1;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
                if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                    let mut j = i + 1;
                    if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                        j += 1;
                    }
                    if j < bytes.len() && bytes[j].is_ascii_digit() {
                        i = j;
                        while i < bytes.len() && bytes[i].is_ascii_digit() {
                            i += 1;
                        }
                    }
                }
                let slice = &text[start..i];
                let value: f64 = slice.parse().map_err(|_| ParseError::Syntax {
                    offset: start,
                    message: format!("invalid number `{slice}`"),
                })?;
                tokens.push((Token::Number(value), start));
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                let start = i;
                while i < bytes.len()
                    && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_')
                {
                    i += 1;
                }
                tokens.push((Token::Ident(text[start..i].to_string()), start));
            }
            _ => {
                return Err(ParseError::Syntax {
                    offset: i,
                    message: format!("unexpected character `{}`", text[i..].chars().next().unwrap()),
                })
            }
        }
    }
    Ok(tokens)
}

struct Parser {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(Token, usize)> {
        self.tokens.get(self.pos)
    }

    fn next_offset(&self) -> usize {
        self.peek().map(|(_, o)| *o).unwrap_or(self.end)
    }

    fn eat(&mut self, expected: &Token) -> bool {
        if let Some((tok, _)) = self.peek() {
            if tok == expected {
                self.pos += 1;
                return true;
            }
        }
        false
    }

    // expr := term (('+'|'-') term)*
    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Token::Plus) {
                let rhs = self.term()?;
                lhs = Expr::Add(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&Token::Minus) {
                let rhs = self.term()?;
                lhs = Expr::Sub(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    // term := factor (('*'|'/') factor)*
    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(&Token::Star) {
                let rhs = self.factor()?;
                lhs = Expr::Mul(Box::new(lhs), Box::new(rhs));
            } else if self.eat(&Token::Slash) {
                let rhs = self.factor()?;
                lhs = Expr::Div(Box::new(lhs), Box::new(rhs));
            } else {
                return Ok(lhs);
            }
        }
    }

    // factor := '-' factor | power
    fn factor(&mut self) -> Result<Expr, ParseError> {
        if self.eat(&Token::Minus) {
            let inner = self.factor()?;
            return Ok(Expr::Neg(Box::new(inner)));
        }
        self.power()
    }

    // power := atom ('^' factor)?
    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.atom()?;
        if self.eat(&Token::Caret) {
            let exp_offset = self.next_offset();
            let exp_tree = self.factor()?;
            let value = exp_tree
                .const_value()
                .ok_or(ParseError::NonConstantExponent { offset: exp_offset })?;
            if value.fract() != 0.0 || value.abs() > i32::MAX as f64 {
                return Err(ParseError::NonIntegerExponent { offset: exp_offset });
            }
            return Ok(Expr::Pow(Box::new(base), value as i32));
        }
        Ok(base)
    }

    // atom := NUMBER | IDENT | '(' expr ')'
    fn atom(&mut self) -> Result<Expr, ParseError> {
        let offset = self.next_offset();
        match self.peek().cloned() {
            Some((Token::Number(v), _)) => {
                self.pos += 1;
                Ok(Expr::Const(v))
            }
            Some((Token::Ident(name), _)) => {
                self.pos += 1;
                Ok(Expr::Var(name))
            }
            Some((Token::LParen, _)) => {
                self.pos += 1;
                let inner = self.expr()?;
                if self.eat(&Token::RParen) {
                    Ok(inner)
                } else {
                    Err(ParseError::Syntax {
                        offset: self.next_offset(),
                        message: "expected `)`".to_string(),
                    })
                }
            }
            Some((tok, _)) => Err(ParseError::Syntax {
                offset,
                message: format!("unexpected `{tok}`"),
            }),
            None => Err(ParseError::Syntax {
                offset,
                message: "unexpected end of input".to_string(),
            }),
        }
    }
}
