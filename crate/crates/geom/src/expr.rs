//! The function expression language: arithmetic with `+ - * / ^`, unary
//! minus, `sin cos exp log`, numeric literals, the constant `pi`, and
//! identifiers bound to chart coordinates. The grammar is LL(1) and parse
//! errors carry the byte position.
//!
//! Expressions also support exact symbolic differentiation; chart presets
//! store their metric data as expressions so that iterated covariant
//! derivatives of parsed functions never fall back to finite differences.

use crate::error::GeomError;
use std::fmt;
use std::sync::Arc;

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    /// Index into the chart coordinate list.
    Var(usize),
    Add(Arc<Expr>, Arc<Expr>),
    Sub(Arc<Expr>, Arc<Expr>),
    Mul(Arc<Expr>, Arc<Expr>),
    Div(Arc<Expr>, Arc<Expr>),
    Pow(Arc<Expr>, Arc<Expr>),
    Neg(Arc<Expr>),
    Sin(Arc<Expr>),
    Cos(Arc<Expr>),
    Exp(Arc<Expr>),
    Log(Arc<Expr>),
}

impl Expr {
    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(c) => *c,
            Expr::Var(i) => vars[*i],
            Expr::Add(a, b) => a.eval(vars) + b.eval(vars),
            Expr::Sub(a, b) => a.eval(vars) - b.eval(vars),
            Expr::Mul(a, b) => a.eval(vars) * b.eval(vars),
            Expr::Div(a, b) => a.eval(vars) / b.eval(vars),
            Expr::Pow(a, b) => a.eval(vars).powf(b.eval(vars)),
            Expr::Neg(a) => -a.eval(vars),
            Expr::Sin(a) => a.eval(vars).sin(),
            Expr::Cos(a) => a.eval(vars).cos(),
            Expr::Exp(a) => a.eval(vars).exp(),
            Expr::Log(a) => a.eval(vars).ln(),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(c) if *c == 0.0)
    }

    fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(c) => Some(*c),
            _ => None,
        }
    }

    /// Exact partial derivative with respect to variable `var`.
    pub fn diff(&self, var: usize) -> Arc<Expr> {
        match self {
            Expr::Num(_) => num(0.0),
            Expr::Var(i) => num(if *i == var { 1.0 } else { 0.0 }),
            Expr::Add(a, b) => add(a.diff(var), b.diff(var)),
            Expr::Sub(a, b) => sub(a.diff(var), b.diff(var)),
            Expr::Mul(a, b) => add(
                mul(a.diff(var), b.clone()),
                mul(a.clone(), b.diff(var)),
            ),
            Expr::Div(a, b) => div(
                sub(mul(a.diff(var), b.clone()), mul(a.clone(), b.diff(var))),
                mul(b.clone(), b.clone()),
            ),
            Expr::Pow(a, b) => match b.as_num() {
                // d(u^n) = n·u^(n-1)·u'
                Some(n) => mul(
                    mul(num(n), pow(a.clone(), num(n - 1.0))),
                    a.diff(var),
                ),
                // d(u^v) = u^v·(v'·log u + v·u'/u)
                None => mul(
                    pow(a.clone(), b.clone()),
                    add(
                        mul(b.diff(var), log(a.clone())),
                        div(mul(b.clone(), a.diff(var)), a.clone()),
                    ),
                ),
            },
            Expr::Neg(a) => neg(a.diff(var)),
            Expr::Sin(a) => mul(cos(a.clone()), a.diff(var)),
            Expr::Cos(a) => neg(mul(sin(a.clone()), a.diff(var))),
            Expr::Exp(a) => mul(exp(a.clone()), a.diff(var)),
            Expr::Log(a) => div(a.diff(var), a.clone()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var(i) => write!(f, "x{i}"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Sin(a) => write!(f, "sin({a})"),
            Expr::Cos(a) => write!(f, "cos({a})"),
            Expr::Exp(a) => write!(f, "exp({a})"),
            Expr::Log(a) => write!(f, "log({a})"),
        }
    }
}

// Constructors fold constants and drop identities, enough to keep nested
// derivative stacks from ballooning.

pub fn num(c: f64) -> Arc<Expr> {
    Arc::new(Expr::Num(c))
}

pub fn var(i: usize) -> Arc<Expr> {
    Arc::new(Expr::Var(i))
}

pub fn add(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => num(x + y),
        (Some(0.0), _) => b,
        (_, Some(0.0)) => a,
        _ => Arc::new(Expr::Add(a, b)),
    }
}

pub fn sub(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => num(x - y),
        (_, Some(0.0)) => a,
        (Some(0.0), _) => neg(b),
        _ => Arc::new(Expr::Sub(a, b)),
    }
}

pub fn mul(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => num(x * y),
        (Some(0.0), _) | (_, Some(0.0)) => num(0.0),
        (Some(1.0), _) => b,
        (_, Some(1.0)) => a,
        _ => Arc::new(Expr::Mul(a, b)),
    }
}

pub fn div(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    if a.is_zero() {
        return num(0.0);
    }
    match (a.as_num(), b.as_num()) {
        (Some(x), Some(y)) => num(x / y),
        (_, Some(1.0)) => a,
        _ => Arc::new(Expr::Div(a, b)),
    }
}

pub fn pow(a: Arc<Expr>, b: Arc<Expr>) -> Arc<Expr> {
    match b.as_num() {
        Some(0.0) => num(1.0),
        Some(1.0) => a,
        Some(y) => match a.as_num() {
            Some(x) => num(x.powf(y)),
            None => Arc::new(Expr::Pow(a, b)),
        },
        None => Arc::new(Expr::Pow(a, b)),
    }
}

pub fn neg(a: Arc<Expr>) -> Arc<Expr> {
    match &*a {
        Expr::Num(c) => num(-c),
        Expr::Neg(inner) => inner.clone(),
        _ => Arc::new(Expr::Neg(a)),
    }
}

pub fn sin(a: Arc<Expr>) -> Arc<Expr> {
    match a.as_num() {
        Some(x) => num(x.sin()),
        None => Arc::new(Expr::Sin(a)),
    }
}

pub fn cos(a: Arc<Expr>) -> Arc<Expr> {
    match a.as_num() {
        Some(x) => num(x.cos()),
        None => Arc::new(Expr::Cos(a)),
    }
}

pub fn exp(a: Arc<Expr>) -> Arc<Expr> {
    match a.as_num() {
        Some(x) => num(x.exp()),
        None => Arc::new(Expr::Exp(a)),
    }
}

pub fn log(a: Arc<Expr>) -> Arc<Expr> {
    match a.as_num() {
        Some(x) => num(x.ln()),
        None => Arc::new(Expr::Log(a)),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

struct Lexer<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn new(src: &'a str) -> Self {
        Lexer { src: src.as_bytes(), pos: 0 }
    }

    fn next_token(&mut self) -> Result<Option<(Token, usize)>, GeomError> {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        if self.pos >= self.src.len() {
            return Ok(None);
        }
        let start = self.pos;
        let c = self.src[self.pos];
        let tok = match c {
            b'+' => Token::Plus,
            b'-' => Token::Minus,
            b'*' => Token::Star,
            b'/' => Token::Slash,
            b'^' => Token::Caret,
            b'(' => Token::LParen,
            b')' => Token::RParen,
            b'0'..=b'9' | b'.' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_digit() || self.src[end] == b'.')
                {
                    end += 1;
                }
                // Optional exponent part.
                if end < self.src.len() && (self.src[end] == b'e' || self.src[end] == b'E') {
                    let mut e = end + 1;
                    if e < self.src.len() && (self.src[e] == b'+' || self.src[e] == b'-') {
                        e += 1;
                    }
                    if e < self.src.len() && self.src[e].is_ascii_digit() {
                        while e < self.src.len() && self.src[e].is_ascii_digit() {
                            e += 1;
                        }
                        end = e;
                    }
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap();
                let value = text.parse::<f64>().map_err(|_| GeomError::Parse {
                    position: start,
                    message: format!("invalid number `{text}`"),
                })?;
                self.pos = end;
                return Ok(Some((Token::Num(value), start)));
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                let mut end = self.pos;
                while end < self.src.len()
                    && (self.src[end].is_ascii_alphanumeric() || self.src[end] == b'_')
                {
                    end += 1;
                }
                let text = std::str::from_utf8(&self.src[self.pos..end]).unwrap().to_string();
                self.pos = end;
                return Ok(Some((Token::Ident(text), start)));
            }
            other => {
                return Err(GeomError::Parse {
                    position: start,
                    message: format!("unexpected character `{}`", other as char),
                })
            }
        };
        self.pos += 1;
        Ok(Some((tok, start)))
    }
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    cursor: usize,
    vars: &'a [String],
    end: usize,
}

impl<'a> Parser<'a> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.cursor).map(|(t, _)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.cursor).map(|(_, p)| *p).unwrap_or(self.end)
    }

    fn bump(&mut self) -> Option<Token> {
        let t = self.tokens.get(self.cursor).map(|(t, _)| t.clone());
        self.cursor += 1;
        t
    }

    fn expect(&mut self, want: Token, what: &str) -> Result<(), GeomError> {
        let pos = self.position();
        match self.bump() {
            Some(t) if t == want => Ok(()),
            _ => Err(GeomError::Parse { position: pos, message: format!("expected {what}") }),
        }
    }

    fn expr(&mut self) -> Result<Arc<Expr>, GeomError> {
        let mut acc = self.term()?;
        loop {
            match self.peek() {
                Some(Token::Plus) => {
                    self.bump();
                    acc = add(acc, self.term()?);
                }
                Some(Token::Minus) => {
                    self.bump();
                    acc = sub(acc, self.term()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Arc<Expr>, GeomError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Token::Star) => {
                    self.bump();
                    acc = mul(acc, self.factor()?);
                }
                Some(Token::Slash) => {
                    self.bump();
                    acc = div(acc, self.factor()?);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Arc<Expr>, GeomError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            self.bump();
            return Ok(neg(self.factor()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Arc<Expr>, GeomError> {
        let base = self.atom()?;
        if matches!(self.peek(), Some(Token::Caret)) {
            self.bump();
            // Right-associative; `-` binds weaker than `^` in the exponent.
            let exponent = self.factor()?;
            return Ok(pow(base, exponent));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Arc<Expr>, GeomError> {
        let pos = self.position();
        match self.bump() {
            Some(Token::Num(c)) => Ok(num(c)),
            Some(Token::LParen) => {
                let inner = self.expr()?;
                self.expect(Token::RParen, "`)`")?;
                Ok(inner)
            }
            Some(Token::Ident(name)) => {
                let is_call = matches!(self.peek(), Some(Token::LParen));
                if is_call {
                    let func: fn(Arc<Expr>) -> Arc<Expr> = match name.as_str() {
                        "sin" => sin,
                        "cos" => cos,
                        "exp" => exp,
                        "log" => log,
                        _ => {
                            return Err(GeomError::Parse {
                                position: pos,
                                message: format!("unknown function `{name}`"),
                            })
                        }
                    };
                    self.bump();
                    let arg = self.expr()?;
                    self.expect(Token::RParen, "`)`")?;
                    return Ok(func(arg));
                }
                if name == "pi" {
                    return Ok(num(std::f64::consts::PI));
                }
                match self.vars.iter().position(|v| v == &name) {
                    Some(i) => Ok(var(i)),
                    None => Err(GeomError::Parse {
                        position: pos,
                        message: format!("unknown identifier `{name}`"),
                    }),
                }
            }
            _ => Err(GeomError::Parse { position: pos, message: "expected expression".into() }),
        }
    }
}

/// Parses `src` with identifiers bound to `vars` (plus the constant `pi`).
pub fn parse(src: &str, vars: &[String]) -> Result<Arc<Expr>, GeomError> {
    let mut lexer = Lexer::new(src);
    let mut tokens = Vec::new();
    while let Some(tok) = lexer.next_token()? {
        tokens.push(tok);
    }
    let mut parser = Parser { tokens, cursor: 0, vars, end: src.len() };
    let expr = parser.expr()?;
    if parser.cursor != parser.tokens.len() {
        return Err(GeomError::Parse {
            position: parser.position(),
            message: "trailing input".into(),
        });
    }
    Ok(expr)
}
