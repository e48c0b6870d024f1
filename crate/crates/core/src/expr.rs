//! Closed-form scalar expressions over the chart coordinates `x1..x5`.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr     := term (("+" | "-") term)*
//! term     := unary (("*" | "/") unary)*
//! unary    := "-" unary | power
//! power    := primary ("^" exponent)?
//! exponent := "-"? number ("^" exponent)? | "(" "-"? number ")" ("^" exponent)?
//! primary  := number | const | coord | func "(" expr ")" | "(" expr ")"
//! const    := "pi" | "e"
//! coord    := "x1" | "x2" | "x3" | "x4" | "x5"
//! func     := "exp" | "log" | "sin" | "cos" | "sinh" | "cosh" | "tanh" | "sqrt" | "atan"
//! ```
//!
//! `^` takes a literal exponent only and is right-associative; a chain of
//! exponents is folded into a single literal. Integer exponents become
//! [`Expr::PowI`]; any other exponent is rewritten to `exp(r * log(base))`.

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

use crate::jet::{Jet, JetError, UnaryFn};

/// Highest coordinate index accepted by the parser.
pub const MAX_COORD: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
    Atan,
}

impl Func {
    pub const ALL: [Func; 9] = [
        Func::Exp,
        Func::Log,
        Func::Sin,
        Func::Cos,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Sqrt,
        Func::Atan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
            Func::Atan => "atan",
        }
    }

    fn from_name(s: &str) -> Option<Func> {
        Func::ALL.into_iter().find(|f| f.name() == s)
    }

    fn unary(self) -> UnaryFn {
        match self {
            Func::Exp => UnaryFn::Exp,
            Func::Log => UnaryFn::Log,
            Func::Sin => UnaryFn::Sin,
            Func::Cos => UnaryFn::Cos,
            Func::Sinh => UnaryFn::Sinh,
            Func::Cosh => UnaryFn::Cosh,
            Func::Tanh => UnaryFn::Tanh,
            Func::Sqrt => UnaryFn::Sqrt,
            Func::Atan => UnaryFn::Atan,
        }
    }

    fn apply_f64(self, v: f64) -> Option<f64> {
        Some(match self {
            Func::Exp => v.exp(),
            Func::Log if v > 0.0 => v.ln(),
            Func::Log => return None,
            Func::Sin => v.sin(),
            Func::Cos => v.cos(),
            Func::Sinh => v.sinh(),
            Func::Cosh => v.cosh(),
            Func::Tanh => v.tanh(),
            Func::Sqrt if v > 0.0 => v.sqrt(),
            Func::Sqrt => return None,
            Func::Atan => v.atan(),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NamedConst {
    Pi,
    E,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::E => std::f64::consts::E,
        }
    }
}

/// Expression tree. Coordinates are zero-based (`x1` is `Coord(0)`).
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(NamedConst),
    Coord(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    PowI(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ParseError {
    #[error("{line}:{col}: expected {}, found {found}", expected.iter().cloned().collect::<Vec<_>>().join(" | "))]
    Syntax {
        line: usize,
        col: usize,
        expected: BTreeSet<String>,
        found: String,
    },
    #[error("{line}:{col}: unknown identifier `{name}`")]
    UnknownIdent { line: usize, col: usize, name: String },
    #[error("{line}:{col}: `{func}` takes 1 argument, got {got}")]
    Arity {
        line: usize,
        col: usize,
        func: &'static str,
        got: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvalError {
    #[error("coordinate x{} used in a {dim}-dimensional chart", index + 1)]
    CoordOutOfRange { index: usize, dim: usize },
    #[error("point has {got} coordinates, chart dimension is {dim}")]
    PointLength { got: usize, dim: usize },
    #[error("evaluating `{node}`: {source}")]
    Jet { node: String, source: JetError },
    #[error("`{node}` undefined at this point")]
    Domain { node: String },
}

impl Expr {
    pub fn parse(text: &str) -> Result<Expr, ParseError> {
        let mut p = Parser::new(text);
        let e = p.expr()?;
        p.expect_end()?;
        Ok(e)
    }

    /// One plus the highest coordinate index used, or 0 for constants.
    pub fn min_dim(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Const(_) => 0,
            Expr::Coord(i) => i + 1,
            Expr::Neg(a) | Expr::PowI(a, _) | Expr::Call(_, a) => a.min_dim(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.min_dim().max(b.min_dim())
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, Expr::Num(v) if *v == 0.0)
    }

    /// Pointwise `f64` evaluation.
    pub fn eval(&self, point: &[f64]) -> Result<f64, EvalError> {
        let dim = point.len();
        if self.min_dim() > dim {
            return Err(EvalError::CoordOutOfRange {
                index: self.min_dim() - 1,
                dim,
            });
        }
        self.eval_f64(point)
    }

    fn eval_f64(&self, x: &[f64]) -> Result<f64, EvalError> {
        Ok(match self {
            Expr::Num(v) => *v,
            Expr::Const(c) => c.value(),
            Expr::Coord(i) => x[*i],
            Expr::Neg(a) => -a.eval_f64(x)?,
            Expr::Add(a, b) => a.eval_f64(x)? + b.eval_f64(x)?,
            Expr::Sub(a, b) => a.eval_f64(x)? - b.eval_f64(x)?,
            Expr::Mul(a, b) => a.eval_f64(x)? * b.eval_f64(x)?,
            Expr::Div(a, b) => {
                let d = b.eval_f64(x)?;
                if d == 0.0 {
                    return Err(EvalError::Domain {
                        node: self.to_string(),
                    });
                }
                a.eval_f64(x)? / d
            }
            Expr::PowI(a, k) => {
                let v = a.eval_f64(x)?;
                if v == 0.0 && *k < 0 {
                    return Err(EvalError::Domain {
                        node: self.to_string(),
                    });
                }
                v.powi(*k)
            }
            Expr::Call(f, a) => f.apply_f64(a.eval_f64(x)?).ok_or_else(|| EvalError::Domain {
                node: self.to_string(),
            })?,
        })
    }

    /// Degree-`order` Taylor expansion of the expression about `point`.
    pub fn eval_jet(&self, point: &[f64], order: usize) -> Result<Jet, EvalError> {
        let dim = point.len();
        if self.min_dim() > dim {
            return Err(EvalError::CoordOutOfRange {
                index: self.min_dim() - 1,
                dim,
            });
        }
        let vars = (0..dim)
            .map(|i| Jet::variable(i, point[i], dim, order))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|source| EvalError::Jet {
                node: self.to_string(),
                source,
            })?;
        let zero = match vars.first() {
            Some(v) => v.zeros_like(),
            None => {
                return Err(EvalError::PointLength { got: 0, dim: 1 });
            }
        };
        self.jet_rec(&vars, &zero)
    }

    fn jet_rec(&self, vars: &[Jet], zero: &Jet) -> Result<Jet, EvalError> {
        let tag = |source: JetError| EvalError::Jet {
            node: self.to_string(),
            source,
        };
        Ok(match self {
            Expr::Num(v) => zero.constant_like(*v),
            Expr::Const(c) => zero.constant_like(c.value()),
            Expr::Coord(i) => vars[*i].clone(),
            Expr::Neg(a) => -&a.jet_rec(vars, zero)?,
            Expr::Add(a, b) => &a.jet_rec(vars, zero)? + &b.jet_rec(vars, zero)?,
            Expr::Sub(a, b) => &a.jet_rec(vars, zero)? - &b.jet_rec(vars, zero)?,
            Expr::Mul(a, b) => &a.jet_rec(vars, zero)? * &b.jet_rec(vars, zero)?,
            Expr::Div(a, b) => {
                let num = a.jet_rec(vars, zero)?;
                let den = b.jet_rec(vars, zero)?;
                num.checked_div(&den).map_err(tag)?
            }
            Expr::PowI(a, k) => a.jet_rec(vars, zero)?.powi(*k).map_err(tag)?,
            Expr::Call(f, a) => a.jet_rec(vars, zero)?.unary(f.unary()).map_err(tag)?,
        })
    }
}

fn fmt_num(v: f64, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    if v < 0.0 || (v == 0.0 && v.is_sign_negative()) {
        write!(f, "(-{:?})", -v)
    } else {
        write!(f, "{v:?}")
    }
}

/// Canonical, fully parenthesized form; parsing it yields the same tree.
impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) => fmt_num(*v, f),
            Expr::Const(NamedConst::Pi) => write!(f, "pi"),
            Expr::Const(NamedConst::E) => write!(f, "e"),
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::PowI(a, k) if *k < 0 => write!(f, "({a}^({k}))"),
            Expr::PowI(a, k) => write!(f, "({a}^{k})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("`{s}`"),
            Tok::Sym(c) => format!("`{c}`"),
            Tok::End => "end of input".to_string(),
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    tok: Tok,
    tok_start: usize,
    lex_error: Option<ParseError>,
}

impl<'a> Parser<'a> {
    fn new(text: &'a str) -> Self {
        let mut p = Parser {
            src: text.as_bytes(),
            pos: 0,
            tok: Tok::End,
            tok_start: 0,
            lex_error: None,
        };
        p.advance();
        p
    }

    fn line_col(&self, at: usize) -> (usize, usize) {
        let before = &self.src[..at.min(self.src.len())];
        let line = 1 + before.iter().filter(|&&b| b == b'\n').count();
        let col = 1 + before.iter().rev().take_while(|&&b| b != b'\n').count();
        (line, col)
    }

    fn advance(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        self.tok_start = self.pos;
        if self.pos >= self.src.len() {
            self.tok = Tok::End;
            return;
        }
        let c = self.src[self.pos];
        if c.is_ascii_digit() || c == b'.' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.')
            {
                self.pos += 1;
            }
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
                let mut look = self.pos + 1;
                if look < self.src.len() && matches!(self.src[look], b'+' | b'-') {
                    look += 1;
                }
                if look < self.src.len() && self.src[look].is_ascii_digit() {
                    self.pos = look;
                    while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                }
            }
            let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap_or("");
            match text.parse::<f64>() {
                Ok(v) => self.tok = Tok::Num(v),
                Err(_) => {
                    let (line, col) = self.line_col(start);
                    self.lex_error = Some(ParseError::Syntax {
                        line,
                        col,
                        expected: ["number".to_string()].into(),
                        found: format!("`{text}`"),
                    });
                    self.tok = Tok::End;
                }
            }
        } else if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.src.len()
                && (self.src[self.pos].is_ascii_alphanumeric() || self.src[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let text = String::from_utf8_lossy(&self.src[start..self.pos]).into_owned();
            self.tok = Tok::Ident(text);
        } else {
            self.pos += 1;
            self.tok = Tok::Sym(c as char);
        }
    }

    fn syntax(&self, expected: &[&str]) -> ParseError {
        if let Some(e) = &self.lex_error {
            return e.clone();
        }
        let (line, col) = self.line_col(self.tok_start);
        ParseError::Syntax {
            line,
            col,
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found: self.tok.describe(),
        }
    }

    fn eat(&mut self, c: char) -> bool {
        if self.tok == Tok::Sym(c) {
            self.advance();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(&[&format!("`{c}`")]))
        }
    }

    fn expect_end(&self) -> Result<(), ParseError> {
        if self.tok == Tok::End && self.lex_error.is_none() {
            Ok(())
        } else {
            Err(self.syntax(&["operator", "end of input"]))
        }
    }

    fn expr(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat('+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat('-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat('*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat('/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr, ParseError> {
        if self.eat('-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ParseError> {
        let base = self.primary()?;
        if !self.eat('^') {
            return Ok(base);
        }
        let r = self.exponent()?;
        if r.fract() == 0.0 && r.abs() <= i32::MAX as f64 {
            Ok(Expr::PowI(Box::new(base), r as i32))
        } else {
            Ok(Expr::Call(
                Func::Exp,
                Box::new(Expr::Mul(
                    Box::new(Expr::Num(r)),
                    Box::new(Expr::Call(Func::Log, Box::new(base))),
                )),
            ))
        }
    }

    fn exponent(&mut self) -> Result<f64, ParseError> {
        let paren = self.eat('(');
        let neg = self.eat('-');
        let v = match self.tok {
            Tok::Num(v) => {
                self.advance();
                v
            }
            _ => return Err(self.syntax(&["numeric exponent"])),
        };
        if paren {
            self.expect(')')?;
        }
        let v = if neg { -v } else { v };
        if self.eat('^') {
            Ok(v.powf(self.exponent()?))
        } else {
            Ok(v)
        }
    }

    fn primary(&mut self) -> Result<Expr, ParseError> {
        match self.tok.clone() {
            Tok::Num(v) => {
                self.advance();
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.advance();
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                let (line, col) = self.line_col(self.tok_start);
                self.advance();
                if let Some(func) = Func::from_name(&name) {
                    self.expect('(')?;
                    let mut args = vec![self.expr()?];
                    while self.eat(',') {
                        args.push(self.expr()?);
                    }
                    self.expect(')')?;
                    if args.len() != 1 {
                        return Err(ParseError::Arity {
                            line,
                            col,
                            func: func.name(),
                            got: args.len(),
                        });
                    }
                    return Ok(Expr::Call(func, Box::new(args.pop().unwrap())));
                }
                match name.as_str() {
                    "pi" => return Ok(Expr::Const(NamedConst::Pi)),
                    "e" => return Ok(Expr::Const(NamedConst::E)),
                    _ => {}
                }
                if let Some(idx) = name.strip_prefix('x').and_then(|d| d.parse::<usize>().ok()) {
                    if (1..=MAX_COORD).contains(&idx) {
                        return Ok(Expr::Coord(idx - 1));
                    }
                }
                Err(ParseError::UnknownIdent { line, col, name })
            }
            _ => Err(self.syntax(&["number", "identifier", "`(`", "`-`"])),
        }
    }
}
