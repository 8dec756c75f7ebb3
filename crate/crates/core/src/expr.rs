//! Expression grammar for user-supplied radial functions.
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' unary)?
//! atom   := number | 'r' | 'pi' | 'e' | func '(' expr ')' | '(' expr ')'
//! func   := exp | log | ln | sin | cos | sinh | cosh | tanh | sqrt
//! ```
//!
//! Evaluation runs on [`Jet`]s, so every parsed expression carries exact
//! first and second derivatives.

use std::fmt;

use crate::dual::Jet;
use crate::error::{Error, Result};
use crate::radial::RadialFn;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sinh,
    Cosh,
    Tanh,
    Sqrt,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" | "ln" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "tanh" => Func::Tanh,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Sqrt => "sqrt",
        }
    }

    fn apply(self, x: Jet) -> Jet {
        match self {
            Func::Exp => x.exp(),
            Func::Log => x.ln(),
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Tanh => x.tanh(),
            Func::Sqrt => x.sqrt(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var,
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn eval(&self, x: Jet) -> Jet {
        match self {
            Expr::Num(c) => Jet::constant(*c),
            Expr::Var => x,
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).pow(b.eval(x)),
            Expr::Call(f, a) => f.apply(a.eval(x)),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(c) => write!(f, "{c}"),
            Expr::Var => write!(f, "r"),
            Expr::Neg(a) => write!(f, "(-{a})"),
            Expr::Add(a, b) => write!(f, "({a} + {b})"),
            Expr::Sub(a, b) => write!(f, "({a} - {b})"),
            Expr::Mul(a, b) => write!(f, "({a} * {b})"),
            Expr::Div(a, b) => write!(f, "({a} / {b})"),
            Expr::Pow(a, b) => write!(f, "({a} ^ {b})"),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
    End,
}

struct Lexer<'a> {
    src: &'a str,
    pos: usize,
}

impl<'a> Lexer<'a> {
    fn tokens(src: &'a str) -> Result<Vec<(Tok, usize)>> {
        let mut lx = Lexer { src, pos: 0 };
        let mut out = Vec::new();
        loop {
            let (t, p) = lx.next()?;
            let end = t == Tok::End;
            out.push((t, p));
            if end {
                return Ok(out);
            }
        }
    }

    fn next(&mut self) -> Result<(Tok, usize)> {
        let bytes = self.src.as_bytes();
        while self.pos < bytes.len() && bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
        let start = self.pos;
        let Some(&c) = bytes.get(self.pos) else {
            return Ok((Tok::End, start));
        };
        let tok = match c {
            b'0'..=b'9' | b'.' => {
                while self.pos < bytes.len() && (bytes[self.pos].is_ascii_digit() || bytes[self.pos] == b'.') {
                    self.pos += 1;
                }
                // exponent part: 1e-3, 2.5E+4
                if self.pos < bytes.len() && (bytes[self.pos] == b'e' || bytes[self.pos] == b'E') {
                    let mut look = self.pos + 1;
                    if look < bytes.len() && (bytes[look] == b'+' || bytes[look] == b'-') {
                        look += 1;
                    }
                    if look < bytes.len() && bytes[look].is_ascii_digit() {
                        self.pos = look;
                        while self.pos < bytes.len() && bytes[self.pos].is_ascii_digit() {
                            self.pos += 1;
                        }
                    }
                }
                let text = &self.src[start..self.pos];
                let v = text.parse::<f64>().map_err(|_| Error::Parse {
                    position: start,
                    message: format!("malformed number '{text}'"),
                })?;
                Tok::Num(v)
            }
            b'a'..=b'z' | b'A'..=b'Z' | b'_' => {
                while self.pos < bytes.len() && (bytes[self.pos].is_ascii_alphanumeric() || bytes[self.pos] == b'_') {
                    self.pos += 1;
                }
                Tok::Ident(self.src[start..self.pos].to_string())
            }
            b'+' | b'-' | b'*' | b'/' | b'^' => {
                self.pos += 1;
                Tok::Op(c as char)
            }
            b'(' => {
                self.pos += 1;
                Tok::LParen
            }
            b')' => {
                self.pos += 1;
                Tok::RParen
            }
            _ => {
                return Err(Error::Parse {
                    position: start,
                    message: format!("unexpected character '{}'", c as char),
                })
            }
        };
        Ok((tok, start))
    }
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    at: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.at].0
    }

    fn pos(&self) -> usize {
        self.toks[self.at].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.at].0.clone();
        if self.at + 1 < self.toks.len() {
            self.at += 1;
        }
        t
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T> {
        Err(Error::Parse {
            position: self.pos(),
            message: message.into(),
        })
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Tok::Op('+') => {
                    self.bump();
                    lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
                }
                Tok::Op('-') => {
                    self.bump();
                    lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            match self.peek() {
                Tok::Op('*') => {
                    self.bump();
                    lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
                }
                Tok::Op('/') => {
                    self.bump();
                    lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if *self.peek() == Tok::Op('-') {
            self.bump();
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        if *self.peek() == Tok::Op('+') {
            self.bump();
            return self.unary();
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if *self.peek() == Tok::Op('^') {
            self.bump();
            let exp = self.unary()?;
            return Ok(Expr::Pow(Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::Num(v))
            }
            Tok::LParen => {
                self.bump();
                let e = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return self.fail("expected ')'");
                }
                self.bump();
                Ok(e)
            }
            Tok::Ident(name) => {
                let at = self.pos();
                self.bump();
                match name.as_str() {
                    "r" => Ok(Expr::Var),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "e" => Ok(Expr::Num(std::f64::consts::E)),
                    _ => {
                        let Some(func) = Func::from_name(&name) else {
                            return Err(Error::Parse {
                                position: at,
                                message: format!("unknown identifier '{name}'"),
                            });
                        };
                        if *self.peek() != Tok::LParen {
                            return self.fail(format!("expected '(' after {name}"));
                        }
                        self.bump();
                        let arg = self.expr()?;
                        if *self.peek() != Tok::RParen {
                            return self.fail("expected ')'");
                        }
                        self.bump();
                        Ok(Expr::Call(func, Box::new(arg)))
                    }
                }
            }
            Tok::End => self.fail("unexpected end of expression"),
            Tok::Op(c) => self.fail(format!("unexpected operator '{c}'")),
            Tok::RParen => self.fail("unexpected ')'"),
        }
    }
}

/// A parsed radial expression `f(r)`.
#[derive(Clone, Debug, PartialEq)]
pub struct RadialExpr {
    source: String,
    tree: Expr,
}

impl RadialExpr {
    pub fn source(&self) -> &str {
        &self.source
    }

    pub fn tree(&self) -> &Expr {
        &self.tree
    }

    /// Evaluate, surfacing non-finite results as a domain error naming `r`.
    pub fn try_jet(&self, r: f64) -> Result<Jet> {
        let j = self.tree.eval(Jet::variable(r));
        if j.is_finite() {
            Ok(j)
        } else {
            Err(Error::Domain(format!("'{}' is not finite at r = {r}", self.source)))
        }
    }
}

impl RadialFn for RadialExpr {
    fn jet(&self, r: f64) -> Jet {
        self.tree.eval(Jet::variable(r))
    }

    fn label(&self) -> String {
        self.source.clone()
    }
}

/// Parse a radial expression in the variable `r`.
pub fn parse_radial_expression(text: &str) -> Result<RadialExpr> {
    let toks = Lexer::tokens(text)?;
    let mut p = Parser { toks, at: 0 };
    let tree = p.expr()?;
    if *p.peek() != Tok::End {
        return p.fail("unexpected trailing input");
    }
    Ok(RadialExpr {
        source: text.trim().to_string(),
        tree,
    })
}

/// Render a parse error as the source line with a caret under the offending
/// column.
pub fn caret_diagnostic(text: &str, err: &Error) -> String {
    match err {
        Error::Parse { position, message } => {
            format!("{text}\n{}^ {message}", " ".repeat(*position))
        }
        other => other.to_string(),
    }
}
