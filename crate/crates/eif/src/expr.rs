//! Arithmetic over coordinates: `+ - * / ^`, `pow`, `exp`, `log`, `expit`,
//! `c10`, numbers, and coordinate references `x0` or `x[0]`.

use std::fmt;

use eif_core::distributions::{LinearPredictor, Link, Term};

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Pow,
    Exp,
    Log,
    Expit,
    /// `clamp(u, -10, 10)`.
    C10,
}

impl Func {
    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "pow" => Func::Pow,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "expit" => Func::Expit,
            "c10" => Func::C10,
            _ => return None,
        })
    }

    fn arity(self) -> usize {
        match self {
            Func::Pow => 2,
            _ => 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub message: String,
    pub offset: usize,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} at offset {}", self.message, self.offset)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Sym(char),
}

fn tokenize(s: &str) -> Result<Vec<(Tok, usize)>, ParseError> {
    let b = s.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < b.len() {
        let c = b[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_digit() || b[i] == b'.') {
                i += 1;
            }
            if i < b.len() && (b[i] == b'e' || b[i] == b'E') {
                let mut j = i + 1;
                if j < b.len() && (b[j] == b'+' || b[j] == b'-') {
                    j += 1;
                }
                if j < b.len() && b[j].is_ascii_digit() {
                    i = j;
                    while i < b.len() && b[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let v: f64 = s[start..i].parse().map_err(|_| ParseError {
                message: format!("bad number `{}`", &s[start..i]),
                offset: start,
            })?;
            out.push((Tok::Num(v), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < b.len() && ((b[i] as char).is_ascii_alphanumeric() || b[i] == b'_') {
                i += 1;
            }
            out.push((Tok::Ident(s[start..i].to_string()), start));
        } else if "+-*/^(),[]".contains(c) {
            out.push((Tok::Sym(c), i));
            i += 1;
        } else {
            return Err(ParseError {
                message: format!("unexpected character `{c}`"),
                offset: i,
            });
        }
    }
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
    end: usize,
}

impl Parser {
    fn new(s: &str) -> Result<Self, ParseError> {
        Ok(Parser {
            toks: tokenize(s)?,
            pos: 0,
            end: s.len(),
        })
    }

    fn offset(&self) -> usize {
        self.toks.get(self.pos).map_or(self.end, |t| t.1)
    }

    fn err<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        Err(ParseError {
            message: message.into(),
            offset: self.offset(),
        })
    }

    fn peek_sym(&self, c: char) -> bool {
        matches!(self.toks.get(self.pos), Some((Tok::Sym(s), _)) if *s == c)
    }

    fn eat(&mut self, c: char) -> bool {
        if self.peek_sym(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: char) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            self.err(format!("expected `{c}`"))
        }
    }

    fn finish(&self) -> Result<(), ParseError> {
        if self.pos == self.toks.len() {
            Ok(())
        } else {
            self.err("trailing input")
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
        if self.eat('+') {
            return self.unary();
        }
        let base = self.atom()?;
        if self.eat('^') {
            // Right-associative, binds tighter than unary minus on the left.
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn args(&mut self) -> Result<Vec<Expr>, ParseError> {
        self.expect('(')?;
        let mut args = Vec::new();
        if self.eat(')') {
            return Ok(args);
        }
        loop {
            args.push(self.expr()?);
            if self.eat(')') {
                return Ok(args);
            }
            self.expect(',')?;
        }
    }

    fn atom(&mut self) -> Result<Expr, ParseError> {
        let Some((tok, _)) = self.toks.get(self.pos).cloned() else {
            return self.err("unexpected end of expression");
        };
        match tok {
            Tok::Num(v) => {
                self.pos += 1;
                Ok(Expr::Num(v))
            }
            Tok::Sym('(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(')')?;
                Ok(e)
            }
            Tok::Ident(name) => {
                self.pos += 1;
                if name == "x" && self.eat('[') {
                    let Some((Tok::Num(v), _)) = self.toks.get(self.pos).cloned() else {
                        return self.err("expected a coordinate index");
                    };
                    if v < 0.0 || v.fract() != 0.0 {
                        return self.err("coordinate index must be a non-negative integer");
                    }
                    self.pos += 1;
                    self.expect(']')?;
                    return Ok(Expr::Var(v as usize));
                }
                if let Some(rest) = name.strip_prefix('x') {
                    if !rest.is_empty() && rest.bytes().all(|b| b.is_ascii_digit()) {
                        return match rest.parse() {
                            Ok(i) => Ok(Expr::Var(i)),
                            Err(_) => self.err("coordinate index out of range"),
                        };
                    }
                }
                let Some(f) = Func::from_name(&name) else {
                    self.pos -= 1;
                    return self.err(format!("unknown name `{name}`"));
                };
                let args = self.args()?;
                if args.len() != f.arity() {
                    return self.err(format!("`{name}` takes {} argument(s), got {}", f.arity(), args.len()));
                }
                Ok(Expr::Call(f, args))
            }
            Tok::Sym(c) => self.err(format!("unexpected `{c}`")),
        }
    }
}

/// Parses a full expression.
pub fn parse(s: &str) -> Result<Expr, ParseError> {
    let mut p = Parser::new(s)?;
    let e = p.expr()?;
    p.finish()?;
    Ok(e)
}

/// Parses `name(arg, ...)` where each argument is an expression.
pub fn parse_application(s: &str) -> Result<(String, Vec<Expr>), ParseError> {
    let mut p = Parser::new(s)?;
    let Some((Tok::Ident(name), _)) = p.toks.first().cloned() else {
        return p.err("expected `name(...)`");
    };
    p.pos = 1;
    let args = p.args()?;
    p.finish()?;
    Ok((name, args))
}

pub fn expit(t: f64) -> f64 {
    if t >= 0.0 {
        1.0 / (1.0 + (-t).exp())
    } else {
        let e = t.exp();
        e / (1.0 + e)
    }
}

impl Expr {
    pub fn eval(&self, x: &[f64]) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::Var(i) => x.get(*i).copied().unwrap_or(f64::NAN),
            Expr::Neg(a) => -a.eval(x),
            Expr::Add(a, b) => a.eval(x) + b.eval(x),
            Expr::Sub(a, b) => a.eval(x) - b.eval(x),
            Expr::Mul(a, b) => a.eval(x) * b.eval(x),
            Expr::Div(a, b) => a.eval(x) / b.eval(x),
            Expr::Pow(a, b) => a.eval(x).powf(b.eval(x)),
            Expr::Call(f, args) => {
                let a = args[0].eval(x);
                match f {
                    Func::Pow => a.powf(args[1].eval(x)),
                    Func::Exp => a.exp(),
                    Func::Log => a.ln(),
                    Func::Expit => expit(a),
                    Func::C10 => a.clamp(-10.0, 10.0),
                }
            }
        }
    }

    /// Largest coordinate index referenced.
    pub fn max_var(&self) -> Option<usize> {
        match self {
            Expr::Num(_) => None,
            Expr::Var(i) => Some(*i),
            Expr::Neg(a) => a.max_var(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.max_var().max(b.max_var())
            }
            Expr::Call(_, args) => args.iter().filter_map(Expr::max_var).max(),
        }
    }

    /// Value of an expression without coordinates.
    pub fn constant(&self) -> Option<f64> {
        self.max_var().is_none().then(|| self.eval(&[]))
    }

    /// `intercept + sum coef * link(x_i)` when the expression has that form,
    /// with `c10(x_i)` mapped to a clamped term.
    pub fn to_linear(&self) -> Option<LinearPredictor> {
        let (intercept, terms) = self.linear_parts()?;
        let mut lp = LinearPredictor::new(intercept);
        for t in terms {
            lp = match t.link {
                Link::Identity => lp.term(t.index, t.coef),
                Link::Clamp(c) => lp.clamped_term(t.index, t.coef, c),
            };
        }
        Some(lp)
    }

    fn linear_parts(&self) -> Option<(f64, Vec<Term>)> {
        if let Some(c) = self.constant() {
            return Some((c, Vec::new()));
        }
        let scale = |(c, t): (f64, Vec<Term>), k: f64| {
            let t = t.into_iter().map(|mut t| {
                t.coef *= k;
                t
            });
            (c * k, t.collect())
        };
        match self {
            Expr::Var(i) => Some((0.0, vec![Term { index: *i, coef: 1.0, link: Link::Identity }])),
            Expr::Call(Func::C10, args) => match args[0] {
                Expr::Var(i) => Some((0.0, vec![Term { index: i, coef: 1.0, link: Link::Clamp(10.0) }])),
                _ => None,
            },
            Expr::Neg(a) => Some(scale(a.linear_parts()?, -1.0)),
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                let (ca, mut ta) = a.linear_parts()?;
                let k = if matches!(self, Expr::Sub(..)) { -1.0 } else { 1.0 };
                let (cb, tb) = scale(b.linear_parts()?, k);
                ta.extend(tb);
                Some((ca + cb, ta))
            }
            Expr::Mul(a, b) => match (a.constant(), b.constant()) {
                (Some(k), None) => Some(scale(b.linear_parts()?, k)),
                (None, Some(k)) => Some(scale(a.linear_parts()?, k)),
                _ => None,
            },
            Expr::Div(a, b) => Some(scale(a.linear_parts()?, 1.0 / b.constant()?)),
            _ => None,
        }
    }
}
