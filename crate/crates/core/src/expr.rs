//! A small expression language for user-supplied surface charts.
//!
//! ```text
//! expr  := term (('+' | '-') term)*
//! term  := unary (('*' | '/') unary)*
//! unary := '-' unary | power
//! power := atom ('^' unary)?
//! atom  := number | 'u1' | 'u2' | 'pi' | func '(' expr (',' expr)? ')' | '(' expr ')'
//! func  := sin | cos | sinh | cosh | exp | sqrt | pow
//! ```
//!
//! Expressions evaluate over any [`Real`] scalar, so charts built from them
//! can be differentiated exactly with dual numbers.

use crate::dual::Real;
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Func {
    Sin,
    Cos,
    Sinh,
    Cosh,
    Exp,
    Sqrt,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Self> {
        let mut p = Parser { s: src.as_bytes(), i: 0 };
        let e = p.expr()?;
        p.ws();
        if p.i != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval<T: Real>(&self, u: &[T; 2]) -> T {
        match self {
            Expr::Num(x) => T::cst(*x),
            Expr::Var(k) => u[*k],
            Expr::Neg(a) => -a.eval(u),
            Expr::Add(a, b) => a.eval(u) + b.eval(u),
            Expr::Sub(a, b) => a.eval(u) - b.eval(u),
            Expr::Mul(a, b) => a.eval(u) * b.eval(u),
            Expr::Div(a, b) => a.eval(u) / b.eval(u),
            Expr::Pow(a, b) => match **b {
                Expr::Num(n) if n.fract() == 0.0 && n.abs() < 64.0 => {
                    let base = a.eval(u);
                    if n >= 0.0 {
                        base.powi(n as i32)
                    } else {
                        T::one() / base.powi(-n as i32)
                    }
                }
                _ => a.eval(u).powf(b.eval(u)),
            },
            Expr::Call(f, a) => {
                let x = a.eval(u);
                match f {
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                    Func::Sinh => x.sinh(),
                    Func::Cosh => x.cosh(),
                    Func::Exp => x.exp(),
                    Func::Sqrt => x.sqrt(),
                }
            }
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Spec(format!("expression parse error at byte {}: {msg}", self.i))
    }

    fn ws(&mut self) {
        while self.i < self.s.len() && self.s[self.i].is_ascii_whitespace() {
            self.i += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.i).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.i += 1;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut e = self.term()?;
        loop {
            if self.eat(b'+') {
                e = Expr::Add(Box::new(e), Box::new(self.term()?));
            } else if self.eat(b'-') {
                e = Expr::Sub(Box::new(e), Box::new(self.term()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut e = self.unary()?;
        loop {
            if self.eat(b'*') {
                e = Expr::Mul(Box::new(e), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                e = Expr::Div(Box::new(e), Box::new(self.unary()?));
            } else {
                return Ok(e);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.eat(b'^') {
            return Ok(Expr::Pow(Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.i;
                while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
                    self.i += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
                match name {
                    "u1" => Ok(Expr::Var(0)),
                    "u2" => Ok(Expr::Var(1)),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    _ => {
                        let f = match name {
                            "sin" => Some(Func::Sin),
                            "cos" => Some(Func::Cos),
                            "sinh" => Some(Func::Sinh),
                            "cosh" => Some(Func::Cosh),
                            "exp" => Some(Func::Exp),
                            "sqrt" => Some(Func::Sqrt),
                            "pow" => None,
                            _ => return Err(self.err(&format!("unknown identifier '{name}'"))),
                        };
                        if !self.eat(b'(') {
                            return Err(self.err("expected '(' after function name"));
                        }
                        let a = self.expr()?;
                        let out = match f {
                            Some(f) => Expr::Call(f, Box::new(a)),
                            None => {
                                if !self.eat(b',') {
                                    return Err(self.err("pow takes two arguments"));
                                }
                                Expr::Pow(Box::new(a), Box::new(self.expr()?))
                            }
                        };
                        if !self.eat(b')') {
                            return Err(self.err("expected ')'"));
                        }
                        Ok(out)
                    }
                }
            }
            _ => Err(self.err("expected a number, variable, function or '('")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_digit() || self.s[self.i] == b'.') {
            self.i += 1;
        }
        if self.i < self.s.len() && (self.s[self.i] == b'e' || self.s[self.i] == b'E') {
            let save = self.i;
            self.i += 1;
            if self.i < self.s.len() && (self.s[self.i] == b'+' || self.s[self.i] == b'-') {
                self.i += 1;
            }
            let digits = self.i;
            while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                self.i += 1;
            }
            if digits == self.i {
                self.i = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.i]).expect("ascii");
        text.parse::<f64>().map(Expr::Num).map_err(|_| self.err(&format!("bad number '{text}'")))
    }
}
