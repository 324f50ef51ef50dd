//! Arithmetic expressions over the frequency components, used for Ω⁰(ω⁰).
//!
//! Grammar:
//! ```text
//! expr   := term (("+" | "-") term)*
//! term   := unary (("*" | "/") unary)*
//! unary  := ("+" | "-") unary | power
//! power  := atom ("^" unary)?
//! atom   := number | name | name "(" expr ")" | "(" expr ")"
//! ```
//! Names `w1 … wn` and `omega1 … omegan` refer to ω⁰ components; `pi` and
//! `e` are constants; `sqrt`, `exp`, `ln`, `sin`, `cos` are functions.

use crate::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Neg(Box<Expr>),
    Bin(char, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Func {
    Sqrt,
    Exp,
    Ln,
    Sin,
    Cos,
}

impl Expr {
    pub fn parse(src: &str, n_vars: usize) -> Result<Expr> {
        let mut p = Parser { s: src.as_bytes(), i: 0, n_vars };
        let e = p.expr()?;
        p.ws();
        if p.i != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, vars: &[f64]) -> f64 {
        match self {
            Expr::Num(x) => *x,
            Expr::Var(i) => vars[*i],
            Expr::Neg(a) => -a.eval(vars),
            Expr::Bin(op, a, b) => {
                let (x, y) = (a.eval(vars), b.eval(vars));
                match op {
                    '+' => x + y,
                    '-' => x - y,
                    '*' => x * y,
                    '/' => x / y,
                    _ => x.powf(y),
                }
            }
            Expr::Call(f, a) => {
                let x = a.eval(vars);
                match f {
                    Func::Sqrt => x.sqrt(),
                    Func::Exp => x.exp(),
                    Func::Ln => x.ln(),
                    Func::Sin => x.sin(),
                    Func::Cos => x.cos(),
                }
            }
        }
    }
}

struct Parser<'a> {
    s: &'a [u8],
    i: usize,
    n_vars: usize,
}

impl Parser<'_> {
    fn err(&self, what: &str) -> Error {
        Error::Model(format!("expression `{}`: {what} at offset {}", String::from_utf8_lossy(self.s), self.i))
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

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.i += 1;
            lhs = Expr::Bin(c as char, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.i += 1;
            lhs = Expr::Bin(c as char, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'-') => {
                self.i += 1;
                Ok(Expr::Neg(Box::new(self.unary()?)))
            }
            Some(b'+') => {
                self.i += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.i += 1;
            return Ok(Expr::Bin('^', Box::new(base), Box::new(self.unary()?)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr> {
        match self.peek() {
            Some(b'(') => {
                self.i += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.i += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.name(),
            _ => Err(self.err("expected a number, name or `(`")),
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
            if self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                while self.i < self.s.len() && self.s[self.i].is_ascii_digit() {
                    self.i += 1;
                }
            } else {
                self.i = save;
            }
        }
        let text = std::str::from_utf8(&self.s[start..self.i]).unwrap();
        text.parse::<f64>().map(Expr::Num).map_err(|_| self.err("malformed number"))
    }

    fn name(&mut self) -> Result<Expr> {
        let start = self.i;
        while self.i < self.s.len() && (self.s[self.i].is_ascii_alphanumeric() || self.s[self.i] == b'_') {
            self.i += 1;
        }
        let name = std::str::from_utf8(&self.s[start..self.i]).unwrap().to_string();
        let func = match name.as_str() {
            "sqrt" => Some(Func::Sqrt),
            "exp" => Some(Func::Exp),
            "ln" => Some(Func::Ln),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            _ => None,
        };
        if let Some(f) = func {
            if self.peek() != Some(b'(') {
                return Err(self.err("expected `(` after function name"));
            }
            return Ok(Expr::Call(f, Box::new(self.atom()?)));
        }
        match name.as_str() {
            "pi" => return Ok(Expr::Num(std::f64::consts::PI)),
            "e" => return Ok(Expr::Num(std::f64::consts::E)),
            _ => {}
        }
        let idx = name.strip_prefix("omega").or_else(|| name.strip_prefix('w')).and_then(|d| d.parse::<usize>().ok());
        match idx {
            Some(i) if i >= 1 && i <= self.n_vars => Ok(Expr::Var(i - 1)),
            _ => Err(self.err(&format!("unknown name `{name}`"))),
        }
    }
}
