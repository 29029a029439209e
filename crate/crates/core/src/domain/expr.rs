//! ASCII grammar for defining functions of generic domains.
//!
//! ```text
//! definition := [ "rho" "=" ] expr
//! expr       := term { ("+" | "-") term }
//! term       := unary { ("*" | "/") unary }
//! unary      := ("-" | "+") unary | power
//! power      := primary [ "^" unary ]
//! primary    := number | "|" expr "|" | "(" expr ")"
//!             | zK | xK | yK | func "(" expr ")"
//! func       := re | im | conj | abs | sqrt | exp
//! ```
//!
//! Variables `zK` are complex coordinates (1-based), `xK`/`yK` their real and
//! imaginary parts. Evaluation is complex; the defining function is the real
//! part of the result, so `|z1|^2 + 4*|z2|^2 - 1` and `re(z1^2) + ...` both work.

use crate::error::{Error, Result};
use crate::point::C64;

#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(usize),
    Re(Box<Expr>),
    Im(Box<Expr>),
    Conj(Box<Expr>),
    Abs(Box<Expr>),
    Sqrt(Box<Expr>),
    Exp(Box<Expr>),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr> {
        let mut p = Parser {
            src: src.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        // optional "rho =" prefix
        let save = p.pos;
        if p.eat_word("rho") {
            p.skip_ws();
            if !p.eat(b'=') {
                p.pos = save;
            }
        }
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.src.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    /// Largest variable index referenced (1-based), 0 if none.
    pub fn max_var(&self) -> usize {
        use Expr::*;
        match self {
            Num(_) => 0,
            Var(k) => *k,
            Re(a) | Im(a) | Conj(a) | Abs(a) | Sqrt(a) | Exp(a) | Neg(a) => a.max_var(),
            Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => a.max_var().max(b.max_var()),
        }
    }

    pub fn eval(&self, z: &[C64]) -> C64 {
        use Expr::*;
        match self {
            Num(x) => C64::new(*x, 0.0),
            Var(k) => z[*k - 1],
            Re(a) => C64::new(a.eval(z).re, 0.0),
            Im(a) => C64::new(a.eval(z).im, 0.0),
            Conj(a) => a.eval(z).conj(),
            Abs(a) => C64::new(a.eval(z).norm(), 0.0),
            Sqrt(a) => a.eval(z).sqrt(),
            Exp(a) => a.eval(z).exp(),
            Neg(a) => -a.eval(z),
            Add(a, b) => a.eval(z) + b.eval(z),
            Sub(a, b) => a.eval(z) - b.eval(z),
            Mul(a, b) => a.eval(z) * b.eval(z),
            Div(a, b) => a.eval(z) / b.eval(z),
            Pow(a, b) => {
                let base = a.eval(z);
                let ex = b.eval(z);
                if ex.im == 0.0 && ex.re.fract() == 0.0 && ex.re.abs() < 64.0 {
                    base.powi(ex.re as i32)
                } else if ex.im == 0.0 && base.im == 0.0 && base.re >= 0.0 {
                    C64::new(base.re.powf(ex.re), 0.0)
                } else {
                    base.powc(ex)
                }
            }
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Expr {
            col: self.pos + 1,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        let end = self.pos + w.len();
        if end <= self.src.len()
            && &self.src[self.pos..end] == w.as_bytes()
            && self
                .src
                .get(end)
                .is_none_or(|c| !c.is_ascii_alphanumeric() && *c != b'_')
        {
            self.pos = end;
            true
        } else {
            false
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = Expr::Add(Box::new(lhs), Box::new(self.term()?));
            } else if self.eat(b'-') {
                lhs = Expr::Sub(Box::new(lhs), Box::new(self.term()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        loop {
            if self.eat(b'*') {
                lhs = Expr::Mul(Box::new(lhs), Box::new(self.unary()?));
            } else if self.eat(b'/') {
                lhs = Expr::Div(Box::new(lhs), Box::new(self.unary()?));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat(b'-') {
            Ok(Expr::Neg(Box::new(self.unary()?)))
        } else if self.eat(b'+') {
            self.unary()
        } else {
            self.power()
        }
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat(b'^') {
            let ex = self.unary()?;
            Ok(Expr::Pow(Box::new(base), Box::new(ex)))
        } else {
            Ok(base)
        }
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek() {
            None => Err(self.err("unexpected end of input")),
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b')') {
                    return Err(self.err("expected ')'"));
                }
                Ok(e)
            }
            Some(b'|') => {
                self.pos += 1;
                let e = self.expr()?;
                if !self.eat(b'|') {
                    return Err(self.err("expected closing '|'"));
                }
                Ok(Expr::Abs(Box::new(e)))
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() => self.ident(),
            Some(_) => Err(self.err("unexpected character")),
        }
    }

    fn number(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && (self.src[self.pos].is_ascii_digit() || self.src[self.pos] == b'.') {
            self.pos += 1;
        }
        // exponent part
        if self.pos < self.src.len() && matches!(self.src[self.pos], b'e' | b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.pos < self.src.len() && matches!(self.src[self.pos], b'+' | b'-') {
                self.pos += 1;
            }
            let digits = self.pos;
            while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                self.pos += 1;
            }
            if self.pos == digits {
                self.pos = mark;
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        text.parse::<f64>().map(Expr::Num).map_err(|_| Error::Expr {
            col: start + 1,
            msg: format!("bad number '{text}'"),
        })
    }

    fn ident(&mut self) -> Result<Expr> {
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
            self.pos += 1;
        }
        let word = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
        let var_index = |prefix: &str| -> Option<usize> {
            word.strip_prefix(prefix)
                .and_then(|d| d.parse::<usize>().ok())
                .filter(|&k| k >= 1)
        };
        if let Some(k) = var_index("z") {
            return Ok(Expr::Var(k));
        }
        if let Some(k) = var_index("x") {
            return Ok(Expr::Re(Box::new(Expr::Var(k))));
        }
        if let Some(k) = var_index("y") {
            return Ok(Expr::Im(Box::new(Expr::Var(k))));
        }
        if word == "pi" {
            return Ok(Expr::Num(std::f64::consts::PI));
        }
        let wrap: fn(Box<Expr>) -> Expr = match word {
            "re" => Expr::Re,
            "im" => Expr::Im,
            "conj" => Expr::Conj,
            "abs" => Expr::Abs,
            "sqrt" => Expr::Sqrt,
            "exp" => Expr::Exp,
            _ => {
                return Err(Error::Expr {
                    col: start + 1,
                    msg: format!("unknown identifier '{word}'"),
                })
            }
        };
        if !self.eat(b'(') {
            return Err(self.err("expected '(' after function name"));
        }
        let arg = self.expr()?;
        if !self.eat(b')') {
            return Err(self.err("expected ')'"));
        }
        Ok(wrap(Box::new(arg)))
    }
}
