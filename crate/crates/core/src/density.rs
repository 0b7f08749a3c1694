//! Density fields ρ(x) and a small arithmetic expression language.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geom::Point2;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DensityError {
    #[error("expression parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
    #[error("grid of {width}x{height} needs {expected} values, got {got}")]
    GridSize { width: usize, height: usize, expected: usize, got: usize },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum DensityField {
    Uniform(f64),
    /// Row-major samples spanning `[lo, hi]`, interpolated bilinearly. Row 0
    /// is at `lo.y`.
    Grid { width: usize, height: usize, values: Vec<f64>, lo: Point2, hi: Point2 },
    Expression(Expr),
}

impl DensityField {
    pub fn grid(width: usize, height: usize, values: Vec<f64>, lo: Point2, hi: Point2) -> Result<Self, DensityError> {
        if width == 0 || height == 0 || values.len() != width * height {
            return Err(DensityError::GridSize { width, height, expected: width * height, got: values.len() });
        }
        Ok(DensityField::Grid { width, height, values, lo, hi })
    }

    pub fn expression(src: &str) -> Result<Self, DensityError> {
        Ok(DensityField::Expression(Expr::parse(src)?))
    }

    pub fn is_uniform(&self) -> bool {
        matches!(self, DensityField::Uniform(_))
    }

    pub fn eval(&self, p: Point2) -> f64 {
        match self {
            DensityField::Uniform(v) => *v,
            DensityField::Expression(e) => e.eval(p.x, p.y),
            DensityField::Grid { width, height, values, lo, hi } => {
                let fx = if *width > 1 { (p.x - lo.x) / (hi.x - lo.x) * (*width - 1) as f64 } else { 0.0 };
                let fy = if *height > 1 { (p.y - lo.y) / (hi.y - lo.y) * (*height - 1) as f64 } else { 0.0 };
                let fx = fx.clamp(0.0, (*width - 1) as f64);
                let fy = fy.clamp(0.0, (*height - 1) as f64);
                let i0 = (fx.floor() as usize).min(width.saturating_sub(2));
                let j0 = (fy.floor() as usize).min(height.saturating_sub(2));
                let i1 = (i0 + 1).min(width - 1);
                let j1 = (j0 + 1).min(height - 1);
                let tx = fx - i0 as f64;
                let ty = fy - j0 as f64;
                let v = |i: usize, j: usize| values[j * width + i];
                let a = v(i0, j0) * (1.0 - tx) + v(i1, j0) * tx;
                let b = v(i0, j1) * (1.0 - tx) + v(i1, j1) * tx;
                a * (1.0 - ty) + b * ty
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub enum Expr {
    Num(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Bin(Op, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Op {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Func {
    Sqrt,
    Exp,
}

impl Expr {
    pub fn parse(src: &str) -> Result<Expr, DensityError> {
        let mut p = Parser { s: src.as_bytes(), pos: 0 };
        let e = p.expr()?;
        p.ws();
        if p.pos != p.s.len() {
            return Err(p.err("unexpected trailing input"));
        }
        Ok(e)
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        match self {
            Expr::Num(v) => *v,
            Expr::X => x,
            Expr::Y => y,
            Expr::Neg(e) => -e.eval(x, y),
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x, y), b.eval(x, y));
                match op {
                    Op::Add => a + b,
                    Op::Sub => a - b,
                    Op::Mul => a * b,
                    Op::Div => a / b,
                    Op::Pow => a.powf(b),
                }
            }
            Expr::Call(f, a) => {
                let a = a.eval(x, y);
                match f {
                    Func::Sqrt => a.sqrt(),
                    Func::Exp => a.exp(),
                }
            }
        }
    }
}

// expr := term (('+'|'-') term)*
// term := unary (('*'|'/') unary)*
// unary := '-' unary | power
// power := atom ('^' unary)?
struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> DensityError {
        DensityError::Parse { pos: self.pos, msg: msg.to_string() }
    }

    fn ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.ws();
        self.s.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<Expr, DensityError> {
        let mut lhs = self.term()?;
        while let Some(c @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let op = if c == b'+' { Op::Add } else { Op::Sub };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr, DensityError> {
        let mut lhs = self.unary()?;
        while let Some(c @ (b'*' | b'/')) = self.peek() {
            self.pos += 1;
            let rhs = self.unary()?;
            let op = if c == b'*' { Op::Mul } else { Op::Div };
            lhs = Expr::Bin(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr, DensityError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.unary()?;
            return Ok(Expr::Bin(Op::Pow, Box::new(base), Box::new(exp)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Expr, DensityError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => {
                let start = self.pos;
                while self.pos < self.s.len() && (self.s[self.pos].is_ascii_digit() || self.s[self.pos] == b'.') {
                    self.pos += 1;
                }
                if self.pos < self.s.len() && (self.s[self.pos] == b'e' || self.s[self.pos] == b'E') {
                    let save = self.pos;
                    self.pos += 1;
                    if self.pos < self.s.len() && (self.s[self.pos] == b'+' || self.s[self.pos] == b'-') {
                        self.pos += 1;
                    }
                    let digits = self.pos;
                    while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
                        self.pos += 1;
                    }
                    if digits == self.pos {
                        self.pos = save;
                    }
                }
                let text = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                text.parse::<f64>().map(Expr::Num).map_err(|_| DensityError::Parse {
                    pos: start,
                    msg: format!("bad number '{text}'"),
                })
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.s.len() && self.s[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.s[start..self.pos]).unwrap();
                match name {
                    "x" => Ok(Expr::X),
                    "y" => Ok(Expr::Y),
                    "pi" => Ok(Expr::Num(std::f64::consts::PI)),
                    "sqrt" | "exp" => {
                        let f = if name == "sqrt" { Func::Sqrt } else { Func::Exp };
                        if self.peek() != Some(b'(') {
                            return Err(self.err("expected '(' after function name"));
                        }
                        let arg = self.atom()?;
                        Ok(Expr::Call(f, Box::new(arg)))
                    }
                    _ => Err(DensityError::Parse { pos: start, msg: format!("unknown identifier '{name}'") }),
                }
            }
            _ => Err(self.err("expected a number, variable, function or '('")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn expression_precedence() {
        let e = Expr::parse("1 + 2 * x ^ 2 - -y / 4").unwrap();
        assert_eq!(e.eval(3.0, 8.0), 1.0 + 2.0 * 9.0 + 2.0);
        let e = Expr::parse("2^3^2").unwrap();
        assert_eq!(e.eval(0.0, 0.0), 512.0);
        let e = Expr::parse("-2^2").unwrap();
        assert_eq!(e.eval(0.0, 0.0), -4.0);
    }

    #[test]
    fn expression_functions_and_numbers() {
        let e = Expr::parse("sqrt(x*x + y*y) + exp(0) + 1.5e3").unwrap();
        assert!((e.eval(3.0, 4.0) - 1506.0).abs() < 1e-12);
        assert!(Expr::parse("foo(1)").is_err());
        assert!(Expr::parse("1 +").is_err());
        assert!(Expr::parse("(1").is_err());
    }

    #[test]
    fn bilinear_grid() {
        let g = DensityField::grid(2, 2, vec![0.0, 1.0, 2.0, 3.0], Point2::new(0.0, 0.0), Point2::new(1.0, 1.0)).unwrap();
        assert!((g.eval(Point2::new(0.5, 0.5)) - 1.5).abs() < 1e-15);
        assert!((g.eval(Point2::new(1.0, 0.0)) - 1.0).abs() < 1e-15);
        assert!((g.eval(Point2::new(0.0, 1.0)) - 2.0).abs() < 1e-15);
    }
}
