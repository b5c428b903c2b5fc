//! Scalar expressions over chart coordinates `x1..xn`, used for metrics and
//! test functions given in config files.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | ident | ident '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` is right-associative and binds tighter than unary minus, so `-x1^2`
//! is `-(x1^2)` and `2^-1` is `0.5`.

mod parse;

use std::collections::BTreeSet;
use std::fmt;

use crate::error::{Error, Result};

pub use parse::parse;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Exp,
    Log,
    Sqrt,
    Tanh,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Self::Sin,
            "cos" => Self::Cos,
            "exp" => Self::Exp,
            "log" => Self::Log,
            "sqrt" => Self::Sqrt,
            "tanh" => Self::Tanh,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::Sin => "sin",
            Self::Cos => "cos",
            Self::Exp => "exp",
            Self::Log => "log",
            Self::Sqrt => "sqrt",
            Self::Tanh => "tanh",
        }
    }

    fn apply(self, x: f64) -> Result<f64> {
        match self {
            Self::Sin => Ok(x.sin()),
            Self::Cos => Ok(x.cos()),
            Self::Exp => Ok(x.exp()),
            Self::Tanh => Ok(x.tanh()),
            Self::Log if x > 0.0 => Ok(x.ln()),
            Self::Log => Err(Error::Eval(format!("log of non-positive value {x}"))),
            Self::Sqrt if x >= 0.0 => Ok(x.sqrt()),
            Self::Sqrt => Err(Error::Eval(format!("sqrt of negative value {x}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Constant {
    Pi,
    E,
}

impl Constant {
    pub fn value(self) -> f64 {
        match self {
            Self::Pi => std::f64::consts::PI,
            Self::E => std::f64::consts::E,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Const(Constant),
    /// Zero-based coordinate index (`x1` is `Coord(0)`).
    Coord(usize),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluate at `x`. Domain errors, division by zero and non-finite
    /// results are errors rather than NaN or infinity.
    pub fn eval(&self, x: &[f64]) -> Result<f64> {
        let v = match self {
            Expr::Num(v) => *v,
            Expr::Const(c) => c.value(),
            Expr::Coord(i) => *x.get(*i).ok_or_else(|| {
                Error::Eval(format!("coordinate x{} used at a point of dimension {}", i + 1, x.len()))
            })?,
            Expr::Neg(a) => -a.eval(x)?,
            Expr::Bin(op, a, b) => {
                let (a, b) = (a.eval(x)?, b.eval(x)?);
                match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div if b == 0.0 => return Err(Error::Eval("division by zero".into())),
                    BinOp::Div => a / b,
                    BinOp::Pow => a.powf(b),
                }
            }
            Expr::Call(f, a) => f.apply(a.eval(x)?)?,
        };
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Eval(format!("non-finite value in `{self}`")))
        }
    }

    /// Zero-based coordinate indices the expression depends on.
    pub fn variables(&self) -> BTreeSet<usize> {
        let mut out = BTreeSet::new();
        self.collect(&mut out);
        out
    }

    fn collect(&self, out: &mut BTreeSet<usize>) {
        match self {
            Expr::Num(_) | Expr::Const(_) => {}
            Expr::Coord(i) => {
                out.insert(*i);
            }
            Expr::Neg(a) | Expr::Call(_, a) => a.collect(out),
            Expr::Bin(_, a, b) => {
                a.collect(out);
                b.collect(out);
            }
        }
    }

    /// Error if a coordinate beyond `x{n}` is referenced.
    pub fn check_dim(&self, n: usize) -> Result<()> {
        match self.variables().last() {
            Some(&i) if i >= n => Err(Error::Eval(format!("coordinate x{} exceeds chart dimension {n}", i + 1))),
            _ => Ok(()),
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Neg(_) => 3,
            Expr::Bin(BinOp::Pow, ..) => 4,
            Expr::Num(v) if *v < 0.0 => 3,
            _ => 5,
        }
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(v) if *v < 0.0 => write!(f, "-{}", -v),
            Expr::Num(v) => write!(f, "{v}"),
            Expr::Const(Constant::Pi) => f.write_str("pi"),
            Expr::Const(Constant::E) => f.write_str("e"),
            Expr::Coord(i) => write!(f, "x{}", i + 1),
            Expr::Neg(a) => {
                f.write_str("-")?;
                write_at(f, a, 3)
            }
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
            Expr::Bin(op, a, b) => {
                let (sym, left, right) = match op {
                    BinOp::Add => (" + ", 1, 2),
                    BinOp::Sub => (" - ", 1, 2),
                    BinOp::Mul => ("*", 2, 3),
                    BinOp::Div => ("/", 2, 3),
                    BinOp::Pow => ("^", 5, 3),
                };
                write_at(f, a, left)?;
                f.write_str(sym)?;
                write_at(f, b, right)
            }
        }
    }
}

impl std::str::FromStr for Expr {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse(s)
    }
}
