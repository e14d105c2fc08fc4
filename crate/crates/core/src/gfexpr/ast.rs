use std::fmt;

use crate::error::{Error, Result};
use crate::scalar::{Elementary, Scalar};

/// A chart or ambient coordinate name: `x_i` or `p_i`, indices 1-based.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X(usize),
    P(usize),
}

impl Var {
    /// `x_i ↔ p_i`
    pub fn swapped(self) -> Var {
        match self {
            Var::X(i) => Var::P(i),
            Var::P(i) => Var::X(i),
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Var::X(i) => write!(f, "x{i}"),
            Var::P(i) => write!(f, "p{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
}

impl Func {
    pub fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Sqrt => "sqrt",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    fn elementary(self) -> Elementary {
        match self {
            Func::Exp => Elementary::Exp,
            Func::Log => Elementary::Log,
            Func::Sin => Elementary::Sin,
            Func::Cos => Elementary::Cos,
            Func::Sqrt => Elementary::Sqrt,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Neg(Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

// Binding strength used by the printer; mirrors the parser's grammar.
const PREC_SUM: u8 = 1;
const PREC_PRODUCT: u8 = 2;
const PREC_UNARY: u8 = 3;
const PREC_POWER: u8 = 4;
const PREC_ATOM: u8 = 5;

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => PREC_SUM,
            Expr::Mul(..) | Expr::Div(..) => PREC_PRODUCT,
            Expr::Neg(_) => PREC_UNARY,
            Expr::Pow(..) => PREC_POWER,
            Expr::Num(c) if *c < 0.0 || c.is_sign_negative() => PREC_UNARY,
            Expr::Num(_) | Expr::Var(_) | Expr::Call(..) => PREC_ATOM,
        }
    }

    fn write_at(&self, f: &mut fmt::Formatter<'_>, min: u8) -> fmt::Result {
        let parens = self.precedence() < min;
        if parens {
            write!(f, "(")?;
        }
        match self {
            Expr::Num(c) => write!(f, "{c}")?,
            Expr::Var(v) => write!(f, "{v}")?,
            Expr::Neg(a) => {
                write!(f, "-")?;
                a.write_at(f, PREC_UNARY)?;
            }
            Expr::Add(a, b) | Expr::Sub(a, b) => {
                a.write_at(f, PREC_SUM)?;
                write!(f, " {} ", if matches!(self, Expr::Add(..)) { '+' } else { '-' })?;
                b.write_at(f, PREC_PRODUCT)?;
            }
            Expr::Mul(a, b) | Expr::Div(a, b) => {
                a.write_at(f, PREC_PRODUCT)?;
                write!(f, "{}", if matches!(self, Expr::Mul(..)) { '*' } else { '/' })?;
                b.write_at(f, PREC_UNARY)?;
            }
            Expr::Pow(a, b) => {
                a.write_at(f, PREC_ATOM)?;
                write!(f, "^")?;
                b.write_at(f, PREC_UNARY)?;
            }
            Expr::Call(func, a) => {
                write!(f, "{}(", func.name())?;
                a.write_at(f, 0)?;
                write!(f, ")")?;
            }
        }
        if parens {
            write!(f, ")")?;
        }
        Ok(())
    }

    /// Every variable referenced, in first-occurrence order.
    pub fn variables(&self) -> Vec<Var> {
        let mut out = Vec::new();
        self.visit(&mut |e| {
            if let Expr::Var(v) = e {
                if !out.contains(v) {
                    out.push(*v);
                }
            }
        });
        out
    }

    pub fn is_constant(&self) -> bool {
        match self {
            Expr::Num(_) => true,
            Expr::Var(_) => false,
            Expr::Neg(a) | Expr::Call(_, a) => a.is_constant(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.is_constant() && b.is_constant()
            }
        }
    }

    /// True if evaluation leaves the polynomial ring (functions, division by
    /// non-constants, non-integer or variable exponents).
    pub fn is_transcendental(&self) -> bool {
        match self {
            Expr::Num(_) | Expr::Var(_) => false,
            Expr::Call(..) => true,
            Expr::Neg(a) => a.is_transcendental(),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) => a.is_transcendental() || b.is_transcendental(),
            Expr::Div(a, b) => a.is_transcendental() || !b.is_constant() || b.is_transcendental(),
            Expr::Pow(a, b) => {
                if !b.is_constant() {
                    return true;
                }
                match b.eval_constant() {
                    Ok(e) => a.is_transcendental() || e.fract() != 0.0 || e < 0.0,
                    Err(_) => true,
                }
            }
        }
    }

    fn visit(&self, f: &mut impl FnMut(&Expr)) {
        f(self);
        match self {
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Neg(a) | Expr::Call(_, a) => a.visit(f),
            Expr::Add(a, b) | Expr::Sub(a, b) | Expr::Mul(a, b) | Expr::Div(a, b) | Expr::Pow(a, b) => {
                a.visit(f);
                b.visit(f);
            }
        }
    }

    /// Applies `f` to every variable leaf.
    pub fn map_vars(&self, f: &impl Fn(Var) -> Expr) -> Expr {
        let bx = |e: &Expr| Box::new(e.map_vars(f));
        match self {
            Expr::Num(c) => Expr::Num(*c),
            Expr::Var(v) => f(*v),
            Expr::Neg(a) => Expr::Neg(bx(a)),
            Expr::Add(a, b) => Expr::Add(bx(a), bx(b)),
            Expr::Sub(a, b) => Expr::Sub(bx(a), bx(b)),
            Expr::Mul(a, b) => Expr::Mul(bx(a), bx(b)),
            Expr::Div(a, b) => Expr::Div(bx(a), bx(b)),
            Expr::Pow(a, b) => Expr::Pow(bx(a), bx(b)),
            Expr::Call(func, a) => Expr::Call(*func, bx(a)),
        }
    }

    /// Value of a variable-free expression.
    pub fn eval_constant(&self) -> Result<f64> {
        self.eval(&0.0, &|v: Var| -> Result<f64> {
            Err(Error::PartitionViolation { name: v.to_string() })
        })
    }

    /// Evaluates with `lookup` supplying the value of each variable;
    /// literals are materialized with the shape of `template`.
    pub fn eval<S: Scalar>(&self, template: &S, lookup: &impl Fn(Var) -> Result<S>) -> Result<S> {
        let located = |e: Error| match e {
            Error::Domain {
                function,
                argument,
                context,
            } if !context.contains(" in `") => Error::Domain {
                function,
                argument,
                context: format!("{context} in `{self}`"),
            },
            other => other,
        };
        let ev = |e: &Expr| e.eval(template, lookup);
        match self {
            Expr::Num(c) => Ok(template.constant_like(*c)),
            Expr::Var(v) => lookup(*v),
            Expr::Neg(a) => Ok(ev(a)?.neg()),
            Expr::Add(a, b) => Ok(ev(a)?.add(&ev(b)?)),
            Expr::Sub(a, b) => Ok(ev(a)?.sub(&ev(b)?)),
            Expr::Mul(a, b) => Ok(ev(a)?.mul(&ev(b)?)),
            Expr::Div(a, b) => ev(a)?.div(&ev(b)?).map_err(located),
            Expr::Pow(a, b) => {
                let base = ev(a)?;
                if b.is_constant() {
                    let e = b.eval_constant()?;
                    if e.fract() == 0.0 && e.abs() <= 64.0 {
                        base.int_pow(e as i64).map_err(located)
                    } else {
                        base.apply(Elementary::PowReal(e)).map_err(located)
                    }
                } else {
                    // a^b = exp(b log a)
                    let log = base.apply(Elementary::Log).map_err(located)?;
                    ev(b)?.mul(&log).apply(Elementary::Exp).map_err(located)
                }
            }
            Expr::Call(func, a) => ev(a)?.apply(func.elementary()).map_err(located),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.write_at(f, 0)
    }
}
