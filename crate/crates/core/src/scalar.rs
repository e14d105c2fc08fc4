//! Numeric carrier shared by plain reals and jets.
//!
//! Every expression, lift and Newton solve in this crate is written once,
//! generically over [`Scalar`]; instantiating it with `f64` gives values,
//! instantiating it with [`Jet`](crate::jets::Jet) gives derivatives.

use std::fmt::Debug;

use crate::error::{Error, Result};

/// Univariate elementary functions admitted by the expression language.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Elementary {
    Exp,
    Log,
    Sin,
    Cos,
    Sqrt,
    /// `t^r` for a non-integer real `r`; requires `t > 0`.
    PowReal(f64),
    Reciprocal,
}

impl Elementary {
    pub fn name(&self) -> &'static str {
        match self {
            Elementary::Exp => "exp",
            Elementary::Log => "log",
            Elementary::Sin => "sin",
            Elementary::Cos => "cos",
            Elementary::Sqrt => "sqrt",
            Elementary::PowReal(_) => "pow",
            Elementary::Reciprocal => "reciprocal",
        }
    }

    fn domain_error(&self, c: f64, why: &str) -> Error {
        Error::Domain {
            function: self.name(),
            argument: c,
            context: why.to_string(),
        }
    }

    /// Plain evaluation at a real argument.
    pub fn eval(&self, c: f64) -> Result<f64> {
        self.taylor(c, 0).map(|s| s[0])
    }

    /// Taylor coefficients `f^(k)(c) / k!` for `k = 0..=order`.
    pub fn taylor(&self, c: f64, order: usize) -> Result<Vec<f64>> {
        let mut d = Vec::with_capacity(order + 1);
        let fact = |k: usize| (1..=k).product::<usize>() as f64;
        match *self {
            Elementary::Exp => {
                let e = c.exp();
                for k in 0..=order {
                    d.push(e / fact(k));
                }
            }
            Elementary::Log => {
                if c <= 0.0 {
                    return Err(self.domain_error(c, "log needs a positive argument"));
                }
                d.push(c.ln());
                for k in 1..=order {
                    let sign = if k % 2 == 1 { 1.0 } else { -1.0 };
                    d.push(sign / (k as f64 * c.powi(k as i32)));
                }
            }
            Elementary::Sin | Elementary::Cos => {
                let (s, co) = (c.sin(), c.cos());
                let cycle = if matches!(self, Elementary::Sin) {
                    [s, co, -s, -co]
                } else {
                    [co, -s, -co, s]
                };
                for k in 0..=order {
                    d.push(cycle[k % 4] / fact(k));
                }
            }
            Elementary::Sqrt => {
                if c < 0.0 || (c == 0.0 && order > 0) {
                    return Err(self.domain_error(c, "sqrt needs a positive argument"));
                }
                let root = c.sqrt();
                d.push(root);
                for k in 1..=order {
                    d.push(root * general_binomial(0.5, k) / c.powi(k as i32));
                }
            }
            Elementary::PowReal(r) => {
                if c <= 0.0 {
                    return Err(self.domain_error(c, "real exponent needs a positive base"));
                }
                let base = c.powf(r);
                d.push(base);
                for k in 1..=order {
                    d.push(base * general_binomial(r, k) / c.powi(k as i32));
                }
            }
            Elementary::Reciprocal => {
                if c == 0.0 {
                    return Err(self.domain_error(c, "reciprocal of zero"));
                }
                d.push(1.0 / c);
                for k in 1..=order {
                    let sign = if k % 2 == 1 { -1.0 } else { 1.0 };
                    d.push(sign / c.powi(k as i32 + 1));
                }
            }
        }
        Ok(d)
    }
}

/// `r (r-1) ... (r-k+1) / k!`
fn general_binomial(r: f64, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (r - i as f64) / (i + 1) as f64)
}

pub trait Scalar: Clone + Debug {
    /// A constant of the same shape as `self`.
    fn constant_like(&self, c: f64) -> Self;
    fn value(&self) -> f64;
    fn add(&self, rhs: &Self) -> Self;
    fn sub(&self, rhs: &Self) -> Self;
    fn mul(&self, rhs: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, a: f64) -> Self;
    fn add_const(&self, a: f64) -> Self;
    fn div(&self, rhs: &Self) -> Result<Self>;
    fn apply(&self, f: Elementary) -> Result<Self>;
    fn is_exact_zero(&self) -> bool;

    /// `self^k` by repeated multiplication; negative `k` divides.
    fn int_pow(&self, k: i64) -> Result<Self> {
        let mut acc = self.constant_like(1.0);
        for _ in 0..k.unsigned_abs() {
            acc = acc.mul(self);
        }
        if k < 0 {
            self.constant_like(1.0).div(&acc)
        } else {
            Ok(acc)
        }
    }
}

impl Scalar for f64 {
    fn constant_like(&self, c: f64) -> Self {
        c
    }

    fn value(&self) -> f64 {
        *self
    }

    fn add(&self, rhs: &Self) -> Self {
        self + rhs
    }

    fn sub(&self, rhs: &Self) -> Self {
        self - rhs
    }

    fn mul(&self, rhs: &Self) -> Self {
        self * rhs
    }

    fn neg(&self) -> Self {
        -self
    }

    fn scale(&self, a: f64) -> Self {
        a * self
    }

    fn add_const(&self, a: f64) -> Self {
        self + a
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        if *rhs == 0.0 {
            return Err(Error::Domain {
                function: "division",
                argument: *rhs,
                context: "divisor vanishes".into(),
            });
        }
        Ok(self / rhs)
    }

    fn apply(&self, f: Elementary) -> Result<Self> {
        f.eval(*self)
    }

    fn is_exact_zero(&self) -> bool {
        *self == 0.0
    }
}

/// Dot product `Σ a_i b_i` of scalars.
pub fn dot<S: Scalar>(a: &[S], b: &[S]) -> Option<S> {
    let mut it = a.iter().zip(b);
    let (x, y) = it.next()?;
    let mut acc = x.mul(y);
    for (x, y) in it {
        acc = acc.add(&x.mul(y));
    }
    Some(acc)
}

/// Determinant by cofactor expansion along the first row; exact zeros are
/// skipped, which keeps the block-structured Jacobians cheap.
pub fn determinant<S: Scalar>(m: &[Vec<S>]) -> S {
    let n = m.len();
    let template = &m[0][0];
    match n {
        1 => m[0][0].clone(),
        2 => m[0][0].mul(&m[1][1]).sub(&m[0][1].mul(&m[1][0])),
        _ => {
            let mut acc = template.constant_like(0.0);
            for col in 0..n {
                if m[0][col].is_exact_zero() {
                    continue;
                }
                let minor: Vec<Vec<S>> = m[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|(j, _)| *j != col)
                            .map(|(_, v)| v.clone())
                            .collect()
                    })
                    .collect();
                let term = m[0][col].mul(&determinant(&minor));
                acc = if col % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
            }
            acc
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn taylor_matches_closed_forms() {
        let s = Elementary::PowReal(1.5).taylor(4.0, 2).unwrap();
        assert!((s[0] - 8.0).abs() < 1e-14);
        assert!((s[1] - 1.5 * 2.0).abs() < 1e-14);
        assert!((s[2] - 0.5 * 1.5 * 0.5 / 2.0).abs() < 1e-14);
        let r = Elementary::Reciprocal.taylor(2.0, 3).unwrap();
        assert_eq!(r, vec![0.5, -0.25, 0.125, -0.0625]);
        let l = Elementary::Log.taylor(1.0, 3).unwrap();
        assert_eq!(l, vec![0.0, 1.0, -0.5, 1.0 / 3.0]);
    }

    #[test]
    fn domain_checks() {
        assert!(Elementary::Log.eval(0.0).is_err());
        assert!(Elementary::Sqrt.eval(-1.0).is_err());
        assert_eq!(Elementary::Sqrt.eval(0.0).unwrap(), 0.0);
        assert!(Elementary::Sqrt.taylor(0.0, 1).is_err());
        assert!(Elementary::PowReal(0.5).eval(0.0).is_err());
        assert!(Elementary::Reciprocal.eval(0.0).is_err());
        assert!(1.0f64.div(&0.0).is_err());
    }

    #[test]
    fn determinant_small() {
        let m = vec![
            vec![2.0, 0.0, 1.0],
            vec![1.0, 3.0, 0.0],
            vec![0.0, 1.0, 4.0],
        ];
        assert!((determinant(&m) - 25.0).abs() < 1e-14);
        assert_eq!(Scalar::int_pow(&2.0f64, -2).unwrap(), 0.25);
    }
}
