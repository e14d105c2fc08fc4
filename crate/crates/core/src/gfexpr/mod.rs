//! The generating-function language.
//!
//! A source such as `x1^3/3 - p2^2/2` together with a dimension `n` and an
//! index set `I` describes a local potential `g(x_I, p_J)` where
//! `J = {1..n} \ I`. Chart coordinates are ordered `x_I` ascending, then
//! `p_J` ascending; every vector or matrix indexed by chart slot in this
//! crate uses that order.

mod ast;
mod diff;
mod lexer;
mod parser;

use std::fmt;

pub use ast::{Expr, Func, Var};
pub use diff::derivative;
pub use parser::parse_expr;

use crate::error::{Error, Result};
use crate::jets::Jet;
use crate::scalar::Scalar;

/// Disjoint split `I ∪ J = {1..n}` of coordinate indices (1-based).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Partition {
    n: usize,
    i: Vec<usize>,
    j: Vec<usize>,
}

impl Partition {
    pub fn new(n: usize, i: &[usize]) -> Result<Partition> {
        if n == 0 {
            return Err(Error::InvalidPartition("dimension must be at least 1".into()));
        }
        let mut sorted = i.to_vec();
        sorted.sort_unstable();
        for w in sorted.windows(2) {
            if w[0] == w[1] {
                return Err(Error::InvalidPartition(format!("index {} repeated in I", w[0])));
            }
        }
        if let Some(bad) = sorted.iter().find(|&&k| k == 0 || k > n) {
            return Err(Error::InvalidPartition(format!("index {bad} outside 1..={n}")));
        }
        let j = (1..=n).filter(|k| !sorted.contains(k)).collect();
        Ok(Partition { n, i: sorted, j })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn i(&self) -> &[usize] {
        &self.i
    }

    pub fn j(&self) -> &[usize] {
        &self.j
    }

    /// The chart variables in slot order.
    pub fn chart_vars(&self) -> Vec<Var> {
        self.i.iter().map(|&k| Var::X(k)).chain(self.j.iter().map(|&k| Var::P(k))).collect()
    }

    /// Slot of a chart variable, `None` if the variable is not admitted.
    pub fn slot(&self, v: Var) -> Option<usize> {
        match v {
            Var::X(k) => self.i.iter().position(|&a| a == k),
            Var::P(k) => self.j.iter().position(|&a| a == k).map(|s| s + self.i.len()),
        }
    }

    /// Coordinate index (0-based) carried by a slot.
    pub fn coordinate(&self, slot: usize) -> usize {
        if slot < self.i.len() {
            self.i[slot] - 1
        } else {
            self.j[slot - self.i.len()] - 1
        }
    }

    /// True if the slot is an `x_I` slot.
    pub fn is_x_slot(&self, slot: usize) -> bool {
        slot < self.i.len()
    }

    /// `I ↔ J`.
    pub fn swapped(&self) -> Partition {
        Partition {
            n: self.n,
            i: self.j.clone(),
            j: self.i.clone(),
        }
    }
}

/// A parsed potential `g(x_I, p_J)` with its symbolic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratingFunction {
    partition: Partition,
    expr: Expr,
    gradient: Vec<Expr>,
}

impl GeneratingFunction {
    pub fn parse(source: &str, n: usize, i: &[usize]) -> Result<GeneratingFunction> {
        let partition = Partition::new(n, i)?;
        GeneratingFunction::new(parse_expr(source)?, partition)
    }

    pub fn new(expr: Expr, partition: Partition) -> Result<GeneratingFunction> {
        if let Some(v) = expr.variables().into_iter().find(|v| partition.slot(*v).is_none()) {
            return Err(Error::PartitionViolation { name: v.to_string() });
        }
        let gradient = partition.chart_vars().into_iter().map(|v| derivative(&expr, v)).collect();
        Ok(GeneratingFunction {
            partition,
            expr,
            gradient,
        })
    }

    pub fn partition(&self) -> &Partition {
        &self.partition
    }

    pub fn n(&self) -> usize {
        self.partition.n
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    /// `∂g/∂(slot k)` as expressions.
    pub fn gradient_exprs(&self) -> &[Expr] {
        &self.gradient
    }

    pub fn is_transcendental(&self) -> bool {
        self.expr.is_transcendental()
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.n() {
            return Err(Error::Precondition(format!(
                "chart point has {len} coordinates, expected {}",
                self.n()
            )));
        }
        Ok(())
    }

    fn eval_at<S: Scalar>(&self, e: &Expr, q: &[S]) -> Result<S> {
        self.check_len(q.len())?;
        let lookup = |v: Var| match self.partition.slot(v) {
            Some(s) => Ok(q[s].clone()),
            None => Err(Error::PartitionViolation { name: v.to_string() }),
        };
        e.eval(&q[0], &lookup)
    }

    /// `g(q)` for any scalar carrier.
    pub fn eval<S: Scalar>(&self, q: &[S]) -> Result<S> {
        self.eval_at(&self.expr, q)
    }

    /// Gradient in slot order.
    pub fn eval_gradient<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>> {
        self.gradient.iter().map(|e| self.eval_at(e, q)).collect()
    }

    pub fn eval_real(&self, q: &[f64]) -> Result<f64> {
        self.eval(q)
    }

    /// Jet of `g` at `base` in the `n` chart variables.
    pub fn eval_jet(&self, base: &[f64], order: usize) -> Result<Jet> {
        self.check_len(base.len())?;
        self.eval(&Jet::variables(base, order)?)
    }

    /// `g′(x′_J, p′_I) = −g` with `x_k ↔ p_k`, on the swapped partition.
    pub fn dualize(&self) -> GeneratingFunction {
        let swapped = Expr::Neg(Box::new(self.expr.map_vars(&|v| Expr::Var(v.swapped()))));
        GeneratingFunction::new(swapped, self.partition.swapped()).expect("renaming preserves admissibility")
    }
}

impl fmt::Display for GeneratingFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.expr)
    }
}
