//! Truncated multivariate Taylor arithmetic ("jets") up to total order 4.
//!
//! A [`Jet`] in `m` variables of order `k` stores, for every multi-index
//! `α` with `|α| ≤ k`, the Taylor coefficient `∂^α f / α!` at the expansion
//! point. Coefficients are kept densely in graded lexicographic order: all
//! degree-0 terms, then degree 1, and so on; within a degree, exponent
//! vectors are sorted in descending lexicographic order.
//!
//! Layouts (monomial lists and product tables) are shared between all jets
//! of the same shape through a process-wide cache, so jets are cheap to
//! clone and can be evaluated in parallel.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::scalar::{Elementary, Scalar};

/// Highest total derivative order a jet can carry.
pub const MAX_ORDER: usize = 4;

/// Exponent vector `α = (α_1, ..., α_m)` of a monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct MultiIndex(Vec<u8>);

impl MultiIndex {
    pub fn new(exponents: &[usize]) -> Result<Self> {
        let degree: usize = exponents.iter().sum();
        if degree > MAX_ORDER {
            return Err(Error::OrderOverflow {
                requested: degree,
                available: MAX_ORDER,
            });
        }
        Ok(MultiIndex(exponents.iter().map(|&e| e as u8).collect()))
    }

    pub fn zero(num_vars: usize) -> Self {
        MultiIndex(vec![0; num_vars])
    }

    /// `e_index`, the exponent of a single first-order partial derivative.
    pub fn unit(num_vars: usize, index: usize) -> Self {
        let mut e = vec![0; num_vars];
        e[index] = 1;
        MultiIndex(e)
    }

    /// Multi-index that differentiates once along each listed variable
    /// (repeats allowed).
    pub fn from_vars(num_vars: usize, vars: &[usize]) -> Result<Self> {
        let mut e = vec![0usize; num_vars];
        for &v in vars {
            if v >= num_vars {
                return Err(Error::IndexOutOfRange { index: v, num_vars });
            }
            e[v] += 1;
        }
        Self::new(&e)
    }

    pub fn exponents(&self) -> &[u8] {
        &self.0
    }

    pub fn num_vars(&self) -> usize {
        self.0.len()
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(|&e| e as usize).sum()
    }

    /// `α! = Π α_i!`
    pub fn factorial(&self) -> f64 {
        self.0
            .iter()
            .map(|&e| (1..=e as u32).product::<u32>() as f64)
            .product()
    }
}

impl fmt::Display for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(")?;
        for (i, e) in self.0.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{e}")?;
        }
        write!(f, ")")
    }
}

struct Layout {
    num_vars: usize,
    order: usize,
    monomials: Vec<MultiIndex>,
    lookup: HashMap<MultiIndex, usize>,
    /// Pairs `(i, j)` with `monomials[i] + monomials[j] = monomials[k]`,
    /// grouped by `k`; `product_ranges[k]` indexes into this list.
    products: Vec<(u32, u32)>,
    product_ranges: Vec<(u32, u32)>,
}

impl Layout {
    fn build(num_vars: usize, order: usize) -> Layout {
        let mut monomials = Vec::new();
        for degree in 0..=order {
            let mut current = vec![0u8; num_vars];
            push_degree(&mut monomials, &mut current, 0, degree);
        }
        let lookup: HashMap<MultiIndex, usize> = monomials
            .iter()
            .enumerate()
            .map(|(i, m)| (m.clone(), i))
            .collect();

        let mut products = Vec::new();
        let mut product_ranges = Vec::with_capacity(monomials.len());
        for target in &monomials {
            let start = products.len() as u32;
            for (i, left) in monomials.iter().enumerate() {
                if left.degree() > target.degree() {
                    break;
                }
                if left.0.iter().zip(&target.0).all(|(l, t)| l <= t) {
                    let rest = MultiIndex(target.0.iter().zip(&left.0).map(|(t, l)| t - l).collect());
                    products.push((i as u32, lookup[&rest] as u32));
                }
            }
            product_ranges.push((start, products.len() as u32));
        }

        Layout {
            num_vars,
            order,
            monomials,
            lookup,
            products,
            product_ranges,
        }
    }
}

/// Appends all exponent vectors of total `degree` (descending lex order).
fn push_degree(out: &mut Vec<MultiIndex>, current: &mut Vec<u8>, var: usize, degree: usize) {
    if var + 1 == current.len() {
        current[var] = degree as u8;
        out.push(MultiIndex(current.clone()));
        current[var] = 0;
        return;
    }
    for e in (0..=degree).rev() {
        current[var] = e as u8;
        push_degree(out, current, var + 1, degree - e);
    }
    current[var] = 0;
}

fn layout(num_vars: usize, order: usize) -> Arc<Layout> {
    static CACHE: OnceLock<Mutex<HashMap<(usize, usize), Arc<Layout>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap_or_else(|p| p.into_inner());
    guard
        .entry((num_vars, order))
        .or_insert_with(|| Arc::new(Layout::build(num_vars, order)))
        .clone()
}

/// `C(n, k)` for small arguments.
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n {
        return 0;
    }
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

/// Truncated Taylor polynomial in `num_vars` variables.
#[derive(Clone)]
pub struct Jet {
    layout: Arc<Layout>,
    coeffs: Vec<f64>,
}

impl fmt::Debug for Jet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut map = f.debug_map();
        for (m, c) in self.layout.monomials.iter().zip(&self.coeffs) {
            map.entry(&m.to_string(), c);
        }
        map.finish()
    }
}

impl PartialEq for Jet {
    fn eq(&self, other: &Self) -> bool {
        self.num_vars() == other.num_vars()
            && self.order() == other.order()
            && self.coeffs == other.coeffs
    }
}

fn check_shape(num_vars: usize, order: usize) -> Result<()> {
    if order > MAX_ORDER {
        return Err(Error::OrderOverflow {
            requested: order,
            available: MAX_ORDER,
        });
    }
    if num_vars == 0 {
        return Err(Error::IndexOutOfRange {
            index: 0,
            num_vars: 0,
        });
    }
    Ok(())
}

impl Jet {
    pub fn constant(value: f64, num_vars: usize, order: usize) -> Result<Jet> {
        check_shape(num_vars, order)?;
        let layout = layout(num_vars, order);
        let mut coeffs = vec![0.0; layout.monomials.len()];
        coeffs[0] = value;
        Ok(Jet { layout, coeffs })
    }

    /// Jet of the coordinate function `x_index` expanded at `value`.
    pub fn variable(index: usize, value: f64, num_vars: usize, order: usize) -> Result<Jet> {
        check_shape(num_vars, order)?;
        if index >= num_vars {
            return Err(Error::IndexOutOfRange { index, num_vars });
        }
        let mut jet = Jet::constant(value, num_vars, order)?;
        if order >= 1 {
            // degree-1 monomials follow the constant, ordered e_0, e_1, ...
            jet.coeffs[1 + index] = 1.0;
        }
        Ok(jet)
    }

    /// Jets of all coordinate functions at `point`.
    pub fn variables(point: &[f64], order: usize) -> Result<Vec<Jet>> {
        (0..point.len())
            .map(|i| Jet::variable(i, point[i], point.len(), order))
            .collect()
    }

    /// Jets of the affine functions `t ↦ base + Σ_k t_k · directions[k]`,
    /// one per component of `base`, in `directions.len()` variables.
    pub fn along(base: &[f64], directions: &[&[f64]], order: usize) -> Result<Vec<Jet>> {
        let m = directions.len();
        check_shape(m, order)?;
        base.iter()
            .enumerate()
            .map(|(a, &b)| {
                let mut jet = Jet::constant(b, m, order)?;
                if order >= 1 {
                    for (k, d) in directions.iter().enumerate() {
                        jet.coeffs[1 + k] = d[a];
                    }
                }
                Ok(jet)
            })
            .collect()
    }

    pub fn num_vars(&self) -> usize {
        self.layout.num_vars
    }

    pub fn order(&self) -> usize {
        self.layout.order
    }

    /// Number of stored coefficients, `C(m + order, order)`.
    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub fn monomials(&self) -> &[MultiIndex] {
        &self.layout.monomials
    }

    pub fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn index_of(&self, alpha: &MultiIndex) -> Result<usize> {
        if alpha.num_vars() != self.num_vars() {
            return Err(Error::IndexOutOfRange {
                index: alpha.num_vars(),
                num_vars: self.num_vars(),
            });
        }
        self.layout
            .lookup
            .get(alpha)
            .copied()
            .ok_or(Error::OrderOverflow {
                requested: alpha.degree(),
                available: self.order(),
            })
    }

    /// Taylor coefficient `∂^α f / α!`.
    pub fn coeff(&self, alpha: &MultiIndex) -> Result<f64> {
        Ok(self.coeffs[self.index_of(alpha)?])
    }

    /// Partial derivative `∂^α f` at the expansion point.
    pub fn derivative(&self, alpha: &MultiIndex) -> Result<f64> {
        Ok(self.coeff(alpha)? * alpha.factorial())
    }

    /// Mixed partial derivative along the listed variables
    /// (`derivative_along(&[0, 0, 1])` is `∂³f/∂x0²∂x1`).
    pub fn derivative_along(&self, vars: &[usize]) -> Result<f64> {
        self.derivative(&MultiIndex::from_vars(self.num_vars(), vars)?)
    }

    /// Jet of `∂f/∂x_var`; its order is one less than `self`'s.
    pub fn differentiate(&self, var: usize) -> Result<Jet> {
        if var >= self.num_vars() {
            return Err(Error::IndexOutOfRange {
                index: var,
                num_vars: self.num_vars(),
            });
        }
        if self.order() == 0 {
            return Err(Error::OrderOverflow {
                requested: 1,
                available: 0,
            });
        }
        let mut out = Jet::constant(0.0, self.num_vars(), self.order() - 1)?;
        for (k, alpha) in out.layout.monomials.iter().enumerate() {
            let mut raised = alpha.clone();
            raised.0[var] += 1;
            let src = self.layout.lookup[&raised];
            out.coeffs[k] = self.coeffs[src] * raised.0[var] as f64;
        }
        Ok(out)
    }

    /// Drops all terms above `order`.
    pub fn truncate(&self, order: usize) -> Result<Jet> {
        if order > self.order() {
            return Err(Error::OrderOverflow {
                requested: order,
                available: self.order(),
            });
        }
        let mut out = Jet::constant(0.0, self.num_vars(), order)?;
        let n = out.coeffs.len();
        out.coeffs.copy_from_slice(&self.coeffs[..n]);
        Ok(out)
    }

    fn same_shape(&self, other: &Jet) -> Result<()> {
        if Arc::ptr_eq(&self.layout, &other.layout) {
            Ok(())
        } else {
            Err(Error::ShapeMismatch {
                lhs_vars: self.num_vars(),
                lhs_order: self.order(),
                rhs_vars: other.num_vars(),
                rhs_order: other.order(),
            })
        }
    }

    pub fn try_add(&self, other: &Jet) -> Result<Jet> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a + b).collect();
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs,
        })
    }

    pub fn try_sub(&self, other: &Jet) -> Result<Jet> {
        self.same_shape(other)?;
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs,
        })
    }

    pub fn try_mul(&self, other: &Jet) -> Result<Jet> {
        self.same_shape(other)?;
        let lay = &self.layout;
        let mut coeffs = vec![0.0; self.coeffs.len()];
        for (k, &(start, end)) in lay.product_ranges.iter().enumerate() {
            let mut acc = 0.0;
            for &(i, j) in &lay.products[start as usize..end as usize] {
                acc += self.coeffs[i as usize] * other.coeffs[j as usize];
            }
            coeffs[k] = acc;
        }
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs,
        })
    }

    /// Series division; the constant term is exactly `a_0 / b_0`.
    pub fn try_div(&self, other: &Jet) -> Result<Jet> {
        self.same_shape(other)?;
        let b0 = other.coeffs[0];
        if b0 == 0.0 {
            return Err(Error::Domain {
                function: "division",
                argument: b0,
                context: "divisor vanishes at the expansion point".into(),
            });
        }
        let lay = &self.layout;
        let mut q = vec![0.0; self.coeffs.len()];
        for (k, &(start, end)) in lay.product_ranges.iter().enumerate() {
            let mut acc = self.coeffs[k];
            for &(i, j) in &lay.products[start as usize..end as usize] {
                if j != 0 {
                    acc -= q[i as usize] * other.coeffs[j as usize];
                }
            }
            q[k] = acc / b0;
        }
        Ok(Jet {
            layout: self.layout.clone(),
            coeffs: q,
        })
    }

    pub fn negate(&self) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| -c).collect(),
        }
    }

    pub fn scale(&self, a: f64) -> Jet {
        Jet {
            layout: self.layout.clone(),
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// `f ∘ self` for a univariate elementary `f`, expanded at the constant
    /// term and composed with the nilpotent remainder.
    pub fn elementary(&self, kind: Elementary) -> Result<Jet> {
        let c = self.coeffs[0];
        let series = kind.taylor(c, self.order())?;
        let mut out = self.constant_like(series[0]);
        if self.order() == 0 {
            return Ok(out);
        }
        let mut h = self.clone();
        h.coeffs[0] = 0.0;
        let mut power = h.clone();
        for (k, d) in series.iter().enumerate().skip(1) {
            if k > 1 {
                power = power.try_mul(&h)?;
            }
            for (o, p) in out.coeffs.iter_mut().zip(&power.coeffs) {
                *o += d * p;
            }
        }
        Ok(out)
    }

    fn constant_like(&self, value: f64) -> Jet {
        let mut coeffs = vec![0.0; self.coeffs.len()];
        coeffs[0] = value;
        Jet {
            layout: self.layout.clone(),
            coeffs,
        }
    }
}

impl Scalar for Jet {
    fn constant_like(&self, c: f64) -> Self {
        Jet::constant_like(self, c)
    }

    fn value(&self) -> f64 {
        self.coeffs[0]
    }

    fn add(&self, rhs: &Self) -> Self {
        self.try_add(rhs).expect("jet shape mismatch")
    }

    fn sub(&self, rhs: &Self) -> Self {
        self.try_sub(rhs).expect("jet shape mismatch")
    }

    fn mul(&self, rhs: &Self) -> Self {
        self.try_mul(rhs).expect("jet shape mismatch")
    }

    fn neg(&self) -> Self {
        self.negate()
    }

    fn scale(&self, a: f64) -> Self {
        Jet::scale(self, a)
    }

    fn add_const(&self, a: f64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += a;
        out
    }

    fn div(&self, rhs: &Self) -> Result<Self> {
        self.try_div(rhs)
    }

    fn apply(&self, f: Elementary) -> Result<Self> {
        self.elementary(f)
    }

    fn is_exact_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[usize]) -> MultiIndex {
        MultiIndex::new(e).unwrap()
    }

    #[test]
    fn variable_coefficients() {
        let x = Jet::variable(0, 1.0, 1, 2).unwrap();
        assert_eq!(x.coeffs(), &[1.0, 1.0, 0.0]);
        let y = Jet::variable(1, 0.0, 2, 1).unwrap();
        assert_eq!(y.coeff(&mi(&[0, 0])).unwrap(), 0.0);
        assert_eq!(y.coeff(&mi(&[1, 0])).unwrap(), 0.0);
        assert_eq!(y.coeff(&mi(&[0, 1])).unwrap(), 1.0);
        assert!(matches!(
            Jet::variable(2, 0.0, 2, 1),
            Err(Error::IndexOutOfRange { index: 2, num_vars: 2 })
        ));
    }

    #[test]
    fn table_size_is_binomial() {
        for m in 1..=8 {
            for k in 0..=4 {
                let j = Jet::constant(0.0, m, k).unwrap();
                assert_eq!(j.len(), binomial(m + k, k));
            }
        }
    }

    #[test]
    fn ring_examples() {
        let x = Jet::variable(0, 1.0, 1, 2).unwrap();
        let sq = x.try_mul(&x).unwrap();
        assert_eq!(sq.coeffs(), &[1.0, 2.0, 1.0]);
        assert_eq!(sq.derivative(&mi(&[2])).unwrap(), 2.0);

        let x = Jet::variable(0, 0.0, 2, 2).unwrap();
        let y = Jet::variable(1, 0.0, 2, 2).unwrap();
        let xy = x.try_mul(&y).unwrap();
        for (m, c) in xy.monomials().iter().zip(xy.coeffs()) {
            let expected = if m.exponents() == [1, 1] { 1.0 } else { 0.0 };
            assert_eq!(*c, expected, "{m}");
        }

        let f = xy.try_add(&x).unwrap();
        assert!(f.try_add(&f.negate()).unwrap().is_exact_zero());
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let a = Jet::variable(0, 0.0, 2, 2).unwrap();
        let b = Jet::variable(0, 0.0, 2, 3).unwrap();
        assert!(matches!(a.try_mul(&b), Err(Error::ShapeMismatch { .. })));
        let c = Jet::variable(0, 0.0, 1, 2).unwrap();
        assert!(a.try_add(&c).is_err());
    }

    #[test]
    fn elementary_series() {
        let x = Jet::variable(0, 0.0, 1, 4).unwrap();
        let e = x.elementary(Elementary::Exp).unwrap();
        let expected = [1.0, 1.0, 0.5, 1.0 / 6.0, 1.0 / 24.0];
        for (c, want) in e.coeffs().iter().zip(expected) {
            assert!((c - want).abs() < 1e-15);
        }

        assert!(matches!(
            x.elementary(Elementary::Log),
            Err(Error::Domain { argument, .. }) if argument == 0.0
        ));

        let one_plus_x = Jet::variable(0, 0.0, 1, 2).unwrap().add_const(1.0);
        let s = one_plus_x.elementary(Elementary::Sqrt).unwrap();
        assert!((s.coeffs()[0] - 1.0).abs() < 1e-15);
        assert!((s.coeffs()[1] - 0.5).abs() < 1e-15);
        assert!((s.coeffs()[2] + 0.125).abs() < 1e-15);
    }

    #[test]
    fn division_inverts_multiplication() {
        let x = Jet::variable(0, 0.3, 2, 4).unwrap();
        let y = Jet::variable(1, -0.7, 2, 4).unwrap();
        let a = x.try_mul(&y).unwrap().add_const(2.0);
        let b = x.elementary(Elementary::Exp).unwrap().try_add(&y).unwrap();
        let q = a.try_div(&b).unwrap();
        let back = q.try_mul(&b).unwrap();
        for (u, v) in back.coeffs().iter().zip(a.coeffs()) {
            assert!((u - v).abs() < 1e-13);
        }
        assert_eq!(q.value(), a.value() / b.value());
    }

    #[test]
    fn extract_derivatives() {
        let x = Jet::variable(0, 0.0, 1, 4).unwrap();
        let x2 = x.try_mul(&x).unwrap();
        let x3 = x2.try_mul(&x).unwrap();
        let cubic = x3.scale(1.0 / 3.0);
        assert!((cubic.derivative(&mi(&[3])).unwrap() - 2.0).abs() < 1e-15);
        let quartic = x3.try_mul(&x).unwrap().scale(0.25);
        assert!((quartic.derivative(&mi(&[4])).unwrap() - 6.0).abs() < 1e-15);
        assert_eq!(quartic.derivative(&mi(&[0])).unwrap(), quartic.value());
        let low = x.truncate(2).unwrap();
        assert!(matches!(
            low.derivative(&mi(&[3])),
            Err(Error::OrderOverflow { requested: 3, available: 2 })
        ));
    }

    #[test]
    fn differentiate_shifts_coefficients() {
        let x = Jet::variable(0, 0.5, 2, 3).unwrap();
        let y = Jet::variable(1, 2.0, 2, 3).unwrap();
        let f = x.try_mul(&x).unwrap().try_mul(&y).unwrap(); // x² y
        let fx = f.differentiate(0).unwrap(); // 2 x y
        assert_eq!(fx.order(), 2);
        assert!((fx.value() - 2.0).abs() < 1e-15);
        assert!((fx.derivative_along(&[1]).unwrap() - 1.0).abs() < 1e-15);
        assert!((fx.derivative_along(&[0]).unwrap() - 4.0).abs() < 1e-15);
    }

    #[test]
    fn order_cap() {
        assert!(Jet::constant(1.0, 2, 5).is_err());
        assert!(MultiIndex::new(&[3, 2]).is_err());
    }
}
