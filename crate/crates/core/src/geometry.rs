//! Pointwise geometry of the Legendre submanifold `L` described by a
//! [`LocalModel`]: lifts, wavefront projections, the quasi-Hessian metric,
//! the cubic tensor, the discriminant, kernel directions, criterion
//! pairings and the canonical divergence.
//!
//! Vectors indexed by chart slot follow [`Partition`]'s slot order.
//! Directions are constant-coefficient chart vectors.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gfexpr::{GeneratingFunction, Partition, Var};
use crate::jets::{Jet, MAX_ORDER};
use crate::model::LocalModel;
use crate::scalar::{determinant, Scalar};

/// A point `(x, p, z)` of the contact space, indexed by coordinate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Lift<S> {
    pub x: Vec<S>,
    pub p: Vec<S>,
    pub z: S,
}

pub type LiftedPoint = Lift<f64>;

/// Lift of a chart point through `p_I = ∂g/∂x_I`, `x_J = −∂g/∂p_J`,
/// `z = p_J·x_J + g`.
pub fn lift_scalar<M: LocalModel, S: Scalar>(m: &M, q: &[S]) -> Result<Lift<S>> {
    let part = m.partition();
    let n = part.n();
    let g = m.value(q)?;
    let grad = m.gradient(q)?;
    let zero = q[0].constant_like(0.0);
    let mut x = vec![zero.clone(); n];
    let mut p = vec![zero; n];
    let mut z = g;
    for s in 0..n {
        let k = part.coordinate(s);
        if part.is_x_slot(s) {
            x[k] = q[s].clone();
            p[k] = grad[s].clone();
        } else {
            p[k] = q[s].clone();
            x[k] = grad[s].neg();
            z = z.add(&p[k].mul(&x[k]));
        }
    }
    Ok(Lift { x, p, z })
}

pub fn lift<M: LocalModel>(m: &M, q: &[f64]) -> Result<LiftedPoint> {
    lift_scalar(m, q)
}

/// `(p, pᵀx − z)`: a point of the m-wavefront.
pub fn project_m(pt: &LiftedPoint) -> (Vec<f64>, f64) {
    let px: f64 = pt.p.iter().zip(&pt.x).map(|(a, b)| a * b).sum();
    (pt.p.clone(), px - pt.z)
}

/// `(x, z)`: a point of the e-wavefront.
pub fn project_e(pt: &LiftedPoint) -> (Vec<f64>, f64) {
    (pt.x.clone(), pt.z)
}

/// The generating function whose m-wavefront is the e-wavefront of `g`.
pub fn dualize(g: &GeneratingFunction) -> GeneratingFunction {
    g.dualize()
}

/// The chart point of the dual model describing the same point of `L`:
/// slots `x_I, p_J` become `p′_I, x′_J`, reordered as `x′_J, p′_I`.
pub fn dual_chart_point(partition: &Partition, q: &[f64]) -> Vec<f64> {
    let ni = partition.i().len();
    q[ni..].iter().chain(&q[..ni]).copied().collect()
}

/// Slot carrying coordinate `k` (0-based).
pub fn slot_of_coordinate(partition: &Partition, k: usize) -> usize {
    partition
        .slot(Var::X(k + 1))
        .or_else(|| partition.slot(Var::P(k + 1)))
        .expect("every coordinate has a slot")
}

fn check_point<M: LocalModel>(m: &M, q: &[f64]) -> Result<()> {
    if q.len() != m.dim() {
        return Err(Error::Precondition(format!(
            "chart point has {} coordinates, expected {}",
            q.len(),
            m.dim()
        )));
    }
    Ok(())
}

/// Full Hessian of `g` in slot order.
pub fn hessian<M: LocalModel>(m: &M, q: &[f64]) -> Result<DMatrix<f64>> {
    check_point(m, q)?;
    let n = m.dim();
    let jet = m.jet(q, 2)?;
    let mut h = DMatrix::zeros(n, n);
    for a in 0..n {
        for b in a..n {
            let v = jet.derivative_along(&[a, b])?;
            h[(a, b)] = v;
            h[(b, a)] = v;
        }
    }
    Ok(h)
}

/// Quasi-Hessian metric `h`: `g_xx` on the `(I,I)` block, `−g_pp` on the
/// `(J,J)` block, zero elsewhere.
pub fn quasi_hessian<M: LocalModel>(m: &M, q: &[f64]) -> Result<DMatrix<f64>> {
    let part = m.partition();
    let mut h = hessian(m, q)?;
    let n = part.n();
    for a in 0..n {
        for b in 0..n {
            match (part.is_x_slot(a), part.is_x_slot(b)) {
                (true, true) => {}
                (false, false) => h[(a, b)] = -h[(a, b)],
                _ => h[(a, b)] = 0.0,
            }
        }
    }
    Ok(h)
}

/// `h(X, Y)`.
pub fn metric<M: LocalModel>(m: &M, q: &[f64], x: &[f64], y: &[f64]) -> Result<f64> {
    let h = quasi_hessian(m, q)?;
    let n = x.len();
    Ok((0..n).flat_map(|a| (0..n).map(move |b| (a, b))).map(|(a, b)| x[a] * h[(a, b)] * y[b]).sum())
}

/// Totally symmetric `C[k][l][m] = ∂_k∂_l∂_m g`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CubicTensor {
    pub n: usize,
    pub entries: Vec<f64>,
}

impl CubicTensor {
    pub fn get(&self, k: usize, l: usize, m: usize) -> f64 {
        self.entries[(k * self.n + l) * self.n + m]
    }

    pub fn contract(&self, x: &[f64], y: &[f64], w: &[f64]) -> f64 {
        let n = self.n;
        let mut acc = 0.0;
        for k in 0..n {
            for l in 0..n {
                for m in 0..n {
                    acc += self.get(k, l, m) * x[k] * y[l] * w[m];
                }
            }
        }
        acc
    }
}

pub fn cubic_tensor<M: LocalModel>(m: &M, q: &[f64]) -> Result<CubicTensor> {
    check_point(m, q)?;
    let n = m.dim();
    let jet = m.jet(q, 3)?;
    let mut entries = vec![0.0; n * n * n];
    for k in 0..n {
        for l in 0..n {
            for mm in 0..n {
                entries[(k * n + l) * n + mm] = jet.derivative_along(&[k, l, mm])?;
            }
        }
    }
    Ok(CubicTensor { n, entries })
}

/// Jacobian of `q ↦ p` (the m-Lagrange map); rows `p_1..p_n`, columns in
/// slot order.
pub fn lagrange_jacobian<M: LocalModel>(m: &M, q: &[f64]) -> Result<DMatrix<f64>> {
    let part = m.partition().clone();
    let hess = hessian(m, q)?;
    let n = part.n();
    let mut jac = DMatrix::zeros(n, n);
    for k in 0..n {
        let s = slot_of_coordinate(&part, k);
        if part.is_x_slot(s) {
            jac.set_row(k, &hess.row(s));
        } else {
            jac[(k, s)] = 1.0;
        }
    }
    Ok(jac)
}

/// Discriminant `λ` as a jet of the given order at `q`.
pub fn discriminant_jet<M: LocalModel>(m: &M, q: &[f64], order: usize) -> Result<Jet> {
    check_point(m, q)?;
    let part = m.partition().clone();
    let n = part.n();
    let vars = Jet::variables(q, order + 1)?;
    let grad = m.gradient(&vars)?;
    let mut rows = Vec::with_capacity(n);
    for k in 0..n {
        let s = slot_of_coordinate(&part, k);
        let row = if part.is_x_slot(s) {
            (0..n).map(|b| grad[s].differentiate(b)).collect::<Result<Vec<_>>>()?
        } else {
            (0..n)
                .map(|b| Jet::constant(if b == s { 1.0 } else { 0.0 }, n, order))
                .collect::<Result<Vec<_>>>()?
        };
        rows.push(row);
    }
    Ok(determinant(&rows))
}

pub fn discriminant<M: LocalModel>(m: &M, q: &[f64]) -> Result<f64> {
    Ok(discriminant_jet(m, q, 0)?.value())
}

/// `(λ, ∇λ)` with the gradient in slot order.
pub fn discriminant_gradient<M: LocalModel>(m: &M, q: &[f64]) -> Result<(f64, Vec<f64>)> {
    let jet = discriminant_jet(m, q, 1)?;
    let grad = (0..m.dim()).map(|k| jet.derivative_along(&[k])).collect::<Result<_>>()?;
    Ok((jet.value(), grad))
}

/// Unit direction spanning the kernel of the m-Lagrange map.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelVector {
    pub c: Vec<f64>,
}

/// Numerical rank of the m-Lagrange Jacobian: singular values below
/// `tol × σ_max` count as zero.
pub fn lagrange_rank<M: LocalModel>(m: &M, q: &[f64], tol: f64) -> Result<(usize, Vec<f64>)> {
    let jac = lagrange_jacobian(m, q)?;
    let svd = jac.svd(false, true);
    let smax = svd.singular_values.max();
    let threshold = tol * smax;
    let rank = svd.singular_values.iter().filter(|&&s| smax > 0.0 && s >= threshold).count();
    let v_t = svd.v_t.expect("requested right singular vectors");
    let k = svd.singular_values.imin();
    Ok((rank, v_t.row(k).iter().copied().collect()))
}

/// Normalized kernel direction at a corank-one point: `p_J` components are
/// snapped to zero, unit Euclidean norm, first nonzero entry positive.
pub fn kernel_vector<M: LocalModel>(m: &M, q: &[f64], tol: f64) -> Result<KernelVector> {
    let n = m.dim();
    let (rank, v) = lagrange_rank(m, q, tol)?;
    if rank + 1 != n {
        return Err(Error::NotCorankOne { rank, dim: n });
    }
    let part = m.partition();
    let mut c: Vec<f64> = (0..n).map(|s| if part.is_x_slot(s) { v[s] } else { 0.0 }).collect();
    normalize(&mut c);
    Ok(KernelVector { c })
}

/// Unit norm, first entry above noise made positive.
pub fn normalize(c: &mut [f64]) {
    let norm = c.iter().map(|v| v * v).sum::<f64>().sqrt();
    if norm == 0.0 {
        return;
    }
    for v in c.iter_mut() {
        *v /= norm;
    }
    if let Some(first) = c.iter().find(|v| v.abs() > 1e-12) {
        if *first < 0.0 {
            for v in c.iter_mut() {
                *v = -*v;
            }
        }
    }
}

/// `Z` with its `p_J` components zeroed.
pub fn restrict_i(partition: &Partition, z: &[f64]) -> Vec<f64> {
    (0..z.len()).map(|s| if partition.is_x_slot(s) { z[s] } else { 0.0 }).collect()
}

/// `Z` with its `x_I` components zeroed.
pub fn restrict_j(partition: &Partition, z: &[f64]) -> Vec<f64> {
    (0..z.len()).map(|s| if partition.is_x_slot(s) { 0.0 } else { z[s] }).collect()
}

/// `∂_{d_1} ⋯ ∂_{d_k} g(q)` with one jet variable per direction.
pub fn mixed_derivative<M: LocalModel>(m: &M, q: &[f64], dirs: &[&[f64]]) -> Result<f64> {
    check_point(m, q)?;
    if dirs.is_empty() {
        return m.value_real(q);
    }
    let vars = Jet::along(q, dirs, dirs.len())?;
    let jet = m.value(&vars)?;
    jet.derivative_along(&(0..dirs.len()).collect::<Vec<_>>())
}

/// `½ ∂_{Z_I} ∂_Y ∂_W g`.
pub fn pairing3<M: LocalModel>(m: &M, q: &[f64], z: &[f64], y: &[f64], w: &[f64]) -> Result<f64> {
    let zi = restrict_i(m.partition(), z);
    Ok(0.5 * mixed_derivative(m, q, &[&zi, y, w])?)
}

/// `½ ∂_{Z_I} ∂_Y ∂_W ∂_V g`.
pub fn pairing4<M: LocalModel>(m: &M, q: &[f64], z: &[f64], y: &[f64], w: &[f64], v: &[f64]) -> Result<f64> {
    let zi = restrict_i(m.partition(), z);
    Ok(0.5 * mixed_derivative(m, q, &[&zi, y, w, v])?)
}

/// Cuspidal-edge pairing `T3(X)`; homogeneous of degree 3 in `X`.
pub fn criterion_t3<M: LocalModel>(m: &M, q: &[f64], x: &[f64]) -> Result<f64> {
    pairing3(m, q, x, x, x)
}

/// Second-order pairing `T4(X)`; homogeneous of degree 4 in `X`.
pub fn criterion_t4<M: LocalModel>(m: &M, q: &[f64], x: &[f64]) -> Result<f64> {
    pairing4(m, q, x, x, x, x)
}

/// `X h(X, X)`: derivative along `X` of `h(X, X) = ∂²_{X_I} g − ∂²_{X_J} g`.
pub fn metric_derivative<M: LocalModel>(m: &M, q: &[f64], x: &[f64]) -> Result<f64> {
    check_point(m, q)?;
    let part = m.partition();
    let along = |inner: &[f64]| -> Result<f64> {
        let vars = Jet::along(q, &[x, inner], 3)?;
        m.value(&vars)?.derivative_along(&[0, 1, 1])
    };
    Ok(along(&restrict_i(part, x))? - along(&restrict_j(part, x))?)
}

/// Canonical divergence in chart form, generic in the scalar:
/// `g(a) − g(b) + x_J(a)·(p_J(a) − p_J(b)) + p_I(b)·(x_I(b) − x_I(a))`.
pub fn divergence_scalar<M: LocalModel, S: Scalar>(m: &M, a: &[S], b: &[S]) -> Result<S> {
    let part = m.partition();
    let da = m.gradient(a)?;
    let db = m.gradient(b)?;
    let mut acc = m.value(a)?.sub(&m.value(b)?);
    for s in 0..part.n() {
        if part.is_x_slot(s) {
            acc = acc.add(&db[s].mul(&b[s].sub(&a[s])));
        } else {
            acc = acc.sub(&da[s].mul(&a[s].sub(&b[s])));
        }
    }
    Ok(acc)
}

pub fn canonical_divergence<M: LocalModel>(m: &M, a: &[f64], b: &[f64]) -> Result<f64> {
    check_point(m, a)?;
    check_point(m, b)?;
    divergence_scalar(m, a, b)
}

/// `z(a) + z′(b) − x(a)·p(b)` computed from the two lifts.
pub fn canonical_divergence_lift<M: LocalModel>(m: &M, a: &[f64], b: &[f64]) -> Result<f64> {
    let la = lift(m, a)?;
    let lb = lift(m, b)?;
    let (_, zb_dual) = project_m(&lb);
    let xp: f64 = la.x.iter().zip(&lb.p).map(|(u, v)| u * v).sum();
    Ok(la.z + zb_dual - xp)
}

/// `D_M[L_1⋯L_k | R_1⋯R_l]`: mixed derivative of `D(a, b)` at `a = b = q`,
/// left directions acting on `a`, right on `b`.
pub fn divergence_functional<M: LocalModel>(
    m: &M,
    q: &[f64],
    left: &[&[f64]],
    right: &[&[f64]],
) -> Result<f64> {
    check_point(m, q)?;
    let total = left.len() + right.len();
    if total > MAX_ORDER {
        return Err(Error::OrderOverflow {
            requested: total,
            available: MAX_ORDER,
        });
    }
    if total == 0 {
        return canonical_divergence(m, q, q);
    }
    let zero = vec![0.0; q.len()];
    let mut on_a: Vec<&[f64]> = left.to_vec();
    on_a.extend(std::iter::repeat(zero.as_slice()).take(right.len()));
    let mut on_b: Vec<&[f64]> = vec![zero.as_slice(); left.len()];
    on_b.extend_from_slice(right);
    let a = Jet::along(q, &on_a, total)?;
    let b = Jet::along(q, &on_b, total)?;
    divergence_scalar(m, &a, &b)?.derivative_along(&(0..total).collect::<Vec<_>>())
}
