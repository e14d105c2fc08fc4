//! Affine normal forms of the dual potential near cuspidal-edge and
//! A3-type points.
//!
//! The construction: rotate `x` so the kernel direction becomes the first
//! axis and re-partition to `I = {1}`; solve for the graph `x1 = f(p_J)`
//! of `∂^d_{x1} g = 0` (`d = 2` for a cuspidal edge, `d = 3` for A3); split
//! `p1 = (x1 − f)^d φ1 + k1` and `z′ = (x1 − f)^d φ2 + k2`; change
//! coordinates to `y1 = (x1 − f) φ1^{1/d}` and sample `φ = φ2 / φ1` on a
//! `(y1, p_J)` grid. The dual potential is then
//! `z′ = k2 + (p1 − k1) φ((p1 − k1)^{1/d}, p_J)`, two-valued for `d = 2`.
//!
//! Grids are interpolated by tensor-product 4-point Lagrange (piecewise
//! cubic) stencils.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::affine::{AffineChartModel, AffineLegendre};
use crate::classify::{classify_point, complement, ChartWindow, Classification, Tolerances};
use crate::error::{Error, Result};
use crate::geometry::{discriminant_gradient, hessian, kernel_vector, lift, project_m, slot_of_coordinate};
use crate::gfexpr::{GeneratingFunction, Partition};
use crate::jets::Jet;
use crate::model::LocalModel;
use crate::scalar::Scalar;

pub const INTERPOLATION: &str = "tensor-product 4-point Lagrange (piecewise cubic)";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NormalFormKind {
    CuspidalEdge,
    A3Type,
}

impl NormalFormKind {
    /// Order of the divisor `(x1 − f)^d`.
    pub fn degree(self) -> usize {
        match self {
            NormalFormKind::CuspidalEdge => 2,
            NormalFormKind::A3Type => 3,
        }
    }

    fn label(self) -> Classification {
        match self {
            NormalFormKind::CuspidalEdge => Classification::CuspidalEdge,
            NormalFormKind::A3Type => Classification::A3Type,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Branch {
    Plus,
    Minus,
}

#[derive(Debug, Clone)]
enum Adapted {
    Identity(GeneratingFunction),
    Rotated(AffineChartModel<GeneratingFunction>),
}

/// A model in chart `(x1, p_2..p_n)` whose kernel at the base point is the
/// first axis, obtained from the original by an orthogonal change of `x`.
#[derive(Debug, Clone)]
pub struct AdaptedModel {
    inner: Adapted,
    matrix: DMatrix<f64>,
    base: Vec<f64>,
}

impl AdaptedModel {
    pub fn is_identity(&self) -> bool {
        matches!(self.inner, Adapted::Identity(_))
    }

    /// The orthogonal `A` with `x̃ = A x`, `p̃ = A p`.
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.matrix
    }

    /// Base point in adapted chart coordinates.
    pub fn base(&self) -> &[f64] {
        &self.base
    }

    /// Adapted chart coordinates of an original chart point.
    pub fn to_adapted(&self, q: &[f64]) -> Result<Vec<f64>> {
        match &self.inner {
            Adapted::Identity(_) => Ok(q.to_vec()),
            Adapted::Rotated(m) => m.image(q),
        }
    }
}

impl LocalModel for AdaptedModel {
    fn partition(&self) -> &Partition {
        match &self.inner {
            Adapted::Identity(g) => LocalModel::partition(g),
            Adapted::Rotated(m) => m.partition(),
        }
    }

    fn value<S: Scalar>(&self, q: &[S]) -> Result<S> {
        match &self.inner {
            Adapted::Identity(g) => g.value(q),
            Adapted::Rotated(m) => m.value(q),
        }
    }

    fn gradient<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>> {
        match &self.inner {
            Adapted::Identity(g) => g.eval_gradient(q),
            Adapted::Rotated(m) => m.gradient(q),
        }
    }

    fn is_transcendental(&self) -> bool {
        match &self.inner {
            Adapted::Identity(g) => g.is_transcendental(),
            Adapted::Rotated(_) => true,
        }
    }
}

/// Direction in `x`-space swept by the kernel: `δx_I = c_I`,
/// `δx_J = −∂_c ∂_{p_J} g`.
pub fn kernel_x_direction<M: LocalModel>(m: &M, q: &[f64], c: &[f64]) -> Result<Vec<f64>> {
    let part = m.partition().clone();
    let h = hessian(m, q)?;
    Ok((0..part.n())
        .map(|k| {
            let s = slot_of_coordinate(&part, k);
            if part.is_x_slot(s) {
                c[s]
            } else {
                -(0..part.n()).map(|b| h[(s, b)] * c[b]).sum::<f64>()
            }
        })
        .collect())
}

/// Adapted coordinates at a corank-one point `q` of `g`.
pub fn adapt(g: &GeneratingFunction, q: &[f64], tols: &Tolerances) -> Result<AdaptedModel> {
    let n = g.n();
    let c = kernel_vector(g, q, tols.kernel_tol)?.c;
    let v = kernel_x_direction(g, q, &c)?;
    let norm = v.iter().map(|a| a * a).sum::<f64>().sqrt();
    if norm == 0.0 {
        return Err(Error::ChartDegenerate("kernel has no x-component".into()));
    }
    let aligned = v[1..].iter().all(|a| a.abs() <= 1e-12 * norm) && v[0] > 0.0;
    if g.partition().i() == [1] && aligned {
        return Ok(AdaptedModel {
            inner: Adapted::Identity(g.clone()),
            matrix: DMatrix::identity(n, n),
            base: q.to_vec(),
        });
    }
    let first: Vec<f64> = v.iter().map(|a| a / norm).collect();
    let mut rows = vec![first.clone()];
    rows.extend(complement(&first));
    let a = DMatrix::from_fn(n, n, |i, k| rows[i][k]);
    let model = AffineChartModel::new(
        g.clone(),
        AffineLegendre::linear(a.clone())?,
        Partition::new(n, &[1])?,
        q.to_vec(),
    )?;
    let base = model.image(q)?;
    Ok(AdaptedModel {
        inner: Adapted::Rotated(model),
        matrix: a,
        base,
    })
}

/// Uniform grid axis: `count` nodes from `lo` to `hi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Axis {
    pub fn node(&self, i: usize) -> f64 {
        if self.count == 1 {
            return self.lo;
        }
        self.lo + (self.hi - self.lo) * i as f64 / (self.count - 1) as f64
    }

    /// Nodes and Lagrange weights of the stencil containing `t`.
    fn stencil(&self, t: f64) -> Result<Vec<(usize, f64)>> {
        if self.count == 1 {
            return Ok(vec![(0, 1.0)]);
        }
        let span = self.hi - self.lo;
        let slack = 1e-12 * (1.0 + span.abs());
        if t < self.lo - slack || t > self.hi + slack || !t.is_finite() {
            return Err(Error::Precondition(format!(
                "{t} outside sampled range [{}, {}]",
                self.lo, self.hi
            )));
        }
        let u = (t - self.lo) / span * (self.count - 1) as f64;
        let k = self.count.min(4);
        let i0 = (u.floor() as i64 - 1).clamp(0, (self.count - k) as i64) as usize;
        Ok((i0..i0 + k)
            .map(|j| {
                let w = (i0..i0 + k)
                    .filter(|&m| m != j)
                    .map(|m| (u - m as f64) / (j as f64 - m as f64))
                    .product();
                (j, w)
            })
            .collect())
    }
}

/// Tensor-product cubic interpolation of samples stored first axis slowest.
pub fn interpolate(axes: &[Axis], values: &[Option<f64>], point: &[f64]) -> Result<f64> {
    let stencils = axes
        .iter()
        .zip(point)
        .map(|(a, &t)| a.stencil(t))
        .collect::<Result<Vec<_>>>()?;
    let mut acc = 0.0;
    let mut pick = vec![0usize; axes.len()];
    loop {
        let mut flat = 0;
        let mut weight = 1.0;
        for (a, st) in stencils.iter().enumerate() {
            let (node, w) = st[pick[a]];
            flat = flat * axes[a].count + node;
            weight *= w;
        }
        let v = values[flat].ok_or_else(|| Error::Precondition("interpolation stencil hits an excluded sample".into()))?;
        acc += weight * v;
        let mut a = axes.len();
        loop {
            if a == 0 {
                return Ok(acc);
            }
            a -= 1;
            pick[a] += 1;
            if pick[a] < stencils[a].len() {
                break;
            }
            pick[a] = 0;
        }
    }
}

fn grid_points(axes: &[Axis]) -> Vec<Vec<f64>> {
    let total: usize = axes.iter().map(|a| a.count).product();
    (0..total)
        .map(|mut flat| {
            let mut p = vec![0.0; axes.len()];
            for a in (0..axes.len()).rev() {
                p[a] = axes[a].node(flat % axes[a].count);
                flat /= axes[a].count;
            }
            p
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Excluded {
    pub p_j: Vec<f64>,
    pub reason: String,
}

/// Samples of `f: p_J ↦ x1` on the window's `p_J` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularGraph {
    pub kind: NormalFormKind,
    pub axes: Vec<Axis>,
    pub f: Vec<Option<f64>>,
    pub excluded: Vec<Excluded>,
}

fn at(x1: f64, pj: &[f64]) -> Vec<f64> {
    std::iter::once(x1).chain(pj.iter().copied()).collect()
}

/// Taylor coefficients in `s` of `g`, `p1` and `z′ = x1 p1 − g` along
/// `x1 ↦ x1 + s`.
fn x1_series<M: LocalModel>(m: &M, x1: f64, pj: &[f64]) -> Result<[Vec<f64>; 3]> {
    let q = at(x1, pj);
    let mut e1 = vec![0.0; q.len()];
    e1[0] = 1.0;
    let vars = Jet::along(&q, &[&e1], 4)?;
    let g = m.value(&vars)?;
    let p1 = m.gradient(&vars)?.swap_remove(0);
    let zd = vars[0].mul(&p1).sub(&g);
    Ok([g.coeffs().to_vec(), p1.coeffs().to_vec(), zd.coeffs().to_vec()])
}

fn graph_newton<M: LocalModel>(m: &M, d: usize, seed: f64, pj: &[f64], reach: f64, tols: &Tolerances) -> Result<f64> {
    let factorial = |k: usize| (1..=k).product::<usize>() as f64;
    let mut x1 = seed;
    for _ in 0..100 {
        let [g, _, _] = x1_series(m, x1, pj)?;
        let (v, dv) = (g[d] * factorial(d), g[d + 1] * factorial(d + 1));
        if v == 0.0 {
            break;
        }
        if dv == 0.0 {
            return Err(Error::NewtonDiverged(format!("flat derivative at x1 = {x1}")));
        }
        let step = v / dv;
        x1 -= step;
        if !x1.is_finite() || (x1 - seed).abs() > reach {
            return Err(Error::NewtonDiverged(format!("left the window from seed {seed}")));
        }
        if step.abs() <= 1e-15 * (1.0 + x1.abs()) {
            break;
        }
    }
    let [g, _, _] = x1_series(m, x1, pj)?;
    if g[d].abs() * factorial(d) > tols.tol_root {
        return Err(Error::NewtonDiverged(format!("no convergence near x1 = {x1}")));
    }
    if g[d + 1].abs() * factorial(d + 1) < tols.tau_nonzero {
        return Err(Error::NewtonDiverged(format!("derivative condition fails at x1 = {x1}")));
    }
    Ok(x1)
}

fn pj_axes(w: &ChartWindow) -> Vec<Axis> {
    (1..w.dim())
        .map(|a| Axis {
            lo: w.lo(a),
            hi: w.hi(a),
            count: w.resolution,
        })
        .collect()
}

/// Solves `∂^d_{x1} g = 0` for `x1` at every `p_J` node of the (adapted)
/// window, sweeping outward from the node nearest the window center and
/// seeding each solve from an already solved neighbour.
pub fn singular_graph(m: &AdaptedModel, w: &ChartWindow, kind: NormalFormKind, tols: &Tolerances) -> Result<SingularGraph> {
    if LocalModel::partition(m).i() != [1] {
        return Err(Error::Precondition("adapted model must have I = {1}".into()));
    }
    let base = classify_point(m, m.base(), tols)?;
    if base.classification != kind.label() {
        return Err(Error::Precondition(format!(
            "base point classifies as {:?}, not {:?}",
            base.classification, kind
        )));
    }
    let d = kind.degree();
    let axes = pj_axes(w);
    let nodes = grid_points(&axes);
    let res = w.resolution;
    let dims = axes.len();
    let index = |mut flat: usize| {
        let mut idx = vec![0usize; dims];
        for a in (0..dims).rev() {
            idx[a] = flat % res;
            flat /= res;
        }
        idx
    };
    let center: Vec<i64> = (0..dims)
        .map(|a| ((m.base()[a + 1] - axes[a].lo) / (axes[a].hi - axes[a].lo) * (res - 1) as f64).round() as i64)
        .collect();
    let dist = |idx: &[usize]| idx.iter().zip(&center).map(|(&i, &c)| (i as i64 - c).abs()).max().unwrap_or(0);
    let mut order: Vec<usize> = (0..nodes.len()).collect();
    order.sort_by_key(|&k| (dist(&index(k)), k));
    let mut f: Vec<Option<f64>> = vec![None; nodes.len()];
    let mut excluded = Vec::new();
    let reach = w.half_widths[0] * 2.0;
    for k in order {
        let idx = index(k);
        let mut seed = m.base()[0];
        let mut best = i64::MAX;
        for a in 0..dims {
            for step in [-1i64, 1] {
                let j = idx[a] as i64 + step;
                if j < 0 || j >= res as i64 {
                    continue;
                }
                let mut nb = idx.clone();
                nb[a] = j as usize;
                let flat = nb.iter().fold(0, |acc, &i| acc * res + i);
                if let Some(v) = f[flat] {
                    if dist(&nb) < best {
                        best = dist(&nb);
                        seed = v;
                    }
                }
            }
        }
        match graph_newton(m, d, seed, &nodes[k], reach, tols) {
            Ok(x1) => f[k] = Some(x1),
            Err(e @ Error::ChartDegenerate(_)) => return Err(e),
            Err(e) => excluded.push(Excluded {
                p_j: nodes[k].clone(),
                reason: e.to_string(),
            }),
        }
    }
    Ok(SingularGraph { kind, axes, f, excluded })
}

/// Sampled normal-form data.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormModel {
    pub kind: NormalFormKind,
    pub degree: usize,
    /// `−1` when `p1 → −p1, x1 → −x1` was applied to make `φ1 > 0`.
    pub sign_flip: f64,
    pub adapted_identity: bool,
    /// Rows of the orthogonal change `x̃ = A x`.
    pub adaptation: Vec<Vec<f64>>,
    pub base_point: Vec<f64>,
    pub p_j_axes: Vec<Axis>,
    pub y1_axis: Axis,
    pub f: Vec<Option<f64>>,
    pub k1: Vec<Option<f64>>,
    pub k2: Vec<Option<f64>>,
    /// `φ(y1, p_J)`, `y1` slowest.
    pub phi: Vec<Option<f64>>,
    pub dphi_dy1_at_base: f64,
    pub dphi_dy1_finite_difference: f64,
    pub delta: f64,
    pub sheet_tolerance: f64,
    pub interpolation: String,
    pub excluded: Vec<Excluded>,
    /// Set when `φ1` vanished somewhere and samples were dropped.
    pub phi1_vanishes: bool,
}

/// Division data at one `p_J` node.
struct Fiber {
    f: f64,
    k1: f64,
    k2: f64,
    p1_tail: Vec<f64>,
    zd_tail: Vec<f64>,
}

impl Fiber {
    fn new<M: LocalModel>(m: &M, f: f64, pj: &[f64], d: usize) -> Result<Fiber> {
        let [_, p1, zd] = x1_series(m, f, pj)?;
        let scale = 1.0 + p1.iter().chain(&zd).map(|v| v.abs()).fold(0.0, f64::max);
        if (1..d).any(|k| p1[k].abs() > 1e-8 * scale || zd[k].abs() > 1e-8 * scale) {
            return Err(Error::Phi1Vanishes(format!("lower-order terms do not vanish at x1 = {f}")));
        }
        Ok(Fiber {
            f,
            k1: p1[0],
            k2: zd[0],
            p1_tail: p1[d..].to_vec(),
            zd_tail: zd[d..].to_vec(),
        })
    }

    /// `(φ1, φ2)` at `x1 = f + s`.
    fn phis<M: LocalModel>(&self, m: &M, s: f64, pj: &[f64], d: usize, delta: f64) -> Result<(f64, f64)> {
        if s.abs() < delta {
            let horner = |c: &[f64]| c.iter().rev().fold(0.0, |acc, v| acc * s + v);
            return Ok((horner(&self.p1_tail), horner(&self.zd_tail)));
        }
        let q = at(self.f + s, pj);
        let g = m.value_real(&q)?;
        let p1 = m.gradient(&q)?[0];
        let zd = (self.f + s) * p1 - g;
        let sd = s.powi(d as i32);
        Ok(((p1 - self.k1) / sd, (zd - self.k2) / sd))
    }
}

struct Divider<'a, M> {
    m: &'a M,
    d: usize,
    sigma: f64,
    delta: f64,
    tau: f64,
}

impl<M: LocalModel> Divider<'_, M> {
    fn y1(&self, fiber: &Fiber, s: f64, pj: &[f64]) -> Result<f64> {
        let (phi1, _) = fiber.phis(self.m, s, pj, self.d, self.delta)?;
        let phi1 = self.sigma * phi1;
        if self.d == 2 {
            if phi1 < self.tau {
                return Err(Error::Phi1Vanishes(format!("phi1 = {phi1} at x1 = {}", fiber.f + s)));
            }
            Ok(self.sigma * s * phi1.sqrt())
        } else {
            if phi1.abs() < self.tau {
                return Err(Error::Phi1Vanishes(format!("phi1 = {phi1} at x1 = {}", fiber.f + s)));
            }
            Ok(s * phi1.cbrt())
        }
    }

    fn phi(&self, fiber: &Fiber, s: f64, pj: &[f64]) -> Result<f64> {
        let (phi1, phi2) = fiber.phis(self.m, s, pj, self.d, self.delta)?;
        Ok(phi2 / (self.sigma * phi1))
    }

    /// Solves `y1(s) = y` on `[s_lo, s_hi]` by Illinois false position.
    fn invert(&self, fiber: &Fiber, y: f64, pj: &[f64], s_lo: f64, s_hi: f64) -> Result<f64> {
        let (mut a, mut b) = (s_lo, s_hi);
        let (mut fa, mut fb) = (self.y1(fiber, a, pj)? - y, self.y1(fiber, b, pj)? - y);
        if fa == 0.0 {
            return Ok(a);
        }
        if fb == 0.0 {
            return Ok(b);
        }
        if fa * fb > 0.0 {
            return Err(Error::Precondition(format!("y1 = {y} outside the fiber's range")));
        }
        let mut side = 0;
        for _ in 0..200 {
            let c = (a * fb - b * fa) / (fb - fa);
            let fc = self.y1(fiber, c, pj)? - y;
            if fc == 0.0 || (b - a).abs() <= 1e-15 * (1.0 + c.abs()) {
                return Ok(c);
            }
            if fc * fb < 0.0 {
                a = b;
                fa = fb;
                side = 0;
            } else {
                if side == 1 {
                    fa *= 0.5;
                }
                side = 1;
            }
            b = c;
            fb = fc;
        }
        Ok(b)
    }
}

/// Division step: `k1, k2` on the `p_J` grid and `φ` on the `(y1, p_J)`
/// grid, inside the adapted window `w`.
pub fn divide(m: &AdaptedModel, graph: &SingularGraph, w: &ChartWindow, tols: &Tolerances) -> Result<NormalFormModel> {
    let d = graph.kind.degree();
    let nodes = grid_points(&graph.axes);
    let mut excluded = graph.excluded.clone();
    let mut phi1_vanishes = false;
    let base_pj = &m.base()[1..];
    let base_f = graph_newton(m, d, m.base()[0], base_pj, w.half_widths[0] * 2.0, tols)?;
    let base_fiber = Fiber::new(m, base_f, base_pj, d)?;
    let sigma = if d == 2 && base_fiber.p1_tail[0] < 0.0 { -1.0 } else { 1.0 };
    let div = Divider {
        m,
        d,
        sigma,
        delta: tols.delta,
        tau: tols.tau_nonzero,
    };
    let (x_lo, x_hi) = (w.lo(0), w.hi(0));
    let mut fibers: Vec<Option<Fiber>> = Vec::with_capacity(nodes.len());
    let (mut y_lo, mut y_hi) = (f64::NEG_INFINITY, f64::INFINITY);
    for (k, pj) in nodes.iter().enumerate() {
        let Some(f) = graph.f[k] else {
            fibers.push(None);
            continue;
        };
        let fiber = Fiber::new(m, f, pj, d).and_then(|fiber| {
            let a = div.y1(&fiber, x_lo - f, pj)?;
            let b = div.y1(&fiber, x_hi - f, pj)?;
            Ok((fiber, a.min(b), a.max(b)))
        });
        match fiber {
            Ok((fiber, lo, hi)) => {
                y_lo = y_lo.max(lo);
                y_hi = y_hi.min(hi);
                fibers.push(Some(fiber));
            }
            Err(e @ Error::ChartDegenerate(_)) => return Err(e),
            Err(e) => {
                phi1_vanishes |= matches!(e, Error::Phi1Vanishes(_));
                excluded.push(Excluded {
                    p_j: pj.clone(),
                    reason: e.to_string(),
                });
                fibers.push(None);
            }
        }
    }
    if !(y_lo < 0.0 && y_hi > 0.0) {
        return Err(Error::Phi1Vanishes("no common y1 range across the window".into()));
    }
    let y1_axis = Axis {
        lo: y_lo,
        hi: y_hi,
        count: w.resolution,
    };
    let mut phi = Vec::with_capacity(w.resolution * nodes.len());
    for i in 0..w.resolution {
        let y = y1_axis.node(i);
        for (k, pj) in nodes.iter().enumerate() {
            let Some(fiber) = fibers[k].as_ref() else {
                phi.push(None);
                continue;
            };
            let value = div
                .invert(fiber, y, pj, x_lo - fiber.f, x_hi - fiber.f)
                .and_then(|s| div.phi(fiber, s, pj));
            match value {
                Ok(v) => phi.push(Some(v)),
                Err(e @ Error::ChartDegenerate(_)) => return Err(e),
                Err(e) => {
                    phi1_vanishes |= matches!(e, Error::Phi1Vanishes(_));
                    phi.push(None);
                }
            }
        }
    }
    let phi1_base = sigma * base_fiber.p1_tail[0];
    let closed = if d == 2 {
        (2.0 / 3.0) / phi1_base.sqrt()
    } else {
        (3.0 / 4.0) / phi1_base.cbrt()
    };
    let h = 1e-3;
    let phi_at = |y: f64| -> Result<f64> {
        let s = div.invert(&base_fiber, y, base_pj, x_lo - base_f, x_hi - base_f)?;
        div.phi(&base_fiber, s, base_pj)
    };
    let fd = (phi_at(h)? - phi_at(-h)?) / (2.0 * h);
    let pick = |get: fn(&Fiber) -> f64| fibers.iter().map(|f| f.as_ref().map(get)).collect::<Vec<_>>();
    Ok(NormalFormModel {
        kind: graph.kind,
        degree: d,
        sign_flip: sigma,
        adapted_identity: m.is_identity(),
        adaptation: m.matrix().row_iter().map(|r| r.iter().copied().collect()).collect(),
        base_point: m.base().to_vec(),
        p_j_axes: graph.axes.clone(),
        y1_axis,
        f: pick(|f| f.f),
        k1: pick(|f| f.k1),
        k2: pick(|f| f.k2),
        phi,
        dphi_dy1_at_base: closed,
        dphi_dy1_finite_difference: fd,
        delta: tols.delta,
        sheet_tolerance: tols.tol_root,
        interpolation: INTERPOLATION.into(),
        excluded,
        phi1_vanishes,
    })
}

impl NormalFormModel {
    /// `k1(p_J)` in adapted coordinates.
    pub fn k1_at(&self, pj: &[f64]) -> Result<f64> {
        interpolate(&self.p_j_axes, &self.k1, pj)
    }

    pub fn k2_at(&self, pj: &[f64]) -> Result<f64> {
        interpolate(&self.p_j_axes, &self.k2, pj)
    }

    pub fn phi_at(&self, y1: f64, pj: &[f64]) -> Result<f64> {
        let mut axes = vec![self.y1_axis];
        axes.extend_from_slice(&self.p_j_axes);
        let point: Vec<f64> = std::iter::once(y1).chain(pj.iter().copied()).collect();
        interpolate(&axes, &self.phi, &point)
    }

    /// `z′` on the requested branch at original m-coordinates `p`; the
    /// branch is ignored for A3-type models.
    pub fn reconstruct(&self, p: &[f64], branch: Branch) -> Result<f64> {
        let n = p.len();
        let adapted: Vec<f64> = (0..n)
            .map(|i| (0..n).map(|k| self.adaptation[i][k] * p[k]).sum())
            .collect();
        let pj = &adapted[1..];
        let k1 = self.k1_at(pj)?;
        let k2 = self.k2_at(pj)?;
        let gap = self.sign_flip * (adapted[0] - k1);
        let y1 = match self.kind {
            NormalFormKind::CuspidalEdge => {
                if gap < -self.sheet_tolerance {
                    return Err(Error::OutsideSheet { gap });
                }
                let root = gap.max(0.0).sqrt();
                match branch {
                    Branch::Plus => root,
                    Branch::Minus => -root,
                }
            }
            NormalFormKind::A3Type => gap.cbrt(),
        };
        let gap = if self.kind == NormalFormKind::CuspidalEdge { gap.max(0.0) } else { gap };
        Ok(k2 + gap * self.phi_at(y1, pj)?)
    }

    /// Both values of `z′` (one for A3-type).
    pub fn branches(&self, p: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            NormalFormKind::CuspidalEdge => Ok(vec![
                self.reconstruct(p, Branch::Plus)?,
                self.reconstruct(p, Branch::Minus)?,
            ]),
            NormalFormKind::A3Type => Ok(vec![self.reconstruct(p, Branch::Plus)?]),
        }
    }
}

/// Maximum over window chart samples of the distance from the sampled
/// m-wavefront to the nearest reconstructed branch.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundTrip {
    pub max_residual: f64,
    pub samples: usize,
    /// Samples whose `p` lies outside the sampled normal-form range.
    pub skipped: usize,
}

pub fn round_trip<M: LocalModel>(nf: &NormalFormModel, m: &M, w: &ChartWindow) -> Result<RoundTrip> {
    let mut out = RoundTrip {
        max_residual: 0.0,
        samples: 0,
        skipped: 0,
    };
    for flat in 0..w.num_nodes() {
        let q = w.point(&w.unflatten(flat));
        let Ok(pt) = lift(m, &q) else {
            out.skipped += 1;
            continue;
        };
        let (p, zd) = project_m(&pt);
        match nf.branches(&p) {
            Ok(values) => {
                let r = values.iter().map(|v| (v - zd).abs()).fold(f64::INFINITY, f64::min);
                out.max_residual = out.max_residual.max(r);
                out.samples += 1;
            }
            Err(Error::Precondition(_)) => out.skipped += 1,
            Err(e) => return Err(e),
        }
    }
    Ok(out)
}

/// Newton polish of a chart point onto `{λ = 0}`.
pub fn polish_to_singular<M: LocalModel>(m: &M, q: &[f64], tols: &Tolerances) -> Result<Vec<f64>> {
    let mut q = q.to_vec();
    for _ in 0..300 {
        let (l, g) = discriminant_gradient(m, &q)?;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if l == 0.0 || g2 == 0.0 {
            break;
        }
        let mut size: f64 = 0.0;
        for (v, d) in q.iter_mut().zip(&g) {
            *v -= l / g2 * d;
            size = size.max((l / g2 * d).abs());
        }
        if size <= 1e-15 * (1.0 + q.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            break;
        }
    }
    let (l, _) = discriminant_gradient(m, &q)?;
    if l.abs() > tols.tol_root {
        return Err(Error::Precondition(format!("no singular point near the window center (lambda = {l})")));
    }
    Ok(q)
}

/// Full pipeline at the window center: classify, adapt, graph, divide.
pub fn extract_normal_form(g: &GeneratingFunction, w: &ChartWindow, tols: &Tolerances) -> Result<(NormalFormModel, AdaptedModel)> {
    w.validate()?;
    if w.dim() != g.n() {
        return Err(Error::Precondition("window dimension differs from n".into()));
    }
    let base = polish_to_singular(g, &w.center, tols)?;
    let report = classify_point(g, &base, tols)?;
    let kind = match report.classification {
        Classification::CuspidalEdge => NormalFormKind::CuspidalEdge,
        Classification::A3Type => NormalFormKind::A3Type,
        other => {
            return Err(Error::Precondition(format!(
                "no normal form for a {other:?} base point"
            )))
        }
    };
    let adapted = adapt(g, &base, tols)?;
    let aw = ChartWindow::new(adapted.base().to_vec(), w.half_widths.clone(), w.resolution)?;
    let graph = singular_graph(&adapted, &aw, kind, tols)?;
    let nf = divide(&adapted, &graph, &aw, tols)?;
    Ok((nf, adapted))
}
