//! Locating the singular set `{λ = 0}` of the m-Lagrange map in a chart
//! window and classifying its points.
//!
//! Decisions use two thresholds: a value is *zero* below `tau_zero` and
//! *nonzero* at or above `tau_nonzero`; anything between is indeterminate
//! and ends in [`Classification::Degenerate`].

use std::collections::BTreeMap;

use nalgebra::SymmetricEigen;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{
    criterion_t3, criterion_t4, discriminant, discriminant_gradient, dual_chart_point, kernel_vector,
    lagrange_rank, lift, quasi_hessian, LiftedPoint,
};
use crate::gfexpr::GeneratingFunction;
use crate::jets::Jet;
use crate::model::LocalModel;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChartWindow {
    pub center: Vec<f64>,
    pub half_widths: Vec<f64>,
    /// Grid nodes per axis.
    pub resolution: usize,
}

impl ChartWindow {
    pub fn new(center: Vec<f64>, half_widths: Vec<f64>, resolution: usize) -> Result<ChartWindow> {
        let w = ChartWindow {
            center,
            half_widths,
            resolution,
        };
        w.validate()?;
        Ok(w)
    }

    /// Square window `|q_k − c_k| ≤ r` around `center`.
    pub fn cube(center: &[f64], r: f64, resolution: usize) -> Result<ChartWindow> {
        ChartWindow::new(center.to_vec(), vec![r; center.len()], resolution)
    }

    pub fn validate(&self) -> Result<()> {
        if self.center.len() != self.half_widths.len() || self.center.is_empty() {
            return Err(Error::Precondition("window center and half-widths differ in length".into()));
        }
        if self.half_widths.iter().any(|h| !(*h > 0.0 && h.is_finite())) {
            return Err(Error::Precondition("window half-widths must be positive".into()));
        }
        if self.center.iter().any(|c| !c.is_finite()) {
            return Err(Error::Precondition("window center must be finite".into()));
        }
        if self.resolution < 2 {
            return Err(Error::Precondition("window resolution must be at least 2".into()));
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.center.len()
    }

    pub fn lo(&self, axis: usize) -> f64 {
        self.center[axis] - self.half_widths[axis]
    }

    pub fn hi(&self, axis: usize) -> f64 {
        self.center[axis] + self.half_widths[axis]
    }

    pub fn spacing(&self, axis: usize) -> f64 {
        (self.hi(axis) - self.lo(axis)) / (self.resolution - 1) as f64
    }

    /// Coordinate of node `i` on `axis`.
    pub fn node(&self, axis: usize, i: usize) -> f64 {
        let (lo, hi) = (self.lo(axis), self.hi(axis));
        lo + (hi - lo) * i as f64 / (self.resolution - 1) as f64
    }

    pub fn num_nodes(&self) -> usize {
        self.resolution.pow(self.dim() as u32)
    }

    /// Multi-index of a flat node number, first axis slowest.
    pub fn unflatten(&self, mut flat: usize) -> Vec<usize> {
        let mut idx = vec![0; self.dim()];
        for a in (0..self.dim()).rev() {
            idx[a] = flat % self.resolution;
            flat /= self.resolution;
        }
        idx
    }

    pub fn flatten(&self, idx: &[usize]) -> usize {
        idx.iter().fold(0, |acc, &i| acc * self.resolution + i)
    }

    pub fn point(&self, idx: &[usize]) -> Vec<f64> {
        idx.iter().enumerate().map(|(a, &i)| self.node(a, i)).collect()
    }

    pub fn contains(&self, q: &[f64], slack: f64) -> bool {
        q.iter()
            .enumerate()
            .all(|(a, v)| (v - self.center[a]).abs() <= self.half_widths[a] * (1.0 + slack))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Tolerances {
    pub tol_root: f64,
    pub tau_zero: f64,
    pub tau_nonzero: f64,
    pub probe_radius: f64,
    pub probe_count: usize,
    /// Crossover radius between quotient and jet evaluation in the division.
    pub delta: f64,
    /// Relative singular-value threshold for the corank decision.
    pub kernel_tol: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            tol_root: 1e-10,
            tau_zero: 1e-8,
            tau_nonzero: 1e-5,
            probe_radius: 1e-2,
            probe_count: 8,
            delta: 1e-3,
            kernel_tol: 1e-8,
        }
    }
}

impl Tolerances {
    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("tol_root", self.tol_root),
            ("tau_zero", self.tau_zero),
            ("tau_nonzero", self.tau_nonzero),
            ("probe_radius", self.probe_radius),
            ("delta", self.delta),
            ("kernel_tol", self.kernel_tol),
        ];
        for (key, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config {
                    key: format!("tolerances.{key}"),
                    message: "must be positive and finite".into(),
                });
            }
        }
        if self.tau_zero >= self.tau_nonzero {
            return Err(Error::Config {
                key: "tolerances.tau_zero".into(),
                message: "must be smaller than tau_nonzero".into(),
            });
        }
        Ok(())
    }

    fn is_zero(&self, v: f64) -> bool {
        v.abs() < self.tau_zero
    }

    fn is_nonzero(&self, v: f64) -> bool {
        v.abs() >= self.tau_nonzero
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Classification {
    CuspidalEdge,
    Swallowtail,
    A3Type,
    Degenerate,
    Regular,
}

/// Outcome of the finite neighbourhood check behind an A3-type label. It
/// is a necessary consequence of the hypothesis, not a proof of it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BranchCheck {
    HypothesisConsistent,
    HypothesisInconsistent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SingularityReport {
    pub point: Vec<f64>,
    pub lifted: LiftedPoint,
    pub lambda: f64,
    pub grad_lambda: Vec<f64>,
    /// Numerical rank of the m-Lagrange Jacobian.
    pub rank: usize,
    pub kernel: Option<Vec<f64>>,
    pub t3: Option<f64>,
    pub t4: Option<f64>,
    pub x_lambda: Option<f64>,
    pub h_psd: bool,
    pub a3_branch: Option<BranchCheck>,
    pub classification: Classification,
    pub note: Option<String>,
    pub tolerances: Tolerances,
}

impl SingularityReport {
    /// Recomputes the label from the recorded numbers.
    pub fn rederive(&self) -> Classification {
        let tols = &self.tolerances;
        if self.lambda.abs() > tols.tol_root || self.rank == self.point.len() {
            return Classification::Regular;
        }
        match (self.t3, self.t4, self.x_lambda) {
            (Some(t3), Some(t4), Some(xl)) => {
                let norm = self.grad_lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
                decide(t3, t4, xl, norm, self.a3_branch == Some(BranchCheck::HypothesisConsistent), tols)
            }
            _ => Classification::Degenerate,
        }
    }
}

/// The decision procedure at a corank-one point of the singular set.
pub fn decide(t3: f64, t4: f64, x_lambda: f64, grad_lambda_norm: f64, a3_branch: bool, tols: &Tolerances) -> Classification {
    let discrepancy = (tols.is_nonzero(t3) && tols.is_zero(x_lambda)) || (tols.is_zero(t3) && tols.is_nonzero(x_lambda));
    if discrepancy {
        Classification::Degenerate
    } else if tols.is_nonzero(t3) {
        Classification::CuspidalEdge
    } else if tols.is_zero(t3) && grad_lambda_norm >= tols.tau_nonzero && tols.is_nonzero(t4) {
        Classification::Swallowtail
    } else if tols.is_zero(t3) && a3_branch && tols.is_nonzero(t4) {
        Classification::A3Type
    } else {
        Classification::Degenerate
    }
}

fn needs_branch_check(t3: f64, t4: f64, x_lambda: f64, grad_lambda_norm: f64, tols: &Tolerances) -> bool {
    decide(t3, t4, x_lambda, grad_lambda_norm, false, tols) == Classification::Degenerate
        && decide(t3, t4, x_lambda, grad_lambda_norm, true, tols) == Classification::A3Type
}

/// Classifies `q` as a point of the m-wavefront's singular set.
pub fn classify_point<M: LocalModel>(m: &M, q: &[f64], tols: &Tolerances) -> Result<SingularityReport> {
    let n = m.dim();
    let lifted = lift(m, q)?;
    let (lambda, grad_lambda) = discriminant_gradient(m, q)?;
    let (rank, _) = lagrange_rank(m, q, tols.kernel_tol)?;
    let mut report = SingularityReport {
        point: q.to_vec(),
        lifted,
        lambda,
        grad_lambda,
        rank,
        kernel: None,
        t3: None,
        t4: None,
        x_lambda: None,
        h_psd: h_psd(m, q, tols),
        a3_branch: None,
        classification: Classification::Regular,
        note: None,
        tolerances: *tols,
    };
    if rank == n || lambda.abs() > tols.tol_root {
        report.note = Some("not on the singular set".into());
        return Ok(report);
    }
    if rank + 1 < n {
        report.classification = Classification::Degenerate;
        report.note = Some(format!("corank {} exceeds one", n - rank));
        return Ok(report);
    }
    let c = kernel_vector(m, q, tols.kernel_tol)?.c;
    let t3 = criterion_t3(m, q, &c)?;
    let t4 = criterion_t4(m, q, &c)?;
    let xl: f64 = report.grad_lambda.iter().zip(&c).map(|(a, b)| a * b).sum();
    let norm = report.grad_lambda.iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut branch = false;
    if needs_branch_check(t3, t4, xl, norm, tols) {
        branch = branch_holds(m, q, &c, tols.probe_radius, tols.probe_count, tols);
        report.a3_branch = Some(if branch {
            BranchCheck::HypothesisConsistent
        } else {
            BranchCheck::HypothesisInconsistent
        });
    }
    report.classification = decide(t3, t4, xl, norm, branch, tols);
    if report.classification == Classification::Degenerate {
        report.note = Some(if (tols.is_nonzero(t3) && tols.is_zero(xl)) || (tols.is_zero(t3) && tols.is_nonzero(xl)) {
            "T3 and the kernel derivative of lambda disagree".into()
        } else {
            "criteria indeterminate or vanishing".into()
        });
    }
    report.kernel = Some(c);
    report.t3 = Some(t3);
    report.t4 = Some(t4);
    report.x_lambda = Some(xl);
    Ok(report)
}

/// Classifies the e-wavefront singularity at `q` by passing to the dual
/// generating function.
pub fn classify_point_e(g: &GeneratingFunction, q: &[f64], tols: &Tolerances) -> Result<SingularityReport> {
    classify_point(&g.dualize(), &dual_chart_point(g.partition(), q), tols)
}

/// Eigenvalues of `h` bounded below by `−tau_zero` at `q` and at the axis
/// probes `q ± r·e_a`.
pub fn h_psd<M: LocalModel>(m: &M, q: &[f64], tols: &Tolerances) -> bool {
    let mut probes = vec![q.to_vec()];
    for a in 0..q.len() {
        for sign in [1.0, -1.0] {
            let mut p = q.to_vec();
            p[a] += sign * tols.probe_radius;
            probes.push(p);
        }
    }
    let mut any = false;
    for p in probes {
        if let Ok(h) = quasi_hessian(m, &p) {
            any = true;
            if SymmetricEigen::new(h).eigenvalues.iter().any(|&e| e < -tols.tau_zero) {
                return false;
            }
        }
    }
    any
}

/// Orthonormal basis of the complement of the unit vector `c`.
pub fn complement(c: &[f64]) -> Vec<Vec<f64>> {
    let n = c.len();
    let mut basis: Vec<Vec<f64>> = vec![c.to_vec()];
    for a in 0..n {
        let mut v = vec![0.0; n];
        v[a] = 1.0;
        for b in &basis {
            let d: f64 = v.iter().zip(b).map(|(x, y)| x * y).sum();
            for (x, y) in v.iter_mut().zip(b) {
                *x -= d * y;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-8 {
            basis.push(v.iter().map(|x| x / norm).collect());
        }
        if basis.len() == n {
            break;
        }
    }
    basis.remove(0);
    basis
}

/// Checks that the zero set of `μ = ∂³_c g` is a graph through `q`
/// (`∂⁴_c g ≠ 0`) and that at `samples` points of that graph within
/// `radius` the point is singular with vanishing `T3`.
pub fn verify_a3_branch<M: LocalModel>(m: &M, q: &[f64], radius: f64, samples: usize, tols: &Tolerances) -> bool {
    match kernel_vector(m, q, tols.kernel_tol) {
        Ok(k) => branch_holds(m, q, &k.c, radius, samples, tols),
        Err(_) => false,
    }
}

fn branch_holds<M: LocalModel>(m: &M, q: &[f64], c: &[f64], radius: f64, samples: usize, tols: &Tolerances) -> bool {
    let mu = |b: &[f64]| -> Result<(f64, f64)> {
        let vars = Jet::along(b, &[c], 4)?;
        let j = m.value(&vars)?;
        Ok((j.derivative_along(&[0, 0, 0])?, j.derivative_along(&[0, 0, 0, 0])?))
    };
    match mu(q) {
        Ok((_, d)) if tols.is_nonzero(d) => {}
        _ => return false,
    }
    let others = complement(c);
    let mut probes = vec![q.to_vec()];
    if !others.is_empty() {
        let rings = samples.div_ceil(2).max(1);
        for k in 0..samples {
            let w = &others[(k / 2) % others.len()];
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            let dist = radius * ((k / 2) + 1) as f64 / rings as f64;
            probes.push(q.iter().zip(w).map(|(a, b)| a + sign * dist * b).collect());
        }
    }
    probes.iter().all(|b| match graph_point(&mu, b, c, radius) {
        Some(p) => on_singular_set_with_vanishing_t3(m, &p, tols),
        None => false,
    })
}

fn graph_point(mu: &impl Fn(&[f64]) -> Result<(f64, f64)>, base: &[f64], c: &[f64], radius: f64) -> Option<Vec<f64>> {
    let at = |t: f64| base.iter().zip(c).map(|(a, b)| a + t * b).collect::<Vec<_>>();
    let mut t = 0.0;
    for _ in 0..100 {
        let (v, d) = mu(&at(t)).ok()?;
        if v == 0.0 {
            break;
        }
        if d == 0.0 || !d.is_finite() {
            return None;
        }
        let step = v / d;
        t -= step;
        if t.abs() > radius || !t.is_finite() {
            return None;
        }
        if step.abs() <= 1e-15 * (1.0 + t.abs()) {
            break;
        }
    }
    Some(at(t))
}

fn on_singular_set_with_vanishing_t3<M: LocalModel>(m: &M, p: &[f64], tols: &Tolerances) -> bool {
    let Ok(l) = discriminant(m, p) else { return false };
    if l.abs() > tols.tol_root {
        return false;
    }
    match kernel_vector(m, p, tols.kernel_tol) {
        Ok(k) => matches!(criterion_t3(m, p, &k.c), Ok(t) if tols.is_zero(t)),
        Err(_) => false,
    }
}

/// Points of `{λ = 0}` in the window: grid nodes with `|λ| ≤ tol_root`,
/// bisection roots on grid edges with a strict sign change, and local
/// minima of `|λ|` below `√tol_root`; nodes are Newton polished. One point is kept per
/// nearest grid node; output is sorted lexicographically.
pub fn find_singular_set<M: LocalModel>(m: &M, w: &ChartWindow, tol_root: f64) -> Vec<Vec<f64>> {
    let n = w.dim();
    let res = w.resolution;
    let lambda: Vec<Option<f64>> = (0..w.num_nodes())
        .map(|flat| discriminant(m, &w.point(&w.unflatten(flat))).ok().filter(|v| v.is_finite()))
        .collect();
    let mut found: BTreeMap<Vec<usize>, (f64, Vec<f64>)> = BTreeMap::new();
    let mut keep = |q: Vec<f64>, l: f64| {
        let key: Vec<usize> = (0..n)
            .map(|a| (((q[a] - w.lo(a)) / w.spacing(a)).round().max(0.0) as usize).min(res - 1))
            .collect();
        match found.get(&key) {
            Some((best, _)) if *best <= l.abs() => {}
            _ => {
                found.insert(key, (l.abs(), q));
            }
        }
    };
    let sqrt_tol = tol_root.sqrt();
    for flat in 0..w.num_nodes() {
        let Some(l) = lambda[flat] else { continue };
        let idx = w.unflatten(flat);
        let q = w.point(&idx);
        if l.abs() <= tol_root {
            match polish(m, &q, tol_root) {
                Some((r, lr)) if l != 0.0 && lr.abs() < l.abs() && w.contains(&r, 1e-9) => keep(r, lr),
                _ => keep(q.clone(), l),
            }
        }
        let mut is_min = l.abs() < sqrt_tol && l.abs() > tol_root;
        for a in 0..n {
            for dir in [-1i64, 1] {
                let j = idx[a] as i64 + dir;
                if j < 0 || j >= res as i64 {
                    continue;
                }
                let mut nb = idx.clone();
                nb[a] = j as usize;
                let Some(l2) = lambda[w.flatten(&nb)] else { continue };
                if l2.abs() < l.abs() {
                    is_min = false;
                }
                if dir == 1 && l * l2 < 0.0 {
                    if let Some((r, lr)) = bisect(m, &q, &w.point(&nb), l, tol_root) {
                        keep(r, lr);
                    }
                }
            }
        }
        if is_min {
            if let Some((r, lr)) = polish(m, &q, tol_root) {
                if w.contains(&r, 1e-9) {
                    keep(r, lr);
                }
            }
        }
    }
    let mut out: Vec<Vec<f64>> = found.into_values().map(|(_, q)| q).collect();
    out.sort_by(|a, b| a.partial_cmp(b).expect("finite coordinates"));
    out
}

fn bisect<M: LocalModel>(m: &M, a: &[f64], b: &[f64], la: f64, tol_root: f64) -> Option<(Vec<f64>, f64)> {
    let at = |t: f64| a.iter().zip(b).map(|(u, v)| u + t * (v - u)).collect::<Vec<_>>();
    let (mut lo, mut hi, mut flo) = (0.0f64, 1.0f64, la);
    let mut best = (at(0.5), f64::INFINITY);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let q = at(mid);
        let fm = discriminant(m, &q).ok()?;
        if fm.abs() < best.1.abs() {
            best = (q, fm);
        }
        if fm == 0.0 {
            break;
        }
        if (fm < 0.0) == (flo < 0.0) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    (best.1.abs() <= tol_root).then_some(best)
}

/// Newton steps `q ← q − λ∇λ/|∇λ|²` until the step stalls.
fn polish<M: LocalModel>(m: &M, start: &[f64], tol_root: f64) -> Option<(Vec<f64>, f64)> {
    let mut q = start.to_vec();
    for _ in 0..300 {
        let (l, g) = discriminant_gradient(m, &q).ok()?;
        let g2: f64 = g.iter().map(|v| v * v).sum();
        if l == 0.0 || g2 == 0.0 {
            break;
        }
        let scale = l / g2;
        let mut size: f64 = 0.0;
        for (v, d) in q.iter_mut().zip(&g) {
            *v -= scale * d;
            size = size.max((scale * d).abs());
        }
        if !q.iter().all(|v| v.is_finite()) {
            return None;
        }
        if size <= 1e-15 * (1.0 + q.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
            break;
        }
    }
    let l = discriminant(m, &q).ok()?;
    (l.abs() <= tol_root).then_some((q, l))
}

/// Singular points of the window with their reports; per-point failures are
/// returned as errors in place.
pub fn classify_window<M: LocalModel>(m: &M, w: &ChartWindow, tols: &Tolerances) -> Vec<(Vec<f64>, Result<SingularityReport>)> {
    find_singular_set(m, w, tols.tol_root)
        .into_iter()
        .map(|q| {
            let r = classify_point(m, &q, tols);
            (q, r)
        })
        .collect()
}
