//! Randomized residual checks of the pointwise identities tying the
//! criterion pairings, the metric, the cubic tensor and the canonical
//! divergence together. Each identity is evaluated by two independent
//! routes: direct jets of `g` and mixed derivatives of `D(a, b)`.

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::classify::{find_singular_set, ChartWindow, Tolerances};
use crate::error::Result;
use crate::geometry::{
    canonical_divergence, canonical_divergence_lift, criterion_t3, criterion_t4, cubic_tensor, divergence_functional,
    kernel_vector, metric, metric_derivative, mixed_derivative, pairing3,
};
use crate::model::LocalModel;

/// Residual threshold for polynomial generating functions.
pub const POLYNOMIAL_THRESHOLD: f64 = 1e-9;
/// Residual threshold when transcendental functions are involved.
pub const TRANSCENDENTAL_THRESHOLD: f64 = 1e-7;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct IdentityOptions {
    /// Perturbs the direct pairing by `1e-3`; a negative control.
    pub corrupt_pairing: bool,
}

/// Maximum absolute residual of each identity.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct IdentityResiduals {
    /// `½ ∂_{X_I} ∂²_X g` and `−½ D_M[X|XX]` against `¼ (C(X,X,X) + X h(X,X))`.
    pub criterion_tensor: f64,
    /// `D_M[e_u|YW]` against `−∂_u ∂_Y ∂_W g` for `u ∈ I`, `0` for `u ∈ J`.
    pub divergence_third: f64,
    /// `D_M[e_u|XYW]` against `−∂_u ∂_X ∂_Y ∂_W g` for `u ∈ I`, `0` for `u ∈ J`.
    pub divergence_fourth: f64,
    /// `T3 = −½ D_M[X|XX]` and `T4 = −½ D_M[X|XXX]` at corank-one points.
    pub kernel_pairings: Option<f64>,
    /// `h(X, Y) = −D_M[X|Y]`.
    pub metric: f64,
    /// `D(q, q)`, `D_M[X|−]`, `D_M[−|X]`.
    pub weak_contrast: f64,
    /// Chart formula of `D` against the lift formula.
    pub divergence_forms: f64,
}

impl IdentityResiduals {
    pub fn max(&self) -> f64 {
        [
            self.criterion_tensor,
            self.divergence_third,
            self.divergence_fourth,
            self.kernel_pairings.unwrap_or(0.0),
            self.metric,
            self.weak_contrast,
            self.divergence_forms,
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn merge(&mut self, other: &IdentityResiduals) {
        self.criterion_tensor = self.criterion_tensor.max(other.criterion_tensor);
        self.divergence_third = self.divergence_third.max(other.divergence_third);
        self.divergence_fourth = self.divergence_fourth.max(other.divergence_fourth);
        self.metric = self.metric.max(other.metric);
        self.weak_contrast = self.weak_contrast.max(other.weak_contrast);
        self.divergence_forms = self.divergence_forms.max(other.divergence_forms);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub trials: usize,
    /// Trials abandoned on a domain error.
    pub skipped: usize,
    pub corank_one_trials: usize,
    pub residuals: IdentityResiduals,
    pub threshold: f64,
    pub pass: bool,
}

/// Residuals at one point `q` with directions `x`, `y`, `w`.
pub fn identity_residuals<M: LocalModel>(
    m: &M,
    q: &[f64],
    x: &[f64],
    y: &[f64],
    w: &[f64],
    opts: IdentityOptions,
) -> Result<IdentityResiduals> {
    let n = q.len();
    let part = m.partition().clone();
    let mut r = IdentityResiduals::default();

    let corrupt = if opts.corrupt_pairing { 1e-3 } else { 0.0 };
    let tensor_side = 0.25 * (cubic_tensor(m, q)?.contract(x, x, x) + metric_derivative(m, q, x)?);
    let direct = pairing3(m, q, x, x, x)? + corrupt;
    let via_divergence = -0.5 * divergence_functional(m, q, &[x], &[x, x])?;
    r.criterion_tensor = (direct - tensor_side).abs().max((via_divergence - tensor_side).abs());

    for u in 0..n {
        let mut e = vec![0.0; n];
        e[u] = 1.0;
        let sign = if part.is_x_slot(u) { -1.0 } else { 0.0 };
        let third = sign * mixed_derivative(m, q, &[&e, y, w])?;
        r.divergence_third = r
            .divergence_third
            .max((divergence_functional(m, q, &[&e], &[y, w])? - third).abs());
        let fourth = sign * mixed_derivative(m, q, &[&e, x, y, w])?;
        r.divergence_fourth = r
            .divergence_fourth
            .max((divergence_functional(m, q, &[&e], &[x, y, w])? - fourth).abs());
    }

    r.metric = (metric(m, q, x, y)? + divergence_functional(m, q, &[x], &[y])?).abs();
    r.weak_contrast = canonical_divergence(m, q, q)?
        .abs()
        .max(divergence_functional(m, q, &[x], &[])?.abs())
        .max(divergence_functional(m, q, &[], &[x])?.abs());
    r.divergence_forms = (canonical_divergence(m, q, w)? - canonical_divergence_lift(m, q, w)?).abs();
    Ok(r)
}

/// `|T3 + ½ D_M[X|XX]|` and `|T4 + ½ D_M[X|XXX]|` with `X` the kernel vector.
pub fn kernel_pairing_residual<M: LocalModel>(m: &M, q: &[f64], tols: &Tolerances, opts: IdentityOptions) -> Result<f64> {
    let k = kernel_vector(m, q, tols.kernel_tol)?;
    let x = k.c.as_slice();
    let corrupt = if opts.corrupt_pairing { 1e-3 } else { 0.0 };
    let t3 = criterion_t3(m, q, x)? + corrupt;
    let t4 = criterion_t4(m, q, x)?;
    let d3 = -0.5 * divergence_functional(m, q, &[x], &[x, x])?;
    let d4 = -0.5 * divergence_functional(m, q, &[x], &[x, x, x])?;
    Ok((t3 - d3).abs().max((t4 - d4).abs()))
}

fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..=1.0)).collect()
}

/// Runs `trials` randomized trials inside `w`; corank-one trials sample the
/// singular points the window grid detects.
pub fn run_identity_suite<M: LocalModel>(
    m: &M,
    w: &ChartWindow,
    tols: &Tolerances,
    trials: usize,
    seed: u64,
    opts: IdentityOptions,
) -> Result<IdentityReport> {
    w.validate()?;
    let n = w.dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut residuals = IdentityResiduals::default();
    let mut skipped = 0;
    for _ in 0..trials {
        let q: Vec<f64> = (0..n)
            .map(|a| w.center[a] + w.half_widths[a] * rng.gen_range(-1.0..=1.0))
            .collect();
        let (x, y, d) = (random_vec(&mut rng, n), random_vec(&mut rng, n), random_vec(&mut rng, n));
        match identity_residuals(m, &q, &x, &y, &d, opts) {
            Ok(r) => residuals.merge(&r),
            Err(_) => skipped += 1,
        }
    }
    let singular = find_singular_set(m, w, tols.tol_root);
    let mut corank_one_trials = 0;
    if !singular.is_empty() {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let q = &singular[rng.gen_range(0..singular.len())];
            if let Ok(r) = kernel_pairing_residual(m, q, tols, opts) {
                worst = worst.max(r);
                corank_one_trials += 1;
            }
        }
        if corank_one_trials > 0 {
            residuals.kernel_pairings = Some(worst);
        }
    }
    let threshold = if m.is_transcendental() {
        TRANSCENDENTAL_THRESHOLD
    } else {
        POLYNOMIAL_THRESHOLD
    };
    let pass = residuals.max() <= threshold && skipped < trials;
    Ok(IdentityReport {
        trials,
        skipped,
        corank_one_trials,
        residuals,
        threshold,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gfexpr::GeneratingFunction;

    #[test]
    fn a2_suite_passes() {
        let g = GeneratingFunction::parse("x1^3/3 - p2^2/2", 2, &[1]).unwrap();
        let w = ChartWindow::cube(&[0.0, 0.0], 1.0, 21).unwrap();
        let r = run_identity_suite(&g, &w, &Tolerances::default(), 100, 7, IdentityOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert!(r.residuals.max() < 1e-10);
        assert!(r.corank_one_trials > 0);
    }

    #[test]
    fn corrupted_pairing_fails() {
        let g = GeneratingFunction::parse("x1^3/3 - p2^2/2", 2, &[1]).unwrap();
        let w = ChartWindow::cube(&[0.0, 0.0], 1.0, 21).unwrap();
        let opts = IdentityOptions { corrupt_pairing: true };
        let r = run_identity_suite(&g, &w, &Tolerances::default(), 10, 7, opts).unwrap();
        assert!(!r.pass);
    }

    #[test]
    fn mixed_partition_transcendental() {
        let g = GeneratingFunction::parse("sin(x1)*exp(p3/2) + x1*x2^2 - p3^2/2 + log(2 + x2^2)", 3, &[1, 2]).unwrap();
        let w = ChartWindow::cube(&[0.0, 0.0, 0.0], 1.0, 9).unwrap();
        let r = run_identity_suite(&g, &w, &Tolerances::default(), 50, 3, IdentityOptions::default()).unwrap();
        assert!(r.pass, "{r:?}");
        assert_eq!(r.threshold, TRANSCENDENTAL_THRESHOLD);
    }
}
