//! Affine Legendre equivalences and re-partitioned charts.
//!
//! An equivalence acts on the contact space by
//! `x′ = A x + b`, `p′ = A⁻ᵀ p + b′`, `z′ = z + b′·(A x) + d`,
//! which preserves `dz − p·dx`. [`AffineChartModel`] describes the image
//! submanifold by a generating function in any admissible partition,
//! evaluated numerically by inverting the chart map.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::{lift_scalar, Lift};
use crate::gfexpr::Partition;
use crate::jets::{Jet, MAX_ORDER};
use crate::model::LocalModel;
use crate::scalar::Scalar;

#[derive(Debug, Clone, PartialEq)]
pub struct AffineLegendre {
    a: DMatrix<f64>,
    a_dual: DMatrix<f64>,
    b: DVector<f64>,
    b_dual: DVector<f64>,
    d: f64,
}

impl AffineLegendre {
    pub fn new(a: DMatrix<f64>, b: DVector<f64>, b_dual: DVector<f64>, d: f64) -> Result<AffineLegendre> {
        let n = a.nrows();
        if a.ncols() != n || b.len() != n || b_dual.len() != n {
            return Err(Error::Precondition("affine map dimensions disagree".into()));
        }
        let inv = a
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::Precondition("linear part is singular".into()))?;
        Ok(AffineLegendre {
            a,
            a_dual: inv.transpose(),
            b,
            b_dual,
            d,
        })
    }

    /// Pure linear change `x′ = A x`.
    pub fn linear(a: DMatrix<f64>) -> Result<AffineLegendre> {
        let n = a.nrows();
        AffineLegendre::new(a, DVector::zeros(n), DVector::zeros(n), 0.0)
    }

    pub fn dim(&self) -> usize {
        self.a.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.a
    }

    /// `A⁻ᵀ`, the induced action on `p`.
    pub fn dual_matrix(&self) -> &DMatrix<f64> {
        &self.a_dual
    }

    pub fn apply<S: Scalar>(&self, pt: &Lift<S>) -> Lift<S> {
        let n = self.dim();
        let affine = |m: &DMatrix<f64>, shift: &DVector<f64>, v: &[S]| -> Vec<S> {
            (0..n)
                .map(|i| {
                    let mut acc = v[0].scale(m[(i, 0)]);
                    for k in 1..n {
                        acc = acc.add(&v[k].scale(m[(i, k)]));
                    }
                    acc.add_const(shift[i])
                })
                .collect()
        };
        let zero = DVector::zeros(n);
        let ax = affine(&self.a, &zero, &pt.x);
        let mut z = pt.z.add_const(self.d);
        for i in 0..n {
            z = z.add(&ax[i].scale(self.b_dual[i]));
        }
        let x = ax.iter().zip(self.b.iter()).map(|(v, s)| v.add_const(*s)).collect();
        let p = affine(&self.a_dual, &self.b_dual, &pt.p);
        Lift { x, p, z }
    }
}

/// The image of `inner` under an affine Legendre equivalence, as a local
/// model in `partition`. Chart points are found by Newton continuation
/// from `anchor`, an inner chart point.
#[derive(Debug, Clone)]
pub struct AffineChartModel<M> {
    inner: M,
    map: AffineLegendre,
    partition: Partition,
    anchor: Vec<f64>,
    anchor_image: Vec<f64>,
}

const NEWTON_ITERATIONS: usize = 60;
const MAX_HALVINGS: u32 = 8;

impl<M: LocalModel> AffineChartModel<M> {
    pub fn new(inner: M, map: AffineLegendre, partition: Partition, anchor: Vec<f64>) -> Result<AffineChartModel<M>> {
        if map.dim() != inner.dim() || partition.n() != inner.dim() || anchor.len() != inner.dim() {
            return Err(Error::Precondition("model, map and partition dimensions disagree".into()));
        }
        let mut model = AffineChartModel {
            inner,
            map,
            partition,
            anchor,
            anchor_image: Vec::new(),
        };
        model.anchor_image = model.forward(&model.anchor)?.0;
        model.inverse_jacobian(&model.anchor)?;
        Ok(model)
    }

    pub fn inner(&self) -> &M {
        &self.inner
    }

    pub fn map(&self) -> &AffineLegendre {
        &self.map
    }

    /// New chart coordinates of the point with inner chart coordinates `q`.
    pub fn image(&self, q: &[f64]) -> Result<Vec<f64>> {
        Ok(self.forward(q)?.0)
    }

    /// Inner chart coordinates of the point with new chart coordinates `q′`.
    pub fn preimage(&self, target: &[f64]) -> Result<Vec<f64>> {
        self.solve_real(target)
    }

    fn forward<S: Scalar>(&self, q: &[S]) -> Result<(Vec<S>, Lift<S>)> {
        let image = self.map.apply(&lift_scalar(&self.inner, q)?);
        let coords = (0..self.partition.n())
            .map(|s| {
                let k = self.partition.coordinate(s);
                if self.partition.is_x_slot(s) {
                    image.x[k].clone()
                } else {
                    image.p[k].clone()
                }
            })
            .collect();
        Ok((coords, image))
    }

    fn inverse_jacobian(&self, q: &[f64]) -> Result<DMatrix<f64>> {
        let n = q.len();
        let (f, _) = self.forward(&Jet::variables(q, 1)?)?;
        let mut jac = DMatrix::zeros(n, n);
        for i in 0..n {
            for k in 0..n {
                jac[(i, k)] = f[i].derivative_along(&[k])?;
            }
        }
        jac.try_inverse()
            .ok_or_else(|| Error::ChartDegenerate(format!("chart map is singular at {q:?}")))
    }

    fn newton(&self, start: &[f64], target: &[f64]) -> Option<Vec<f64>> {
        let scale = 1.0 + target.iter().map(|v| v.abs()).fold(0.0, f64::max);
        let mut q = start.to_vec();
        for _ in 0..NEWTON_ITERATIONS {
            let (f, _) = self.forward(&q).ok()?;
            let r = DVector::from_iterator(q.len(), f.iter().zip(target).map(|(a, b)| a - b));
            if r.amax() <= 1e-14 * scale {
                return Some(q);
            }
            let step = self.inverse_jacobian(&q).ok()? * r;
            for (v, d) in q.iter_mut().zip(step.iter()) {
                *v -= d;
            }
            if q.iter().any(|v| !v.is_finite()) {
                return None;
            }
            if step.amax() <= 1e-15 * (1.0 + q.iter().map(|v| v.abs()).fold(0.0, f64::max)) {
                let (f, _) = self.forward(&q).ok()?;
                let res = f.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
                return (res <= 1e-10 * scale).then_some(q);
            }
        }
        None
    }

    fn solve_real(&self, target: &[f64]) -> Result<Vec<f64>> {
        if target.len() != self.partition.n() {
            return Err(Error::Precondition("chart point has the wrong dimension".into()));
        }
        'halving: for k in 0..=MAX_HALVINGS {
            let steps = 1usize << k;
            let mut q = self.anchor.clone();
            for s in 1..=steps {
                let t = s as f64 / steps as f64;
                let waypoint: Vec<f64> = self
                    .anchor_image
                    .iter()
                    .zip(target)
                    .map(|(a, b)| a + t * (b - a))
                    .collect();
                match self.newton(&q, &waypoint) {
                    Some(next) => q = next,
                    None => continue 'halving,
                }
            }
            return Ok(q);
        }
        Err(Error::ChartDegenerate(format!("Newton inversion failed to reach {target:?}")))
    }

    /// Inner chart point as a scalar, refined by chord iterations so that
    /// every jet coefficient is exact.
    fn preimage_scalar<S: Scalar>(&self, target: &[S]) -> Result<Vec<S>> {
        let real: Vec<f64> = target.iter().map(|v| v.value()).collect();
        let q0 = self.solve_real(&real)?;
        let jinv = self.inverse_jacobian(&q0)?;
        let n = q0.len();
        let mut q: Vec<S> = q0.iter().map(|&v| target[0].constant_like(v)).collect();
        for _ in 0..=MAX_ORDER {
            let (f, _) = self.forward(&q)?;
            let r: Vec<S> = f.iter().zip(target).map(|(a, b)| a.sub(b)).collect();
            q = (0..n)
                .map(|i| {
                    let mut acc = q[i].clone();
                    for k in 0..n {
                        acc = acc.sub(&r[k].scale(jinv[(i, k)]));
                    }
                    acc
                })
                .collect();
        }
        Ok(q)
    }

    fn image_lift<S: Scalar>(&self, target: &[S]) -> Result<Lift<S>> {
        let q = self.preimage_scalar(target)?;
        Ok(self.forward(&q)?.1)
    }
}

impl<M: LocalModel> LocalModel for AffineChartModel<M> {
    fn partition(&self) -> &Partition {
        &self.partition
    }

    fn value<S: Scalar>(&self, q: &[S]) -> Result<S> {
        let lift = self.image_lift(q)?;
        let mut z = lift.z;
        for &k in self.partition.j() {
            z = z.sub(&lift.p[k - 1].mul(&lift.x[k - 1]));
        }
        Ok(z)
    }

    fn gradient<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>> {
        let lift = self.image_lift(q)?;
        Ok((0..self.partition.n())
            .map(|s| {
                let k = self.partition.coordinate(s);
                if self.partition.is_x_slot(s) {
                    lift.p[k].clone()
                } else {
                    lift.x[k].neg()
                }
            })
            .collect())
    }

    fn is_transcendental(&self) -> bool {
        true
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{lift, quasi_hessian};
    use crate::gfexpr::GeneratingFunction;

    fn a2() -> GeneratingFunction {
        GeneratingFunction::parse("x1^3/3 - p2^2/2", 2, &[1]).unwrap()
    }

    fn sample_map() -> AffineLegendre {
        AffineLegendre::new(
            DMatrix::from_row_slice(2, 2, &[1.2, 0.3, -0.4, 0.9]),
            DVector::from_vec(vec![0.1, -0.2]),
            DVector::from_vec(vec![0.05, 0.3]),
            0.7,
        )
        .unwrap()
    }

    #[test]
    fn preserves_contact_form() {
        let map = sample_map();
        let g = a2();
        // dz − p·dx along a curve in L stays zero after the map
        let q = [0.3, -0.4];
        let vars = Jet::variables(&q, 1).unwrap();
        let image = map.apply(&lift_scalar(&g, &vars).unwrap());
        for k in 0..2 {
            let dz = image.z.derivative_along(&[k]).unwrap();
            let pdx: f64 = (0..2)
                .map(|i| image.p[i].value() * image.x[i].derivative_along(&[k]).unwrap())
                .sum();
            assert!((dz - pdx).abs() < 1e-13);
        }
    }

    #[test]
    fn chart_model_reproduces_image() {
        let g = a2();
        let model = AffineChartModel::new(g.clone(), sample_map(), g.partition().clone(), vec![0.0, 0.0]).unwrap();
        let q = [0.2, 0.35];
        let image = model.image(&q).unwrap();
        let expected = sample_map().apply(&lift(&g, &q).unwrap());
        let got = lift(&model, &image).unwrap();
        for k in 0..2 {
            assert!((got.x[k] - expected.x[k]).abs() < 1e-12);
            assert!((got.p[k] - expected.p[k]).abs() < 1e-12);
        }
        assert!((got.z - expected.z).abs() < 1e-12);
        let back = model.preimage(&image).unwrap();
        assert!((back[0] - q[0]).abs() < 1e-12 && (back[1] - q[1]).abs() < 1e-12);
    }

    #[test]
    fn chart_model_jets_are_consistent() {
        let g = a2();
        let model = AffineChartModel::new(g.clone(), sample_map(), g.partition().clone(), vec![0.0, 0.0]).unwrap();
        let q = model.image(&[0.1, 0.2]).unwrap();
        let jet = model.jet(&q, 3).unwrap();
        let grad = model.gradient(&Jet::variables(&q, 2).unwrap()).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                let from_value = jet.derivative_along(&[a, b]).unwrap();
                let from_grad = grad[a].derivative_along(&[b]).unwrap();
                assert!((from_value - from_grad).abs() < 1e-10, "{from_value} {from_grad}");
            }
        }
        let h = quasi_hessian(&model, &q).unwrap();
        assert!((h[(0, 1)] - h[(1, 0)]).abs() < 1e-12);
    }

    #[test]
    fn repartition_swaps_roles() {
        // Same submanifold, now with both x coordinates as chart.
        let g = GeneratingFunction::parse("x1^2/2 - p2^2/2 + x1*p2/4", 2, &[1]).unwrap();
        let id = AffineLegendre::linear(DMatrix::identity(2, 2)).unwrap();
        let all_x = Partition::new(2, &[1, 2]).unwrap();
        let model = AffineChartModel::new(g.clone(), id, all_x, vec![0.1, 0.1]).unwrap();
        let q = [0.3, -0.2];
        let l = lift(&g, &q).unwrap();
        let l2 = lift(&model, &l.x).unwrap();
        for k in 0..2 {
            assert!((l2.p[k] - l.p[k]).abs() < 1e-12);
        }
        assert!((l2.z - l.z).abs() < 1e-12);
    }
}
