//! Anything that behaves like a generating function on a chart.

use crate::error::Result;
use crate::gfexpr::{GeneratingFunction, Partition};
use crate::jets::Jet;
use crate::scalar::Scalar;

/// A local potential `g(x_I, p_J)` whose value and gradient can be
/// evaluated on any [`Scalar`].
///
/// The gradient is supplied separately so that lifts of order-`k` jets
/// need only order-`k` arithmetic.
pub trait LocalModel {
    fn partition(&self) -> &Partition;

    fn value<S: Scalar>(&self, q: &[S]) -> Result<S>;

    /// `∂g/∂(slot k)` in slot order.
    fn gradient<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>>;

    /// Whether the model leaves the polynomial ring; selects residual
    /// thresholds.
    fn is_transcendental(&self) -> bool {
        true
    }

    fn dim(&self) -> usize {
        self.partition().n()
    }

    fn value_real(&self, q: &[f64]) -> Result<f64> {
        self.value(q)
    }

    fn jet(&self, base: &[f64], order: usize) -> Result<Jet> {
        self.value(&Jet::variables(base, order)?)
    }
}

impl LocalModel for GeneratingFunction {
    fn partition(&self) -> &Partition {
        GeneratingFunction::partition(self)
    }

    fn value<S: Scalar>(&self, q: &[S]) -> Result<S> {
        self.eval(q)
    }

    fn gradient<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>> {
        self.eval_gradient(q)
    }

    fn is_transcendental(&self) -> bool {
        GeneratingFunction::is_transcendental(self)
    }
}

impl<M: LocalModel> LocalModel for &M {
    fn partition(&self) -> &Partition {
        (**self).partition()
    }

    fn value<S: Scalar>(&self, q: &[S]) -> Result<S> {
        (**self).value(q)
    }

    fn gradient<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>> {
        (**self).gradient(q)
    }

    fn is_transcendental(&self) -> bool {
        (**self).is_transcendental()
    }
}
