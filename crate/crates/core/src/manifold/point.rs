//! Points and tangent vectors in chart coordinates.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::num::Real;

/// A point of the manifold, held as main-chart coordinates.
///
/// Coordinates on periodic axes are reduced into the fundamental interval by
/// the owning model before use.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize + nalgebra::Scalar",
    deserialize = "T: serde::Deserialize<'de> + nalgebra::Scalar"
))]
pub struct ChartPoint<T> {
    pub coords: DVector<T>,
}

impl<T: Real> ChartPoint<T> {
    pub fn new(coords: impl Into<Vec<T>>) -> Self {
        Self {
            coords: DVector::from_vec(coords.into()),
        }
    }

    pub fn from_vector(coords: DVector<T>) -> Self {
        Self { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }
}

/// A tangent vector attached to a base point, in the same chart as the base.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(bound(
    serialize = "T: Serialize + nalgebra::Scalar",
    deserialize = "T: serde::Deserialize<'de> + nalgebra::Scalar"
))]
pub struct TangentVec<T> {
    pub base: ChartPoint<T>,
    pub components: DVector<T>,
}

impl<T: Real> TangentVec<T> {
    pub fn new(base: ChartPoint<T>, components: impl Into<Vec<T>>) -> Self {
        Self {
            base,
            components: DVector::from_vec(components.into()),
        }
    }

    /// Squared g-norm with respect to the supplied metric matrix.
    pub fn norm_sq(&self, metric: &DMatrix<T>) -> T {
        g_inner(metric, &self.components, &self.components)
    }

    pub fn norm(&self, metric: &DMatrix<T>) -> T {
        self.norm_sq(metric).sqrt()
    }
}

/// Inner product `g(u, v)` of coordinate vectors under the metric matrix.
#[inline]
pub fn g_inner<T: Real>(metric: &DMatrix<T>, u: &DVector<T>, v: &DVector<T>) -> T {
    (metric * v).dot(u)
}

/// g-norm of a coordinate vector.
#[inline]
pub fn g_norm<T: Real>(metric: &DMatrix<T>, u: &DVector<T>) -> T {
    g_inner(metric, u, u).sqrt()
}

/// Scale `u` to unit g-norm. Returns `None` for (numerically) zero vectors.
pub fn g_normalize<T: Real>(metric: &DMatrix<T>, u: &DVector<T>) -> Option<DVector<T>> {
    let n = g_norm(metric, u);
    if n <= T::zero() {
        return None;
    }
    Some(u / n)
}

/// The unit vector g-orthogonal to `u` (dimension 2), oriented so that the
/// ordered pair (u, n) is positively oriented in the chart.
pub fn g_orthogonal_2d<T: Real>(metric: &DMatrix<T>, u: &DVector<T>) -> DVector<T> {
    debug_assert_eq!(u.len(), 2);
    // Rotate the covector g·u by 90 degrees and raise the index: the result
    // is orthogonal to u for any SPD metric.
    let w = metric * u;
    let raw = DVector::from_vec(vec![-w[1], w[0]]);
    let det = (metric[(0, 0)] * metric[(1, 1)] - metric[(0, 1)] * metric[(1, 0)]).sqrt();
    raw / det
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn orthogonal_complement_is_unit_and_orthogonal() {
        let g = DMatrix::<f64>::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 0.5]);
        let u = DVector::from_vec(vec![0.7, -0.4]);
        let u = g_normalize(&g, &u).unwrap();
        let n = g_orthogonal_2d(&g, &u);
        assert!(g_inner(&g, &u, &n).abs() < 1e-14);
        assert!((g_norm(&g, &n) - 1.0).abs() < 1e-14);
    }
}
