//! Sampled geodesics and Jacobi solutions.

use nalgebra::DVector;

use crate::manifold::{ChartPoint, ChartState, ManifoldModel};
use crate::num::Real;

/// One integration sample: time, chart index, position, velocity.
#[derive(Clone, Debug)]
pub struct PathSample<T> {
    pub t: T,
    pub chart: usize,
    pub x: DVector<T>,
    pub v: DVector<T>,
}

/// A unit-speed geodesic sampled at fixed steps.
#[derive(Clone, Debug)]
pub struct GeodesicPath<T> {
    /// Launch point in main-chart coordinates.
    pub initial_point: ChartPoint<T>,
    /// Launch angle in the orthonormal frame at the (lifted) launch point.
    pub initial_angle: T,
    pub step: T,
    pub samples: Vec<PathSample<T>>,
}

impl<T: Real> GeodesicPath<T> {
    pub fn t_end(&self) -> T {
        self.samples.last().map(|s| s.t).unwrap_or_else(T::zero)
    }

    pub fn last(&self) -> &PathSample<T> {
        self.samples.last().expect("path has samples")
    }

    /// Endpoint in main-chart coordinates.
    pub fn endpoint(&self, model: &ManifoldModel<T>) -> ChartPoint<T> {
        let s = self.last();
        model.to_main(&ChartState {
            chart: s.chart,
            x: s.x.clone(),
        })
    }

    /// Endpoint velocity expressed in the endpoint's own chart.
    pub fn endpoint_velocity(&self) -> (usize, DVector<T>, DVector<T>) {
        let s = self.last();
        (s.chart, s.x.clone(), s.v.clone())
    }

    /// Endpoint velocity transported to main-chart components.
    ///
    /// Only meaningful when the endpoint is a regular point of the main
    /// chart (the transition is ill-conditioned at its poles).
    pub fn endpoint_velocity_main(&self, model: &ManifoldModel<T>) -> DVector<T> {
        let s = self.last();
        if s.chart == 0 {
            return s.v.clone();
        }
        let (_, moved) = model.transition(
            &ChartState {
                chart: s.chart,
                x: s.x.clone(),
            },
            0,
            &[s.v.clone()],
        );
        moved.into_iter().next().expect("one vector")
    }

    /// Index of the last sample with `t <= t_query`.
    pub fn sample_index_at(&self, t_query: T) -> usize {
        if self.samples.len() < 2 {
            return 0;
        }
        let h = self.step;
        let idx = (t_query / h).as_f64().floor() as usize;
        idx.min(self.samples.len() - 1)
    }
}

/// Scalar view of a Jacobi field along a path: signed normal component
/// `j = g(J, N)`, its covariant rate `g(W, N)`, and the conserved tangential
/// pairing `g(γ̇, J)`.
#[derive(Clone, Debug)]
pub struct JacobiSample<T> {
    pub t: T,
    pub j: DVector<T>,
    pub w: DVector<T>,
    pub normal: DVector<T>,
    pub j_normal: T,
    pub w_normal: T,
    pub tangential: T,
}

/// A Jacobi field along a geodesic with `J(0) = 0`, `J'(0) ⊥ γ̇(0)`.
#[derive(Clone, Debug)]
pub struct JacobiSolution<T> {
    pub path: GeodesicPath<T>,
    pub samples: Vec<JacobiSample<T>>,
    /// First zero of the normal Jacobi component in `(0, t_end]`, bracketed
    /// by bisection to the requested width.
    pub first_zero: Option<T>,
}

impl<T: Real> JacobiSolution<T> {
    /// Max over samples of `|g(γ̇, J) − g(γ̇(0), J(0))|`; the Gauss-lemma
    /// pairing is conserved for exact solutions.
    pub fn gauss_lemma_drift(&self) -> T {
        let base = self.samples.first().map(|s| s.tangential).unwrap_or_else(T::zero);
        self.samples
            .iter()
            .map(|s| (s.tangential - base).abs())
            .fold(T::zero(), |a, b| a.max(b))
    }
}
