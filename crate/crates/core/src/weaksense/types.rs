//! Verdicts and problem descriptions for the weak-sense checkers.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use crate::manifold::ManifoldModel;
use crate::num::Real;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Verdict {
    Holds,
    Fails,
    Inconclusive,
}

/// Verdicts of the three weak senses for one corpus row.
#[derive(Clone, Debug, Serialize)]
pub struct SenseVerdict {
    pub barrier: Verdict,
    pub viscosity: Verdict,
    pub distributional: Verdict,
    pub witnesses: Vec<String>,
}

/// The comparison datum: which inequality is being checked.
#[derive(Clone)]
pub enum BoundData<T: nalgebra::Scalar> {
    /// `Δf ≤ α` (in one dimension, `f'' ≤ α`).
    Laplacian(Arc<dyn Fn(&DVector<T>) -> T + Send + Sync>),
    /// `Hess f ≤ A` as (0,2)-tensor fields.
    Hessian(Arc<dyn Fn(&DVector<T>) -> DMatrix<T> + Send + Sync>),
    /// `W^iW^j Hess_{ij} f ≤ c` along a fixed vector (the scalar reduction).
    Directional(
        Arc<dyn Fn(&DVector<T>) -> DVector<T> + Send + Sync>,
        Arc<dyn Fn(&DVector<T>) -> T + Send + Sync>,
    ),
}

/// A continuous function on a grid with an optional analytic evaluator.
#[derive(Clone)]
pub struct SampledFunction<T: nalgebra::Scalar> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
    pub step: T,
    /// Row-major grid values (unused when `analytic` is present).
    pub values: Vec<T>,
    pub analytic: Option<Arc<dyn Fn(&DVector<T>) -> T + Send + Sync>>,
}

impl<T: Real> SampledFunction<T> {
    pub fn analytic(
        lo: Vec<T>,
        hi: Vec<T>,
        f: Arc<dyn Fn(&DVector<T>) -> T + Send + Sync>,
    ) -> Self {
        Self {
            lo,
            hi,
            step: T::of(1e-3),
            values: Vec::new(),
            analytic: Some(f),
        }
    }

    /// Tabulate a closure on a uniform grid (no analytic fallback); used to
    /// probe verdict stability under grid refinement.
    pub fn tabulate(lo: Vec<T>, hi: Vec<T>, step: T, f: &dyn Fn(&DVector<T>) -> T) -> Self {
        let dim = lo.len();
        let counts: Vec<usize> = (0..dim)
            .map(|i| ((hi[i] - lo[i]) / step).as_f64().round() as usize + 1)
            .collect();
        let mut values = Vec::new();
        match dim {
            1 => {
                for i in 0..counts[0] {
                    values.push(f(&DVector::from_vec(vec![lo[0] + step * T::of(i as f64)])));
                }
            }
            2 => {
                for i in 0..counts[0] {
                    for j in 0..counts[1] {
                        values.push(f(&DVector::from_vec(vec![
                            lo[0] + step * T::of(i as f64),
                            lo[1] + step * T::of(j as f64),
                        ])));
                    }
                }
            }
            _ => panic!("sampled functions are 1- or 2-dimensional"),
        }
        Self {
            lo,
            hi,
            step,
            values,
            analytic: None,
        }
    }

    pub fn dim(&self) -> usize {
        self.lo.len()
    }

    /// Smallest feature scale the evaluator can resolve: essentially exact
    /// for analytic functions, a few grid cells otherwise.
    pub fn resolution(&self) -> T {
        if self.analytic.is_some() {
            T::of(1e-9)
        } else {
            self.step * T::of(4.0)
        }
    }

    pub fn eval(&self, x: &DVector<T>) -> T {
        if let Some(f) = &self.analytic {
            return f(x);
        }
        // Multilinear interpolation on the grid.
        let dim = self.dim();
        let count = |i: usize| ((self.hi[i] - self.lo[i]) / self.step).as_f64().round() as usize + 1;
        let locate = |i: usize| -> (usize, T) {
            let t = (x[i] - self.lo[i]) / self.step;
            let idx = t.floor().as_f64().max(0.0) as usize;
            let idx = idx.min(count(i) - 2);
            (idx, t - T::of(idx as f64))
        };
        match dim {
            1 => {
                let (i, fr) = locate(0);
                self.values[i] * (T::one() - fr) + self.values[i + 1] * fr
            }
            2 => {
                let (i, fi) = locate(0);
                let (j, fj) = locate(1);
                let ncols = count(1);
                let at = |a: usize, b: usize| self.values[a * ncols + b];
                let top = at(i, j) * (T::one() - fj) + at(i, j + 1) * fj;
                let bot = at(i + 1, j) * (T::one() - fj) + at(i + 1, j + 1) * fj;
                top * (T::one() - fi) + bot * fi
            }
            _ => unreachable!(),
        }
    }
}

/// A pointwise check instance: the function, the bound, and the chart
/// context supplying Christoffel corrections (Euclidean when absent).
pub struct CheckProblem<'m, T: nalgebra::Scalar> {
    pub f: SampledFunction<T>,
    pub bound: BoundData<T>,
    pub model: Option<&'m ManifoldModel<T>>,
}

/// One second-order jet: `h(y) = f(x) + p·(y−x) + ½ (y−x)ᵀ Q (y−x)`.
#[derive(Clone, Debug)]
pub struct QuadraticJet<T: nalgebra::Scalar> {
    pub base: DVector<T>,
    pub gradient: DVector<T>,
    pub quadratic: DMatrix<T>,
}
