//! Constant-curvature model-space values: the comparison right-hand sides.

use nalgebra::{DMatrix, DVector};

use crate::error::MeasureError;
use crate::num::Real;

/// ct_K(r): √K·cot(√K r) for K > 0, 1/r for K = 0, √−K·coth(√−K r) for
/// K < 0. For K > 0 the domain is r ∈ (0, π/√K).
pub fn ct_k<T: Real>(k: T, r: T) -> Result<T, MeasureError> {
    if r <= T::zero() {
        return Err(MeasureError::ModelDomain {
            r: r.as_f64(),
            limit: 0.0,
        });
    }
    if k > T::zero() {
        let sk = k.sqrt();
        let limit = T::pi() / sk;
        if r >= limit {
            return Err(MeasureError::ModelDomain {
                r: r.as_f64(),
                limit: limit.as_f64(),
            });
        }
        Ok(sk * (sk * r).cos() / (sk * r).sin())
    } else if k == T::zero() {
        Ok(T::one() / r)
    } else {
        let sk = (-k).sqrt();
        let x = sk * r;
        Ok(sk * x.cosh() / x.sinh())
    }
}

/// Laplacian of the model-space distance at radius `r`: `(n−1)·ct_K(r)`.
pub fn model_laplacian<T: Real>(k: T, dim: usize, r: T) -> Result<T, MeasureError> {
    Ok(T::of((dim - 1) as f64) * ct_k(k, r)?)
}

/// Hessian of the model-space distance: `ct_K(r)·(g − dr⊗dr)` as a bilinear
/// form factory over (metric, lowered radial unit covector).
#[derive(Clone, Copy, Debug)]
pub struct ModelHessian<T> {
    pub ct: T,
}

pub fn model_hessian<T: Real>(k: T, _dim: usize, r: T) -> Result<ModelHessian<T>, MeasureError> {
    Ok(ModelHessian { ct: ct_k(k, r)? })
}

impl<T: Real> ModelHessian<T> {
    /// Matrix of the form at a point with metric `g` and unit radial
    /// covector `dr` (lowered gradient components).
    pub fn form(&self, g: &DMatrix<T>, dr: &DVector<T>) -> DMatrix<T> {
        (g - dr * dr.transpose()) * self.ct
    }

    /// Evaluate the form on a vector.
    pub fn apply(&self, g: &DMatrix<T>, dr: &DVector<T>, v: &DVector<T>) -> T {
        let gv = g * v;
        let radial = dr.dot(v);
        self.ct * (gv.dot(v) - radial * radial)
    }
}
