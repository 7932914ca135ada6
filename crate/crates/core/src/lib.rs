//! Chart-based computational Riemannian geometry on model surfaces.
//!
//! The crate computes geodesics, Jacobi fields and conjugate times, cut
//! times and cut-locus samples with side gradients and jump magnitudes, and
//! verifies by quadrature the measure decomposition of the distributional
//! Hessian and Laplacian of the distance function, the curvature comparison
//! inequalities, and the relations between the barrier, viscosity and
//! distributional readings of `Hess f ≤ A` / `Δf ≤ α`.
//!
//! Everything is generic over the scalar type through [`num::Real`]; the
//! shipped experiments run at `f64` (see the type aliases below).

pub mod error;
pub mod num;

pub mod cutlocus;
pub mod measure;
pub mod weaksense;
pub mod experiments;
pub mod geodesic;
pub mod manifold;

pub use num::Real;

/// Concrete `f64` aliases used by the experiments and the CLI.
pub type Point = manifold::ChartPoint<f64>;
pub type Tangent = manifold::TangentVec<f64>;
pub type Model = manifold::ManifoldModel<f64>;
