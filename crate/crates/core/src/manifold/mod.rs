//! Charted model manifolds: metrics, Christoffel symbols, volume densities,
//! curvature bounds, and closed-form distance oracles.

pub mod chart;
pub mod model;
pub mod point;
pub mod registry;

pub use chart::{Axis, Chart, ChartGeometry, SurfaceChart, DELTA_POLE};
pub use model::{
    cylinder, ellipsoid, plane, sphere, torus, ChartBox, ChartState, CurvatureKind,
    DistanceBranch, ManifoldModel,
};
pub use point::{g_inner, g_norm, g_normalize, g_orthogonal_2d, ChartPoint, TangentVec};
pub use registry::{ModelSpec, MODEL_NAMES};
