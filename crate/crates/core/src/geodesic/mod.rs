//! Geodesic engine: exponential map and Jacobi fields by fixed-step RK4,
//! with conjugate-time detection via bisected Jacobi zeros.

pub mod integrator;
pub mod ops;
pub mod path;

pub use integrator::{GeodesicState, Integrator, Workspace};
pub use ops::{
    conjugate_time, endpoint_error_estimate, eval_on_path, gauss_lemma_drift, jacobi_along,
    shoot, shoot_angle, CONJUGATE_BRACKET, DEFAULT_STEP,
};
pub use path::{GeodesicPath, JacobiSample, JacobiSolution, PathSample};
