//! Error types shared across the engines.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum ManifoldError {
    #[error("coordinate {value} on axis {axis} outside domain [{lo}, {hi}]")]
    OutsideDomain {
        axis: usize,
        value: f64,
        lo: f64,
        hi: f64,
    },
    #[error("point too close to a coordinate degeneracy (margin {margin:.3e} < {required:.3e})")]
    DegenerateCoordinates { margin: f64, required: f64 },
    #[error("unknown model `{0}`")]
    UnknownModel(String),
    #[error("bad model parameter: {0}")]
    BadParameter(String),
}

#[derive(Debug, Error)]
pub enum GeodesicError {
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("geodesic left the chart atlas at t = {t}: {detail}")]
    ChartExit { t: f64, detail: String },
    #[error("integration failed at t = {t}: {detail}")]
    Integration { t: f64, detail: String },
}

#[derive(Debug, Error)]
pub enum CutError {
    #[error(transparent)]
    Geodesic(#[from] GeodesicError),
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error("no connecting geodesic found within the iteration budget ({detail})")]
    NoConvergence { detail: String },
    #[error("cut predicate inconsistent over [{lo}, {hi}]: {trace}")]
    InconsistentPredicate { lo: f64, hi: f64, trace: String },
    #[error("cut time requested on a direction with no finite cut time")]
    NoFiniteCutTime,
    #[error(
        "cutpoint at t = {sigma} satisfies neither dichotomy condition \
         (geodesic count {count}, conjugate gap {conj_gap:?}); numerical failure"
    )]
    StructureViolation {
        sigma: f64,
        count: usize,
        conj_gap: Option<f64>,
    },
}

#[derive(Debug, Error)]
pub enum MeasureError {
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
    #[error(transparent)]
    Cut(#[from] CutError),
    #[error("test field support violates the apex exclusion ball (min distance {min_dist:.4} < {required:.4})")]
    SupportTooClose { min_dist: f64, required: f64 },
    #[error("test field support leaves the chart box")]
    SupportOutsideChart,
    #[error("cut sample coverage insufficient: largest gap {gap:.4e} exceeds step {step:.4e}")]
    CutCoverage { gap: f64, step: f64 },
    #[error("comparison value out of the model-space domain: r = {r:.6}, limit {limit:.6}")]
    ModelDomain { r: f64, limit: f64 },
    #[error("pairing residual {residual:.3e} exceeds tolerance {tol:.3e}")]
    ToleranceExceeded { residual: f64, tol: f64 },
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("config field `{path}`: {detail}")]
    Invalid { path: String, detail: String },
    #[error(transparent)]
    Manifold(#[from] ManifoldError),
}
