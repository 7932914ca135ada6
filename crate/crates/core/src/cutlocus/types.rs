//! Records produced by the cut-locus engine.

use nalgebra::DVector;
use serde::Serialize;

use crate::manifold::ChartPoint;

/// Why a geodesic stops being minimal at its cut time.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum CutClass {
    /// Two or more minimal geodesics arrive (singular set of the distance).
    Sing,
    /// The exponential differential degenerates (first conjugate point).
    Conj,
    /// Both conditions hold.
    Both,
    /// No finite cut time in the probed window.
    None,
}

/// Per-direction cut record.
#[derive(Clone, Debug, Serialize)]
pub struct CutRecord<T> {
    /// Launch angle in the orthonormal frame at the apex.
    pub alpha: T,
    /// Cut time (`None` means +∞ within the probed window).
    pub sigma: Option<T>,
    /// First conjugate time, when one exists in the probed window.
    pub conj: Option<T>,
    pub class: CutClass,
    /// Number of distinct minimal geodesics at the cutpoint (capped at the
    /// multistart limit when a continuum is detected).
    pub geodesic_count: usize,
    /// Set when the minimizer count hit the cap (conjugate-degenerate).
    pub degenerate: bool,
}

/// A sampled cut-locus point with its jump data and quadrature weight.
#[derive(Clone, Debug, Serialize)]
pub struct CutlocusSample<T: nalgebra::Scalar> {
    pub record: CutRecord<T>,
    /// The cutpoint in main-chart coordinates.
    pub q: ChartPoint<T>,
    /// Unit normal at `q`, oriented so that `g(nu, grad_plus) > 0`.
    pub nu: DVector<T>,
    /// Side gradients: unit final velocities of the two minimal geodesics.
    pub grad_plus: DVector<T>,
    pub grad_minus: DVector<T>,
    /// `|∇d⁺ − ∇d⁻|_g ∈ (0, 2]`.
    pub jump: T,
    /// H^{n-1} quadrature weight: arclength element of the direction
    /// parametrization divided by multiplicity; zero for flagged samples.
    pub weight: T,
    /// Unit vector at `q` g-orthogonal to `nu`.
    pub tangent: DVector<T>,
    pub multiplicity: usize,
    /// Excluded from singular quadrature (multiplicity > 2, conjugate or
    /// degenerate cutpoints).
    pub flagged: bool,
}

/// Extremal covectors of the superdifferential of the distance at a point.
#[derive(Clone, Debug)]
pub struct SuperdifferentialSet<T: nalgebra::Scalar> {
    pub q: ChartPoint<T>,
    /// Unit covectors (lowered final velocities of minimal geodesics).
    pub extremals: Vec<DVector<T>>,
    pub degenerate: bool,
}

/// One verified connecting geodesic from the multistart search.
#[derive(Clone, Debug)]
pub struct GeodesicHit<T> {
    pub alpha: T,
    pub length: T,
    /// Final gap between the geodesic endpoint and the target.
    pub miss: T,
}
