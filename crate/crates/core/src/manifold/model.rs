//! Manifold models: charts, transitions, curvature data, distance oracles.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use std::collections::BTreeMap;

use super::chart::{Axis, Chart, ChartGeometry, SurfaceChart, DELTA_POLE};
use super::point::{g_norm, g_normalize, g_orthogonal_2d, ChartPoint};
use crate::error::ManifoldError;
use crate::num::Real;

/// How curvature information is supplied.
#[derive(Clone, Debug)]
pub enum CurvatureKind<T> {
    Constant(T),
    /// Pointwise closed form exists but bounds are obtained by sampling.
    Sampled,
}

/// One smooth branch of the distance function: a geodesic representative
/// from the base point to the target, with the classical derivatives of its
/// length function at the target.
#[derive(Clone, Debug)]
pub struct DistanceBranch<T> {
    pub length: T,
    /// Unit initial velocity at the base point (main-chart components).
    pub dir_at_base: DVector<T>,
    /// Unit final velocity at the target = gradient vector of this branch.
    pub grad_at_target: DVector<T>,
    /// Lowered (0,2) Hessian of this branch's length function at the target.
    pub hess_at_target: DMatrix<T>,
}

#[derive(Clone, Debug)]
enum BranchOracle<T> {
    /// Flat chart with constant metric: geodesics are straight chart lines,
    /// candidates enumerated over lattice shifts of the target.
    FlatShifts { shifts: Vec<DVector<T>> },
    /// Unit round sphere: minor and major great-circle arcs.
    GreatCircle,
}

/// A chart-based model manifold.
#[derive(Clone, Debug)]
pub struct ManifoldModel<T> {
    pub name: String,
    dim: usize,
    charts: Vec<Chart<T>>,
    oracle: Option<BranchOracle<T>>,
    pub curvature_kind: CurvatureKind<T>,
    compact: bool,
    diameter_bound: Option<T>,
    pub params: BTreeMap<String, f64>,
}

/// A position expressed in a specific chart of the atlas.
#[derive(Clone, Debug)]
pub struct ChartState<T> {
    pub chart: usize,
    pub x: DVector<T>,
}

/// Axis-aligned box in main-chart coordinates.
#[derive(Clone, Debug)]
pub struct ChartBox<T> {
    pub lo: Vec<T>,
    pub hi: Vec<T>,
}

impl<T: Real> ManifoldModel<T> {
    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn is_compact(&self) -> bool {
        self.compact
    }

    /// Upper bound for the intrinsic diameter (compact models).
    pub fn diameter_bound(&self) -> Option<T> {
        self.diameter_bound
    }

    pub fn n_charts(&self) -> usize {
        self.charts.len()
    }

    pub fn chart(&self, idx: usize) -> &Chart<T> {
        &self.charts[idx]
    }

    pub fn main_chart(&self) -> &Chart<T> {
        &self.charts[0]
    }

    pub fn has_closed_form_distance(&self) -> bool {
        self.oracle.is_some()
    }

    /// Reduce a main-chart point into the fundamental domain.
    pub fn reduce(&self, p: &ChartPoint<T>) -> ChartPoint<T> {
        let mut x = p.coords.clone();
        self.charts[0].reduce(&mut x);
        ChartPoint::from_vector(x)
    }

    // ------------------------------------------------------------------
    // Spec surface: metric, Christoffel, volume density, curvature
    // ------------------------------------------------------------------

    pub fn metric_at(&self, p: &ChartPoint<T>) -> Result<DMatrix<T>, ManifoldError> {
        let p = self.reduce(p);
        self.charts[0].check_domain(&p.coords)?;
        Ok(self.charts[0].metric(&p.coords))
    }

    pub fn christoffel_at(&self, p: &ChartPoint<T>) -> Result<Vec<DMatrix<T>>, ManifoldError> {
        let p = self.reduce(p);
        self.charts[0].check_domain(&p.coords)?;
        let margin = self.charts[0].degeneracy_margin(&p.coords);
        let required = T::of(DELTA_POLE);
        if margin < required {
            return Err(ManifoldError::DegenerateCoordinates {
                margin: margin.as_f64(),
                required: DELTA_POLE,
            });
        }
        Ok(self.charts[0].christoffel(&p.coords))
    }

    /// Christoffel symbols from central finite differences of the metric.
    ///
    /// Independent of the closed-form route; the consistency of the two is a
    /// standing invariant of every model.
    pub fn christoffel_fd(
        &self,
        p: &ChartPoint<T>,
        step: T,
    ) -> Result<Vec<DMatrix<T>>, ManifoldError> {
        let p = self.reduce(p);
        let chart = &self.charts[0];
        chart.check_domain(&p.coords)?;
        let n = self.dim;
        let g = chart.metric(&p.coords);
        let ginv = g.clone().try_inverse().ok_or(ManifoldError::DegenerateCoordinates {
            margin: 0.0,
            required: DELTA_POLE,
        })?;
        // dg[m] = ∂_m g
        let mut dg = Vec::with_capacity(n);
        for m in 0..n {
            let mut xp = p.coords.clone();
            let mut xm = p.coords.clone();
            xp[m] += step;
            xm[m] -= step;
            dg.push((chart.metric(&xp) - chart.metric(&xm)) / (step + step));
        }
        let half = T::of(0.5);
        let mut gamma = vec![DMatrix::zeros(n, n); n];
        for k in 0..n {
            for i in 0..n {
                for j in 0..n {
                    let mut sum = T::zero();
                    for l in 0..n {
                        sum += ginv[(k, l)] * (dg[j][(l, i)] + dg[i][(l, j)] - dg[l][(i, j)]);
                    }
                    gamma[k][(i, j)] = half * sum;
                }
            }
        }
        Ok(gamma)
    }

    /// ∂Γ at a main-chart point (central differences of the closed form).
    pub fn christoffel_derivative_at(
        &self,
        p: &ChartPoint<T>,
    ) -> Result<Vec<Vec<DMatrix<T>>>, ManifoldError> {
        let p = self.reduce(p);
        self.charts[0].check_domain(&p.coords)?;
        Ok(self.charts[0].christoffel_derivative(&p.coords))
    }

    pub fn volume_density(&self, p: &ChartPoint<T>) -> Result<T, ManifoldError> {
        let g = self.metric_at(p)?;
        Ok(g.determinant().sqrt())
    }

    /// Gaussian curvature at a main-chart point (dimension 2).
    pub fn gauss_curvature(&self, p: &ChartPoint<T>) -> T {
        let p = self.reduce(p);
        self.charts[0].gauss_curvature(&p.coords)
    }

    pub fn gauss_curvature_chart(&self, chart: usize, x: &DVector<T>) -> T {
        self.charts[chart].gauss_curvature(x)
    }

    /// Curvature bounds over a region (whole sampling domain when `None`).
    ///
    /// Constant-curvature models return exact constants; otherwise the
    /// pointwise curvature is sampled on a 200×200 grid and the bracket is
    /// widened by 1% of its spread.
    pub fn curvature_bounds(&self, region: Option<&ChartBox<T>>) -> [T; 2] {
        match self.curvature_kind {
            CurvatureKind::Constant(k) => [k, k],
            CurvatureKind::Sampled => {
                let boxed = region.cloned().unwrap_or_else(|| self.sample_box());
                let n = 200;
                let mut kmin = T::of(f64::INFINITY);
                let mut kmax = T::of(f64::NEG_INFINITY);
                for i in 0..n {
                    for j in 0..n {
                        let fi = T::of((i as f64 + 0.5) / n as f64);
                        let fj = T::of((j as f64 + 0.5) / n as f64);
                        let x = ChartPoint::new(vec![
                            boxed.lo[0] + (boxed.hi[0] - boxed.lo[0]) * fi,
                            boxed.lo[1] + (boxed.hi[1] - boxed.lo[1]) * fj,
                        ]);
                        let k = self.gauss_curvature(&x);
                        kmin = kmin.min(k);
                        kmax = kmax.max(k);
                    }
                }
                let widen = T::of(0.01) * (kmax - kmin);
                [kmin - widen, kmax + widen]
            }
        }
    }

    // ------------------------------------------------------------------
    // Atlas: chart selection and transitions
    // ------------------------------------------------------------------

    /// Embed a chart position into R³ (surface models only).
    pub fn to_embedding(&self, chart: usize, x: &DVector<T>) -> Option<Vector3<T>> {
        match &self.charts[chart].geometry {
            ChartGeometry::Flat { .. } => None,
            ChartGeometry::Surface(s) => Some(s.embed(x)),
        }
    }

    fn surface(&self, chart: usize) -> Option<&SurfaceChart<T>> {
        match &self.charts[chart].geometry {
            ChartGeometry::Flat { .. } => None,
            ChartGeometry::Surface(s) => Some(s),
        }
    }

    pub fn margin(&self, state: &ChartState<T>) -> T {
        self.charts[state.chart].degeneracy_margin(&state.x)
    }

    /// Lift a main-chart point to the chart where it is farthest from any
    /// coordinate degeneracy.
    pub fn lift(&self, p: &ChartPoint<T>) -> ChartState<T> {
        let p = self.reduce(p);
        if self.charts.len() == 1 {
            return ChartState {
                chart: 0,
                x: p.coords,
            };
        }
        let emb = self
            .to_embedding(0, &p.coords)
            .expect("multi-chart models are embedded");
        let mut best = ChartState {
            chart: 0,
            x: p.coords.clone(),
        };
        let mut best_margin = self.charts[0].degeneracy_margin(&p.coords);
        for idx in 1..self.charts.len() {
            let s = self.surface(idx).expect("surface chart");
            let x = s.unembed(&emb);
            let margin = self.charts[idx].degeneracy_margin(&x);
            if margin > best_margin {
                best_margin = margin;
                best = ChartState { chart: idx, x };
            }
        }
        best
    }

    /// Express a chart state in main-chart coordinates.
    pub fn to_main(&self, state: &ChartState<T>) -> ChartPoint<T> {
        if state.chart == 0 {
            let mut x = state.x.clone();
            self.charts[0].reduce(&mut x);
            return ChartPoint::from_vector(x);
        }
        let emb = self
            .to_embedding(state.chart, &state.x)
            .expect("non-main charts are embedded");
        let s = self.surface(0).expect("surface chart");
        ChartPoint::from_vector(s.unembed(&emb))
    }

    /// Move a position and a set of tangent vectors from one chart to another.
    ///
    /// Velocities transform through the embedding: `v_to = g⁻¹ Jᵀ (J_from v)`.
    pub fn transition(
        &self,
        from: &ChartState<T>,
        to_chart: usize,
        vectors: &[DVector<T>],
    ) -> (ChartState<T>, Vec<DVector<T>>) {
        if from.chart == to_chart {
            return (from.clone(), vectors.to_vec());
        }
        let s_from = self.surface(from.chart).expect("surface chart");
        let s_to = self.surface(to_chart).expect("surface chart");
        let emb = s_from.embed(&from.x);
        let x_to = s_to.unembed(&emb);
        let j_from = s_from.embed_jacobian(&from.x);
        let j_to = s_to.embed_jacobian(&x_to);
        let g_to = s_to.metric(&x_to);
        let g_inv = g_to.try_inverse().expect("metric invertible");
        let moved = vectors
            .iter()
            .map(|v| {
                let v_emb = j_from[0] * v[0] + j_from[1] * v[1];
                let rhs = DVector::from_vec(vec![j_to[0].dot(&v_emb), j_to[1].dot(&v_emb)]);
                &g_inv * rhs
            })
            .collect();
        (
            ChartState {
                chart: to_chart,
                x: x_to,
            },
            moved,
        )
    }

    /// Pick the chart with the largest degeneracy margin for this state.
    pub fn best_chart(&self, state: &ChartState<T>) -> usize {
        if self.charts.len() == 1 {
            return 0;
        }
        let emb = self
            .to_embedding(state.chart, &state.x)
            .expect("multi-chart models are embedded");
        let mut best = state.chart;
        let mut best_margin = self.margin(state);
        for idx in 0..self.charts.len() {
            if idx == state.chart {
                continue;
            }
            let s = self.surface(idx).expect("surface chart");
            let x = s.unembed(&emb);
            let margin = self.charts[idx].degeneracy_margin(&x);
            if margin > best_margin {
                best_margin = margin;
                best = idx;
            }
        }
        best
    }

    /// g-orthonormal frame at a chart state, built from the chart axes.
    pub fn frame_at(&self, state: &ChartState<T>) -> [DVector<T>; 2] {
        let g = self.charts[state.chart].metric(&state.x);
        let e0 = DVector::from_vec(vec![T::one(), T::zero()]);
        let e1 = g_normalize(&g, &e0).expect("axis vector nonzero");
        let e2 = g_orthogonal_2d(&g, &e1);
        [e1, e2]
    }

    /// Unit tangent at angle `alpha` in the frame at `state`.
    pub fn direction(&self, state: &ChartState<T>, alpha: T) -> DVector<T> {
        let [e1, e2] = self.frame_at(state);
        e1 * alpha.cos() + e2 * alpha.sin()
    }

    // ------------------------------------------------------------------
    // Distances
    // ------------------------------------------------------------------

    /// Chart distance between main-chart points, respecting periodic wrap.
    pub fn chart_distance(&self, p: &ChartPoint<T>, q: &ChartPoint<T>) -> T {
        let p = self.reduce(p);
        let q = self.reduce(q);
        let mut sum = T::zero();
        for (i, axis) in self.charts[0].axes.iter().enumerate() {
            let mut d = (p.coords[i] - q.coords[i]).abs();
            if let Some(period) = axis.period() {
                d = d.min(period - d);
            }
            sum += d * d;
        }
        sum.sqrt()
    }

    /// Closed-form distance, when the model carries one.
    pub fn closed_form_distance(&self, p: &ChartPoint<T>, q: &ChartPoint<T>) -> Option<T> {
        self.distance_branches(p, q)
            .map(|b| b.first().map(|br| br.length).unwrap_or_else(T::zero))
    }

    /// All closed-form geodesic branches from `p` to `q`, sorted by length.
    ///
    /// `None` for models without a closed-form oracle (the ellipsoid).
    pub fn distance_branches(
        &self,
        p: &ChartPoint<T>,
        q: &ChartPoint<T>,
    ) -> Option<Vec<DistanceBranch<T>>> {
        let oracle = self.oracle.as_ref()?;
        let p = self.reduce(p);
        let q = self.reduce(q);
        let mut branches = match oracle {
            BranchOracle::FlatShifts { shifts } => {
                let g = self.charts[0].metric(&p.coords);
                let delta = &q.coords - &p.coords;
                let mut out = Vec::with_capacity(shifts.len());
                for s in shifts {
                    let d = &delta + s;
                    let len = g_norm(&g, &d);
                    if len <= T::of(1e-300) {
                        out.push(DistanceBranch {
                            length: T::zero(),
                            dir_at_base: DVector::zeros(self.dim),
                            grad_at_target: DVector::zeros(self.dim),
                            hess_at_target: DMatrix::zeros(self.dim, self.dim),
                        });
                        continue;
                    }
                    let v = &d / len;
                    let w = &g * &v; // lowered gradient covector
                    let hess = (&g - &w * w.transpose()) / len;
                    out.push(DistanceBranch {
                        length: len,
                        dir_at_base: v.clone(),
                        grad_at_target: v,
                        hess_at_target: hess,
                    });
                }
                out
            }
            BranchOracle::GreatCircle => {
                let s = self.surface(0).expect("sphere is embedded");
                let pe = s.embed(&p.coords);
                let qe = s.embed(&q.coords);
                let c = pe.dot(&qe);
                // atan2 form: exact zero at p = q, well conditioned near the
                // antipode, and exactly symmetric in (p, q).
                let cross = pe.cross(&qe).norm();
                let r = cross.atan2(c);
                let two_pi = T::two_pi();
                let sin_r = cross.max(T::of(1e-150));
                // Embedded tangents of the connecting great circle.
                let away_q = (qe * c - pe) / sin_r; // at q, pointing away from p
                let away_p = (qe - pe * c) / sin_r; // at p, pointing away from p
                let to_chart = |x: &DVector<T>, v: &Vector3<T>| {
                    let j = s.embed_jacobian(x);
                    let g = s.metric(x);
                    let ginv = g.try_inverse().expect("metric invertible");
                    let rhs = DVector::from_vec(vec![j[0].dot(v), j[1].dot(v)]);
                    &ginv * rhs
                };
                let g_q = s.metric(&q.coords);
                let make = |len: T, dir_p: DVector<T>, grad_q: DVector<T>| {
                    let w = &g_q * &grad_q;
                    let ct = len.cos() / len.sin().max(T::of(1e-150)).copysign(len.sin());
                    let hess = (&g_q - &w * w.transpose()) * ct;
                    DistanceBranch {
                        length: len,
                        dir_at_base: dir_p,
                        grad_at_target: grad_q,
                        hess_at_target: hess,
                    }
                };
                vec![
                    make(
                        r,
                        to_chart(&p.coords, &away_p),
                        to_chart(&q.coords, &away_q),
                    ),
                    make(
                        two_pi - r,
                        to_chart(&p.coords, &-away_p),
                        to_chart(&q.coords, &-away_q),
                    ),
                ]
            }
        };
        branches.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
        Some(branches)
    }

    // ------------------------------------------------------------------
    // Sampling helpers
    // ------------------------------------------------------------------

    /// Box over which random points and curvature grids are drawn: the chart
    /// domain with pole bands removed on degenerate axes.
    pub fn sample_box(&self) -> ChartBox<T> {
        let chart = &self.charts[0];
        let band = T::of(DELTA_POLE);
        let mut lo = Vec::new();
        let mut hi = Vec::new();
        match chart.geometry {
            ChartGeometry::Flat { .. } => {
                for axis in &chart.axes {
                    lo.push(axis.lo);
                    hi.push(axis.hi);
                }
            }
            ChartGeometry::Surface(_) => {
                lo.push(chart.axes[0].lo + band);
                hi.push(chart.axes[0].hi - band);
                lo.push(chart.axes[1].lo);
                hi.push(chart.axes[1].hi);
            }
        }
        ChartBox { lo, hi }
    }
}

// ----------------------------------------------------------------------
// Shipped models
// ----------------------------------------------------------------------

fn flat_axis<T: Real>(lo: f64, hi: f64, periodic: bool) -> Axis<T> {
    Axis {
        lo: T::of(lo),
        hi: T::of(hi),
        periodic,
    }
}

fn lattice_shifts<T: Real>(periods: &[Option<T>]) -> Vec<DVector<T>> {
    let dim = periods.len();
    let mut shifts = vec![DVector::zeros(dim)];
    for (axis, period) in periods.iter().enumerate() {
        if let Some(p) = *period {
            let mut next = Vec::new();
            for s in &shifts {
                for mult in [-1i32, 0, 1] {
                    let mut v = s.clone();
                    v[axis] += T::of(mult as f64) * p;
                    next.push(v);
                }
            }
            shifts = next;
        }
    }
    shifts
}

/// Flat plane R², truncated to a large box in the chart.
pub fn plane<T: Real>() -> ManifoldModel<T> {
    let axes = vec![flat_axis(-50.0, 50.0, false), flat_axis(-50.0, 50.0, false)];
    let scale = DVector::from_vec(vec![T::one(), T::one()]);
    ManifoldModel {
        name: "plane".into(),
        dim: 2,
        charts: vec![Chart {
            axes,
            geometry: ChartGeometry::Flat { scale },
        }],
        oracle: Some(BranchOracle::FlatShifts {
            shifts: vec![DVector::zeros(2)],
        }),
        curvature_kind: CurvatureKind::Constant(T::zero()),
        compact: false,
        diameter_bound: None,
        params: BTreeMap::new(),
    }
}

/// Flat square torus R²/Z².
pub fn torus<T: Real>() -> ManifoldModel<T> {
    let axes = vec![flat_axis(0.0, 1.0, true), flat_axis(0.0, 1.0, true)];
    let scale = DVector::from_vec(vec![T::one(), T::one()]);
    let shifts = lattice_shifts(&[Some(T::one()), Some(T::one())]);
    ManifoldModel {
        name: "torus".into(),
        dim: 2,
        charts: vec![Chart {
            axes,
            geometry: ChartGeometry::Flat { scale },
        }],
        oracle: Some(BranchOracle::FlatShifts { shifts }),
        curvature_kind: CurvatureKind::Constant(T::zero()),
        compact: true,
        // Half diagonal of the unit square.
        diameter_bound: Some(T::of(std::f64::consts::SQRT_2 / 2.0 + 1e-9)),
        params: BTreeMap::new(),
    }
}

/// Flat cylinder S¹×R of radius 1: chart (θ, z), metric dθ² + dz².
pub fn cylinder<T: Real>() -> ManifoldModel<T> {
    let two_pi = std::f64::consts::TAU;
    let axes = vec![flat_axis(0.0, two_pi, true), flat_axis(-50.0, 50.0, false)];
    let scale = DVector::from_vec(vec![T::one(), T::one()]);
    let shifts = lattice_shifts(&[Some(T::of(two_pi)), None]);
    ManifoldModel {
        name: "cylinder".into(),
        dim: 2,
        charts: vec![Chart {
            axes,
            geometry: ChartGeometry::Flat { scale },
        }],
        oracle: Some(BranchOracle::FlatShifts { shifts }),
        curvature_kind: CurvatureKind::Constant(T::zero()),
        compact: false,
        diameter_bound: None,
        params: BTreeMap::new(),
    }
}

fn surface_axes<T: Real>() -> Vec<Axis<T>> {
    vec![
        Axis {
            lo: T::zero(),
            hi: T::pi(),
            periodic: false,
        },
        Axis {
            lo: T::zero(),
            hi: T::two_pi(),
            periodic: true,
        },
    ]
}

fn surface_charts<T: Real>(equatorial: T, polar: T) -> Vec<Chart<T>> {
    let std_chart = Chart {
        axes: surface_axes(),
        geometry: ChartGeometry::Surface(SurfaceChart {
            equatorial,
            polar,
            rotation: Matrix3::identity(),
        }),
    };
    let rotated = Chart {
        axes: surface_axes(),
        geometry: ChartGeometry::Surface(SurfaceChart {
            equatorial,
            polar,
            rotation: super::chart::pole_swap_rotation(),
        }),
    };
    vec![std_chart, rotated]
}

/// Round unit sphere S² in spherical coordinates, two-chart atlas.
pub fn sphere<T: Real>() -> ManifoldModel<T> {
    ManifoldModel {
        name: "sphere".into(),
        dim: 2,
        charts: surface_charts(T::one(), T::one()),
        oracle: Some(BranchOracle::GreatCircle),
        curvature_kind: CurvatureKind::Constant(T::one()),
        compact: true,
        diameter_bound: Some(T::pi() + T::of(1e-9)),
        params: BTreeMap::new(),
    }
}

/// Ellipsoid of revolution with semi-axes (a, a, c); defaults a=1, c=2.
pub fn ellipsoid<T: Real>(a: f64, c: f64) -> Result<ManifoldModel<T>, ManifoldError> {
    if a <= 0.0 || c <= 0.0 {
        return Err(ManifoldError::BadParameter(format!(
            "ellipsoid semi-axes must be positive (a={a}, c={c})"
        )));
    }
    // Pole-to-pole meridian arc: half the circumference of the (a, c)
    // meridian ellipse, Ramanujan estimate with 10% headroom.
    let h = ((a - c) / (a + c)).powi(2);
    let circumference =
        std::f64::consts::PI * (a + c) * (1.0 + 3.0 * h / (10.0 + (4.0 - 3.0 * h).sqrt()));
    let diameter = 0.55 * circumference;
    let mut params = BTreeMap::new();
    params.insert("a".into(), a);
    params.insert("b".into(), a);
    params.insert("c".into(), c);
    Ok(ManifoldModel {
        name: "ellipsoid".into(),
        dim: 2,
        charts: surface_charts(T::of(a), T::of(c)),
        oracle: None,
        curvature_kind: CurvatureKind::Sampled,
        compact: true,
        diameter_bound: Some(T::of(diameter)),
        params,
    })
}
