//! Fixed-step classical RK4 integration of the geodesic and Jacobi systems
//! in chart coordinates, with automatic chart transitions near degeneracies.

use nalgebra::{DVector, Matrix2, Vector2, Vector3};

use crate::error::GeodesicError;
use crate::manifold::chart::ChartGeometry;
use crate::manifold::{ChartState, ManifoldModel};
use crate::num::Real;

/// Margin below which a chart transition is attempted.
const SWITCH_MARGIN: f64 = 0.25;
/// Required improvement before actually switching (hysteresis).
const SWITCH_GAIN: f64 = 0.1;

/// State blocks: position, velocity, and optionally the Jacobi field `J`,
/// its covariant derivative `W`, and a parallel unit normal `N`.
#[derive(Clone, Debug)]
pub struct GeodesicState<T> {
    pub chart: usize,
    /// Flat layout `[x, v]` or `[x, v, J, W, N]`, blocks of length `dim`.
    pub y: DVector<T>,
    pub with_jacobi: bool,
}

impl<T: Real> GeodesicState<T> {
    pub fn new(chart: usize, x: &DVector<T>, v: &DVector<T>) -> Self {
        let n = x.len();
        let mut y = DVector::zeros(2 * n);
        y.rows_mut(0, n).copy_from(x);
        y.rows_mut(n, n).copy_from(v);
        Self {
            chart,
            y,
            with_jacobi: false,
        }
    }

    /// Attach Jacobi data `J(0) = 0`, `W(0) = N(0) = normal`.
    pub fn with_jacobi(chart: usize, x: &DVector<T>, v: &DVector<T>, normal: &DVector<T>) -> Self {
        let n = x.len();
        let mut y = DVector::zeros(5 * n);
        y.rows_mut(0, n).copy_from(x);
        y.rows_mut(n, n).copy_from(v);
        y.rows_mut(3 * n, n).copy_from(normal);
        y.rows_mut(4 * n, n).copy_from(normal);
        Self {
            chart,
            y,
            with_jacobi: true,
        }
    }

    pub fn dim(&self) -> usize {
        self.y.len() / if self.with_jacobi { 5 } else { 2 }
    }

    pub fn position(&self) -> DVector<T> {
        let n = self.dim();
        self.y.rows(0, n).into_owned()
    }

    pub fn velocity(&self) -> DVector<T> {
        let n = self.dim();
        self.y.rows(n, n).into_owned()
    }

    pub fn jacobi(&self) -> Option<(DVector<T>, DVector<T>, DVector<T>)> {
        if !self.with_jacobi {
            return None;
        }
        let n = self.dim();
        Some((
            self.y.rows(2 * n, n).into_owned(),
            self.y.rows(3 * n, n).into_owned(),
            self.y.rows(4 * n, n).into_owned(),
        ))
    }

    pub fn chart_state(&self) -> ChartState<T> {
        ChartState {
            chart: self.chart,
            x: self.position(),
        }
    }
}

/// Per-point geometry of a 2-dimensional surface chart, cached per stage.
struct LocalGeom<T> {
    j: [Vector3<T>; 2],
    second: [Vector3<T>; 3],
    ginv: Matrix2<T>,
    g: Matrix2<T>,
    curvature: T,
}

impl<T: Real> LocalGeom<T> {
    /// `out = -Γ(u, w)` contracted through the embedding.
    fn gamma_contract(&self, u: &Vector2<T>, w: &Vector2<T>) -> Vector2<T> {
        let b = self.second[0] * (u[0] * w[0])
            + self.second[1] * (u[0] * w[1] + u[1] * w[0])
            + self.second[2] * (u[1] * w[1]);
        let rhs = Vector2::new(b.dot(&self.j[0]), b.dot(&self.j[1]));
        -(self.ginv * rhs)
    }
}

pub struct Integrator<'m, T> {
    pub model: &'m ManifoldModel<T>,
    pub step: T,
}

impl<'m, T: Real> Integrator<'m, T> {
    pub fn new(model: &'m ManifoldModel<T>, step: T) -> Self {
        Self { model, step }
    }

    fn local_geom(&self, chart: usize, x0: T, x1: T) -> Option<LocalGeom<T>> {
        match &self.model.chart(chart).geometry {
            ChartGeometry::Flat { .. } => None,
            ChartGeometry::Surface(s) => {
                let x = DVector::from_vec(vec![x0, x1]);
                let j = s.embed_jacobian(&x);
                let second = s.embed_second(&x);
                let g = Matrix2::new(
                    j[0].dot(&j[0]),
                    j[0].dot(&j[1]),
                    j[1].dot(&j[0]),
                    j[1].dot(&j[1]),
                );
                let ginv = g.try_inverse().expect("chart metric invertible");
                let curvature = s.gauss_curvature(&x);
                Some(LocalGeom {
                    j,
                    second,
                    ginv,
                    g,
                    curvature,
                })
            }
        }
    }

    /// Time derivative of the state vector.
    fn deriv(&self, chart: usize, y: &DVector<T>, out: &mut DVector<T>) {
        let n = self.model.dim();
        debug_assert!(n == 2, "shipped charts are 2-dimensional");
        let with_jacobi = y.len() == 5 * n;
        let geom = self.local_geom(chart, y[0], y[1]);
        let v = Vector2::new(y[n], y[n + 1]);
        // ẋ = v
        out[0] = v[0];
        out[1] = v[1];
        match &geom {
            None => {
                // Flat chart: zero acceleration, trivial transport.
                out[n] = T::zero();
                out[n + 1] = T::zero();
                if with_jacobi {
                    // J̇ = W, Ẇ = 0, Ṅ = 0
                    out[2 * n] = y[3 * n];
                    out[2 * n + 1] = y[3 * n + 1];
                    for k in 3 * n..5 * n {
                        out[k] = T::zero();
                    }
                }
            }
            Some(geom) => {
                let acc = geom.gamma_contract(&v, &v);
                out[n] = acc[0];
                out[n + 1] = acc[1];
                if with_jacobi {
                    let jf = Vector2::new(y[2 * n], y[2 * n + 1]);
                    let w = Vector2::new(y[3 * n], y[3 * n + 1]);
                    let nn = Vector2::new(y[4 * n], y[4 * n + 1]);
                    // J̇ = W − Γ(v, J)
                    let jdot = w + geom.gamma_contract(&v, &jf);
                    // curvature term R(J, v)v = K (g(v,v) J − g(J,v) v)
                    let gv = geom.g * v;
                    let vv = gv.dot(&v);
                    let jv = gv.dot(&jf);
                    let r = (jf * vv - v * jv) * geom.curvature;
                    let wdot = geom.gamma_contract(&v, &w) - r;
                    let ndot = geom.gamma_contract(&v, &nn);
                    out[2 * n] = jdot[0];
                    out[2 * n + 1] = jdot[1];
                    out[3 * n] = wdot[0];
                    out[3 * n + 1] = wdot[1];
                    out[4 * n] = ndot[0];
                    out[4 * n + 1] = ndot[1];
                }
            }
        }
    }

    /// One RK4 step of size `h` (in place).
    ///
    /// The state update is accumulated with Neumaier compensation held in
    /// the workspace, so conserved pairings drift at roundoff scale rather
    /// than at `steps × ε × |state|`.
    pub fn rk4_step(&self, state: &mut GeodesicState<T>, h: T, ws: &mut Workspace<T>) {
        let y = &mut state.y;
        let half = T::of(0.5);
        let sixth = T::of(1.0 / 6.0);
        self.deriv(state.chart, y, &mut ws.k1);
        ws.tmp.copy_from(y);
        ws.tmp.axpy(h * half, &ws.k1, T::one());
        self.deriv(state.chart, &ws.tmp, &mut ws.k2);
        ws.tmp.copy_from(y);
        ws.tmp.axpy(h * half, &ws.k2, T::one());
        self.deriv(state.chart, &ws.tmp, &mut ws.k3);
        ws.tmp.copy_from(y);
        ws.tmp.axpy(h, &ws.k3, T::one());
        self.deriv(state.chart, &ws.tmp, &mut ws.k4);
        let w = h * sixth;
        let two = T::of(2.0);
        for i in 0..y.len() {
            let delta = w * (ws.k1[i] + two * (ws.k2[i] + ws.k3[i]) + ws.k4[i]);
            // Neumaier-compensated y[i] += delta.
            let s = y[i] + delta;
            if y[i].abs() >= delta.abs() {
                ws.comp[i] += (y[i] - s) + delta;
            } else {
                ws.comp[i] += (delta - s) + y[i];
            }
            y[i] = s;
        }
    }

    /// Fold the accumulated compensation into the state (used before the
    /// state is handed to consumers or transformed across charts).
    fn flush_compensation(&self, state: &mut GeodesicState<T>, ws: &mut Workspace<T>) {
        for i in 0..state.y.len() {
            state.y[i] += ws.comp[i];
            ws.comp[i] = T::zero();
        }
    }

    /// Wrap periodic coordinates and switch charts when running toward a
    /// coordinate degeneracy. Velocity-like blocks transform together.
    fn normalize_state(
        &self,
        state: &mut GeodesicState<T>,
        t: T,
        ws: &mut Workspace<T>,
    ) -> Result<(), GeodesicError> {
        let n = state.dim();
        let chart = self.model.chart(state.chart);
        for (i, axis) in chart.axes.iter().enumerate() {
            if axis.periodic {
                state.y[i] = axis.reduce(state.y[i]);
            } else if !axis.contains(state.y[i]) {
                // Tiny excursions at the box edge are clamped; real exits fail.
                let tol = T::of(1e-9);
                if state.y[i] < axis.lo - tol || state.y[i] > axis.hi + tol {
                    return Err(GeodesicError::ChartExit {
                        t: t.as_f64(),
                        detail: format!(
                            "axis {i} value {} outside [{}, {}] with no transition",
                            state.y[i].as_f64(),
                            axis.lo.as_f64(),
                            axis.hi.as_f64()
                        ),
                    });
                }
                state.y[i] = state.y[i].clamp(axis.lo, axis.hi);
            }
        }
        if self.model.n_charts() == 1 {
            return Ok(());
        }
        let cs = state.chart_state();
        let margin = self.model.margin(&cs);
        if margin.as_f64() < SWITCH_MARGIN {
            let best = self.model.best_chart(&cs);
            if best != state.chart {
                // Fold the running compensation in before the nonlinear
                // transition, then move all vector blocks together.
                self.flush_compensation(state, ws);
                let cs = state.chart_state();
                let blocks = state.y.len() / n;
                let mut vectors = Vec::with_capacity(blocks - 1);
                for b in 1..blocks {
                    vectors.push(state.y.rows(b * n, n).into_owned());
                }
                let (moved_state, moved) = self.model.transition(&cs, best, &vectors);
                let gain = self.model.margin(&moved_state) - margin;
                if gain.as_f64() > SWITCH_GAIN {
                    for i in 0..n {
                        state.y[i] = moved_state.x[i];
                    }
                    for (b, vec) in moved.iter().enumerate() {
                        for i in 0..n {
                            state.y[(b + 1) * n + i] = vec[i];
                        }
                    }
                    state.chart = moved_state.chart;
                }
            } else if margin <= T::zero() {
                return Err(GeodesicError::ChartExit {
                    t: t.as_f64(),
                    detail: "hit a coordinate degeneracy with no better chart".into(),
                });
            }
        }
        Ok(())
    }

    /// State with the running compensation folded in, for sampling.
    fn view(&self, state: &GeodesicState<T>, ws: &Workspace<T>) -> GeodesicState<T> {
        let mut v = state.clone();
        for i in 0..v.y.len() {
            v.y[i] += ws.comp[i];
        }
        v
    }

    /// Integrate from `start` to `t_end`, invoking `on_sample` at `t = 0`
    /// and after every completed step (including the final partial step).
    pub fn integrate(
        &self,
        start: GeodesicState<T>,
        t_end: T,
        mut on_sample: impl FnMut(T, &GeodesicState<T>),
    ) -> Result<GeodesicState<T>, GeodesicError> {
        let mut state = start;
        let mut ws = Workspace::for_state(&state);
        self.normalize_state(&mut state, T::zero(), &mut ws)?;
        on_sample(T::zero(), &state);
        if t_end <= T::zero() {
            return Ok(state);
        }
        let h = self.step;
        let n_full = (t_end / h).as_f64().floor() as u64;
        for i in 0..n_full {
            self.rk4_step(&mut state, h, &mut ws);
            let t = h * T::of((i + 1) as f64);
            self.normalize_state(&mut state, t, &mut ws)?;
            on_sample(t, &self.view(&state, &ws));
        }
        let t_done = h * T::of(n_full as f64);
        let rest = t_end - t_done;
        if rest > T::of(1e-15) * t_end.max(T::one()) {
            self.rk4_step(&mut state, rest, &mut ws);
            self.normalize_state(&mut state, t_end, &mut ws)?;
            on_sample(t_end, &self.view(&state, &ws));
        }
        self.flush_compensation(&mut state, &mut ws);
        Ok(state)
    }
}

/// Preallocated RK4 stage buffers plus the running state compensation.
pub struct Workspace<T> {
    k1: DVector<T>,
    k2: DVector<T>,
    k3: DVector<T>,
    k4: DVector<T>,
    tmp: DVector<T>,
    comp: DVector<T>,
}

impl<T: Real> Workspace<T> {
    pub fn for_state(state: &GeodesicState<T>) -> Self {
        let len = state.y.len();
        Self {
            k1: DVector::zeros(len),
            k2: DVector::zeros(len),
            k3: DVector::zeros(len),
            k4: DVector::zeros(len),
            tmp: DVector::zeros(len),
            comp: DVector::zeros(len),
        }
    }
}
