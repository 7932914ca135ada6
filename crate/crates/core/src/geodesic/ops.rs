//! Shooting, Jacobi integration, conjugate-time detection.

use nalgebra::DVector;

use super::integrator::{GeodesicState, Integrator, Workspace};
use super::path::{GeodesicPath, JacobiSample, JacobiSolution, PathSample};
use crate::error::GeodesicError;
use crate::manifold::{g_inner, g_norm, ChartPoint, ChartState, ManifoldModel, DELTA_POLE};
use crate::num::Real;

/// Default integration step in chart units.
pub const DEFAULT_STEP: f64 = 1e-3;
/// Bracketing width for conjugate-time bisection.
pub const CONJUGATE_BRACKET: f64 = 1e-8;

/// Integrate the geodesic with initial point `p` and unit velocity `v`
/// given in main-chart components.
///
/// `p` must be a regular point of the main chart; launching from a
/// coordinate-degenerate point (a chart pole) is supported through
/// [`shoot_angle`], which specifies the direction intrinsically.
pub fn shoot<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    v: &DVector<T>,
    t_end: T,
    step: T,
) -> Result<GeodesicPath<T>, GeodesicError> {
    let p = model.reduce(p);
    let main = ChartState {
        chart: 0,
        x: p.coords.clone(),
    };
    let g = model.chart(0).metric(&main.x);
    let norm = g_norm(&g, v);
    if (norm - T::one()).abs() > T::of(1e-10) {
        return Err(GeodesicError::Integration {
            t: 0.0,
            detail: format!("initial velocity is not unit: |v|_g = {}", norm.as_f64()),
        });
    }
    if model.chart(0).degeneracy_margin(&main.x) < T::of(DELTA_POLE) {
        return Err(GeodesicError::Integration {
            t: 0.0,
            detail: "launch point degenerate in the main chart; use shoot_angle".into(),
        });
    }
    let [e1, e2] = model.frame_at(&main);
    let alpha = g_inner(&g, v, &e2).atan2(g_inner(&g, v, &e1));
    // Lift to the best-conditioned chart before integrating.
    let lifted = model.lift(&p);
    let (state0, vecs) = if lifted.chart == 0 {
        (main, vec![v.clone()])
    } else {
        model.transition(&main, lifted.chart, &[v.clone()])
    };
    run_shoot(model, p, alpha, state0, vecs[0].clone(), t_end, step)
}

/// Integrate the geodesic launched at chart-frame angle `alpha` from `p`.
///
/// Works at any point of the manifold, including main-chart poles.
pub fn shoot_angle<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    t_end: T,
    step: T,
) -> Result<GeodesicPath<T>, GeodesicError> {
    let p = model.reduce(p);
    let lifted = model.lift(&p);
    let v = model.direction(&lifted, alpha);
    run_shoot(model, p, alpha, lifted, v, t_end, step)
}

fn run_shoot<T: Real>(
    model: &ManifoldModel<T>,
    p: ChartPoint<T>,
    alpha: T,
    state: ChartState<T>,
    v: DVector<T>,
    t_end: T,
    step: T,
) -> Result<GeodesicPath<T>, GeodesicError> {
    let integrator = Integrator::new(model, step);
    let start = GeodesicState::new(state.chart, &state.x, &v);
    let mut samples = Vec::with_capacity((t_end / step).as_f64() as usize + 2);
    integrator.integrate(start, t_end, |t, s| {
        samples.push(PathSample {
            t,
            chart: s.chart,
            x: s.position(),
            v: s.velocity(),
        });
    })?;
    Ok(GeodesicPath {
        initial_point: p,
        initial_angle: alpha,
        step,
        samples,
    })
}

/// Re-evaluate a stored path at an arbitrary time by integrating the short
/// remainder from the nearest earlier sample.
pub fn eval_on_path<T: Real>(
    model: &ManifoldModel<T>,
    path: &GeodesicPath<T>,
    t: T,
) -> Result<(ChartState<T>, DVector<T>), GeodesicError> {
    let idx = path.sample_index_at(t);
    let s = &path.samples[idx];
    let gap = t - s.t;
    let state = GeodesicState::new(s.chart, &s.x, &s.v);
    if gap <= T::of(1e-15) {
        return Ok((state.chart_state(), state.velocity()));
    }
    let integrator = Integrator::new(model, path.step);
    let end = integrator.integrate(state, gap, |_, _| {})?;
    Ok((end.chart_state(), end.velocity()))
}

/// Integrate the Jacobi field with `J(0) = 0`, `J'(0) = N(0)` the unit
/// normal to the launch direction, along the geodesic from `p` at `alpha`.
pub fn jacobi_along<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    t_end: T,
    step: T,
) -> Result<JacobiSolution<T>, GeodesicError> {
    let p = model.reduce(p);
    let lifted = model.lift(&p);
    let v = model.direction(&lifted, alpha);
    let frac_pi_2 = T::pi() * T::of(0.5);
    let normal = model.direction(&lifted, alpha + frac_pi_2);
    let integrator = Integrator::new(model, step);
    let start = GeodesicState::with_jacobi(lifted.chart, &lifted.x, &v, &normal);

    let mut path_samples = Vec::new();
    let mut jac_samples = Vec::new();
    integrator.integrate(start, t_end, |t, s| {
        let (j, w, n) = s.jacobi().expect("jacobi state");
        let g = model.chart(s.chart).metric(&s.position());
        let v_here = s.velocity();
        jac_samples.push(JacobiSample {
            t,
            j_normal: g_inner(&g, &j, &n),
            w_normal: g_inner(&g, &w, &n),
            tangential: g_inner(&g, &v_here, &j),
            j,
            w,
            normal: n,
        });
        path_samples.push(PathSample {
            t,
            chart: s.chart,
            x: s.position(),
            v: v_here,
        });
    })?;

    let path = GeodesicPath {
        initial_point: p,
        initial_angle: alpha,
        step,
        samples: path_samples,
    };

    // Locate the first sign change of the signed normal component and
    // bisect it down to the bracket width.
    let mut first_zero = None;
    for i in 1..jac_samples.len() {
        if jac_samples[i - 1].t <= T::zero() {
            continue;
        }
        let a = jac_samples[i - 1].j_normal;
        let b = jac_samples[i].j_normal;
        if a > T::zero() && b <= T::zero() || a < T::zero() && b >= T::zero() {
            let t0 = path.samples[i - 1].t;
            let t1 = path.samples[i].t;
            first_zero = Some(bisect_jacobi_zero(
                model,
                &path.samples[i - 1],
                &jac_samples[i - 1],
                t0,
                t1,
                step,
            )?);
            break;
        }
    }

    Ok(JacobiSolution {
        path,
        samples: jac_samples,
        first_zero,
    })
}

fn bisect_jacobi_zero<T: Real>(
    model: &ManifoldModel<T>,
    base: &PathSample<T>,
    jac: &JacobiSample<T>,
    t_lo: T,
    t_hi: T,
    step: T,
) -> Result<T, GeodesicError> {
    let integrator = Integrator::new(model, step);
    let sign_lo = jac.j_normal > T::zero();
    let mut lo = t_lo;
    let mut hi = t_hi;
    let mut state_lo = GeodesicState::with_jacobi(base.chart, &base.x, &base.v, &jac.normal);
    // Reinstall the exact Jacobi block at the bracket start.
    let n = base.x.len();
    for i in 0..n {
        state_lo.y[2 * n + i] = jac.j[i];
        state_lo.y[3 * n + i] = jac.w[i];
        state_lo.y[4 * n + i] = jac.normal[i];
    }
    let width = T::of(CONJUGATE_BRACKET);
    let mut ws = Workspace::for_state(&state_lo);
    while hi - lo > width {
        let mid = (lo + hi) * T::of(0.5);
        let mut probe = state_lo.clone();
        integrator.rk4_step(&mut probe, mid - lo, &mut ws);
        let (j, _, nn) = probe.jacobi().expect("jacobi state");
        let g = model.chart(probe.chart).metric(&probe.position());
        let val = g_inner(&g, &j, &nn);
        if (val > T::zero()) == sign_lo {
            lo = mid;
            state_lo = probe;
        } else {
            hi = mid;
        }
    }
    Ok((lo + hi) * T::of(0.5))
}

/// First conjugate time along the geodesic from `p` at frame angle `alpha`:
/// the smallest `t ∈ (0, t_max]` where a Jacobi field with `J(0) = 0`,
/// `J'(0) ⊥ v` vanishes. `None` when no zero occurs in the window.
pub fn conjugate_time<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    t_max: T,
    step: T,
) -> Result<Option<T>, GeodesicError> {
    Ok(jacobi_along(model, p, alpha, t_max, step)?.first_zero)
}

/// Max Gauss-lemma drift of a Jacobi solution (integration health metric).
pub fn gauss_lemma_drift<T: Real>(solution: &JacobiSolution<T>) -> T {
    solution.gauss_lemma_drift()
}

/// Difference between endpoints integrated at `step` and `step / 2`;
/// used as the integrator's endpoint error estimate.
pub fn endpoint_error_estimate<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    t_end: T,
    step: T,
) -> Result<T, GeodesicError> {
    let coarse = shoot_angle(model, p, alpha, t_end, step)?;
    let fine = shoot_angle(model, p, alpha, t_end, step * T::of(0.5))?;
    Ok(model.chart_distance(&coarse.endpoint(model), &fine.endpoint(model)))
}
