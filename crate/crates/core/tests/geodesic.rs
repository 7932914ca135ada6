//! Geodesic engine checks against independent closed-form oracles.

use nalgebra::{DVector, Vector3};
use riemgeo::geodesic::{
    conjugate_time, endpoint_error_estimate, eval_on_path, jacobi_along, shoot, shoot_angle,
};
use riemgeo::manifold::{g_norm, ChartGeometry, ChartPoint, ChartState, ModelSpec};
use riemgeo::Model;

fn model(name: &str) -> Model {
    ModelSpec::new(name).build().unwrap()
}

fn pt(x: f64, y: f64) -> ChartPoint<f64> {
    ChartPoint::new(vec![x, y])
}

/// Embed a main-chart tangent vector of a surface model into R³.
fn embed_vector(m: &Model, x: &DVector<f64>, v: &DVector<f64>) -> Vector3<f64> {
    match &m.chart(0).geometry {
        ChartGeometry::Surface(s) => {
            let j = s.embed_jacobian(x);
            j[0] * v[0] + j[1] * v[1]
        }
        _ => panic!("not an embedded model"),
    }
}

/// Independent oracle: unit-sphere great circle `cos(t)·P + sin(t)·V`.
fn great_circle(p: Vector3<f64>, v: Vector3<f64>, t: f64) -> Vector3<f64> {
    p * t.cos() + v * t.sin()
}

#[test]
fn torus_geodesics_are_straight_lines() {
    let m = model("torus");
    let path = shoot(&m, &pt(0.0, 0.0), &DVector::from_vec(vec![1.0, 0.0]), 0.3, 1e-3).unwrap();
    let end = path.endpoint(&m);
    assert!((end.coords[0] - 0.3).abs() < 1e-12);
    assert!(end.coords[1].abs() < 1e-12);
}

#[test]
fn sphere_pole_to_pole() {
    let m = model("sphere");
    let north = pt(0.0, 0.0);
    for k in 0..8 {
        let alpha = k as f64 * std::f64::consts::TAU / 8.0 + 0.1;
        let path = shoot_angle(&m, &north, alpha, std::f64::consts::PI, 1e-3).unwrap();
        let end = path.endpoint(&m);
        let emb = m.to_embedding(0, &end.coords).unwrap();
        let south = Vector3::new(0.0, 0.0, -1.0);
        assert!(
            (emb - south).norm() < 1e-6,
            "alpha {alpha}: endpoint {emb:?} not at the south pole"
        );
    }
}

#[test]
fn sphere_matches_great_circle_through_pole() {
    // Launch from the equator straight at the north pole; the path crosses
    // both charts and must still track the closed-form great circle.
    let m = model("sphere");
    let p = pt(std::f64::consts::FRAC_PI_2, 0.0);
    let alpha = std::f64::consts::PI; // -∂θ direction: toward θ = 0
    for t_end in [0.9, std::f64::consts::FRAC_PI_2, 2.6] {
        let path = shoot_angle(&m, &p, alpha, t_end, 1e-3).unwrap();
        let end = path.endpoint(&m);
        let got = m.to_embedding(0, &end.coords).unwrap();
        let p_emb = Vector3::new(1.0, 0.0, 0.0);
        let v_emb = Vector3::new(0.0, 0.0, 1.0); // -∂θ at the equator points up
        let want = great_circle(p_emb, v_emb, t_end);
        assert!(
            (got - want).norm() < 1e-6,
            "t={t_end}: got {got:?}, want {want:?}"
        );
    }
}

#[test]
fn sphere_order_of_accuracy_at_least_rk4() {
    let m = model("sphere");
    let p = pt(1.1, 0.4);
    let alpha = 0.77;
    let t_end = 2.0;
    let p_emb = m.to_embedding(0, &p.coords).unwrap();
    let lifted = ChartState {
        chart: 0,
        x: p.coords.clone(),
    };
    let v = m.direction(&lifted, alpha);
    let v_emb = embed_vector(&m, &p.coords, &v);
    let exact = great_circle(p_emb, v_emb, t_end);

    let steps = [1e-2, 5e-3, 2.5e-3];
    let errs: Vec<f64> = steps
        .iter()
        .map(|&h| {
            let path = shoot_angle(&m, &p, alpha, t_end, h).unwrap();
            let end = path.endpoint(&m);
            (m.to_embedding(0, &end.coords).unwrap() - exact).norm()
        })
        .collect();
    // Least-squares slope of log(err) against log(step).
    let xs: Vec<f64> = steps.iter().map(|h| h.ln()).collect();
    let ys: Vec<f64> = errs.iter().map(|e| e.ln()).collect();
    let xm = xs.iter().sum::<f64>() / 3.0;
    let ym = ys.iter().sum::<f64>() / 3.0;
    let slope = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (x - xm) * (y - ym))
        .sum::<f64>()
        / xs.iter().map(|x| (x - xm) * (x - xm)).sum::<f64>();
    assert!(
        slope >= 3.7,
        "fitted order {slope:.3} below 3.7 (errors {errs:?})"
    );
}

#[test]
fn ellipsoid_unit_speed_drift_stays_small() {
    let m = model("ellipsoid");
    let path = shoot_angle(&m, &pt(1.0, 0.3), 0.9, 10.0, 1e-3).unwrap();
    let mut worst: f64 = 0.0;
    for s in &path.samples {
        let g = m.chart(s.chart).metric(&s.x);
        worst = worst.max((g_norm(&g, &s.v) - 1.0).abs());
    }
    assert!(worst < 1e-8, "unit-speed drift {worst:.3e}");
}

#[test]
fn ellipsoid_meridian_arrives_at_opposite_equator_point() {
    // Meridians are geodesics of a surface of revolution. The equator-to-
    // equator meridian arc through the north pole has length given by the
    // 1D quadrature of sqrt(E(θ)) = sqrt(1 + 3 sin²θ); Simpson oracle.
    let m = model("ellipsoid");
    let n = 4000;
    let quarter: f64 = {
        // ∫_0^{π/2} sqrt(1 + 3 sin²θ) dθ by Simpson's rule (θ measured from equator).
        let f = |theta: f64| (1.0 + 3.0 * theta.cos().powi(2)).sqrt();
        let h = std::f64::consts::FRAC_PI_2 / n as f64;
        let mut s = f(0.0) + f(std::f64::consts::FRAC_PI_2);
        for i in 1..n {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += w * f(i as f64 * h);
        }
        s * h / 3.0
    };
    let p = pt(std::f64::consts::FRAC_PI_2, 0.0);
    let path = shoot_angle(&m, &p, std::f64::consts::PI, 2.0 * quarter, 1e-3).unwrap();
    let end = path.endpoint(&m);
    assert!((end.coords[0] - std::f64::consts::FRAC_PI_2).abs() < 1e-5);
    let dphi = (end.coords[1] - std::f64::consts::PI).abs();
    assert!(dphi.min(std::f64::consts::TAU - dphi) < 1e-5);
}

#[test]
fn conjugate_time_sphere_is_pi() {
    let m = model("sphere");
    // Scalar oracle: j'' + K j = 0 with K = 1 and j(0)=0 has first zero π.
    let oracle = std::f64::consts::PI;
    for alpha in [0.0, 1.0, 2.5] {
        let c = conjugate_time(&m, &pt(1.3, 0.2), alpha, 4.0, 1e-3)
            .unwrap()
            .expect("sphere has a conjugate point");
        assert!((c - oracle).abs() < 1e-6, "c_v = {c}");
    }
}

#[test]
fn conjugate_time_absent_on_flat_models() {
    // K = 0: the scalar oracle solution j(t) = t never vanishes for t > 0.
    let torus = model("torus");
    assert!(conjugate_time(&torus, &pt(0.1, 0.9), 0.7, 3.0, 1e-3)
        .unwrap()
        .is_none());
    let cyl = model("cylinder");
    assert!(conjugate_time(&cyl, &pt(0.0, 0.0), 0.3, 12.0, 1e-3)
        .unwrap()
        .is_none());
}

#[test]
fn jacobi_norm_matches_scalar_solution_on_constant_curvature() {
    // |J(t)|_g against the closed-form scalar solutions: sin t on the unit
    // sphere, t on the flat torus.
    let sphere = model("sphere");
    let sol = jacobi_along(&sphere, &pt(1.0, 0.0), 0.4, 3.0, 1e-3).unwrap();
    for (s, j) in sol.path.samples.iter().zip(&sol.samples) {
        let g = sphere.chart(s.chart).metric(&s.x);
        let norm = g_norm(&g, &j.j);
        assert!(
            (norm - s.t.sin().abs()).abs() < 1e-6,
            "t={}: |J| = {norm}, sin t = {}",
            s.t,
            s.t.sin()
        );
    }
    let torus = model("torus");
    let sol = jacobi_along(&torus, &pt(0.2, 0.2), 1.1, 0.7, 1e-3).unwrap();
    for (s, j) in sol.path.samples.iter().zip(&sol.samples) {
        let g = torus.chart(s.chart).metric(&s.x);
        let norm = g_norm(&g, &j.j);
        assert!((norm - s.t).abs() < 1e-6);
    }
}

#[test]
fn gauss_lemma_drift_bounds() {
    let sphere = model("sphere");
    let sol = jacobi_along(&sphere, &pt(0.9, 0.1), 1.9, std::f64::consts::PI, 1e-3).unwrap();
    assert!(sol.gauss_lemma_drift() < 1e-8);

    let ellipsoid = model("ellipsoid");
    let sol = jacobi_along(&ellipsoid, &pt(1.2, 0.5), 0.35, 5.0, 1e-3).unwrap();
    assert!(sol.gauss_lemma_drift() < 1e-7);

    let plane = model("plane");
    let sol = jacobi_along(&plane, &pt(3.0, -2.0), 0.8, 10.0, 1e-3).unwrap();
    assert!(sol.gauss_lemma_drift() < 1e-14);
}

#[test]
fn reversed_shooting_returns_home() {
    for name in ["torus", "sphere", "ellipsoid"] {
        let m = model(name);
        let p = pt(0.8, 0.45);
        let t_end = 1.4;
        let path = shoot_angle(&m, &p, 0.6, t_end, 1e-3).unwrap();
        let end = path.endpoint(&m);
        let v_back = -path.endpoint_velocity_main(&m);
        let g = m.metric_at(&end).unwrap();
        let v_back = &v_back / g_norm(&g, &v_back);
        let back = shoot(&m, &end, &v_back, t_end, 1e-3).unwrap();
        let home = back.endpoint(&m);
        assert!(
            m.chart_distance(&home, &p) < 1e-6,
            "{name}: returned to {home:?}"
        );
    }
}

#[test]
fn endpoint_error_estimate_is_tiny_at_default_step() {
    let m = model("sphere");
    let est = endpoint_error_estimate(&m, &pt(1.0, 0.7), 0.3, 2.0, 1e-3).unwrap();
    assert!(est < 1e-7, "step-halving endpoint estimate {est:.3e}");
    let m = model("ellipsoid");
    let est = endpoint_error_estimate(&m, &pt(1.0, 0.7), 2.1, 3.0, 1e-3).unwrap();
    assert!(est < 1e-7, "step-halving endpoint estimate {est:.3e}");
}

#[test]
fn eval_on_path_interpolates_between_samples() {
    let m = model("sphere");
    let p = pt(1.0, 0.2);
    let path = shoot_angle(&m, &p, 0.9, 2.0, 1e-3).unwrap();
    let t = 1.23456789;
    let (state, _v) = eval_on_path(&m, &path, t).unwrap();
    let direct = shoot_angle(&m, &p, 0.9, t, 1e-3).unwrap();
    let d = m.chart_distance(&m.to_main(&state), &direct.endpoint(&m));
    assert!(d < 1e-9, "re-evaluation differs by {d:.3e}");
}

#[test]
fn non_unit_velocity_is_rejected() {
    let m = model("torus");
    let err = shoot(&m, &pt(0.0, 0.0), &DVector::from_vec(vec![2.0, 0.0]), 1.0, 1e-3);
    assert!(err.is_err());
}

#[test]
fn plane_geodesic_exits_chart_box() {
    let m = model("plane");
    let err = shoot(
        &m,
        &pt(49.5, 0.0),
        &DVector::from_vec(vec![1.0, 0.0]),
        2.0,
        1e-3,
    );
    assert!(err.is_err(), "expected a chart-exit error");
}
