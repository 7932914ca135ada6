//! Model-layer invariants checked against independent oracles.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use riemgeo::manifold::{
    ChartGeometry, ChartPoint, ModelSpec, MODEL_NAMES,
};
use riemgeo::Model;

fn model(name: &str) -> Model {
    ModelSpec::new(name).build().unwrap()
}

fn pt(x: f64, y: f64) -> ChartPoint<f64> {
    ChartPoint::new(vec![x, y])
}

fn random_point(m: &Model, rng: &mut ChaCha8Rng) -> ChartPoint<f64> {
    let boxed = m.sample_box();
    let x = rng.gen_range(boxed.lo[0]..boxed.hi[0]);
    let y = rng.gen_range(boxed.lo[1]..boxed.hi[1]);
    pt(x, y)
}

#[test]
fn flat_models_have_identity_metric() {
    for name in ["plane", "torus", "cylinder"] {
        let m = model(name);
        let g = m.metric_at(&pt(0.25, 0.125)).unwrap();
        assert_eq!(g, DMatrix::identity(2, 2), "{name}");
    }
}

#[test]
fn sphere_metric_at_equator_is_identity() {
    let m = model("sphere");
    let g = m.metric_at(&pt(std::f64::consts::FRAC_PI_2, 1.0)).unwrap();
    assert!((g[(0, 0)] - 1.0).abs() < 1e-15);
    assert!((g[(1, 1)] - 1.0).abs() < 1e-15);
    assert!(g[(0, 1)].abs() < 1e-15);
}

#[test]
fn ellipsoid_metric_matches_embedding_finite_differences() {
    // Oracle: central finite differences of dot products of the embedding,
    // step 1e-5: g_ij = <∂_i x, ∂_j x>.
    let m = model("ellipsoid");
    let x = pt(std::f64::consts::FRAC_PI_4, 0.0);
    let g = m.metric_at(&x).unwrap();
    // Closed-form check at this particular point: diag(1+3 sin²θ, sin²θ).
    assert!((g[(0, 0)] - 2.5).abs() < 1e-14);
    assert!((g[(1, 1)] - 0.5).abs() < 1e-14);

    let h = 1e-5;
    let embed = |c: &[f64]| m.to_embedding(0, &DVector::from_vec(c.to_vec())).unwrap();
    let base = [x.coords[0], x.coords[1]];
    let mut fd = DMatrix::zeros(2, 2);
    let partial = |axis: usize| {
        let mut up = base;
        let mut dn = base;
        up[axis] += h;
        dn[axis] -= h;
        (embed(&up) - embed(&dn)) / (2.0 * h)
    };
    let d0 = partial(0);
    let d1 = partial(1);
    fd[(0, 0)] = d0.dot(&d0);
    fd[(0, 1)] = d0.dot(&d1);
    fd[(1, 0)] = fd[(0, 1)];
    fd[(1, 1)] = d1.dot(&d1);
    for i in 0..2 {
        for j in 0..2 {
            assert!(
                (g[(i, j)] - fd[(i, j)]).abs() < 1e-6,
                "g[{i}{j}] = {} vs fd {}",
                g[(i, j)],
                fd[(i, j)]
            );
        }
    }
}

#[test]
fn metric_positive_definite_at_random_points() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for name in MODEL_NAMES {
        let m = model(name);
        for _ in 0..10_000 {
            let p = random_point(&m, &mut rng);
            let g = m.metric_at(&p).unwrap();
            // 2x2 SPD: positive trace-determinant test on the symmetric part.
            let det = g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)];
            assert!(g[(0, 0)] > 0.0 && det > 0.0, "{name} at {p:?}");
            assert!((g[(0, 1)] - g[(1, 0)]).abs() < 1e-15);
        }
    }
}

#[test]
fn christoffel_closed_form_matches_finite_differences() {
    // Oracle: Γ from central differences of metric_at, step 1e-5.
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for name in MODEL_NAMES {
        let m = model(name);
        let mut worst: f64 = 0.0;
        for _ in 0..100 {
            let p = random_point(&m, &mut rng);
            if m.christoffel_at(&p).is_err() {
                continue;
            }
            let closed = m.christoffel_at(&p).unwrap();
            let fd = m.christoffel_fd(&p, 1e-5).unwrap();
            for k in 0..2 {
                let diff = (&closed[k] - &fd[k]).abs().max();
                worst = worst.max(diff);
            }
        }
        assert!(worst < 1e-6, "{name}: worst Christoffel gap {worst:.3e}");
    }
}

#[test]
fn torus_christoffel_is_zero() {
    let m = model("torus");
    let gamma = m.christoffel_at(&pt(0.3, 0.8)).unwrap();
    for k in 0..2 {
        assert_eq!(gamma[k].abs().max(), 0.0);
    }
}

#[test]
fn sphere_christoffel_closed_forms() {
    let m = model("sphere");
    let theta: f64 = 0.9;
    let gamma = m.christoffel_at(&pt(theta, 2.2)).unwrap();
    assert!((gamma[0][(1, 1)] + theta.sin() * theta.cos()).abs() < 1e-12);
    assert!((gamma[1][(0, 1)] - theta.cos() / theta.sin()).abs() < 1e-12);
    assert!((gamma[1][(1, 0)] - theta.cos() / theta.sin()).abs() < 1e-12);
}

#[test]
fn christoffel_rejects_pole_band() {
    let m = model("sphere");
    assert!(m.christoffel_at(&pt(5e-4, 0.0)).is_err());
    assert!(m.christoffel_at(&pt(std::f64::consts::PI - 5e-4, 0.0)).is_err());
}

#[test]
fn metric_rejects_points_outside_domain() {
    let m = model("plane");
    assert!(m.metric_at(&pt(60.0, 0.0)).is_err());
    let m = model("sphere");
    assert!(m.metric_at(&pt(3.5, 0.0)).is_err());
}

#[test]
fn volume_density_examples() {
    let m = model("torus");
    assert_eq!(m.volume_density(&pt(0.4, 0.9)).unwrap(), 1.0);

    let m = model("sphere");
    for theta in [0.2, 1.0, 2.4] {
        let v = m.volume_density(&pt(theta, 0.3)).unwrap();
        assert!((v - theta.sin()).abs() < 1e-13, "sinθ oracle at {theta}");
    }

    let m = model("ellipsoid");
    let p = pt(0.8, 1.1);
    let g = m.metric_at(&p).unwrap();
    let det = (g[(0, 0)] * g[(1, 1)] - g[(0, 1)] * g[(1, 0)]).sqrt();
    assert!((m.volume_density(&p).unwrap() - det).abs() < 1e-12);
}

#[test]
fn curvature_bounds_constant_models() {
    assert_eq!(model("sphere").curvature_bounds(None), [1.0, 1.0]);
    assert_eq!(model("torus").curvature_bounds(None), [0.0, 0.0]);
    assert_eq!(model("plane").curvature_bounds(None), [0.0, 0.0]);
    assert_eq!(model("cylinder").curvature_bounds(None), [0.0, 0.0]);
}

#[test]
fn ellipsoid_curvature_sampled_bounds_bracket_the_revolution_oracle() {
    // Oracle: Gaussian curvature of a surface of revolution
    // (f, h) = (a sinθ, c cosθ): K(θ) = c² / (a²cos²θ + c²sin²θ)².
    let m = model("ellipsoid");
    let [lo, hi] = m.curvature_bounds(None);
    let (a, c) = (1.0f64, 2.0f64);
    let oracle = |theta: f64| {
        let e = a * a * theta.cos().powi(2) + c * c * theta.sin().powi(2);
        c * c / (e * e)
    };
    let mut kmin = f64::INFINITY;
    let mut kmax = f64::NEG_INFINITY;
    for i in 0..200 {
        for j in 0..200 {
            let theta = 1e-3 + (std::f64::consts::PI - 2e-3) * (i as f64 + 0.5) / 200.0;
            let _phi = j; // K is φ-independent; the grid in φ is immaterial.
            kmin = kmin.min(oracle(theta));
            kmax = kmax.max(oracle(theta));
        }
    }
    // True range for (a, c) = (1, 2) is [1/4, 4]; the sampled grid sits
    // inside the pole band so its max lands a hair below 4.
    assert!((kmin - 0.25).abs() < 1e-4);
    assert!((kmax - 4.0).abs() < 5e-3);
    assert!(lo <= 0.25 && lo > 0.25 - 0.1, "lo = {lo}");
    assert!(hi >= 4.0 && hi < 4.0 + 0.1, "hi = {hi}");
    // Pointwise closed form agrees with the revolution oracle.
    for theta in [0.3, 1.0, 1.8, 2.9] {
        let k = m.gauss_curvature(&pt(theta, 0.5));
        assert!((k - oracle(theta)).abs() < 1e-12);
    }
}

#[test]
fn closed_form_distance_metric_axioms() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    for name in ["plane", "torus", "sphere", "cylinder"] {
        let m = model(name);
        for _ in 0..1000 {
            let a = random_point(&m, &mut rng);
            let b = random_point(&m, &mut rng);
            let c = random_point(&m, &mut rng);
            let dab = m.closed_form_distance(&a, &b).unwrap();
            let dba = m.closed_form_distance(&b, &a).unwrap();
            assert_eq!(dab, dba, "{name}: symmetry must be exact");
            assert_eq!(m.closed_form_distance(&a, &a).unwrap(), 0.0, "{name}");
            let dac = m.closed_form_distance(&a, &c).unwrap();
            let dcb = m.closed_form_distance(&c, &b).unwrap();
            assert!(
                dab <= dac + dcb + 1e-12,
                "{name}: triangle violated by {:.3e}",
                dab - dac - dcb
            );
        }
    }
}

#[test]
fn torus_distance_frozen_value() {
    // Shift-enumeration oracle: min over 3×3 shifts of |q + s - p| for
    // p = (0,0), q = (0.5, 0.25) is sqrt(0.3125).
    let m = model("torus");
    let d = m.closed_form_distance(&pt(0.0, 0.0), &pt(0.5, 0.25)).unwrap();
    assert!((d - 0.5590169943749474).abs() < 1e-15);
}

#[test]
fn sphere_distance_is_polar_angle_from_pole() {
    let m = model("sphere");
    let d = m
        .closed_form_distance(&pt(1e-9, 0.0), &pt(1.2, 2.0))
        .unwrap();
    assert!((d - 1.2).abs() < 1e-8);
}

#[test]
fn cylinder_distance_unwraps_the_angle() {
    let m = model("cylinder");
    // Angular distance wraps at π; beyond that the short way around wins.
    let d = m.closed_form_distance(&pt(0.0, 0.0), &pt(5.0, 1.0)).unwrap();
    let unwrapped = ((5.0f64 - std::f64::consts::TAU).powi(2) + 1.0).sqrt();
    assert!((d - unwrapped).abs() < 1e-12);
}

#[test]
fn metric_period_invariance_is_exact() {
    let m = model("torus");
    let g1 = m.metric_at(&pt(0.3, 0.7)).unwrap();
    let g2 = m.metric_at(&pt(0.3 + 1.0, 0.7 - 1.0)).unwrap();
    assert_eq!(g1, g2);

    let m = model("sphere");
    let g1 = m.metric_at(&pt(0.9, 0.5)).unwrap();
    let g2 = m
        .metric_at(&pt(0.9, 0.5 + std::f64::consts::TAU))
        .unwrap();
    assert_eq!(g1, g2);
}

#[test]
fn transitions_preserve_g_norm() {
    // Moving a tangent vector between the two surface charts must preserve
    // its metric norm: the transition is an isometry of the same surface.
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for name in ["sphere", "ellipsoid"] {
        let m = model(name);
        for _ in 0..200 {
            let p = random_point(&m, &mut rng);
            let state = riemgeo::manifold::ChartState {
                chart: 0,
                x: p.coords.clone(),
            };
            let v = m.direction(&state, rng.gen_range(0.0..std::f64::consts::TAU));
            let (moved_state, moved) = m.transition(&state, 1, &[v.clone()]);
            let g0 = m.chart(0).metric(&state.x);
            let g1 = m.chart(1).metric(&moved_state.x);
            let n0 = riemgeo::manifold::g_norm(&g0, &v);
            let n1 = riemgeo::manifold::g_norm(&g1, &moved[0]);
            assert!((n0 - n1).abs() < 1e-10, "{name}: {n0} vs {n1}");
        }
    }
}

#[test]
fn generic_scalar_instantiates_at_f32() {
    let m = ModelSpec::new("torus").build::<f32>().unwrap();
    let g = m
        .metric_at(&ChartPoint::<f32>::new(vec![0.25f32, 0.5f32]))
        .unwrap();
    assert_eq!(g[(0, 0)], 1.0f32);
    let s = ModelSpec::new("sphere").build::<f32>().unwrap();
    let k = s.gauss_curvature(&ChartPoint::<f32>::new(vec![1.0f32, 0.0f32]));
    assert!((k - 1.0f32).abs() < 1e-5);
}

#[test]
fn chart_geometry_kinds_are_as_expected() {
    for name in ["plane", "torus", "cylinder"] {
        let m = model(name);
        assert_eq!(m.n_charts(), 1, "{name}");
        assert!(matches!(
            m.chart(0).geometry,
            ChartGeometry::Flat { .. }
        ));
    }
    for name in ["sphere", "ellipsoid"] {
        let m = model(name);
        assert_eq!(m.n_charts(), 2, "{name}");
        assert!(matches!(m.chart(0).geometry, ChartGeometry::Surface(_)));
    }
}
