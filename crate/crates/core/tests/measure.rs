//! Measure-engine checks: pairing identities against refinement and 1D
//! closed-form oracles, comparison and lower-bound corollaries.

use nalgebra::DVector;
use riemgeo::cutlocus::{cut_quadrature_samples, CutConfig};
use riemgeo::manifold::{ChartPoint, ModelSpec};
use riemgeo::measure::{
    divdiv_vv, grid_quadrature, hessian_decomposition_report, pairing_laplacian,
    pairing_lhs_hessian_n, pairing_lhs_laplacian_n, pairing_rhs_ac_hessian_n,
    pairing_rhs_ac_laplacian_n, rank_one_reconstruction, validate_support,
    verify_comparison_laplacian, verify_lower_bound_laplacian, ClosedFormData, CutQuadrature,
    PairingConfig, TestScalarField, TestVectorField,
};
use riemgeo::Model;

fn model(name: &str) -> Model {
    ModelSpec::new(name).build().unwrap()
}

fn pt(x: f64, y: f64) -> ChartPoint<f64> {
    ChartPoint::new(vec![x, y])
}

fn e(x: f64, y: f64) -> DVector<f64> {
    DVector::from_vec(vec![x, y])
}

/// Cut samples around a torus window, shared across tests.
fn torus_cut(model: &Model, n: usize) -> CutQuadrature<f64> {
    let cfg = CutConfig::default();
    let samples = cut_quadrature_samples(
        model,
        &pt(0.0, 0.0),
        n,
        &cfg,
        None,
        &pt(0.5, 0.25),
        0.45,
    )
    .unwrap();
    CutQuadrature::new(samples)
}

#[test]
fn covariant_divdiv_satisfies_integration_by_parts_on_the_sphere() {
    // For smooth f, ∫ f ∇_j∇_i(V^iV^j) dVol = ∫ Hess f(V,V) dVol. With
    // f = cosθ on the unit sphere, Hess f = −cosθ · g, so the right side is
    // −∫ cosθ |V|²_g dVol. This exercises Γ and ∂Γ in the assembly.
    let m = model("sphere");
    let field = TestVectorField::constant(pt(1.2, 1.0), 0.35, 1.0, e(1.0, 0.4));
    let (lo, hi) = field.support_box();
    let lhs = grid_quadrature(&lo, &hi, 512, |x, y| {
        let p = pt(x, y);
        let f = p.coords[0].cos();
        f * divdiv_vv(&m, &p, &field).unwrap() * m.volume_density(&p).unwrap()
    });
    let rhs = grid_quadrature(&lo, &hi, 512, |x, y| {
        let p = pt(x, y);
        let g = m.metric_at(&p).unwrap();
        let v = field.eval(&p).value;
        let vv = (&g * &v).dot(&v);
        -p.coords[0].cos() * vv * m.volume_density(&p).unwrap()
    });
    assert!(
        (lhs - rhs).abs() < 1e-6,
        "integration by parts: lhs {lhs} vs rhs {rhs}"
    );
}

#[test]
fn flat_plane_pairing_has_no_singular_part() {
    let m = model("plane");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let field = TestVectorField::constant(pt(1.2, 0.5), 0.4, 1.0, e(0.8, -0.6));
    let cfg = PairingConfig::<f64>::default();
    let lhs = pairing_lhs_hessian_n(&m, &src, &field, cfg.grid_n).unwrap();
    let rhs_ac = pairing_rhs_ac_hessian_n(&m, &src, &field, cfg.grid_n, 0).unwrap();
    assert!(
        (lhs - rhs_ac).abs() < 1e-6,
        "smooth case: lhs {lhs} vs classical {rhs_ac}"
    );
}

#[test]
fn lhs_pairing_is_exactly_even_in_the_field() {
    let m = model("torus");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let plus = TestVectorField::constant(pt(0.5, 0.25), 0.2, 1.0, e(1.0, 0.3));
    let minus = TestVectorField::constant(pt(0.5, 0.25), 0.2, -1.0, e(1.0, 0.3));
    let a = pairing_lhs_hessian_n(&m, &src, &plus, 128).unwrap();
    let b = pairing_lhs_hessian_n(&m, &src, &minus, 128).unwrap();
    assert_eq!(a, b, "V ↦ −V leaves V⊗V bitwise unchanged");
}

#[test]
fn torus_hessian_decomposition_with_refinement_order() {
    let m = model("torus");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let cut = torus_cut(&m, 2048);
    let fields = [
        TestVectorField::constant(pt(0.5, 0.25), 0.2, 1.0, e(1.0, 0.0)),
        TestVectorField::constant(pt(0.5, 0.25), 0.2, 1.0, e(0.6, 0.8)),
        TestVectorField::rotating(pt(0.5, 0.25), 0.2, 1.0),
    ];
    for field in &fields {
        // Reference: high-resolution quadrature (computed, never entered).
        let lhs_ref = pairing_lhs_hessian_n(&m, &src, field, 2048).unwrap();
        let rhs_ref = pairing_rhs_ac_hessian_n(&m, &src, field, 2048, 6).unwrap();
        let (sing, _) = cut.hessian_pairing(&m, field, 2e-2).unwrap();
        let residual_ref = (lhs_ref - (rhs_ref - sing)).abs();

        let mut residuals = Vec::new();
        for n in [256usize, 512] {
            let mut cfg = PairingConfig::<f64>::default();
            cfg.grid_n = n;
            let report = hessian_decomposition_report(&m, &src, &cut, field, &cfg).unwrap();
            assert!(
                report.relative_residual.abs() < 1e-3,
                "grid {n}: relative residual {}",
                report.relative_residual
            );
            residuals.push((report.residual - (lhs_ref - (rhs_ref - sing))).abs());
        }
        // Order of the quadrature error against the reference value.
        let order = (residuals[0] / residuals[1]).log2();
        assert!(
            order >= 1.5,
            "refinement order {order:.2} (errors {residuals:?}, ref residual {residual_ref:.2e})"
        );
    }
}

#[test]
fn torus_singular_pairing_matches_1d_closed_form_oracle() {
    // Oracle: the cut segment {x = 1/2} parametrized by y, jump(y) =
    // 1/sqrt(1/4 + y²), against V = ψ e_x: ∫ jump(y) ψ(y)² dy by Simpson.
    let m = model("torus");
    let cut = torus_cut(&m, 4096);
    let field = TestVectorField::constant(pt(0.5, 0.25), 0.2, 1.0, e(1.0, 0.0));
    let (engine, used) = cut.hessian_pairing(&m, &field, 2e-2).unwrap();
    assert!(used > 100, "needs a dense in-support sample set");

    let n = 20_000;
    let (y0, y1) = (0.05, 0.45);
    let h = (y1 - y0) / n as f64;
    let f = |y: f64| {
        let jump = 1.0 / (0.25f64 + y * y).sqrt();
        let s = ((y - 0.25f64) / 0.2).abs();
        let psi = if s < 1.0 {
            (1.0 / (s * s - 1.0)).exp()
        } else {
            0.0
        };
        jump * psi * psi
    };
    let mut oracle = f(y0) + f(y1);
    for i in 1..n {
        oracle += f(y0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    oracle *= h / 3.0;
    assert!(
        (engine - oracle).abs() < 1e-3 * oracle,
        "pushforward {engine} vs 1D oracle {oracle}"
    );
}

#[test]
fn tangent_and_offcut_fields_see_no_singular_part() {
    let m = model("torus");
    let cut = torus_cut(&m, 2048);
    // Tangent to the cut: g(ν, V) = 0 up to the normal's resolution.
    let tangent = TestVectorField::constant(pt(0.5, 0.25), 0.2, 1.0, e(0.0, 1.0));
    let (sing, _) = cut.hessian_pairing(&m, &tangent, 2e-2).unwrap();
    assert!(sing.abs() < 1e-8, "tangential field: {sing:.2e}");
    // Support off the cut: the sum is empty, exactly zero.
    let off = TestVectorField::constant(pt(0.25, 0.25), 0.15, 1.0, e(1.0, 0.0));
    let (sing, used) = cut.hessian_pairing(&m, &off, 2e-2).unwrap();
    assert_eq!(sing, 0.0);
    assert_eq!(used, 0);
}

#[test]
fn laplacian_pairing_reports() {
    let m = model("torus");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let cut = torus_cut(&m, 2048);
    let cfg = PairingConfig::<f64>::default();
    // Cut-crossing bump.
    let phi = TestScalarField::new(pt(0.5, 0.25), 0.2, 1.0);
    let report = pairing_laplacian(&m, &src, &cut, &phi, &cfg).unwrap();
    assert!(
        report.relative_residual.abs() < 1e-3,
        "torus bump residual {}",
        report.relative_residual
    );
    assert!(report.rhs_sing > 0.0);

    // Smooth-region bump: lhs equals the classical integral.
    let phi = TestScalarField::new(pt(0.25, 0.2), 0.15, 1.0);
    let lhs = pairing_lhs_laplacian_n(&m, &src, &phi, 512).unwrap();
    let classical = pairing_rhs_ac_laplacian_n(&m, &src, &phi, 512, 0).unwrap();
    assert!((lhs - classical).abs() < 1e-6);
}

#[test]
fn sphere_laplacian_pairing_away_from_the_antipode() {
    let m = model("sphere");
    let apex = pt(std::f64::consts::FRAC_PI_2, 0.0);
    let src = ClosedFormData {
        model: &m,
        apex: apex.clone(),
    };
    // The sphere's cut locus is the antipodal point; any sample set there
    // carries zero weight, so the singular side is empty.
    let cut = CutQuadrature::new(Vec::new());
    let cfg = PairingConfig::<f64>::default();
    let phi = TestScalarField::new(pt(1.1, 1.2), 0.3, 1.0);
    let report = pairing_laplacian(&m, &src, &cut, &phi, &cfg).unwrap();
    assert_eq!(report.rhs_sing, 0.0);
    assert!(
        report.relative_residual.abs() < 1e-3,
        "sphere residual {} (lhs {}, rhs_ac {})",
        report.relative_residual,
        report.lhs,
        report.rhs_ac
    );
}

#[test]
fn comparison_margins() {
    let cfg = PairingConfig::<f64>::default();
    // Sphere, K = 1: the comparison is an equality; the margin is pure
    // quadrature noise and must sit at ~1e-6.
    let m = model("sphere");
    let src = ClosedFormData {
        model: &m,
        apex: pt(std::f64::consts::FRAC_PI_2, 0.0),
    };
    for center in [pt(1.0, 1.0), pt(2.0, 4.4), pt(1.4, 2.2)] {
        let phi = TestScalarField::new(center, 0.3, 1.0);
        let rep = verify_comparison_laplacian(&m, &src, &phi, 1.0, &cfg).unwrap();
        assert!(rep.margin >= -1e-4, "sphere margin {}", rep.margin);
        assert!(rep.margin.abs() < 1e-3, "sphere equality case {}", rep.margin);
    }
    // Torus, K = 0: strict positive margin on a cut-crossing bump, equal to
    // the jump integral within quadrature error.
    let m = model("torus");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let cut = torus_cut(&m, 2048);
    let phi = TestScalarField::new(pt(0.5, 0.25), 0.2, 1.0);
    let rep = verify_comparison_laplacian(&m, &src, &phi, 0.0, &cfg).unwrap();
    let (jump_phi, _) = cut.laplacian_pairing(&m, &phi, 2e-2).unwrap();
    assert!(rep.margin > 0.0, "strict margin, got {}", rep.margin);
    assert!(
        (rep.margin - jump_phi).abs() < 1e-3 * jump_phi,
        "margin {} vs jump integral {jump_phi}",
        rep.margin
    );
}

#[test]
fn lower_bound_slack_formula_on_the_torus() {
    let m = model("torus");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let cut = torus_cut(&m, 2048);
    let cfg = PairingConfig::<f64>::default();
    let phi = TestScalarField::new(pt(0.5, 0.25), 0.2, 1.0);
    let rep = verify_lower_bound_laplacian(&m, &src, &cut, &phi, &cfg).unwrap();
    assert!(rep.slack >= -1e-6, "lower bound violated: {}", rep.slack);
    // Identity route: slack = ∫ (2 − jump) φ dH¹, computed independently
    // from the closed-form jump by 1D quadrature.
    let n = 20_000;
    let (y0, y1) = (0.05, 0.45);
    let h = (y1 - y0) / n as f64;
    let f = |y: f64| {
        let jump = 1.0 / (0.25f64 + y * y).sqrt();
        let s = ((y - 0.25f64) / 0.2).abs();
        let psi = if s < 1.0 {
            (1.0 / (s * s - 1.0)).exp()
        } else {
            0.0
        };
        (2.0 - jump) * psi
    };
    let mut oracle = f(y0) + f(y1);
    for i in 1..n {
        oracle += f(y0 + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    oracle *= h / 3.0;
    assert!(
        (rep.slack - oracle).abs() < 1e-3 * oracle.max(1.0),
        "slack {} vs oracle {oracle}",
        rep.slack
    );
    assert!(
        (rep.slack_formula - oracle).abs() < 1e-3 * oracle.max(1.0),
        "formula route {} vs oracle {oracle}",
        rep.slack_formula
    );
}

#[test]
fn rank_one_structure_of_the_singular_tensor() {
    let cfg = PairingConfig::<f64>::default();
    let m = model("torus");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let rep = rank_one_reconstruction(&m, &src, &pt(0.5, 0.25), 0.2, &cfg).unwrap();
    assert!(
        rep.ratio < 1e-3,
        "torus window eigenvalue ratio {} (λ = {:?})",
        rep.ratio,
        rep.eigenvalues
    );
}

#[test]
fn support_validation_errors() {
    let m = model("torus");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let cfg = PairingConfig::<f64>::default();
    // Touches the apex exclusion ball.
    let err = validate_support(&m, &src, &pt(0.06, 0.0), 0.05, &cfg);
    assert!(err.is_err());
    // Outside a non-periodic chart axis.
    let m = model("plane");
    let src = ClosedFormData {
        model: &m,
        apex: pt(0.0, 0.0),
    };
    let err = validate_support(&m, &src, &pt(49.9, 0.0), 0.3, &cfg);
    assert!(err.is_err());
}
