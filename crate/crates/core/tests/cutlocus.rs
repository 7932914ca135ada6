//! Cut-locus engine checks against shift-enumeration, unwrapping and
//! great-circle oracles.

use riemgeo::cutlocus::{
    approximate_tangent_pca, classify_cutpoint, cut_time, distance, hull_distance,
    minimal_geodesics, sample_cutlocus, second_difference_quotient, semiconcavity_probe,
    superdifferential_extremals, CutClass, CutConfig,
};
use riemgeo::manifold::{ChartPoint, ModelSpec};
use riemgeo::Model;

fn model(name: &str) -> Model {
    ModelSpec::new(name).build().unwrap()
}

fn pt(x: f64, y: f64) -> ChartPoint<f64> {
    ChartPoint::new(vec![x, y])
}

fn cfg() -> CutConfig<f64> {
    CutConfig::default()
}

/// Shift-enumeration oracle for the torus cut time from the origin:
/// the ray at angle α leaves the Voronoi square at 1/(2 max(|cos|, |sin|)).
fn torus_sigma_oracle(alpha: f64) -> f64 {
    0.5 / alpha.cos().abs().max(alpha.sin().abs())
}

#[test]
fn distance_examples() {
    let torus = model("torus");
    let d = distance(&torus, &pt(0.0, 0.0), &pt(0.5, 0.25), &cfg()).unwrap();
    assert!((d - 0.5590169943749474).abs() < 1e-12);

    let sphere = model("sphere");
    let d = distance(&sphere, &pt(1e-12, 0.0), &pt(1.2, 0.7), &cfg()).unwrap();
    assert!((d - 1.2).abs() < 1e-9);

    let any = model("cylinder");
    let p = pt(1.0, 2.0);
    assert_eq!(distance(&any, &p, &p, &cfg()).unwrap(), 0.0);
}

#[test]
fn ellipsoid_distance_agrees_with_shooting_both_ways() {
    // No closed form: the multistart value must at least be symmetric and
    // satisfy the triangle inequality against a third point.
    let m = model("ellipsoid");
    let c = cfg();
    let a = pt(0.9, 0.4);
    let b = pt(1.8, 2.9);
    let mid = pt(1.3, 1.6);
    let dab = distance(&m, &a, &b, &c).unwrap();
    let dba = distance(&m, &b, &a, &c).unwrap();
    assert!((dab - dba).abs() < 1e-5, "symmetry gap {:.2e}", dab - dba);
    let dam = distance(&m, &a, &mid, &c).unwrap();
    let dmb = distance(&m, &mid, &b, &c).unwrap();
    assert!(dab <= dam + dmb + 1e-6);
}

#[test]
fn torus_minimal_geodesic_counts() {
    let m = model("torus");
    let c = cfg();
    let p = pt(0.0, 0.0);
    let (hits, degenerate) = minimal_geodesics(&m, &p, &pt(0.5, 0.25), &c).unwrap();
    assert_eq!(hits.len(), 2, "cut point away from corners");
    assert!(!degenerate);
    let (hits, _) = minimal_geodesics(&m, &p, &pt(0.5, 0.5), &c).unwrap();
    assert_eq!(hits.len(), 4, "corner point");
    let (hits, _) = minimal_geodesics(&m, &p, &pt(0.1, 0.0), &c).unwrap();
    assert_eq!(hits.len(), 1, "smooth point");
}

#[test]
fn sphere_antipode_has_a_continuum_capped() {
    let m = model("sphere");
    let p = pt(1.0, 1.0);
    // Antipode of (θ, φ) is (π−θ, φ+π).
    let q = pt(std::f64::consts::PI - 1.0, 1.0 + std::f64::consts::PI);
    let (hits, degenerate) = minimal_geodesics(&m, &p, &q, &cfg()).unwrap();
    assert!(degenerate, "antipode is conjugate-degenerate");
    assert!(hits.len() >= 32, "continuum capped at the start budget");
}

#[test]
fn cut_time_oracles() {
    let torus = model("torus");
    let sigma = cut_time(&torus, &pt(0.0, 0.0), 0.0, &cfg()).unwrap().unwrap();
    assert!((sigma - 0.5).abs() < 1e-8, "torus axis direction: {sigma}");
    for alpha in [0.3, 1.1, 2.0, 4.5] {
        let sigma = cut_time(&torus, &pt(0.0, 0.0), alpha, &cfg()).unwrap().unwrap();
        assert!(
            (sigma - torus_sigma_oracle(alpha)).abs() < 1e-7,
            "alpha {alpha}: {sigma} vs {}",
            torus_sigma_oracle(alpha)
        );
    }

    let sphere = model("sphere");
    for alpha in [0.0, 0.9, 3.3] {
        let sigma = cut_time(&sphere, &pt(1.2, 0.4), alpha, &cfg()).unwrap().unwrap();
        assert!((sigma - std::f64::consts::PI).abs() < 1e-6, "sphere {sigma}");
    }

    let plane = model("plane");
    let mut c = cfg();
    c.t_max = Some(20.0);
    assert!(cut_time(&plane, &pt(0.0, 0.0), 0.7, &c).unwrap().is_none());
}

#[test]
fn classification_matches_the_dichotomy() {
    let sphere = model("sphere");
    let rec = classify_cutpoint(&sphere, &pt(1.1, 0.3), 0.8, &cfg()).unwrap();
    assert_eq!(rec.class, CutClass::Both);
    let sigma = rec.sigma.unwrap();
    let conj = rec.conj.unwrap();
    assert!((sigma - std::f64::consts::PI).abs() < 1e-6);
    assert!((conj - std::f64::consts::PI).abs() < 1e-6);
    assert!(sigma <= conj + 1e-5, "cut before conjugate");

    let torus = model("torus");
    let rec = classify_cutpoint(&torus, &pt(0.0, 0.0), 0.0, &cfg()).unwrap();
    assert_eq!(rec.class, CutClass::Sing);
    assert_eq!(rec.geodesic_count, 2);
    assert!(rec.conj.is_none());

    let cyl = model("cylinder");
    let rec = classify_cutpoint(&cyl, &pt(0.0, 0.0), 0.0, &cfg()).unwrap();
    assert_eq!(rec.class, CutClass::Sing);
    assert_eq!(rec.geodesic_count, 2);
}

#[test]
fn torus_cut_samples_lie_on_the_analytic_cross() {
    let m = model("torus");
    let scan = sample_cutlocus(&m, &pt(0.0, 0.0), 64, &cfg()).unwrap();
    assert_eq!(scan.records.len(), 64);
    for s in &scan.samples {
        let x = s.q.coords[0];
        let y = s.q.coords[1];
        let on_cross = (x - 0.5).abs() < 1e-6 || (y - 0.5).abs() < 1e-6;
        assert!(on_cross, "sample {:?} off the cross", s.q.coords.as_slice());
        assert!(s.jump > 0.0 && s.jump <= 2.0);
        assert!(s.record.sigma.unwrap() <= s.record.conj.unwrap_or(f64::INFINITY) + 1e-5);
    }
    // Jump at (0.5, 0.25): 1/sqrt(0.3125) from the shift oracle.
    let near = scan
        .samples
        .iter()
        .min_by(|a, b| {
            let da = m.chart_distance(&a.q, &pt(0.5, 0.25));
            let db = m.chart_distance(&b.q, &pt(0.5, 0.25));
            da.partial_cmp(&db).unwrap()
        })
        .unwrap();
    // The nearest sampled point sits within the direction resolution; check
    // its jump against the oracle evaluated at the *sampled* location.
    let y = near.q.coords[1];
    let r = (0.25 + y * y).sqrt();
    let oracle = 1.0 / r;
    assert!(
        (near.jump - oracle).abs() < 1e-5,
        "jump {} vs oracle {oracle}",
        near.jump
    );
    // Normal at the vertical segment is ±e_x; tangent is e_y.
    assert!(near.nu[1].abs() < 1e-4);
    assert!((near.tangent[0]).abs() < 1e-4);
}

#[test]
fn torus_pushforward_weights_recover_total_cut_length() {
    // H¹ of the cut locus of the square torus is 2 (two unit segments).
    // The four corner-hitting directions (multiplicity 4) are flagged and
    // excluded, removing their direction slivers from the sum.
    let m = model("torus");
    let n = 256;
    let scan = sample_cutlocus(&m, &pt(0.0, 0.0), n, &cfg()).unwrap();
    let total: f64 = scan.samples.iter().map(|s| s.weight).sum();
    let delta = std::f64::consts::TAU / n as f64;
    // |dq/dα| = 1 at the corner directions; each excluded sliver carries
    // |dq/dα|·Δα / 2 of length.
    let excluded = 4.0 * delta / 2.0;
    assert!(
        (total - (2.0 - excluded)).abs() < 2e-2,
        "pushforward total {total} vs analytic {}",
        2.0 - excluded
    );
}

#[test]
fn cylinder_jump_saturates_at_the_opposite_line() {
    let m = model("cylinder");
    let scan = sample_cutlocus(&m, &pt(0.0, 0.0), 64, &cfg()).unwrap();
    // Direction α = 0 is the pure angular direction: q = (π, 0).
    let s0 = scan
        .samples
        .iter()
        .find(|s| s.record.alpha.abs() < 1e-12)
        .expect("angular direction has finite cut time");
    assert!((s0.q.coords[0] - std::f64::consts::PI).abs() < 1e-6);
    assert!(s0.q.coords[1].abs() < 1e-6);
    assert!((s0.jump - 2.0).abs() < 1e-4, "saturated jump, got {}", s0.jump);
    // Off z = 0 the jump follows 2π / sqrt(π² + z²).
    for s in &scan.samples {
        let z = s.q.coords[1];
        let oracle = std::f64::consts::TAU / (std::f64::consts::PI.powi(2) + z * z).sqrt();
        assert!((s.jump - oracle).abs() < 1e-5, "z = {z}");
        assert!(s.jump <= 2.0);
    }
    // Axial directions escape: some records have no finite cut time.
    assert!(scan.records.iter().any(|r| r.sigma.is_none()));
}

#[test]
fn sphere_samples_collapse_to_the_antipode_and_are_flagged() {
    let m = model("sphere");
    let p = pt(std::f64::consts::FRAC_PI_2, 0.0);
    let scan = sample_cutlocus(&m, &p, 16, &cfg()).unwrap();
    let antipode = pt(std::f64::consts::FRAC_PI_2, std::f64::consts::PI);
    for s in &scan.samples {
        assert!(
            riemgeo::cutlocus::gap_to(&m, &s.q, &antipode) < 1e-4,
            "sample {:?} not at the antipode",
            s.q.coords.as_slice()
        );
        assert_eq!(s.record.class, CutClass::Both);
        assert!(s.flagged, "conjugate-degenerate samples are excluded");
        assert_eq!(s.weight, 0.0);
    }
    let h1: f64 = scan.samples.iter().map(|s| s.weight).sum();
    assert!(h1.abs() < 1e-12, "point cut locus carries no H¹ mass");
}

#[test]
fn superdifferential_counts_match_geodesic_counts() {
    let m = model("torus");
    let c = cfg();
    let p = pt(0.0, 0.0);
    let set = superdifferential_extremals(&m, &p, &pt(0.1, 0.0), &c).unwrap();
    assert_eq!(set.extremals.len(), 1);
    // At a differentiability point the singleton is the differential:
    // d d_p = (x - p)/|x - p| lowered with the flat metric.
    assert!((set.extremals[0][0] - 1.0).abs() < 1e-6);
    assert!(set.extremals[0][1].abs() < 1e-6);

    let set = superdifferential_extremals(&m, &p, &pt(0.5, 0.25), &c).unwrap();
    assert_eq!(set.extremals.len(), 2);
    let set = superdifferential_extremals(&m, &p, &pt(0.5, 0.5), &c).unwrap();
    assert_eq!(set.extremals.len(), 4);
}

#[test]
fn upper_semicontinuity_along_sequences_into_the_cut() {
    let m = model("torus");
    let c = cfg();
    let p = pt(0.0, 0.0);
    // Sequences approaching (0.5, 0.25) from the two sides; the covector
    // gap scales with the distance to the cut, so the tail must get close.
    for side in [-1.0, 1.0] {
        let mut seq: Vec<ChartPoint<f64>> = (1..=5)
            .map(|j| pt(0.5 + side * 10f64.powi(-j), 0.25))
            .collect();
        seq.push(pt(0.5, 0.25));
        let ok =
            riemgeo::cutlocus::upper_semicontinuity_probe(&m, &p, &seq, 1e-3, &c).unwrap();
        assert!(ok, "side {side}");
    }
    // The one-sided limit covector agrees with the matching extremal.
    let set = superdifferential_extremals(&m, &p, &pt(0.5 - 1e-4, 0.25), &c).unwrap();
    let limit = superdifferential_extremals(&m, &p, &pt(0.5, 0.25), &c).unwrap();
    assert_eq!(set.extremals.len(), 1);
    assert!(hull_distance(&set.extremals[0], &limit.extremals) < 1e-3);
}

#[test]
fn semiconcavity_probe_flat_plane_annulus() {
    // Hess |x| = (g − dr⊗dr)/r: the largest second quotient over an annulus
    // r ∈ [r_min, r_max] is 1/r_min. Richardson extrapolation over the three
    // probe scales removes the O(h²) bias.
    let m = model("plane");
    let c = cfg();
    let p = pt(0.0, 0.0);
    let r_min = 0.1;
    let region: Vec<ChartPoint<f64>> = (0..32)
        .map(|k| {
            let a = k as f64 * std::f64::consts::TAU / 32.0;
            pt(r_min * a.cos(), r_min * a.sin())
        })
        .collect();
    let hs = [1e-2, 5e-3, 2.5e-3];
    let cs: Vec<f64> = hs
        .iter()
        .map(|&h| semiconcavity_probe(&m, &p, &region, h, &c).unwrap())
        .collect();
    // Bounded above uniformly in h.
    for v in &cs {
        assert!(*v <= 1.0 / r_min + 1e-6);
    }
    // Two Richardson steps on the h² expansion: error O(h⁶).
    let r1 = (4.0 * cs[1] - cs[0]) / 3.0;
    let r2 = (4.0 * cs[2] - cs[1]) / 3.0;
    let extrapolated = (16.0 * r2 - r1) / 15.0;
    assert!(
        (extrapolated - 1.0 / r_min).abs() < 1e-6,
        "extrapolated {extrapolated}"
    );
}

#[test]
fn semiconcavity_probe_torus_annulus_and_cut_divergence() {
    let m = model("torus");
    let c = cfg();
    let p = pt(0.0, 0.0);
    // Annulus 0.1 < |x| < 0.45 avoids the cut locus: bounded by 1/0.1.
    let mut region = Vec::new();
    for ring in 0..4 {
        let r = 0.1 + 0.1 * ring as f64;
        for k in 0..16 {
            let a = k as f64 * std::f64::consts::TAU / 16.0;
            if r < 0.45 {
                region.push(pt(r * a.cos(), r * a.sin()));
            }
        }
    }
    let cmax = semiconcavity_probe(&m, &p, &region, 5e-3, &c).unwrap();
    assert!(cmax <= 1.0 / 0.1 + 1e-2, "C = {cmax}");

    // Across the cut {x = 1/2} the lower quotient diverges like −jump/h.
    let x_cut = pt(0.5, 0.25);
    let jump = 1.0 / (0.25f64 + 0.25 * 0.25).sqrt();
    for h in [1e-2, 5e-3, 2.5e-3] {
        let q = second_difference_quotient(&m, &p, &x_cut, 0, h, &c).unwrap();
        let predicted = -jump / h;
        assert!(
            (q - predicted).abs() < 0.1 * predicted.abs(),
            "h={h}: q={q}, predicted {predicted}"
        );
    }
}

#[test]
fn pca_tangent_matches_analytic_cut_direction() {
    let m = model("torus");
    let scan = sample_cutlocus(&m, &pt(0.0, 0.0), 256, &cfg()).unwrap();
    // Collect samples on the vertical segment {x = 1/2} near y = 0.25.
    let cloud: Vec<ChartPoint<f64>> = scan
        .samples
        .iter()
        .filter(|s| (s.q.coords[0] - 0.5).abs() < 1e-6)
        .map(|s| s.q.clone())
        .collect();
    assert!(cloud.len() >= 12);
    let center = pt(0.5, 0.25);
    let dir = approximate_tangent_pca(&m, &cloud, &center, 10);
    // The analytic tangent of {x = 1/2} is e_y.
    let angle = dir[0].abs().atan2(dir[1].abs());
    assert!(angle < 1e-2, "PCA line off by {angle} rad");
}
