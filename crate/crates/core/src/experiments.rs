//! Experiment drivers shared by the CLI and the acceptance suite: seeded
//! test-field generation, canonical field suites, and per-model wiring of
//! the distance source (closed forms or the polar field).

use nalgebra::DVector;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cutlocus::distfield::FieldConfig;
use crate::cutlocus::{
    cut_quadrature_samples, sample_cutlocus, sample_cutlocus_with, CutConfig, CutScan,
    DistanceField,
};
use crate::error::MeasureError;
use crate::manifold::{ChartPoint, ManifoldModel};
use crate::measure::{
    hessian_decomposition_report, pairing_laplacian, rank_one_reconstruction,
    verify_comparison_laplacian, verify_lower_bound_laplacian, ClosedFormData, ComparisonReport,
    CutQuadrature, DistanceData, FieldData, LowerBoundReport, PairingConfig, PairingReport,
    RankOneReport, TestScalarField, TestVectorField,
};
use crate::num::Real;

/// Default apex per model: a generic point clear of chart degeneracies.
pub fn default_apex<T: Real>(model_name: &str) -> ChartPoint<T> {
    match model_name {
        "sphere" => ChartPoint::new(vec![T::of(std::f64::consts::FRAC_PI_2), T::zero()]),
        "ellipsoid" => ChartPoint::new(vec![T::of(std::f64::consts::FRAC_PI_3), T::zero()]),
        _ => ChartPoint::new(vec![T::zero(), T::zero()]),
    }
}

/// Distance data for a model: closed forms when available, otherwise the
/// geodesic-polar field (built once).
pub enum Source<'m, T: nalgebra::Scalar> {
    Closed(ClosedFormData<'m, T>),
    Field(Box<DistanceField<T>>, &'m ManifoldModel<T>),
}

impl<'m, T: Real> Source<'m, T> {
    pub fn build(model: &'m ManifoldModel<T>, apex: &ChartPoint<T>) -> Result<Self, MeasureError> {
        if model.has_closed_form_distance() {
            Ok(Source::Closed(ClosedFormData {
                model,
                apex: apex.clone(),
            }))
        } else {
            let field = DistanceField::build(model, apex, FieldConfig::default())?;
            Ok(Source::Field(Box::new(field), model))
        }
    }

}

/// Borrowing view implementing `DistanceData` for both source kinds.
pub struct SourceData<'a, T: nalgebra::Scalar> {
    closed: Option<&'a ClosedFormData<'a, T>>,
    field: Option<FieldData<'a, T>>,
}

impl<'m, T: Real> Source<'m, T> {
    pub fn as_data(&self) -> SourceData<'_, T> {
        match self {
            Source::Closed(c) => SourceData {
                closed: Some(c),
                field: None,
            },
            Source::Field(f, m) => SourceData {
                closed: None,
                field: Some(FieldData { model: m, field: f }),
            },
        }
    }
}

impl<'a, T: Real> DistanceData<T> for SourceData<'a, T> {
    fn minimal(
        &self,
        x: &ChartPoint<T>,
    ) -> Result<crate::measure::MinimalBranch<T>, MeasureError> {
        match (&self.closed, &self.field) {
            (Some(c), _) => c.minimal(x),
            (_, Some(f)) => f.minimal(x),
            _ => unreachable!(),
        }
    }

    fn branch_gap(&self, x: &ChartPoint<T>) -> Result<T, MeasureError> {
        match (&self.closed, &self.field) {
            (Some(c), _) => c.branch_gap(x),
            (_, Some(f)) => f.branch_gap(x),
            _ => unreachable!(),
        }
    }
}

/// Seeded random scalar bumps with valid supports: inside the chart, clear
/// of the apex exclusion ball, and (K > 0) inside the model-space domain.
pub fn seeded_bumps<T: Real>(
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
    src: &dyn DistanceData<T>,
    n: usize,
    seed: u64,
    k_positive: Option<T>,
    cfg: &PairingConfig<T>,
) -> Result<Vec<TestScalarField<T>>, MeasureError> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let boxed = model.sample_box();
    let mut out = Vec::new();
    let mut attempts = 0;
    while out.len() < n && attempts < 10_000 {
        attempts += 1;
        let radius = T::of(rng.gen_range(0.12..0.3));
        let cx = T::of(rng.gen_range(
            (boxed.lo[0] + radius).as_f64()..(boxed.hi[0] - radius).as_f64(),
        ));
        let cy = T::of(rng.gen_range(boxed.lo[1].as_f64()..boxed.hi[1].as_f64()));
        let center = ChartPoint::new(vec![cx, cy]);
        let field = TestScalarField::new(center.clone(), radius, T::one());
        // Validity: support clear of the apex and inside the ct_K domain.
        if crate::measure::validate_support(model, src, &center, radius, cfg).is_err() {
            continue;
        }
        if let Some(k) = k_positive {
            let limit = T::pi() / k.sqrt() - T::of(0.05);
            let mut ok = true;
            'outer: for i in 0..9 {
                for j in 0..9 {
                    let fx = T::of(i as f64 / 8.0) * T::of(2.0) - T::one();
                    let fy = T::of(j as f64 / 8.0) * T::of(2.0) - T::one();
                    let x = ChartPoint::new(vec![cx + radius * fx, cy + radius * fy]);
                    if src.distance(&x)? >= limit {
                        ok = false;
                        break 'outer;
                    }
                }
            }
            if !ok {
                continue;
            }
        }
        let _ = apex;
        out.push(field);
    }
    if out.len() < n {
        return Err(MeasureError::SupportOutsideChart);
    }
    Ok(out)
}

/// Canonical decomposition field suite of a model, at its standard window.
pub fn canonical_fields<T: Real>(model_name: &str) -> Vec<(String, TestVectorField<T>)> {
    let c = |x: f64, y: f64, r: f64, dx: f64, dy: f64, name: &str| {
        (
            name.to_string(),
            TestVectorField::constant(
                ChartPoint::new(vec![T::of(x), T::of(y)]),
                T::of(r),
                T::one(),
                DVector::from_vec(vec![T::of(dx), T::of(dy)]),
            ),
        )
    };
    match model_name {
        "torus" => vec![
            c(0.5, 0.25, 0.2, 1.0, 0.0, "normal"),
            c(0.5, 0.32, 0.15, 1.0, 0.0, "normal-offset"),
            c(0.5, 0.25, 0.2, 0.0, 1.0, "tangent"),
            c(0.5, 0.25, 0.2, std::f64::consts::FRAC_1_SQRT_2, std::f64::consts::FRAC_1_SQRT_2, "oblique"),
            c(0.5, 0.25, 0.2, 0.4472135954999579, -0.8944271909999159, "oblique-skew"),
        ],
        "cylinder" => vec![
            c(std::f64::consts::PI, 0.0, 0.4, 1.0, 0.0, "normal"),
            c(std::f64::consts::PI, 0.0, 0.4, 0.0, 1.0, "tangent"),
            c(std::f64::consts::PI, 0.2, 0.35, 0.6, 0.8, "oblique"),
        ],
        "plane" => vec![
            c(1.2, 0.5, 0.4, 0.8, -0.6, "smooth"),
            c(-0.8, 1.0, 0.35, 0.0, 1.0, "smooth-2"),
        ],
        "sphere" => vec![
            c(1.1, 1.2, 0.3, 1.0, 0.0, "smooth"),
            c(2.0, 4.0, 0.3, 0.5, 0.6, "smooth-2"),
        ],
        "ellipsoid" => vec![
            c(1.2, 1.3, 0.25, 1.0, 0.0, "smooth"),
            c(1.8, 4.5, 0.25, 0.0, 1.0, "smooth-2"),
        ],
        _ => Vec::new(),
    }
}

/// Cut window centers where the singular part is reconstructed.
pub fn cut_windows<T: Real>(model_name: &str) -> Vec<(ChartPoint<T>, T)> {
    match model_name {
        "torus" => vec![(ChartPoint::new(vec![T::of(0.5), T::of(0.25)]), T::of(0.2))],
        "cylinder" => vec![(
            ChartPoint::new(vec![T::of(std::f64::consts::PI), T::zero()]),
            T::of(0.4),
        )],
        _ => Vec::new(),
    }
}

/// Scan the cut locus; the ellipsoid routes its cut times through the
/// polar field.
pub fn run_cut_scan<T: Real>(
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
    source: &Source<'_, T>,
    n: usize,
    cfg: &CutConfig<T>,
) -> Result<CutScan<T>, crate::error::CutError> {
    match source {
        Source::Closed(_) => sample_cutlocus(model, apex, n, cfg),
        Source::Field(field, m) => {
            let sigma = |alpha: T| field.sigma_of_angle(m, alpha);
            sample_cutlocus_with(model, apex, n, cfg, Some(&sigma))
        }
    }
}

/// Dense cut samples covering a window, for singular quadrature.
pub fn run_cut_quadrature<T: Real>(
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
    source: &Source<'_, T>,
    n: usize,
    cfg: &CutConfig<T>,
    center: &ChartPoint<T>,
    radius: T,
) -> Result<CutQuadrature<T>, crate::error::CutError> {
    let samples = match source {
        Source::Closed(_) => {
            cut_quadrature_samples(model, apex, n, cfg, None, center, radius)?
        }
        Source::Field(field, m) => {
            let sigma = |alpha: T| field.sigma_of_angle(m, alpha);
            cut_quadrature_samples(model, apex, n, cfg, Some(&sigma), center, radius)?
        }
    };
    Ok(CutQuadrature::new(samples))
}

/// Full pairing experiment of one model: decomposition reports for the
/// canonical suite at two grids, a Laplacian report, the lower-bound
/// report and the rank-one reconstructions.
pub struct PairingExperiment<T: nalgebra::Scalar> {
    pub decomposition: Vec<(String, PairingReport, PairingReport)>,
    pub laplacian: Option<PairingReport>,
    pub lower_bound: Option<LowerBoundReport>,
    pub rank_one: Vec<RankOneReport>,
    pub cut_quadrature: Option<CutQuadrature<T>>,
}

pub fn run_pairing_experiment<T: Real>(
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
    source: &Source<'_, T>,
    cfg: &PairingConfig<T>,
    cut_cfg: &CutConfig<T>,
    cut_density: usize,
) -> Result<PairingExperiment<T>, MeasureError> {
    let data = source.as_data();
    let fields = canonical_fields::<T>(&model.name);
    let windows = cut_windows::<T>(&model.name);
    // Cut samples for the window region (empty quadrature off-cut models).
    let cut = if let Some((center, radius)) = windows.first() {
        Some(run_cut_quadrature(
            model,
            apex,
            source,
            cut_density,
            cut_cfg,
            center,
            *radius + T::of(0.25),
        )?)
    } else {
        None
    };
    let empty = CutQuadrature::new(Vec::new());
    let quad = cut.as_ref().unwrap_or(&empty);

    let mut decomposition = Vec::new();
    for (name, field) in &fields {
        let mut half = cfg.clone();
        half.grid_n = cfg.grid_n / 2;
        let coarse = hessian_decomposition_report(model, &data, quad, field, &half)?;
        let fine = hessian_decomposition_report(model, &data, quad, field, cfg)?;
        decomposition.push((name.clone(), coarse, fine));
    }

    let (laplacian, lower_bound, rank_one) = if let Some((center, radius)) = windows.first() {
        let phi = TestScalarField::new(center.clone(), *radius, T::one());
        let lap = pairing_laplacian(model, &data, quad, &phi, cfg)?;
        let low = verify_lower_bound_laplacian(model, &data, quad, &phi, cfg)?;
        let mut ones = Vec::new();
        for (c, r) in &windows {
            ones.push(rank_one_reconstruction(model, &data, c, *r, cfg)?);
        }
        (Some(lap), Some(low), ones)
    } else {
        (None, None, Vec::new())
    };

    Ok(PairingExperiment {
        decomposition,
        laplacian,
        lower_bound,
        rank_one,
        cut_quadrature: cut,
    })
}

/// Comparison experiment: seeded bumps against the model's lower curvature
/// bound, in the Laplacian form.
pub fn run_comparison_experiment<T: Real>(
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
    source: &Source<'_, T>,
    n_bumps: usize,
    seed: u64,
    cfg: &PairingConfig<T>,
) -> Result<Vec<ComparisonReport>, MeasureError> {
    let data = source.as_data();
    let k = model.curvature_bounds(None)[0];
    let k_pos = (k > T::zero()).then_some(k);
    let bumps = seeded_bumps(model, apex, &data, n_bumps, seed, k_pos, cfg)?;
    let mut out = Vec::new();
    for phi in &bumps {
        out.push(verify_comparison_laplacian(model, &data, phi, k, cfg)?);
    }
    Ok(out)
}
