//! The fixed corpus of the implication suite and the vector-field
//! reduction of the Hessian inequality to scalar operators.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::checkers::{
    check_barrier, check_distributional_1d, check_distributional_cases, check_viscosity,
    DistributionalCase, SearchBudget,
};
use super::types::{BoundData, CheckProblem, SampledFunction, SenseVerdict, Verdict};
use crate::error::MeasureError;
use crate::manifold::{ChartPoint, ManifoldModel, ModelSpec};
use crate::measure::{
    ct_k, grid_quadrature, pairing_lhs_hessian_n, ClosedFormData, TestVectorField,
};
use crate::num::Real;

/// One row of the implication table.
#[derive(Clone, Debug, Serialize)]
pub struct CorpusRow {
    pub name: String,
    pub verdict: SenseVerdict,
}

/// Result of the full suite with the implication cross-checks.
#[derive(Clone, Debug, Serialize)]
pub struct ImplicationTable {
    pub rows: Vec<CorpusRow>,
    /// No row has barrier = Holds and viscosity = Fails.
    pub barrier_implies_viscosity: bool,
    /// Viscosity and distributional agree on every decisive row.
    pub viscosity_matches_distributional: bool,
}

fn combine_barrier(verdicts: &[Verdict]) -> Verdict {
    if verdicts.iter().any(|v| *v == Verdict::Fails) {
        Verdict::Fails
    } else if verdicts.iter().all(|v| *v == Verdict::Holds) {
        Verdict::Holds
    } else {
        Verdict::Inconclusive
    }
}

/// 1D row: `f'' ≤ 0` at the origin in the three senses.
fn row_1d<T: Real>(
    name: &str,
    f: Arc<dyn Fn(&DVector<T>) -> T + Send + Sync>,
    scalar: Arc<dyn Fn(T) -> T + Send + Sync>,
) -> CorpusRow {
    let budget = SearchBudget::default();
    let problem = CheckProblem {
        f: SampledFunction::analytic(vec![T::of(-1.0)], vec![T::of(1.0)], f),
        bound: BoundData::Laplacian(Arc::new(|_: &DVector<T>| T::zero())),
        model: None,
    };
    let x = DVector::from_vec(vec![T::zero()]);
    let mut witnesses = Vec::new();
    // The barrier definition quantifies over every ε; probe two scales.
    let mut barrier_verdicts = Vec::new();
    for eps in [0.5, 1e-3] {
        let (v, mut w) = check_barrier(&problem, &x, T::of(eps), &budget);
        witnesses.append(&mut w);
        barrier_verdicts.push(v);
    }
    let barrier = combine_barrier(&barrier_verdicts);
    let (viscosity, mut w) = check_viscosity(&problem, &x, &budget);
    witnesses.append(&mut w);
    // Twenty bumps shrinking around the origin.
    let bumps: Vec<(T, T)> = (0..20)
        .map(|k| (T::zero(), T::of(0.4 * 0.8f64.powi(k))))
        .collect();
    let (distributional, mut w) =
        check_distributional_1d(&|t| scalar(t), &|_| T::zero(), &bumps);
    witnesses.append(&mut w);
    CorpusRow {
        name: name.to_string(),
        verdict: SenseVerdict {
            barrier,
            viscosity,
            distributional,
            witnesses,
        },
    }
}

/// Closed-form distance from a fixed apex as an owned evaluator.
fn distance_fn<T: Real>(
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
) -> Arc<dyn Fn(&DVector<T>) -> T + Send + Sync> {
    let model = model.clone();
    let apex = apex.clone();
    Arc::new(move |x: &DVector<T>| {
        model
            .closed_form_distance(&apex, &ChartPoint::from_vector(x.clone()))
            .expect("corpus models have closed forms")
    })
}

/// Model-space Hessian bound `ct_K(d_p(x))·(g − dr⊗dr)` built from the
/// minimal branch at `x`.
fn distance_bound<T: Real>(
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
    k: T,
) -> Arc<dyn Fn(&DVector<T>) -> DMatrix<T> + Send + Sync> {
    let model = model.clone();
    let apex = apex.clone();
    Arc::new(move |x: &DVector<T>| {
        let q = ChartPoint::from_vector(x.clone());
        let branches = model
            .distance_branches(&apex, &q)
            .expect("corpus models have closed forms");
        let b = &branches[0];
        let g = model.metric_at(&q).expect("interior point");
        let w = &g * &b.grad_at_target;
        (&g - &w * w.transpose()) * ct_k(k, b.length).expect("within the model domain")
    })
}

/// Distance row: `Hess d_p ≤ ct_K(d_p)(g − dr⊗dr)` at a point, plus the
/// distributional version over a small field suite near that point.
fn row_distance<T: Real>(
    name: &str,
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
    at: &ChartPoint<T>,
    k: T,
    field_windows: &[(ChartPoint<T>, T)],
) -> Result<CorpusRow, MeasureError> {
    let budget = SearchBudget::default();
    let bound_fn = distance_bound(model, apex, k);
    let problem = CheckProblem {
        f: SampledFunction::analytic(
            vec![T::of(-10.0), T::of(-10.0)],
            vec![T::of(10.0), T::of(10.0)],
            distance_fn(model, apex),
        ),
        bound: BoundData::Hessian(bound_fn.clone()),
        model: Some(model),
    };
    let x = at.coords.clone();
    let mut witnesses = Vec::new();
    let mut barrier_verdicts = Vec::new();
    for eps in [0.5, 1e-3] {
        let (v, mut w) = check_barrier(&problem, &x, T::of(eps), &budget);
        witnesses.append(&mut w);
        barrier_verdicts.push(v);
    }
    let barrier = combine_barrier(&barrier_verdicts);
    let (viscosity, mut w) = check_viscosity(&problem, &x, &budget);
    witnesses.append(&mut w);

    // Distributional: pair against constant-direction fields at the given
    // windows, reusing the measure-engine quadrature.
    let src = ClosedFormData {
        model,
        apex: apex.clone(),
    };
    let mut cases = Vec::new();
    for (center, radius) in field_windows {
        for dir in [
            DVector::from_vec(vec![T::one(), T::zero()]),
            DVector::from_vec(vec![T::zero(), T::one()]),
            DVector::from_vec(vec![T::of(0.6), T::of(0.8)]),
        ] {
            let field = TestVectorField::constant(center.clone(), *radius, T::one(), dir);
            let grid = 256;
            let lhs = pairing_lhs_hessian_n(model, &src, &field, grid)?;
            let (lo, hi) = field.support_box();
            let rhs = grid_quadrature(&lo, &hi, grid, |a, b| {
                let p = ChartPoint::new(vec![a, b]);
                let v = field.eval(&p).value;
                let amat = bound_fn(&p.coords);
                let vol = model.volume_density(&p).expect("support in chart");
                (&amat * &v).dot(&v) * vol
            });
            // Tolerance from one refinement step of the lhs.
            let lhs_coarse = pairing_lhs_hessian_n(model, &src, &field, grid / 2)?;
            let tol = (lhs - lhs_coarse).abs() * T::of(10.0) + T::of(1e-8);
            cases.push(DistributionalCase {
                label: format!("field at {:?}", center.coords.as_slice()),
                lhs,
                rhs,
                tol,
            });
        }
    }
    let (distributional, mut w) = check_distributional_cases(&cases);
    witnesses.append(&mut w);
    Ok(CorpusRow {
        name: name.to_string(),
        verdict: SenseVerdict {
            barrier,
            viscosity,
            distributional,
            witnesses,
        },
    })
}

/// Run the three checkers over the fixed corpus and record the implication
/// structure between the senses.
pub fn implication_suite<T: Real>() -> Result<ImplicationTable, MeasureError> {
    let mut rows = Vec::new();
    rows.push(row_1d(
        "-x^2",
        Arc::new(|x: &DVector<T>| -x[0] * x[0]),
        Arc::new(|t: T| -t * t),
    ));
    rows.push(row_1d(
        "x^2",
        Arc::new(|x: &DVector<T>| x[0] * x[0]),
        Arc::new(|t: T| t * t),
    ));
    rows.push(row_1d(
        "|x|",
        Arc::new(|x: &DVector<T>| x[0].abs()),
        Arc::new(|t: T| t.abs()),
    ));
    rows.push(row_1d(
        "-|x|",
        Arc::new(|x: &DVector<T>| -x[0].abs()),
        Arc::new(|t: T| -t.abs()),
    ));
    let osc = |t: T| {
        if t == T::zero() {
            T::zero()
        } else {
            t * t * (T::one() / t).sin()
        }
    };
    rows.push(row_1d(
        "x^2 sin(1/x)",
        Arc::new(move |x: &DVector<T>| osc(x[0])),
        Arc::new(osc),
    ));

    let torus: ManifoldModel<T> = ModelSpec::new("torus").build()?;
    let apex = ChartPoint::new(vec![T::zero(), T::zero()]);
    rows.push(row_distance(
        "d_p torus (cut point)",
        &torus,
        &apex,
        &ChartPoint::new(vec![T::of(0.5), T::of(0.25)]),
        T::zero(),
        &[
            (ChartPoint::new(vec![T::of(0.5), T::of(0.25)]), T::of(0.2)),
            (ChartPoint::new(vec![T::of(0.3), T::of(0.2)]), T::of(0.12)),
        ],
    )?);
    rows.push(row_distance(
        "d_p torus (smooth point)",
        &torus,
        &apex,
        &ChartPoint::new(vec![T::of(0.2), T::of(0.1)]),
        T::zero(),
        &[(ChartPoint::new(vec![T::of(0.2), T::of(0.1)]), T::of(0.08))],
    )?);

    let sphere: ManifoldModel<T> = ModelSpec::new("sphere").build()?;
    let s_apex = ChartPoint::new(vec![T::of(std::f64::consts::FRAC_PI_2), T::zero()]);
    rows.push(row_distance(
        "d_p sphere (smooth point)",
        &sphere,
        &s_apex,
        &ChartPoint::new(vec![T::of(1.1), T::of(1.2)]),
        T::one(),
        &[(ChartPoint::new(vec![T::of(1.1), T::of(1.2)]), T::of(0.25))],
    )?);

    let barrier_implies_viscosity = rows.iter().all(|r| {
        !(r.verdict.barrier == Verdict::Holds && r.verdict.viscosity == Verdict::Fails)
    });
    let viscosity_matches_distributional = rows.iter().all(|r| {
        let v = r.verdict.viscosity;
        let d = r.verdict.distributional;
        v == Verdict::Inconclusive || d == Verdict::Inconclusive || v == d
    });
    Ok(ImplicationTable {
        rows,
        barrier_implies_viscosity,
        viscosity_matches_distributional,
    })
}

/// Report of the scalar reduction along a vector field `W`.
#[derive(Clone, Debug, Serialize)]
pub struct ReductionReport {
    pub scalar_viscosity: Verdict,
    pub scalar_distributional: Verdict,
    pub full_viscosity: Verdict,
    pub full_distributional: Verdict,
    pub agree: bool,
    /// LHS of the scalar pairing along the φ_n approximation steps.
    pub approximation_lhs: Vec<f64>,
}

/// Check `−W^iW^j Hess_{ij} d_p + A_{ij}W^iW^j ≥ 0` along `W = ψ·w` in
/// viscosity and distributional sense and compare with the full Hessian
/// verdicts at the same point.
///
/// The distributional route pairs against `W^iW^j φ_n` with
/// `φ_n = ψ² + 1/n` (so `φ_n ≡ φ + 1/n` on supp W with `φ = ψ²`): the
/// `ψ⁴`-profile part is the squared-profile field pairing and the `1/n`
/// remainder reuses the plain `ψ²` pairing.
pub fn hessian_to_scalar_reduction<T: Real>(
    model: &ManifoldModel<T>,
    apex: &ChartPoint<T>,
    at: &ChartPoint<T>,
    k: T,
    w_dir: DVector<T>,
    window: (ChartPoint<T>, T),
) -> Result<ReductionReport, MeasureError> {
    let budget = SearchBudget::default();
    let bound_fn = distance_bound(model, apex, k);
    let f = distance_fn(model, apex);
    let scalar_problem = CheckProblem {
        f: SampledFunction::analytic(
            vec![T::of(-10.0), T::of(-10.0)],
            vec![T::of(10.0), T::of(10.0)],
            f.clone(),
        ),
        bound: BoundData::Directional(
            {
                let w = w_dir.clone();
                Arc::new(move |_: &DVector<T>| w.clone())
            },
            {
                let bound_fn = bound_fn.clone();
                let w = w_dir.clone();
                Arc::new(move |x: &DVector<T>| {
                    let a = bound_fn(x);
                    (&a * &w).dot(&w)
                })
            },
        ),
        model: Some(model),
    };
    let full_problem = CheckProblem {
        f: SampledFunction::analytic(
            vec![T::of(-10.0), T::of(-10.0)],
            vec![T::of(10.0), T::of(10.0)],
            f,
        ),
        bound: BoundData::Hessian(bound_fn.clone()),
        model: Some(model),
    };
    let x = at.coords.clone();
    let (scalar_viscosity, _) = check_viscosity(&scalar_problem, &x, &budget);
    let (full_viscosity, _) = check_viscosity(&full_problem, &x, &budget);

    let src = ClosedFormData {
        model,
        apex: apex.clone(),
    };
    let (center, radius) = window;
    let grid = 256;
    let field_psi =
        TestVectorField::constant(center.clone(), radius, T::one(), w_dir.clone());
    let field_psi2 = TestVectorField::constant(center.clone(), radius, T::one(), w_dir.clone())
        .with_profile_power(2);
    // ∫ d ∇²[(ψ⁴)(w⊗w)] and ∫ d ∇²[(ψ²)(w⊗w)].
    let lhs_psi4 = pairing_lhs_hessian_n(model, &src, &field_psi2, grid)?;
    let lhs_psi2 = pairing_lhs_hessian_n(model, &src, &field_psi, grid)?;
    let (lo, hi) = field_psi.support_box();
    let mut approximation_lhs = Vec::new();
    let mut cases = Vec::new();
    for n in [1.0, 4.0, 16.0] {
        let lhs_n = lhs_psi4 + lhs_psi2 * T::of(1.0 / n);
        approximation_lhs.push(lhs_n.as_f64());
        let rhs_n = grid_quadrature(&lo, &hi, grid, |a, b| {
            let p = ChartPoint::new(vec![a, b]);
            let v = field_psi.eval(&p).value;
            let amat = bound_fn(&p.coords);
            let s = (&p.coords - &center.coords).norm() / radius;
            let bpsi = crate::measure::bump(s).psi;
            let phi_n = bpsi * bpsi + T::of(1.0 / n);
            let vol = model.volume_density(&p).expect("interior");
            (&amat * &v).dot(&v) * phi_n * vol
        });
        let tol = T::of(1e-4) * (T::one() + rhs_n.abs());
        cases.push(DistributionalCase {
            label: format!("phi_{n}"),
            lhs: lhs_n,
            rhs: rhs_n,
            tol,
        });
    }
    let (scalar_distributional, _) = check_distributional_cases(&cases);

    // Full distributional at the window: the plain V⊗V pairing.
    let lhs = lhs_psi2;
    let rhs = grid_quadrature(&lo, &hi, grid, |a, b| {
        let p = ChartPoint::new(vec![a, b]);
        let v = field_psi.eval(&p).value;
        let amat = bound_fn(&p.coords);
        let vol = model.volume_density(&p).expect("interior");
        (&amat * &v).dot(&v) * vol
    });
    let (full_distributional, _) = check_distributional_cases(&[DistributionalCase {
        label: "full".into(),
        lhs,
        rhs,
        tol: T::of(1e-4) * (T::one() + rhs.abs()),
    }]);

    let agree = scalar_viscosity == full_viscosity
        && scalar_distributional == full_distributional;
    Ok(ReductionReport {
        scalar_viscosity,
        scalar_distributional,
        full_viscosity,
        full_distributional,
        agree,
        approximation_lhs,
    })
}
