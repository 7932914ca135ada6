//! Comparison inequalities in distributional form, the lower-bound chain,
//! and the rank-one reconstruction of the singular part.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::fields::{TestScalarField, TestVectorField};
use super::model_space::{ct_k, model_laplacian};
use super::pairing::{
    pairing_lhs_hessian_n, pairing_lhs_laplacian_n, pairing_rhs_ac_hessian_n,
    pairing_rhs_ac_laplacian_n, validate_support, CutQuadrature, DistanceData, PairingConfig,
};
use super::quad::grid_quadrature_cells;
use crate::error::MeasureError;
use crate::manifold::{ChartPoint, ManifoldModel};
use crate::num::Real;

#[derive(Clone, Debug, Serialize)]
pub struct ComparisonReport {
    pub lhs: f64,
    pub rhs: f64,
    /// `rhs − lhs`; the comparison theorem predicts this is nonnegative.
    pub margin: f64,
    pub curvature_bound: f64,
    pub grid_n: usize,
}

fn max_distance_on_support<T: Real>(
    src: &dyn DistanceData<T>,
    center: &ChartPoint<T>,
    radius: T,
) -> Result<T, MeasureError> {
    let m = 17;
    let mut max_d = T::zero();
    for i in 0..m {
        for j in 0..m {
            let fx = T::of(i as f64 / (m - 1) as f64) * T::of(2.0) - T::one();
            let fy = T::of(j as f64 / (m - 1) as f64) * T::of(2.0) - T::one();
            if fx * fx + fy * fy > T::one() {
                continue;
            }
            let x = ChartPoint::new(vec![
                center.coords[0] + radius * fx,
                center.coords[1] + radius * fy,
            ]);
            max_d = max_d.max(src.distance(&x)?);
        }
    }
    Ok(max_d)
}

/// Laplacian comparison `∫ d_p Δφ dVol ≤ ∫ (n−1)·ct_K(d_p) φ dVol` with
/// `K` the lower curvature bound.
pub fn verify_comparison_laplacian<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    field: &TestScalarField<T>,
    k: T,
    cfg: &PairingConfig<T>,
) -> Result<ComparisonReport, MeasureError> {
    validate_support(model, src, &field.center, field.radius, cfg)?;
    // ct_K needs d_p < π/√K on the support.
    if k > T::zero() {
        let max_d = max_distance_on_support(src, &field.center, field.radius)?;
        let limit = T::pi() / k.sqrt();
        if max_d >= limit - T::of(1e-9) {
            return Err(MeasureError::ModelDomain {
                r: max_d.as_f64(),
                limit: limit.as_f64(),
            });
        }
    }
    let lhs = pairing_lhs_laplacian_n(model, src, field, cfg.grid_n)?;
    let (lo, hi) = field.support_box();
    let dim = model.dim();
    let integrand = |p: &ChartPoint<T>| -> T {
        let d = src.distance(p).expect("validated support");
        let phi = field.eval(p).value;
        if phi <= T::zero() {
            return T::zero();
        }
        let vol = model.volume_density(p).expect("validated support");
        model_laplacian(k, dim, d).expect("domain pre-checked") * phi * vol
    };
    let rhs = grid_quadrature_cells(&lo, &hi, cfg.grid_n, |clo, chi| {
        let c = ChartPoint::new(vec![
            (clo[0] + chi[0]) * T::of(0.5),
            (clo[1] + chi[1]) * T::of(0.5),
        ]);
        integrand(&c) * (chi[0] - clo[0]) * (chi[1] - clo[1])
    });
    Ok(ComparisonReport {
        lhs: lhs.as_f64(),
        rhs: rhs.as_f64(),
        margin: (rhs - lhs).as_f64(),
        curvature_bound: k.as_f64(),
        grid_n: cfg.grid_n,
    })
}

/// Hessian comparison `∫ d_p ∇²(V⊗V) dVol ≤ ∫ ct_K(d_p)(g − dr⊗dr)(V,V) dVol`.
pub fn verify_comparison_hessian<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    field: &TestVectorField<T>,
    k: T,
    cfg: &PairingConfig<T>,
) -> Result<ComparisonReport, MeasureError> {
    validate_support(model, src, &field.center, field.radius, cfg)?;
    if k > T::zero() {
        let max_d = max_distance_on_support(src, &field.center, field.radius)?;
        let limit = T::pi() / k.sqrt();
        if max_d >= limit - T::of(1e-9) {
            return Err(MeasureError::ModelDomain {
                r: max_d.as_f64(),
                limit: limit.as_f64(),
            });
        }
    }
    let lhs = pairing_lhs_hessian_n(model, src, field, cfg.grid_n)?;
    let (lo, hi) = field.support_box();
    // The radial direction jumps across the cut: integrate cut-aware.
    let integrand = |p: &ChartPoint<T>| -> T {
        let mb = src.minimal(p).expect("validated support");
        let v = field.eval(p).value;
        let g = model.metric_at(p).expect("validated support");
        let w = &g * &mb.grad;
        let gv = &g * &v;
        let radial = w.dot(&v);
        let ct = ct_k(k, mb.length).expect("domain pre-checked");
        let vol = model.volume_density(p).expect("validated support");
        ct * (gv.dot(&v) - radial * radial) * vol
    };
    let rhs = cut_aware(src, &lo, &hi, cfg, &integrand);
    Ok(ComparisonReport {
        lhs: lhs.as_f64(),
        rhs: rhs.as_f64(),
        margin: (rhs - lhs).as_f64(),
        curvature_bound: k.as_f64(),
        grid_n: cfg.grid_n,
    })
}

fn cut_aware<T: Real>(
    src: &dyn DistanceData<T>,
    lo: &[T],
    hi: &[T],
    cfg: &PairingConfig<T>,
    integrand: &(dyn Fn(&ChartPoint<T>) -> T + Sync),
) -> T {
    grid_quadrature_cells(lo, hi, cfg.grid_n, |clo, chi| {
        cell_rec(src, integrand, clo, chi, cfg.subdivision_depth)
    })
}

fn cell_rec<T: Real>(
    src: &dyn DistanceData<T>,
    integrand: &dyn Fn(&ChartPoint<T>) -> T,
    lo: [T; 2],
    hi: [T; 2],
    depth: usize,
) -> T {
    let dx = hi[0] - lo[0];
    let dy = hi[1] - lo[1];
    let c = ChartPoint::new(vec![(lo[0] + hi[0]) * T::of(0.5), (lo[1] + hi[1]) * T::of(0.5)]);
    let diag = (dx * dx + dy * dy).sqrt();
    let gap = src.branch_gap(&c).unwrap_or_else(|_| T::zero());
    if depth == 0 || gap > T::of(4.0) * diag {
        return integrand(&c) * dx * dy;
    }
    let half = T::of(0.5);
    let mut total = T::zero();
    for (sx, sy) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let nlo = [
            lo[0] + dx * half * T::of(sx as f64),
            lo[1] + dy * half * T::of(sy as f64),
        ];
        total += cell_rec(
            src,
            integrand,
            nlo,
            [nlo[0] + dx * half, nlo[1] + dy * half],
            depth - 1,
        );
    }
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct LowerBoundReport {
    pub lhs: f64,
    pub rhs_ac: f64,
    /// `∫ φ dH¹` (scalar) or `∫ g(ν,V)² dH¹` (Hessian) over the cut.
    pub h1_mass: f64,
    /// `lhs − (rhs_ac − 2·h1_mass)`; nonnegative by the corollary.
    pub slack: f64,
    /// Independent route: `Σ (2 − jump)·φ·weight` (scalar form).
    pub slack_formula: f64,
    pub grid_n: usize,
}

/// Laplacian lower bound `Δd_p ≥ Δ̃d_p Vol − 2 H^{n−1}⌞Cut` paired with φ.
pub fn verify_lower_bound_laplacian<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    cut: &CutQuadrature<T>,
    field: &TestScalarField<T>,
    cfg: &PairingConfig<T>,
) -> Result<LowerBoundReport, MeasureError> {
    validate_support(model, src, &field.center, field.radius, cfg)?;
    let lhs = pairing_lhs_laplacian_n(model, src, field, cfg.grid_n)?;
    let rhs_ac =
        pairing_rhs_ac_laplacian_n(model, src, field, cfg.grid_n, cfg.subdivision_depth)?;
    let (h1, _) = cut.h1_pairing_scalar(model, field, cfg.cut_gap_max)?;
    let (jump_phi, _) = cut.laplacian_pairing(model, field, cfg.cut_gap_max)?;
    let slack = lhs - (rhs_ac - (h1 + h1));
    // Identity route: slack = ∫ (2 − jump) φ dH¹.
    let slack_formula = h1 + h1 - jump_phi;
    Ok(LowerBoundReport {
        lhs: lhs.as_f64(),
        rhs_ac: rhs_ac.as_f64(),
        h1_mass: h1.as_f64(),
        slack: slack.as_f64(),
        slack_formula: slack_formula.as_f64(),
        grid_n: cfg.grid_n,
    })
}

/// Hessian lower-bound chain: `lhs ≥ rhs_ac − 2∫g(ν,V)² dH¹ ≥
/// rhs_ac − 2∫|V|²_g dH¹`; returns the slacks of both inequalities.
pub fn verify_lower_bound_hessian<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    cut: &CutQuadrature<T>,
    field: &TestVectorField<T>,
    cfg: &PairingConfig<T>,
) -> Result<(LowerBoundReport, f64), MeasureError> {
    validate_support(model, src, &field.center, field.radius, cfg)?;
    let lhs = pairing_lhs_hessian_n(model, src, field, cfg.grid_n)?;
    let rhs_ac =
        pairing_rhs_ac_hessian_n(model, src, field, cfg.grid_n, cfg.subdivision_depth)?;
    let (nv2, v2) = cut.h1_pairing_vector(model, field, cfg.cut_gap_max)?;
    let (jump_nv2, _) = cut.hessian_pairing(model, field, cfg.cut_gap_max)?;
    let slack = lhs - (rhs_ac - (nv2 + nv2));
    let slack_formula = nv2 + nv2 - jump_nv2;
    let chain_slack = ((v2 - nv2) + (v2 - nv2)).as_f64();
    Ok((
        LowerBoundReport {
            lhs: lhs.as_f64(),
            rhs_ac: rhs_ac.as_f64(),
            h1_mass: nv2.as_f64(),
            slack: slack.as_f64(),
            slack_formula: slack_formula.as_f64(),
            grid_n: cfg.grid_n,
        },
        chain_slack,
    ))
}

#[derive(Clone, Debug, Serialize)]
pub struct RankOneReport {
    pub matrix: [[f64; 2]; 2],
    pub eigenvalues: [f64; 2],
    /// `|λ₂| / |λ₁|`.
    pub ratio: f64,
}

/// Reconstruct the singular tensor at a cut window from pairings against a
/// polarization frame of bump fields, and measure its rank-one defect.
pub fn rank_one_reconstruction<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    center: &ChartPoint<T>,
    radius: T,
    cfg: &PairingConfig<T>,
) -> Result<RankOneReport, MeasureError> {
    let s = |dir: DVector<T>| -> Result<T, MeasureError> {
        let field = TestVectorField::constant(center.clone(), radius, T::one(), dir);
        let lhs = pairing_lhs_hessian_n(model, src, &field, cfg.grid_n)?;
        let rhs_ac =
            pairing_rhs_ac_hessian_n(model, src, &field, cfg.grid_n, cfg.subdivision_depth)?;
        Ok(rhs_ac - lhs)
    };
    let m11 = s(DVector::from_vec(vec![T::one(), T::zero()]))?;
    let m22 = s(DVector::from_vec(vec![T::zero(), T::one()]))?;
    let inv_sqrt2 = T::of(std::f64::consts::FRAC_1_SQRT_2);
    let mixed = s(DVector::from_vec(vec![inv_sqrt2, inv_sqrt2]))?;
    let m12 = mixed - (m11 + m22) * T::of(0.5);
    let mat = DMatrix::from_row_slice(2, 2, &[m11, m12, m12, m22]);
    let tr = m11 + m22;
    let det = m11 * m22 - m12 * m12;
    let disc = (tr * tr * T::of(0.25) - det).max(T::zero()).sqrt();
    let l1 = tr * T::of(0.5) + disc;
    let l2 = tr * T::of(0.5) - disc;
    let (big, small) = if l1.abs() >= l2.abs() { (l1, l2) } else { (l2, l1) };
    Ok(RankOneReport {
        matrix: [
            [mat[(0, 0)].as_f64(), mat[(0, 1)].as_f64()],
            [mat[(1, 0)].as_f64(), mat[(1, 1)].as_f64()],
        ],
        eigenvalues: [big.as_f64(), small.as_f64()],
        ratio: (small.abs() / big.abs().max(T::of(1e-300))).as_f64(),
    })
}
