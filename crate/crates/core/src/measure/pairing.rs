//! Distributional pairings of the distance function.
//!
//! The left side pairs `d_p` against covariant derivatives of analytic test
//! fields (no differencing of `d_p` at all); the right side integrates the
//! classical Hessian of the minimal branch (one-sided at the cut) plus the
//! jump term collected from cut-locus samples. The residual of
//! `lhs = rhs_ac − rhs_sing` is the verification target.

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::fields::{TestScalarField, TestVectorField};
use super::quad::{grid_quadrature, grid_quadrature_cells, refine_until, Refined};
use crate::cutlocus::{CutlocusSample, DistanceField};
use crate::error::MeasureError;
use crate::manifold::{g_inner, g_norm, ChartPoint, ManifoldModel};
use crate::num::{compensated_sum, Real};

/// Apex exclusion radius: test fields must stay this far from `p`.
pub const APEX_EXCLUSION: f64 = 0.05;

#[derive(Clone, Debug)]
pub struct PairingConfig<T> {
    pub grid_n: usize,
    /// Relative residual target.
    pub tol: T,
    pub apex_exclusion: T,
    /// Max recursive subdivision depth for cells near the cut.
    pub subdivision_depth: usize,
    /// Coverage requirement: largest allowed gap between consecutive cut
    /// samples inside the support.
    pub cut_gap_max: T,
}

impl<T: Real> Default for PairingConfig<T> {
    fn default() -> Self {
        Self {
            grid_n: 512,
            tol: T::of(1e-3),
            apex_exclusion: T::of(APEX_EXCLUSION),
            subdivision_depth: 6,
            cut_gap_max: T::of(2e-2),
        }
    }
}

/// Minimal-branch data of the distance function at a point.
#[derive(Clone, Debug)]
pub struct MinimalBranch<T> {
    pub length: T,
    /// Gradient vector (unit, chart components).
    pub grad: DVector<T>,
    /// Lowered classical Hessian of the branch at the point.
    pub hess: DMatrix<T>,
}

/// Side-consistent access to the distance function and its classical
/// derivatives; implemented by the closed-form branch enumerations and by
/// the geodesic-polar field.
pub trait DistanceData<T: Real>: Sync {
    fn minimal(&self, x: &ChartPoint<T>) -> Result<MinimalBranch<T>, MeasureError>;
    /// Gap between the two shortest branch lengths (∞ when unique); small
    /// values flag the vicinity of the cut locus.
    fn branch_gap(&self, x: &ChartPoint<T>) -> Result<T, MeasureError>;

    fn distance(&self, x: &ChartPoint<T>) -> Result<T, MeasureError> {
        Ok(self.minimal(x)?.length)
    }
}

/// Closed-form branches of a model with a distance oracle.
pub struct ClosedFormData<'m, T: nalgebra::Scalar> {
    pub model: &'m ManifoldModel<T>,
    pub apex: ChartPoint<T>,
}

impl<'m, T: Real> DistanceData<T> for ClosedFormData<'m, T> {
    fn minimal(&self, x: &ChartPoint<T>) -> Result<MinimalBranch<T>, MeasureError> {
        let branches = self
            .model
            .distance_branches(&self.apex, x)
            .expect("closed-form source requires a distance oracle");
        let b = &branches[0];
        Ok(MinimalBranch {
            length: b.length,
            grad: b.grad_at_target.clone(),
            hess: b.hess_at_target.clone(),
        })
    }

    fn branch_gap(&self, x: &ChartPoint<T>) -> Result<T, MeasureError> {
        let branches = self
            .model
            .distance_branches(&self.apex, x)
            .expect("closed-form source requires a distance oracle");
        if branches.len() < 2 {
            return Ok(T::of(f64::INFINITY));
        }
        Ok(branches[1].length - branches[0].length)
    }
}

/// Polar-field branches for models without closed forms.
pub struct FieldData<'m, T: nalgebra::Scalar> {
    pub model: &'m ManifoldModel<T>,
    pub field: &'m DistanceField<T>,
}

impl<'m, T: Real> DistanceData<T> for FieldData<'m, T> {
    fn minimal(&self, x: &ChartPoint<T>) -> Result<MinimalBranch<T>, MeasureError> {
        let branches = self.field.branches_at(self.model, x, None)?;
        let b = branches.first().ok_or(MeasureError::Cut(
            crate::error::CutError::NoConvergence {
                detail: "no field branch at quadrature node".into(),
            },
        ))?;
        let g = self.model.metric_at(x)?;
        let grad = &b.grad / g_norm(&g, &b.grad);
        let w = &g * &grad;
        let hess = (&g - &w * w.transpose()) * b.lambda;
        Ok(MinimalBranch {
            length: b.length,
            grad,
            hess,
        })
    }

    fn branch_gap(&self, x: &ChartPoint<T>) -> Result<T, MeasureError> {
        let branches = self.field.branches_at(self.model, x, None)?;
        if branches.len() < 2 {
            return Ok(T::of(f64::INFINITY));
        }
        Ok(branches[1].length - branches[0].length)
    }
}

/// Covariant double divergence `∇_j ∇_i (V^i V^j)` at a chart point.
pub fn divdiv_vv<T: Real>(
    model: &ManifoldModel<T>,
    x: &ChartPoint<T>,
    field: &TestVectorField<T>,
) -> Result<T, MeasureError> {
    let n = model.dim();
    let jet = field.eval(x);
    let gamma = model.christoffel_at(x)?;
    let dgamma = model.christoffel_derivative_at(x)?;
    let v = &jet.value;
    let jac = &jet.jac;
    let hess = &jet.hess;

    let t = |i: usize, j: usize| v[i] * v[j];
    let dt = |k: usize, i: usize, j: usize| jac[(i, k)] * v[j] + v[i] * jac[(j, k)];
    let ddt = |l: usize, k: usize, i: usize, j: usize| {
        hess[i][(k, l)] * v[j]
            + jac[(i, k)] * jac[(j, l)]
            + jac[(i, l)] * jac[(j, k)]
            + v[i] * hess[j][(k, l)]
    };

    // S^j = ∂_i T^{ij} + Γ^i_{ik} T^{kj} + Γ^j_{ik} T^{ik}
    let s = |j: usize| {
        let mut out = T::zero();
        for i in 0..n {
            out += dt(i, i, j);
            for k in 0..n {
                out += gamma[i][(i, k)] * t(k, j) + gamma[j][(i, k)] * t(i, k);
            }
        }
        out
    };

    let mut div = T::zero();
    for j in 0..n {
        // ∂_j S^j expanded through the product rule.
        for i in 0..n {
            div += ddt(j, i, i, j);
            for k in 0..n {
                div += dgamma[j][i][(i, k)] * t(k, j)
                    + gamma[i][(i, k)] * dt(j, k, j)
                    + dgamma[j][j][(i, k)] * t(i, k)
                    + gamma[j][(i, k)] * dt(j, i, k);
            }
        }
        // + Γ^j_{jk} S^k
        for k in 0..n {
            div += gamma[j][(j, k)] * s(k);
        }
    }
    Ok(div)
}

/// Covariant Laplacian of an analytic scalar field at a chart point.
pub fn laplacian_scalar<T: Real>(
    model: &ManifoldModel<T>,
    x: &ChartPoint<T>,
    field: &TestScalarField<T>,
) -> Result<T, MeasureError> {
    let n = model.dim();
    let jet = field.eval(x);
    let g = model.metric_at(x)?;
    let ginv = g.try_inverse().expect("metric invertible");
    let gamma = model.christoffel_at(x)?;
    let mut out = T::zero();
    for i in 0..n {
        for j in 0..n {
            let mut corr = T::zero();
            for k in 0..n {
                corr += gamma[k][(i, j)] * jet.grad[k];
            }
            out += ginv[(i, j)] * (jet.hess[(i, j)] - corr);
        }
    }
    Ok(out)
}

/// Check the support box: inside the chart, clear of the apex exclusion
/// ball wherever the profile is nonzero.
pub fn validate_support<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    center: &ChartPoint<T>,
    radius: T,
    cfg: &PairingConfig<T>,
) -> Result<(), MeasureError> {
    let chart = model.main_chart();
    for (i, axis) in chart.axes.iter().enumerate() {
        if !axis.periodic
            && (center.coords[i] - radius < axis.lo || center.coords[i] + radius > axis.hi)
        {
            return Err(MeasureError::SupportOutsideChart);
        }
    }
    let m = 17;
    let mut min_d = T::of(f64::INFINITY);
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
            min_d = min_d.min(src.distance(&x)?);
        }
    }
    if min_d < cfg.apex_exclusion {
        return Err(MeasureError::SupportTooClose {
            min_dist: min_d.as_f64(),
            required: cfg.apex_exclusion.as_f64(),
        });
    }
    Ok(())
}

/// LHS of the Hessian pairing at a fixed grid:
/// `∫ d_p · ∇²_{ji}(V^i V^j) · √g dx` over the support box.
pub fn pairing_lhs_hessian_n<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    field: &TestVectorField<T>,
    n: usize,
) -> Result<T, MeasureError> {
    let (lo, hi) = field.support_box();
    preflight(model, src, &lo, &hi)?;
    Ok(grid_quadrature(&lo, &hi, n, |x, y| {
        let p = ChartPoint::new(vec![x, y]);
        let d = src.distance(&p).expect("preflighted support");
        let dd = divdiv_vv(model, &p, field).expect("preflighted support");
        let vol = model.volume_density(&p).expect("preflighted support");
        d * dd * vol
    }))
}

/// LHS of the Laplacian pairing at a fixed grid: `∫ d_p · Δφ · √g dx`.
pub fn pairing_lhs_laplacian_n<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    field: &TestScalarField<T>,
    n: usize,
) -> Result<T, MeasureError> {
    let (lo, hi) = field.support_box();
    preflight(model, src, &lo, &hi)?;
    Ok(grid_quadrature(&lo, &hi, n, |x, y| {
        let p = ChartPoint::new(vec![x, y]);
        let d = src.distance(&p).expect("preflighted support");
        let lap = laplacian_scalar(model, &p, field).expect("preflighted support");
        let vol = model.volume_density(&p).expect("preflighted support");
        d * lap * vol
    }))
}

/// Auto-refined LHS: the grid doubles until two successive refinements
/// differ by less than `0.1 × target` (relative to the running value).
pub fn pairing_lhs_hessian<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    field: &TestVectorField<T>,
    target_rel: T,
) -> Result<Refined<T>, MeasureError> {
    let coarse = pairing_lhs_hessian_n(model, src, field, 64)?;
    let scale = coarse.abs().max(T::one());
    Ok(refine_until(128, 2048, T::of(0.1) * target_rel * scale, |n| {
        pairing_lhs_hessian_n(model, src, field, n).expect("preflighted support")
    }))
}

fn preflight<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    lo: &[T],
    hi: &[T],
) -> Result<(), MeasureError> {
    let m = 9;
    for i in 0..m {
        for j in 0..m {
            let x = lo[0] + (hi[0] - lo[0]) * T::of((i as f64 + 0.5) / m as f64);
            let y = lo[1] + (hi[1] - lo[1]) * T::of((j as f64 + 0.5) / m as f64);
            let p = ChartPoint::new(vec![x, y]);
            src.minimal(&p)?;
            model.volume_density(&p)?;
            model.christoffel_at(&p)?;
        }
    }
    Ok(())
}

/// Absolutely continuous RHS (Hessian form): `∫ H̃ess d_p(V, V) √g dx`
/// with recursive subdivision of cells near the cut so that every
/// evaluation differentiates a single branch.
pub fn pairing_rhs_ac_hessian_n<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    field: &TestVectorField<T>,
    n: usize,
    depth: usize,
) -> Result<T, MeasureError> {
    let (lo, hi) = field.support_box();
    preflight(model, src, &lo, &hi)?;
    let integrand = |p: &ChartPoint<T>| -> T {
        let mb = src.minimal(p).expect("preflighted support");
        let v = field.eval(p).value;
        let hvv = g_inner(&mb.hess, &v, &v);
        hvv * model.volume_density(p).expect("preflighted support")
    };
    Ok(grid_quadrature_cells(&lo, &hi, n, |clo, chi| {
        cell_value(src, &integrand, clo, chi, depth)
    }))
}

/// Laplacian-form AC RHS: `∫ Δ̃d_p · φ · √g dx`, cut-aware.
pub fn pairing_rhs_ac_laplacian_n<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    field: &TestScalarField<T>,
    n: usize,
    depth: usize,
) -> Result<T, MeasureError> {
    let (lo, hi) = field.support_box();
    preflight(model, src, &lo, &hi)?;
    let integrand = |p: &ChartPoint<T>| -> T {
        let mb = src.minimal(p).expect("preflighted support");
        let g = model.metric_at(p).expect("preflighted support");
        let ginv = g.try_inverse().expect("metric invertible");
        let mut lap = T::zero();
        for i in 0..model.dim() {
            for j in 0..model.dim() {
                lap += ginv[(i, j)] * mb.hess[(i, j)];
            }
        }
        lap * field.eval(p).value * model.volume_density(p).expect("preflighted support")
    };
    Ok(grid_quadrature_cells(&lo, &hi, n, |clo, chi| {
        cell_value(src, &integrand, clo, chi, depth)
    }))
}

fn cell_value<T: Real>(
    src: &dyn DistanceData<T>,
    integrand: &dyn Fn(&ChartPoint<T>) -> T,
    lo: [T; 2],
    hi: [T; 2],
    depth: usize,
) -> T {
    let cx = (lo[0] + hi[0]) * T::of(0.5);
    let cy = (lo[1] + hi[1]) * T::of(0.5);
    let center = ChartPoint::new(vec![cx, cy]);
    let dx = hi[0] - lo[0];
    let dy = hi[1] - lo[1];
    let diag = (dx * dx + dy * dy).sqrt();
    let gap = src.branch_gap(&center).unwrap_or_else(|_| T::zero());
    // Branch lengths are 1-Lipschitz each, so the tie set cannot enter a
    // cell whose center gap exceeds 4 diagonals.
    if depth == 0 || gap > T::of(4.0) * diag {
        return integrand(&center) * dx * dy;
    }
    let mut total = T::zero();
    let half = T::of(0.5);
    for (sx, sy) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
        let nlo = [
            lo[0] + dx * half * T::of(sx as f64),
            lo[1] + dy * half * T::of(sy as f64),
        ];
        let nhi = [nlo[0] + dx * half, nlo[1] + dy * half];
        total += cell_value(src, integrand, nlo, nhi, depth - 1);
    }
    total
}

/// Cut-locus samples prepared for singular quadrature against test fields.
pub struct CutQuadrature<T: nalgebra::Scalar> {
    pub samples: Vec<CutlocusSample<T>>,
}

impl<T: Real> CutQuadrature<T> {
    pub fn new(mut samples: Vec<CutlocusSample<T>>) -> Self {
        samples.sort_by(|a, b| a.record.alpha.partial_cmp(&b.record.alpha).unwrap());
        Self { samples }
    }

    /// Weighted sum of `f` over unflagged samples inside the support of a
    /// field with the given center/radius; checks sample coverage there.
    fn weighted_sum(
        &self,
        model: &ManifoldModel<T>,
        center: &ChartPoint<T>,
        radius: T,
        gap_max: T,
        f: &dyn Fn(&CutlocusSample<T>) -> T,
    ) -> Result<(T, usize), MeasureError> {
        let in_support: Vec<&CutlocusSample<T>> = self
            .samples
            .iter()
            .filter(|s| model.chart_distance(&s.q, center) < radius)
            .collect();
        // Coverage: consecutive in-support samples must stay within the
        // quadrature step of each other.
        let mut worst_gap = T::zero();
        for w in in_support.windows(2) {
            let gap = model.chart_distance(&w[0].q, &w[1].q);
            // The direction parametrization visits the two covering
            // families separately; jumps between families are fine.
            let angle_gap = (w[0].record.alpha - w[1].record.alpha).abs();
            if angle_gap < T::of(0.1) {
                worst_gap = worst_gap.max(gap);
            }
        }
        if worst_gap > gap_max {
            return Err(MeasureError::CutCoverage {
                gap: worst_gap.as_f64(),
                step: gap_max.as_f64(),
            });
        }
        let terms: Vec<T> = in_support
            .iter()
            .filter(|s| !s.flagged)
            .map(|s| f(s))
            .collect();
        let used = terms.len();
        Ok((compensated_sum(terms), used))
    }

    /// `Σ jump · g(ν, V)² · weight` over the support of `V`.
    pub fn hessian_pairing(
        &self,
        model: &ManifoldModel<T>,
        field: &TestVectorField<T>,
        gap_max: T,
    ) -> Result<(T, usize), MeasureError> {
        self.weighted_sum(model, &field.center, field.radius, gap_max, &|s| {
            let g = model.metric_at(&s.q).expect("cut sample in chart");
            let v = field.eval(&s.q).value;
            let nv = g_inner(&g, &s.nu, &v);
            s.jump * nv * nv * s.weight
        })
    }

    /// `Σ jump · φ · weight` over the support of `φ`.
    pub fn laplacian_pairing(
        &self,
        model: &ManifoldModel<T>,
        field: &TestScalarField<T>,
        gap_max: T,
    ) -> Result<(T, usize), MeasureError> {
        self.weighted_sum(model, &field.center, field.radius, gap_max, &|s| {
            s.jump * field.eval(&s.q).value * s.weight
        })
    }

    /// `Σ φ · weight` (the H^{n−1} mass pairing used by the lower bound).
    pub fn h1_pairing_scalar(
        &self,
        model: &ManifoldModel<T>,
        field: &TestScalarField<T>,
        gap_max: T,
    ) -> Result<(T, usize), MeasureError> {
        self.weighted_sum(model, &field.center, field.radius, gap_max, &|s| {
            field.eval(&s.q).value * s.weight
        })
    }

    /// `Σ g(ν, V)² · weight` and `Σ |V|²_g · weight` for the Hessian-form
    /// lower bound chain.
    pub fn h1_pairing_vector(
        &self,
        model: &ManifoldModel<T>,
        field: &TestVectorField<T>,
        gap_max: T,
    ) -> Result<(T, T), MeasureError> {
        let (nv2, _) = self.weighted_sum(model, &field.center, field.radius, gap_max, &|s| {
            let g = model.metric_at(&s.q).expect("cut sample in chart");
            let v = field.eval(&s.q).value;
            let nv = g_inner(&g, &s.nu, &v);
            nv * nv * s.weight
        })?;
        let (v2, _) = self.weighted_sum(model, &field.center, field.radius, gap_max, &|s| {
            let g = model.metric_at(&s.q).expect("cut sample in chart");
            let v = field.eval(&s.q).value;
            g_inner(&g, &v, &v) * s.weight
        })?;
        Ok((nv2, v2))
    }
}

/// Both sides of a pairing with the residual bookkeeping.
#[derive(Clone, Debug, Serialize)]
pub struct PairingReport {
    pub lhs: f64,
    pub rhs_ac: f64,
    pub rhs_sing: f64,
    /// `lhs − (rhs_ac − rhs_sing)`.
    pub residual: f64,
    pub relative_residual: f64,
    pub grid_n: usize,
    pub cut_samples_used: usize,
    pub apex_exclusion: f64,
}

fn make_report<T: Real>(
    lhs: T,
    rhs_ac: T,
    rhs_sing: T,
    grid_n: usize,
    used: usize,
    excision: T,
) -> PairingReport {
    let residual = lhs - (rhs_ac - rhs_sing);
    let scale = lhs
        .abs()
        .max(rhs_ac.abs())
        .max(rhs_sing.abs())
        .max(T::of(1e-12));
    PairingReport {
        lhs: lhs.as_f64(),
        rhs_ac: rhs_ac.as_f64(),
        rhs_sing: rhs_sing.as_f64(),
        residual: residual.as_f64(),
        relative_residual: (residual / scale).as_f64(),
        grid_n,
        cut_samples_used: used,
        apex_exclusion: excision.as_f64(),
    }
}

/// Hessian decomposition report at the configured grid.
pub fn hessian_decomposition_report<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    cut: &CutQuadrature<T>,
    field: &TestVectorField<T>,
    cfg: &PairingConfig<T>,
) -> Result<PairingReport, MeasureError> {
    validate_support(model, src, &field.center, field.radius, cfg)?;
    let lhs = pairing_lhs_hessian_n(model, src, field, cfg.grid_n)?;
    let rhs_ac =
        pairing_rhs_ac_hessian_n(model, src, field, cfg.grid_n, cfg.subdivision_depth)?;
    let (rhs_sing, used) = cut.hessian_pairing(model, field, cfg.cut_gap_max)?;
    Ok(make_report(
        lhs,
        rhs_ac,
        rhs_sing,
        cfg.grid_n,
        used,
        cfg.apex_exclusion,
    ))
}

/// Like [`hessian_decomposition_report`] but enforcing the tolerance:
/// exceeding it is a verification failure.
pub fn verify_hessian_decomposition<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    cut: &CutQuadrature<T>,
    field: &TestVectorField<T>,
    cfg: &PairingConfig<T>,
) -> Result<PairingReport, MeasureError> {
    let report = hessian_decomposition_report(model, src, cut, field, cfg)?;
    if report.relative_residual.abs() >= cfg.tol.as_f64() {
        return Err(MeasureError::ToleranceExceeded {
            residual: report.relative_residual,
            tol: cfg.tol.as_f64(),
        });
    }
    Ok(report)
}

/// Laplacian pairing report (scalar corollary of the decomposition).
pub fn pairing_laplacian<T: Real>(
    model: &ManifoldModel<T>,
    src: &dyn DistanceData<T>,
    cut: &CutQuadrature<T>,
    field: &TestScalarField<T>,
    cfg: &PairingConfig<T>,
) -> Result<PairingReport, MeasureError> {
    validate_support(model, src, &field.center, field.radius, cfg)?;
    let lhs = pairing_lhs_laplacian_n(model, src, field, cfg.grid_n)?;
    let rhs_ac =
        pairing_rhs_ac_laplacian_n(model, src, field, cfg.grid_n, cfg.subdivision_depth)?;
    let (rhs_sing, used) = cut.laplacian_pairing(model, field, cfg.cut_gap_max)?;
    Ok(make_report(
        lhs,
        rhs_ac,
        rhs_sing,
        cfg.grid_n,
        used,
        cfg.apex_exclusion,
    ))
}
