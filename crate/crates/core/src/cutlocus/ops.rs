//! Distances, cut times, cutpoint classification and cut-locus sampling.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::shooting::{connect, dedup_hits, final_velocity, point_gap, ShootingConfig};
use super::types::{
    CutClass, CutRecord, CutlocusSample, GeodesicHit, SuperdifferentialSet,
};
use crate::error::CutError;
use crate::geodesic::{conjugate_time, endpoint_error_estimate, eval_on_path, shoot_angle};
use crate::manifold::{g_norm, g_orthogonal_2d, ChartPoint, ManifoldModel};
use crate::num::Real;

/// Classification tolerance `|σ_v − c_v| < tol_class` for the Both class.
pub const TOL_CLASS: f64 = 1e-5;
/// Bracket width for the cut-time bisection.
pub const CUT_BRACKET: f64 = 1e-8;

#[derive(Clone, Debug)]
pub struct CutConfig<T> {
    pub shooting: ShootingConfig<T>,
    pub step: T,
    /// Window for cut-time searches; defaults to the model diameter bound.
    pub t_max: Option<T>,
    /// Extra length tolerance when collecting minimal geodesics.
    pub tol_len: T,
    /// Override for the cut predicate slack; when unset each cut-time call
    /// derives it from a step-halving endpoint error estimate.
    pub tol_min: Option<T>,
}

impl<T: Real> Default for CutConfig<T> {
    fn default() -> Self {
        Self {
            shooting: ShootingConfig::default(),
            step: T::of(1e-3),
            t_max: None,
            tol_len: T::of(1e-5),
            tol_min: None,
        }
    }
}

impl<T: Real> CutConfig<T> {
    fn window(&self, model: &ManifoldModel<T>) -> T {
        self.t_max
            .or_else(|| model.diameter_bound().map(|d| d + T::of(0.05)))
            .unwrap_or_else(|| T::of(20.0))
    }
}

/// Geodesic distance between two points: the closed-form oracle when the
/// model has one, otherwise the best connecting geodesic found by
/// multistart shooting.
pub fn distance<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    q: &ChartPoint<T>,
    cfg: &CutConfig<T>,
) -> Result<T, CutError> {
    if let Some(d) = model.closed_form_distance(p, q) {
        return Ok(d);
    }
    if model.chart_distance(p, q) == T::zero() {
        return Ok(T::zero());
    }
    let outcome = connect(model, p, q, &cfg.shooting, Some(8))?;
    outcome
        .hits
        .first()
        .map(|h| h.length)
        .ok_or_else(|| CutError::NoConvergence {
            detail: format!(
                "no geodesic from {:?} to {:?} within {} starts",
                p.coords.as_slice(),
                q.coords.as_slice(),
                cfg.shooting.n_starts
            ),
        })
}

/// All minimal geodesics from `p` to `q`: initial angles of every connecting
/// geodesic within `tol_len` of the distance, deduplicated at the angular
/// resolution, capped with a degeneracy flag when a continuum shows up.
pub fn minimal_geodesics<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    q: &ChartPoint<T>,
    cfg: &CutConfig<T>,
) -> Result<(Vec<GeodesicHit<T>>, bool), CutError> {
    let outcome = connect(model, p, q, &cfg.shooting, None)?;
    let mut best = match outcome.hits.first() {
        Some(h) => h.length,
        None => {
            return Err(CutError::NoConvergence {
                detail: "no connecting geodesic found".into(),
            })
        }
    };
    if let Some(d) = model.closed_form_distance(p, q) {
        best = best.min(d);
    }
    let minimal: Vec<GeodesicHit<T>> = outcome
        .hits
        .iter()
        .filter(|h| h.length <= best + cfg.tol_len)
        .cloned()
        .collect();
    let deduped = dedup_hits(&minimal, cfg.shooting.angle_dedup);
    let capped = deduped.len() > cfg.shooting.max_count;
    let out: Vec<_> = deduped
        .into_iter()
        .take(cfg.shooting.max_count)
        .collect();
    Ok((out, outcome.degenerate || capped))
}

/// Cheap multiplicity probe: like [`minimal_geodesics`] but refining only a
/// handful of starts; enough to certify `count >= 2` and detect continua.
fn count_minimal<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    q: &ChartPoint<T>,
    cfg: &CutConfig<T>,
) -> Result<(Vec<GeodesicHit<T>>, bool), CutError> {
    let outcome = connect(model, p, q, &cfg.shooting, Some(6))?;
    let best = outcome
        .hits
        .first()
        .map(|h| h.length)
        .unwrap_or_else(|| T::of(f64::INFINITY));
    let minimal: Vec<GeodesicHit<T>> = outcome
        .hits
        .iter()
        .filter(|h| h.length <= best + cfg.tol_len)
        .cloned()
        .collect();
    Ok((
        dedup_hits(&minimal, cfg.shooting.angle_dedup),
        outcome.degenerate,
    ))
}

/// Cut time of the geodesic at frame angle `alpha`: bisection of
/// `P(t) = [d(p, γ(t)) < t − tol_min]` over `[0, window]`.
///
/// Returns `None` (+∞) when `P` is false at the window end on a non-compact
/// model; on compact models that outcome is a diagnostic error.
pub fn cut_time<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    cfg: &CutConfig<T>,
) -> Result<Option<T>, CutError> {
    let dist = |x: &ChartPoint<T>| distance(model, p, x, cfg);
    cut_time_with(model, p, alpha, cfg, &dist)
}

/// [`cut_time`] with a caller-supplied distance evaluator.
pub fn cut_time_with<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    cfg: &CutConfig<T>,
    dist: &dyn Fn(&ChartPoint<T>) -> Result<T, CutError>,
) -> Result<Option<T>, CutError> {
    let t_max = cfg.window(model);
    let path = shoot_angle(model, p, alpha, t_max, cfg.step)?;
    let tol_min = match cfg.tol_min {
        Some(t) => t,
        None => {
            let est = endpoint_error_estimate(model, p, alpha, t_max, cfg.step)?;
            T::of(1e-9) + T::of(10.0) * est
        }
    };
    let predicate = |t: T| -> Result<bool, CutError> {
        let (state, _) = eval_on_path(model, &path, t)?;
        let d = dist(&model.to_main(&state))?;
        Ok(d < t - tol_min)
    };
    if !predicate(t_max)? {
        if !model.is_compact() {
            return Ok(None);
        }
        return Err(CutError::InconsistentPredicate {
            lo: 0.0,
            hi: t_max.as_f64(),
            trace: format!(
                "P({t}) = false on a compact model (diameter bound {diam:?})",
                t = t_max.as_f64(),
                diam = model.diameter_bound().map(|d| d.as_f64())
            ),
        });
    }
    let mut lo = T::zero();
    let mut hi = t_max;
    let width = T::of(CUT_BRACKET);
    while hi - lo > width {
        let mid = (lo + hi) * T::of(0.5);
        if predicate(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(Some((lo + hi) * T::of(0.5)))
}

/// Cut record of the direction `alpha`: cut time, conjugate time, class and
/// minimal multiplicity at the cutpoint. The cutpoint dichotomy is asserted:
/// a finite cut time with neither condition is a numerical failure.
pub fn classify_cutpoint<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    cfg: &CutConfig<T>,
) -> Result<CutRecord<T>, CutError> {
    let sigma = cut_time(model, p, alpha, cfg)?;
    let (record, _q, _hits) = classify_from_sigma(model, p, alpha, cfg, sigma)?;
    Ok(record)
}

fn classify_from_sigma<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    cfg: &CutConfig<T>,
    sigma: Option<T>,
) -> Result<(CutRecord<T>, Option<ChartPoint<T>>, Vec<GeodesicHit<T>>), CutError> {
    let Some(sigma) = sigma else {
        return Ok((
            CutRecord {
                alpha,
                sigma: None,
                conj: None,
                class: CutClass::None,
                geodesic_count: 1,
                degenerate: false,
            },
            None,
            Vec::new(),
        ));
    };
    // Conjugate window: slightly past the cut time (σ ≤ c_v always).
    let conj_window = sigma * T::of(1.001) + T::of(0.05);
    let conj = conjugate_time(model, p, alpha, conj_window, cfg.step)?;
    let path = shoot_angle(model, p, alpha, sigma, cfg.step)?;
    let q = path.endpoint(model);
    let (hits, degenerate) = count_minimal(model, p, &q, cfg)?;
    let count = if degenerate {
        hits.len().max(2)
    } else {
        hits.len()
    };
    let tol_class = T::of(TOL_CLASS);
    let conj_match = conj.map(|c| (c - sigma).abs() < tol_class).unwrap_or(false);
    let multi = count >= 2;
    let class = match (conj_match, multi) {
        (true, true) => CutClass::Both,
        (true, false) => CutClass::Conj,
        (false, true) => CutClass::Sing,
        (false, false) => {
            return Err(CutError::StructureViolation {
                sigma: sigma.as_f64(),
                count,
                conj_gap: conj.map(|c| (c - sigma).abs().as_f64()),
            })
        }
    };
    Ok((
        CutRecord {
            alpha,
            sigma: Some(sigma),
            conj,
            class,
            geodesic_count: count,
            degenerate,
        },
        Some(q),
        hits,
    ))
}

/// Scan of the full direction circle at an apex.
pub struct CutScan<T: nalgebra::Scalar> {
    /// One record per direction, in direction order.
    pub records: Vec<CutRecord<T>>,
    /// Samples for the directions with finite cut time, in direction order.
    pub samples: Vec<CutlocusSample<T>>,
}

/// Sample the cut locus along `n` uniformly spread unit directions.
///
/// Directions are independent and evaluated in parallel; the output order is
/// by direction index regardless of scheduling.
pub fn sample_cutlocus<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    n: usize,
    cfg: &CutConfig<T>,
) -> Result<CutScan<T>, CutError> {
    sample_cutlocus_with(model, p, n, cfg, None)
}

/// [`sample_cutlocus`] with an optional custom cut-time evaluator (the
/// ellipsoid passes the bisection of its polar distance field).
pub fn sample_cutlocus_with<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    n: usize,
    cfg: &CutConfig<T>,
    sigma_fn: Option<&(dyn Fn(T) -> Result<Option<T>, CutError> + Sync)>,
) -> Result<CutScan<T>, CutError> {
    sample_cutlocus_impl(model, p, n, cfg, sigma_fn, None)
}

/// Dense cut sampling for singular quadrature over a support window:
/// every direction gets its cut time and cutpoint (needed for arclength
/// weights), but classification and side gradients are only computed for
/// cutpoints within `radius` of `center`.
pub fn cut_quadrature_samples<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    n: usize,
    cfg: &CutConfig<T>,
    sigma_fn: Option<&(dyn Fn(T) -> Result<Option<T>, CutError> + Sync)>,
    center: &ChartPoint<T>,
    radius: T,
) -> Result<Vec<CutlocusSample<T>>, CutError> {
    let scan = sample_cutlocus_impl(model, p, n, cfg, sigma_fn, Some((center, radius)))?;
    Ok(scan.samples)
}

fn sample_cutlocus_impl<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    n: usize,
    cfg: &CutConfig<T>,
    sigma_fn: Option<&(dyn Fn(T) -> Result<Option<T>, CutError> + Sync)>,
    region: Option<(&ChartPoint<T>, T)>,
) -> Result<CutScan<T>, CutError> {
    assert!(n >= 8, "need at least 8 directions");
    let two_pi = T::two_pi();
    let delta = two_pi / T::of(n as f64);

    // One shared predicate slack for the whole scan: a single step-halving
    // estimate inflated by an extra order of magnitude across directions.
    let mut cfg = cfg.clone();
    if sigma_fn.is_none() && cfg.tol_min.is_none() {
        let est = endpoint_error_estimate(model, p, T::zero(), cfg.window(model), cfg.step)?;
        cfg.tol_min = Some(T::of(1e-9) + T::of(100.0) * est);
    }
    let cfg = &cfg;

    // Phase 1: cut time and cutpoint for every direction (cheap; the
    // cutpoints of the whole circle feed the arclength weights).
    let phase1: Vec<Result<(Option<T>, Option<ChartPoint<T>>), CutError>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let alpha = delta * T::of(i as f64);
            let sigma = match sigma_fn {
                Some(f) => f(alpha)?,
                None => cut_time(model, p, alpha, cfg)?,
            };
            let q = match sigma {
                Some(s) => {
                    let path = shoot_angle(model, p, alpha, s, cfg.step)?;
                    Some(path.endpoint(model))
                }
                None => None,
            };
            Ok((sigma, q))
        })
        .collect();
    let mut sigmas = Vec::with_capacity(n);
    for r in phase1 {
        sigmas.push(r?);
    }

    struct DirOutcome<T: nalgebra::Scalar> {
        record: CutRecord<T>,
        q: Option<ChartPoint<T>>,
        grad_plus: Option<DVector<T>>,
        grad_minus: Option<DVector<T>>,
    }

    // Phase 2: classification and side gradients, restricted to the region.
    let margin = T::of(3.0) * delta; // keep a rim beyond the window
    let selected = |q: &Option<ChartPoint<T>>| -> bool {
        match (region, q) {
            (None, _) => true,
            (Some(_), None) => false,
            (Some((c, r)), Some(q)) => model.chart_distance(q, c) < r + margin,
        }
    };

    let eval_dir = |i: usize| -> Result<Option<DirOutcome<T>>, CutError> {
        let alpha = delta * T::of(i as f64);
        let (sigma, q0) = &sigmas[i];
        if !selected(q0) {
            return Ok(None);
        }
        let (record, q, hits) = classify_from_sigma(model, p, alpha, cfg, *sigma)?;
        let Some(sigma) = record.sigma else {
            return Ok(Some(DirOutcome {
                record,
                q: None,
                grad_plus: None,
                grad_minus: None,
            }));
        };
        let q = q.expect("finite cut time has a cutpoint");
        // Side gradients: the shot branch supplies ∇d⁺, the angularly
        // farthest other minimal branch supplies ∇d⁻.
        let gp = final_velocity(model, p, alpha, sigma, cfg.step)?;
        let circ = |a: T, b: T| {
            let mut d = (a - b).abs() % two_pi;
            if d > two_pi - d {
                d = two_pi - d;
            }
            d
        };
        let other = hits
            .iter()
            .filter(|h| circ(h.alpha, alpha) > cfg.shooting.angle_dedup)
            .max_by(|a, b| {
                circ(a.alpha, alpha)
                    .partial_cmp(&circ(b.alpha, alpha))
                    .unwrap()
            });
        let gm = match other {
            Some(h) => Some(final_velocity(model, p, h.alpha, h.length, cfg.step)?),
            None => None,
        };
        Ok(Some(DirOutcome {
            record,
            q: Some(q),
            grad_plus: Some(gp),
            grad_minus: gm,
        }))
    };

    let outcomes: Vec<Result<Option<DirOutcome<T>>, CutError>> =
        (0..n).into_par_iter().map(eval_dir).collect();
    let mut dirs = Vec::with_capacity(n);
    for o in outcomes {
        dirs.push(o?);
    }

    // Arclength weights from the direction parametrization q(α): central
    // differences over neighbors with finite cut time (phase-1 cutpoints).
    let speed = |i: usize| -> Option<T> {
        let (_, qp) = &sigmas[(i + n - 1) % n];
        let (_, qn) = &sigmas[(i + 1) % n];
        let (qp, qn) = (qp.as_ref()?, qn.as_ref()?);
        let gap = if model.n_charts() > 1 {
            let a = model.to_embedding(0, &qp.coords).expect("embedded");
            let b = model.to_embedding(0, &qn.coords).expect("embedded");
            (a - b).norm()
        } else {
            model.chart_distance(qp, qn)
        };
        Some(gap / (delta + delta))
    };

    let mut records = Vec::with_capacity(n);
    let mut samples = Vec::new();
    for i in 0..n {
        let Some(d) = &dirs[i] else {
            continue;
        };
        records.push(d.record.clone());
        let (Some(q), Some(gp)) = (&d.q, &d.grad_plus) else {
            continue;
        };
        let g = model.metric_at(q)?;
        let gp_unit = gp / g_norm(&g, gp);
        let (gm_unit, separated) = match &d.grad_minus {
            Some(gm) => {
                let u = gm / g_norm(&g, gm);
                (u, true)
            }
            None => (gp_unit.clone(), false),
        };
        let diff = &gp_unit - &gm_unit;
        let jump_raw = g_norm(&g, &diff);
        let degenerate_pair = !separated || jump_raw < T::of(1e-8);
        let (nu, jump) = if degenerate_pair {
            (g_orthogonal_2d(&g, &gp_unit), T::zero())
        } else {
            (&diff / jump_raw, jump_raw.min(T::of(2.0)))
        };
        let tangent = g_orthogonal_2d(&g, &nu);
        let record = &d.record;
        let flagged = record.geodesic_count > 2
            || record.class != CutClass::Sing
            || record.degenerate
            || degenerate_pair;
        let mult_for_weight = if record.degenerate || record.geodesic_count < 2 {
            2
        } else {
            record.geodesic_count
        };
        let weight = if flagged {
            T::zero()
        } else {
            match speed(i) {
                Some(s) => s * delta / T::of(mult_for_weight as f64),
                None => T::zero(),
            }
        };
        samples.push(CutlocusSample {
            record: record.clone(),
            q: q.clone(),
            nu,
            grad_plus: gp_unit,
            grad_minus: gm_unit,
            jump,
            weight,
            tangent,
            multiplicity: record.geodesic_count,
            flagged,
        });
    }
    Ok(CutScan { records, samples })
}

/// Extremal covectors of the superdifferential of `d_p` at `q`: the g-duals
/// of the final velocities of all minimal geodesics from `p` to `q`.
pub fn superdifferential_extremals<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    q: &ChartPoint<T>,
    cfg: &CutConfig<T>,
) -> Result<SuperdifferentialSet<T>, CutError> {
    let (hits, degenerate) = minimal_geodesics(model, p, q, cfg)?;
    let g = model.metric_at(q)?;
    let mut extremals = Vec::with_capacity(hits.len());
    for h in &hits {
        let v = final_velocity(model, p, h.alpha, h.length, cfg.step)?;
        let v = &v / g_norm(&g, &v);
        extremals.push(&g * v);
    }
    Ok(SuperdifferentialSet {
        q: q.clone(),
        extremals,
        degenerate,
    })
}

/// Distance from a covector to the convex hull of a covector set, measured
/// in chart components. Exact for hulls with at most two extremals (points
/// and segments); an upper bound otherwise.
pub fn hull_distance<T: Real>(xi: &DVector<T>, hull: &[DVector<T>]) -> T {
    let mut best = T::of(f64::INFINITY);
    for a in hull {
        best = best.min((xi - a).norm());
        for b in hull {
            let ab = b - a;
            let denom = ab.dot(&ab);
            if denom <= T::zero() {
                continue;
            }
            let s = ((xi - a).dot(&ab) / denom).clamp(T::zero(), T::one());
            let proj = a + ab * s;
            best = best.min((xi - &proj).norm());
        }
    }
    best
}

/// Upper-semicontinuity probe: every extremal along the tail of a sequence
/// converging to `q` must lie within `tol` of the superdifferential at `q`.
pub fn upper_semicontinuity_probe<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    sequence: &[ChartPoint<T>],
    tol: T,
    cfg: &CutConfig<T>,
) -> Result<bool, CutError> {
    let q = sequence.last().expect("nonempty sequence");
    let limit_set = superdifferential_extremals(model, p, q, cfg)?;
    let tail = sequence.len().saturating_sub(4).max(0);
    for qk in &sequence[tail..sequence.len() - 1] {
        let set = superdifferential_extremals(model, p, qk, cfg)?;
        for xi in &set.extremals {
            if hull_distance(xi, &limit_set.extremals) > tol {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// Second central difference quotient of `d_p` at `x` along chart axis `i`.
pub fn second_difference_quotient<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    x: &ChartPoint<T>,
    axis: usize,
    h: T,
    cfg: &CutConfig<T>,
) -> Result<T, CutError> {
    let mut up = x.coords.clone();
    let mut dn = x.coords.clone();
    up[axis] += h;
    dn[axis] -= h;
    let d0 = distance(model, p, x, cfg)?;
    let dp = distance(model, p, &ChartPoint::from_vector(up), cfg)?;
    let dm = distance(model, p, &ChartPoint::from_vector(dn), cfg)?;
    Ok((dp - d0 - d0 + dm) / (h * h))
}

/// Semiconcavity probe: max over the region samples and chart axes of the
/// second central difference quotient at scale `h`. Semiconcavity bounds
/// this from above uniformly as `h` decreases; across the cut locus the
/// matching minimum diverges to −∞ instead.
pub fn semiconcavity_probe<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    region: &[ChartPoint<T>],
    h: T,
    cfg: &CutConfig<T>,
) -> Result<T, CutError> {
    let mut worst = T::of(f64::NEG_INFINITY);
    for x in region {
        if model.chart_distance(p, x) <= h + h {
            return Err(CutError::Manifold(
                crate::error::ManifoldError::BadParameter(
                    "semiconcavity region touches the apex".into(),
                ),
            ));
        }
        for axis in 0..model.dim() {
            worst = worst.max(second_difference_quotient(model, p, x, axis, h, cfg)?);
        }
    }
    Ok(worst)
}

/// Principal direction of the `k` nearest sampled cut points around
/// `center`: the approximate tangent line of the cut locus by local PCA.
pub fn approximate_tangent_pca<T: Real>(
    model: &ManifoldModel<T>,
    points: &[ChartPoint<T>],
    center: &ChartPoint<T>,
    k: usize,
) -> DVector<T> {
    let mut scored: Vec<(T, &ChartPoint<T>)> = points
        .iter()
        .map(|q| (model.chart_distance(center, q), q))
        .collect();
    scored.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    let take = scored.iter().take(k.max(2));
    // Periodic-aware displacement relative to the center.
    let wrap = |i: usize, d: T| -> T {
        if let Some(period) = model.main_chart().axes[i].period() {
            let half = period * T::of(0.5);
            let mut d = d % period;
            if d > half {
                d -= period;
            }
            if d < -half {
                d += period;
            }
            d
        } else {
            d
        }
    };
    let mut cov = DMatrix::<T>::zeros(2, 2);
    let mut count = T::zero();
    for (_, q) in take {
        let dx = wrap(0, q.coords[0] - center.coords[0]);
        let dy = wrap(1, q.coords[1] - center.coords[1]);
        cov[(0, 0)] += dx * dx;
        cov[(0, 1)] += dx * dy;
        cov[(1, 0)] += dx * dy;
        cov[(1, 1)] += dy * dy;
        count += T::one();
    }
    cov /= count;
    // Leading eigenvector of the symmetric 2x2 covariance.
    let tr = cov[(0, 0)] + cov[(1, 1)];
    let det = cov[(0, 0)] * cov[(1, 1)] - cov[(0, 1)] * cov[(1, 0)];
    let disc = (tr * tr * T::of(0.25) - det).max(T::zero()).sqrt();
    let lambda = tr * T::of(0.5) + disc;
    let v = if cov[(0, 1)].abs() > T::of(1e-30) {
        DVector::from_vec(vec![cov[(0, 1)], lambda - cov[(0, 0)]])
    } else if cov[(0, 0)] >= cov[(1, 1)] {
        DVector::from_vec(vec![T::one(), T::zero()])
    } else {
        DVector::from_vec(vec![T::zero(), T::one()])
    };
    let n = v.norm();
    v / n
}

/// Convenience: gap between a point and the nearest point of a direction
/// sweep (used in tests to check endpoints against targets).
pub fn gap_to<T: Real>(model: &ManifoldModel<T>, q: &ChartPoint<T>, target: &ChartPoint<T>) -> T {
    point_gap(
        model,
        &crate::manifold::ChartState {
            chart: 0,
            x: q.coords.clone(),
        },
        target,
    )
}
