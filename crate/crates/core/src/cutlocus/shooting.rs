//! Multistart shooting: find geodesics connecting two points.

use nalgebra::DVector;

use super::types::GeodesicHit;
use crate::error::CutError;
use crate::geodesic::{eval_on_path, shoot_angle, GeodesicPath};
use crate::manifold::{ChartPoint, ChartState, ManifoldModel};
use crate::num::Real;

#[derive(Clone, Debug)]
pub struct ShootingConfig<T> {
    pub n_starts: usize,
    pub coarse_step: T,
    pub fine_step: T,
    /// Endpoint gap below which a candidate counts as connecting.
    pub target_tol: T,
    /// Angular resolution separating distinct geodesics.
    pub angle_dedup: T,
    /// Cap on the number of reported geodesics.
    pub max_count: usize,
}

impl<T: Real> Default for ShootingConfig<T> {
    fn default() -> Self {
        Self {
            n_starts: 64,
            coarse_step: T::of(5e-3),
            fine_step: T::of(1e-3),
            target_tol: T::of(1e-6),
            angle_dedup: T::of(1e-4),
            max_count: 64,
        }
    }
}

/// Gap between a path state and a main-chart target: embedded chord for
/// surface models, periodic chart distance for flat ones.
pub fn point_gap<T: Real>(
    model: &ManifoldModel<T>,
    state: &ChartState<T>,
    q: &ChartPoint<T>,
) -> T {
    if model.n_charts() > 1 {
        let a = model.to_embedding(state.chart, &state.x).expect("embedded");
        let b = model.to_embedding(0, &q.coords).expect("embedded");
        (a - b).norm()
    } else {
        model.chart_distance(&model.to_main(state), q)
    }
}

/// Closest approach of a stored path to the target: parabolic refinement of
/// the squared gap around the best sample, then one exact re-evaluation.
fn closest_approach<T: Real>(
    model: &ManifoldModel<T>,
    path: &GeodesicPath<T>,
    q: &ChartPoint<T>,
) -> Result<(T, T), CutError> {
    let gaps: Vec<T> = path
        .samples
        .iter()
        .map(|s| {
            point_gap(
                model,
                &ChartState {
                    chart: s.chart,
                    x: s.x.clone(),
                },
                q,
            )
        })
        .collect();
    let mut best = 0usize;
    for (i, g) in gaps.iter().enumerate() {
        if *g < gaps[best] {
            best = i;
        }
    }
    let t_best = path.samples[best].t;
    if best == 0 || best + 1 == gaps.len() {
        return Ok((t_best, gaps[best]));
    }
    // Vertex of the parabola through the squared gaps at best-1, best, best+1.
    let (t0, t1, t2) = (
        path.samples[best - 1].t,
        t_best,
        path.samples[best + 1].t,
    );
    let (y0, y1, y2) = (
        gaps[best - 1] * gaps[best - 1],
        gaps[best] * gaps[best],
        gaps[best + 1] * gaps[best + 1],
    );
    let denom = (y0 - y1) + (y2 - y1);
    let t_star = if denom <= T::zero() {
        t_best
    } else {
        let h = t1 - t0;
        let shift = (y0 - y2) / (denom + denom) * h;
        (t1 + shift).clamp(t0, t2)
    };
    let (state, _) = eval_on_path(model, path, t_star)?;
    Ok((t_star, point_gap(model, &state, q)))
}

/// Miss distance of the geodesic at angle `alpha`, swept over `[0, t_max]`.
fn sweep<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    q: &ChartPoint<T>,
    alpha: T,
    t_max: T,
    step: T,
) -> Result<(T, T), CutError> {
    let path = shoot_angle(model, p, alpha, t_max, step)?;
    closest_approach(model, &path, q)
}

/// Golden-section refinement of the miss over an angular bracket.
fn refine_angle<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    q: &ChartPoint<T>,
    alpha0: T,
    half_width: T,
    t_max: T,
    cfg: &ShootingConfig<T>,
) -> Result<GeodesicHit<T>, CutError> {
    let inv_phi = T::of(0.618_033_988_749_894_9);
    let mut lo = alpha0 - half_width;
    let mut hi = alpha0 + half_width;
    let coarse_until = T::of(2e-3);
    let stop = T::of(1e-9);
    let mut a = hi - (hi - lo) * inv_phi;
    let mut b = lo + (hi - lo) * inv_phi;
    let step_for = |width: T, cfg: &ShootingConfig<T>| {
        if width > coarse_until {
            cfg.coarse_step
        } else {
            cfg.fine_step
        }
    };
    let mut fa = sweep(model, p, q, a, t_max, step_for(hi - lo, cfg))?.1;
    let mut fb = sweep(model, p, q, b, t_max, step_for(hi - lo, cfg))?.1;
    while hi - lo > stop {
        let step = step_for(hi - lo, cfg);
        if fa < fb {
            hi = b;
            b = a;
            fb = fa;
            a = hi - (hi - lo) * inv_phi;
            fa = sweep(model, p, q, a, t_max, step)?.1;
        } else {
            lo = a;
            a = b;
            fa = fb;
            b = lo + (hi - lo) * inv_phi;
            fb = sweep(model, p, q, b, t_max, step)?.1;
        }
    }
    let alpha = (lo + hi) * T::of(0.5);
    let (t, miss) = sweep(model, p, q, alpha, t_max, cfg.fine_step)?;
    Ok(GeodesicHit {
        alpha,
        length: t,
        miss,
    })
}

pub struct ConnectOutcome<T> {
    pub hits: Vec<GeodesicHit<T>>,
    /// True when the coarse scan suggested a continuum of minimizers and
    /// refinement was capped.
    pub degenerate: bool,
}

/// Find geodesics from `p` to `q`, refining the most promising of
/// `cfg.n_starts` directions. `refine_cap` limits the refinement work for
/// callers that need only a multiplicity count; `None` refines every
/// surviving start (up to `cfg.max_count`).
pub fn connect<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    q: &ChartPoint<T>,
    cfg: &ShootingConfig<T>,
    refine_cap: Option<usize>,
) -> Result<ConnectOutcome<T>, CutError> {
    let t_max = match model.closed_form_distance(p, q) {
        Some(d) => d + T::of(0.05),
        None => model
            .diameter_bound()
            .unwrap_or_else(|| model.chart_distance(p, q) * T::of(1.5) + T::of(1.0)),
    };
    let two_pi = T::two_pi();
    let delta = two_pi / T::of(cfg.n_starts as f64);
    // Coarse scan.
    let mut scored: Vec<(T, T)> = Vec::with_capacity(cfg.n_starts);
    for i in 0..cfg.n_starts {
        let alpha = delta * T::of(i as f64);
        let (_, miss) = sweep(model, p, q, alpha, t_max, cfg.coarse_step)?;
        scored.push((alpha, miss));
    }
    // A true connecting direction is within delta/2 of some start whose
    // geodesic passes within ~ t_max · delta of the target.
    let prune = t_max * delta;
    let mut survivors: Vec<(T, T)> = scored.iter().copied().filter(|s| s.1 < prune).collect();
    survivors.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let degenerate = survivors.len() >= cfg.n_starts / 2;
    let cap = refine_cap
        .unwrap_or(cfg.max_count)
        .min(if degenerate && refine_cap.is_some() {
            refine_cap.unwrap()
        } else {
            cfg.max_count
        });

    let mut hits: Vec<GeodesicHit<T>> = Vec::new();
    for (alpha, _) in survivors.into_iter().take(cap) {
        let hit = refine_angle(model, p, q, alpha, delta, t_max, cfg)?;
        if hit.miss < cfg.target_tol {
            hits.push(hit);
        }
    }
    hits.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
    Ok(ConnectOutcome { hits, degenerate })
}

/// Cluster hits by launch angle and keep the shortest per cluster.
pub fn dedup_hits<T: Real>(hits: &[GeodesicHit<T>], resolution: T) -> Vec<GeodesicHit<T>> {
    let two_pi = T::two_pi();
    let mut out: Vec<GeodesicHit<T>> = Vec::new();
    for h in hits {
        let mut merged = false;
        for kept in out.iter_mut() {
            let mut d = (h.alpha - kept.alpha).abs() % two_pi;
            if d > two_pi - d {
                d = two_pi - d;
            }
            if d < resolution {
                if h.length < kept.length {
                    *kept = h.clone();
                }
                merged = true;
                break;
            }
        }
        if !merged {
            out.push(h.clone());
        }
    }
    out.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
    out
}

/// Final velocity (main-chart components) of the geodesic from `p` at angle
/// `alpha`, evaluated at arclength `t`.
pub fn final_velocity<T: Real>(
    model: &ManifoldModel<T>,
    p: &ChartPoint<T>,
    alpha: T,
    t: T,
    step: T,
) -> Result<DVector<T>, CutError> {
    let path = shoot_angle(model, p, alpha, t, step)?;
    Ok(path.endpoint_velocity_main(model))
}
