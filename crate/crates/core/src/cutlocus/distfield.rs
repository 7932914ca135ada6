//! Geodesic-polar distance field for models without a closed-form distance.
//!
//! A fan of geodesics is integrated from the apex together with their
//! transverse Jacobi scalars. Along each ray the distance is exactly the
//! parameter, the gradient is exactly the velocity, and the classical
//! Hessian is `(j'/j)(g − dr⊗dr)`. Queries interpolate these per *branch*
//! (a contiguous arc of fan directions reaching the neighborhood), never
//! across the cut: the minimal branch supplies `d`, each branch supplies
//! one-sided derivatives.

use nalgebra::{DMatrix, DVector, Vector3};
use std::collections::HashMap;

use crate::error::CutError;
use crate::geodesic::{GeodesicState, Integrator};
use crate::manifold::chart::ChartGeometry;
use crate::manifold::{ChartPoint, ManifoldModel};
use crate::num::Real;

#[derive(Clone, Debug)]
struct FanSample<T> {
    pos: Vector3<T>,
    t: T,
    /// j'/j of the transverse Jacobi scalar (classical Hessian coefficient).
    lambda: T,
    dir: u32,
}

#[derive(Clone, Debug)]
pub struct FieldConfig<T> {
    pub n_dirs: usize,
    pub step: T,
    /// Along-ray arclength between stored samples.
    pub store_spacing: T,
    /// Neighborhood radius for local fits.
    pub fit_radius: T,
}

impl<T: Real> Default for FieldConfig<T> {
    fn default() -> Self {
        Self {
            n_dirs: 1024,
            step: T::of(1e-3),
            store_spacing: T::of(8e-3),
            fit_radius: T::of(0.035),
        }
    }
}

/// One smooth branch of the distance function at a query point.
#[derive(Clone, Debug)]
pub struct BranchEval<T> {
    pub length: T,
    /// Gradient vector in main-chart components (unit up to fit error).
    pub grad: DVector<T>,
    /// Classical Hessian coefficient j'/j.
    pub lambda: T,
    /// Range of fan direction indices feeding this branch.
    pub dir_span: (u32, u32),
    pub n_samples: usize,
}

pub struct DistanceField<T> {
    samples: Vec<FanSample<T>>,
    grid: HashMap<(i32, i32, i32), Vec<u32>>,
    cell: T,
    n_dirs: usize,
    pub apex: ChartPoint<T>,
    pub config: FieldConfig<T>,
    t_max: T,
}

impl<T: Real> DistanceField<T> {
    pub fn build(
        model: &ManifoldModel<T>,
        p: &ChartPoint<T>,
        config: FieldConfig<T>,
    ) -> Result<Self, CutError> {
        let t_max = model
            .diameter_bound()
            .unwrap_or_else(|| T::of(20.0));
        let p = model.reduce(p);
        let lifted = model.lift(&p);
        let integrator = Integrator::new(model, config.step);
        let two_pi = T::two_pi();
        let mut samples: Vec<FanSample<T>> = Vec::new();
        for i in 0..config.n_dirs {
            let alpha = two_pi * T::of(i as f64 / config.n_dirs as f64);
            let v = model.direction(&lifted, alpha);
            let frac_pi_2 = T::pi() * T::of(0.5);
            let normal = model.direction(&lifted, alpha + frac_pi_2);
            let start = GeodesicState::with_jacobi(lifted.chart, &lifted.x, &v, &normal);
            let mut next_store = T::zero();
            let mut stopped = false;
            integrator
                .integrate(start, t_max, |t, s| {
                    if stopped || t < next_store {
                        return;
                    }
                    let (j, w, n) = s.jacobi().expect("jacobi state");
                    let x = s.position();
                    let g = model.chart(s.chart).metric(&x);
                    let jn = (&g * &j).dot(&n);
                    let wn = (&g * &w).dot(&n);
                    if t > T::of(0.05) && jn <= T::of(1e-9) {
                        // First conjugate point: the ray is no longer even a
                        // local branch of the distance beyond here.
                        stopped = true;
                        return;
                    }
                    let lambda = if t <= T::of(0.05) {
                        // Near the apex j ≈ t; avoid 0/0 at the first sample.
                        if t <= T::zero() {
                            T::of(f64::INFINITY)
                        } else {
                            wn / jn
                        }
                    } else {
                        wn / jn
                    };
                    let pos = model
                        .to_embedding(s.chart, &x)
                        .expect("field models are embedded");
                    if t > T::zero() {
                        samples.push(FanSample {
                            pos,
                            t,
                            lambda,
                            dir: i as u32,
                        });
                    }
                    next_store += config.store_spacing;
                })
                .map_err(CutError::Geodesic)?;
        }
        let cell = config.fit_radius;
        let mut grid: HashMap<(i32, i32, i32), Vec<u32>> = HashMap::new();
        for (idx, s) in samples.iter().enumerate() {
            grid.entry(Self::key(cell, &s.pos))
                .or_default()
                .push(idx as u32);
        }
        Ok(Self {
            samples,
            grid,
            cell,
            n_dirs: config.n_dirs,
            apex: p,
            config,
            t_max,
        })
    }

    fn key(cell: T, pos: &Vector3<T>) -> (i32, i32, i32) {
        (
            (pos[0] / cell).floor().as_f64() as i32,
            (pos[1] / cell).floor().as_f64() as i32,
            (pos[2] / cell).floor().as_f64() as i32,
        )
    }

    fn gather(&self, pos: &Vector3<T>, radius: T, shells: i32) -> Vec<u32> {
        let base = Self::key(self.cell, pos);
        let mut out = Vec::new();
        let r2 = radius * radius;
        for dx in -shells..=shells {
            for dy in -shells..=shells {
                for dz in -shells..=shells {
                    if let Some(bucket) =
                        self.grid.get(&(base.0 + dx, base.1 + dy, base.2 + dz))
                    {
                        for &i in bucket {
                            let s = &self.samples[i as usize];
                            if (s.pos - pos).norm_squared() <= r2 {
                                out.push(i);
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// Evaluate every branch reaching the neighborhood of `x`, sorted by
    /// branch length. Directions outside `exclude` (a circular index window)
    /// only, when given.
    pub fn branches_at(
        &self,
        model: &ManifoldModel<T>,
        x: &ChartPoint<T>,
        exclude: Option<(u32, u32)>,
    ) -> Result<Vec<BranchEval<T>>, CutError> {
        self.branches_at_impl(model, x, exclude, true)
    }

    fn branches_at_impl(
        &self,
        model: &ManifoldModel<T>,
        x: &ChartPoint<T>,
        exclude: Option<(u32, u32)>,
        allow_grow: bool,
    ) -> Result<Vec<BranchEval<T>>, CutError> {
        let x = model.reduce(x);
        let pos = model
            .to_embedding(0, &x.coords)
            .expect("field models are embedded");
        // Samples from the excluded direction window never count: what is
        // left splits into branches that never mix with the excluded ray.
        let keep = |ids: &mut Vec<u32>| {
            if let Some((lo, hi)) = exclude {
                let inside = |d: u32| {
                    if lo <= hi {
                        d >= lo && d <= hi
                    } else {
                        d >= lo || d <= hi
                    }
                };
                ids.retain(|&i| !inside(self.samples[i as usize].dir));
            }
        };
        let mut radius = self.config.fit_radius;
        let mut ids = self.gather(&pos, radius, 1);
        keep(&mut ids);
        let mut grow = 0;
        while allow_grow && ids.len() < 12 && grow < 3 {
            radius = radius * T::of(1.8);
            grow += 1;
            ids = self.gather(&pos, radius, 1 + grow);
            keep(&mut ids);
        }
        if ids.is_empty() {
            return Err(CutError::NoConvergence {
                detail: format!(
                    "distance field has no samples within {:.3} of {:?}",
                    radius.as_f64(),
                    x.coords.as_slice()
                ),
            });
        }
        // Split candidates into branches: contiguous arcs of fan directions.
        let mut dirs: Vec<u32> = ids.iter().map(|&i| self.samples[i as usize].dir).collect();
        dirs.sort_unstable();
        dirs.dedup();
        let gap = (self.n_dirs / 8).max(4) as u32;
        let n = self.n_dirs as u32;
        let mut cuts: Vec<usize> = Vec::new();
        for k in 0..dirs.len() {
            let prev = dirs[(k + dirs.len() - 1) % dirs.len()];
            let cur = dirs[k];
            let circ_gap = (cur + n - prev) % n;
            if circ_gap > gap {
                cuts.push(k);
            }
        }
        let arcs: Vec<Vec<u32>> = if cuts.is_empty() {
            vec![dirs.clone()]
        } else {
            let mut arcs = Vec::new();
            for w in 0..cuts.len() {
                let start = cuts[w];
                let end = cuts[(w + 1) % cuts.len()];
                let mut arc = Vec::new();
                let mut k = start;
                loop {
                    arc.push(dirs[k]);
                    k = (k + 1) % dirs.len();
                    if k == end {
                        break;
                    }
                }
                arcs.push(arc);
            }
            arcs
        };

        // Tangent frame at the query point.
        let surf = match &model.chart(0).geometry {
            ChartGeometry::Surface(s) => s,
            _ => unreachable!(),
        };
        let jac = surf.embed_jacobian(&x.coords);
        let e1 = jac[0].normalize();
        let e2 = (jac[1] - e1 * jac[1].dot(&e1)).normalize();

        let mut out = Vec::new();
        for arc in arcs {
            let members: Vec<&FanSample<T>> = ids
                .iter()
                .map(|&i| &self.samples[i as usize])
                .filter(|s| arc.contains(&s.dir))
                .collect();
            if members.len() < 6 {
                continue;
            }
            if let Some(eval) = self.fit_branch(&members, &pos, &e1, &e2, radius) {
                // Convert the embedded gradient to chart components.
                let g = model.chart(0).metric(&x.coords);
                let ginv = g.try_inverse().expect("metric invertible");
                let rhs = DVector::from_vec(vec![jac[0].dot(&eval.0), jac[1].dot(&eval.0)]);
                let grad = &ginv * rhs;
                let span = (
                    *arc.first().expect("nonempty arc"),
                    *arc.last().expect("nonempty arc"),
                );
                out.push(BranchEval {
                    length: eval.1,
                    grad,
                    lambda: eval.2,
                    dir_span: span,
                    n_samples: members.len(),
                });
            }
        }
        out.sort_by(|a, b| a.length.partial_cmp(&b.length).unwrap());
        Ok(out)
    }

    /// Weighted quadratic fit of the branch distance over tangent-plane
    /// coordinates; returns (embedded gradient, value, lambda).
    fn fit_branch(
        &self,
        members: &[&FanSample<T>],
        pos: &Vector3<T>,
        e1: &Vector3<T>,
        e2: &Vector3<T>,
        radius: T,
    ) -> Option<(Vector3<T>, T, T)> {
        let m = members.len();
        let n_basis = 6;
        let mut ata = DMatrix::<T>::zeros(n_basis, n_basis);
        let mut atb = DVector::<T>::zeros(n_basis);
        let mut lam_num = T::zero();
        let mut lam_den = T::zero();
        for s in members {
            let d = s.pos - pos;
            let u = d.dot(e1);
            let v = d.dot(e2);
            let r = (u * u + v * v).sqrt();
            let w = {
                let q = (T::one() - (r / (radius * T::of(1.01))).powi(2)).max(T::of(1e-6));
                q * q
            };
            let basis = [
                T::one(),
                u,
                v,
                u * u * T::of(0.5),
                u * v,
                v * v * T::of(0.5),
            ];
            for a in 0..n_basis {
                for b in 0..n_basis {
                    ata[(a, b)] += w * basis[a] * basis[b];
                }
                atb[a] += w * basis[a] * s.t;
            }
            // Inverse-distance weighting of the Hessian coefficient.
            let wl = w / (r + T::of(1e-4));
            if s.lambda.is_finite() {
                lam_num += wl * s.lambda;
                lam_den += wl;
            }
        }
        let _ = m;
        let coeffs = ata.lu().solve(&atb)?;
        let grad = *e1 * coeffs[1] + *e2 * coeffs[2];
        let lambda = if lam_den > T::zero() {
            lam_num / lam_den
        } else {
            T::zero()
        };
        Some((grad, coeffs[0], lambda))
    }

    /// Distance to the apex: minimum over branches.
    pub fn distance(&self, model: &ManifoldModel<T>, x: &ChartPoint<T>) -> Result<T, CutError> {
        let branches = self.branches_at(model, x, None)?;
        branches
            .first()
            .map(|b| b.length)
            .ok_or_else(|| CutError::NoConvergence {
                detail: "no branch fit at query point".into(),
            })
    }

    /// Cut time along the fan direction `alpha` by bisecting
    /// `[other-branch distance](γ(t)) < t − tol` against the field.
    pub fn sigma_of_angle(
        &self,
        model: &ManifoldModel<T>,
        alpha: T,
    ) -> Result<Option<T>, CutError> {
        // Push the window past the diameter bound: the predicate margin
        // only opens once t exceeds the cut time by the field tolerance.
        let window_end = self.t_max + T::of(0.3);
        let path =
            crate::geodesic::shoot_angle(model, &self.apex, alpha, window_end, self.config.step)
                .map_err(CutError::Geodesic)?;
        let two_pi = T::two_pi();
        let frac = (alpha % two_pi + two_pi) % two_pi / two_pi;
        let center = (frac * T::of(self.n_dirs as f64)).as_f64() as i64;
        let window = (self.n_dirs / 8) as i64;
        let n = self.n_dirs as i64;
        let lo = ((center - window) % n + n) % n;
        let hi = (center + window) % n;
        let exclude = Some((lo as u32, hi as u32));
        let tol = T::of(1e-4);
        let predicate = |t: T| -> Result<bool, CutError> {
            let (state, _) = crate::geodesic::eval_on_path(model, &path, t)
                .map_err(CutError::Geodesic)?;
            let xq = model.to_main(&state);
            // Base radius only: growing the gather near the apex would let
            // foreign rays reproduce the smooth distance and fake a branch.
            let branches = match self.branches_at_impl(model, &xq, exclude, false) {
                Ok(b) => b,
                // No foreign samples nearby means no competing branch.
                Err(CutError::NoConvergence { .. }) => return Ok(false),
                Err(e) => return Err(e),
            };
            Ok(branches.first().map(|b| b.length < t - tol).unwrap_or(false))
        };
        if !predicate(window_end)? {
            if !model.is_compact() {
                return Ok(None);
            }
            return Err(CutError::InconsistentPredicate {
                lo: 0.0,
                hi: window_end.as_f64(),
                trace: "field predicate false past the diameter bound".into(),
            });
        }
        let mut lo_t = T::of(0.1);
        let mut hi_t = window_end;
        if predicate(lo_t)? {
            return Err(CutError::InconsistentPredicate {
                lo: lo_t.as_f64(),
                hi: window_end.as_f64(),
                trace: "field predicate already true near the apex".into(),
            });
        }
        while hi_t - lo_t > T::of(1e-6) {
            let mid = (lo_t + hi_t) * T::of(0.5);
            if predicate(mid)? {
                hi_t = mid;
            } else {
                lo_t = mid;
            }
        }
        Ok(Some((lo_t + hi_t) * T::of(0.5)))
    }

    pub fn n_samples(&self) -> usize {
        self.samples.len()
    }
}
