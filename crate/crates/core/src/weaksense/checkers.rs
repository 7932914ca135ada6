//! Barrier and viscosity checkers built on dyadic difference quotients.
//!
//! Verdict discipline: `Holds` needs an explicit witness jet (or a proof
//! that no admissible jet exists), `Fails` needs a certified obstruction —
//! slope intervals that cannot intersect, or difference quotients that
//! persistently exceed the bound for every admissible gradient. Anything
//! the finite search cannot certify is `Inconclusive`.

use nalgebra::{DMatrix, DVector};

use super::types::{BoundData, CheckProblem, QuadraticJet, Verdict};
use crate::num::Real;

/// Search parameters shared by both checkers.
#[derive(Clone, Debug)]
pub struct SearchBudget<T> {
    /// Outer radius of the dyadic ladder.
    pub r0: T,
    /// Number of dyadic levels.
    pub levels: usize,
    /// Probe directions on the unit circle (2 in one dimension).
    pub directions: usize,
    /// Decision margin at the verdict boundary.
    pub resolution: T,
}

impl<T: Real> Default for SearchBudget<T> {
    fn default() -> Self {
        Self {
            r0: T::of(0.05),
            levels: 26,
            directions: 16,
            resolution: T::of(1e-3),
        }
    }
}

struct Quotients<T> {
    dirs: Vec<DVector<T>>,
    /// radii of the dyadic ladder, largest first.
    radii: Vec<T>,
    /// `(f(x + r e) − f(x))` per (direction, level).
    deltas: Vec<Vec<T>>,
    slope_window: (usize, usize),
    curv_window: (usize, usize),
    /// Worst spread of the tail slopes: the gradient estimation noise.
    slope_spread: T,
}

impl<T: Real> Quotients<T> {
    fn slope(&self, d: usize, k: usize) -> T {
        self.deltas[d][k] / self.radii[k]
    }

    fn curvature(&self, d: usize, k: usize, p_dot_e: T) -> T {
        let r = self.radii[k];
        (self.deltas[d][k] - r * p_dot_e) * T::of(2.0) / (r * r)
    }
}

fn collect_quotients<T: Real>(
    problem: &CheckProblem<T>,
    x: &DVector<T>,
    budget: &SearchBudget<T>,
) -> Quotients<T> {
    let dim = problem.f.dim();
    let n_dirs = if dim == 1 { 2 } else { budget.directions };
    let dirs: Vec<DVector<T>> = (0..n_dirs)
        .map(|k| {
            if dim == 1 {
                DVector::from_vec(vec![if k == 0 { T::one() } else { -T::one() }])
            } else {
                let a = T::two_pi() * T::of(k as f64 / n_dirs as f64);
                DVector::from_vec(vec![a.cos(), a.sin()])
            }
        })
        .collect();
    let resolution = problem.f.resolution();
    let radii: Vec<T> = (0..budget.levels)
        .map(|k| budget.r0 * T::of(0.5).powi(k as i32))
        .filter(|r| *r >= resolution)
        .collect();
    let f0 = problem.f.eval(x);
    let deltas = dirs
        .iter()
        .map(|e| {
            radii
                .iter()
                .map(|r| problem.f.eval(&(x + e * *r)) - f0)
                .collect()
        })
        .collect();
    let n = radii.len();
    // Slopes stabilize at the small end; curvature quotients lose digits to
    // cancellation below ~1e-5, so they use a mid-ladder window.
    let slope_window = (n.saturating_sub(8), n);
    let curv_hi = radii
        .iter()
        .position(|r| *r < T::of(2e-4))
        .unwrap_or(n.saturating_sub(4));
    let curv_window = (curv_hi.min(n.saturating_sub(4)), n.min(curv_hi + 8));
    let mut quot = Quotients {
        dirs,
        radii,
        deltas,
        slope_window,
        curv_window,
        slope_spread: T::zero(),
    };
    let mut spread = T::zero();
    for d in 0..quot.dirs.len() {
        let mut smin = T::of(f64::INFINITY);
        let mut smax = T::of(f64::NEG_INFINITY);
        for k in slope_window.0..slope_window.1 {
            let s = quot.slope(d, k);
            smin = smin.min(s);
            smax = smax.max(s);
        }
        spread = spread.max(smax - smin);
    }
    quot.slope_spread = spread;
    quot
}

/// The bound matrix `B` such that admissible jets satisfy
/// `Q − Γ^k p_k ≤ B` in the relevant sense, plus the comparator.
struct BoundEval<T> {
    gamma_p: DMatrix<T>,
    kind: BoundKind<T>,
    metric: DMatrix<T>,
}

enum BoundKind<T> {
    Hessian(DMatrix<T>),
    Laplacian(T),
    Directional(DVector<T>, T),
}

fn bound_eval<T: Real>(
    problem: &CheckProblem<T>,
    x: &DVector<T>,
    p: &DVector<T>,
) -> BoundEval<T> {
    let dim = problem.f.dim();
    let xp = crate::manifold::ChartPoint::from_vector(x.clone());
    let (gamma_p, metric) = match problem.model {
        Some(m) => {
            let gs = m.christoffel_at(&xp).expect("interior point");
            let mut gp = DMatrix::zeros(dim, dim);
            for k in 0..dim {
                gp += &gs[k] * p[k];
            }
            (gp, m.metric_at(&xp).expect("interior point"))
        }
        None => (DMatrix::zeros(dim, dim), DMatrix::identity(dim, dim)),
    };
    let kind = match &problem.bound {
        BoundData::Hessian(a) => BoundKind::Hessian(a(x)),
        BoundData::Laplacian(alpha) => BoundKind::Laplacian(alpha(x)),
        BoundData::Directional(w, c) => BoundKind::Directional(w(x), c(x)),
    };
    BoundEval {
        gamma_p,
        kind,
        metric,
    }
}

impl<T: Real> BoundEval<T> {
    /// Largest violation of `Hess h ≤ bound (+ slack·g)` for the jet matrix
    /// `Q`; positive means violated.
    fn violation(&self, q: &DMatrix<T>, slack: T) -> T {
        let hess = q - &self.gamma_p;
        match &self.kind {
            BoundKind::Hessian(a) => {
                let diff = &hess - a - &self.metric * slack;
                // Largest eigenvalue of the symmetric difference (dim ≤ 2).
                if diff.nrows() == 1 {
                    diff[(0, 0)]
                } else {
                    let tr = diff[(0, 0)] + diff[(1, 1)];
                    let det = diff[(0, 0)] * diff[(1, 1)] - diff[(0, 1)] * diff[(1, 0)];
                    let disc = (tr * tr * T::of(0.25) - det).max(T::zero()).sqrt();
                    tr * T::of(0.5) + disc
                }
            }
            BoundKind::Laplacian(alpha) => {
                let ginv = self.metric.clone().try_inverse().expect("metric invertible");
                let mut lap = T::zero();
                for i in 0..hess.nrows() {
                    for j in 0..hess.ncols() {
                        lap += ginv[(i, j)] * hess[(i, j)];
                    }
                }
                lap - *alpha - slack
            }
            BoundKind::Directional(w, c) => {
                let ww = (&hess * w).dot(w);
                let gw = (&self.metric * w).dot(w);
                ww - *c - slack * gw
            }
        }
    }

    /// The matrix `B` with `Q ≤ B` equivalent to the bound (+slack), used
    /// to build maximal admissible jets in the Hessian case; for the other
    /// kinds returns a convenient representative.
    fn ceiling(&self, slack: T) -> DMatrix<T> {
        match &self.kind {
            BoundKind::Hessian(a) => a + &self.gamma_p + &self.metric * slack,
            BoundKind::Laplacian(alpha) => {
                // Any Q with trace_g = α works; split evenly across g.
                let dim = self.metric.nrows();
                &self.gamma_p + &self.metric * ((*alpha + slack) / T::of(dim as f64))
            }
            BoundKind::Directional(w, c) => {
                let gw = (&self.metric * w).dot(w);
                let wl = &self.metric * w;
                &self.gamma_p + &wl * wl.transpose() * ((*c + slack) / (gw * gw))
            }
        }
    }
}

/// Containment of the jet against `f` on a shrinking sampled neighborhood.
/// `above` checks `h ≥ f`; returns the number of consecutive passing dyadic
/// levels counted upward from the smallest *testable* radius. Radii where
/// the gradient estimation noise swamps the quadratic signal are excluded:
/// below `r_floor = 4·spread/|Q|` containment is not decidable from data.
fn containment_depth<T: Real>(
    problem: &CheckProblem<T>,
    jet: &QuadraticJet<T>,
    quot: &Quotients<T>,
    above: bool,
) -> usize {
    let x = &jet.base;
    let f0 = problem.f.eval(x);
    let tol = T::of(1e-11) * (T::one() + f0.abs());
    let q_scale = jet.quadratic.abs().max().max(T::of(1e-3));
    // Below the noise floor the gradient estimate masks the comparison;
    // below the signal floor the quadratic term drowns in the absolute
    // tolerance. Neither regime can certify anything.
    let noise_floor = T::of(4.0) * quot.slope_spread / q_scale;
    let signal_floor = (T::of(20.0) * tol / q_scale).sqrt();
    let r_floor = noise_floor.max(signal_floor);
    // Several probe radii inside each dyadic octave so oscillating
    // functions cannot slip between the rungs.
    let sub = [T::of(1.0), T::of(1.21), T::of(1.44), T::of(1.69)];
    let mut depth = 0;
    for k in (0..quot.radii.len()).rev() {
        if quot.radii[k] < r_floor {
            continue;
        }
        let mut ok = true;
        'level: for e in &quot.dirs {
            for m in sub {
                let r = quot.radii[k] * m;
                let y = x + e * r;
                let fy = problem.f.eval(&y);
                let d = e * r;
                let hy =
                    f0 + jet.gradient.dot(&d) + (&jet.quadratic * &d).dot(&d) * T::of(0.5);
                let gap = if above { hy - fy } else { fy - hy };
                if gap < -tol {
                    ok = false;
                    break 'level;
                }
            }
        }
        if ok {
            depth += 1;
        } else {
            break;
        }
    }
    depth
}

/// Candidate gradients from the slope ladders: pairwise intersections of
/// active slope constraints plus the central-difference gradient.
fn gradient_candidates<T: Real>(quot: &Quotients<T>, upper: bool) -> Vec<DVector<T>> {
    let dim = quot.dirs[0].len();
    let n = quot.dirs.len();
    let (lo, hi) = quot.slope_window;
    // Extreme slope per direction over the tail window.
    let extreme: Vec<T> = (0..n)
        .map(|d| {
            let mut v = if upper {
                T::of(f64::NEG_INFINITY)
            } else {
                T::of(f64::INFINITY)
            };
            for k in lo..hi {
                let s = quot.slope(d, k);
                v = if upper { v.max(s) } else { v.min(s) };
            }
            v
        })
        .collect();
    let mut out: Vec<DVector<T>> = Vec::new();
    if dim == 1 {
        // Constraints: p ≥ extreme[+] and −p ≥ extreme[−] (upper case).
        out.push(DVector::from_vec(vec![extreme[0]]));
        out.push(DVector::from_vec(vec![-extreme[1]]));
        out.push(DVector::from_vec(vec![
            (extreme[0] - extreme[1]) * T::of(0.5),
        ]));
    } else {
        for a in 0..n {
            for b in (a + 1)..n {
                let ea = &quot.dirs[a];
                let eb = &quot.dirs[b];
                let det = ea[0] * eb[1] - ea[1] * eb[0];
                if det.abs() < T::of(1e-6) {
                    continue;
                }
                let p = DVector::from_vec(vec![
                    (extreme[a] * eb[1] - extreme[b] * ea[1]) / det,
                    (extreme[b] * ea[0] - extreme[a] * eb[0]) / det,
                ]);
                out.push(p);
            }
        }
        // Central-difference gradient from opposite directions; the
        // half-circle frame sums e eᵀ to (half/2)·I.
        let half = n / 2;
        let mut grad = DVector::zeros(dim);
        let (slo, shi) = quot.slope_window;
        let k = (slo + shi) / 2;
        for d in 0..half {
            let s_plus = quot.slope(d, k);
            let s_minus = quot.slope(d + half, k);
            let e = &quot.dirs[d];
            grad += e * ((s_plus - s_minus) * T::of(0.5));
        }
        grad *= T::of(2.0 / half as f64);
        out.push(grad);
    }
    // Deduplicate.
    let mut dedup: Vec<DVector<T>> = Vec::new();
    for p in out {
        if p.iter().any(|v| !v.is_finite()) {
            continue;
        }
        if dedup.iter().all(|q| (&p - q).norm() > T::of(1e-7)) {
            dedup.push(p);
        }
    }
    dedup.truncate(48);
    dedup
}

/// Worst slope-constraint violation of a gradient candidate: positive means
/// `p` is infeasible for jets on the chosen side.
fn slope_violation<T: Real>(quot: &Quotients<T>, p: &DVector<T>, upper: bool) -> T {
    let (lo, hi) = quot.slope_window;
    let mut worst = T::of(f64::NEG_INFINITY);
    for (d, e) in quot.dirs.iter().enumerate() {
        let pe = p.dot(e);
        let mut extreme = if upper {
            T::of(f64::NEG_INFINITY)
        } else {
            T::of(f64::INFINITY)
        };
        for k in lo..hi {
            let s = quot.slope(d, k);
            extreme = if upper { extreme.max(s) } else { extreme.min(s) };
        }
        // Upper jets need p·e ≥ limsup slopes; lower jets p·e ≤ liminf.
        let viol = if upper { extreme - pe } else { pe - extreme };
        worst = worst.max(viol);
    }
    worst
}

/// Barrier sense at `x` with slack `eps`: search for an upper-touching jet
/// whose Hessian respects `bound + eps·g`; certify failure through slope
/// obstructions or persistent curvature excess.
pub fn check_barrier<T: Real>(
    problem: &CheckProblem<T>,
    x: &DVector<T>,
    eps: T,
    budget: &SearchBudget<T>,
) -> (Verdict, Vec<String>) {
    let quot = collect_quotients(problem, x, budget);
    let res = budget.resolution;
    let candidates = gradient_candidates(&quot, true);
    let feasible: Vec<&DVector<T>> = candidates
        .iter()
        .filter(|p| slope_violation(&quot, p, true) < res)
        .collect();
    if feasible.is_empty() {
        // Certified: the one-sided slopes admit no C¹ upper contact.
        let worst = candidates
            .iter()
            .map(|p| slope_violation(&quot, p, true))
            .fold(T::of(f64::INFINITY), |a, b| a.min(b));
        if worst > res {
            return (
                Verdict::Fails,
                vec![format!(
                    "slope obstruction: no admissible gradient (min violation {:.3e})",
                    worst.as_f64()
                )],
            );
        }
        return (Verdict::Inconclusive, vec!["no gradient candidates".into()]);
    }

    // Try each feasible gradient with the maximal admissible quadratic.
    for p in &feasible {
        let be = bound_eval(problem, x, p);
        let q = be.ceiling(eps);
        let jet = QuadraticJet {
            base: x.clone(),
            gradient: (*p).clone(),
            quadratic: q.clone(),
        };
        let depth = containment_depth(problem, &jet, &quot, true);
        if depth >= 4 {
            return (
                Verdict::Holds,
                vec![format!(
                    "barrier jet: p = {:?}, contained on {} dyadic levels",
                    jet.gradient.as_slice(),
                    depth
                )],
            );
        }
    }

    // Certification of failure: every feasible gradient needs, in some
    // direction, curvature above the bound on every scale window.
    let (clo, chi) = quot.curv_window;
    let windows = 2.max((chi - clo) / 4);
    let mut all_obstructed = true;
    let mut worst_excess = T::of(f64::INFINITY);
    for p in &feasible {
        let be = bound_eval(problem, x, p);
        let mut dir_excess = T::of(f64::NEG_INFINITY);
        for (d, e) in quot.dirs.iter().enumerate() {
            // Needed curvature along e, persistent across scale windows.
            let mut persistent = T::of(f64::INFINITY);
            for w in 0..windows {
                let start = clo + w * (chi - clo) / windows;
                let end = clo + (w + 1) * (chi - clo) / windows;
                let mut wmax = T::of(f64::NEG_INFINITY);
                for k in start..end.min(chi) {
                    wmax = wmax.max(quot.curvature(d, k, p.dot(e)));
                }
                persistent = persistent.min(wmax);
            }
            // Compare against the admissible ceiling along e.
            let ceil = {
                let q = be.ceiling(eps);
                (&q * e).dot(e)
            };
            dir_excess = dir_excess.max(persistent - ceil);
        }
        worst_excess = worst_excess.min(dir_excess);
        if dir_excess <= res {
            all_obstructed = false;
        }
    }
    if all_obstructed && worst_excess > res {
        return (
            Verdict::Fails,
            vec![format!(
                "curvature obstruction: every admissible gradient forces \
                 Hess h above the bound by ≥ {:.3e} on all scales",
                worst_excess.as_f64()
            )],
        );
    }
    (Verdict::Inconclusive, vec!["search exhausted".into()])
}

/// Viscosity sense at `x`: look for a below-touching jet violating the
/// bound; hold when probes at the bound cannot be contained.
pub fn check_viscosity<T: Real>(
    problem: &CheckProblem<T>,
    x: &DVector<T>,
    budget: &SearchBudget<T>,
) -> (Verdict, Vec<String>) {
    let quot = collect_quotients(problem, x, budget);
    let res = budget.resolution;
    let candidates = gradient_candidates(&quot, false);
    let feasible: Vec<&DVector<T>> = candidates
        .iter()
        .filter(|p| slope_violation(&quot, p, false) < res)
        .collect();
    if feasible.is_empty() {
        // No C¹ function can touch f from below at x: the condition is
        // vacuously satisfied.
        return (
            Verdict::Holds,
            vec!["no below-touching jets exist (kink from above)".into()],
        );
    }

    let caps = [T::of(1e4), T::of(1e2), T::one()];
    let mut ambiguous = false;
    for p in &feasible {
        let be = bound_eval(problem, x, p);
        // Probe jets pushing above the bound in each direction.
        for e in &quot.dirs {
            for cap in caps {
                let excess = cap;
                let probe = {
                    let el = e.clone();
                    let base = be.ceiling(T::zero());
                    let bump = &el * el.transpose() * excess;
                    QuadraticJet {
                        base: x.clone(),
                        gradient: (*p).clone(),
                        quadratic: base + bump,
                    }
                };
                let depth = containment_depth(problem, &probe, &quot, false);
                if depth >= 4 {
                    let viol = be.violation(&probe.quadratic, T::zero());
                    if viol > res {
                        return (
                            Verdict::Fails,
                            vec![format!(
                                "below-touching jet violates the bound by {:.3e} \
                                 (p = {:?}, direction {:?})",
                                viol.as_f64(),
                                p.as_slice(),
                                e.as_slice()
                            )],
                        );
                    }
                    ambiguous = true;
                }
            }
        }
        // Probe just above the bound at the resolution scale.
        let probe = QuadraticJet {
            base: x.clone(),
            gradient: (*p).clone(),
            quadratic: be.ceiling(T::of(4.0) * res),
        };
        if containment_depth(problem, &probe, &quot, false) >= 4 {
            ambiguous = true;
        }
    }
    if ambiguous {
        (
            Verdict::Inconclusive,
            vec!["contained jets reach the bound within resolution".into()],
        )
    } else {
        (
            Verdict::Holds,
            vec!["no contained jet exceeds the bound".into()],
        )
    }
}

/// One distributional pairing instance: `lhs ≤ rhs` within `tol`.
#[derive(Clone, Debug)]
pub struct DistributionalCase<T> {
    pub label: String,
    pub lhs: T,
    pub rhs: T,
    pub tol: T,
}

/// Combine pairing cases into a verdict: fails on the worst witness.
pub fn check_distributional_cases<T: Real>(
    cases: &[DistributionalCase<T>],
) -> (Verdict, Vec<String>) {
    let mut witnesses = Vec::new();
    for c in cases {
        if c.lhs > c.rhs + c.tol {
            witnesses.push(format!(
                "{}: lhs {:.6e} > rhs {:.6e} + tol {:.1e}",
                c.label,
                c.lhs.as_f64(),
                c.rhs.as_f64(),
                c.tol.as_f64()
            ));
        }
    }
    if witnesses.is_empty() {
        (
            Verdict::Holds,
            vec![format!("{} pairings within tolerance", cases.len())],
        )
    } else {
        (Verdict::Fails, witnesses)
    }
}

/// 1D distributional checker: `∫ f φ'' dx ≤ ∫ α φ dx` for a family of
/// bumps, with midpoint quadrature refined once for a tolerance estimate.
pub fn check_distributional_1d<T: Real>(
    f: &dyn Fn(T) -> T,
    alpha: &dyn Fn(T) -> T,
    bumps: &[(T, T)],
) -> (Verdict, Vec<String>) {
    let cases: Vec<DistributionalCase<T>> = bumps
        .iter()
        .map(|&(center, radius)| {
            let pair = |n: usize| -> (T, T) {
                let h = radius * T::of(2.0) / T::of(n as f64);
                let mut lhs = crate::num::Accumulator::new();
                let mut rhs = crate::num::Accumulator::new();
                for i in 0..n {
                    let x = center - radius + h * (T::of(i as f64) + T::of(0.5));
                    let s = (x - center) / radius;
                    let b = crate::measure::bump(s.abs());
                    // φ'' in 1D from the radial ratios.
                    let phi2 = (b.w2 * s * s + b.w1) / (radius * radius);
                    lhs.add(f(x) * phi2 * h);
                    rhs.add(alpha(x) * b.psi * h);
                }
                (lhs.total(), rhs.total())
            };
            let (l1, r1) = pair(2048);
            let (l2, r2) = pair(4096);
            let tol = ((l2 - l1).abs() + (r2 - r1).abs()) * T::of(10.0) + T::of(1e-10);
            DistributionalCase {
                label: format!("bump({}, {})", center.as_f64(), radius.as_f64()),
                lhs: l2,
                rhs: r2,
                tol,
            }
        })
        .collect();
    check_distributional_cases(&cases)
}
