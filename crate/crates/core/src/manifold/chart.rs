//! Chart geometry: domains, metrics, Christoffel symbols, curvature.
//!
//! Two chart kinds cover the shipped models. `Flat` charts carry a constant
//! diagonal metric (plane, square torus, cylinder). `Surface` charts
//! parametrize a scaled, rotated unit-sphere embedding `S·R·u(θ,φ)` in R³,
//! which covers both the round sphere and the ellipsoid of revolution; the
//! rotated copy serves as the second chart used away from the poles of the
//! first.

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};

use crate::error::ManifoldError;
use crate::num::Real;

/// Pole-exclusion band for surface charts, in chart units of θ.
pub const DELTA_POLE: f64 = 1e-3;

/// One coordinate axis of a chart domain.
#[derive(Clone, Debug)]
pub struct Axis<T> {
    pub lo: T,
    pub hi: T,
    pub periodic: bool,
}

impl<T: Real> Axis<T> {
    pub fn period(&self) -> Option<T> {
        self.periodic.then(|| self.hi - self.lo)
    }

    /// Reduce a coordinate into `[lo, hi)` on periodic axes.
    pub fn reduce(&self, x: T) -> T {
        if !self.periodic {
            return x;
        }
        let period = self.hi - self.lo;
        let mut y = (x - self.lo) % period;
        if y < T::zero() {
            y += period;
        }
        self.lo + y
    }

    pub fn contains(&self, x: T) -> bool {
        self.periodic || (self.lo <= x && x <= self.hi)
    }
}

/// Embedded chart `(θ, φ) ↦ S · R · (sinθ cosφ, sinθ sinφ, cosθ)`.
#[derive(Clone, Debug)]
pub struct SurfaceChart<T> {
    /// Equatorial semi-axis (x and y scale).
    pub equatorial: T,
    /// Polar semi-axis (z scale).
    pub polar: T,
    /// Rotation applied to the unit-sphere parametrization before scaling.
    pub rotation: Matrix3<T>,
}

impl<T: Real> SurfaceChart<T> {
    fn scale(&self) -> Vector3<T> {
        Vector3::new(self.equatorial, self.equatorial, self.polar)
    }

    fn apply(&self, u: Vector3<T>) -> Vector3<T> {
        let r = self.rotation * u;
        r.component_mul(&self.scale())
    }

    pub fn embed(&self, x: &DVector<T>) -> Vector3<T> {
        let (st, ct) = (x[0].sin(), x[0].cos());
        let (sp, cp) = (x[1].sin(), x[1].cos());
        self.apply(Vector3::new(st * cp, st * sp, ct))
    }

    /// First partials of the embedding: columns ∂x/∂θ, ∂x/∂φ.
    pub fn embed_jacobian(&self, x: &DVector<T>) -> [Vector3<T>; 2] {
        let (st, ct) = (x[0].sin(), x[0].cos());
        let (sp, cp) = (x[1].sin(), x[1].cos());
        let du_t = Vector3::new(ct * cp, ct * sp, -st);
        let du_p = Vector3::new(-st * sp, st * cp, T::zero());
        [self.apply(du_t), self.apply(du_p)]
    }

    /// Second partials: (∂θθ, ∂θφ, ∂φφ).
    pub fn embed_second(&self, x: &DVector<T>) -> [Vector3<T>; 3] {
        let (st, ct) = (x[0].sin(), x[0].cos());
        let (sp, cp) = (x[1].sin(), x[1].cos());
        let u_tt = Vector3::new(-st * cp, -st * sp, -ct);
        let u_tp = Vector3::new(-ct * sp, ct * cp, T::zero());
        let u_pp = Vector3::new(-st * cp, -st * sp, T::zero());
        [self.apply(u_tt), self.apply(u_tp), self.apply(u_pp)]
    }

    /// Invert the embedding for a point on the surface.
    pub fn unembed(&self, e: &Vector3<T>) -> DVector<T> {
        let s = self.scale();
        let scaled = Vector3::new(e[0] / s[0], e[1] / s[1], e[2] / s[2]);
        let u = self.rotation.transpose() * scaled;
        let u = u.normalize();
        let theta = u[2].clamp(-T::one(), T::one()).acos();
        let phi = u[1].atan2(u[0]);
        let two_pi = T::two_pi();
        let phi = if phi < T::zero() { phi + two_pi } else { phi };
        DVector::from_vec(vec![theta, phi])
    }

    pub fn metric(&self, x: &DVector<T>) -> DMatrix<T> {
        let j = self.embed_jacobian(x);
        let mut g = DMatrix::zeros(2, 2);
        for i in 0..2 {
            for k in 0..2 {
                g[(i, k)] = j[i].dot(&j[k]);
            }
        }
        g
    }

    /// Γ^k_{ij} from the embedding: Γ^k_{ij} = g^{kl} ⟨x_{ij}, x_l⟩.
    pub fn christoffel(&self, x: &DVector<T>) -> Vec<DMatrix<T>> {
        let j = self.embed_jacobian(x);
        let second = self.embed_second(x);
        let g = self.metric(x);
        let ginv = g.clone().try_inverse().expect("metric invertible");
        // ⟨x_{ij}, x_l⟩ indexed by (pair(i,j), l)
        let pair = |i: usize, k: usize| match (i, k) {
            (0, 0) => 0,
            (1, 1) => 2,
            _ => 1,
        };
        let mut gamma = vec![DMatrix::zeros(2, 2); 2];
        for k in 0..2 {
            for i in 0..2 {
                for jj in 0..2 {
                    let mut v = T::zero();
                    for l in 0..2 {
                        v += ginv[(k, l)] * second[pair(i, jj)].dot(&j[l]);
                    }
                    gamma[k][(i, jj)] = v;
                }
            }
        }
        gamma
    }

    /// Gaussian curvature, evaluated through the embedded position; this is
    /// chart-independent. For semi-axes (a, a, c):
    /// K = 1 / ( (a²c)² · (x²/a⁴ + y²/a⁴ + z²/c⁴)² ).
    pub fn gauss_curvature(&self, x: &DVector<T>) -> T {
        let e = self.embed(x);
        let a = self.equatorial;
        let c = self.polar;
        let a4 = a * a * a * a;
        let c4 = c * c * c * c;
        let h = e[0] * e[0] / a4 + e[1] * e[1] / a4 + e[2] * e[2] / c4;
        let vol = a * a * c;
        T::one() / (vol * vol * h * h)
    }

    /// Distance to the coordinate degeneracy (the chart poles).
    pub fn degeneracy_margin(&self, x: &DVector<T>) -> T {
        x[0].min(T::pi() - x[0])
    }
}

/// The geometry payload of a chart.
#[derive(Clone, Debug)]
pub enum ChartGeometry<T> {
    /// Constant diagonal metric; zero Christoffel symbols; zero curvature.
    Flat { scale: DVector<T> },
    /// Embedded scaled/rotated sphere parametrization.
    Surface(SurfaceChart<T>),
}

#[derive(Clone, Debug)]
pub struct Chart<T> {
    pub axes: Vec<Axis<T>>,
    pub geometry: ChartGeometry<T>,
}

impl<T: Real> Chart<T> {
    pub fn dim(&self) -> usize {
        self.axes.len()
    }

    /// Reduce periodic coordinates into the fundamental domain (in place).
    pub fn reduce(&self, x: &mut DVector<T>) {
        for (i, axis) in self.axes.iter().enumerate() {
            x[i] = axis.reduce(x[i]);
        }
    }

    pub fn check_domain(&self, x: &DVector<T>) -> Result<(), ManifoldError> {
        for (i, axis) in self.axes.iter().enumerate() {
            if !axis.contains(x[i]) {
                return Err(ManifoldError::OutsideDomain {
                    axis: i,
                    value: x[i].as_f64(),
                    lo: axis.lo.as_f64(),
                    hi: axis.hi.as_f64(),
                });
            }
        }
        Ok(())
    }

    pub fn metric(&self, x: &DVector<T>) -> DMatrix<T> {
        match &self.geometry {
            ChartGeometry::Flat { scale } => {
                DMatrix::from_diagonal(&scale.map(|s| s * s))
            }
            ChartGeometry::Surface(s) => s.metric(x),
        }
    }

    pub fn christoffel(&self, x: &DVector<T>) -> Vec<DMatrix<T>> {
        match &self.geometry {
            ChartGeometry::Flat { scale } => {
                let n = scale.len();
                vec![DMatrix::zeros(n, n); n]
            }
            ChartGeometry::Surface(s) => s.christoffel(x),
        }
    }

    pub fn gauss_curvature(&self, x: &DVector<T>) -> T {
        match &self.geometry {
            ChartGeometry::Flat { .. } => T::zero(),
            ChartGeometry::Surface(s) => s.gauss_curvature(x),
        }
    }

    /// Distance to the nearest coordinate degeneracy; infinite for flat charts.
    pub fn degeneracy_margin(&self, x: &DVector<T>) -> T {
        match &self.geometry {
            ChartGeometry::Flat { .. } => T::of(f64::INFINITY),
            ChartGeometry::Surface(s) => s.degeneracy_margin(x),
        }
    }

    /// ∂Γ^k_{ij}/∂x^m by central differences of the closed-form symbols.
    ///
    /// Step 1e-5 in chart units; only meaningful away from degeneracies.
    pub fn christoffel_derivative(&self, x: &DVector<T>) -> Vec<Vec<DMatrix<T>>> {
        let n = self.dim();
        match &self.geometry {
            ChartGeometry::Flat { .. } => vec![vec![DMatrix::zeros(n, n); n]; n],
            ChartGeometry::Surface(_) => {
                let h = T::of(1e-5);
                let mut out = vec![vec![DMatrix::zeros(n, n); n]; n];
                for m in 0..n {
                    let mut xp = x.clone();
                    let mut xm = x.clone();
                    xp[m] += h;
                    xm[m] -= h;
                    let gp = self.christoffel(&xp);
                    let gm = self.christoffel(&xm);
                    for k in 0..n {
                        out[m][k] = (&gp[k] - &gm[k]) / (h + h);
                    }
                }
                out
            }
        }
    }
}

/// Rotation taking the z-axis to the x-axis (rotation by π/2 about y).
/// Entries are exact in floating point.
pub fn pole_swap_rotation<T: Real>() -> Matrix3<T> {
    let z = T::zero();
    let o = T::one();
    Matrix3::new(z, z, o, z, o, z, -o, z, z)
}
