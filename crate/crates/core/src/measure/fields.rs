//! Compactly supported test fields with closed-form derivatives.
//!
//! The profile is the standard mollifier bump `exp(1/(s²−1))` on `s < 1`.
//! Its radial derivative ratios stay smooth through `s = 0`:
//!   w1(s) = ψ'(s)/s = −2E/t²,   w2(s) = w1'(s)/s = 4E/t⁴ + 8E/t³,
//! with `E = exp(1/t)`, `t = s²−1`. All field derivatives are assembled
//! from these, so quadrature sees no differencing error from the fields.

use nalgebra::{DMatrix, DVector};

use crate::manifold::ChartPoint;
use crate::num::Real;

/// Profile value and derivative ratios at `s ≥ 0`.
#[derive(Clone, Copy, Debug)]
pub struct BumpEval<T> {
    pub psi: T,
    /// ψ'(s)/s.
    pub w1: T,
    /// (ψ''(s) − ψ'(s)/s)/s².
    pub w2: T,
}

pub fn bump<T: Real>(s: T) -> BumpEval<T> {
    if s >= T::one() - T::of(1e-12) {
        return BumpEval {
            psi: T::zero(),
            w1: T::zero(),
            w2: T::zero(),
        };
    }
    let t = s * s - T::one();
    let e = (T::one() / t).exp();
    let t2 = t * t;
    let t3 = t2 * t;
    let t4 = t2 * t2;
    BumpEval {
        psi: e,
        w1: -(e + e) / t2,
        w2: T::of(4.0) * e / t4 + T::of(8.0) * e / t3,
    }
}

/// The profile raised to an integer power, with its derivative ratios:
/// (ψᵏ)'/s and ((ψᵏ)'' − (ψᵏ)'/s)/s².
pub fn bump_pow<T: Real>(s: T, power: u32) -> BumpEval<T> {
    let b = bump(s);
    match power {
        1 => b,
        2 => BumpEval {
            psi: b.psi * b.psi,
            w1: T::of(2.0) * b.psi * b.w1,
            // (ψ²)'' = 2(ψ')² + 2ψψ'' with ψ' = s·w1.
            w2: T::of(2.0) * (b.w1 * b.w1 + b.psi * b.w2),
        },
        _ => panic!("profile powers 1 and 2 are supported"),
    }
}

/// Direction profile of a vector field.
#[derive(Clone, Debug)]
pub enum FieldDirection<T> {
    /// Constant chart direction (not necessarily unit).
    Constant(DVector<T>),
    /// Solenoidal swirl `(−u₂, u₁)` around the center, `u = (x−c)/r`.
    Rotating,
}

/// `V(x) = amplitude · ψ(|x−c|/r) · D(x)`, supported in the chart ball
/// `B(center, radius)`.
#[derive(Clone, Debug)]
pub struct TestVectorField<T: nalgebra::Scalar> {
    pub center: ChartPoint<T>,
    pub radius: T,
    pub amplitude: T,
    pub direction: FieldDirection<T>,
    /// Power of the bump profile (1 for ψ, 2 for ψ²).
    pub profile_power: u32,
}

/// `φ(x) = amplitude · ψ(|x−c|/r)`, nonnegative, compact support.
#[derive(Clone, Debug)]
pub struct TestScalarField<T: nalgebra::Scalar> {
    pub center: ChartPoint<T>,
    pub radius: T,
    pub amplitude: T,
}

/// Value, Jacobian and Hessian of a scalar chart function.
#[derive(Clone, Debug)]
pub struct ScalarJet<T> {
    pub value: T,
    pub grad: DVector<T>,
    pub hess: DMatrix<T>,
}

/// Value, Jacobian `J[(i,j)] = ∂_j V^i` and second partials
/// `H[i][(j,k)] = ∂_j∂_k V^i` of a vector field.
#[derive(Clone, Debug)]
pub struct VectorJet<T> {
    pub value: DVector<T>,
    pub jac: DMatrix<T>,
    pub hess: Vec<DMatrix<T>>,
}

impl<T: Real> TestScalarField<T> {
    pub fn new(center: ChartPoint<T>, radius: T, amplitude: T) -> Self {
        Self {
            center,
            radius,
            amplitude,
        }
    }

    pub fn support_box(&self) -> (Vec<T>, Vec<T>) {
        let c = &self.center.coords;
        (
            vec![c[0] - self.radius, c[1] - self.radius],
            vec![c[0] + self.radius, c[1] + self.radius],
        )
    }

    pub fn eval(&self, x: &ChartPoint<T>) -> ScalarJet<T> {
        let n = x.dim();
        let r = self.radius;
        let u = (&x.coords - &self.center.coords) / r;
        let s = u.norm();
        let b = bump(s);
        let a = self.amplitude;
        let mut grad = DVector::zeros(n);
        let mut hess = DMatrix::zeros(n, n);
        for i in 0..n {
            grad[i] = a / r * b.w1 * u[i];
            for j in 0..n {
                let kron = if i == j { T::one() } else { T::zero() };
                hess[(i, j)] = a / (r * r) * (b.w2 * u[i] * u[j] + b.w1 * kron);
            }
        }
        ScalarJet {
            value: a * b.psi,
            grad,
            hess,
        }
    }
}

impl<T: Real> TestVectorField<T> {
    pub fn constant(center: ChartPoint<T>, radius: T, amplitude: T, dir: DVector<T>) -> Self {
        Self {
            center,
            radius,
            amplitude,
            direction: FieldDirection::Constant(dir),
            profile_power: 1,
        }
    }

    pub fn rotating(center: ChartPoint<T>, radius: T, amplitude: T) -> Self {
        Self {
            center,
            radius,
            amplitude,
            direction: FieldDirection::Rotating,
            profile_power: 1,
        }
    }

    pub fn with_profile_power(mut self, power: u32) -> Self {
        self.profile_power = power;
        self
    }

    pub fn support_box(&self) -> (Vec<T>, Vec<T>) {
        let c = &self.center.coords;
        (
            vec![c[0] - self.radius, c[1] - self.radius],
            vec![c[0] + self.radius, c[1] + self.radius],
        )
    }

    pub fn eval(&self, x: &ChartPoint<T>) -> VectorJet<T> {
        let n = x.dim();
        let r = self.radius;
        let u = (&x.coords - &self.center.coords) / r;
        let s = u.norm();
        let b = bump_pow(s, self.profile_power);
        let a = self.amplitude;
        let kron = |i: usize, j: usize| if i == j { T::one() } else { T::zero() };
        match &self.direction {
            FieldDirection::Constant(d) => {
                let mut jac = DMatrix::zeros(n, n);
                let mut hess = vec![DMatrix::zeros(n, n); n];
                for i in 0..n {
                    for j in 0..n {
                        jac[(i, j)] = a / r * b.w1 * u[j] * d[i];
                        for k in 0..n {
                            hess[i][(j, k)] =
                                a / (r * r) * (b.w2 * u[j] * u[k] + b.w1 * kron(j, k)) * d[i];
                        }
                    }
                }
                VectorJet {
                    value: d * (a * b.psi),
                    jac,
                    hess,
                }
            }
            FieldDirection::Rotating => {
                // Components ±ψ(s)·u_m: ∂_j(ψ u_m) and ∂_j∂_k(ψ u_m).
                let dm = |m: usize, j: usize| (b.w1 * u[j] * u[m] + b.psi * kron(j, m)) / r;
                let d2m = |m: usize, j: usize, k: usize| {
                    (b.w2 * u[j] * u[k] * u[m]
                        + b.w1 * (kron(j, k) * u[m] + kron(k, m) * u[j] + kron(j, m) * u[k]))
                        / (r * r)
                };
                // V¹ = −a ψ u₂, V² = a ψ u₁.
                let sign = [-a, a];
                let comp = [1usize, 0usize];
                let mut value = DVector::zeros(n);
                let mut jac = DMatrix::zeros(n, n);
                let mut hess = vec![DMatrix::zeros(n, n); n];
                for i in 0..n {
                    let m = comp[i];
                    value[i] = sign[i] * b.psi * u[m];
                    for j in 0..n {
                        jac[(i, j)] = sign[i] * dm(m, j);
                        for k in 0..n {
                            hess[i][(j, k)] = sign[i] * d2m(m, j, k);
                        }
                    }
                }
                VectorJet { value, jac, hess }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: f64, y: f64) -> ChartPoint<f64> {
        ChartPoint::new(vec![x, y])
    }

    #[test]
    fn scalar_jet_matches_finite_differences() {
        let f = TestScalarField::new(pt(0.3, -0.2), 0.5, 2.0);
        let h = 1e-6;
        for probe in [pt(0.35, -0.1), pt(0.3, -0.2), pt(0.6, 0.05)] {
            let jet = f.eval(&probe);
            for i in 0..2 {
                let mut up = probe.clone();
                let mut dn = probe.clone();
                up.coords[i] += h;
                dn.coords[i] -= h;
                let fd = (f.eval(&up).value - f.eval(&dn).value) / (2.0 * h);
                assert!((jet.grad[i] - fd).abs() < 1e-8, "grad[{i}]");
                for j in 0..2 {
                    let mut upj = probe.clone();
                    let mut dnj = probe.clone();
                    upj.coords[j] += h;
                    dnj.coords[j] -= h;
                    let fd2 = (f.eval(&upj).grad[i] - f.eval(&dnj).grad[i]) / (2.0 * h);
                    assert!((jet.hess[(i, j)] - fd2).abs() < 1e-6, "hess[{i}{j}]");
                }
            }
        }
    }

    #[test]
    fn vector_jet_matches_finite_differences() {
        let fields = [
            TestVectorField::constant(pt(0.0, 0.0), 0.4, 1.5, nalgebra::DVector::from_vec(vec![1.0, -0.5])),
            TestVectorField::rotating(pt(0.1, 0.2), 0.3, 0.7),
        ];
        let h = 1e-6;
        for f in &fields {
            for probe in [pt(0.1, 0.05), pt(0.2, 0.25)] {
                let jet = f.eval(&probe);
                for i in 0..2 {
                    for j in 0..2 {
                        let mut up = probe.clone();
                        let mut dn = probe.clone();
                        up.coords[j] += h;
                        dn.coords[j] -= h;
                        let fd = (f.eval(&up).value[i] - f.eval(&dn).value[i]) / (2.0 * h);
                        assert!((jet.jac[(i, j)] - fd).abs() < 1e-8);
                        for k in 0..2 {
                            let mut upk = probe.clone();
                            let mut dnk = probe.clone();
                            upk.coords[k] += h;
                            dnk.coords[k] -= h;
                            let fd2 =
                                (f.eval(&upk).jac[(i, j)] - f.eval(&dnk).jac[(i, j)]) / (2.0 * h);
                            assert!((jet.hess[i][(j, k)] - fd2).abs() < 1e-6);
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn bump_vanishes_smoothly_at_the_support_boundary() {
        let b = bump(0.999999f64);
        assert!(b.psi.abs() < 1e-200);
        let b = bump(1.2f64);
        assert_eq!(b.psi, 0.0);
        assert_eq!(b.w1, 0.0);
    }
}
