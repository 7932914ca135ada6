//! Scalar abstraction and numerically careful reductions.
//!
//! All engines are generic over [`Real`], so the same code runs at `f32` or
//! `f64`. The shipped experiments and the acceptance suite run at `f64`; the
//! concrete aliases live at the crate root.

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Floating-point scalar usable by every engine.
///
/// `RealField` supplies the transcendental functions, `FromPrimitive`
/// converts the literal tolerances, `Send + Sync` allows parallel maps.
pub trait Real:
    RealField + FromPrimitive + ToPrimitive + Copy + Default + Send + Sync + 'static
{
    /// Convert an `f64` literal (tolerances, grid steps) into the scalar.
    #[inline]
    fn of(x: f64) -> Self {
        Self::from_f64(x).expect("literal not representable in scalar type")
    }

    /// Lossy view as `f64`, for reporting and serialization.
    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("scalar not representable as f64")
    }
}

impl Real for f32 {}
impl Real for f64 {}

/// Neumaier compensated summation.
///
/// Used for every quadrature and statistics reduction so that results do not
/// depend on how work was split across threads: partial sums are always
/// produced in index order and combined sequentially.
#[derive(Clone, Copy, Debug)]
pub struct Accumulator<T> {
    sum: T,
    comp: T,
}

impl<T: Real> Default for Accumulator<T> {
    fn default() -> Self {
        Self {
            sum: T::zero(),
            comp: T::zero(),
        }
    }
}

impl<T: Real> Accumulator<T> {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, value: T) {
        let t = self.sum + value;
        if self.sum.abs() >= value.abs() {
            self.comp += (self.sum - t) + value;
        } else {
            self.comp += (value - t) + self.sum;
        }
        self.sum = t;
    }

    #[inline]
    pub fn total(&self) -> T {
        self.sum + self.comp
    }
}

/// Compensated sum of a sequence, in iteration order.
pub fn compensated_sum<T: Real, I: IntoIterator<Item = T>>(values: I) -> T {
    let mut acc = Accumulator::new();
    for v in values {
        acc.add(v);
    }
    acc.total()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensated_sum_recovers_cancellation() {
        // 1 + 1e-16 repeated: naive summation loses the tail entirely.
        let n = 100_000;
        let vals: Vec<f64> = (0..n).flat_map(|_| [1.0, 1e-16]).collect();
        let total = compensated_sum(vals.iter().copied());
        let expected = n as f64 * (1.0 + 1e-16);
        assert!((total - expected).abs() < 1e-10);
    }

    #[test]
    fn scalar_conversion_roundtrip() {
        let x = f64::of(0.125);
        assert_eq!(x, 0.125);
        let y = f32::of(0.125);
        assert_eq!(y, 0.125f32);
        assert_eq!(x.as_f64(), 0.125);
    }
}
