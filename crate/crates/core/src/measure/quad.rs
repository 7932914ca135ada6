//! Midpoint tensor-grid quadrature with order-stable parallel reduction.

use rayon::prelude::*;

use crate::num::{compensated_sum, Accumulator, Real};

/// Midpoint rule over the box `[lo, hi]²` on an `n × n` grid.
///
/// Rows are evaluated in parallel; each row is reduced sequentially with
/// compensated summation and the row sums are combined in index order, so
/// the result is independent of the worker count.
pub fn grid_quadrature<T, F>(lo: &[T], hi: &[T], n: usize, f: F) -> T
where
    T: Real,
    F: Fn(T, T) -> T + Sync,
{
    let hx = (hi[0] - lo[0]) / T::of(n as f64);
    let hy = (hi[1] - lo[1]) / T::of(n as f64);
    let cell = hx * hy;
    let row_sums: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = lo[0] + hx * (T::of(i as f64) + T::of(0.5));
            let mut acc = Accumulator::new();
            for j in 0..n {
                let y = lo[1] + hy * (T::of(j as f64) + T::of(0.5));
                acc.add(f(x, y));
            }
            acc.total()
        })
        .collect();
    compensated_sum(row_sums) * cell
}

/// Like [`grid_quadrature`] but the integrand owns each cell: `f` receives
/// the cell bounds and returns the cell's integral contribution (used for
/// cut-aware subdivision).
pub fn grid_quadrature_cells<T, F>(lo: &[T], hi: &[T], n: usize, f: F) -> T
where
    T: Real,
    F: Fn([T; 2], [T; 2]) -> T + Sync,
{
    let hx = (hi[0] - lo[0]) / T::of(n as f64);
    let hy = (hi[1] - lo[1]) / T::of(n as f64);
    let row_sums: Vec<T> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x0 = lo[0] + hx * T::of(i as f64);
            let mut acc = Accumulator::new();
            for j in 0..n {
                let y0 = lo[1] + hy * T::of(j as f64);
                acc.add(f([x0, y0], [x0 + hx, y0 + hy]));
            }
            acc.total()
        })
        .collect();
    compensated_sum(row_sums)
}

/// Result of a refinement study.
#[derive(Clone, Debug)]
pub struct Refined<T> {
    pub value: T,
    pub grid_n: usize,
    /// |I(n) − I(n/2)| at the final level.
    pub last_diff: T,
    pub history: Vec<(usize, T)>,
}

/// Double the grid until two successive values differ by less than
/// `target`, starting at `n0` and capping at `n_max`.
pub fn refine_until<T, F>(n0: usize, n_max: usize, target: T, eval: F) -> Refined<T>
where
    T: Real,
    F: Fn(usize) -> T,
{
    let mut n = n0;
    let mut value = eval(n);
    let mut history = vec![(n, value)];
    let mut last_diff = T::of(f64::INFINITY);
    while n < n_max {
        n *= 2;
        let next = eval(n);
        history.push((n, next));
        last_diff = (next - value).abs();
        value = next;
        if last_diff < target {
            break;
        }
    }
    Refined {
        value,
        grid_n: n,
        last_diff,
        history,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn midpoint_integrates_polynomials() {
        // ∫∫ x²y over [0,1]² = 1/6.
        let v = grid_quadrature(&[0.0, 0.0], &[1.0, 1.0], 256, |x: f64, y: f64| x * x * y);
        assert!((v - 1.0 / 6.0).abs() < 1e-6);
    }

    #[test]
    fn refinement_reports_history() {
        // Midpoint error for this integrand is ≈ 0.065 h², so the cap at
        // n = 1024 leaves ~6e-8.
        let r = refine_until(16, 1024, 1e-9, |n| {
            grid_quadrature(&[0.0, 0.0], &[1.0, 1.0], n, |x: f64, y: f64| (x + y).sin())
        });
        assert!(r.history.len() >= 2);
        let exact = 2.0 * 1.0f64.sin() - 2.0f64.sin();
        assert!((r.value - exact).abs() < 2e-7);
    }
}
