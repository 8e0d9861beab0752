//! Small numeric helpers shared across modules: deterministic pairwise
//! summation and a cubic interpolation table on a uniform grid.

use num_complex::Complex64;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::{GridSpec, ScalarField};

/// Balanced pairwise sum keyed by element index. The reduction tree depends
/// only on the slice length, so results are bit-identical no matter how the
/// terms were produced.
pub fn pairwise_sum(xs: &[Complex64]) -> Complex64 {
    if xs.len() <= 32 {
        let mut acc = Complex64::new(0.0, 0.0);
        for x in xs {
            acc += x;
        }
        return acc;
    }
    let mid = xs.len() / 2;
    pairwise_sum(&xs[..mid]) + pairwise_sum(&xs[mid..])
}

/// Evaluate a pointwise function on every grid node in parallel. Work is
/// keyed by node index, so the output is identical for any worker count;
/// on error, the lowest failing node index wins.
pub fn sample_field_parallel(
    grid: &GridSpec,
    f: &(dyn Fn(&[f64]) -> Result<Complex64> + Sync),
) -> Result<ScalarField> {
    let results: Vec<Result<Complex64>> = (0..grid.len())
        .into_par_iter()
        .map(|flat| f(&grid.coords(flat)))
        .collect();
    let mut values = Vec::with_capacity(results.len());
    for r in results {
        values.push(r?);
    }
    ScalarField::new(grid.clone(), values)
}

/// What a [`CubicTable`] does outside its domain.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutOfRange {
    /// Out-of-range argument is an error (no extrapolation).
    Reject,
    /// The table represents a compactly supported function: return 0.
    Zero,
}

/// Cubic Hermite interpolation on a uniform grid with finite-difference
/// slopes (fourth-order in the interior). Local, C^1, and differentiable.
#[derive(Debug, Clone)]
pub struct CubicTable {
    x0: f64,
    dx: f64,
    values: Vec<Complex64>,
    slopes: Vec<Complex64>,
    policy: OutOfRange,
}

impl CubicTable {
    pub fn new(x0: f64, dx: f64, values: Vec<Complex64>, policy: OutOfRange) -> Result<Self> {
        if values.len() < 4 {
            return Err(Error::UnderResolved(format!(
                "cubic table needs at least 4 samples, got {}",
                values.len()
            )));
        }
        if !(dx > 0.0) {
            return Err(Error::Domain(format!("table spacing must be positive, got {dx}")));
        }
        let n = values.len();
        let mut slopes = vec![Complex64::new(0.0, 0.0); n];
        let v = &values;
        slopes[0] = (-3.0 * v[0] + 4.0 * v[1] - v[2]) / (2.0 * dx);
        slopes[1] = (v[2] - v[0]) / (2.0 * dx);
        for i in 2..n - 2 {
            slopes[i] = (v[i - 2] - 8.0 * v[i - 1] + 8.0 * v[i + 1] - v[i + 2]) / (12.0 * dx);
        }
        slopes[n - 2] = (v[n - 1] - v[n - 3]) / (2.0 * dx);
        slopes[n - 1] = (3.0 * v[n - 1] - 4.0 * v[n - 2] + v[n - 3]) / (2.0 * dx);
        Ok(CubicTable {
            x0,
            dx,
            values,
            slopes,
            policy,
        })
    }

    /// Uniform table over [a, b] sampling `f` at `n` nodes.
    pub fn sample(
        a: f64,
        b: f64,
        n: usize,
        policy: OutOfRange,
        mut f: impl FnMut(f64) -> Complex64,
    ) -> Result<Self> {
        if n < 4 || !(b > a) {
            return Err(Error::UnderResolved(
                "table sampling needs n >= 4 and b > a".into(),
            ));
        }
        let dx = (b - a) / (n - 1) as f64;
        let values = (0..n).map(|i| f(a + i as f64 * dx)).collect();
        Self::new(a, dx, values, policy)
    }

    pub fn x_min(&self) -> f64 {
        self.x0
    }

    pub fn x_max(&self) -> f64 {
        self.x0 + self.dx * (self.values.len() - 1) as f64
    }

    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }

    fn locate(&self, x: f64) -> Result<Option<(usize, f64)>> {
        let span = (self.values.len() - 1) as f64;
        let t = (x - self.x0) / self.dx;
        if t < 0.0 || t > span {
            return match self.policy {
                OutOfRange::Reject => Err(Error::Domain(format!(
                    "argument {x} outside table range [{}, {}]",
                    self.x_min(),
                    self.x_max()
                ))),
                OutOfRange::Zero => Ok(None),
            };
        }
        let cell = (t.floor() as usize).min(self.values.len() - 2);
        Ok(Some((cell, t - cell as f64)))
    }

    pub fn eval(&self, x: f64) -> Result<Complex64> {
        let Some((i, t)) = self.locate(x)? else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let (t2, t3) = (t * t, t * t * t);
        let h00 = 2.0 * t3 - 3.0 * t2 + 1.0;
        let h10 = t3 - 2.0 * t2 + t;
        let h01 = -2.0 * t3 + 3.0 * t2;
        let h11 = t3 - t2;
        Ok(h00 * self.values[i]
            + h10 * self.dx * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.dx * self.slopes[i + 1])
    }

    pub fn derivative(&self, x: f64) -> Result<Complex64> {
        let Some((i, t)) = self.locate(x)? else {
            return Ok(Complex64::new(0.0, 0.0));
        };
        let t2 = t * t;
        let h00 = 6.0 * t2 - 6.0 * t;
        let h10 = 3.0 * t2 - 4.0 * t + 1.0;
        let h01 = -6.0 * t2 + 6.0 * t;
        let h11 = 3.0 * t2 - 2.0 * t;
        Ok((h00 * self.values[i]
            + h10 * self.dx * self.slopes[i]
            + h01 * self.values[i + 1]
            + h11 * self.dx * self.slopes[i + 1])
            / self.dx)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pairwise_matches_sequential_on_smooth_data() {
        let xs: Vec<_> = (0..1000)
            .map(|i| Complex64::new((i as f64 * 0.01).sin(), (i as f64 * 0.02).cos()))
            .collect();
        let seq: Complex64 = xs.iter().sum();
        let pw = pairwise_sum(&xs);
        assert!((seq - pw).norm() < 1e-10);
    }

    #[test]
    fn cubic_table_reproduces_smooth_function() {
        let t = CubicTable::sample(0.0, 6.0, 301, OutOfRange::Reject, |x| {
            Complex64::new(x.sin(), 0.0)
        })
        .unwrap();
        // edge cells fall back to low-order slopes; full accuracy holds in
        // the interior, which is where tabulated profiles are evaluated
        // (their edges decay to zero)
        for k in 0..100 {
            let x = 0.03 + 0.0597 * k as f64;
            let v = t.eval(x).unwrap();
            assert!((v.re - x.sin()).abs() < 1e-5, "x={x}");
        }
        for k in 0..90 {
            let x = 0.3 + 0.06 * k as f64;
            let v = t.eval(x).unwrap();
            assert!((v.re - x.sin()).abs() < 1e-8, "x={x}");
            let d = t.derivative(x).unwrap();
            assert!((d.re - x.cos()).abs() < 1e-5, "x={x}");
        }
    }

    #[test]
    fn cubic_table_out_of_range_policies() {
        let t = CubicTable::sample(0.0, 1.0, 8, OutOfRange::Reject, |_| Complex64::new(1.0, 0.0))
            .unwrap();
        assert!(t.eval(1.5).is_err());
        let z = CubicTable::sample(0.0, 1.0, 8, OutOfRange::Zero, |_| Complex64::new(1.0, 0.0))
            .unwrap();
        assert_eq!(z.eval(1.5).unwrap(), Complex64::new(0.0, 0.0));
    }
}
