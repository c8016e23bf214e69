//! Complex coefficient samples on a uniform grid.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::coeff_expr::CoeffExpr;
use crate::fft::{spectral_d, Plan};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SampleError {
    #[error("degenerate grid: {0}")]
    DegenerateGrid(String),
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SampledFunction {
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<Complex64>,
}

impl SampledFunction {
    pub fn new(x0: f64, dx: f64, values: Vec<Complex64>) -> Result<Self, SampleError> {
        let f = SampledFunction { x0, dx, values };
        f.validate()?;
        Ok(f)
    }

    pub fn validate(&self) -> Result<(), SampleError> {
        if self.values.len() < 2 {
            return Err(SampleError::DegenerateGrid(format!("{} samples", self.values.len())));
        }
        if !(self.dx > 0.0 && self.dx.is_finite() && self.x0.is_finite()) {
            return Err(SampleError::DegenerateGrid(format!("dx = {}", self.dx)));
        }
        if let Some(j) = self.values.iter().position(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(SampleError::NonFinite(j));
        }
        Ok(())
    }

    /// `n` samples of `f` from `x0` with spacing `dx`.
    pub fn from_fn(x0: f64, dx: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self, SampleError> {
        Self::new(x0, dx, (0..n).map(|j| f(x0 + j as f64 * dx)).collect())
    }

    /// `n` points covering `[a, b]` with both ends included.
    pub fn on_interval(a: f64, b: f64, n: usize, f: impl Fn(f64) -> Complex64) -> Result<Self, SampleError> {
        if n < 2 {
            return Err(SampleError::DegenerateGrid(format!("{n} samples")));
        }
        Self::from_fn(a, (b - a) / (n - 1) as f64, n, f)
    }

    pub fn from_expr(e: &CoeffExpr, x0: f64, dx: f64, n: usize) -> Result<Self, SampleError> {
        Self::from_fn(x0, dx, n, |x| e.eval(x))
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn x(&self, j: usize) -> f64 {
        self.x0 + j as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.len() - 1)
    }

    pub fn same_grid(&self, other: &SampledFunction) -> bool {
        self.len() == other.len()
            && (self.x0 - other.x0).abs() <= 1e-12 * (1.0 + self.x0.abs())
            && (self.dx - other.dx).abs() <= 1e-12 * self.dx
    }

    pub fn is_real(&self) -> bool {
        self.values.iter().all(|v| v.im == 0.0)
    }

    pub fn is_imaginary(&self) -> bool {
        self.values.iter().all(|v| v.re == 0.0)
    }

    /// `∂_x^order` through the FFT, treating the samples as one period of
    /// length `N·dx`. Meant for compactly supported or periodic data.
    pub fn spectral_derivative(&self, order: u32) -> SampledFunction {
        if order == 0 {
            return self.clone();
        }
        let plan = Plan::new(self.len());
        let period = self.len() as f64 * self.dx;
        // ∂^n = i^n D^n
        let i_n = Complex64::i().powu(order);
        let values = spectral_d(&self.values, period, order, &plan).into_iter().map(|v| v * i_n).collect();
        SampledFunction { values, ..self.clone() }
    }

    /// `H_j = ∫_{x0}^{x_j} f` by the trapezoid rule.
    pub fn cumulative_trapezoid(&self) -> Vec<Complex64> {
        let mut out = Vec::with_capacity(self.len());
        let mut acc = Complex64::new(0.0, 0.0);
        out.push(acc);
        for w in self.values.windows(2) {
            acc += (w[0] + w[1]) * (0.5 * self.dx);
            out.push(acc);
        }
        out
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|v| v.norm()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_grids() {
        assert!(SampledFunction::new(0.0, 1.0, vec![Complex64::new(1.0, 0.0)]).is_err());
        assert!(SampledFunction::new(0.0, 0.0, vec![Complex64::new(1.0, 0.0); 4]).is_err());
        assert!(SampledFunction::new(0.0, 1.0, vec![Complex64::new(f64::NAN, 0.0); 4]).is_err());
    }

    #[test]
    fn spectral_derivative_of_a_periodic_mode() {
        let n = 64;
        let len = 2.0 * std::f64::consts::PI;
        let f = SampledFunction::from_fn(0.0, len / n as f64, n, |x| Complex64::new((3.0 * x).sin(), 0.0)).unwrap();
        let d2 = f.spectral_derivative(2);
        for j in 0..n {
            let exact = -9.0 * (3.0 * f.x(j)).sin();
            assert!((d2.values[j].re - exact).abs() < 1e-10);
        }
    }
}
