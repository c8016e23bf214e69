//! Thin wrappers over rustfft with unitary-free conventions: `forward` is
//! unnormalized, `inverse` divides by `N`.

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use std::sync::Arc;

pub struct Plan {
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    n: usize,
}

impl Plan {
    pub fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Plan { fwd: planner.plan_fft_forward(n), inv: planner.plan_fft_inverse(n), n }
    }

    pub fn forward(&self, buf: &mut [Complex64]) {
        self.fwd.process(buf);
    }

    pub fn inverse(&self, buf: &mut [Complex64]) {
        self.inv.process(buf);
        let s = 1.0 / self.n as f64;
        for v in buf.iter_mut() {
            *v *= s;
        }
    }
}

/// Integer wavenumber of FFT slot `j`, with the Nyquist slot mapped to 0.
pub fn wavenumber(j: usize, n: usize) -> f64 {
    if 2 * j < n {
        j as f64
    } else if 2 * j == n {
        0.0
    } else {
        j as f64 - n as f64
    }
}

/// `(-i∂)^order` of a periodic sample vector whose period is `period`.
pub fn spectral_d(values: &[Complex64], period: f64, order: u32, plan: &Plan) -> Vec<Complex64> {
    let n = values.len();
    let mut buf = values.to_vec();
    plan.forward(&mut buf);
    let base = 2.0 * std::f64::consts::PI / period;
    for (j, v) in buf.iter_mut().enumerate() {
        let k = wavenumber(j, n) * base;
        *v *= Complex64::new(k, 0.0).powu(order);
    }
    plan.inverse(&mut buf);
    buf
}
