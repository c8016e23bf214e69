#![allow(dead_code)]

use num_complex::Complex64;
use rustfft::FftPlanner;

pub type C = Complex64;

/// Periodic grid on `[0, len)`.
pub fn grid(n: usize, len: f64) -> Vec<f64> {
    (0..n).map(|j| len * j as f64 / n as f64).collect()
}

/// `D = -i ∂_x` applied spectrally on a periodic grid of length `len`.
pub fn d_op(u: &[C], len: f64) -> Vec<C> {
    let n = u.len();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);
    let mut buf = u.to_vec();
    fwd.process(&mut buf);
    for (j, v) in buf.iter_mut().enumerate() {
        let kk = if j <= n / 2 { j as f64 } else { j as f64 - n as f64 };
        let kk = if 2 * j == n { 0.0 } else { kk };
        *v *= 2.0 * std::f64::consts::PI * kk / len / n as f64;
    }
    inv.process(&mut buf);
    buf
}

pub fn l2(u: &[C], dx: f64) -> f64 {
    (u.iter().map(|z| z.norm_sqr()).sum::<f64>() * dx).sqrt()
}

pub fn inner(u: &[C], v: &[C], dx: f64) -> C {
    u.iter().zip(v).map(|(a, b)| a * b.conj()).sum::<C>() * dx
}

/// `f(x) = Σ c_r e^{i ω_r x}` with its derivatives in closed form.
#[derive(Clone)]
pub struct Trig(pub Vec<(C, f64)>);

impl Trig {
    pub fn eval(&self, x: f64, deriv: u32) -> C {
        self.0.iter().map(|(c, w)| c * (C::i() * w).powu(deriv) * C::from_polar(1.0, w * x)).sum()
    }
}
