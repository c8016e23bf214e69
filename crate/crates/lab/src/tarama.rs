//! The smoothing symbol `H(x, ξ; ℓ) = ∫_{-∞}^x χ((y - x)/W) h(y) dy` with
//! `W = ⟨ξ⟩_ℓ^q`, and its defect `∂_x H - h`.
//!
//! Differentiating under the integral, the boundary term `χ(0) h(x) = h(x)`
//! cancels, so the defect is `-(1/W) ∫ χ'((y - x)/W) h(y) dy` and is
//! computed by quadrature without differencing `H`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::chi::chi_deriv;
use crate::sampled::SampledFunction;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TaramaError {
    #[error("h does not vanish at the ends of its grid ({0:e} at the boundary)")]
    SupportOverflow(f64),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

/// `⟨ξ⟩_ℓ = √(ℓ² + ξ²)`.
pub fn bracket(xi: f64, ell: f64) -> f64 {
    (ell * ell + xi * xi).sqrt()
}

fn trapezoid_weight(j: usize, n: usize) -> f64 {
    if j == 0 || j + 1 == n {
        0.5
    } else {
        1.0
    }
}

/// `∫ χ^{(order)}((y - x)/w) h(y) dy` over the grid of `h`, restricted to
/// `y <= x`. `x` is expected on the grid or past its end.
fn weighted_integral(h: &SampledFunction, x: f64, w: f64, order: usize) -> Complex64 {
    let n = h.len();
    let mut acc = Complex64::new(0.0, 0.0);
    for (j, v) in h.values.iter().enumerate() {
        let y = h.x(j);
        if y > x {
            break;
        }
        let t = (y - x) / w;
        if t <= -2.0 {
            continue;
        }
        let last = j + 1 == n || h.x(j + 1) > x;
        let wt = if last { 0.5 } else { trapezoid_weight(j, n) };
        acc += v * (wt * chi_deriv(t, order));
    }
    acc * h.dx
}

pub fn tarama_h(h: &SampledFunction, x: f64, w: f64) -> Complex64 {
    weighted_integral(h, x, w, 0)
}

pub fn tarama_defect(h: &SampledFunction, x: f64, w: f64) -> Complex64 {
    -weighted_integral(h, x, w, 1) / w
}

#[derive(Clone, Debug, Serialize)]
pub struct TaramaRow {
    pub xi: f64,
    pub bracket: f64,
    pub width: f64,
    pub max_h: f64,
    pub max_defect: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct TaramaTable {
    pub q: f64,
    pub ell: f64,
    pub rows: Vec<TaramaRow>,
    /// Least-squares slope of `log max|H|` against `log ⟨ξ⟩_ℓ`; `None` if `H ≡ 0`.
    pub slope_h: Option<f64>,
    pub slope_defect: Option<f64>,
}

/// Slope of the least-squares line through `(ln x, ln y)`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Option<f64> {
    if xs.len() < 2 || ys.iter().any(|&y| y <= 0.0 || !y.is_finite()) {
        return None;
    }
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let n = xs.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    Some(sxy / sxx)
}

/// Points where `H` or the defect can be nonzero: the support of `h`
/// sampled on its own grid, then `x ∈ [hi, hi + 2W]` on a uniform grid.
fn evaluation_points(h: &SampledFunction, w: f64, tail_points: usize) -> Vec<f64> {
    let mut xs: Vec<f64> = (0..h.len()).map(|j| h.x(j)).collect();
    let hi = h.x_end();
    let lo = h.x0;
    let span = 2.0 * w + (hi - lo);
    xs.extend((1..=tail_points).map(|j| hi + span * j as f64 / tail_points as f64));
    xs
}

pub fn tarama_symbol_numeric(h: &SampledFunction, q: f64, ell: f64, xis: &[f64]) -> Result<TaramaTable, TaramaError> {
    if !(q > 1.0) {
        return Err(TaramaError::InvalidParameter(format!("q = {q} must exceed 1")));
    }
    if !(ell >= 1.0) {
        return Err(TaramaError::InvalidParameter(format!("ell = {ell} must be at least 1")));
    }
    let scale = h.max_abs();
    let edge = h.values[0].norm().max(h.values[h.len() - 1].norm());
    if edge > 1e-12 * scale.max(f64::MIN_POSITIVE) && edge > 0.0 {
        return Err(TaramaError::SupportOverflow(edge));
    }
    let rows: Vec<TaramaRow> = xis
        .par_iter()
        .map(|&xi| {
            let b = bracket(xi, ell);
            let w = b.powf(q);
            let xs = evaluation_points(h, w, 4000);
            let (mut max_h, mut max_defect) = (0.0f64, 0.0f64);
            for x in xs {
                max_h = max_h.max(tarama_h(h, x, w).norm());
                max_defect = max_defect.max(tarama_defect(h, x, w).norm());
            }
            TaramaRow { xi, bracket: b, width: w, max_h, max_defect }
        })
        .collect();
    let bs: Vec<f64> = rows.iter().map(|r| r.bracket).collect();
    let hs: Vec<f64> = rows.iter().map(|r| r.max_h).collect();
    let ds: Vec<f64> = rows.iter().map(|r| r.max_defect).collect();
    Ok(TaramaTable { q, ell, slope_h: loglog_slope(&bs, &hs), slope_defect: loglog_slope(&bs, &ds), rows })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn slope_of_a_power_law() {
        let xs = [2.0, 4.0, 8.0];
        let ys: Vec<f64> = xs.iter().map(|x: &f64| 3.0 * x.powf(-1.5)).collect();
        assert!((loglog_slope(&xs, &ys).unwrap() + 1.5).abs() < 1e-12);
    }
}
