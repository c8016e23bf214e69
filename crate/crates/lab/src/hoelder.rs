//! `sup |∫_x^y h| / |x - y|^θ` over pairs of grid points.
//!
//! The supremum is taken over the sampled window only. A finite constant
//! here is evidence for the bound, not a proof of it on the whole line.

use dispersym_core::algebra::Rational;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::sampled::SampledFunction;

/// Above this many samples the pair scan runs on a subsampled grid first.
pub const FULL_SCAN_LIMIT: usize = 8192;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum HoelderError {
    #[error("degenerate grid: need at least 2 samples, got {0}")]
    DegenerateGrid(usize),
    #[error("theta = {0} outside [0, 1)")]
    InvalidTheta(Rational),
}

/// Largest ratio among pairs whose separation lies in `[min_sep, max_sep)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ScaleBucket {
    pub min_sep: f64,
    pub max_sep: f64,
    pub max_ratio: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HoelderReport {
    pub theta: Rational,
    pub sup_ratio: f64,
    pub argmax: (f64, f64),
    pub profile: Vec<ScaleBucket>,
    /// True when the coarse-to-fine search was used instead of a full scan.
    pub refined: bool,
}

#[derive(Clone, Copy)]
struct Best {
    ratio: f64,
    i: usize,
    j: usize,
}

impl Best {
    const NONE: Best = Best { ratio: -1.0, i: 0, j: 0 };

    fn max(self, o: Best) -> Best {
        if o.ratio > self.ratio {
            o
        } else {
            self
        }
    }
}

/// Separations `d` (in index units) fall into bucket `b` when `2^b <= d < 2^{b+1}`.
fn bucket_count(n: usize) -> usize {
    (usize::BITS - (n - 1).leading_zeros()) as usize
}

/// Full scan over `idx`, a strictly increasing set of grid indices.
fn scan(h: &[Complex64], idx: &[usize], dx: f64, theta: f64) -> (Best, Vec<f64>) {
    let n = idx.len();
    let span = idx[n - 1] - idx[0];
    let nb = bucket_count(span + 1).max(1);
    let weight = |d: usize| (d as f64 * dx).powf(-theta);
    let init = || (Best::NONE, vec![0.0; nb]);
    (0..n - 1)
        .into_par_iter()
        .fold(init, |(mut best, mut buckets), a| {
            let ia = idx[a];
            for &jb in &idx[a + 1..] {
                let d = jb - ia;
                let r = (h[jb] - h[ia]).norm() * weight(d);
                let b = (usize::BITS - 1 - d.leading_zeros()) as usize;
                if r > buckets[b] {
                    buckets[b] = r;
                }
                if r > best.ratio {
                    best = Best { ratio: r, i: ia, j: jb };
                }
            }
            (best, buckets)
        })
        .reduce(init, |(b1, mut v1), (b2, v2)| {
            for (x, y) in v1.iter_mut().zip(v2) {
                *x = x.max(y);
            }
            (b1.max(b2), v1)
        })
}

/// Exhaustive search over `i ∈ [i0, i1]`, `j ∈ [j0, j1]`, `i < j`.
fn local_scan(h: &[Complex64], dx: f64, theta: f64, (i0, i1): (usize, usize), (j0, j1): (usize, usize)) -> Best {
    (i0..=i1)
        .into_par_iter()
        .map(|i| {
            let mut best = Best::NONE;
            for j in j0.max(i + 1)..=j1 {
                let r = (h[j] - h[i]).norm() * ((j - i) as f64 * dx).powf(-theta);
                if r > best.ratio {
                    best = Best { ratio: r, i, j };
                }
            }
            best
        })
        .reduce(|| Best::NONE, Best::max)
}

pub fn hoelder_ratio(h: &SampledFunction, theta: Rational) -> Result<HoelderReport, HoelderError> {
    hoelder_ratio_with_limit(h, theta, FULL_SCAN_LIMIT)
}

/// As [`hoelder_ratio`], with the full-scan threshold given explicitly.
pub fn hoelder_ratio_with_limit(
    h: &SampledFunction,
    theta: Rational,
    limit: usize,
) -> Result<HoelderReport, HoelderError> {
    let n = h.len();
    if n < 2 {
        return Err(HoelderError::DegenerateGrid(n));
    }
    if theta < Rational::ZERO || theta >= Rational::ONE {
        return Err(HoelderError::InvalidTheta(theta));
    }
    let th = theta.to_f64();
    let cum = h.cumulative_trapezoid();
    let limit = limit.max(2);
    let refined = n > limit;
    let (best, buckets) = if !refined {
        let idx: Vec<usize> = (0..n).collect();
        scan(&cum, &idx, h.dx, th)
    } else {
        let stride = (n - 1).div_ceil(limit - 1);
        let mut idx: Vec<usize> = (0..n).step_by(stride).collect();
        if *idx.last().unwrap() != n - 1 {
            idx.push(n - 1);
        }
        let (coarse, buckets) = scan(&cum, &idx, h.dx, th);
        let around = |c: usize| (c.saturating_sub(stride), (c + stride).min(n - 1));
        let fine = local_scan(&cum, h.dx, th, around(coarse.i), around(coarse.j));
        (coarse.max(fine), buckets)
    };
    let profile = buckets
        .iter()
        .enumerate()
        .filter(|(b, _)| (1usize << b) < n)
        .map(|(b, &r)| ScaleBucket {
            min_sep: (1usize << b) as f64 * h.dx,
            max_sep: (1usize << (b + 1)) as f64 * h.dx,
            max_ratio: r,
        })
        .collect();
    // all-zero data leaves the first pair as argmax
    let best = if best.ratio <= 0.0 { Best { ratio: 0.0, i: 0, j: 1 } } else { best };
    Ok(HoelderReport { theta, sup_ratio: best.ratio, argmax: (h.x(best.i), h.x(best.j)), profile, refined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use dispersym_core::algebra::q;

    fn constant(c: f64, a: f64, b: f64, n: usize) -> SampledFunction {
        SampledFunction::on_interval(a, b, n, |_| Complex64::new(c, 0.0)).unwrap()
    }

    #[test]
    fn zero_density() {
        let r = hoelder_ratio(&constant(0.0, 0.0, 1.0, 64), q(1, 4)).unwrap();
        assert_eq!(r.sup_ratio, 0.0);
    }

    #[test]
    fn constant_density_peaks_at_full_separation() {
        let r = hoelder_ratio(&constant(1.0, 0.0, 16.0, 257), q(1, 4)).unwrap();
        assert!((r.sup_ratio - 8.0).abs() < 1e-12);
        assert_eq!(r.argmax, (0.0, 16.0));
    }

    #[test]
    fn rejects_bad_input() {
        let h = constant(1.0, 0.0, 1.0, 8);
        assert!(matches!(hoelder_ratio(&h, q(1, 1)), Err(HoelderError::InvalidTheta(_))));
        assert!(matches!(hoelder_ratio(&h, q(-1, 2)), Err(HoelderError::InvalidTheta(_))));
    }

    #[test]
    fn coarse_to_fine_agrees_with_full_scan() {
        let h = SampledFunction::on_interval(0.0, 20.0, 3001, |x| Complex64::new((1.3 * x).cos() + 0.2, 0.0)).unwrap();
        let full = hoelder_ratio_with_limit(&h, q(1, 2), 4000).unwrap();
        let fast = hoelder_ratio_with_limit(&h, q(1, 2), 500).unwrap();
        assert!(!full.refined && fast.refined);
        assert!((full.sup_ratio - fast.sup_ratio).abs() <= 1e-3 * full.sup_ratio);
    }
}
