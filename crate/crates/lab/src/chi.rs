//! The plateau cut-off `χ` and the unit-mass bump built from it.
//!
//! `χ(t) = 1` for `|t| <= 1`, `exp(1 - 1/(1 - (|t|-1)²))` for `1 < |t| < 2`
//! and `0` beyond. Derivatives come from truncated Taylor arithmetic.

/// Truncated Taylor series `Σ c_n h^n` around a point.
#[derive(Clone, Debug)]
struct Jet(Vec<f64>);

impl Jet {
    fn constant(c: f64, n: usize) -> Self {
        let mut v = vec![0.0; n + 1];
        v[0] = c;
        Jet(v)
    }

    fn variable(x: f64, n: usize) -> Self {
        let mut j = Self::constant(x, n);
        if n >= 1 {
            j.0[1] = 1.0;
        }
        j
    }

    fn mul(&self, o: &Jet) -> Jet {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        for i in 0..n {
            for j in 0..n - i {
                out[i + j] += self.0[i] * o.0[j];
            }
        }
        Jet(out)
    }

    fn scale_add(&self, a: f64, b: f64) -> Jet {
        let mut out: Vec<f64> = self.0.iter().map(|c| a * c).collect();
        out[0] += b;
        Jet(out)
    }

    fn recip(&self) -> Jet {
        let n = self.0.len();
        let mut out = vec![0.0; n];
        out[0] = 1.0 / self.0[0];
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| self.0[j] * out[k - j]).sum();
            out[k] = -s / self.0[0];
        }
        Jet(out)
    }

    fn exp(&self) -> Jet {
        // g = e^f satisfies k g_k = Σ j f_j g_{k-j}
        let n = self.0.len();
        let mut out = vec![0.0; n];
        out[0] = self.0[0].exp();
        for k in 1..n {
            let s: f64 = (1..=k).map(|j| j as f64 * self.0[j] * out[k - j]).sum();
            out[k] = s / k as f64;
        }
        Jet(out)
    }
}

/// `χ^{(n)}(t)`.
pub fn chi_deriv(t: f64, n: usize) -> f64 {
    let a = t.abs();
    if a >= 2.0 {
        return 0.0;
    }
    if a <= 1.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if n <= 1 {
        let s = a - 1.0;
        let g = 1.0 - s * s;
        let v = (1.0 - 1.0 / g).exp();
        if n == 0 {
            return v;
        }
        let d = -2.0 * s / (g * g) * v;
        return if t < 0.0 { -d } else { d };
    }
    let s = Jet::variable(a - 1.0, n);
    let inner = s.mul(&s).scale_add(-1.0, 1.0).recip().scale_add(-1.0, 1.0);
    let j = inner.exp();
    let fact: f64 = (1..=n).map(|i| i as f64).product();
    let v = j.0[n] * fact;
    if t < 0.0 && n % 2 == 1 {
        -v
    } else {
        v
    }
}

pub fn chi(t: f64) -> f64 {
    chi_deriv(t, 0)
}

/// `∫ χ = 2 + 2∫_1^2 χ`, by composite Simpson on a fine grid.
pub fn chi_mass() -> f64 {
    static MASS: std::sync::OnceLock<f64> = std::sync::OnceLock::new();
    *MASS.get_or_init(|| {
        let n = 20_000;
        let h = 1.0 / n as f64;
        let mut s = chi(1.0) + chi(2.0);
        for j in 1..n {
            let w = if j % 2 == 1 { 4.0 } else { 2.0 };
            s += w * chi(1.0 + j as f64 * h);
        }
        2.0 + 2.0 * s * h / 3.0
    })
}

/// `∂_x^n χ(4(x - c)/w)`: support `(c - w/2, c + w/2)`, plateau of width `w/2`.
pub fn bump_deriv(x: f64, c: f64, w: f64, n: usize) -> f64 {
    let s = 4.0 / w;
    s.powi(n as i32) * chi_deriv(s * (x - c), n)
}

/// The bump rescaled to unit mass.
pub fn unit_bump(x: f64, c: f64, w: f64) -> f64 {
    bump_deriv(x, c, w, 0) * 4.0 / (w * chi_mass())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn plateau_and_support() {
        assert_eq!(chi(0.3), 1.0);
        assert_eq!(chi(-1.0), 1.0);
        assert_eq!(chi(2.5), 0.0);
        assert!(chi(1.5) > 0.0 && chi(1.5) < 1.0);
        assert!((chi(1.5) - chi(-1.5)).abs() < 1e-15);
    }

    #[test]
    fn derivatives_match_finite_differences() {
        let h = 1e-5;
        for &t in &[1.2, 1.5, 1.8, -1.4] {
            for n in 0..4 {
                let fd = (chi_deriv(t + h, n) - chi_deriv(t - h, n)) / (2.0 * h);
                let exact = chi_deriv(t, n + 1);
                assert!((fd - exact).abs() <= 1e-5 * (1.0 + exact.abs()), "t={t} n={n}: {fd} vs {exact}");
            }
        }
    }
}
