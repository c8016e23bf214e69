use std::fmt;
use std::ops::{Add, AddAssign, Mul, MulAssign, Neg, Sub, SubAssign};

use num_complex::Complex64;

use super::rational::Rational;

/// `re + i im` with exact rational parts.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct GaussianRational {
    pub re: Rational,
    pub im: Rational,
}

impl GaussianRational {
    pub const ZERO: GaussianRational = GaussianRational { re: Rational::ZERO, im: Rational::ZERO };
    pub const ONE: GaussianRational = GaussianRational { re: Rational::ONE, im: Rational::ZERO };
    pub const I: GaussianRational = GaussianRational { re: Rational::ZERO, im: Rational::ONE };

    pub fn new(re: Rational, im: Rational) -> Self {
        GaussianRational { re, im }
    }

    pub fn real(re: Rational) -> Self {
        GaussianRational { re, im: Rational::ZERO }
    }

    pub fn imag(im: Rational) -> Self {
        GaussianRational { re: Rational::ZERO, im }
    }

    pub fn int(n: i128) -> Self {
        Self::real(Rational::int(n))
    }

    pub fn ratio(n: i128, d: i128) -> Self {
        Self::real(Rational::new(n, d))
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.re.is_one() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        GaussianRational { re: self.re, im: -self.im }
    }

    pub fn scale(&self, r: Rational) -> Self {
        GaussianRational { re: self.re * r, im: self.im * r }
    }

    /// `i^n` for any integer `n`.
    pub fn i_pow(n: i64) -> Self {
        match n.rem_euclid(4) {
            0 => Self::ONE,
            1 => Self::I,
            2 => -Self::ONE,
            _ => -Self::I,
        }
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::ONE;
        for _ in 0..e {
            acc *= *self;
        }
        acc
    }

    pub fn inv(&self) -> Self {
        let n = self.re * self.re + self.im * self.im;
        assert!(!n.is_zero(), "inverse of zero");
        GaussianRational { re: self.re / n, im: -self.im / n }
    }

    pub fn to_c64(&self) -> Complex64 {
        Complex64::new(self.re.to_f64(), self.im.to_f64())
    }
}

impl From<Rational> for GaussianRational {
    fn from(r: Rational) -> Self {
        Self::real(r)
    }
}

impl Add for GaussianRational {
    type Output = Self;
    fn add(self, o: Self) -> Self {
        GaussianRational { re: self.re + o.re, im: self.im + o.im }
    }
}

impl Sub for GaussianRational {
    type Output = Self;
    fn sub(self, o: Self) -> Self {
        GaussianRational { re: self.re - o.re, im: self.im - o.im }
    }
}

impl Mul for GaussianRational {
    type Output = Self;
    fn mul(self, o: Self) -> Self {
        GaussianRational { re: self.re * o.re - self.im * o.im, im: self.re * o.im + self.im * o.re }
    }
}

impl Neg for GaussianRational {
    type Output = Self;
    fn neg(self) -> Self {
        GaussianRational { re: -self.re, im: -self.im }
    }
}

impl AddAssign for GaussianRational {
    fn add_assign(&mut self, o: Self) {
        *self = *self + o;
    }
}

impl SubAssign for GaussianRational {
    fn sub_assign(&mut self, o: Self) {
        *self = *self - o;
    }
}

impl MulAssign for GaussianRational {
    fn mul_assign(&mut self, o: Self) {
        *self = *self * o;
    }
}

/// Dump format `a/b+c/d*i`; the imaginary sign is folded into the joiner.
impl fmt::Display for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sign = if self.im < Rational::ZERO { '-' } else { '+' };
        write!(f, "{}{}{}*i", self.re, sign, self.im.abs())
    }
}

impl fmt::Debug for GaussianRational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl std::str::FromStr for GaussianRational {
    type Err = super::rational::ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let err = || super::rational::ParseRationalError(s.to_string());
        let body = s.trim().strip_suffix("*i").ok_or_else(err)?;
        // split at the last sign that is not the leading one
        let pos = body
            .char_indices()
            .skip(1)
            .filter(|(_, c)| *c == '+' || *c == '-')
            .map(|(p, _)| p)
            .last()
            .ok_or_else(err)?;
        let re: Rational = body[..pos].parse()?;
        let im: Rational = body[pos + 1..].parse()?;
        let im = if &body[pos..pos + 1] == "-" { -im } else { im };
        Ok(GaussianRational { re, im })
    }
}
