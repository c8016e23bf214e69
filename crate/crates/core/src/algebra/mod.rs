//! Exact Gaussian-rational differential polynomials in coefficient atoms.

mod atom;
pub mod derivative_classes;
mod gaussian;
mod poly;
mod rational;

pub use atom::{Atom, Family, Name};
pub use derivative_classes::{equivalent_mod_derivatives, euler_operator, is_total_derivative, normal_form};
pub use gaussian::GaussianRational;
pub use poly::{Monomial, Polynomial};
pub use rational::{binomial, factorial, ParseRationalError, Rational};

/// Shorthand for an exact rational `n/d`.
pub fn q(n: i128, d: i128) -> Rational {
    Rational::new(n, d)
}

/// Shorthand for the Gaussian rational `re + i im`.
pub fn gq(re: Rational, im: Rational) -> GaussianRational {
    GaussianRational::new(re, im)
}
