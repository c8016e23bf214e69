//! Exact symbolic engine for the energy method of higher-order dispersive
//! equations `D_t u - D^k u - sum b_j(x) D^j u = f`.

pub mod algebra;
pub mod gauge;
pub mod operator;
pub mod recursion;
pub mod symbol;
pub mod verify;

pub use algebra::{Atom, Family, GaussianRational, Monomial, Name, Polynomial, Rational};
