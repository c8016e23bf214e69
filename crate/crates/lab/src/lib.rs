//! Numerical side: coefficient expressions, Hölder-type condition checks,
//! the Tarama smoothing symbol and a periodic spectral solver.

pub mod chi;
pub mod coeff_expr;
pub mod conditions;
pub mod fft;
pub mod hoelder;
pub mod sampled;
pub mod spectral;
pub mod tarama;

pub use coeff_expr::{CoeffExpr, ParseError};
pub use sampled::SampledFunction;
