//! Evaluates the necessary-condition integrands on sampled coefficients and
//! measures each one with [`hoelder_ratio`].

use std::collections::{BTreeMap, BTreeSet};

use dispersym_core::algebra::{Atom, Family, Polynomial, Rational};
use dispersym_core::gauge::corollary_conditions;
use dispersym_core::recursion::necessary_conditions;
use num_complex::Complex64;
use serde::Serialize;

use crate::coeff_expr::CoeffExpr;
use crate::hoelder::{hoelder_ratio, HoelderError, HoelderReport};
use crate::sampled::SampledFunction;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CheckError {
    #[error("coefficient {0:?} is required but was not supplied")]
    MissingCoefficient(String),
    #[error("coefficient {0:?} lives on a different grid")]
    GridMismatch(String),
    #[error("no coefficients supplied, so there is no grid")]
    NoGrid,
    #[error("{0}")]
    Conditions(String),
    #[error(transparent)]
    Hoelder(#[from] HoelderError),
}

/// A coefficient function: either raw samples, differentiated spectrally,
/// or an expression sampled on a grid, differentiated exactly.
#[derive(Clone, Debug)]
pub enum Coefficient {
    Sampled(SampledFunction),
    Expr { expr: CoeffExpr, grid: SampledGrid },
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampledGrid {
    pub x0: f64,
    pub dx: f64,
    pub n: usize,
}

impl SampledGrid {
    /// `n` points covering `[a, b]`, ends included.
    pub fn interval(a: f64, b: f64, n: usize) -> Self {
        SampledGrid { x0: a, dx: (b - a) / (n.max(2) - 1) as f64, n }
    }
}

impl Coefficient {
    fn grid(&self) -> SampledGrid {
        match self {
            Coefficient::Sampled(s) => SampledGrid { x0: s.x0, dx: s.dx, n: s.len() },
            Coefficient::Expr { grid, .. } => *grid,
        }
    }

    fn samples(&self, deriv: u32) -> SampledFunction {
        match self {
            Coefficient::Sampled(s) => s.spectral_derivative(deriv),
            Coefficient::Expr { expr, grid } => {
                let d = expr.derivative_n(deriv);
                SampledFunction {
                    x0: grid.x0,
                    dx: grid.dx,
                    values: (0..grid.n).map(|j| d.eval(grid.x0 + j as f64 * grid.dx)).collect(),
                }
            }
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionResult {
    pub q: u32,
    pub exponent: Rational,
    pub theta: Rational,
    /// Integrand after dropping parts that vanish on the data.
    pub integrand: String,
    pub vanishes: bool,
    pub hoelder: HoelderReport,
}

#[derive(Clone, Debug, Serialize)]
pub struct ConditionsReport {
    pub k: u32,
    pub gauged: bool,
    pub window: (f64, f64),
    pub entries: Vec<ConditionResult>,
}

/// Drops `Im` atoms of exactly real data and `Re` atoms of exactly imaginary data.
fn simplify(p: &Polynomial, real: &BTreeSet<String>, imaginary: &BTreeSet<String>) -> Polynomial {
    p.substitute(&|a: &Atom| {
        let name = a.name.as_str();
        let zero = match a.family {
            Family::Im => real.contains(name),
            Family::Re => imaginary.contains(name),
            _ => false,
        };
        zero.then(Polynomial::zero)
    })
}

fn atom_value(a: &Atom, v: Complex64) -> Complex64 {
    match a.family {
        Family::Re => Complex64::new(v.re, 0.0),
        Family::Im => Complex64::new(v.im, 0.0),
        Family::Conj => v.conj(),
        Family::Full | Family::Formal => v,
    }
}

/// Evaluates `p` pointwise, with each atom's derivative sampled once.
pub fn evaluate_on_grid(
    p: &Polynomial,
    coeffs: &BTreeMap<String, Coefficient>,
    grid: SampledGrid,
) -> Result<SampledFunction, CheckError> {
    let mut table: BTreeMap<(String, u32), Vec<Complex64>> = BTreeMap::new();
    for a in p.atoms() {
        let name = a.name.as_str().to_string();
        let c = coeffs.get(&name).ok_or_else(|| CheckError::MissingCoefficient(name.clone()))?;
        table.entry((name, a.deriv)).or_insert_with(|| c.samples(a.deriv).values);
    }
    let values = (0..grid.n)
        .map(|j| p.eval(&|a: &Atom| atom_value(a, table[&(a.name.as_str().to_string(), a.deriv)][j])))
        .collect();
    Ok(SampledFunction { x0: grid.x0, dx: grid.dx, values })
}

/// Runs every condition of the order-`k` set on the supplied coefficients.
///
/// `theta_override` replaces the exponent of the condition with that `q`.
pub fn check_conditions(
    k: u32,
    gauged: bool,
    coeffs: &BTreeMap<String, Coefficient>,
    theta_override: &BTreeMap<u32, Rational>,
) -> Result<ConditionsReport, CheckError> {
    let set = if gauged {
        corollary_conditions(k).map_err(|e| CheckError::Conditions(e.to_string()))?
    } else {
        necessary_conditions(k).map_err(|e| CheckError::Conditions(e.to_string()))?
    };
    for e in &set.entries {
        for a in e.integrand.atoms() {
            if !coeffs.contains_key(a.name.as_str()) {
                return Err(CheckError::MissingCoefficient(a.name.as_str().to_string()));
            }
        }
    }
    let mut grid = None;
    for (name, c) in coeffs {
        let g = c.grid();
        match grid {
            None => grid = Some(g),
            Some(g0) => {
                let same = g0.n == g.n
                    && (g0.x0 - g.x0).abs() <= 1e-12 * (1.0 + g0.x0.abs())
                    && (g0.dx - g.dx).abs() <= 1e-12 * g0.dx;
                if !same {
                    return Err(CheckError::GridMismatch(name.clone()));
                }
            }
        }
    }
    let grid = grid.ok_or(CheckError::NoGrid)?;
    if grid.n < 2 {
        return Err(HoelderError::DegenerateGrid(grid.n).into());
    }
    let mut real = BTreeSet::new();
    let mut imaginary = BTreeSet::new();
    for (name, c) in coeffs {
        let s = c.samples(0);
        if s.is_real() {
            real.insert(name.clone());
        }
        if s.is_imaginary() {
            imaginary.insert(name.clone());
        }
    }
    let mut entries = Vec::new();
    for e in &set.entries {
        let integrand = simplify(&e.integrand, &real, &imaginary);
        let theta = theta_override.get(&e.q).copied().unwrap_or(e.exponent);
        let mut sampled = evaluate_on_grid(&integrand, coeffs, grid)?;
        // integrands are real; drop round-off in the imaginary part
        for v in &mut sampled.values {
            v.im = 0.0;
        }
        let hoelder = hoelder_ratio(&sampled, theta)?;
        entries.push(ConditionResult {
            q: e.q,
            exponent: e.exponent,
            theta,
            integrand: integrand.dump_inline(),
            vanishes: integrand.is_zero(),
            hoelder,
        });
    }
    let window = (grid.x0, grid.x0 + (grid.n - 1) as f64 * grid.dx);
    Ok(ConditionsReport { k, gauged, window, entries })
}
