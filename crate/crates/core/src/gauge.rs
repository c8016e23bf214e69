//! Removing the `D^{k-1}` coefficient by an exponential gauge, and the
//! conditions for the gauged operator.

use std::collections::BTreeMap;

use crate::algebra::{normal_form, GaussianRational, Polynomial, Rational};
use crate::operator::DiffOperator;
use crate::recursion::{self, condition_from_complex, letter_for, raw_condition_cells, Condition, ConditionSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum GaugeError {
    #[error("gauge transform needs k >= 2, got {0}")]
    OrderTooLow(u32),
    #[error("corollary conditions are tabulated for k in 3..=8, got {0}")]
    UnsupportedOrder(u32),
    #[error(transparent)]
    Recursion(#[from] recursion::RecursionError),
}

/// `e^{-g} ∘ L ∘ e^{g}` for a phase with derivative `g'`.
pub fn conjugate_by_phase(l: &DiffOperator, g_prime: &Polynomial) -> DiffOperator {
    let op = l.to_ray_operator().exp_conjugate(g_prime, 0);
    DiffOperator::from_ray_operator(&op, l.k, l.has_dt).expect("phase conjugation keeps the principal part")
}

/// Phase derivative `-(i/k) b_{k-1}` that cancels the `D^{k-1}` term.
pub fn gauge_phase(l: &DiffOperator) -> Polynomial {
    l.coeff(l.k - 1).scale(GaussianRational::imag(Rational::new(-1, l.k as i128)))
}

/// `φ^{-1} L φ` with `φ = exp(-(i/k) ∫ b_{k-1})`; the result has no `D^{k-1}` term.
pub fn gauge_conjugate(l: &DiffOperator) -> Result<DiffOperator, GaugeError> {
    if l.k < 2 {
        return Err(GaugeError::OrderTooLow(l.k));
    }
    Ok(conjugate_by_phase(l, &gauge_phase(l)))
}

/// Inverse of [`gauge_conjugate`] for the phase of the original operator.
pub fn inverse_gauge(gauged: &DiffOperator, original_phase: &Polynomial) -> DiffOperator {
    conjugate_by_phase(gauged, &-original_phase)
}

/// Canonical representative modulo total x-derivatives.
pub fn mod_derivatives(p: &Polynomial) -> Polynomial {
    normal_form(p)
}

/// `D^k + a D^{k-1} + b D^{k-2} + …` down to `D^1`, letters as coefficients.
pub fn lettered_operator(k: u32) -> DiffOperator {
    let mut l = DiffOperator::new(k);
    for j in 1..k {
        l = l.with_coeff(j, Polynomial::full(&letter_for(k, j).to_string(), 0));
    }
    l
}

/// Conditions for operators with a `D^{k-1}` term: `Im a` with exponent 0,
/// then the gauged operator's conditions with exponents `(q-1)/(k-1)`.
pub fn corollary_conditions(k: u32) -> Result<ConditionSet, GaugeError> {
    if !(3..=recursion::MAX_ORDER).contains(&k) {
        return Err(GaugeError::UnsupportedOrder(k));
    }
    let gauged = gauge_conjugate(&lettered_operator(k))?;
    let replacement: BTreeMap<u32, Polynomial> = (0..k - 1).map(|alpha| (alpha, gauged.coeff(alpha))).collect();
    let top = Polynomial::full(&letter_for(k, k - 1).to_string(), 0);
    let mut entries = vec![Condition {
        q: 1,
        level: 0,
        exponent: Rational::ZERO,
        complex_form: top.clone(),
        integrand: normal_form(&top.im_part()),
    }];
    for (q, cell) in raw_condition_cells(k)? {
        let complex = recursion::substitute_coefficients(&cell, &replacement);
        entries.push(condition_from_complex(q, k, &complex));
    }
    Ok(ConditionSet { k, gauged: true, entries })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauge_removes_subprincipal_term() {
        for k in 2..=7 {
            let l = lettered_operator(k);
            let g = gauge_conjugate(&l).unwrap();
            assert!(g.coeff(k - 1).is_zero(), "k = {k}");
        }
    }

    #[test]
    fn inverse_gauge_round_trips() {
        let l = lettered_operator(5);
        let phase = gauge_phase(&l);
        let g = gauge_conjugate(&l).unwrap();
        assert_eq!(inverse_gauge(&g, &phase), l);
    }

    #[test]
    fn transformed_d3_coefficient_for_k5() {
        // b - (2/5) a^2 + 2 i a'
        let g = gauge_conjugate(&lettered_operator(5)).unwrap();
        let a = Polynomial::full("a", 0);
        let expected = Polynomial::full("b", 0) - a.pow(2).scale_r(Rational::new(2, 5))
            + Polynomial::full("a", 1).scale(GaussianRational::imag(Rational::int(2)));
        assert_eq!(g.coeff(3), expected);
    }
}
