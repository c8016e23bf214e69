//! Structural properties of the conjugation recursion.

mod common;

use common::{d_op, grid, Trig, C};
use dispersym_core::algebra::{Atom, Family, GaussianRational, Polynomial, Rational};
use dispersym_core::recursion::{run_levels, verify_structure, x_atom, RecursionError, RecursionState};

#[test]
fn structure_holds_for_orders_three_to_six() {
    for k in 3..=6 {
        let report = verify_structure(k).unwrap();
        assert_eq!(report.levels, k - 1);
        assert_eq!(report.checks.len() as u32, 5 * (k - 1));
        assert!(report.passed(), "k={k}: {:?}", report.checks.iter().filter(|c| !c.passed).collect::<Vec<_>>());
    }
}

#[test]
fn order_two_matches_direct_conjugation() {
    // e^{-ixξ-itξ²} (D_t - D² - conj(b0)) e^{ixξ+itξ²} = D_t - 2ξD - D² - conj(b0)
    let s = RecursionState::base_case(2).unwrap();
    let mut cells: Vec<_> = s.cells().map(|(l, j, p)| (l, j, p.clone())).collect();
    cells.sort_by_key(|(l, j, _)| (*l, *j));
    assert_eq!(cells, vec![(0, 0, Polynomial::atom(x_atom(0, 0))), (0, 2, Polynomial::one())]);
    assert_eq!(s.cell(1, 1), Polynomial::int(2));
    assert_eq!(s.cell(2, 0), Polynomial::one());
}

#[test]
fn order_three_base_case_by_hand() {
    // D ∘ conj(b1) = conj(b1) D - i conj(b1)', so B1 = conj(b1), B0 = conj(b0) - i conj(b1)'
    let s = RecursionState::base_case(3).unwrap();
    let b1 = Polynomial::atom(x_atom(1, 0));
    let b0 = Polynomial::atom(x_atom(0, 0)) - Polynomial::atom(x_atom(1, 1)).scale(GaussianRational::I);
    assert_eq!(s.cell(1, 0), b1);
    assert_eq!(s.cell(0, 1), b1);
    assert_eq!(s.cell(0, 0), b0);
    assert_eq!(s.cell(0, 3), Polynomial::one());
    assert_eq!(s.cell(1, 2), Polynomial::int(3));
}

#[test]
fn second_level_pivot_vanishes_for_order_five() {
    let levels = run_levels(5, 3).unwrap();
    assert!(levels[1].cell(3, 0).is_zero());
    assert!(levels[2].cell(2, 0).is_zero());
    assert!(levels[3].cell(1, 0).is_zero());
}

#[test]
fn injected_fault_breaks_the_band_property() {
    let levels = run_levels(5, 1).unwrap();
    let mut s = levels[1].clone();
    let cell = s.cell(3, 1) + Polynomial::atom(x_atom(0, 0));
    s.inject(3, 1, cell);
    let failures = s.audit();
    assert!(failures
        .iter()
        .any(|e| matches!(e, RecursionError::StructuralViolation { property: "band", l: 3, j: 1, level: 1, .. })));
    assert!(s.step().is_err() || s.check().is_err());
}

#[test]
fn levels_beyond_k_minus_two_are_rejected() {
    assert!(matches!(run_levels(4, 3), Err(RecursionError::InvalidLevel { .. })));
    let last = run_levels(4, 2).unwrap().pop().unwrap();
    assert!(last.step().is_err());
}

fn coefficient_samples(k: u32) -> Vec<Trig> {
    (0..=k - 2)
        .map(|alpha| {
            let a = alpha as f64;
            Trig(vec![(C::new(0.3 + 0.1 * a, -0.2), 1.0 + a), (C::new(-0.1, 0.15 * (a + 1.0)), -2.0)])
        })
        .collect()
}

fn eval_atom(coeffs: &[Trig], x: f64, a: &Atom) -> C {
    let alpha = a.name.index().unwrap() as usize;
    let v = coeffs[alpha].eval(x, a.deriv);
    match a.family {
        Family::Full => v,
        Family::Conj => v.conj(),
        Family::Re => C::new(v.re, 0.0),
        Family::Im => C::new(v.im, 0.0),
        Family::Formal => unreachable!(),
    }
}

fn eval_poly(p: &Polynomial, coeffs: &[Trig], x: f64) -> C {
    p.eval(&|a: &Atom| eval_atom(coeffs, x, a))
}

#[test]
fn table_matches_numerical_conjugation_for_order_four() {
    let k = 4u32;
    let n = 128;
    let len = 2.0 * std::f64::consts::PI;
    let xs = grid(n, len);
    let coeffs = coefficient_samples(k);
    let xi: f64 = 40.0;
    let w: Vec<C> = xs.iter().map(|&x| C::new((x).sin().exp(), 0.3 * (2.0 * x).cos())).collect();
    let levels = run_levels(k, k - 2).unwrap();
    // ψ' accumulates a_m'/ξ^m, with a_m' = -(i/k) times the pivot of the previous level
    let mut psi_prime = vec![C::new(0.0, 0.0); n];
    for m in 0..levels.len() {
        if m > 0 {
            let pivot = levels[m - 1].cell(k as i32 - 1 - m as i32, 0);
            let a_prime = pivot.scale(GaussianRational::imag(Rational::new(-1, k as i128)));
            for (j, &x) in xs.iter().enumerate() {
                psi_prime[j] += eval_poly(&a_prime, &coeffs, x) / xi.powi(m as i32);
            }
        }
        // conjugated D: D + ξ - iψ'
        let dt = |u: &[C]| -> Vec<C> {
            let du = d_op(u, len);
            du.iter().zip(u).zip(&psi_prime).map(|((d, v), p)| d + (xi - C::i() * p) * v).collect()
        };
        let pow = |u: &[C], j: u32| (0..j).fold(u.to_vec(), |acc, _| dt(&acc));
        // L* spatial part: D^k + Σ D^j ∘ conj(b_j)
        let mut reference = pow(&w, k);
        for (alpha, c) in coeffs.iter().enumerate() {
            let prod: Vec<C> = xs.iter().zip(&w).map(|(&x, v)| c.eval(x, 0).conj() * v).collect();
            for (r, t) in reference.iter_mut().zip(pow(&prod, alpha as u32)) {
                *r += t;
            }
        }
        let s = &levels[m];
        let mut table = vec![C::new(0.0, 0.0); n];
        let mut add = |l: i32, j: u32, p: &Polynomial| {
            let dw = (0..j).fold(w.clone(), |acc, _| d_op(&acc, len));
            for (i, &x) in xs.iter().enumerate() {
                table[i] += xi.powi(l) * eval_poly(p, &coeffs, x) * dw[i];
            }
        };
        add(k as i32, 0, &Polynomial::one());
        add(k as i32 - 1, 1, &Polynomial::int(k as i128));
        for (l, j, p) in s.cells() {
            add(l, j, p);
        }
        let scale = reference.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let err = reference.iter().zip(&table).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
        assert!(err / scale < 1e-9, "level {m}: relative error {}", err / scale);
    }
}
