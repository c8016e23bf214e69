mod common;

use common::{d_op, grid, inner, Trig, C};
use dispersym_core::algebra::{q, Atom, Family, GaussianRational, Polynomial};
use dispersym_core::operator::{ConjugationCoefficients, DiffOperator};
use dispersym_core::symbol::{
    compose, sobolev_conjugate, Mode, OpaqueAtom, Registry, Shape, SymbolError, SymbolExpr, XRule,
};
use proptest::prelude::*;

fn reg() -> Registry {
    Registry::new()
}

#[test]
fn order_examples() {
    let r = reg();
    let e = SymbolExpr::xi(Mode::SEll, 2) * SymbolExpr::ell_bracket(Mode::SEll, -3) * SymbolExpr::ell(Mode::SEll, 1);
    assert_eq!(e.symbol_order(&r).unwrap(), Some(0));
    let mut r0 = reg();
    r0.declare("Phi0", 0, XRule::Free).unwrap();
    assert_eq!(SymbolExpr::opaque(Mode::SEll, "Phi0", 1).symbol_order(&r0).unwrap(), Some(-1));
    assert_eq!(SymbolExpr::opaque(Mode::SEll, "Phi0", 3).symbol_order(&r0).unwrap(), Some(-3));
    let b = SymbolExpr::ell_bracket(Mode::SEll, -1) * Polynomial::im("b", 0);
    assert_eq!(b.symbol_order(&r).unwrap(), Some(-1));
    assert_eq!(SymbolExpr::zero(Mode::S).symbol_order(&r).unwrap(), None);
}

#[test]
fn ell_counts_only_in_the_uniform_grading() {
    let r = reg();
    let e = SymbolExpr::xi(Mode::S, 1) * SymbolExpr::ell(Mode::S, 2);
    assert_eq!(e.symbol_order(&r).unwrap(), Some(1));
    assert_eq!(e.with_mode(Mode::SEll).symbol_order(&r).unwrap(), Some(3));
}

#[test]
fn formal_exponents_cannot_be_graded() {
    let e = SymbolExpr::unit_bracket(Mode::S, 0, 1);
    assert!(matches!(e.symbol_order(&reg()), Err(SymbolError::UncancelledFormalExponent(_))));
    let cancelled = &e * &SymbolExpr::unit_bracket(Mode::S, 2, -1);
    assert_eq!(cancelled.symbol_order(&reg()).unwrap(), Some(2));
}

#[test]
fn truncation_examples() {
    let r = reg();
    let m = Mode::SEll;
    let e = SymbolExpr::xi(m, 3) + SymbolExpr::poly(m, Polynomial::im("b", 0));
    assert_eq!(e.truncate(0, &r).unwrap(), SymbolExpr::xi(m, 3));
    assert!(SymbolExpr::zero(m).truncate(3, &r).unwrap().is_zero());
    let z = SymbolExpr::xi(m, 2) * SymbolExpr::ell_bracket(m, -2) * Polynomial::re("b", 1);
    assert!(z.truncate(0, &r).unwrap().is_zero());
    let t = e.truncate(-1, &r).unwrap();
    assert_eq!(t.truncate(-1, &r).unwrap(), t);
}

#[test]
fn composition_examples() {
    let r = reg();
    let m = Mode::S;
    assert_eq!(compose(&SymbolExpr::xi(m, 1), &SymbolExpr::xi(m, 1), -10, &r).unwrap(), SymbolExpr::xi(m, 2));
    // D(bu) = b Du - i b' u
    let b = SymbolExpr::poly(m, Polynomial::re("b", 0));
    let got = compose(&SymbolExpr::xi(m, 1), &b, -10, &r).unwrap();
    let expected =
        SymbolExpr::xi(m, 1) * Polynomial::re("b", 0) - SymbolExpr::poly(m, Polynomial::re("b", 1) * Polynomial::i());
    assert_eq!(got, expected);
}

#[test]
fn composition_with_a_phase_has_the_first_derivative_row() {
    let mut r = reg();
    r.declare("Phi0", 0, XRule::Free).unwrap();
    let m = Mode::SEll;
    let op = SymbolExpr::xi(m, 5) + SymbolExpr::xi(m, 3) * Polynomial::re("b", 0);
    let e = compose(&op, &SymbolExpr::gauge(m, "Phi0", 1), 0, &r).unwrap();
    let shape = |xi| {
        let mut s = Shape { xi, ..Shape::default() };
        s.mul_opaque(OpaqueAtom { x_derivs: 1, ..OpaqueAtom::new("Phi0", 0) }, 1);
        s.mul_gauge("Phi0".into(), 1);
        s
    };
    // -i e^Φ (5ξ⁴ + 3bξ²) ∂_xΦ
    let row: Vec<_> = e.terms().filter(|(s, _)| **s == shape(4) || **s == shape(2)).map(|(_, c)| c.clone()).collect();
    assert_eq!(
        row,
        vec![
            Polynomial::re("b", 0).scale(GaussianRational::imag(q(-3, 1))),
            Polynomial::constant(GaussianRational::imag(q(-5, 1)))
        ]
    );
}

#[test]
fn missing_x_rule_is_reported() {
    let mut r = reg();
    r.declare("Psi", 0, XRule::Missing).unwrap();
    let e = compose(&SymbolExpr::xi(Mode::S, 2), &SymbolExpr::opaque(Mode::S, "Psi", 0), -3, &r);
    assert!(matches!(e, Err(SymbolError::MissingXRule(_))));
    assert!(matches!(r.declare("Psi", 0, XRule::Free), Err(SymbolError::DuplicateName(_))));
}

#[test]
fn sobolev_conjugation_of_the_principal_part() {
    let p = SymbolExpr::xi(Mode::S, 5);
    assert_eq!(sobolev_conjugate(&p, 0, &reg()).unwrap(), SymbolExpr::xi(Mode::Ray, 5));
}

#[test]
fn bracket_expansion_along_the_ray() {
    // ⟨ξ⟩_ℓ^{-1} = ξ^{-1} - (ℓ²/2) ξ^{-3} + …
    let e = (SymbolExpr::xi(Mode::SEll, 4) * SymbolExpr::ell_bracket(Mode::SEll, -1)).to_ray(0, &reg()).unwrap();
    let mut expected = SymbolExpr::xi(Mode::Ray, 3);
    expected.add_term(Shape { xi: 1, ell: 2, ..Shape::default() }, Polynomial::rational(q(-1, 2)));
    assert_eq!(e, expected);
}

fn coefficient(name: &str, n: usize) -> Trig {
    let w = 1.0 + name.len() as f64 + n as f64;
    Trig(vec![(C::new(0.4, -0.3 + 0.1 * n as f64), w), (C::new(-0.2 * n as f64, 0.25), -1.0)])
}

fn eval(p: &Polynomial, coeffs: &[(String, Trig)], x: f64) -> C {
    p.eval(&|a: &Atom| {
        let t = &coeffs.iter().find(|(n, _)| n == a.name.as_str()).unwrap().1;
        let v = t.eval(x, a.deriv);
        match a.family {
            Family::Full => v,
            Family::Conj => v.conj(),
            Family::Re => C::new(v.re, 0.0),
            Family::Im => C::new(v.im, 0.0),
            Family::Formal => unreachable!(),
        }
    })
}

fn apply(l: &DiffOperator, u: &[C], xs: &[f64], coeffs: &[(String, Trig)], len: f64) -> Vec<C> {
    let mut out = vec![C::new(0.0, 0.0); u.len()];
    let mut du = u.to_vec();
    for j in 0..=l.k {
        let c = l.coeff(j);
        for (i, &x) in xs.iter().enumerate() {
            out[i] += eval(&c, coeffs, x) * du[i];
        }
        du = d_op(&du, len);
    }
    out
}

#[test]
fn adjoint_satisfies_integration_by_parts() {
    let n = 256;
    let len = 2.0 * std::f64::consts::PI;
    let xs = grid(n, len);
    let dx = len / n as f64;
    for k in [3u32, 5, 6] {
        let names: Vec<String> = (0..k).map(|j| format!("b{j}")).collect();
        let coeffs: Vec<(String, Trig)> =
            names.iter().enumerate().map(|(j, s)| (s.clone(), coefficient(s, j))).collect();
        let mut l = DiffOperator::new(k);
        for (j, s) in names.iter().enumerate() {
            l = l.with_coeff(j as u32, Polynomial::full(s, 0));
        }
        let u: Vec<C> = xs.iter().map(|&x| C::new(x.sin().exp(), (2.0 * x).cos())).collect();
        let v: Vec<C> = xs.iter().map(|&x| C::new((x.cos() * 0.5).exp(), 0.3 * (3.0 * x).sin())).collect();
        let lhs = inner(&apply(&l, &u, &xs, &coeffs, len), &v, dx);
        let rhs = inner(&u, &apply(&l.adjoint(), &v, &xs, &coeffs, len), dx);
        let scale = common::l2(&u, dx) * common::l2(&v, dx) * 6f64.powi(k as i32);
        assert!((lhs - rhs).norm() <= 1e-8 * scale, "k={k}: {lhs} vs {rhs}");
    }
}

#[test]
fn adjoint_examples() {
    let l = DiffOperator::new(4);
    assert_eq!(l.adjoint(), l);
    let b1 = Polynomial::full("b1", 0);
    let adj = DiffOperator::new(3).with_coeff(1, b1.clone()).adjoint();
    assert_eq!(adj.coeff(0), b1.conj().differentiate().scale(-GaussianRational::I));
}

fn operator_strategy() -> impl Strategy<Value = DiffOperator> {
    let coeff = (-3i128..4, -3i128..4, 0u32..2);
    prop::collection::vec(coeff, 6).prop_map(|cs| {
        let mut l = DiffOperator::new(6);
        for (j, (a, b, d)) in cs.into_iter().enumerate() {
            let name = format!("b{j}");
            let p = Polynomial::full(&name, d) * Polynomial::rational(q(a, 1))
                + Polynomial::full(&name, 0).pow(2).scale(GaussianRational::imag(q(b, 2)));
            l = l.with_coeff(j as u32, p);
        }
        l
    })
}

fn small_symbol() -> impl Strategy<Value = SymbolExpr> {
    prop::collection::vec((0i32..4, -2i128..3, 0u32..2), 1..4).prop_map(|ts| {
        let mut e = SymbolExpr::zero(Mode::S);
        for (xi, c, d) in ts {
            let coeff = Polynomial::re("b", d) * Polynomial::rational(q(c, 1)) + Polynomial::int(1);
            e = e + SymbolExpr::xi(Mode::S, xi) * coeff;
        }
        e
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn adjoint_is_an_involution(l in operator_strategy()) {
        prop_assert_eq!(l.adjoint().adjoint(), l);
    }

    #[test]
    fn composition_is_associative_up_to_the_cutoff(a in small_symbol(), b in small_symbol(), c in small_symbol()) {
        let r = reg();
        let cutoff = -2;
        let left = compose(&compose(&a, &b, cutoff - 6, &r).unwrap(), &c, cutoff, &r).unwrap();
        let right = compose(&a, &compose(&b, &c, cutoff - 6, &r).unwrap(), cutoff, &r).unwrap();
        let diff = (left - right).truncate(cutoff, &r).unwrap();
        prop_assert!(diff.is_zero(), "{}", diff.dump());
    }

    #[test]
    fn products_respect_orders(x1 in -3i32..4, l1 in -4i32..1, e1 in 0u32..3, x2 in 0i32..3, l2 in -3i32..2) {
        let r = reg();
        let m = Mode::SEll;
        let a = SymbolExpr::xi(m, x1.max(0)) * SymbolExpr::ell_bracket(m, l1) * SymbolExpr::ell(m, e1);
        let b = SymbolExpr::xi(m, x2) * SymbolExpr::ell_bracket(m, l2) + SymbolExpr::one(m);
        let oa = a.symbol_order(&r).unwrap().unwrap();
        let ob = b.symbol_order(&r).unwrap().unwrap();
        prop_assert!((&a * &b).symbol_order(&r).unwrap().unwrap() <= oa + ob);
    }
}

#[test]
fn conjugation_coefficients_match_numerical_differentiation() {
    let n = 64;
    let len = 2.0 * std::f64::consts::PI;
    let xs = grid(n, len);
    let a = Trig(vec![
        (C::new(0.35, 0.0), 1.0),
        (C::new(0.35, 0.0), -1.0),
        (C::new(0.0, -0.15), 2.0),
        (C::new(0.0, 0.15), -2.0),
    ]);
    let coeffs = ConjugationCoefficients::new(&Polynomial::full("a", 1), 4);
    for m in [1u32, 2] {
        for xi in [4.0f64, 8.0] {
            let g: Vec<C> = xs.iter().map(|&x| (a.eval(x, 0) / xi.powi(m as i32)).exp()).collect();
            let mut dg = g.clone();
            for p in 1..=4u32 {
                dg = d_op(&dg, len);
                let symbolic: Vec<C> = xs
                    .iter()
                    .map(|&x| {
                        (1..=p)
                            .map(|qq| {
                                let c = coeffs.get(p, qq).eval(&|at: &Atom| a.eval(x, at.deriv));
                                c / xi.powi((m * qq) as i32)
                            })
                            .sum()
                    })
                    .collect();
                let scale = symbolic.iter().map(|z| z.norm()).fold(0.0, f64::max);
                for i in 0..n {
                    let err = (dg[i] / g[i] - symbolic[i]).norm() / scale;
                    assert!(err < 1e-8, "p={p} m={m} ξ={xi} x={}: relative error {err}", xs[i]);
                }
            }
        }
    }
}
