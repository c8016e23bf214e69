//! Differential polynomials modulo total x-derivatives.
//!
//! `D` preserves the multiset of underlying functions in a monomial and raises
//! its derivative weight by one, so each graded piece can be reduced against
//! the image of `D` by exact linear algebra. The leading monomial of an image
//! vector is the one whose derivatives sit on the latest base, which leaves
//! representatives with derivatives on the earliest coefficients.

use std::collections::{BTreeMap, BTreeSet};

use super::atom::{Atom, Family, Name};
use super::gaussian::GaussianRational;
use super::poly::{Monomial, Polynomial};

type Base = (Family, Name);

#[derive(Clone, PartialEq, Eq, PartialOrd, Ord)]
struct GradeKey {
    bases: Vec<(Base, u32)>,
    formal: Monomial,
    weight: u32,
}

fn grade_of(m: &Monomial) -> GradeKey {
    let mut bases: BTreeMap<Base, u32> = BTreeMap::new();
    let mut formal = Monomial::one();
    for (a, e) in m.factors() {
        if a.family == Family::Formal {
            formal.mul_atom(*a, *e);
        } else {
            *bases.entry(a.base()).or_default() += e;
        }
    }
    GradeKey { bases: bases.into_iter().collect(), formal, weight: m.weight() }
}

/// Derivative orders grouped by base, latest base first, each group sorted
/// descending. Larger keys are eliminated first.
fn elimination_key(m: &Monomial) -> Vec<u32> {
    let mut by_base: BTreeMap<Base, Vec<u32>> = BTreeMap::new();
    for (a, e) in m.factors() {
        if a.family != Family::Formal {
            let v = by_base.entry(a.base()).or_default();
            v.extend(std::iter::repeat_n(a.deriv, *e as usize));
        }
    }
    let mut key = Vec::new();
    for (_, mut v) in by_base.into_iter().rev() {
        v.sort_unstable_by(|a, b| b.cmp(a));
        key.extend(v);
    }
    key
}

/// Non-increasing sequences of `len` entries summing to `total`.
fn partitions(total: u32, len: u32, cap: u32, out: &mut Vec<Vec<u32>>, cur: &mut Vec<u32>) {
    if len == 0 {
        if total == 0 {
            out.push(cur.clone());
        }
        return;
    }
    let hi = total.min(cap);
    for v in (0..=hi).rev() {
        if v * len < total {
            break;
        }
        cur.push(v);
        partitions(total - v, len - 1, v, out, cur);
        cur.pop();
    }
}

fn monomials_of_grade(key: &GradeKey, weight: u32) -> Vec<Monomial> {
    let mut acc: Vec<(Monomial, u32)> = vec![(key.formal.clone(), weight)];
    for ((fam, name), mult) in &key.bases {
        let mut next = Vec::new();
        for (m, left) in &acc {
            for used in 0..=*left {
                let mut parts = Vec::new();
                partitions(used, *mult, used, &mut parts, &mut Vec::new());
                for p in parts {
                    let mut nm = m.clone();
                    for d in p {
                        nm.mul_atom(Atom { family: *fam, name: *name, deriv: d }, 1);
                    }
                    next.push((nm, left - used));
                }
            }
        }
        acc = next;
    }
    acc.into_iter().filter(|(_, left)| *left == 0).map(|(m, _)| m).collect()
}

type Vector = BTreeMap<Monomial, GaussianRational>;

fn leading(v: &Vector) -> Option<Monomial> {
    v.keys().max_by(|a, b| elimination_key(a).cmp(&elimination_key(b))).cloned()
}

fn axpy(target: &mut Vector, c: GaussianRational, v: &Vector) {
    for (m, x) in v {
        let e = target.entry(m.clone()).or_default();
        *e -= c * *x;
        if e.is_zero() {
            target.remove(m);
        }
    }
}

/// Echelon basis of `D` applied to all monomials one weight below `key`.
fn image_basis(key: &GradeKey) -> BTreeMap<Monomial, Vector> {
    let mut basis: BTreeMap<Monomial, Vector> = BTreeMap::new();
    if key.weight == 0 {
        return basis;
    }
    for m in monomials_of_grade(key, key.weight - 1) {
        let d = Polynomial::term(m, GaussianRational::ONE).differentiate();
        let mut v: Vector = d.terms().map(|(m, c)| (m.clone(), *c)).collect();
        reduce(&mut v, &basis);
        if let Some(lead) = leading(&v) {
            let inv = v[&lead].inv();
            for x in v.values_mut() {
                *x *= inv;
            }
            basis.insert(lead, v);
        }
    }
    basis
}

fn reduce(v: &mut Vector, basis: &BTreeMap<Monomial, Vector>) {
    loop {
        let pivot = v
            .keys()
            .filter(|m| basis.contains_key(*m))
            .max_by(|a, b| elimination_key(a).cmp(&elimination_key(b)))
            .cloned();
        match pivot {
            Some(p) => {
                let c = v[&p];
                axpy(v, c, &basis[&p]);
            }
            None => return,
        }
    }
}

/// Canonical representative of `p` modulo total x-derivatives.
///
/// Two polynomials differ by a total derivative exactly when their normal
/// forms coincide.
pub fn normal_form(p: &Polynomial) -> Polynomial {
    let mut groups: BTreeMap<GradeKey, Vector> = BTreeMap::new();
    for (m, c) in p.terms() {
        groups.entry(grade_of(m)).or_default().insert(m.clone(), *c);
    }
    let mut out = Polynomial::zero();
    for (key, mut v) in groups {
        let basis = image_basis(&key);
        reduce(&mut v, &basis);
        for (m, c) in v {
            out.add_term(m, c);
        }
    }
    out
}

pub fn equivalent_mod_derivatives(p: &Polynomial, q: &Polynomial) -> bool {
    normal_form(&(p - q)).is_zero()
}

/// Variational derivative `Σ_β (-∂_x)^β ∂p/∂u^(β)` for the base `u`.
pub fn euler_operator(p: &Polynomial, family: Family, name: Name) -> Polynomial {
    let max_d = p.atoms().iter().filter(|a| a.base() == (family, name)).map(|a| a.deriv).max();
    let mut out = Polynomial::zero();
    if let Some(max_d) = max_d {
        for beta in 0..=max_d {
            let part = p.partial(&Atom { family, name, deriv: beta });
            let mut term = part.differentiate_n(beta);
            if beta % 2 == 1 {
                term = -term;
            }
            out += term;
        }
    }
    out
}

/// Decides whether `p` is a total derivative of a differential polynomial.
pub fn is_total_derivative(p: &Polynomial) -> bool {
    let constant_part = p.terms().any(|(m, _)| m.factors().iter().all(|(a, _)| a.family == Family::Formal));
    if constant_part {
        return false;
    }
    let bases: BTreeSet<Base> =
        p.atoms().into_iter().filter(|a| a.family != Family::Formal).map(|a| a.base()).collect();
    bases.into_iter().all(|(f, n)| euler_operator(p, f, n).is_zero())
}
