//! Pseudo-differential symbols with exact coefficients.
//!
//! A term is `coeff(x) · ξ^a · ⟨ξ⟩^{n+σs} · ⟨ξ⟩_ℓ^m · ℓ^c · Π opaque · e^{pΦ}`,
//! where `⟨ξ⟩ = (1+ξ²)^{1/2}`, `⟨ξ⟩_ℓ = (ℓ²+ξ²)^{1/2}` and `s` is the formal
//! Sobolev exponent.

mod calculus;
mod registry;
mod serialize;

use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};
use smallvec::SmallVec;

use crate::algebra::{GaussianRational, Name, Polynomial, Rational};

pub use calculus::{compose, compose_with, sobolev_conjugate};
pub use registry::{OpaqueDecl, Registry, XRule};

/// Name of the formal Sobolev exponent atom.
pub const SOBOLEV_PARAM: &str = "s";

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Mode {
    /// Classical `S^m`; `ℓ` is a fixed constant of order zero.
    S,
    /// Uniform classes `S^m_(ℓ)`; `ℓ` carries order one.
    SEll,
    /// Asymptotic expansion along `ξ → +∞`; negative integer powers allowed.
    Ray,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Grading {
    FixedEll,
    UniformEll,
}

impl Mode {
    pub fn grading(self) -> Grading {
        match self {
            Mode::SEll => Grading::UniformEll,
            Mode::S | Mode::Ray => Grading::FixedEll,
        }
    }
}

/// `∂_ξ^xi_derivs ∂_x^x_derivs` of a declared opaque symbol.
#[derive(Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct OpaqueAtom {
    pub name: Name,
    pub xi_derivs: u32,
    pub x_derivs: u32,
}

impl OpaqueAtom {
    pub fn new(name: &str, xi_derivs: u32) -> Self {
        OpaqueAtom { name: Name::new(name), xi_derivs, x_derivs: 0 }
    }
}

impl fmt::Display for OpaqueAtom {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}[xi{},x{}]", self.name, self.xi_derivs, self.x_derivs)
    }
}

/// Everything in a term except its coefficient polynomial.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Shape {
    pub xi: i32,
    pub xi_s: i8,
    pub jb: i32,
    pub jb_s: i8,
    pub lb: i32,
    pub ell: u32,
    pub opaques: SmallVec<[(OpaqueAtom, u32); 3]>,
    pub gauge: SmallVec<[(Name, i32); 1]>,
}

impl Shape {
    pub fn mul(&self, o: &Shape) -> Shape {
        let mut out = Shape {
            xi: self.xi + o.xi,
            xi_s: self.xi_s + o.xi_s,
            jb: self.jb + o.jb,
            jb_s: self.jb_s + o.jb_s,
            lb: self.lb + o.lb,
            ell: self.ell + o.ell,
            opaques: self.opaques.clone(),
            gauge: self.gauge.clone(),
        };
        for (a, e) in &o.opaques {
            out.mul_opaque(*a, *e);
        }
        for (g, p) in &o.gauge {
            out.mul_gauge(*g, *p);
        }
        out
    }

    pub fn mul_opaque(&mut self, a: OpaqueAtom, e: u32) {
        if e == 0 {
            return;
        }
        match self.opaques.binary_search_by(|(b, _)| b.cmp(&a)) {
            Ok(i) => self.opaques[i].1 += e,
            Err(i) => self.opaques.insert(i, (a, e)),
        }
    }

    pub fn without_opaque(&self, a: &OpaqueAtom) -> Shape {
        let mut out = self.clone();
        let i = out.opaques.iter().position(|(b, _)| b == a).expect("opaque factor present");
        if out.opaques[i].1 == 1 {
            out.opaques.remove(i);
        } else {
            out.opaques[i].1 -= 1;
        }
        out
    }

    pub fn mul_gauge(&mut self, g: Name, p: i32) {
        match self.gauge.binary_search_by(|(b, _)| b.cmp(&g)) {
            Ok(i) => {
                self.gauge[i].1 += p;
                if self.gauge[i].1 == 0 {
                    self.gauge.remove(i);
                }
            }
            Err(i) if p != 0 => self.gauge.insert(i, (g, p)),
            Err(_) => {}
        }
    }

    pub fn has_formal_exponent(&self) -> bool {
        self.xi_s != 0 || self.jb_s != 0
    }

    pub fn has_brackets(&self) -> bool {
        self.jb != 0 || self.jb_s != 0 || self.lb != 0
    }

    pub fn is_x_independent_factor(&self) -> bool {
        self.opaques.is_empty() && self.gauge.is_empty()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        let flag = |s: i8| match s {
            0 => String::new(),
            1 => "+s".to_string(),
            -1 => "-s".to_string(),
            n => format!("{n:+}s"),
        };
        if self.xi != 0 || self.xi_s != 0 {
            parts.push(format!("xi^({}{})", self.xi, flag(self.xi_s)));
        }
        if self.jb != 0 || self.jb_s != 0 {
            parts.push(format!("jb^({}{})", self.jb, flag(self.jb_s)));
        }
        if self.lb != 0 {
            parts.push(format!("lb^({})", self.lb));
        }
        if self.ell != 0 {
            parts.push(format!("ell^{}", self.ell));
        }
        for (a, e) in &self.opaques {
            parts.push(if *e == 1 { a.to_string() } else { format!("{a}^{e}") });
        }
        for (g, p) in &self.gauge {
            parts.push(format!("exp({p}*{g})"));
        }
        if parts.is_empty() {
            f.write_str("1")
        } else {
            f.write_str(&parts.join("*"))
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SymbolError {
    #[error("no x-rule declared for opaque symbol {0}")]
    MissingXRule(String),
    #[error("unknown opaque symbol {0}")]
    UnknownOpaque(String),
    #[error("opaque symbol {0} declared twice")]
    DuplicateName(String),
    #[error("term {0} carries an uncancelled formal exponent and cannot be graded")]
    UncancelledFormalExponent(String),
    #[error("x-rule for {name} has order {rule_order} above the symbol order {base_order}")]
    RuleOrder { name: String, rule_order: i32, base_order: i32 },
    #[error("negative power of xi in a graded mode: {0}")]
    NegativeXiPower(String),
}

pub type Result<T> = std::result::Result<T, SymbolError>;

/// Finite sum of symbol terms in one calculus mode.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymbolExpr {
    pub mode: Mode,
    terms: BTreeMap<Shape, Polynomial>,
}

impl SymbolExpr {
    pub fn zero(mode: Mode) -> Self {
        SymbolExpr { mode, terms: BTreeMap::new() }
    }

    pub fn one(mode: Mode) -> Self {
        Self::poly(mode, Polynomial::one())
    }

    pub fn term(mode: Mode, shape: Shape, coeff: Polynomial) -> Self {
        let mut e = Self::zero(mode);
        e.add_term(shape, coeff);
        e
    }

    pub fn poly(mode: Mode, p: Polynomial) -> Self {
        Self::term(mode, Shape::default(), p)
    }

    pub fn constant(mode: Mode, c: GaussianRational) -> Self {
        Self::poly(mode, Polynomial::constant(c))
    }

    pub fn rational(mode: Mode, r: Rational) -> Self {
        Self::poly(mode, Polynomial::rational(r))
    }

    pub fn xi(mode: Mode, n: i32) -> Self {
        Self::term(mode, Shape { xi: n, ..Shape::default() }, Polynomial::one())
    }

    /// `⟨ξ⟩_ℓ^n`.
    pub fn ell_bracket(mode: Mode, n: i32) -> Self {
        Self::term(mode, Shape { lb: n, ..Shape::default() }, Polynomial::one())
    }

    /// `⟨ξ⟩^{n + σ s}`.
    pub fn unit_bracket(mode: Mode, n: i32, s_flag: i8) -> Self {
        Self::term(mode, Shape { jb: n, jb_s: s_flag, ..Shape::default() }, Polynomial::one())
    }

    pub fn ell(mode: Mode, n: u32) -> Self {
        Self::term(mode, Shape { ell: n, ..Shape::default() }, Polynomial::one())
    }

    pub fn opaque(mode: Mode, name: &str, xi_derivs: u32) -> Self {
        let mut shape = Shape::default();
        shape.mul_opaque(OpaqueAtom::new(name, xi_derivs), 1);
        Self::term(mode, shape, Polynomial::one())
    }

    /// `e^{pΦ}` for the opaque `Φ` named `name`.
    pub fn gauge(mode: Mode, name: &str, p: i32) -> Self {
        let mut shape = Shape::default();
        shape.mul_gauge(Name::new(name), p);
        Self::term(mode, shape, Polynomial::one())
    }

    pub fn add_term(&mut self, shape: Shape, coeff: Polynomial) {
        if coeff.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(shape) {
            Entry::Vacant(v) => {
                v.insert(coeff);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += coeff;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn add_expr(&mut self, o: SymbolExpr) {
        for (s, c) in o.terms {
            self.add_term(s, c);
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Shape, &Polynomial)> {
        self.terms.iter()
    }

    pub fn into_terms(self) -> impl Iterator<Item = (Shape, Polynomial)> {
        self.terms.into_iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn scale(&self, p: &Polynomial) -> Self {
        let mut out = Self::zero(self.mode);
        for (s, c) in &self.terms {
            out.add_term(s.clone(), c * p);
        }
        out
    }

    pub fn scale_c(&self, c: GaussianRational) -> Self {
        let mut out = Self::zero(self.mode);
        for (s, k) in &self.terms {
            out.add_term(s.clone(), k.scale(c));
        }
        out
    }

    pub fn scale_r(&self, r: Rational) -> Self {
        self.scale_c(r.into())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one(self.mode);
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    /// Coefficient of the bare power `ξ^n`, for expressions made of plain powers.
    pub fn xi_coefficient(&self, n: i32) -> Polynomial {
        self.terms.get(&Shape { xi: n, ..Shape::default() }).cloned().unwrap_or_default()
    }

    /// Applies `f` to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&Polynomial) -> Polynomial) -> Self {
        let mut out = Self::zero(self.mode);
        for (s, c) in &self.terms {
            out.add_term(s.clone(), f(c));
        }
        out
    }

    fn check_mode(&self, o: &SymbolExpr) {
        assert_eq!(self.mode, o.mode, "mixing symbol calculus modes");
    }

    /// Human-readable, deterministic listing: one term per line.
    pub fn dump(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms.iter().map(|(s, c)| format!("{s} | {}", c.dump_inline())).collect::<Vec<_>>().join("\n")
    }
}

impl fmt::Display for SymbolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let parts: Vec<String> = self.terms.iter().map(|(s, c)| format!("({c})*{s}")).collect();
        f.write_str(&parts.join(" + "))
    }
}

impl Add for &SymbolExpr {
    type Output = SymbolExpr;
    fn add(self, o: &SymbolExpr) -> SymbolExpr {
        self.check_mode(o);
        let mut out = self.clone();
        for (s, c) in &o.terms {
            out.add_term(s.clone(), c.clone());
        }
        out
    }
}

impl Sub for &SymbolExpr {
    type Output = SymbolExpr;
    fn sub(self, o: &SymbolExpr) -> SymbolExpr {
        self.check_mode(o);
        let mut out = self.clone();
        for (s, c) in &o.terms {
            out.add_term(s.clone(), -c);
        }
        out
    }
}

impl Mul for &SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, o: &SymbolExpr) -> SymbolExpr {
        self.check_mode(o);
        let mut out = SymbolExpr::zero(self.mode);
        for (s1, c1) in &self.terms {
            for (s2, c2) in &o.terms {
                out.add_term(s1.mul(s2), c1 * c2);
            }
        }
        out
    }
}

impl Neg for &SymbolExpr {
    type Output = SymbolExpr;
    fn neg(self) -> SymbolExpr {
        self.scale_c(-GaussianRational::ONE)
    }
}

macro_rules! forward_owned {
    ($tr:ident, $m:ident) => {
        impl $tr for SymbolExpr {
            type Output = SymbolExpr;
            fn $m(self, o: SymbolExpr) -> SymbolExpr {
                (&self).$m(&o)
            }
        }
        impl $tr<&SymbolExpr> for SymbolExpr {
            type Output = SymbolExpr;
            fn $m(self, o: &SymbolExpr) -> SymbolExpr {
                (&self).$m(o)
            }
        }
        impl $tr<SymbolExpr> for &SymbolExpr {
            type Output = SymbolExpr;
            fn $m(self, o: SymbolExpr) -> SymbolExpr {
                self.$m(&o)
            }
        }
    };
}

forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

impl Neg for SymbolExpr {
    type Output = SymbolExpr;
    fn neg(self) -> SymbolExpr {
        -&self
    }
}

impl Mul<Polynomial> for SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, p: Polynomial) -> SymbolExpr {
        self.scale(&p)
    }
}

impl Mul<&Polynomial> for SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, p: &Polynomial) -> SymbolExpr {
        self.scale(p)
    }
}

impl Mul<Rational> for SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, r: Rational) -> SymbolExpr {
        self.scale_r(r)
    }
}

impl Mul<GaussianRational> for SymbolExpr {
    type Output = SymbolExpr;
    fn mul(self, c: GaussianRational) -> SymbolExpr {
        self.scale_c(c)
    }
}
