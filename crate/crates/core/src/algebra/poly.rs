use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};

use num_complex::Complex64;
use smallvec::SmallVec;

use super::atom::{Atom, Family, Name};
use super::gaussian::GaussianRational;
use super::rational::Rational;

/// Product of atom powers, sorted by atom with no zero exponents.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Monomial(SmallVec<[(Atom, u32); 4]>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(SmallVec::new())
    }

    pub fn atom(a: Atom) -> Self {
        let mut v = SmallVec::new();
        v.push((a, 1));
        Monomial(v)
    }

    pub fn from_factors(factors: impl IntoIterator<Item = (Atom, u32)>) -> Self {
        let mut m = Monomial::one();
        for (a, e) in factors {
            m.mul_atom(a, e);
        }
        m
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| e).sum()
    }

    /// Total number of x-derivatives carried by the factors.
    pub fn weight(&self) -> u32 {
        self.0.iter().map(|(a, e)| a.deriv * e).sum()
    }

    pub fn exponent(&self, a: &Atom) -> u32 {
        self.0.iter().find(|(b, _)| b == a).map_or(0, |(_, e)| *e)
    }

    pub fn mul_atom(&mut self, a: Atom, e: u32) {
        if e == 0 {
            return;
        }
        match self.0.binary_search_by(|(b, _)| b.cmp(&a)) {
            Ok(i) => self.0[i].1 += e,
            Err(i) => self.0.insert(i, (a, e)),
        }
    }

    /// Removes one power of `a`; returns the exponent it had.
    pub fn div_atom(&self, a: &Atom) -> Option<(u32, Monomial)> {
        let i = self.0.iter().position(|(b, _)| b == a)?;
        let mut out = self.clone();
        let e = out.0[i].1;
        if e == 1 {
            out.0.remove(i);
        } else {
            out.0[i].1 -= 1;
        }
        Some((e, out))
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        let mut out = self.clone();
        for (a, e) in other.0.iter() {
            out.mul_atom(*a, *e);
        }
        out
    }

    pub fn dump(&self) -> String {
        if self.0.is_empty() {
            return "1".to_string();
        }
        self.0
            .iter()
            .map(|(a, e)| if *e == 1 { a.dump() } else { format!("{}^{}", a.dump(), e) })
            .collect::<Vec<_>>()
            .join("*")
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> =
            self.0.iter().map(|(a, e)| if *e == 1 { a.to_string() } else { format!("{a}^{e}") }).collect();
        f.write_str(&parts.join("*"))
    }
}

impl fmt::Debug for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.dump())
    }
}

/// Differential polynomial over Gaussian rationals in the coefficient atoms.
#[derive(Clone, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub struct Polynomial {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl Polynomial {
    pub fn zero() -> Self {
        Polynomial { terms: BTreeMap::new() }
    }

    pub fn one() -> Self {
        Self::constant(GaussianRational::ONE)
    }

    pub fn constant(c: GaussianRational) -> Self {
        let mut p = Self::zero();
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn rational(r: Rational) -> Self {
        Self::constant(r.into())
    }

    pub fn int(n: i128) -> Self {
        Self::constant(GaussianRational::int(n))
    }

    pub fn i() -> Self {
        Self::constant(GaussianRational::I)
    }

    pub fn atom(a: Atom) -> Self {
        Self::term(Monomial::atom(a), GaussianRational::ONE)
    }

    pub fn term(m: Monomial, c: GaussianRational) -> Self {
        let mut p = Self::zero();
        p.add_term(m, c);
        p
    }

    pub fn re(name: &str, deriv: u32) -> Self {
        Self::atom(Atom::re(name, deriv))
    }

    pub fn im(name: &str, deriv: u32) -> Self {
        Self::atom(Atom::im(name, deriv))
    }

    pub fn full(name: &str, deriv: u32) -> Self {
        Self::atom(Atom::full(name, deriv))
    }

    pub fn formal(name: &str) -> Self {
        Self::atom(Atom::formal(name))
    }

    /// `Re(name^(deriv)) + i Im(name^(deriv))` in canonical atoms.
    pub fn complex(name: &str, deriv: u32) -> Self {
        Self::re(name, deriv) + Self::im(name, deriv) * Self::i()
    }

    pub fn add_term(&mut self, m: Monomial, c: GaussianRational) {
        if c.is_zero() {
            return;
        }
        use std::collections::btree_map::Entry;
        match self.terms.entry(m) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &GaussianRational)> {
        self.terms.iter()
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

    pub fn coeff(&self, m: &Monomial) -> GaussianRational {
        self.terms.get(m).copied().unwrap_or_default()
    }

    /// The value if the polynomial has no atoms.
    pub fn constant_value(&self) -> Option<GaussianRational> {
        match self.terms.len() {
            0 => Some(GaussianRational::ZERO),
            1 => self.terms.get(&Monomial::one()).copied(),
            _ => None,
        }
    }

    pub fn is_constant(&self) -> bool {
        self.constant_value().is_some()
    }

    pub fn scale(&self, c: GaussianRational) -> Self {
        if c.is_zero() {
            return Self::zero();
        }
        Polynomial { terms: self.terms.iter().map(|(m, k)| (m.clone(), *k * c)).collect() }
    }

    pub fn scale_r(&self, r: Rational) -> Self {
        self.scale(r.into())
    }

    pub fn pow(&self, e: u32) -> Self {
        let mut acc = Self::one();
        for _ in 0..e {
            acc = &acc * self;
        }
        acc
    }

    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms.keys().flat_map(|m| m.factors().iter().map(|(a, _)| *a)).collect()
    }

    pub fn max_degree(&self) -> u32 {
        self.terms.keys().map(Monomial::degree).max().unwrap_or(0)
    }

    /// Total x-derivative `∂_x`; formal parameters are constants.
    pub fn differentiate(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            for (a, e) in m.factors() {
                if a.family == Family::Formal {
                    continue;
                }
                let (_, rest) = m.div_atom(a).expect("factor present");
                let mut nm = rest;
                nm.mul_atom(a.with_deriv(a.deriv + 1), 1);
                out.add_term(nm, c.scale(Rational::int(*e as i128)));
            }
        }
        out
    }

    pub fn differentiate_n(&self, n: u32) -> Self {
        let mut p = self.clone();
        for _ in 0..n {
            p = p.differentiate();
        }
        p
    }

    /// `D^n = (-i ∂_x)^n`.
    pub fn d_op(&self, n: u32) -> Self {
        self.differentiate_n(n).scale(GaussianRational::i_pow(-(n as i64)))
    }

    /// Partial derivative with respect to one atom.
    pub fn partial(&self, a: &Atom) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            if let Some((e, rest)) = m.div_atom(a) {
                out.add_term(rest, c.scale(Rational::int(e as i128)));
            }
        }
        out
    }

    /// Replaces atoms for which `f` returns a value; others are kept.
    pub fn substitute(&self, f: &impl Fn(&Atom) -> Option<Polynomial>) -> Self {
        let mut cache: BTreeMap<Atom, Option<Polynomial>> = BTreeMap::new();
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let mut acc = Self::constant(*c);
            for (a, e) in m.factors() {
                let rep = cache.entry(*a).or_insert_with(|| f(a)).clone();
                let factor = match rep {
                    Some(p) => p.pow(*e),
                    None => Self::term(Monomial::from_factors([(*a, *e)]), GaussianRational::ONE),
                };
                acc = &acc * &factor;
            }
            out += acc;
        }
        out
    }

    /// Complex conjugation: conjugates coefficients and swaps `Full`/`Conj`.
    pub fn conj(&self) -> Self {
        let mut out = Self::zero();
        for (m, c) in &self.terms {
            let nm = Monomial::from_factors(m.factors().iter().map(|(a, e)| {
                let fam = match a.family {
                    Family::Full => Family::Conj,
                    Family::Conj => Family::Full,
                    f => f,
                };
                (Atom { family: fam, ..*a }, *e)
            }));
            out.add_term(nm, c.conj());
        }
        out
    }

    /// Rewrites `Full` and `Conj` atoms as `Re ± i Im`.
    pub fn canonicalize_complex(&self) -> Self {
        self.substitute(&|a: &Atom| match a.family {
            Family::Full => Some(Self::re(a.name.as_str(), a.deriv) + Self::im(a.name.as_str(), a.deriv) * Self::i()),
            Family::Conj => Some(Self::re(a.name.as_str(), a.deriv) - Self::im(a.name.as_str(), a.deriv) * Self::i()),
            _ => None,
        })
    }

    pub fn is_canonical(&self) -> bool {
        self.atoms().iter().all(|a| a.family.is_real())
    }

    /// Real part, taken after canonicalization so that all atoms are real.
    pub fn re_part(&self) -> Self {
        let p = self.canonicalize_complex();
        let mut out = Self::zero();
        for (m, c) in &p.terms {
            out.add_term(m.clone(), GaussianRational::real(c.re));
        }
        out
    }

    pub fn im_part(&self) -> Self {
        let p = self.canonicalize_complex();
        let mut out = Self::zero();
        for (m, c) in &p.terms {
            out.add_term(m.clone(), GaussianRational::real(c.im));
        }
        out
    }

    pub fn is_real(&self) -> bool {
        self.is_canonical() && self.terms.values().all(|c| c.im.is_zero())
    }

    /// Smallest and largest coefficient index among the atoms, if any.
    pub fn support_band(&self, index_of: &impl Fn(&Name) -> Option<i64>) -> Option<(i64, i64)> {
        let idx: Vec<i64> = self.atoms().iter().filter_map(|a| index_of(&a.name)).collect();
        Some((*idx.iter().min()?, *idx.iter().max()?))
    }

    pub fn eval(&self, f: &impl Fn(&Atom) -> Complex64) -> Complex64 {
        let mut cache: BTreeMap<Atom, Complex64> = BTreeMap::new();
        let mut acc = Complex64::new(0.0, 0.0);
        for (m, c) in &self.terms {
            let mut t = c.to_c64();
            for (a, e) in m.factors() {
                let v = *cache.entry(*a).or_insert_with(|| f(a));
                t *= v.powu(*e);
            }
            acc += t;
        }
        acc
    }

    pub fn eval_exact(&self, f: &impl Fn(&Atom) -> GaussianRational) -> GaussianRational {
        let mut acc = GaussianRational::ZERO;
        for (m, c) in &self.terms {
            let mut t = *c;
            for (a, e) in m.factors() {
                t *= f(a).pow(*e);
            }
            acc += t;
        }
        acc
    }

    /// Line-oriented dump: one `coeff monomial` pair per line, sorted.
    pub fn dump(&self) -> String {
        if self.terms.is_empty() {
            return "0".to_string();
        }
        self.terms.iter().map(|(m, c)| format!("{} {}", c, m.dump())).collect::<Vec<_>>().join("\n")
    }

    /// Single-line variant of [`dump`](Self::dump) separated by `;`.
    pub fn dump_inline(&self) -> String {
        self.dump().replace('\n', "; ")
    }

    pub fn parse_dump(s: &str) -> Option<Self> {
        let s = s.trim();
        if s == "0" {
            return Some(Self::zero());
        }
        let mut out = Self::zero();
        for line in s.split(['\n', ';']).map(str::trim).filter(|l| !l.is_empty()) {
            let (c, m) = line.split_once(' ')?;
            let c: GaussianRational = c.parse().ok()?;
            let mono = if m.trim() == "1" {
                Monomial::one()
            } else {
                let mut mono = Monomial::one();
                for f in m.trim().split('*') {
                    let (a, e) = match f.split_once('^') {
                        Some((a, e)) => (a, e.parse().ok()?),
                        None => (f, 1),
                    };
                    mono.mul_atom(Atom::parse_dump(a)?, e);
                }
                mono
            };
            out.add_term(mono, c);
        }
        Some(out)
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        let mut first = true;
        for (m, c) in &self.terms {
            let (neg, mag) = if c.im.is_zero() {
                (c.re < Rational::ZERO, format_coeff(GaussianRational::real(c.re.abs())))
            } else if c.re.is_zero() {
                (c.im < Rational::ZERO, format_coeff(GaussianRational::imag(c.im.abs())))
            } else {
                (false, format!("({c})"))
            };
            if first {
                if neg {
                    f.write_str("-")?;
                }
            } else {
                f.write_str(if neg { " - " } else { " + " })?;
            }
            first = false;
            match (mag.as_str(), m.is_one()) {
                ("1", true) => f.write_str("1")?,
                ("1", false) => write!(f, "{m}")?,
                (_, true) => f.write_str(&mag)?,
                (_, false) => write!(f, "{mag}*{m}")?,
            }
        }
        Ok(())
    }
}

fn format_coeff(c: GaussianRational) -> String {
    if c.im.is_zero() {
        c.re.to_string()
    } else if c.im.is_one() {
        "i".to_string()
    } else {
        format!("{}i", c.im)
    }
}

impl fmt::Debug for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Polynomial({self})")
    }
}

impl From<GaussianRational> for Polynomial {
    fn from(c: GaussianRational) -> Self {
        Self::constant(c)
    }
}

impl From<Rational> for Polynomial {
    fn from(r: Rational) -> Self {
        Self::rational(r)
    }
}

impl From<Atom> for Polynomial {
    fn from(a: Atom) -> Self {
        Self::atom(a)
    }
}

impl AddAssign<&Polynomial> for Polynomial {
    fn add_assign(&mut self, o: &Polynomial) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), *c);
        }
    }
}

impl AddAssign for Polynomial {
    fn add_assign(&mut self, o: Polynomial) {
        if self.terms.len() < o.terms.len() {
            let mine = std::mem::replace(self, o);
            *self += &mine;
        } else {
            for (m, c) in o.terms {
                self.add_term(m, c);
            }
        }
    }
}

impl SubAssign<&Polynomial> for Polynomial {
    fn sub_assign(&mut self, o: &Polynomial) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), -*c);
        }
    }
}

impl SubAssign for Polynomial {
    fn sub_assign(&mut self, o: Polynomial) {
        *self -= &o;
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        self.scale(-GaussianRational::ONE)
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &o.terms {
                out.add_term(m1.mul(m2), *c1 * *c2);
            }
        }
        out
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $body:expr) => {
        impl $tr for Polynomial {
            type Output = Polynomial;
            fn $m(self, o: Polynomial) -> Polynomial {
                $body(self, &o)
            }
        }
        impl $tr<&Polynomial> for Polynomial {
            type Output = Polynomial;
            fn $m(self, o: &Polynomial) -> Polynomial {
                $body(self, o)
            }
        }
        impl $tr<&Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $m(self, o: &Polynomial) -> Polynomial {
                $body(self.clone(), o)
            }
        }
        impl $tr<Polynomial> for &Polynomial {
            type Output = Polynomial;
            fn $m(self, o: Polynomial) -> Polynomial {
                $body(self.clone(), &o)
            }
        }
    };
}

forward_binop!(Add, add, |mut a: Polynomial, b: &Polynomial| {
    a += b;
    a
});
forward_binop!(Sub, sub, |mut a: Polynomial, b: &Polynomial| {
    a -= b;
    a
});

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, o: Polynomial) -> Polynomial {
        &self * &o
    }
}

impl Mul<&Polynomial> for Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        &self * o
    }
}

impl Mul<Polynomial> for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: Polynomial) -> Polynomial {
        self * &o
    }
}

impl Mul<Rational> for Polynomial {
    type Output = Polynomial;
    fn mul(self, r: Rational) -> Polynomial {
        self.scale_r(r)
    }
}

impl Mul<GaussianRational> for Polynomial {
    type Output = Polynomial;
    fn mul(self, c: GaussianRational) -> Polynomial {
        self.scale(c)
    }
}
