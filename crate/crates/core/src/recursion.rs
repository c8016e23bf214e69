//! Iterated conjugation that strips the low-frequency obstructions off the
//! adjoint operator `L*` along `ξ → +∞`.
//!
//! Level `m` holds `e^{-ψ} e^{-ixξ} L* e^{ixξ} e^{ψ} = D_t - ξ^k - kξ^{k-1}D
//! - Σ ξ^ℓ P_{ℓ,j} D^j` where the cells are polynomials in the atoms
//! `x_α^(β) = ∂^β conj(b_α)`, stored as conjugate atoms named `b<α>`.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{normal_form, Atom, Family, GaussianRational, Name, Polynomial, Rational};
use crate::operator::{DiffOperator, RayOperator};

pub const MIN_ORDER: u32 = 2;
pub const MAX_ORDER: u32 = 8;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RecursionError {
    #[error("order k = {0} outside the supported range {MIN_ORDER}..={MAX_ORDER}")]
    InvalidOrder(u32),
    #[error("level {level} exceeds the last level k-2 = {max}")]
    InvalidLevel { level: u32, max: u32 },
    #[error("structural property {property} fails at level {level}, cell ({l}, {j}): {poly}")]
    StructuralViolation { level: u32, l: i32, j: u32, property: &'static str, poly: String },
}

pub type Result<T> = std::result::Result<T, RecursionError>;

pub fn coefficient_name(alpha: u32) -> String {
    format!("b{alpha}")
}

/// `x_α^(β) = ∂^β conj(b_α)`.
pub fn x_atom(alpha: u32, beta: u32) -> Atom {
    Atom::conj_of(&coefficient_name(alpha), beta)
}

/// Letter used for `b_α` in operators of order `k`: `a = b_{k-1}`, `b = b_{k-2}`, ...
pub fn letter_for(k: u32, alpha: u32) -> char {
    (b'a' + (k - 1 - alpha) as u8) as char
}

/// Renames `b<α>` atoms to their letters for order `k`.
pub fn rename_to_letters(p: &Polynomial, k: u32) -> Polynomial {
    p.substitute(&|a: &Atom| {
        let alpha = a.name.index()?;
        if alpha >= k {
            return None;
        }
        let name = letter_for(k, alpha).to_string();
        Some(Polynomial::atom(Atom::new(a.family, &name, a.deriv)))
    })
}

fn index_of(n: &Name) -> Option<i64> {
    n.index().map(i64::from)
}

/// `p ∈ 𝒫_{lo,hi}`: every atom has index in `[max(lo,0), min(hi,k-2)]`;
/// an empty range admits constants only.
pub fn in_band(p: &Polynomial, lo: i64, hi: i64, k: u32) -> bool {
    let lo = lo.max(0);
    let hi = hi.min(k as i64 - 2);
    match p.support_band(&index_of) {
        None => true,
        Some(_) if lo > hi => false,
        Some((a, b)) => a >= lo && b <= hi,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RecursionState {
    pub k: u32,
    pub m: u32,
    op: RayOperator,
}

impl RecursionState {
    /// Level 0: `P_{ℓ,j} = C(j+ℓ,ℓ) B_{j+ℓ}` with `B_j` the adjoint coefficients.
    pub fn base_case(k: u32) -> Result<Self> {
        if !(MIN_ORDER..=MAX_ORDER).contains(&k) {
            return Err(RecursionError::InvalidOrder(k));
        }
        let mut l = DiffOperator::new(k);
        for alpha in 0..=k - 2 {
            l = l.with_coeff(alpha, Polynomial::full(&coefficient_name(alpha), 0));
        }
        let op = l.adjoint().to_ray_operator().shift_by_xi();
        let state = RecursionState { k, m: 0, op };
        state.check()?;
        Ok(state)
    }

    /// Cell `P_{k-2-m; ℓ, j}`.
    pub fn cell(&self, l: i32, j: u32) -> Polynomial {
        self.op.get(l, j)
    }

    /// Cells with `ℓ <= k-2`, i.e. everything below the principal part.
    pub fn cells(&self) -> impl Iterator<Item = (i32, u32, &Polynomial)> {
        let top = self.k as i32 - 2;
        self.op.cells().filter(move |((l, _), _)| *l <= top).map(|((l, j), p)| (*l, *j, p))
    }

    /// Overwrites a cell; used to exercise the structural checks.
    pub fn inject(&mut self, l: i32, j: u32, p: Polynomial) {
        self.op.set(l, j, p);
    }

    /// Conjugates by `e^{-(i/(kξ^m)) ∫ P_{k-1-m,0}}` for the next level `m`.
    pub fn step(&self) -> Result<Self> {
        let next = self.m + 1;
        if next > self.k - 2 {
            return Err(RecursionError::InvalidLevel { level: next, max: self.k - 2 });
        }
        let pivot = self.op.get(self.k as i32 - 1 - next as i32, 0);
        let a_prime = pivot.scale(GaussianRational::imag(Rational::new(-1, self.k as i128)));
        let op = self.op.exp_conjugate(&a_prime, next);
        let state = RecursionState { k: self.k, m: next, op };
        state.check()?;
        Ok(state)
    }

    fn violation(&self, l: i32, j: u32, property: &'static str, p: &Polynomial) -> RecursionError {
        RecursionError::StructuralViolation { level: self.m, l, j, property, poly: p.to_string() }
    }

    /// Cell range plus the vanishing, diagonal and band properties.
    pub fn check(&self) -> Result<()> {
        match self.audit().into_iter().next() {
            Some(e) => Err(e),
            None => Ok(()),
        }
    }

    /// Every structural violation at this level.
    pub fn audit(&self) -> Vec<RecursionError> {
        let (k, m) = (self.k as i32, self.m as i32);
        let mut out = Vec::new();
        let lowest = -(m + 1) * m * k / 2;
        if self.op.get(k, 0) != Polynomial::one() {
            out.push(self.violation(k, 0, "principal", &self.op.get(k, 0)));
        }
        if self.op.get(k - 1, 1) != Polynomial::int(k as i128) {
            out.push(self.violation(k - 1, 1, "principal", &self.op.get(k - 1, 1)));
        }
        for ((l, j), p) in self.op.cells() {
            let principal = matches!((*l - k, *j), (0, 0) | (-1, 1));
            if !principal && (*l > k - 2 || *l < lowest || *j > self.k) {
                out.push(self.violation(*l, *j, "range", p));
            }
        }
        for l in (k - m - 1)..=(k - 2) {
            let p = self.op.get(l, 0);
            if !p.is_zero() {
                out.push(self.violation(l, 0, "vanishing", &p));
            }
        }
        for mp in m..=(k - 2) {
            let l = k - 2 - mp;
            let p = self.op.get(l, 0) - Polynomial::atom(x_atom(l as u32, 0));
            if !in_band(&p, (k - 1 - mp) as i64, (k - 2) as i64, self.k) {
                out.push(self.violation(l, 0, "diagonal", &p));
            }
        }
        for l in 0..=(k - 2) {
            for j in 1..=self.k {
                let p = self.op.get(l, j);
                let lo = (j as i32 + l).min(k - 1 - m);
                if !in_band(&p, lo as i64, (k - 2) as i64, self.k) {
                    out.push(self.violation(l, j, "band", &p));
                }
            }
        }
        out
    }

    pub fn to_table(&self) -> RecursionTable {
        RecursionTable {
            k: self.k,
            m: self.m,
            cells: self.cells().map(|(l, j, p)| TableCell { l, j, poly: p.dump_inline() }).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct TableCell {
    pub l: i32,
    pub j: u32,
    pub poly: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, serde::Deserialize)]
pub struct RecursionTable {
    pub k: u32,
    pub m: u32,
    pub cells: Vec<TableCell>,
}

/// Every level `0..=max_level`.
pub fn run_levels(k: u32, max_level: u32) -> Result<Vec<RecursionState>> {
    let mut s = RecursionState::base_case(k)?;
    if max_level > k - 2 {
        return Err(RecursionError::InvalidLevel { level: max_level, max: k - 2 });
    }
    let mut out = vec![s.clone()];
    for _ in 0..max_level {
        s = s.step()?;
        out.push(s.clone());
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CellCheck {
    pub level: u32,
    pub property: &'static str,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct StructureReport {
    pub k: u32,
    pub levels: u32,
    pub checks: Vec<CellCheck>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

const PROPERTIES: [&str; 5] = ["principal", "range", "vanishing", "diagonal", "band"];

/// Runs all levels; each level is checked as it is produced.
pub fn verify_structure(k: u32) -> Result<StructureReport> {
    let levels = run_levels(k, k - 2)?;
    let checks = levels
        .iter()
        .flat_map(|s| {
            let failures = s.audit();
            PROPERTIES.into_iter().map(move |property| CellCheck {
                level: s.m,
                property,
                passed: !failures
                    .iter()
                    .any(|e| matches!(e, RecursionError::StructuralViolation { property: p, .. } if *p == property)),
            })
        })
        .collect();
    Ok(StructureReport { k, levels: levels.len() as u32, checks })
}

/// One necessary condition `sup |∫_x^y integrand| ≲ |x-y|^exponent`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Condition {
    pub q: u32,
    pub level: u32,
    pub exponent: Rational,
    /// Complex representative, modulo total derivatives.
    #[serde(serialize_with = "ser_poly")]
    pub complex_form: Polynomial,
    /// Real integrand in canonical atoms, modulo total derivatives.
    #[serde(serialize_with = "ser_poly")]
    pub integrand: Polynomial,
}

fn ser_poly<S: serde::Serializer>(p: &Polynomial, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&p.dump_inline())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConditionSet {
    pub k: u32,
    pub gauged: bool,
    pub entries: Vec<Condition>,
}

/// Integrands `Im P_{k-q; k-q, 0}` at level `q-2` for `q = 2..k-1`.
///
/// Cells are polynomials in `conj(b)`; the conjugated cell `conj(P)` is
/// stored so that the complex form reads in `b` itself. The integrand then
/// differs from `Im P` by a sign, which the bound does not see.
pub fn necessary_conditions(k: u32) -> Result<ConditionSet> {
    let raw = raw_condition_cells(k)?;
    let entries = raw
        .into_iter()
        .map(|(q, cell)| {
            let complex = rename_to_letters(&cell, k);
            condition_from_complex(q, k, &complex)
        })
        .collect();
    Ok(ConditionSet { k, gauged: false, entries })
}

/// `(q, conj(P_{k-q;k-q,0}))` with atoms `b<α>` in the `Full` family.
pub fn raw_condition_cells(k: u32) -> Result<Vec<(u32, Polynomial)>> {
    if !(MIN_ORDER..=MAX_ORDER).contains(&k) {
        return Err(RecursionError::InvalidOrder(k));
    }
    if k < 3 {
        return Ok(Vec::new());
    }
    let levels = run_levels(k, k - 3)?;
    Ok((2..k)
        .map(|q| {
            let cell = levels[(q - 2) as usize].cell((k - q) as i32, 0);
            (q, cell.conj())
        })
        .collect())
}

pub fn condition_from_complex(q: u32, k: u32, complex: &Polynomial) -> Condition {
    Condition {
        q,
        level: q - 2,
        exponent: Rational::new(q as i128 - 1, k as i128 - 1),
        complex_form: normal_form(complex),
        integrand: normal_form(&complex.im_part()),
    }
}

/// Substitution map `b<α>^(β) ↦ ∂^β replacement[α]` for `Full` atoms.
pub fn substitute_coefficients(p: &Polynomial, replacement: &BTreeMap<u32, Polynomial>) -> Polynomial {
    p.substitute(&|a: &Atom| {
        if a.family != Family::Full {
            return None;
        }
        let alpha = a.name.index()?;
        Some(replacement.get(&alpha).cloned().unwrap_or_default().differentiate_n(a.deriv))
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn order_two_base_case_cells() {
        let s = RecursionState::base_case(2).unwrap();
        let cells: Vec<_> = s.cells().collect();
        assert_eq!(cells.len(), 2);
        assert_eq!(s.cell(0, 0), Polynomial::atom(x_atom(0, 0)));
        assert_eq!(s.cell(0, 2), Polynomial::one());
    }

    #[test]
    fn letters_follow_the_top_coefficient() {
        assert_eq!(letter_for(5, 4), 'a');
        assert_eq!(letter_for(5, 3), 'b');
        assert_eq!(letter_for(6, 1), 'e');
    }

    #[test]
    fn rejects_orders_outside_range() {
        assert_eq!(RecursionState::base_case(1), Err(RecursionError::InvalidOrder(1)));
        assert_eq!(RecursionState::base_case(9), Err(RecursionError::InvalidOrder(9)));
    }
}
