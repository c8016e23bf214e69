//! Differential operators with polynomial coefficients, formal adjoints and
//! conjugation by exponentials.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::algebra::{binomial, GaussianRational, Polynomial, Rational};
use crate::symbol::{Mode, SymbolExpr};

/// `L = [D_t] - σ D^k - Σ_{j<k} c_j(x) D^j` with `D = -i ∂_x`.
#[derive(Clone, Debug, PartialEq)]
pub struct DiffOperator {
    pub k: u32,
    pub has_dt: bool,
    pub principal_sign: i8,
    pub coeffs: BTreeMap<u32, Polynomial>,
}

impl DiffOperator {
    pub fn new(k: u32) -> Self {
        DiffOperator { k, has_dt: true, principal_sign: 1, coeffs: BTreeMap::new() }
    }

    pub fn with_coeff(mut self, j: u32, p: Polynomial) -> Self {
        assert!(j < self.k, "lower-order coefficient index {j} must be below k");
        if p.is_zero() {
            self.coeffs.remove(&j);
        } else {
            self.coeffs.insert(j, p);
        }
        self
    }

    pub fn coeff(&self, j: u32) -> Polynomial {
        if j == self.k {
            return Polynomial::int(self.principal_sign as i128);
        }
        self.coeffs.get(&j).cloned().unwrap_or_default()
    }

    /// Symbol of the spatial part `σ ξ^k + Σ c_j ξ^j`.
    pub fn spatial_symbol(&self, mode: Mode) -> SymbolExpr {
        let mut e = SymbolExpr::xi(mode, self.k as i32).scale_r(Rational::int(self.principal_sign as i128));
        for (j, c) in &self.coeffs {
            e = e + SymbolExpr::xi(mode, *j as i32).scale(c);
        }
        e
    }

    /// Formal L² adjoint: `B_j = Σ_{ℓ≥j} C(ℓ,j) D^{ℓ-j} conj(c_ℓ)`.
    pub fn adjoint(&self) -> DiffOperator {
        let mut out = DiffOperator { coeffs: BTreeMap::new(), ..self.clone() };
        for j in 0..self.k {
            let mut b = Polynomial::zero();
            for l in j..=self.k {
                let c = self.coeff(l);
                if c.is_zero() {
                    continue;
                }
                b += c.conj().d_op(l - j).scale_r(Rational::int(binomial(l, j)));
            }
            out = out.with_coeff(j, b);
        }
        out
    }

    /// Spatial part as a table with no `ξ` dependence.
    pub fn to_ray_operator(&self) -> RayOperator {
        let mut op = RayOperator::default();
        for j in 0..=self.k {
            op.add(0, j, self.coeff(j));
        }
        op
    }

    /// Inverse of [`to_ray_operator`](Self::to_ray_operator); `None` if the
    /// table depends on `ξ` or changes the principal part.
    pub fn from_ray_operator(op: &RayOperator, k: u32, has_dt: bool) -> Option<DiffOperator> {
        let mut out = DiffOperator { k, has_dt, principal_sign: 1, coeffs: BTreeMap::new() };
        for ((l, j), c) in op.cells() {
            if *l != 0 || *j > k {
                return None;
            }
            if *j == k {
                let v = c.constant_value()?;
                if !v.im.is_zero() || v.re.abs() != Rational::ONE {
                    return None;
                }
                out.principal_sign = v.re.numer() as i8;
            } else {
                out = out.with_coeff(*j, c.clone());
            }
        }
        Some(out)
    }
}

/// `Σ ξ^ℓ P_{ℓ,j}(x) D^j` with `ξ` a large real parameter.
#[derive(Clone, Debug, PartialEq, Eq, Default, Serialize)]
pub struct RayOperator {
    #[serde(skip)]
    cells: BTreeMap<(i32, u32), Polynomial>,
}

impl RayOperator {
    pub fn cells(&self) -> impl Iterator<Item = (&(i32, u32), &Polynomial)> {
        self.cells.iter()
    }

    pub fn get(&self, l: i32, j: u32) -> Polynomial {
        self.cells.get(&(l, j)).cloned().unwrap_or_default()
    }

    pub fn set(&mut self, l: i32, j: u32, p: Polynomial) {
        if p.is_zero() {
            self.cells.remove(&(l, j));
        } else {
            self.cells.insert((l, j), p);
        }
    }

    pub fn add(&mut self, l: i32, j: u32, p: Polynomial) {
        if p.is_zero() {
            return;
        }
        let e = self.cells.entry((l, j)).or_default();
        *e += p;
        if e.is_zero() {
            self.cells.remove(&(l, j));
        }
    }

    /// `e^{-ixξ} ∘ op ∘ e^{ixξ}`, i.e. `D ↦ D + ξ`.
    pub fn shift_by_xi(&self) -> RayOperator {
        let mut out = RayOperator::default();
        for ((l, j), c) in &self.cells {
            for p in 0..=*j {
                let w = Rational::int(binomial(*j, p));
                out.add(l + (*j - p) as i32, p, c.scale_r(w));
            }
        }
        out
    }

    /// `e^{-a/ξ^m} ∘ op ∘ e^{a/ξ^m}` given `a'` as a polynomial.
    pub fn exp_conjugate(&self, a_prime: &Polynomial, m: u32) -> RayOperator {
        let max_j = self.cells.keys().map(|(_, j)| *j).max().unwrap_or(0);
        let bell = ConjugationCoefficients::new(a_prime, max_j);
        let mut out = RayOperator::default();
        for ((l, j), c) in &self.cells {
            out.add(*l, *j, c.clone());
            for p in 0..*j {
                let n = j - p;
                let w = c.scale_r(Rational::int(binomial(*j, p)));
                for q in 1..=n {
                    let cq = bell.get(n, q);
                    if !cq.is_zero() {
                        out.add(l - (m * q) as i32, p, &w * cq);
                    }
                }
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }
}

/// Partial Bell polynomial `B_{n,q}(x_1, x_2, …)`.
pub fn partial_bell(n: u32, q: u32, xs: &[Polynomial]) -> Polynomial {
    let mut table: BTreeMap<(u32, u32), Polynomial> = BTreeMap::new();
    bell_rec(n, q, xs, &mut table)
}

fn bell_rec(n: u32, q: u32, xs: &[Polynomial], memo: &mut BTreeMap<(u32, u32), Polynomial>) -> Polynomial {
    if n == 0 && q == 0 {
        return Polynomial::one();
    }
    if n == 0 || q == 0 || q > n {
        return Polynomial::zero();
    }
    if let Some(p) = memo.get(&(n, q)) {
        return p.clone();
    }
    // B_{n,q} = Σ_i C(n-1, i-1) x_i B_{n-i, q-1}
    let mut acc = Polynomial::zero();
    for i in 1..=(n - q + 1) {
        let rest = bell_rec(n - i, q - 1, xs, memo);
        if rest.is_zero() {
            continue;
        }
        acc += (&xs[(i - 1) as usize] * &rest).scale_r(Rational::int(binomial(n - 1, i - 1)));
    }
    memo.insert((n, q), acc.clone());
    acc
}

/// `c_{n,q} = (-i)^n B_{n,q}(a', a'', …)`, the coefficient of `ξ^{-mq}` in
/// `e^{-a/ξ^m} D^n e^{a/ξ^m}`.
pub struct ConjugationCoefficients {
    table: BTreeMap<(u32, u32), Polynomial>,
}

impl ConjugationCoefficients {
    pub fn new(a_prime: &Polynomial, max_n: u32) -> Self {
        let xs: Vec<Polynomial> = (0..max_n.max(1)).map(|r| a_prime.differentiate_n(r)).collect();
        let mut memo = BTreeMap::new();
        let mut table = BTreeMap::new();
        for n in 1..=max_n {
            let unit = GaussianRational::i_pow(-(n as i64));
            for q in 1..=n {
                table.insert((n, q), bell_rec(n, q, &xs, &mut memo).scale(unit));
            }
        }
        ConjugationCoefficients { table }
    }

    pub fn get(&self, n: u32, q: u32) -> &Polynomial {
        static ZERO: std::sync::OnceLock<Polynomial> = std::sync::OnceLock::new();
        self.table.get(&(n, q)).unwrap_or_else(|| ZERO.get_or_init(Polynomial::zero))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn first_conjugation_coefficients() {
        let a = Polynomial::full("a", 1);
        let c = ConjugationCoefficients::new(&a, 3);
        assert_eq!(c.get(1, 1), &a.scale(-GaussianRational::I));
        // c_{2,1} = -a'', c_{2,2} = -a'^2
        assert_eq!(c.get(2, 1), &-Polynomial::full("a", 2));
        assert_eq!(c.get(2, 2), &-(Polynomial::full("a", 1).pow(2)));
        // c_{3,3} = i a'^3
        assert_eq!(c.get(3, 3), &Polynomial::full("a", 1).pow(3).scale(GaussianRational::I));
    }

    #[test]
    fn bell_row_sums_count_set_partitions() {
        let ones: Vec<Polynomial> = (0..6).map(|_| Polynomial::one()).collect();
        let bell_numbers = [1, 2, 5, 15, 52, 203];
        for n in 1..=6u32 {
            let total: Polynomial = (1..=n).fold(Polynomial::zero(), |acc, q| acc + partial_bell(n, q, &ones));
            assert_eq!(total, Polynomial::int(bell_numbers[n as usize - 1]));
        }
    }

    #[test]
    fn adjoint_of_first_order_term() {
        // (b D)^* = D ∘ conj(b) = conj(b) D + D(conj(b))
        let b = Polynomial::full("b", 0);
        let l = DiffOperator::new(3).with_coeff(1, b.clone());
        let adj = l.adjoint();
        assert_eq!(adj.coeff(1), b.conj());
        assert_eq!(adj.coeff(0), b.conj().d_op(1));
        assert_eq!(adj.coeff(3), Polynomial::one());
    }

    #[test]
    fn shift_by_xi_expands_binomially() {
        let op = DiffOperator::new(2).to_ray_operator().shift_by_xi();
        assert_eq!(op.get(2, 0), Polynomial::one());
        assert_eq!(op.get(1, 1), Polynomial::int(2));
        assert_eq!(op.get(0, 2), Polynomial::one());
    }
}
