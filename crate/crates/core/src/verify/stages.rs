//! Stage operators and gauge symbols for the reduction steps at k = 4, 5, 6.
//!
//! Each stage removes one imaginary part: `L_{(i-1)} ∘ Φ_i ≡ Φ_i ∘ L_{(i)}`
//! with `Φ_i = e^{Φ_0} · bracket`, where `Φ_0` is opaque and only its order
//! and its x-derivative rule are known.

use crate::algebra::{q, GaussianRational, Polynomial, Rational};
use crate::symbol::{Mode, Registry, SymbolExpr, XRule};

use super::{Stage, VerifyError};

/// Name of the opaque phase in every stage registry.
pub const PHI0: &str = "Phi0";

/// The first toy phase, used only by the literal reading of the second toy stage.
pub const PHI01: &str = "Phi01";

/// How the remainder `∂_x Φ_0 - h` is represented.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub enum Remainder {
    /// `R_Phi0` with the declared order and free x-derivatives.
    #[default]
    Standard,
    /// A differently named free atom of the same order.
    Fresh(String),
    /// No remainder at all: `∂_x Φ_0 = h` exactly.
    Omitted,
}

#[derive(Clone, Debug, Default)]
pub struct StageOptions {
    /// Adds a zeroth-order coefficient to both sides of the first stage.
    pub zeroth_order: bool,
    pub remainder: Remainder,
    /// k = 4 only: write `∂_ξ Φ_{0,1}` inside `Φ_2`, as printed, instead of `Φ_{0,2}`.
    pub literal_toy_phi: bool,
    /// k = 6, stage 2: use `(1/6)(⟨ξ⟩_ℓ^{-2} + ℓ²⟨ξ⟩_ℓ^{-4})` for the phase
    /// weight. The printed `ℓ²/2` leaves `(i/2) ℓ² ξ Im c1` in the residual,
    /// since `⟨ξ⟩_ℓ^{-2} = ξ^{-2} - ℓ² ξ^{-4} + …`.
    pub repaired_weight: bool,
}

/// The `(k, i)` pairs that have a stage.
pub const CATALOG: [(u32, u32); 9] = [(4, 1), (4, 2), (5, 1), (5, 2), (5, 3), (6, 1), (6, 2), (6, 3), (6, 4)];

pub fn stages_for(k: u32) -> Vec<u32> {
    CATALOG.iter().filter(|(kk, _)| *kk == k).map(|(_, i)| *i).collect()
}

fn re(n: &str, d: u32) -> Polynomial {
    Polynomial::re(n, d)
}

fn im(n: &str, d: u32) -> Polynomial {
    Polynomial::im(n, d)
}

fn cx(n: &str, d: u32) -> Polynomial {
    Polynomial::complex(n, d)
}

fn iq(n: i128, d: i128) -> Polynomial {
    Polynomial::constant(GaussianRational::imag(q(n, d)))
}

/// Small builder for the symbols of one stage.
struct Kit {
    mode: Mode,
    phi0: &'static str,
}

impl Kit {
    fn xi(&self, n: i32) -> SymbolExpr {
        SymbolExpr::xi(self.mode, n)
    }

    fn lb(&self, n: i32) -> SymbolExpr {
        SymbolExpr::ell_bracket(self.mode, n)
    }

    /// `(1/k)(⟨ξ⟩_ℓ^{-n} + (ℓ²/2)⟨ξ⟩_ℓ^{-n-2})`.
    fn paired(&self, k: i128, n: i32) -> SymbolExpr {
        (self.lb(-n) + SymbolExpr::ell(self.mode, 2) * self.lb(-n - 2) * Rational::new(1, 2)) * Rational::new(1, k)
    }

    fn dphi(&self, n: u32) -> SymbolExpr {
        SymbolExpr::opaque(self.mode, self.phi0, n)
    }

    /// `∂_ξ²Φ + (∂_ξΦ)²`.
    fn sq(&self) -> SymbolExpr {
        self.dphi(2) + self.dphi(1).pow(2)
    }

    /// `∂_ξ³Φ + 3∂_ξ²Φ∂_ξΦ + (∂_ξΦ)³`.
    fn cube(&self) -> SymbolExpr {
        self.dphi(3) + self.dphi(2) * self.dphi(1) * Rational::int(3) + self.dphi(1).pow(3)
    }

    /// `ξ^k + Σ c_j ξ^j` from `(j, c_j)` pairs.
    fn operator(&self, k: i32, coeffs: &[(i32, Polynomial)]) -> SymbolExpr {
        let mut e = self.xi(k);
        for (j, c) in coeffs {
            e = e + self.xi(*j) * c;
        }
        e
    }
}

fn registry(kit: &Kit, rule: SymbolExpr, remainder_order: i32, choice: &Remainder) -> Result<Registry, VerifyError> {
    let mut reg = Registry::new();
    match choice {
        Remainder::Standard => {
            reg.declare_with_remainder(kit.phi0, 0, rule, remainder_order)?;
        }
        Remainder::Fresh(name) => {
            reg.declare(name, remainder_order, XRule::Free)?;
            let r = crate::algebra::Name::new(name);
            reg.declare(kit.phi0, 0, XRule::Rewrite { replacement: rule, remainder: Some(r) })?;
        }
        Remainder::Omitted => {
            reg.declare(kit.phi0, 0, XRule::Rewrite { replacement: rule, remainder: None })?;
        }
    }
    Ok(reg)
}

/// `∂_x Φ_0 = rule + R`.
fn phase_rule(kit: &Kit, k: u32, index: u32, opts: &StageOptions) -> Option<SymbolExpr> {
    Some(match (k, index) {
        (6, 2) if opts.repaired_weight => {
            (kit.lb(-2) + SymbolExpr::ell(kit.mode, 2) * kit.lb(-4)) * im("c1", 0) * q(1, 6)
        }
        (4, 1) => kit.xi(-1) * im("b", 0) * q(1, 4),
        (4, 2) => kit.xi(-2) * im("c1", 0) * q(1, 4),
        (5, 1) => kit.paired(5, 1) * im("b", 0),
        (5, 2) => kit.lb(-2) * im("c1", 0) * q(1, 5),
        (5, 3) => kit.lb(-3) * im("d2", 0) * q(1, 5),
        (6, 1) => kit.paired(6, 1) * im("b", 0),
        (6, 2) => kit.paired(6, 2) * im("c1", 0),
        (6, 3) => kit.lb(-3) * im("d2", 0) * q(1, 6),
        (6, 4) => kit.lb(-4) * im("e3", 0) * q(1, 6),
        _ => return None,
    })
}

/// `(bracket, source, target)` for one stage.
fn stage_parts(
    kit: &Kit,
    k: u32,
    index: u32,
    reg: &Registry,
    opts: &StageOptions,
) -> Result<(SymbolExpr, SymbolExpr, SymbolExpr), VerifyError> {
    let one = SymbolExpr::one(kit.mode);
    let zeroth = |name: &str| if opts.zeroth_order { vec![(0, cx(name, 0))] } else { vec![] };
    let (bracket, mut src, mut tgt) = match (k, index) {
        (4, 1) => {
            let bracket = one + kit.xi(-1) * kit.dphi(1) * re("b", 0) * q(1, 4);
            let mut src = vec![(2, cx("b", 0)), (1, cx("c", 0))];
            src.extend(zeroth("d"));
            let mut tgt = vec![(2, re("b", 0)), (1, cx("c", 0) - im("b", 1) * q(3, 2))];
            tgt.extend(zeroth("d"));
            (bracket, src, tgt)
        }
        (4, 2) => {
            let dphi = if opts.literal_toy_phi { SymbolExpr::opaque(kit.mode, PHI01, 1) } else { kit.dphi(1) };
            let bracket = one + kit.xi(-1) * dphi * re("b", 0) * q(1, 4);
            let a1 = vec![(2, re("b", 0)), (1, -(iq(1, 1) * re("b", 1)))];
            let (mut src, mut tgt) = (a1.clone(), a1);
            src.push((1, cx("c1", 0)));
            tgt.push((1, re("c1", 0)));
            (bracket, src, tgt)
        }
        (5, 1) => {
            let bracket = one
                + kit.lb(-1) * kit.dphi(1) * re("b", 0) * q(1, 5)
                + kit.lb(-2) * kit.dphi(1) * (cx("c", 0) + iq(2, 1) * cx("b", 1)) * q(1, 5)
                - kit.lb(-1) * kit.sq() * (iq(1, 1) * re("b", 1)) * q(1, 10);
            let mut src = vec![(3, cx("b", 0)), (2, cx("c", 0)), (1, cx("d", 0))];
            src.extend(zeroth("e"));
            let mut tgt = k5_stage1_target_coeffs(q(-3, 5));
            tgt.extend(zeroth("e"));
            (bracket, src, tgt)
        }
        (5, 2) => {
            let dx_phi = kit.dphi(0).d_x(reg)?;
            let bracket = one
                + kit.lb(-1) * kit.dphi(1) * re("b", 0) * q(1, 5)
                + kit.lb(-2) * kit.dphi(1) * (cx("c1", 0) * Rational::int(2) + iq(1, 1) * re("b", 1)) * q(1, 10)
                - dx_phi * kit.dphi(1) * Polynomial::i()
                - kit.lb(-1) * kit.sq() * (iq(1, 1) * re("b", 1)) * q(1, 10);
            let (mut src, mut tgt) = (k5_a1(), k5_a1());
            src.extend([(2, cx("c1", 0)), (1, cx("d1", 0))]);
            tgt.extend([(2, re("c1", 0)), (1, cx("d1", 0) - im("c1", 1) * Rational::int(2))]);
            (bracket, src, tgt)
        }
        (5, 3) => {
            let bracket = one
                + kit.lb(-1) * kit.dphi(1) * re("b", 0) * q(1, 5)
                + kit.lb(-2) * kit.dphi(1) * (re("c1", 0) + iq(1, 2) * re("b", 1)) * q(1, 5)
                - kit.lb(-1) * kit.sq() * (iq(1, 1) * re("b", 1)) * q(1, 10);
            let (mut src, mut tgt) = (k5_a2(), k5_a2());
            src.push((1, cx("d2", 0)));
            tgt.push((1, re("d2", 0)));
            (bracket, src, tgt)
        }
        (6, 1) => {
            let (b, rb, ib) = (cx("b", 0), re("b", 0), im("b", 0));
            let third = iq(5, 12) * cx("c", 1) + cx("d", 0) * q(1, 6)
                - cx("b", 2) * q(35, 72)
                - b.pow(2) * q(1, 24)
                - rb.pow(2) * q(1, 36);
            let second = cx("b", 2) * q(5, 24) + rb.pow(2) * q(1, 72) - iq(1, 12) * cx("c", 1);
            let bracket = one
                + kit.paired(6, 1) * kit.dphi(1) * rb.clone()
                + kit.lb(-2) * kit.dphi(1) * (cx("c", 0) + iq(5, 2) * cx("b", 1)) * q(1, 6)
                - kit.lb(-1) * kit.sq() * (iq(1, 1) * re("b", 1)) * q(1, 12)
                + kit.lb(-3) * kit.dphi(1) * third
                + kit.lb(-2) * kit.sq() * second
                - kit.lb(-1) * kit.cube() * re("b", 2) * q(1, 36);
            let mut src = vec![(4, b), (3, cx("c", 0)), (2, cx("d", 0)), (1, cx("e", 0))];
            src.extend(zeroth("f"));
            let xi1 =
                cx("e", 0) - iq(1, 3) * &ib * cx("c", 0) + iq(1, 4) * im("b", 1) * &ib + re("b", 1) * &ib * q(1, 4)
                    - &rb * im("b", 1) * q(7, 12)
                    + im("b", 3) * q(5, 2);
            let mut tgt = vec![
                (4, rb.clone()),
                (3, cx("c", 0) - im("b", 1) * q(5, 2)),
                (2, cx("d", 0) + ib.pow(2) * q(1, 4) - iq(1, 2) * &ib * &rb + iq(10, 3) * im("b", 2)),
                (1, xi1),
            ];
            tgt.extend(zeroth("f"));
            (bracket, src, tgt)
        }
        (6, 2) => {
            let third =
                cx("d1", 0) * q(1, 6) + iq(5, 12) * cx("c1", 1) + re("b", 2) * q(25, 72) - re("b", 0).pow(2) * q(5, 72);
            let bracket = k6_bracket(kit, third);
            let (mut src, mut tgt) = (k6_a1(), k6_a1());
            src.extend([(3, cx("c1", 0)), (2, cx("d1", 0)), (1, cx("e1", 0))]);
            tgt.extend([
                (3, re("c1", 0)),
                (2, cx("d1", 0) - im("c1", 1) * q(5, 2)),
                (1, cx("e1", 0) - iq(1, 3) * re("b", 0) * im("c1", 0) + iq(10, 3) * im("c1", 2)),
            ]);
            (bracket, src, tgt)
        }
        (6, 3) | (6, 4) => {
            let third =
                re("d2", 0) * q(1, 6) + iq(1, 6) * re("c1", 1) + re("b", 2) * q(25, 72) - re("b", 0).pow(2) * q(5, 72);
            let bracket = k6_bracket(kit, third);
            if index == 3 {
                let (mut src, mut tgt) = (k6_a2(), k6_a2());
                src.extend([(2, cx("d2", 0)), (1, cx("e2", 0))]);
                tgt.extend([(2, re("d2", 0)), (1, cx("e2", 0) - im("d2", 1) * q(5, 2))]);
                (bracket, src, tgt)
            } else {
                let (mut src, mut tgt) = (k6_a3(), k6_a3());
                src.push((1, cx("e3", 0)));
                tgt.push((1, re("e3", 0)));
                (bracket, src, tgt)
            }
        }
        _ => return Err(VerifyError::UnknownStage { k, index }),
    };
    src.retain(|(_, c)| !c.is_zero());
    tgt.retain(|(_, c)| !c.is_zero());
    Ok((bracket, kit.operator(k as i32, &src), kit.operator(k as i32, &tgt)))
}

pub fn build_stage(k: u32, index: u32, opts: &StageOptions) -> Result<Stage, VerifyError> {
    let mode = if k == 4 { Mode::Ray } else { Mode::SEll };
    let kit = Kit { mode, phi0: PHI0 };
    let rule = phase_rule(&kit, k, index, opts).ok_or(VerifyError::UnknownStage { k, index })?;
    let remainder_order = -(k as i32 - 1);
    let mut registry = registry(&kit, rule.clone(), remainder_order, &opts.remainder)?;
    if k == 4 && index == 2 && opts.literal_toy_phi {
        let r1 = phase_rule(&kit, 4, 1, opts).expect("first toy stage");
        registry.declare_with_remainder(PHI01, 0, r1, remainder_order)?;
    }
    let (bracket, source, target) = stage_parts(&kit, k, index, &registry, opts)?;
    Ok(Stage {
        k,
        index,
        mode,
        registry,
        phi0: PHI0.to_string(),
        remainder_order,
        rule,
        bracket,
        source,
        target,
        phase_vanishes: false,
    })
}

/// Target coefficients of the first k = 5 stage; `cross` multiplies `i b Im b`.
pub fn k5_stage1_target_coeffs(cross: Rational) -> Vec<(i32, Polynomial)> {
    let ib = im("b", 0);
    vec![
        (3, re("b", 0)),
        (2, cx("c", 0) - im("b", 1) * Rational::int(2)),
        (
            1,
            cx("d", 0) + iq(2, 1) * im("b", 2) - ib.pow(2) * q(2, 5)
                + Polynomial::i() * cx("b", 0) * &ib * cross
                + iq(1, 5) * re("b", 0) * &ib,
        ),
    ]
}

/// `ξ^5 +` the target of the first k = 5 stage with a chosen cross coefficient.
pub fn k5_stage1_target(cross: Rational) -> SymbolExpr {
    Kit { mode: Mode::SEll, phi0: PHI0 }.operator(5, &k5_stage1_target_coeffs(cross))
}

fn k5_a1() -> Vec<(i32, Polynomial)> {
    vec![(3, re("b", 0)), (2, -(iq(3, 2) * re("b", 1)))]
}

fn k5_a2() -> Vec<(i32, Polynomial)> {
    let mut a = k5_a1();
    a.extend([(2, re("c1", 0)), (1, -(iq(1, 1) * re("c1", 1)))]);
    a
}

fn k6_a1() -> Vec<(i32, Polynomial)> {
    vec![(4, re("b", 0)), (3, -(iq(2, 1) * re("b", 1))), (1, -(iq(1, 1) * re("b", 3)))]
}

fn k6_a2() -> Vec<(i32, Polynomial)> {
    let mut a = k6_a1();
    a.extend([(3, re("c1", 0)), (2, -(iq(3, 2) * re("c1", 1)))]);
    a
}

fn k6_a3() -> Vec<(i32, Polynomial)> {
    let mut a = k6_a2();
    a.extend([(2, re("d2", 0)), (1, -(iq(1, 1) * re("d2", 1)))]);
    a
}

/// Bracket shared by the later k = 6 stages; only the `⟨ξ⟩_ℓ^{-3}` row changes.
fn k6_bracket(kit: &Kit, third: Polynomial) -> SymbolExpr {
    let second = re("b", 2) * q(1, 24) + re("b", 0).pow(2) * q(1, 72) - iq(1, 12) * re("c1", 1);
    SymbolExpr::one(kit.mode)
        + kit.paired(6, 1) * kit.dphi(1) * re("b", 0)
        + kit.lb(-2) * kit.dphi(1) * (re("c1", 0) + iq(1, 2) * re("b", 1)) * q(1, 6)
        - kit.lb(-1) * kit.sq() * (iq(1, 1) * re("b", 1)) * q(1, 12)
        + kit.lb(-3) * kit.dphi(1) * third
        + kit.lb(-2) * kit.sq() * second
        - kit.lb(-1) * kit.cube() * re("b", 2) * q(1, 36)
}
