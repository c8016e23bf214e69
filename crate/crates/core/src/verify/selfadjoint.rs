//! Sobolev conjugation of self-adjoint operators at k = 5, 6: with the
//! correction `Φ`, `B_s ∘ Φ - Φ ∘ B_0` is of order zero for every `s`.

use std::time::Instant;

use crate::algebra::{q, GaussianRational, Polynomial};
use crate::symbol::{compose, sobolev_conjugate, Mode, Registry, SymbolExpr, SOBOLEV_PARAM};

use super::{IdentityReport, VerifyError};

pub const REAL_NAMES: [&str; 4] = ["alpha", "beta", "gamma", "delta"];

fn r(name: &str, d: u32) -> Polynomial {
    Polynomial::re(name, d)
}

fn i(n: i128, d: i128) -> Polynomial {
    Polynomial::constant(GaussianRational::imag(q(n, d)))
}

fn s() -> Polynomial {
    Polynomial::formal(SOBOLEV_PARAM)
}

/// `ξ^k + A` with `A` self-adjoint, coefficients built from real atoms.
pub fn selfadjoint_symbol(k: u32, mode: Mode) -> Result<SymbolExpr, VerifyError> {
    let coeffs: Vec<(i32, Polynomial)> = match k {
        5 => vec![
            (3, r("alpha", 0)),
            (2, r("beta", 0) - i(3, 2) * r("alpha", 1)),
            (1, r("gamma", 0) - i(1, 1) * r("beta", 1)),
        ],
        6 => vec![
            (4, r("alpha", 0)),
            (3, r("beta", 0) - i(2, 1) * r("alpha", 1)),
            (2, r("gamma", 0) - i(3, 2) * r("beta", 1)),
            (1, r("delta", 0) - i(1, 1) * r("gamma", 1) - i(1, 1) * r("alpha", 3)),
        ],
        _ => return Err(VerifyError::UnknownStage { k, index: 0 }),
    };
    let mut e = SymbolExpr::xi(mode, k as i32);
    for (j, c) in coeffs {
        e = e + SymbolExpr::xi(mode, j) * c;
    }
    Ok(e)
}

/// The correction `Φ` in the uniform classes.
pub fn correction(k: u32) -> Result<SymbolExpr, VerifyError> {
    let m = Mode::SEll;
    let lb = |n: i32| SymbolExpr::ell_bracket(m, n);
    let kk = k as i128;
    let sk = s() * q(-1, kk);
    let mut phi = SymbolExpr::one(m)
        + lb(-2) * (&sk * r("alpha", 0))
        + lb(-3) * (&sk * (r("beta", 0) + i(1, 1) * r("alpha", 1) - i(1, 2) * s() * r("alpha", 1)));
    match k {
        5 => {}
        6 => {
            let a2 = Polynomial::rational(q(3, 2)) + s() * q(3, 4) - s().pow(2) * q(1, 6);
            let row = r("gamma", 0) + i(3, 2) * r("beta", 1) - i(1, 2) * s() * r("beta", 1) + a2 * r("alpha", 2)
                - r("alpha", 0).pow(2) * q(1, 2)
                - s() * r("alpha", 0).pow(2) * q(1, 12);
            phi = phi + lb(-4) * (&sk * row);
        }
        _ => return Err(VerifyError::UnknownStage { k, index: 0 }),
    }
    Ok(phi)
}

/// The printed correction plus, for k = 6, `(s/6)(1 - ℓ²)⟨ξ⟩_ℓ^{-4} α`.
///
/// The printed k = 6 correction leaves `i s (1 - ℓ²) α' ξ`: the
/// conjugation by `⟨ξ⟩^s` produces `i s α' ξ` with the unit bracket, while
/// `⟨ξ⟩_ℓ^{-2}` in `Φ` produces `-i s ℓ² α' ξ`. They cancel only at `ℓ = 1`.
pub fn repaired_correction(k: u32) -> Result<SymbolExpr, VerifyError> {
    let phi = correction(k)?;
    if k != 6 {
        return Ok(phi);
    }
    let m = Mode::SEll;
    let one_minus_ell2 = SymbolExpr::one(m) - SymbolExpr::ell(m, 2);
    Ok(phi + one_minus_ell2 * SymbolExpr::ell_bracket(m, -4) * (s() * r("alpha", 0) * q(1, 6)))
}

/// `⟨ξ⟩^s ∘ (ξ^k + A) ∘ ⟨ξ⟩^{-s}` above order zero.
pub fn conjugated_symbol(k: u32) -> Result<SymbolExpr, VerifyError> {
    let reg = Registry::new();
    Ok(sobolev_conjugate(&selfadjoint_symbol(k, Mode::S)?, 0, &reg)?)
}

/// `B_s ∘ Φ - Φ ∘ B_0` above order zero, valid for all `s` at once.
pub fn selfadjoint_residual(k: u32) -> Result<SymbolExpr, VerifyError> {
    residual_with(k, &correction(k)?)
}

pub fn residual_with(k: u32, correction: &SymbolExpr) -> Result<SymbolExpr, VerifyError> {
    let reg = Registry::new();
    let b_s = conjugated_symbol(k)?;
    let b_0 = selfadjoint_symbol(k, Mode::Ray)?;
    let phi = correction.to_ray(-(k as i32), &reg)?;
    let lhs = compose(&b_s, &phi, 0, &reg)?;
    let rhs = compose(&phi, &b_0, 0, &reg)?;
    Ok((lhs - rhs).truncate(0, &reg)?)
}

pub fn verify_selfadjoint_reduction(k: u32) -> Result<IdentityReport, VerifyError> {
    check(k, &correction(k)?, format!("k={k} self-adjoint reduction"))
}

pub fn verify_repaired_reduction(k: u32) -> Result<IdentityReport, VerifyError> {
    check(k, &repaired_correction(k)?, format!("k={k} self-adjoint reduction, repaired"))
}

fn check(k: u32, phi: &SymbolExpr, label: String) -> Result<IdentityReport, VerifyError> {
    let start = Instant::now();
    let reg = Registry::new();
    let correction_order = (phi - &SymbolExpr::one(Mode::SEll)).order_in(&reg, Mode::SEll.grading())?;
    if correction_order.is_some_and(|o| o > -1) {
        return Err(VerifyError::Certification { label, what: "Φ - 1 is not of order -1".into() });
    }
    let res = residual_with(k, phi)?;
    if !res.is_zero() {
        let order = res.order_in(&reg, Mode::Ray.grading())?.expect("nonzero residual");
        let leading =
            res.terms().filter(|(sh, _)| sh.xi == order).map(|(sh, c)| format!("{sh} | {}", c.dump_inline())).collect();
        return Err(VerifyError::IdentityFailure { label, order, leading });
    }
    Ok(IdentityReport {
        stage: label,
        k,
        index: 0,
        residual_order: 0,
        pass: true,
        elapsed_ms: start.elapsed().as_millis(),
    })
}
