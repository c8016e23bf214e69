//! Mechanical checks of `L ∘ Φ ≡ Φ ∘ L' (mod S^0)`.
//!
//! A residual is composed with every term of fixed-`ℓ` order `<= 0` dropped,
//! expanded along `ξ → +∞` and required to vanish power by power, including
//! every power of `ℓ` separately. Only `Φ_0`'s order and x-rule are used.

pub mod selfadjoint;
pub mod stages;

use std::time::Instant;

use serde::Serialize;

use crate::algebra::{GaussianRational, Monomial, Name, Polynomial, Rational};
use crate::symbol::{compose_with, Grading, Mode, Registry, Shape, SymbolError, SymbolExpr, XRule};

pub use stages::{build_stage, stages_for, Remainder, StageOptions, CATALOG, PHI0};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum VerifyError {
    #[error("no stage {index} for k = {k}")]
    UnknownStage { k: u32, index: u32 },
    #[error("{label}: residual of order {order} survives, leading terms: {}", leading.join("; "))]
    IdentityFailure { label: String, order: i32, leading: Vec<String> },
    #[error("{label}: {what}")]
    Certification { label: String, what: String },
    #[error(transparent)]
    Symbol(#[from] SymbolError),
}

/// One reduction step with everything needed to check it.
#[derive(Clone, Debug)]
pub struct Stage {
    pub k: u32,
    pub index: u32,
    pub mode: Mode,
    pub registry: Registry,
    pub phi0: String,
    pub remainder_order: i32,
    /// `h` in `∂_x Φ_0 = h + R`.
    pub rule: SymbolExpr,
    /// `e^{-Φ_0} Φ`.
    pub bracket: SymbolExpr,
    pub source: SymbolExpr,
    pub target: SymbolExpr,
    /// Set when the phase density was specialized to zero, so `Φ_0 = 0`.
    pub phase_vanishes: bool,
}

impl Stage {
    pub fn label(&self) -> String {
        format!("k={} stage {}", self.k, self.index)
    }

    /// `Φ = e^{Φ_0} · bracket`.
    pub fn phi(&self) -> SymbolExpr {
        if self.phase_vanishes {
            return self.bracket.clone();
        }
        SymbolExpr::gauge(self.mode, &self.phi0, 1) * &self.bracket
    }

    pub fn with_target(mut self, target: SymbolExpr) -> Stage {
        self.target = target;
        self
    }

    /// Substitutes coefficient atoms in every expression. When the phase
    /// density becomes zero, `Φ_0` itself is taken to vanish.
    pub fn specialize(&self, f: &impl Fn(&crate::algebra::Atom) -> Option<Polynomial>) -> Result<Stage, VerifyError> {
        let sub = |e: &SymbolExpr| e.map_coeffs(|c| c.substitute(f));
        let rule = sub(&self.rule);
        let phi0 = Name::new(&self.phi0);
        let drop_phase = |e: SymbolExpr| {
            let mut out = SymbolExpr::zero(e.mode);
            for (s, c) in e.into_terms() {
                if s.opaques.iter().any(|(a, _)| a.name == phi0) {
                    continue;
                }
                let gauge = s.gauge.iter().filter(|(g, _)| *g != phi0).cloned().collect();
                out.add_term(Shape { gauge, ..s }, c);
            }
            out
        };
        let mut registry = Registry::new();
        // remainders first, so rewrite rules can refer to them
        let mut decls: Vec<_> = self.registry.decls().collect();
        decls.sort_by_key(|d| matches!(d.rule, XRule::Rewrite { .. }));
        for d in decls {
            let rule = match &d.rule {
                XRule::Rewrite { replacement, remainder } => {
                    XRule::Rewrite { replacement: sub(replacement), remainder: *remainder }
                }
                r => r.clone(),
            };
            registry.declare(d.name.as_str(), d.base_order, rule)?;
        }
        let vanishes = rule.is_zero();
        let fix = |e: &SymbolExpr| if vanishes { drop_phase(sub(e)) } else { sub(e) };
        Ok(Stage {
            registry,
            bracket: fix(&self.bracket),
            source: fix(&self.source),
            target: fix(&self.target),
            rule,
            phase_vanishes: self.phase_vanishes || vanishes,
            ..self.clone()
        })
    }
}

/// `source ∘ Φ - Φ ∘ target` above order zero, as a ray expansion.
pub fn residual(stage: &Stage) -> Result<SymbolExpr, VerifyError> {
    let reg = &stage.registry;
    let phi = stage.phi();
    let g = Grading::FixedEll;
    let lhs = compose_with(&stage.source, &phi, 0, reg, g)?;
    let rhs = compose_with(&phi, &stage.target, 0, reg, g)?;
    let diff = (lhs - rhs).map_coeffs(Polynomial::canonicalize_complex);
    Ok(diff.to_ray(0, reg)?.truncate(0, reg)?)
}

#[derive(Clone, Debug, Serialize)]
pub struct IdentityReport {
    pub stage: String,
    pub k: u32,
    pub index: u32,
    /// Upper bound on the residual order: every surviving term has order `<= 0`.
    pub residual_order: i32,
    pub pass: bool,
    pub elapsed_ms: u128,
}

/// Orders that must hold before the identity means anything.
pub fn certify(stage: &Stage) -> Result<(), VerifyError> {
    let reg = &stage.registry;
    let fail = |what: String| VerifyError::Certification { label: stage.label(), what };
    let grading = stage.mode.grading();
    let decl = reg.get(&Name::new(&stage.phi0))?;
    if decl.base_order > 0 {
        return Err(fail(format!("Φ_0 has order {} > 0", decl.base_order)));
    }
    if let XRule::Rewrite { remainder: Some(r), .. } = &decl.rule {
        let o = reg.get(r)?.base_order;
        if o != -(stage.k as i32 - 1) {
            return Err(fail(format!("remainder order {o} differs from {}", -(stage.k as i32 - 1))));
        }
    }
    let correction = &stage.bracket - &SymbolExpr::one(stage.mode);
    if let Some(o) = correction.order_in(reg, grading)? {
        if o > -1 {
            return Err(fail(format!("e^(-Φ_0)Φ - 1 has order {o} > -1")));
        }
    }
    Ok(())
}

fn leading_terms(res: &SymbolExpr, reg: &Registry) -> Result<(i32, Vec<String>), VerifyError> {
    let order = res.order_in(reg, Grading::FixedEll)?.expect("nonzero residual");
    let mut leading = Vec::new();
    for (s, c) in res.terms() {
        if SymbolExpr::shape_order(s, reg, Grading::FixedEll)? == order {
            leading.push(format!("{s} | {}", c.dump_inline()));
        }
    }
    Ok((order, leading))
}

/// Certifies the stage, then requires the residual to vanish above order zero.
pub fn verify_identity(stage: &Stage) -> Result<IdentityReport, VerifyError> {
    let start = Instant::now();
    certify(stage)?;
    let res = residual(stage)?;
    if !res.is_zero() {
        let (order, leading) = leading_terms(&res, &stage.registry)?;
        return Err(VerifyError::IdentityFailure { label: stage.label(), order, leading });
    }
    Ok(IdentityReport {
        stage: stage.label(),
        k: stage.k,
        index: stage.index,
        residual_order: 0,
        pass: true,
        elapsed_ms: start.elapsed().as_millis(),
    })
}

/// One rational coefficient of the target, at `ξ^xi`, to perturb.
#[derive(Clone, Debug, PartialEq)]
pub struct FaultSite {
    pub xi: i32,
    pub monomial: Monomial,
    pub delta: GaussianRational,
}

/// Every coefficient of a target power `ξ^j`, `j >= 1`; the perturbation
/// `+1/10` goes to the real part when it is nonzero, else the imaginary part.
pub fn fault_sites(stage: &Stage) -> Vec<FaultSite> {
    let mut out = Vec::new();
    for (s, c) in stage.target.terms() {
        if s.xi < 1 || *s != (Shape { xi: s.xi, ..Shape::default() }) {
            continue;
        }
        for (m, v) in c.canonicalize_complex().terms() {
            let tenth = Rational::new(1, 10);
            let delta = if v.re.is_zero() { GaussianRational::imag(tenth) } else { GaussianRational::real(tenth) };
            out.push(FaultSite { xi: s.xi, monomial: m.clone(), delta });
        }
    }
    out
}

pub fn inject(stage: &Stage, site: &FaultSite) -> Stage {
    let mut target = stage.target.clone();
    target.add_term(Shape { xi: site.xi, ..Shape::default() }, Polynomial::term(site.monomial.clone(), site.delta));
    stage.clone().with_target(target)
}
