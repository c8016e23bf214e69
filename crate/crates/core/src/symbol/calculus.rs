use super::{Grading, Mode, OpaqueAtom, Registry, Result, Shape, SymbolError, SymbolExpr, SOBOLEV_PARAM};
use crate::algebra::{factorial, GaussianRational, Polynomial, Rational};

fn s_poly(n: i32, flag: i8) -> Polynomial {
    Polynomial::int(n as i128) + Polynomial::formal(SOBOLEV_PARAM).scale_r(Rational::int(flag as i128))
}

impl SymbolExpr {
    /// Order of one shape; formal `s` exponents are read as zero.
    pub fn shape_order(shape: &Shape, reg: &Registry, grading: Grading) -> Result<i32> {
        let mut o = shape.xi + shape.jb + shape.lb;
        if grading == Grading::UniformEll {
            o += shape.ell as i32;
        }
        for (a, e) in &shape.opaques {
            o += reg.atom_order(a)? * *e as i32;
        }
        Ok(o)
    }

    /// Largest term order, `None` for the zero symbol. Formal exponents are
    /// read as zero, which is what intermediate pruning needs.
    pub fn order_in(&self, reg: &Registry, grading: Grading) -> Result<Option<i32>> {
        let mut best: Option<i32> = None;
        for s in self.terms.keys() {
            let o = Self::shape_order(s, reg, grading)?;
            best = Some(best.map_or(o, |b| b.max(o)));
        }
        Ok(best)
    }

    /// Order in the mode's own grading; terms with a formal exponent are
    /// refused.
    pub fn symbol_order(&self, reg: &Registry) -> Result<Option<i32>> {
        if let Some(s) = self.terms.keys().find(|s| s.has_formal_exponent()) {
            return Err(SymbolError::UncancelledFormalExponent(s.to_string()));
        }
        self.order_in(reg, self.mode.grading())
    }

    /// Drops terms of order `<= cutoff`, ignoring formal exponents.
    pub fn prune(&self, cutoff: i32, reg: &Registry, grading: Grading) -> Result<SymbolExpr> {
        let mut out = SymbolExpr::zero(self.mode);
        for (s, c) in &self.terms {
            if Self::shape_order(s, reg, grading)? > cutoff {
                out.add_term(s.clone(), c.clone());
            }
        }
        Ok(out)
    }

    /// Keeps the terms of order `> cutoff`; surviving formal exponents are an error.
    pub fn truncate_in(&self, cutoff: i32, reg: &Registry, grading: Grading) -> Result<SymbolExpr> {
        let out = self.prune(cutoff, reg, grading)?;
        if let Some(s) = out.terms.keys().find(|s| s.has_formal_exponent()) {
            return Err(SymbolError::UncancelledFormalExponent(s.to_string()));
        }
        Ok(out)
    }

    pub fn truncate(&self, cutoff: i32, reg: &Registry) -> Result<SymbolExpr> {
        self.truncate_in(cutoff, reg, self.mode.grading())
    }

    pub fn d_xi(&self) -> SymbolExpr {
        let mut out = SymbolExpr::zero(self.mode);
        for (shape, c) in &self.terms {
            if shape.xi != 0 || shape.xi_s != 0 {
                let s = Shape { xi: shape.xi - 1, ..shape.clone() };
                out.add_term(s, c * s_poly(shape.xi, shape.xi_s));
            }
            if shape.jb != 0 || shape.jb_s != 0 {
                let s = Shape { xi: shape.xi + 1, jb: shape.jb - 2, ..shape.clone() };
                out.add_term(s, c * s_poly(shape.jb, shape.jb_s));
            }
            if shape.lb != 0 {
                let s = Shape { xi: shape.xi + 1, lb: shape.lb - 2, ..shape.clone() };
                out.add_term(s, c.scale_r(Rational::int(shape.lb as i128)));
            }
            for (a, e) in &shape.opaques {
                let mut s = shape.without_opaque(a);
                s.mul_opaque(OpaqueAtom { xi_derivs: a.xi_derivs + 1, ..*a }, 1);
                out.add_term(s, c.scale_r(Rational::int(*e as i128)));
            }
            for (g, p) in &shape.gauge {
                let mut s = shape.clone();
                s.mul_opaque(OpaqueAtom { name: *g, xi_derivs: 1, x_derivs: 0 }, 1);
                out.add_term(s, c.scale_r(Rational::int(*p as i128)));
            }
        }
        out
    }

    pub fn d_xi_n(&self, n: u32) -> SymbolExpr {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.d_xi();
        }
        e
    }

    /// `∂_x`, using the declared x-rules for opaque factors.
    pub fn d_x(&self, reg: &Registry) -> Result<SymbolExpr> {
        let mut out = SymbolExpr::zero(self.mode);
        for (shape, c) in &self.terms {
            out.add_term(shape.clone(), c.differentiate());
            for (a, e) in &shape.opaques {
                let rest = shape.without_opaque(a);
                let k = c.scale_r(Rational::int(*e as i128));
                for (s2, c2) in reg.dx_atom(a, self.mode)?.terms() {
                    out.add_term(rest.mul(s2), &k * c2);
                }
            }
            for (g, p) in &shape.gauge {
                let k = c.scale_r(Rational::int(*p as i128));
                let phi = OpaqueAtom { name: *g, xi_derivs: 0, x_derivs: 0 };
                for (s2, c2) in reg.dx_atom(&phi, self.mode)?.terms() {
                    out.add_term(shape.mul(s2), &k * c2);
                }
            }
        }
        Ok(out)
    }

    pub fn d_x_n(&self, n: u32, reg: &Registry) -> Result<SymbolExpr> {
        let mut e = self.clone();
        for _ in 0..n {
            e = e.d_x(reg)?;
        }
        Ok(e)
    }

    /// Expands both brackets along `ξ → +∞` and keeps terms of order
    /// `> cutoff` (fixed `ℓ`):
    /// `⟨ξ⟩_ℓ^n = Σ_j C(n/2, j) ℓ^{2j} ξ^{n-2j}` and
    /// `⟨ξ⟩^{n+σs} = ξ^{σs} Σ_j C((n+σs)/2, j) ξ^{n-2j}`.
    pub fn to_ray(&self, cutoff: i32, reg: &Registry) -> Result<SymbolExpr> {
        let mut out = SymbolExpr::zero(Mode::Ray);
        for (shape, c) in &self.terms {
            let base = Self::shape_order(shape, reg, Grading::FixedEll)?;
            if base <= cutoff {
                continue;
            }
            if !shape.has_brackets() {
                out.add_term(shape.clone(), c.clone());
                continue;
            }
            let depth = ((base - cutoff - 1) / 2) as u32;
            let half_lb = Rational::new(shape.lb as i128, 2);
            for i in 0..=(if shape.lb != 0 { depth } else { 0 }) {
                let lb_coeff = half_lb.binom(i);
                if lb_coeff.is_zero() {
                    continue;
                }
                let jb_terms = if shape.jb != 0 || shape.jb_s != 0 { depth - i } else { 0 };
                let mut jb_coeff = Polynomial::one();
                for j in 0..=jb_terms {
                    if j > 0 {
                        // C(t, j) = C(t, j-1) (t - j + 1) / j with t = (n + σs)/2
                        let t = s_poly(shape.jb, shape.jb_s).scale_r(Rational::new(1, 2));
                        jb_coeff = &jb_coeff * (t - Polynomial::int(j as i128 - 1));
                        jb_coeff = jb_coeff.scale_r(Rational::new(1, j as i128));
                    }
                    if jb_coeff.is_zero() {
                        break;
                    }
                    let s = Shape {
                        xi: shape.xi + shape.lb - 2 * i as i32 + shape.jb - 2 * j as i32,
                        xi_s: shape.xi_s + shape.jb_s,
                        jb: 0,
                        jb_s: 0,
                        lb: 0,
                        ell: shape.ell + 2 * i,
                        ..shape.clone()
                    };
                    out.add_term(s, c.scale_r(lb_coeff) * &jb_coeff);
                }
            }
        }
        Ok(out)
    }
}

fn mul_pruned(a: &SymbolExpr, b: &SymbolExpr, cutoff: i32, reg: &Registry, g: Grading) -> Result<SymbolExpr> {
    let bo: Vec<(i32, &Shape, &Polynomial)> =
        b.terms().map(|(s, c)| SymbolExpr::shape_order(s, reg, g).map(|o| (o, s, c))).collect::<Result<_>>()?;
    let mut out = SymbolExpr::zero(a.mode);
    for (s1, c1) in a.terms() {
        let o1 = SymbolExpr::shape_order(s1, reg, g)?;
        for (o2, s2, c2) in &bo {
            if o1 + o2 > cutoff {
                out.add_term(s1.mul(s2), c1 * *c2);
            }
        }
    }
    Ok(out)
}

/// `a ∘ b ~ Σ_j (i^{-j}/j!) ∂_ξ^j a · ∂_x^j b`, dropping every term of order
/// `<= cutoff` in the mode's own grading.
pub fn compose(a: &SymbolExpr, b: &SymbolExpr, cutoff: i32, reg: &Registry) -> Result<SymbolExpr> {
    compose_with(a, b, cutoff, reg, a.mode.grading())
}

pub fn compose_with(
    a: &SymbolExpr,
    b: &SymbolExpr,
    cutoff: i32,
    reg: &Registry,
    grading: Grading,
) -> Result<SymbolExpr> {
    assert_eq!(a.mode, b.mode, "mixing symbol calculus modes");
    let mut out = SymbolExpr::zero(a.mode);
    let mut da = a.clone();
    let mut dxb = b.clone();
    for j in 0u32.. {
        let (Some(oa), Some(ob)) = (da.order_in(reg, grading)?, dxb.order_in(reg, grading)?) else {
            break;
        };
        if oa + ob <= cutoff {
            break;
        }
        let c = GaussianRational::i_pow(-(j as i64)).scale(Rational::new(1, factorial(j)));
        out.add_expr(mul_pruned(&da, &dxb, cutoff, reg, grading)?.scale_c(c));
        da = da.d_xi();
        let Some(oa_next) = da.order_in(reg, grading)? else { break };
        dxb = dxb.d_x(reg)?.prune(cutoff - oa_next, reg, grading)?;
    }
    Ok(out)
}

/// `⟨ξ⟩^s ∘ p ∘ ⟨ξ⟩^{-s}` as a ray expansion polynomial in the formal `s`,
/// keeping terms of order `> cutoff`.
pub fn sobolev_conjugate(p: &SymbolExpr, cutoff: i32, reg: &Registry) -> Result<SymbolExpr> {
    let mode = p.mode;
    let left = SymbolExpr::unit_bracket(mode, 0, 1);
    let right = SymbolExpr::unit_bracket(mode, 0, -1);
    // the right factor is x-independent, so composing with it is a product
    let t = compose_with(&left, p, cutoff, reg, Grading::FixedEll)? * right;
    t.to_ray(cutoff, reg)?.truncate_in(cutoff, reg, Grading::FixedEll)
}
