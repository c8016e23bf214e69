use std::collections::{BTreeMap, HashMap};
use std::sync::Mutex;

use super::{Grading, Mode, OpaqueAtom, Result, Shape, SymbolError, SymbolExpr};
use crate::algebra::{Name, Polynomial};

/// How `∂_x` acts on an opaque symbol.
#[derive(Clone, Debug, PartialEq)]
pub enum XRule {
    /// Differentiating in `x` is an error.
    Missing,
    /// `∂_x` is recorded as an extra derivative and keeps the order.
    Free,
    /// `∂_x Φ = replacement + R`, where `R` is a declared remainder.
    Rewrite { replacement: SymbolExpr, remainder: Option<Name> },
}

#[derive(Clone, Debug, PartialEq)]
pub struct OpaqueDecl {
    pub name: Name,
    pub base_order: i32,
    pub rule: XRule,
}

/// Declared opaque symbols, keyed by name.
#[derive(Debug, Default)]
pub struct Registry {
    decls: BTreeMap<Name, OpaqueDecl>,
    dx_cache: Mutex<HashMap<(Name, u32, Mode), SymbolExpr>>,
}

impl Clone for Registry {
    fn clone(&self) -> Self {
        Registry { decls: self.decls.clone(), dx_cache: Mutex::new(HashMap::new()) }
    }
}

impl Registry {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn get(&self, name: &Name) -> Result<&OpaqueDecl> {
        self.decls.get(name).ok_or_else(|| SymbolError::UnknownOpaque(name.to_string()))
    }

    pub fn decls(&self) -> impl Iterator<Item = &OpaqueDecl> {
        self.decls.values()
    }

    pub fn declare(&mut self, name: &str, base_order: i32, rule: XRule) -> Result<OpaqueAtom> {
        let n = Name::new(name);
        if self.decls.contains_key(&n) {
            return Err(SymbolError::DuplicateName(name.to_string()));
        }
        if let XRule::Rewrite { replacement, remainder } = &rule {
            for g in [Grading::FixedEll, Grading::UniformEll] {
                if let Some(o) = replacement.order_in(self, g)? {
                    if o > base_order {
                        return Err(SymbolError::RuleOrder { name: name.to_string(), rule_order: o, base_order });
                    }
                }
            }
            if let Some(r) = remainder {
                let o = self.get(r)?.base_order;
                if o > base_order {
                    return Err(SymbolError::RuleOrder { name: name.to_string(), rule_order: o, base_order });
                }
            }
        }
        self.decls.insert(n, OpaqueDecl { name: n, base_order, rule });
        Ok(OpaqueAtom { name: n, xi_derivs: 0, x_derivs: 0 })
    }

    /// Declares `Φ` with `∂_x Φ = replacement + R_Φ`, where the remainder `R_Φ`
    /// is an opaque symbol of `remainder_order` with free x-derivatives.
    pub fn declare_with_remainder(
        &mut self,
        name: &str,
        base_order: i32,
        replacement: SymbolExpr,
        remainder_order: i32,
    ) -> Result<Name> {
        let rname = format!("R_{name}");
        self.declare(&rname, remainder_order, XRule::Free)?;
        let r = Name::new(&rname);
        self.declare(name, base_order, XRule::Rewrite { replacement, remainder: Some(r) })?;
        Ok(r)
    }

    pub fn atom_order(&self, a: &OpaqueAtom) -> Result<i32> {
        Ok(self.get(&a.name)?.base_order - a.xi_derivs as i32)
    }

    /// `∂_x` of one opaque factor.
    pub(crate) fn dx_atom(&self, a: &OpaqueAtom, mode: Mode) -> Result<SymbolExpr> {
        let decl = self.get(&a.name)?;
        match &decl.rule {
            XRule::Missing => Err(SymbolError::MissingXRule(a.name.to_string())),
            XRule::Free => {
                let mut shape = Shape::default();
                shape.mul_opaque(OpaqueAtom { x_derivs: a.x_derivs + 1, ..*a }, 1);
                Ok(SymbolExpr::term(mode, shape, Polynomial::one()))
            }
            XRule::Rewrite { replacement, remainder } => {
                assert_eq!(a.x_derivs, 0, "rewritten opaque symbols never carry x-derivatives");
                let key = (a.name, a.xi_derivs, mode);
                if let Some(hit) = self.dx_cache.lock().expect("cache lock").get(&key) {
                    return Ok(hit.clone());
                }
                let mut out = replacement.clone().with_mode(mode);
                for _ in 0..a.xi_derivs {
                    out = out.d_xi();
                }
                if let Some(r) = remainder {
                    let mut shape = Shape::default();
                    shape.mul_opaque(OpaqueAtom { name: *r, xi_derivs: a.xi_derivs, x_derivs: 0 }, 1);
                    out.add_term(shape, Polynomial::one());
                }
                self.dx_cache.lock().expect("cache lock").insert(key, out.clone());
                Ok(out)
            }
        }
    }
}
