//! Rewrite rules on opaque-function derivatives, e.g. `f_{xt} -> -a f_x - b f_t`.
//!
//! A rule also applies to every derivative of its left-hand side: the
//! right-hand side is differentiated formally in the extra argument slots.
//! Every function atom in a right-hand side has strictly smaller order than
//! the left-hand side, so rewriting terminates.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::sync::Mutex;

use thiserror::Error;

use super::{Atom, Expr, FuncAtom};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("rule for {0}: arguments must be distinct single atoms")]
    BadArguments(String),
    #[error("rule for {lhs} is not order-decreasing: right-hand side contains {offender}")]
    NotDecreasing { lhs: String, offender: String },
    #[error("duplicate rule for {0}")]
    Duplicate(String),
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct RewriteRule {
    pub lhs: FuncAtom,
    pub rhs: Expr,
}

impl RewriteRule {
    pub fn new(lhs: FuncAtom, rhs: Expr) -> Result<Self, RuleError> {
        let name = Expr::func(lhs.clone()).to_string();
        let mut seen = BTreeSet::new();
        for a in &lhs.args {
            match a.as_atom() {
                Some(atom) if seen.insert(atom.clone()) => {}
                _ => return Err(RuleError::BadArguments(name)),
            }
        }
        for atom in rhs.atoms_deep() {
            if let Atom::Func(g) = &atom {
                if g.order() >= lhs.order() {
                    return Err(RuleError::NotDecreasing {
                        lhs: name,
                        offender: Expr::func(g.clone()).to_string(),
                    });
                }
            }
        }
        Ok(RewriteRule { lhs, rhs })
    }

    fn matches(&self, f: &FuncAtom) -> Option<Vec<u32>> {
        if f.name != self.lhs.name || f.args != self.lhs.args {
            return None;
        }
        f.orders
            .iter()
            .zip(&self.lhs.orders)
            .map(|(have, need)| have.checked_sub(*need))
            .collect()
    }
}

impl fmt::Display for RewriteRule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} -> {}", Expr::func(self.lhs.clone()), self.rhs)
    }
}

/// An orientable, validated list of rules with a cache of differentiated
/// right-hand sides.
#[derive(Default)]
pub struct RuleSet {
    rules: Vec<RewriteRule>,
    closure: Mutex<HashMap<(usize, Vec<u32>), Expr>>,
}

impl Clone for RuleSet {
    fn clone(&self) -> Self {
        RuleSet {
            rules: self.rules.clone(),
            closure: Mutex::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for RuleSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_list()
            .entries(self.rules.iter().map(|r| r.to_string()))
            .finish()
    }
}

impl PartialEq for RuleSet {
    fn eq(&self, other: &Self) -> bool {
        self.rules == other.rules
    }
}

impl RuleSet {
    pub fn empty() -> Self {
        RuleSet::default()
    }

    pub fn new(rules: Vec<RewriteRule>) -> Result<Self, RuleError> {
        for (i, r) in rules.iter().enumerate() {
            if rules[..i].iter().any(|q| q.lhs == r.lhs) {
                return Err(RuleError::Duplicate(Expr::func(r.lhs.clone()).to_string()));
            }
        }
        Ok(RuleSet {
            rules,
            closure: Mutex::new(HashMap::new()),
        })
    }

    pub fn rules(&self) -> &[RewriteRule] {
        &self.rules
    }

    pub fn is_empty(&self) -> bool {
        self.rules.is_empty()
    }

    fn extended_rhs(&self, idx: usize, extra: &[u32]) -> Expr {
        let key = (idx, extra.to_vec());
        if let Some(e) = self.closure.lock().unwrap().get(&key) {
            return e.clone();
        }
        let rule = &self.rules[idx];
        let mut e = rule.rhs.clone();
        for (slot, n) in extra.iter().enumerate() {
            let arg = rule.lhs.args[slot].as_atom().unwrap();
            for _ in 0..*n {
                e = e.partial(arg);
            }
        }
        self.closure.lock().unwrap().insert(key, e.clone());
        e
    }

    fn rewrite(&self, f: &FuncAtom) -> Option<Expr> {
        self.rules
            .iter()
            .enumerate()
            .find_map(|(i, r)| r.matches(f).map(|extra| self.extended_rhs(i, &extra)))
    }

    /// Rewrites to the fixpoint.
    pub fn apply(&self, e: &Expr) -> Expr {
        if self.rules.is_empty() {
            return e.clone();
        }
        let mut cur = e.clone();
        loop {
            let next = cur.map_atoms(&mut |a| match a {
                Atom::Func(f) => self.rewrite(f),
                _ => None,
            });
            if next == cur {
                return cur;
            }
            cur = next;
        }
    }

    pub fn is_zero(&self, e: &Expr) -> bool {
        self.apply(e).is_zero()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::Coeff;
    use crate::symbol::{Param, Sym};

    fn setup() -> (FuncAtom, Expr, Expr, Expr, Param, Param) {
        let x = Sym::new(0, "x");
        let t = Sym::new(1, "t");
        let f = FuncAtom::new(Sym::new(0, "f"), vec![Expr::indep(&x), Expr::indep(&t)]);
        let a = Param::new(0, "alpha", false);
        let b = Param::new(1, "beta", false);
        let fx = Expr::func(f.derive_slot(0));
        let ft = Expr::func(f.derive_slot(1));
        let fxt = f.derive_slot(0).derive_slot(1);
        let rhs = -(&(&Expr::param(&a) * &fx) + &(&Expr::param(&b) * &ft));
        (fxt, rhs, fx, ft, a, b)
    }

    #[test]
    fn rule_reduces_its_own_residual() {
        let (fxt, rhs, fx, ft, a, b) = setup();
        let rules = RuleSet::new(vec![RewriteRule::new(fxt.clone(), rhs).unwrap()]).unwrap();
        let residual = &(&Expr::func(fxt) + &(&Expr::param(&a) * &fx)) + &(&Expr::param(&b) * &ft);
        assert!(rules.is_zero(&residual));
    }

    #[test]
    fn derivative_closure_two_step() {
        let (fxt, rhs, fx, ft, a, b) = setup();
        let rules = RuleSet::new(vec![RewriteRule::new(fxt.clone(), rhs).unwrap()]).unwrap();
        let fxxt = Expr::func(fxt.derive_slot(0));
        let mut g = fxt.clone();
        g.orders = vec![2, 0];
        let fxx = Expr::func(g);
        // hand expansion: -a f_xx - b f_xt, then f_xt -> -a f_x - b f_t
        let pa = Expr::param(&a);
        let pb = Expr::param(&b);
        let expected = &(&-(&pa * &fxx) + &(&(&pb * &pa) * &fx)) + &(&(&pb * &pb) * &ft);
        assert_eq!(rules.apply(&fxxt), expected);
    }

    #[test]
    fn non_decreasing_rule_rejected() {
        let (fxt, _, _, _, _, _) = setup();
        let bad = Expr::func(fxt.derive_slot(0)).scale(&Coeff::from_int(2));
        assert!(matches!(
            RewriteRule::new(fxt, bad),
            Err(RuleError::NotDecreasing { .. })
        ));
    }

    #[test]
    fn trivially_zero_without_rules() {
        let x = Expr::indep(&Sym::new(0, "x"));
        assert!(RuleSet::empty().is_zero(&(&x - &x)));
    }
}
