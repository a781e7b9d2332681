//! Jet space: total derivatives, PDE systems in solved (leading-derivative)
//! form, and reduction of expressions onto the solution manifold.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::sync::Mutex;

use thiserror::Error;

pub use crate::expr::MultiIndex;
use crate::expr::{Atom, Coeff, Expr, JetVar, RuleSet};
use crate::symbol::Sym;

/// Nesting bound for on-solution reduction; reached only by systems whose
/// solved forms feed back into each other.
const MAX_REDUCTION_DEPTH: usize = 256;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SystemError {
    #[error("equation {0}: leading derivative occurs nonlinearly")]
    Nonlinear(String),
    #[error("equation {0}: leading derivative appears in remainder after solving")]
    InRemainder(String),
    #[error("duplicate leading atoms: {0}")]
    Duplicate(String),
    #[error("equation {0}: coefficient of the leading derivative {1} is not a nonzero constant")]
    LeadingCoefficient(String, String),
    #[error("equation {0}: no derivative to solve for")]
    NoLeading(String),
    #[error("equation {0}: leading form missing")]
    MissingLeading(String),
    #[error("reduction on solutions does not terminate for {0}")]
    NonTerminating(String),
}

/// `D_i e`: total derivative with respect to the independent variable `i`.
pub fn total_derivative(e: &Expr, i: &Sym) -> Expr {
    e.derive_with(&mut |a| total_atom(a, i))
}

fn total_atom(a: &Atom, i: &Sym) -> Expr {
    match a {
        Atom::Indep(v) => {
            if v == i {
                Expr::one()
            } else {
                Expr::zero()
            }
        }
        Atom::Jet(j) => Expr::atom(Atom::Jet(j.derive(i))),
        Atom::Func(f) => {
            let mut out = Expr::zero();
            for (k, arg) in f.args.iter().enumerate() {
                let d = total_derivative(arg, i);
                if !d.is_zero() {
                    out += &d * &Expr::func(f.derive_slot(k));
                }
            }
            out
        }
        Atom::Exp(q) => {
            let d = total_derivative(q, i);
            if d.is_zero() {
                d
            } else {
                &d * &Expr::atom(a.clone())
            }
        }
        Atom::ExpConst(_) => Expr::zero(),
    }
}

/// `D_J e` for a multi-index `J`.
pub fn total_derivative_multi(e: &Expr, j: &MultiIndex) -> Expr {
    let mut out = e.clone();
    for v in j.vars() {
        if out.is_zero() {
            break;
        }
        out = total_derivative(&out, &v);
    }
    out
}

/// Highest derivative order of any jet atom in `e` (0 if none).
pub fn jet_order(e: &Expr) -> u32 {
    e.jet_vars_deep()
        .iter()
        .map(|j| j.index.order())
        .max()
        .unwrap_or(0)
}

/// One equation `E = c (L - R) = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct Equation {
    pub name: String,
    pub expr: Expr,
    pub leading: JetVar,
    pub lead_coeff: Coeff,
    pub solved: Expr,
}

/// Input to [`solve_leading`]: equations with optional leading-derivative
/// designations.
#[derive(Clone, Debug, Default)]
pub struct SystemDraft {
    pub indep: Vec<Sym>,
    pub dep: Vec<Sym>,
    pub equations: Vec<(String, Expr, Option<JetVar>)>,
    pub rules: RuleSet,
}

pub struct PdeSystem {
    indep: Vec<Sym>,
    dep: Vec<Sym>,
    equations: Vec<Equation>,
    rules: RuleSet,
    adjoint: Vec<Sym>,
    hats: Vec<Sym>,
    cache: Mutex<HashMap<(bool, usize, MultiIndex), Expr>>,
}

impl Clone for PdeSystem {
    fn clone(&self) -> Self {
        PdeSystem {
            indep: self.indep.clone(),
            dep: self.dep.clone(),
            equations: self.equations.clone(),
            rules: self.rules.clone(),
            adjoint: self.adjoint.clone(),
            hats: self.hats.clone(),
            cache: Mutex::new(HashMap::new()),
        }
    }
}

impl fmt::Debug for PdeSystem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PdeSystem")
            .field("indep", &self.indep)
            .field("dep", &self.dep)
            .field("equations", &self.equations)
            .field("rules", &self.rules)
            .finish()
    }
}

/// Default leading derivative: highest order, then most derivatives in the
/// first-listed independent variable, then the next, and so on.
pub fn default_leading(e: &Expr, indep: &[Sym]) -> Option<JetVar> {
    e.atoms()
        .into_iter()
        .filter_map(|a| match a {
            Atom::Jet(j) if !j.index.is_empty() => Some(j),
            _ => None,
        })
        .max_by(|a, b| {
            let key = |j: &JetVar| {
                (
                    j.index.order(),
                    indep.iter().map(|v| j.index.count(v)).collect::<Vec<_>>(),
                )
            };
            key(a).cmp(&key(b)).then_with(|| b.dep.cmp(&a.dep))
        })
}

/// Adjoint dependent variables `v^β` for a system with `n` equations:
/// `v` when there is one equation, else `v1, v2, ...`, avoiding the given
/// variable names.
pub fn adjoint_symbols(indep: &[Sym], dep: &[Sym], n: usize) -> Vec<Sym> {
    let taken: Vec<&str> = indep.iter().chain(dep).map(|d| d.name()).collect();
    let base_rank = dep.iter().map(|d| d.rank()).max().map_or(0, |r| r + 1);
    (0..n)
        .map(|b| {
            let mut name = if n == 1 {
                "v".to_string()
            } else {
                format!("v{}", b + 1)
            };
            while taken.contains(&name.as_str()) {
                name.push('_');
            }
            Sym::new(base_rank + 1000 + b as u32, name)
        })
        .collect()
}

/// Solves each equation for its leading derivative.
pub fn solve_leading(draft: SystemDraft) -> Result<PdeSystem, SystemError> {
    let mut equations = Vec::new();
    for (name, e, lead) in &draft.equations {
        let leading = match lead {
            Some(l) => l.clone(),
            None => default_leading(e, &draft.indep)
                .ok_or_else(|| SystemError::NoLeading(name.clone()))?,
        };
        let atom = Atom::Jet(leading.clone());
        if e.degree_in(&atom) == 0 {
            return Err(SystemError::MissingLeading(name.clone()));
        }
        if e.degree_in(&atom) > 1 {
            return Err(SystemError::Nonlinear(name.clone()));
        }
        let parts = e.collect(&[atom.clone()].into_iter().collect());
        let lin_key = parts
            .keys()
            .find(|m| !m.is_one())
            .cloned()
            .expect("leading atom present");
        let lin = &parts[&lin_key];
        if lin.mentions(&atom) {
            return Err(SystemError::Nonlinear(name.clone()));
        }
        let c = match lin.as_coeff() {
            Some(c) if c.is_unit() => c,
            _ => {
                return Err(SystemError::LeadingCoefficient(
                    name.clone(),
                    Expr::atom(atom.clone()).to_string(),
                ))
            }
        };
        let rest = parts
            .get(&crate::expr::Monomial::one())
            .cloned()
            .unwrap_or_default();
        if rest.mentions(&atom) {
            return Err(SystemError::Nonlinear(name.clone()));
        }
        let solved = (-rest).scale(&c.inv().unwrap());
        equations.push(Equation {
            name: name.clone(),
            expr: e.clone(),
            leading,
            lead_coeff: c,
            solved,
        });
    }
    for (i, a) in equations.iter().enumerate() {
        for b in &equations[..i] {
            if a.leading == b.leading {
                return Err(SystemError::Duplicate(
                    Expr::atom(Atom::Jet(a.leading.clone())).to_string(),
                ));
            }
        }
    }
    for eq in &equations {
        for j in eq.solved.jet_vars_deep() {
            if equations
                .iter()
                .any(|l| l.leading.dep == j.dep && j.index.contains(&l.leading.index))
            {
                return Err(SystemError::InRemainder(eq.name.clone()));
            }
        }
    }
    let adjoint = adjoint_symbols(&draft.indep, &draft.dep, equations.len());
    let base_rank = draft
        .dep
        .iter()
        .map(|d| d.rank())
        .max()
        .map_or(0, |r| r + 1);
    let hats = (0..equations.len())
        .map(|b| Sym::new(base_rank + 2000 + b as u32, format!("Ehat{}", b + 1)))
        .collect();
    let sys = PdeSystem {
        indep: draft.indep,
        dep: draft.dep,
        equations,
        rules: draft.rules,
        adjoint,
        hats,
        cache: Mutex::new(HashMap::new()),
    };
    // probe low-order consequences so cyclic solved forms fail here
    let probes: Vec<MultiIndex> = std::iter::once(MultiIndex::empty())
        .chain(sys.indep.iter().map(|v| MultiIndex::from_vars([v])))
        .chain(
            sys.indep
                .iter()
                .flat_map(|v| sys.indep.iter().map(move |w| MultiIndex::from_vars([v, w]))),
        )
        .collect();
    for a in 0..sys.equations.len() {
        for j in &probes {
            sys.try_reduced_leading(false, a, j, 0)?;
        }
    }
    Ok(sys)
}

impl PdeSystem {
    pub fn indep(&self) -> &[Sym] {
        &self.indep
    }

    pub fn dep(&self) -> &[Sym] {
        &self.dep
    }

    pub fn equations(&self) -> &[Equation] {
        &self.equations
    }

    pub fn rules(&self) -> &RuleSet {
        &self.rules
    }

    /// The same system with a different rule set.
    pub fn with_rules(&self, rules: RuleSet) -> PdeSystem {
        let mut s = self.clone();
        s.rules = rules;
        s
    }

    /// Dependent variables `v^β` adjoined by the formal Lagrangian, one per
    /// equation.
    pub fn adjoint_vars(&self) -> &[Sym] {
        &self.adjoint
    }

    /// Fresh dependent variables standing for the equations themselves,
    /// used by E-decompositions.
    pub fn equation_vars(&self) -> &[Sym] {
        &self.hats
    }

    /// Maximal derivative order of the equations.
    pub fn order(&self) -> u32 {
        self.equations
            .iter()
            .map(|e| jet_order(&e.expr))
            .max()
            .unwrap_or(0)
    }

    fn leading_match(&self, j: &JetVar) -> Option<(usize, MultiIndex)> {
        self.equations.iter().enumerate().find_map(|(a, eq)| {
            (eq.leading.dep == j.dep)
                .then(|| j.index.sub(&eq.leading.index))
                .flatten()
                .map(|rest| (a, rest))
        })
    }

    fn try_reduced_leading(
        &self,
        augmented: bool,
        a: usize,
        j: &MultiIndex,
        depth: usize,
    ) -> Result<Expr, SystemError> {
        let key = (augmented, a, j.clone());
        if let Some(e) = self.cache.lock().unwrap().get(&key) {
            return Ok(e.clone());
        }
        if depth > MAX_REDUCTION_DEPTH {
            let eq = &self.equations[a];
            return Err(SystemError::NonTerminating(
                Expr::atom(Atom::jet(&eq.leading.dep, eq.leading.index.add(j))).to_string(),
            ));
        }
        let raw = match j.entries().first() {
            None => {
                let eq = &self.equations[a];
                if augmented {
                    let hat = Expr::jet(&self.hats[a], MultiIndex::empty());
                    &eq.solved + &hat.scale(&eq.lead_coeff.inv().unwrap())
                } else {
                    eq.solved.clone()
                }
            }
            Some((v, _)) => {
                let prev =
                    self.try_reduced_leading(augmented, a, &j.without(v).unwrap(), depth + 1)?;
                total_derivative(&prev, v)
            }
        };
        let out = self.try_reduce(&raw, augmented, depth + 1)?;
        self.cache.lock().unwrap().insert(key, out.clone());
        Ok(out)
    }

    fn try_reduce(&self, e: &Expr, augmented: bool, depth: usize) -> Result<Expr, SystemError> {
        let mut cur = e.clone();
        for _ in 0..MAX_REDUCTION_DEPTH {
            let mut err = None;
            let next = cur.map_atoms(&mut |atom| {
                let j = atom.as_jet()?;
                let (a, rest) = self.leading_match(j)?;
                match self.try_reduced_leading(augmented, a, &rest, depth + 1) {
                    Ok(r) => Some(r),
                    Err(e) => {
                        err = Some(e);
                        Some(Expr::zero())
                    }
                }
            });
            if let Some(e) = err {
                return Err(e);
            }
            let next = self.rules.apply(&next);
            if next == cur {
                return Ok(cur);
            }
            cur = next;
        }
        Err(SystemError::NonTerminating(e.to_string()))
    }

    /// Normal form on the solution manifold: every leading derivative and
    /// its derivatives replaced through the solved forms, rules applied.
    pub fn reduce(&self, e: &Expr) -> Expr {
        self.try_reduce(e, false, 0)
            .expect("solved forms were checked for termination at construction")
    }

    /// Like [`reduce`](Self::reduce) but keeps track of the equations:
    /// each leading atom `L^β` becomes `R^β + Ê^β / c`, with `Ê^β` an
    /// [`equation_vars`](Self::equation_vars) atom. The result equals the
    /// input identically once `Ê^β_J` is read as `D_J E^β`.
    pub fn reduce_tracking(&self, e: &Expr) -> Expr {
        self.try_reduce(e, true, 0)
            .expect("solved forms were checked for termination at construction")
    }

    pub fn is_zero_on_solutions(&self, e: &Expr) -> bool {
        self.reduce(e).is_zero()
    }

    /// Total derivative followed by reduction on solutions.
    pub fn total_derivative_on_solutions(&self, e: &Expr, i: &Sym) -> Expr {
        self.reduce(&total_derivative(e, i))
    }

    /// Replaces atoms `w^β_J` of the given dependent variables by
    /// `D_J φ^β`.
    pub fn substitute_dependents(&self, e: &Expr, vars: &[Sym], values: &[Expr]) -> Expr {
        let mut bindings = BTreeMap::new();
        for j in e.jet_vars_deep() {
            if let Some(k) = vars.iter().position(|v| *v == j.dep) {
                bindings.insert(
                    Atom::Jet(j.clone()),
                    total_derivative_multi(&values[k], &j.index),
                );
            }
        }
        e.substitute(&bindings)
    }

    /// Reads `Ê^β_J` atoms as `D_J E^β`.
    pub fn expand_equation_vars(&self, e: &Expr) -> Expr {
        let values: Vec<Expr> = self.equations.iter().map(|q| q.expr.clone()).collect();
        self.substitute_dependents(e, &self.hats, &values)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbol::Param;

    pub(crate) struct Wave {
        pub x: Sym,
        pub t: Sym,
        pub u: Sym,
        pub sys: PdeSystem,
    }

    fn wave() -> Wave {
        let t = Sym::new(0, "t");
        let x = Sym::new(1, "x");
        let u = Sym::new(0, "u");
        let uu = Expr::jet(&u, MultiIndex::empty());
        let e = &(&Expr::deriv(&u, &[&t, &t]) - &(&uu.pow(2) * &Expr::deriv(&u, &[&x, &x])))
            - &(&uu * &Expr::deriv(&u, &[&x]).pow(2));
        let sys = solve_leading(SystemDraft {
            indep: vec![t.clone(), x.clone()],
            dep: vec![u.clone()],
            equations: vec![("wave".into(), e, None)],
            rules: RuleSet::empty(),
        })
        .unwrap();
        Wave { x, t, u, sys }
    }

    #[test]
    fn total_derivative_examples() {
        let w = wave();
        let u = Expr::jet(&w.u, MultiIndex::empty());
        let ut = Expr::deriv(&w.u, &[&w.t]);
        let got = total_derivative(&(&u * &ut), &w.x);
        let expected =
            &(&Expr::deriv(&w.u, &[&w.x]) * &ut) + &(&u * &Expr::deriv(&w.u, &[&w.x, &w.t]));
        assert_eq!(got, expected);

        let xu = &Expr::indep(&w.x) * &u;
        let got = total_derivative_multi(&xu, &MultiIndex::from_vars([&w.x, &w.x]));
        let expected = &Expr::deriv(&w.u, &[&w.x]).scale(&Coeff::from_int(2))
            + &(&Expr::indep(&w.x) * &Expr::deriv(&w.u, &[&w.x, &w.x]));
        assert_eq!(got, expected);
        assert_eq!(total_derivative_multi(&xu, &MultiIndex::empty()), xu);
    }

    #[test]
    fn total_derivative_of_exponential_and_function() {
        let w = wave();
        let g = Param::new(0, "gamma", true);
        let u = Expr::jet(&w.u, MultiIndex::empty());
        let e = Expr::exp(&(&Expr::param(&g) * &u));
        let got = total_derivative(&e, &w.t);
        assert_eq!(got, &(&Expr::param(&g) * &Expr::deriv(&w.u, &[&w.t])) * &e);

        let gf = crate::expr::FuncAtom::new(Sym::new(0, "g"), vec![u.clone()]);
        let got = total_derivative(&Expr::func(gf.clone()), &w.x);
        assert_eq!(
            got,
            &Expr::func(gf.derive_slot(0)) * &Expr::deriv(&w.u, &[&w.x])
        );
    }

    #[test]
    fn wave_reduction() {
        let w = wave();
        let u = Expr::jet(&w.u, MultiIndex::empty());
        let ux = Expr::deriv(&w.u, &[&w.x]);
        let uxx = Expr::deriv(&w.u, &[&w.x, &w.x]);
        let rhs = &(&u.pow(2) * &uxx) + &(&u * &ux.pow(2));
        assert_eq!(w.sys.reduce(&Expr::deriv(&w.u, &[&w.t, &w.t])), rhs);
        // D_x by hand
        let uxxx = Expr::deriv(&w.u, &[&w.x, &w.x, &w.x]);
        let hand =
            &(&(&(&u * &ux) * &uxx).scale(&Coeff::from_int(4)) + &(&u.pow(2) * &uxxx)) + &ux.pow(3);
        assert_eq!(w.sys.reduce(&Expr::deriv(&w.u, &[&w.t, &w.t, &w.x])), hand);
        assert_eq!(
            w.sys.equations()[0].leading,
            JetVar::new(w.u.clone(), MultiIndex::from_vars([&w.t, &w.t]))
        );
        assert!(w.sys.reduce(&w.sys.equations()[0].expr).is_zero());
    }

    #[test]
    fn nonlinear_leading_rejected() {
        let t = Sym::new(0, "t");
        let x = Sym::new(1, "x");
        let u = Sym::new(0, "u");
        let e = &Expr::deriv(&u, &[&t]).pow(2) - &Expr::deriv(&u, &[&x]);
        let err = solve_leading(SystemDraft {
            indep: vec![t.clone(), x],
            dep: vec![u.clone()],
            equations: vec![(
                "e".into(),
                e,
                Some(JetVar::new(u, MultiIndex::from_vars([&t]))),
            )],
            rules: RuleSet::empty(),
        })
        .unwrap_err();
        assert!(matches!(err, SystemError::Nonlinear(_)));
    }

    #[test]
    fn leading_in_remainder_rejected() {
        let t = Sym::new(0, "t");
        let x = Sym::new(1, "x");
        let u = Sym::new(0, "u");
        let e = &Expr::deriv(&u, &[&t]) - &Expr::deriv(&u, &[&t, &x]);
        let err = solve_leading(SystemDraft {
            indep: vec![t.clone(), x],
            dep: vec![u.clone()],
            equations: vec![(
                "e".into(),
                e,
                Some(JetVar::new(u, MultiIndex::from_vars([&t]))),
            )],
            rules: RuleSet::empty(),
        })
        .unwrap_err();
        assert!(matches!(err, SystemError::InRemainder(_)));
    }

    #[test]
    fn tracking_reduction_is_an_identity() {
        let w = wave();
        let e = &Expr::deriv(&w.u, &[&w.t, &w.t, &w.x]) * &Expr::indep(&w.x);
        let tracked = w.sys.reduce_tracking(&e);
        assert_eq!(w.sys.expand_equation_vars(&tracked), e);
    }
}
