//! Euler operator, formal Lagrangian, linearization and its formal adjoint.

use std::collections::{BTreeMap, BTreeSet};

use crate::expr::{Atom, Coeff, Expr, JetVar, MultiIndex};
use crate::jet::{total_derivative_multi, PdeSystem};
use crate::symbol::Sym;

fn sign(j: &MultiIndex) -> Coeff {
    if j.order().is_multiple_of(2) {
        Coeff::one()
    } else {
        Coeff::from_int(-1)
    }
}

/// Jet atoms of `dep` occurring anywhere in `e`, lowest order first.
pub fn jet_atoms_of(e: &Expr, dep: &Sym) -> Vec<JetVar> {
    let mut v: Vec<JetVar> = e
        .jet_vars_deep()
        .into_iter()
        .filter(|j| j.dep == *dep)
        .collect();
    v.sort_by(|a, b| a.index.cmp(&b.index));
    v
}

/// Variational derivative `Σ_J (-1)^|J| D_J ∂e/∂u^σ_J`.
pub fn euler(e: &Expr, sigma: &Sym) -> Expr {
    let mut out = Expr::zero();
    for j in jet_atoms_of(e, sigma) {
        let p = e.partial(&Atom::Jet(j.clone()));
        out += total_derivative_multi(&p, &j.index).scale(&sign(&j.index));
    }
    out
}

/// `v^β E^β` together with the list of mixed derivatives it contains.
///
/// Mixed atoms such as `u_{xt}` are stored once; the conserved-vector formula
/// splits their coefficient evenly over the distinct orderings, which is
/// what the `mixed` list records.
#[derive(Clone, Debug, PartialEq)]
pub struct FormalLagrangian {
    pub expr: Expr,
    pub adjoint: Vec<Sym>,
    pub mixed: Vec<(JetVar, u64)>,
}

pub fn formal_lagrangian(sys: &PdeSystem) -> FormalLagrangian {
    let adjoint = sys.adjoint_vars().to_vec();
    let expr = sys
        .equations()
        .iter()
        .zip(&adjoint)
        .map(|(eq, v)| &Expr::jet(v, MultiIndex::empty()) * &eq.expr)
        .sum();
    let mixed = sys
        .equations()
        .iter()
        .flat_map(|eq| eq.expr.jet_vars_deep())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .filter(|j| j.index.entries().len() >= 2)
        .map(|j| {
            let n = j.index.orderings();
            (j, n)
        })
        .collect();
    FormalLagrangian {
        expr,
        adjoint,
        mixed,
    }
}

/// `(E^α)^* = δ𝓛/δu^α`, one per dependent variable.
pub fn adjoint_system(sys: &PdeSystem) -> Vec<Expr> {
    let l = formal_lagrangian(sys).expr;
    sys.dep().iter().map(|u| euler(&l, u)).collect()
}

/// Matrix of total-derivative operators `Σ_J a_J D_J`, indexed by
/// (row, column).
#[derive(Clone, Debug, PartialEq, Default)]
pub struct DiffOperator {
    pub rows: usize,
    pub cols: usize,
    pub entries: BTreeMap<(usize, usize), BTreeMap<MultiIndex, Expr>>,
}

impl DiffOperator {
    pub fn new(rows: usize, cols: usize) -> Self {
        DiffOperator {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn coefficient(&self, row: usize, col: usize, j: &MultiIndex) -> Expr {
        self.entries
            .get(&(row, col))
            .and_then(|m| m.get(j))
            .cloned()
            .unwrap_or_default()
    }

    pub fn add_coefficient(&mut self, row: usize, col: usize, j: MultiIndex, c: Expr) {
        if c.is_zero() {
            return;
        }
        let slot = self.entries.entry((row, col)).or_default();
        let sum = &slot.get(&j).cloned().unwrap_or_default() + &c;
        if sum.is_zero() {
            slot.remove(&j);
        } else {
            slot.insert(j, sum);
        }
        if slot.is_empty() {
            self.entries.remove(&(row, col));
        }
    }

    pub fn apply(&self, args: &[Expr]) -> Vec<Expr> {
        let mut out = vec![Expr::zero(); self.rows];
        for ((r, c), m) in &self.entries {
            for (j, a) in m {
                out[*r] += a * &total_derivative_multi(&args[*c], j);
            }
        }
        out
    }

    /// Formal adjoint: `Σ_J a_J D_J` becomes `Σ_J (-D)_J ∘ a_J`, expanded
    /// back into `Σ_K b_K D_K`, with rows and columns swapped.
    pub fn adjoint(&self) -> DiffOperator {
        let mut out = DiffOperator::new(self.cols, self.rows);
        for ((r, c), m) in &self.entries {
            for (j, a) in m {
                for k in j.sub_indices() {
                    let rest = j.sub(&k).unwrap();
                    let b = total_derivative_multi(a, &rest)
                        .scale(&(&sign(j) * &Coeff::from_int(j.binomial(&k) as i64)));
                    out.add_coefficient(*c, *r, k, b);
                }
            }
        }
        out
    }

    /// All (row, column, index) keys present in either operator, in order.
    pub fn keys_with(&self, other: &DiffOperator) -> Vec<(usize, usize, MultiIndex)> {
        let mut keys = BTreeSet::new();
        for op in [self, other] {
            for ((r, c), m) in &op.entries {
                for j in m.keys() {
                    keys.insert((*r, *c, j.clone()));
                }
            }
        }
        keys.into_iter().collect()
    }
}

/// Table `∂E^α/∂u^ρ_J`.
pub fn linearization_operator(sys: &PdeSystem) -> DiffOperator {
    let mut op = DiffOperator::new(sys.equations().len(), sys.dep().len());
    for (a, eq) in sys.equations().iter().enumerate() {
        for (r, u) in sys.dep().iter().enumerate() {
            for j in jet_atoms_of(&eq.expr, u) {
                let c = eq.expr.partial(&Atom::Jet(j.clone()));
                op.add_coefficient(a, r, j.index, c);
            }
        }
    }
    op
}

/// `(ℒ_E η)^α = Σ ∂E^α/∂u^ρ_J D_J η^ρ`, not reduced.
pub fn linearize(sys: &PdeSystem, eta: &[Expr]) -> (Vec<Expr>, DiffOperator) {
    let op = linearization_operator(sys);
    (op.apply(eta), op)
}

/// `(ℒ*_E ω)_ρ = Σ (-D)_J (ω_α ∂E^α/∂u^ρ_J)`, not reduced.
///
/// The expressions are computed directly from the definition; the returned
/// table is the formal adjoint of the linearization table.
pub fn adjoint_linearize(sys: &PdeSystem, omega: &[Expr]) -> (Vec<Expr>, DiffOperator) {
    let lin = linearization_operator(sys);
    let mut out = vec![Expr::zero(); sys.dep().len()];
    for ((a, r), m) in &lin.entries {
        for (j, c) in m {
            let inner = &omega[*a] * c;
            out[*r] += total_derivative_multi(&inner, j).scale(&sign(j));
        }
    }
    (out, lin.adjoint())
}

/// First entry where `ℒ_E` and `ℒ*_E` differ.
#[derive(Clone, Debug, PartialEq)]
pub struct Witness {
    pub row: usize,
    pub col: usize,
    pub index: MultiIndex,
    pub linearized: Expr,
    pub adjoint: Expr,
    /// `adjoint - linearized` reduced on solutions.
    pub difference: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VariationalCheck {
    pub variational: bool,
    pub witness: Option<Witness>,
}

/// Formal self-adjointness of the linearized system.
pub fn is_variational(sys: &PdeSystem) -> VariationalCheck {
    if sys.equations().len() != sys.dep().len() {
        return VariationalCheck {
            variational: false,
            witness: None,
        };
    }
    let lin = linearization_operator(sys);
    let adj = lin.adjoint();
    for (r, c, j) in lin.keys_with(&adj) {
        let a = lin.coefficient(r, c, &j);
        let b = adj.coefficient(r, c, &j);
        if a != b {
            let difference = sys.reduce(&(&b - &a));
            return VariationalCheck {
                variational: false,
                witness: Some(Witness {
                    row: r,
                    col: c,
                    index: j,
                    linearized: a,
                    adjoint: b,
                    difference,
                }),
            };
        }
    }
    VariationalCheck {
        variational: true,
        witness: None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{FuncAtom, RuleSet};
    use crate::jet::{solve_leading, total_derivative, SystemDraft};

    fn vars() -> (Sym, Sym, Sym) {
        (Sym::new(0, "t"), Sym::new(1, "x"), Sym::new(0, "u"))
    }

    fn wave_expr(t: &Sym, x: &Sym, u: &Sym) -> Expr {
        let uu = Expr::jet(u, MultiIndex::empty());
        &(&Expr::deriv(u, &[t, t]) - &(&uu.pow(2) * &Expr::deriv(u, &[x, x])))
            - &(&uu * &Expr::deriv(u, &[x]).pow(2))
    }

    fn system(e: Expr) -> PdeSystem {
        let (t, x, u) = vars();
        solve_leading(SystemDraft {
            indep: vec![t, x],
            dep: vec![u],
            equations: vec![("e".into(), e, None)],
            rules: RuleSet::empty(),
        })
        .unwrap()
    }

    #[test]
    fn euler_of_divergence_vanishes() {
        let (_, x, u) = vars();
        let uu = Expr::jet(&u, MultiIndex::empty());
        let e = total_derivative(&(&uu * &Expr::deriv(&u, &[&x])), &x);
        assert!(euler(&e, &u).is_zero());
    }

    #[test]
    fn euler_of_wave_action() {
        let (t, x, u) = vars();
        let uu = Expr::jet(&u, MultiIndex::empty());
        let half = Coeff::rational(1, 2);
        let kinetic = Expr::deriv(&u, &[&t]).pow(2).scale(&half);
        let potential = (&uu.pow(2) * &Expr::deriv(&u, &[&x]).pow(2)).scale(&half);
        assert_eq!(euler(&(&kinetic - &potential), &u), -wave_expr(&t, &x, &u));
        // with a plus sign the density is not a Lagrangian for this equation
        let plus = euler(&(&kinetic + &potential), &u);
        let expected = -(&(&Expr::deriv(&u, &[&t, &t])
            + &(&uu.pow(2) * &Expr::deriv(&u, &[&x, &x])))
            + &(&uu * &Expr::deriv(&u, &[&x]).pow(2)));
        assert_eq!(plus, expected);
    }

    #[test]
    fn wave_linearization_table() {
        let (t, x, u) = vars();
        let sys = system(wave_expr(&t, &x, &u));
        let op = linearization_operator(&sys);
        let uu = Expr::jet(&u, MultiIndex::empty());
        let ux = Expr::deriv(&u, &[&x]);
        let uxx = Expr::deriv(&u, &[&x, &x]);
        assert_eq!(
            op.coefficient(0, 0, &MultiIndex::empty()),
            -(&(&uu * &uxx).scale(&Coeff::from_int(2)) + &ux.pow(2))
        );
        assert_eq!(
            op.coefficient(0, 0, &MultiIndex::from_vars([&x])),
            (&uu * &ux).scale(&Coeff::from_int(-2))
        );
        assert_eq!(
            op.coefficient(0, 0, &MultiIndex::from_vars([&x, &x])),
            -uu.pow(2)
        );
        assert_eq!(
            op.coefficient(0, 0, &MultiIndex::from_vars([&t, &t])),
            Expr::one()
        );
        assert_eq!(op.adjoint(), op);
        assert!(is_variational(&sys).variational);
    }

    #[test]
    fn klein_gordon_adjoint_equation() {
        let (t, x, u) = vars();
        let g = FuncAtom::new(Sym::new(0, "g"), vec![Expr::jet(&u, MultiIndex::empty())]);
        let e =
            &(&Expr::deriv(&u, &[&t, &t]) - &Expr::deriv(&u, &[&x, &x])) - &Expr::func(g.clone());
        let sys = system(e);
        let v = &sys.adjoint_vars()[0];
        let expected = &(&Expr::deriv(v, &[&t, &t]) - &Expr::deriv(v, &[&x, &x]))
            - &(&Expr::func(g.derive_slot(0)) * &Expr::jet(v, MultiIndex::empty()));
        assert_eq!(adjoint_system(&sys), vec![expected]);
        assert!(is_variational(&sys).variational);
    }

    #[test]
    fn two_adjoint_paths_agree() {
        let (t, x, u) = vars();
        let sys = system(wave_expr(&t, &x, &u));
        let v = Expr::jet(&sys.adjoint_vars()[0], MultiIndex::empty());
        let (direct, table) = adjoint_linearize(&sys, std::slice::from_ref(&v));
        assert_eq!(direct, adjoint_system(&sys));
        assert_eq!(table.apply(&[v]), direct);
    }

    #[test]
    fn zero_characteristic_linearizes_to_zero() {
        let (t, x, u) = vars();
        let sys = system(wave_expr(&t, &x, &u));
        assert!(linearize(&sys, &[Expr::zero()]).0[0].is_zero());
    }
}
