//! Determining systems: symmetries, adjoint symmetries, differential
//! substitutions, self-adjointness and multipliers, plus the decomposition
//! of an expression into equation-proportional and on-solution parts.

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

use crate::expr::{Atom, Expr, MultiIndex};
use crate::jet::{total_derivative_multi, PdeSystem};
use crate::variational::{adjoint_linearize, adjoint_system, euler, linearize};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DeterminingError {
    #[error("trivial substitution")]
    TrivialSubstitution,
    #[error("not nonlinearly self-adjoint with point substitution")]
    NotSelfAdjoint,
    #[error("requires differential substitution")]
    RequiresDifferential,
    #[error("expected {expected} components, got {got}")]
    Arity { expected: usize, got: usize },
}

/// `e = Σ M_β^J D_J E^β + S`, with `S` reduced on solutions.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct EDecomposition {
    /// Keyed by (equation index β, multi-index J).
    pub terms: BTreeMap<(usize, MultiIndex), Expr>,
    pub remainder: Expr,
    /// Part of degree at least two in the equations (still written with the
    /// tracking variables).
    pub quadratic: Expr,
}

impl EDecomposition {
    pub fn is_linear(&self) -> bool {
        self.quadratic.is_zero()
    }

    /// True when `e` vanishes on solutions.
    pub fn vanishes_on_solutions(&self) -> bool {
        self.remainder.is_zero()
    }

    /// Rebuilds the decomposed expression with the equations written out.
    pub fn reassemble(&self, sys: &PdeSystem) -> Expr {
        let mut out = &self.remainder + &sys.expand_equation_vars(&self.quadratic);
        for ((b, j), m) in &self.terms {
            out += m * &total_derivative_multi(&sys.equations()[*b].expr, j);
        }
        out
    }
}

/// Separates the equation-proportional content of `e`.
///
/// Every leading derivative `L^β_J` is replaced through `E^β = c(L^β - R^β)`
/// with `E^β` kept as a tracking variable, then the result is collected over
/// the tracking variables. Without rewrite rules the decomposition is an
/// exact identity; with rules it holds modulo the rules.
pub fn e_decompose(e: &Expr, sys: &PdeSystem) -> EDecomposition {
    let tracked = sys.reduce_tracking(e);
    let hats = sys.equation_vars();
    let is_hat = |a: &Atom| matches!(a, Atom::Jet(j) if hats.contains(&j.dep));
    let parts = tracked.collect_by(&mut |a| is_hat(a));
    let mut out = EDecomposition::default();
    for (mono, coeff) in parts {
        if mono.is_one() {
            out.remainder = coeff;
            continue;
        }
        let linear = match mono.factors() {
            [(Atom::Jet(j), 1)] => Some(j.clone()),
            _ => None,
        };
        let nested = coeff.atoms_deep().iter().any(is_hat);
        match linear {
            Some(j) if !nested => {
                let b = hats.iter().position(|h| *h == j.dep).unwrap();
                out.terms.insert((b, j.index), coeff);
            }
            _ => out.quadratic += &Expr::term(mono, crate::expr::Coeff::one()) * &coeff,
        }
    }
    // tracking variables hidden inside exponentials or function arguments
    if out.remainder.atoms_deep().iter().any(is_hat) {
        let r = std::mem::take(&mut out.remainder);
        out.quadratic += r;
    }
    out
}

fn check_arity(expected: usize, got: &[Expr]) -> Result<(), DeterminingError> {
    if expected == got.len() {
        Ok(())
    } else {
        Err(DeterminingError::Arity {
            expected,
            got: got.len(),
        })
    }
}

/// `ℒ_E η` reduced on solutions, one entry per equation.
pub fn symmetry_residual(sys: &PdeSystem, eta: &[Expr]) -> Result<Vec<Expr>, DeterminingError> {
    check_arity(sys.dep().len(), eta)?;
    Ok(linearize(sys, eta)
        .0
        .iter()
        .map(|e| sys.reduce(e))
        .collect())
}

/// `ℒ*_E ω` reduced on solutions, one entry per dependent variable.
pub fn adjoint_symmetry_residual(
    sys: &PdeSystem,
    omega: &[Expr],
) -> Result<Vec<Expr>, DeterminingError> {
    check_arity(sys.equations().len(), omega)?;
    Ok(adjoint_linearize(sys, omega)
        .0
        .iter()
        .map(|e| sys.reduce(e))
        .collect())
}

fn is_trivial(sys: &PdeSystem, phi: &[Expr]) -> bool {
    phi.iter().all(|p| sys.reduce(p).is_zero())
}

/// The adjoint system with `v^β_J` replaced by `D_J φ^β`, unreduced.
pub fn substituted_adjoint_system(sys: &PdeSystem, phi: &[Expr]) -> Vec<Expr> {
    adjoint_system(sys)
        .iter()
        .map(|e| sys.substitute_dependents(e, sys.adjoint_vars(), phi))
        .collect()
}

/// Adjoint system after the substitution `v = φ`, reduced on solutions.
pub fn differential_substitution_residual(
    sys: &PdeSystem,
    phi: &[Expr],
) -> Result<Vec<Expr>, DeterminingError> {
    check_arity(sys.equations().len(), phi)?;
    if is_trivial(sys, phi) {
        return Err(DeterminingError::TrivialSubstitution);
    }
    Ok(substituted_adjoint_system(sys, phi)
        .iter()
        .map(|e| sys.reduce(e))
        .collect())
}

/// Coefficients `λ_α^β` with `(E^α)^*|_{v=φ} = λ_α^β E^β` for a point
/// substitution `φ(x, u)`.
pub fn selfadjoint_lambda(
    sys: &PdeSystem,
    phi: &[Expr],
) -> Result<Vec<Vec<Expr>>, DeterminingError> {
    check_arity(sys.equations().len(), phi)?;
    let has_derivatives = phi
        .iter()
        .flat_map(|p| p.jet_vars_deep())
        .any(|j| !j.index.is_empty() && sys.dep().contains(&j.dep));
    if has_derivatives {
        return Err(DeterminingError::RequiresDifferential);
    }
    if is_trivial(sys, phi) {
        return Err(DeterminingError::TrivialSubstitution);
    }
    let mut lambda = Vec::new();
    for e in substituted_adjoint_system(sys, phi) {
        let d = e_decompose(&e, sys);
        if !d.remainder.is_zero() {
            return Err(DeterminingError::NotSelfAdjoint);
        }
        if !d.is_linear() || d.terms.keys().any(|(_, j)| !j.is_empty()) {
            return Err(DeterminingError::RequiresDifferential);
        }
        lambda.push(
            (0..sys.equations().len())
                .map(|b| {
                    d.terms
                        .get(&(b, MultiIndex::empty()))
                        .cloned()
                        .unwrap_or_default()
                })
                .collect(),
        );
    }
    Ok(lambda)
}

/// `δ(Λ_β E^β)/δu^σ` for arbitrary `u`, one entry per dependent variable.
pub fn multiplier_residual(sys: &PdeSystem, lam: &[Expr]) -> Result<Vec<Expr>, DeterminingError> {
    check_arity(sys.equations().len(), lam)?;
    let density: Expr = lam
        .iter()
        .zip(sys.equations())
        .map(|(l, eq)| l * &eq.expr)
        .sum();
    Ok(sys.dep().iter().map(|u| euler(&density, u)).collect())
}

/// One nonvanishing coefficient `M_β^J` of the multiplier residual.
#[derive(Clone, Debug, PartialEq)]
pub struct ExtraCondition {
    pub component: usize,
    pub equation: usize,
    pub index: MultiIndex,
    pub expr: Expr,
}

#[derive(Clone, Debug, PartialEq)]
pub struct InvarianceConditions {
    /// On-solution part, equal to the adjoint-symmetry residual.
    pub adjoint_part: Vec<Expr>,
    /// Conditions beyond the adjoint-symmetry equations; a multiplier needs
    /// all of them to vanish.
    pub extra: Vec<ExtraCondition>,
    /// Content of degree at least two in the equations, per component.
    pub quadratic: Vec<Expr>,
}

impl InvarianceConditions {
    pub fn all_vanish(&self) -> bool {
        self.adjoint_part.iter().all(Expr::is_zero)
            && self.extra.is_empty()
            && self.quadratic.iter().all(Expr::is_zero)
    }
}

pub fn adjoint_invariance_conditions(
    sys: &PdeSystem,
    lam: &[Expr],
) -> Result<InvarianceConditions, DeterminingError> {
    let mut out = InvarianceConditions {
        adjoint_part: Vec::new(),
        extra: Vec::new(),
        quadratic: Vec::new(),
    };
    for (k, e) in multiplier_residual(sys, lam)?.iter().enumerate() {
        let d = e_decompose(e, sys);
        out.adjoint_part.push(d.remainder);
        out.quadratic.push(d.quadratic);
        for ((b, j), m) in d.terms {
            out.extra.push(ExtraCondition {
                component: k,
                equation: b,
                index: j,
                expr: m,
            });
        }
    }
    Ok(out)
}

/// Dependent-variable atoms a characteristic may not contain on solutions.
pub fn leading_atoms_in(sys: &PdeSystem, e: &Expr) -> BTreeSet<Atom> {
    e.jet_vars_deep()
        .into_iter()
        .filter(|j| {
            sys.equations()
                .iter()
                .any(|q| q.leading.dep == j.dep && j.index.contains(&q.leading.index))
        })
        .map(Atom::Jet)
        .collect()
}
