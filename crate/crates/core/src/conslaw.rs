//! Conserved vectors from symmetries and adjoint symmetries, and their
//! verification on solutions.

use std::sync::atomic::{AtomicBool, Ordering};
use std::sync::Arc;
use std::time::Instant;

use thiserror::Error;

use crate::determining::{e_decompose, EDecomposition};
use crate::expr::{Atom, Coeff, Expr};
use crate::jet::{total_derivative, total_derivative_multi, PdeSystem};
use crate::variational::{formal_lagrangian, jet_atoms_of};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("cancelled")]
pub struct Cancelled;

/// Cooperative cancellation, checked between passes of long computations.
#[derive(Clone, Debug, Default)]
pub struct CancelToken {
    flag: Arc<AtomicBool>,
    deadline: Option<Instant>,
}

impl CancelToken {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with_deadline(deadline: Instant) -> Self {
        CancelToken {
            flag: Arc::default(),
            deadline: Some(deadline),
        }
    }

    pub fn cancel(&self) {
        self.flag.store(true, Ordering::SeqCst);
    }

    pub fn is_cancelled(&self) -> bool {
        self.flag.load(Ordering::SeqCst) || self.deadline.is_some_and(|d| Instant::now() >= d)
    }

    pub fn check(&self) -> Result<(), Cancelled> {
        if self.is_cancelled() {
            Err(Cancelled)
        } else {
            Ok(())
        }
    }
}

/// `X = ξ^i ∂_{x^i} + η^σ ∂_{u^σ}`.
#[derive(Clone, Debug, PartialEq)]
pub struct Generator {
    pub xi: Vec<Expr>,
    pub eta: Vec<Expr>,
}

impl Generator {
    /// Evolutionary generator `η^σ ∂_{u^σ}`.
    pub fn evolutionary(sys: &PdeSystem, eta: Vec<Expr>) -> Self {
        Generator {
            xi: vec![Expr::zero(); sys.indep().len()],
            eta,
        }
    }
}

/// `W^σ = η^σ - ξ^j u^σ_j`.
pub fn characteristic_w(sys: &PdeSystem, g: &Generator) -> Vec<Expr> {
    sys.dep()
        .iter()
        .zip(&g.eta)
        .map(|(u, eta)| {
            let mut w = eta.clone();
            for (x, xi) in sys.indep().iter().zip(&g.xi) {
                w = &w - &(xi * &Expr::deriv(u, &[x]));
            }
            w
        })
        .collect()
}

/// Conserved vector with all intermediate forms.
#[derive(Clone, Debug, PartialEq)]
pub struct ConservedVector {
    /// Reduced on solutions after substitution.
    pub components: Vec<Expr>,
    /// After substitution, before reduction.
    pub unreduced: Vec<Expr>,
    /// With the adjoint variables still symbolic.
    pub symbolic: Vec<Expr>,
}

/// Conserved-vector formula with symbolic adjoint variables.
///
/// For each jet atom `u^σ_K` of the formal Lagrangian and each `i` in `K`,
/// write `K = T + S + i`; the term
/// `(-1)^|S| N(T) N(S) / N(K) · D_T(W^σ) · D_S(∂𝓛/∂u^σ_K)` contributes to `C^i`,
/// where `N` counts the orderings of a multi-index. The weights split the
/// coefficient of a mixed derivative evenly over all its orderings.
pub fn ibragimov_symbolic(sys: &PdeSystem, g: &Generator) -> Vec<Expr> {
    let lag = formal_lagrangian(sys).expr;
    let w = characteristic_w(sys, g);
    let mut out: Vec<Expr> = g.xi.iter().map(|xi| xi * &lag).collect();
    for (s, u) in sys.dep().iter().enumerate() {
        for jet in jet_atoms_of(&lag, u) {
            let k = &jet.index;
            if k.is_empty() {
                continue;
            }
            let dl = lag.partial(&Atom::Jet(jet.clone()));
            for (i, x) in sys.indep().iter().enumerate() {
                let Some(m) = k.without(x) else { continue };
                for t in m.sub_indices() {
                    let rest = m.sub(&t).unwrap();
                    let weight = Coeff::rational(
                        (t.orderings() * rest.orderings()) as i64,
                        k.orderings() as i64,
                    );
                    let weight = if rest.order() % 2 == 0 {
                        weight
                    } else {
                        -weight
                    };
                    let term =
                        &total_derivative_multi(&w[s], &t) * &total_derivative_multi(&dl, &rest);
                    out[i] += term.scale(&weight);
                }
            }
        }
    }
    out
}

/// Conserved vector for the generator `g` and the substitution `v = φ`.
pub fn ibragimov_vector(sys: &PdeSystem, g: &Generator, phi: &[Expr]) -> ConservedVector {
    let symbolic = ibragimov_symbolic(sys, g);
    let unreduced: Vec<Expr> = symbolic
        .iter()
        .map(|c| sys.substitute_dependents(c, sys.adjoint_vars(), phi))
        .collect();
    let components = unreduced.iter().map(|c| sys.reduce(c)).collect();
    ConservedVector {
        components,
        unreduced,
        symbolic,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerificationReport {
    /// `D_i C^i` reduced on solutions; zero on success.
    pub reduced_divergence: Expr,
    /// `D_i C^i = Σ M_β^J D_J E^β + S`.
    pub identity: EDecomposition,
    /// Some component is nonzero on solutions.
    pub nontrivial: bool,
}

impl VerificationReport {
    pub fn success(&self) -> bool {
        self.reduced_divergence.is_zero()
    }
}

pub fn divergence(sys: &PdeSystem, c: &[Expr]) -> Expr {
    sys.indep()
        .iter()
        .zip(c)
        .map(|(x, ci)| total_derivative(ci, x))
        .sum()
}

pub fn verify_divergence(
    sys: &PdeSystem,
    c: &[Expr],
    cancel: &CancelToken,
) -> Result<VerificationReport, Cancelled> {
    let mut div = Expr::zero();
    for (x, ci) in sys.indep().iter().zip(c) {
        cancel.check()?;
        div += total_derivative(ci, x);
    }
    cancel.check()?;
    let identity = e_decompose(&div, sys);
    cancel.check()?;
    let nontrivial = c.iter().any(|ci| !sys.reduce(ci).is_zero());
    Ok(VerificationReport {
        reduced_divergence: identity.remainder.clone(),
        identity,
        nontrivial,
    })
}

/// How two conserved vectors were found to agree.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Agreement {
    /// `C = s P` on solutions, componentwise.
    OnSolutions,
    /// `C - s P` is a trivial conserved vector: its characteristic vanishes
    /// on solutions.
    UpToTrivial,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Equivalence {
    /// `C ≗ scale · P`.
    pub scale: Coeff,
    pub agreement: Agreement,
    /// `C - scale · P` reduced on solutions.
    pub discrepancy: Vec<Expr>,
}

/// Characteristic `Q_β = Σ_J (-D)_J M_β^J` of a divergence identity.
pub fn characteristic_of(sys: &PdeSystem, d: &EDecomposition) -> Vec<Expr> {
    let mut q = vec![Expr::zero(); sys.equations().len()];
    for ((b, j), m) in &d.terms {
        let s = if j.order() % 2 == 0 {
            Coeff::one()
        } else {
            Coeff::from_int(-1)
        };
        q[*b] += total_derivative_multi(m, j).scale(&s);
    }
    q
}

/// `s` with `a = s b`, if it exists and is a nonzero constant.
fn ratio(a: &[Expr], b: &[Expr]) -> Option<Coeff> {
    let (i, (m, cb)) = b
        .iter()
        .enumerate()
        .find_map(|(i, e)| e.terms().next().map(|t| (i, t)))?;
    let s = a[i].coefficient(m).div(cb)?;
    if s.is_zero() {
        return None;
    }
    a.iter().zip(b).all(|(x, y)| *x == y.scale(&s)).then_some(s)
}

fn reduced_characteristic(sys: &PdeSystem, c: &[Expr]) -> Vec<Expr> {
    let d = e_decompose(&divergence(sys, c), sys);
    characteristic_of(sys, &d)
        .iter()
        .map(|q| sys.reduce(q))
        .collect()
}

/// Compares `ours` with `reference` up to a nonzero constant factor,
/// reduction on solutions and trivial conserved vectors.
pub fn equivalent_vectors(
    sys: &PdeSystem,
    ours: &[Expr],
    reference: &[Expr],
) -> Option<Equivalence> {
    let red_ours: Vec<Expr> = ours.iter().map(|c| sys.reduce(c)).collect();
    let red_ref: Vec<Expr> = reference.iter().map(|c| sys.reduce(c)).collect();
    let mut scales = Vec::new();
    scales.extend(ratio(&red_ours, &red_ref));
    scales.extend(ratio(
        &reduced_characteristic(sys, ours),
        &reduced_characteristic(sys, reference),
    ));
    scales.extend([Coeff::one(), Coeff::from_int(-1)]);
    let mut tried: Vec<Coeff> = Vec::new();
    for s in scales {
        if tried.contains(&s) {
            continue;
        }
        tried.push(s.clone());
        let diff: Vec<Expr> = ours
            .iter()
            .zip(reference)
            .map(|(c, p)| c - &p.scale(&s))
            .collect();
        let discrepancy: Vec<Expr> = diff.iter().map(|d| sys.reduce(d)).collect();
        if discrepancy.iter().all(Expr::is_zero) {
            return Some(Equivalence {
                scale: s,
                agreement: Agreement::OnSolutions,
                discrepancy,
            });
        }
        let d = e_decompose(&divergence(sys, &diff), sys);
        if d.remainder.is_zero()
            && d.is_linear()
            && characteristic_of(sys, &d)
                .iter()
                .all(|q| sys.reduce(q).is_zero())
        {
            return Some(Equivalence {
                scale: s,
                agreement: Agreement::UpToTrivial,
                discrepancy,
            });
        }
    }
    None
}
