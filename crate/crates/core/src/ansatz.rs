//! Undetermined coefficients: a linear combination of basis expressions is
//! substituted into a determining residual, split over jet monomials and
//! solved exactly.

use std::fmt;

use thiserror::Error;

use crate::determining::{
    adjoint_symmetry_residual, differential_substitution_residual, multiplier_residual,
    symmetry_residual, DeterminingError,
};
use crate::expr::{Coeff, Expr};
use crate::jet::PdeSystem;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum AnsatzError {
    #[error("empty basis")]
    EmptyBasis,
    #[error("basis element {0} is zero")]
    ZeroElement(usize),
    #[error("basis element {index} has {got} components, expected {expected}")]
    Arity {
        index: usize,
        expected: usize,
        got: usize,
    },
    #[error("solution {0} does not annihilate the residual")]
    Unsound(usize),
    #[error(transparent)]
    Determining(#[from] DeterminingError),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Target {
    Symmetry,
    AdjointSymmetry,
    Multiplier,
    DifferentialSubstitution,
}

impl Target {
    pub fn name(self) -> &'static str {
        match self {
            Target::Symmetry => "symmetry",
            Target::AdjointSymmetry => "adjoint-symmetry",
            Target::Multiplier => "multiplier",
            Target::DifferentialSubstitution => "differential-substitution",
        }
    }

    pub fn from_name(s: &str) -> Option<Target> {
        [
            Target::Symmetry,
            Target::AdjointSymmetry,
            Target::Multiplier,
            Target::DifferentialSubstitution,
        ]
        .into_iter()
        .find(|t| t.name() == s)
    }

    fn arity(self, sys: &PdeSystem) -> usize {
        match self {
            Target::Symmetry => sys.dep().len(),
            _ => sys.equations().len(),
        }
    }

    /// The residual; linear in `chi`.
    pub fn residual(self, sys: &PdeSystem, chi: &[Expr]) -> Result<Vec<Expr>, DeterminingError> {
        match self {
            Target::Symmetry => symmetry_residual(sys, chi),
            Target::AdjointSymmetry => adjoint_symmetry_residual(sys, chi),
            Target::Multiplier => multiplier_residual(sys, chi),
            // the nontriviality check does not apply to basis elements
            Target::DifferentialSubstitution => {
                if chi.iter().all(|c| sys.reduce(c).is_zero()) {
                    Ok(vec![Expr::zero(); sys.dep().len()])
                } else {
                    differential_substitution_residual(sys, chi)
                }
            }
        }
    }
}

impl fmt::Display for Target {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug)]
pub struct AnsatzProblem {
    pub system: PdeSystem,
    pub target: Target,
    /// Each element has one component per characteristic slot.
    pub basis: Vec<Vec<Expr>>,
}

impl AnsatzProblem {
    pub fn new(
        system: PdeSystem,
        target: Target,
        basis: Vec<Vec<Expr>>,
    ) -> Result<Self, AnsatzError> {
        if basis.is_empty() {
            return Err(AnsatzError::EmptyBasis);
        }
        let expected = target.arity(&system);
        for (i, b) in basis.iter().enumerate() {
            if b.len() != expected {
                return Err(AnsatzError::Arity {
                    index: i,
                    expected,
                    got: b.len(),
                });
            }
            if b.iter().all(Expr::is_zero) {
                return Err(AnsatzError::ZeroElement(i));
            }
        }
        Ok(AnsatzProblem {
            system,
            target,
            basis,
        })
    }

    /// `Σ c_k b_k` for a coefficient vector.
    pub fn combination(&self, c: &[Coeff]) -> Vec<Expr> {
        let n = self.basis[0].len();
        (0..n)
            .map(|slot| {
                self.basis
                    .iter()
                    .zip(c)
                    .map(|(b, ck)| b[slot].scale(ck))
                    .sum()
            })
            .collect()
    }
}

/// One homogeneous linear equation in the unknown constants.
#[derive(Clone, Debug, PartialEq)]
pub struct LinearRow {
    pub coeffs: Vec<Coeff>,
    /// Residual component and monomial that produced the row.
    pub component: usize,
    pub monomial: Expr,
}

/// Residual of every basis element, split over monomials in all atoms.
pub fn build_and_split(p: &AnsatzProblem) -> Result<Vec<LinearRow>, AnsatzError> {
    let n = p.basis.len();
    let residuals = p
        .basis
        .iter()
        .map(|b| p.target.residual(&p.system, b))
        .collect::<Result<Vec<_>, _>>()?;
    let mut rows: Vec<LinearRow> = Vec::new();
    let width = residuals[0].len();
    for comp in 0..width {
        let mut buckets: std::collections::BTreeMap<crate::expr::Monomial, Vec<Coeff>> =
            Default::default();
        for (k, r) in residuals.iter().enumerate() {
            for (m, c) in r[comp].terms() {
                buckets
                    .entry(m.clone())
                    .or_insert_with(|| vec![Coeff::zero(); n])[k] = c.clone();
            }
        }
        for (m, coeffs) in buckets {
            rows.push(LinearRow {
                coeffs,
                component: comp,
                monomial: Expr::term(m, Coeff::one()),
            });
        }
    }
    Ok(rows)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LinearSolveResult {
    /// Basis of the solution space; first nonzero entry of each vector is 1.
    pub nullspace: Vec<Vec<Coeff>>,
    /// Pivots assumed nonzero that are not nonzero by declaration.
    pub side_conditions: Vec<Expr>,
    /// Indices of the rows used as pivots.
    pub pivot_rows: Vec<usize>,
}

/// Gaussian elimination over the rational-function field of the
/// parameters. Parameters are generic: a pivot is any entry that is not
/// identically zero.
pub fn solve_linear(rows: &[LinearRow], unknowns: usize) -> LinearSolveResult {
    let mut m: Vec<Vec<Coeff>> = rows.iter().map(|r| r.coeffs.clone()).collect();
    let mut origin: Vec<usize> = (0..rows.len()).collect();
    let mut pivots: Vec<usize> = Vec::new();
    let mut side: Vec<Expr> = Vec::new();
    let mut pivot_rows = Vec::new();
    let mut r = 0;
    for col in 0..unknowns {
        let Some(p) = (r..m.len())
            .filter(|&i| !m[i][col].is_zero())
            .min_by_key(|&i| (!m[i][col].is_unit(), m[i][col].numer().len()))
        else {
            continue;
        };
        m.swap(r, p);
        origin.swap(r, p);
        let piv = m[r][col].clone();
        if !piv.is_unit() {
            let cond = Expr::from_coeff(Coeff::from_poly(piv.numer().monic()));
            if !side.contains(&cond) {
                side.push(cond);
            }
        }
        let inv = piv.inv().expect("nonzero pivot");
        for c in m[r].iter_mut() {
            *c = &*c * &inv;
        }
        let pivot = m[r].clone();
        for (i, row) in m.iter_mut().enumerate() {
            if i != r && !row[col].is_zero() {
                let f = row[col].clone();
                for (x, p) in row.iter_mut().zip(&pivot) {
                    if !p.is_zero() {
                        *x = &*x - &(&f * p);
                    }
                }
            }
        }
        pivots.push(col);
        pivot_rows.push(origin[r]);
        r += 1;
    }
    let mut nullspace = Vec::new();
    for free in (0..unknowns).filter(|c| !pivots.contains(c)) {
        let mut v = vec![Coeff::zero(); unknowns];
        v[free] = Coeff::one();
        for (i, &pc) in pivots.iter().enumerate() {
            v[pc] = -&m[i][free];
        }
        let lead = v.iter().find(|c| !c.is_zero()).unwrap().inv().unwrap();
        for c in v.iter_mut() {
            *c = &*c * &lead;
        }
        nullspace.push(v);
    }
    LinearSolveResult {
        nullspace,
        side_conditions: side,
        pivot_rows,
    }
}

#[derive(Clone, Debug)]
pub struct AnsatzSolution {
    pub rows: Vec<LinearRow>,
    pub result: LinearSolveResult,
    /// `Σ c_k b_k` for every nullspace vector.
    pub solutions: Vec<Vec<Expr>>,
}

/// Builds, solves and checks every solution against the residual.
pub fn solve(p: &AnsatzProblem) -> Result<AnsatzSolution, AnsatzError> {
    let rows = build_and_split(p)?;
    let result = solve_linear(&rows, p.basis.len());
    let mut solutions = Vec::new();
    for (k, v) in result.nullspace.iter().enumerate() {
        let chi = p.combination(v);
        if !p
            .target
            .residual(&p.system, &chi)?
            .iter()
            .all(Expr::is_zero)
        {
            return Err(AnsatzError::Unsound(k));
        }
        solutions.push(chi);
    }
    Ok(AnsatzSolution {
        rows,
        result,
        solutions,
    })
}

/// Whether `chi` lies in the span of the solutions.
pub fn in_span(solutions: &[Vec<Expr>], chi: &[Expr]) -> bool {
    // unknowns: one per solution plus the target itself
    let mut cols: Vec<&[Expr]> = solutions.iter().map(|s| s.as_slice()).collect();
    cols.push(chi);
    let n = cols.len();
    let mut rows = Vec::new();
    for comp in 0..chi.len() {
        let mut buckets: std::collections::BTreeMap<crate::expr::Monomial, Vec<Coeff>> =
            Default::default();
        for (k, c) in cols.iter().enumerate() {
            for (m, co) in c[comp].terms() {
                buckets
                    .entry(m.clone())
                    .or_insert_with(|| vec![Coeff::zero(); n])[k] = co.clone();
            }
        }
        rows.extend(buckets.into_iter().map(|(m, coeffs)| LinearRow {
            coeffs,
            component: comp,
            monomial: Expr::term(m, Coeff::one()),
        }));
    }
    let r = solve_linear(&rows, n);
    r.nullspace.iter().any(|v| !v[n - 1].is_zero())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::{MultiIndex, RuleSet};
    use crate::jet::{solve_leading, SystemDraft};
    use crate::symbol::{Param, Sym};

    fn row(c: Vec<Coeff>) -> LinearRow {
        LinearRow {
            coeffs: c,
            component: 0,
            monomial: Expr::one(),
        }
    }

    #[test]
    fn single_relation() {
        let r = solve_linear(&[row(vec![Coeff::one(), Coeff::one()])], 2);
        assert_eq!(r.nullspace, vec![vec![Coeff::one(), Coeff::from_int(-1)]]);
        assert!(r.side_conditions.is_empty());
    }

    #[test]
    fn declared_nonzero_pivot_needs_no_condition() {
        let g = Param::new(0, "gamma", true);
        let r = solve_linear(&[row(vec![Coeff::param(g)])], 1);
        assert!(r.nullspace.is_empty());
        assert!(r.side_conditions.is_empty());
        let a = Param::new(1, "alpha", false);
        let r = solve_linear(&[row(vec![Coeff::param(a.clone())])], 1);
        assert!(r.nullspace.is_empty());
        assert_eq!(r.side_conditions, vec![Expr::param(&a)]);
    }

    #[test]
    fn wave_adjoint_symmetry_ansatz() {
        let t = Sym::new(0, "t");
        let x = Sym::new(1, "x");
        let u = Sym::new(0, "u");
        let uu = Expr::jet(&u, MultiIndex::empty());
        let e = &(&Expr::deriv(&u, &[&t, &t]) - &(&uu.pow(2) * &Expr::deriv(&u, &[&x, &x])))
            - &(&uu * &Expr::deriv(&u, &[&x]).pow(2));
        let sys = solve_leading(SystemDraft {
            indep: vec![t, x.clone()],
            dep: vec![u.clone()],
            equations: vec![("wave".into(), e, None)],
            rules: RuleSet::empty(),
        })
        .unwrap();
        let xux = &Expr::indep(&x) * &Expr::deriv(&u, &[&x]);
        let p = AnsatzProblem::new(
            sys,
            Target::AdjointSymmetry,
            vec![vec![uu.clone()], vec![xux.clone()]],
        )
        .unwrap();
        let s = solve(&p).unwrap();
        assert_eq!(
            s.result.nullspace,
            vec![vec![Coeff::one(), Coeff::from_int(-1)]]
        );
        assert_eq!(s.solutions, vec![vec![&uu - &xux]]);
        assert!(in_span(
            &s.solutions,
            &[&xux.scale(&Coeff::from_int(-2)) + &uu.scale(&Coeff::from_int(2))]
        ));
        assert!(!in_span(&s.solutions, &[uu]));
    }

    #[test]
    fn zero_basis_rejected() {
        let sys = solve_leading(SystemDraft {
            indep: vec![Sym::new(0, "t")],
            dep: vec![Sym::new(0, "u")],
            equations: vec![(
                "e".into(),
                Expr::deriv(&Sym::new(0, "u"), &[&Sym::new(0, "t")]),
                None,
            )],
            rules: RuleSet::empty(),
        })
        .unwrap();
        assert_eq!(
            AnsatzProblem::new(sys, Target::Symmetry, vec![vec![Expr::zero()]]).unwrap_err(),
            AnsatzError::ZeroElement(0)
        );
    }
}
