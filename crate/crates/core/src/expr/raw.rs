//! Raw expression trees as produced by the parser, and their normalization.

use num_rational::BigRational;
use num_traits::{Signed, ToPrimitive};
use thiserror::Error;

use super::{Atom, Coeff, Expr};
use crate::symbol::Param;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("zero denominator")]
    ZeroDenominator,
    #[error("unsupported power: {0}")]
    UnsupportedPower(String),
    #[error("denominator is not provably nonzero: {0}")]
    NonInvertible(String),
}

/// Unnormalized expression tree with resolved leaves.
#[derive(Debug, Clone, PartialEq)]
pub enum Raw {
    Num(BigRational),
    Param(Param),
    Atom(Atom),
    Add(Vec<Raw>),
    Mul(Vec<Raw>),
    Neg(Box<Raw>),
    Sub(Box<Raw>, Box<Raw>),
    Div(Box<Raw>, Box<Raw>),
    Pow(Box<Raw>, BigRational),
    Exp(Box<Raw>),
}

/// Canonical form of a raw tree.
///
/// Division is allowed only by expressions that are provably invertible:
/// nonzero rationals times powers of nonzero-flagged parameters, possibly
/// times exponentials.
pub fn normalize(raw: &Raw) -> Result<Expr, ExprError> {
    Ok(match raw {
        Raw::Num(q) => Expr::from_coeff(Coeff::from_rational(q.clone())),
        Raw::Param(p) => Expr::param(p),
        Raw::Atom(a) => Expr::atom(a.clone()),
        Raw::Add(xs) => {
            let mut acc = Expr::zero();
            for x in xs {
                acc += normalize(x)?;
            }
            acc
        }
        Raw::Mul(xs) => {
            let mut acc = Expr::one();
            for x in xs {
                acc = &acc * &normalize(x)?;
            }
            acc
        }
        Raw::Neg(x) => -normalize(x)?,
        Raw::Sub(a, b) => &normalize(a)? - &normalize(b)?,
        Raw::Div(a, b) => {
            let num = normalize(a)?;
            let den = normalize(b)?;
            &num * &invert(&den)?
        }
        Raw::Pow(base, k) => {
            let b = normalize(base)?;
            if !k.is_integer() {
                return Err(ExprError::UnsupportedPower(format!("{}^({})", b, k)));
            }
            let n = k
                .to_integer()
                .to_i32()
                .ok_or_else(|| ExprError::UnsupportedPower(format!("{}^{}", b, k)))?;
            if n >= 0 {
                b.pow(n as u32)
            } else {
                invert(&b)?.pow(n.unsigned_abs())
            }
        }
        Raw::Exp(x) => Expr::exp(&normalize(x)?),
    })
}

/// Inverse of a provably invertible expression.
pub fn invert(den: &Expr) -> Result<Expr, ExprError> {
    if den.is_zero() {
        return Err(ExprError::ZeroDenominator);
    }
    if let Some(c) = den.as_coeff() {
        if !c.is_unit() {
            return Err(ExprError::NonInvertible(den.to_string()));
        }
        return Ok(Expr::from_coeff(c.inv().unwrap()));
    }
    match den.terms().next() {
        Some((_, c)) if den.len() == 1 && c.is_unit() => den
            .inverse()
            .ok_or_else(|| ExprError::NonInvertible(den.to_string())),
        _ => Err(ExprError::NonInvertible(den.to_string())),
    }
}

impl Raw {
    pub fn int(n: i64) -> Raw {
        Raw::Num(BigRational::from_integer(n.into()))
    }

    pub fn is_negative_literal(&self) -> bool {
        matches!(self, Raw::Num(q) if q.is_negative())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MultiIndex;
    use crate::symbol::Sym;

    #[test]
    fn division_by_zero_is_rejected() {
        let r = Raw::Div(Box::new(Raw::int(1)), Box::new(Raw::int(0)));
        assert_eq!(normalize(&r), Err(ExprError::ZeroDenominator));
        let g = Param::new(0, "gamma", true);
        let r = Raw::Div(
            Box::new(Raw::int(1)),
            Box::new(Raw::Sub(
                Box::new(Raw::Param(g.clone())),
                Box::new(Raw::Param(g)),
            )),
        );
        assert_eq!(normalize(&r), Err(ExprError::ZeroDenominator));
    }

    #[test]
    fn fractional_powers_are_rejected() {
        let u = Atom::jet(&Sym::new(0, "u"), MultiIndex::empty());
        let r = Raw::Pow(Box::new(Raw::Atom(u)), BigRational::new(1.into(), 2.into()));
        assert!(matches!(normalize(&r), Err(ExprError::UnsupportedPower(_))));
    }

    #[test]
    fn division_needs_nonzero_flag() {
        let a = Param::new(0, "alpha", false);
        let g = Param::new(1, "gamma", true);
        let ok = Raw::Div(Box::new(Raw::Param(a.clone())), Box::new(Raw::Param(g)));
        assert!(normalize(&ok).is_ok());
        let bad = Raw::Div(Box::new(Raw::int(1)), Box::new(Raw::Param(a)));
        assert!(matches!(normalize(&bad), Err(ExprError::NonInvertible(_))));
    }

    #[test]
    fn negative_power_of_exponential() {
        let u = Atom::jet(&Sym::new(0, "u"), MultiIndex::empty());
        let e = Raw::Exp(Box::new(Raw::Atom(u.clone())));
        let r = Raw::Pow(Box::new(e), BigRational::from_integer((-1).into()));
        let got = normalize(&r).unwrap();
        assert_eq!(got, Expr::exp(&-Expr::atom(u)));
    }
}
