//! Exact coefficient field: rational functions in the declared parameters.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::poly::{PMono, Poly};
use crate::symbol::Param;

/// Reduced fraction `num / den` with a monic denominator.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Coeff {
    num: Poly,
    den: Poly,
}

impl Default for Coeff {
    fn default() -> Self {
        Coeff::zero()
    }
}

impl Coeff {
    pub fn zero() -> Self {
        Coeff {
            num: Poly::zero(),
            den: Poly::one(),
        }
    }

    pub fn one() -> Self {
        Coeff::from_int(1)
    }

    pub fn from_int(n: i64) -> Self {
        Coeff {
            num: Poly::from_int(n),
            den: Poly::one(),
        }
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Coeff::from_rational(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn from_rational(r: BigRational) -> Self {
        Coeff {
            num: Poly::constant(r),
            den: Poly::one(),
        }
    }

    pub fn param(p: Param) -> Self {
        Coeff {
            num: Poly::var(p),
            den: Poly::one(),
        }
    }

    pub fn from_poly(p: Poly) -> Self {
        Coeff {
            num: p,
            den: Poly::one(),
        }
    }

    /// Builds `num / den`, reducing to lowest terms. `None` if `den` is zero.
    pub fn fraction(num: Poly, den: Poly) -> Option<Self> {
        if den.is_zero() {
            return None;
        }
        Some(Coeff::reduce(num, den))
    }

    fn reduce(num: Poly, den: Poly) -> Self {
        if num.is_zero() {
            return Coeff::zero();
        }
        if let Some(c) = den.as_constant() {
            if c.is_one() {
                return Coeff { num, den };
            }
            return Coeff {
                num: num.scale(&c.recip()),
                den: Poly::one(),
            };
        }
        let g = num.gcd(&den);
        let (num, den) = if g.is_one() {
            (num, den)
        } else {
            (num.div_exact(&g).unwrap(), den.div_exact(&g).unwrap())
        };
        let lc = den.leading().unwrap().1.clone();
        if lc.is_one() {
            Coeff { num, den }
        } else {
            let inv = lc.recip();
            Coeff {
                num: num.scale(&inv),
                den: den.scale(&inv),
            }
        }
    }

    pub fn numer(&self) -> &Poly {
        &self.num
    }

    pub fn denom(&self) -> &Poly {
        &self.den
    }

    pub fn is_zero(&self) -> bool {
        self.num.is_zero()
    }

    pub fn is_one(&self) -> bool {
        self.den.is_one() && self.num.is_one()
    }

    pub fn as_rational(&self) -> Option<BigRational> {
        if self.den.is_one() {
            self.num.as_constant()
        } else {
            None
        }
    }

    pub fn is_rational(&self) -> bool {
        self.as_rational().is_some()
    }

    pub fn params(&self) -> std::collections::BTreeSet<Param> {
        let mut s = self.num.params();
        s.extend(self.den.params());
        s
    }

    /// True if this is a product of a nonzero rational and powers of
    /// nonzero-flagged parameters, i.e. provably invertible.
    pub fn is_unit(&self) -> bool {
        let mono_ok = |p: &Poly| {
            p.as_monomial()
                .is_some_and(|(m, _)| m.factors().iter().all(|(q, _)| q.nonzero))
        };
        !self.is_zero() && mono_ok(&self.num) && mono_ok(&self.den)
    }

    pub fn inv(&self) -> Option<Coeff> {
        if self.is_zero() {
            return None;
        }
        Some(Coeff::reduce(self.den.clone(), self.num.clone()))
    }

    pub fn div(&self, other: &Coeff) -> Option<Coeff> {
        other.inv().map(|i| self * &i)
    }

    pub fn pow(&self, n: i32) -> Option<Coeff> {
        let base = if n < 0 { self.inv()? } else { self.clone() };
        let k = n.unsigned_abs();
        Some(Coeff {
            num: base.num.pow(k),
            den: base.den.pow(k),
        })
    }

    /// Sign of the leading numerator coefficient.
    pub fn is_negative(&self) -> bool {
        self.num.leading().is_some_and(|(_, c)| c.is_negative())
    }

    /// Numeric content: the positive rational `q` such that `self / q` has
    /// coprime integer numerator coefficients. Zero for zero.
    pub fn numeric_content(&self) -> BigRational {
        let n = self.num.numeric_content().abs();
        let d = self.den.numeric_content().abs();
        if n.is_zero() {
            return n;
        }
        n / d
    }

    pub fn scale(&self, r: &BigRational) -> Coeff {
        Coeff::reduce(self.num.scale(r), self.den.clone())
    }

    pub fn mul_pmono(&self, m: &PMono) -> Coeff {
        Coeff::reduce(self.num.mul_term(m, &BigRational::one()), self.den.clone())
    }
}

impl<'a> Add<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn add(self, o: &Coeff) -> Coeff {
        if o.is_zero() {
            return self.clone();
        }
        if self.is_zero() {
            return o.clone();
        }
        if self.den == o.den {
            return Coeff::reduce(self.num.add(&o.num), self.den.clone());
        }
        Coeff::reduce(
            self.num.mul(&o.den).add(&o.num.mul(&self.den)),
            self.den.mul(&o.den),
        )
    }
}

impl<'a> Sub<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn sub(self, o: &Coeff) -> Coeff {
        self + &(-o)
    }
}

impl<'a> Mul<&'a Coeff> for &'a Coeff {
    type Output = Coeff;
    fn mul(self, o: &Coeff) -> Coeff {
        if self.is_zero() || o.is_zero() {
            return Coeff::zero();
        }
        if self.den.is_one() && o.den.is_one() {
            return Coeff {
                num: self.num.mul(&o.num),
                den: Poly::one(),
            };
        }
        Coeff::reduce(self.num.mul(&o.num), self.den.mul(&o.den))
    }
}

impl Neg for &Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        Coeff {
            num: self.num.neg(),
            den: self.den.clone(),
        }
    }
}

impl Neg for Coeff {
    type Output = Coeff;
    fn neg(self) -> Coeff {
        -&self
    }
}

impl Add for Coeff {
    type Output = Coeff;
    fn add(self, o: Coeff) -> Coeff {
        &self + &o
    }
}

impl Sub for Coeff {
    type Output = Coeff;
    fn sub(self, o: Coeff) -> Coeff {
        &self - &o
    }
}

impl Mul for Coeff {
    type Output = Coeff;
    fn mul(self, o: Coeff) -> Coeff {
        &self * &o
    }
}

impl fmt::Debug for Coeff {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den.is_one() {
            write!(f, "({:?})", self.num)
        } else {
            write!(f, "({:?})/({:?})", self.num, self.den)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn gamma() -> Coeff {
        Coeff::param(Param::new(2, "gamma", true))
    }

    fn alpha() -> Coeff {
        Coeff::param(Param::new(0, "alpha", false))
    }

    #[test]
    fn cancels_common_factors() {
        let a = alpha();
        let g = gamma();
        let x = &(&a + &g) * &a;
        let y = &(&a + &g) * &g;
        let q = x.div(&y).unwrap();
        assert_eq!(q, a.div(&g).unwrap());
    }

    #[test]
    fn units_require_nonzero_flags() {
        assert!(gamma().is_unit());
        assert!(!alpha().is_unit());
        assert!(Coeff::rational(-3, 7).is_unit());
        assert!(!(&gamma() + &Coeff::one()).is_unit());
        assert!(!Coeff::zero().is_unit());
    }

    #[test]
    fn field_identities() {
        let a = alpha();
        let g = gamma();
        let x = a.div(&g).unwrap();
        assert_eq!(&x * &g, a);
        assert!((&x - &x).is_zero());
        assert_eq!(x.inv().unwrap().inv().unwrap(), x);
    }
}
