//! Sparse multivariate polynomials over the rationals in the declared
//! parameters. Backing store for the coefficient field.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use crate::symbol::Param;

/// Power product of parameters, sorted by parameter, no zero exponents.
///
/// Ordered graded-lexicographically, which is a monomial order, so the
/// maximum key of a [`Poly`] is its leading monomial.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct PMono(pub(crate) Vec<(Param, u32)>);

impl PMono {
    pub fn one() -> Self {
        PMono(Vec::new())
    }

    pub fn var(p: Param) -> Self {
        PMono(vec![(p, 1)])
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, e)| *e).sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn exponent(&self, p: &Param) -> u32 {
        self.0
            .iter()
            .find(|(q, _)| q == p)
            .map(|(_, e)| *e)
            .unwrap_or(0)
    }

    pub fn factors(&self) -> &[(Param, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &PMono) -> PMono {
        let mut out = Vec::with_capacity(self.0.len() + other.0.len());
        let (mut i, mut j) = (0, 0);
        while i < self.0.len() && j < other.0.len() {
            match self.0[i].0.cmp(&other.0[j].0) {
                Ordering::Less => {
                    out.push(self.0[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    out.push(other.0[j].clone());
                    j += 1;
                }
                Ordering::Equal => {
                    out.push((self.0[i].0.clone(), self.0[i].1 + other.0[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&self.0[i..]);
        out.extend_from_slice(&other.0[j..]);
        PMono(out)
    }

    /// `self / other` if `other` divides `self`.
    pub fn div(&self, other: &PMono) -> Option<PMono> {
        let mut out = Vec::with_capacity(self.0.len());
        let mut j = 0;
        for (p, e) in &self.0 {
            if j < other.0.len() && other.0[j].0 == *p {
                let f = other.0[j].1;
                if f > *e {
                    return None;
                }
                if e - f > 0 {
                    out.push((p.clone(), e - f));
                }
                j += 1;
            } else if j < other.0.len() && other.0[j].0 < *p {
                return None;
            } else {
                out.push((p.clone(), *e));
            }
        }
        if j < other.0.len() {
            return None;
        }
        Some(PMono(out))
    }

    /// Componentwise minimum of exponents.
    pub fn gcd(&self, other: &PMono) -> PMono {
        let mut out = Vec::new();
        for (p, e) in &self.0 {
            let f = other.exponent(p);
            if f > 0 {
                out.push((p.clone(), (*e).min(f)));
            }
        }
        PMono(out)
    }

    fn lex_cmp(&self, other: &PMono) -> Ordering {
        let (mut i, mut j) = (0, 0);
        loop {
            match (self.0.get(i), other.0.get(j)) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((p, e)), Some((q, f))) => match p.cmp(q) {
                    Ordering::Less => return Ordering::Greater,
                    Ordering::Greater => return Ordering::Less,
                    Ordering::Equal => match e.cmp(f) {
                        Ordering::Equal => {
                            i += 1;
                            j += 1;
                        }
                        o => return o,
                    },
                },
            }
        }
    }
}

impl Ord for PMono {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| self.lex_cmp(other))
    }
}

impl PartialOrd for PMono {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for PMono {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.is_empty() {
            return f.write_str("1");
        }
        for (k, (p, e)) in self.0.iter().enumerate() {
            if k > 0 {
                f.write_str("*")?;
            }
            write!(f, "{}", p)?;
            if *e > 1 {
                write!(f, "^{}", e)?;
            }
        }
        Ok(())
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Poly {
    terms: BTreeMap<PMono, BigRational>,
}

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn one() -> Self {
        Poly::constant(BigRational::one())
    }

    pub fn constant(c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(PMono::one(), c);
        }
        Poly { terms }
    }

    pub fn from_int(n: i64) -> Self {
        Poly::constant(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn var(p: Param) -> Self {
        Poly::term(PMono::var(p), BigRational::one())
    }

    pub fn term(m: PMono, c: BigRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Poly { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    pub fn as_constant(&self) -> Option<BigRational> {
        match self.terms.len() {
            0 => Some(BigRational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn as_monomial(&self) -> Option<(&PMono, &BigRational)> {
        if self.terms.len() == 1 {
            self.terms.iter().next()
        } else {
            None
        }
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&PMono, &BigRational)> {
        self.terms.iter()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn leading(&self) -> Option<(&PMono, &BigRational)> {
        self.terms.iter().next_back()
    }

    pub fn params(&self) -> BTreeSet<Param> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(p, _)| p.clone()))
            .collect()
    }

    fn add_term(&mut self, m: PMono, c: BigRational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get() + &c;
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    pub fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }

    pub fn sub(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }

    pub fn neg(&self) -> Poly {
        Poly {
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.clone(), -c.clone()))
                .collect(),
        }
    }

    pub fn mul(&self, other: &Poly) -> Poly {
        if self.is_zero() || other.is_zero() {
            return Poly::zero();
        }
        if let Some(c) = other.as_constant() {
            return self.scale(&c);
        }
        if let Some(c) = self.as_constant() {
            return other.scale(&c);
        }
        let mut out = Poly::zero();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                out.add_term(m1.mul(m2), c1 * c2);
            }
        }
        out
    }

    pub fn mul_term(&self, m: &PMono, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(k, d)| (k.mul(m), d * c)).collect(),
        }
    }

    pub fn scale(&self, c: &BigRational) -> Poly {
        if c.is_zero() {
            return Poly::zero();
        }
        Poly {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::one();
        for _ in 0..n {
            acc = acc.mul(self);
        }
        acc
    }

    /// Exact quotient, or `None` if `d` does not divide `self`.
    pub fn div_exact(&self, d: &Poly) -> Option<Poly> {
        if d.is_zero() {
            return None;
        }
        if let Some(c) = d.as_constant() {
            return Some(self.scale(&c.recip()));
        }
        let (dm, dc) = d.leading().map(|(m, c)| (m.clone(), c.clone())).unwrap();
        if let Some((m, c)) = d.as_monomial() {
            let mut out = BTreeMap::new();
            for (k, v) in &self.terms {
                out.insert(k.div(m)?, v / c);
            }
            return Some(Poly { terms: out });
        }
        let mut rem = self.clone();
        let mut quot = Poly::zero();
        while let Some((rm, rc)) = rem.leading().map(|(m, c)| (m.clone(), c.clone())) {
            let qm = rm.div(&dm)?;
            let qc = rc / &dc;
            rem = rem.sub(&d.mul_term(&qm, &qc));
            quot.add_term(qm, qc);
        }
        Some(quot)
    }

    /// Gcd of the rational coefficients, signed like the leading coefficient.
    pub fn numeric_content(&self) -> BigRational {
        let mut num = BigInt::zero();
        let mut den = BigInt::one();
        for c in self.terms.values() {
            num = num.gcd(c.numer());
            den = den.lcm(c.denom());
        }
        if num.is_zero() {
            return BigRational::zero();
        }
        let g = BigRational::new(num, den);
        match self.leading() {
            Some((_, c)) if c.is_negative() => -g,
            _ => g,
        }
    }

    /// Scaled so that the leading coefficient is one.
    pub fn monic(&self) -> Poly {
        match self.leading() {
            Some((_, c)) => self.scale(&c.recip()),
            None => Poly::zero(),
        }
    }

    fn monomial_content(&self) -> PMono {
        let mut it = self.terms.keys();
        let first = match it.next() {
            Some(m) => m.clone(),
            None => return PMono::one(),
        };
        it.fold(first, |acc, m| acc.gcd(m))
    }

    pub fn degree_in(&self, p: &Param) -> u32 {
        self.terms.keys().map(|m| m.exponent(p)).max().unwrap_or(0)
    }

    /// Coefficients with respect to `p`, indexed by degree.
    fn to_univariate(&self, p: &Param) -> Vec<Poly> {
        let deg = self.degree_in(p) as usize;
        let mut out = vec![Poly::zero(); deg + 1];
        for (m, c) in &self.terms {
            let e = m.exponent(p);
            let rest = PMono(m.0.iter().filter(|(q, _)| q != p).cloned().collect());
            out[e as usize].add_term(rest, c.clone());
        }
        out
    }

    fn from_univariate(coeffs: &[Poly], p: &Param) -> Poly {
        let mut out = Poly::zero();
        for (e, c) in coeffs.iter().enumerate() {
            let m = if e == 0 {
                PMono::one()
            } else {
                PMono(vec![(p.clone(), e as u32)])
            };
            for (k, v) in &c.terms {
                out.add_term(k.mul(&m), v.clone());
            }
        }
        out
    }

    /// Monic greatest common divisor.
    pub fn gcd(&self, other: &Poly) -> Poly {
        if self.is_zero() {
            return other.monic();
        }
        if other.is_zero() {
            return self.monic();
        }
        if self.as_constant().is_some() || other.as_constant().is_some() {
            return Poly::one();
        }
        if self.as_monomial().is_some() || other.as_monomial().is_some() {
            let m = self.monomial_content().gcd(&other.monomial_content());
            return Poly::term(m, BigRational::one());
        }
        let vars: BTreeSet<Param> = self.params().union(&other.params()).cloned().collect();
        gcd_rec(self, other, &vars.into_iter().collect::<Vec<_>>()).monic()
    }
}

fn content_in(coeffs: &[Poly], rest: &[Param]) -> Poly {
    let mut g = Poly::zero();
    for c in coeffs {
        if c.is_zero() {
            continue;
        }
        g = if g.is_zero() {
            c.monic()
        } else {
            gcd_rec(&g, c, rest).monic()
        };
        if g.is_one() {
            break;
        }
    }
    g
}

fn trim(coeffs: &mut Vec<Poly>) {
    while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.is_zero()) {
        coeffs.pop();
    }
}

/// Pseudo-remainder of `a` by `b` as univariate polynomials.
fn prem(a: &[Poly], b: &[Poly]) -> Vec<Poly> {
    let mut r = a.to_vec();
    let db = b.len() - 1;
    let lb = &b[db];
    trim(&mut r);
    while r.len() > db && !(r.len() == 1 && r[0].is_zero()) {
        let dr = r.len() - 1;
        let lr = r[dr].clone();
        let shift = dr - db;
        for c in r.iter_mut() {
            *c = c.mul(lb);
        }
        for (k, bc) in b.iter().enumerate() {
            r[k + shift] = r[k + shift].sub(&bc.mul(&lr));
        }
        r.pop();
        trim(&mut r);
        if r.is_empty() {
            r.push(Poly::zero());
        }
    }
    r
}

fn gcd_rec(a: &Poly, b: &Poly, vars: &[Param]) -> Poly {
    if a.is_zero() {
        return b.clone();
    }
    if b.is_zero() {
        return a.clone();
    }
    let Some((p, rest)) = vars.split_first() else {
        return Poly::one();
    };
    if a.degree_in(p) == 0 && b.degree_in(p) == 0 {
        return gcd_rec(a, b, rest);
    }
    let ua = a.to_univariate(p);
    let ub = b.to_univariate(p);
    let ca = content_in(&ua, rest);
    let cb = content_in(&ub, rest);
    let c = gcd_rec(&ca, &cb, rest);
    let mut x: Vec<Poly> = ua.iter().map(|q| q.div_exact(&ca).unwrap()).collect();
    let mut y: Vec<Poly> = ub.iter().map(|q| q.div_exact(&cb).unwrap()).collect();
    if x.len() < y.len() {
        std::mem::swap(&mut x, &mut y);
    }
    loop {
        if y.len() == 1 {
            if y[0].is_zero() {
                break;
            }
            // primitive parts are coprime in p
            return c;
        }
        let r = prem(&x, &y);
        x = y;
        if r.len() == 1 && r[0].is_zero() {
            y = vec![Poly::zero()];
        } else {
            let cr = content_in(&r, rest);
            y = r.iter().map(|q| q.div_exact(&cr).unwrap()).collect();
        }
    }
    let cx = content_in(&x, rest);
    let px: Vec<Poly> = x.iter().map(|q| q.div_exact(&cx).unwrap()).collect();
    c.mul(&Poly::from_univariate(&px, p))
}

impl fmt::Debug for Poly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return f.write_str("0");
        }
        for (k, (m, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{}*{:?}", c, m)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(name: &str, rank: u32) -> Poly {
        Poly::var(Param::new(rank, name, false))
    }

    #[test]
    fn gcd_of_shared_linear_factor() {
        let a = p("a", 0);
        let b = p("b", 1);
        let f = a.add(&b);
        let x = f.mul(&a.sub(&Poly::from_int(1)));
        let y = f.mul(&b.add(&Poly::from_int(2)));
        assert_eq!(x.gcd(&y), f.monic());
    }

    #[test]
    fn gcd_coprime_is_one() {
        let a = p("a", 0);
        let b = p("b", 1);
        let x = a.mul(&a).add(&b);
        let y = a.add(&b.mul(&b));
        assert!(x.gcd(&y).is_one());
    }

    #[test]
    fn exact_division_roundtrip() {
        let a = p("a", 0);
        let b = p("b", 1);
        let c = p("c", 2);
        let x = a
            .add(&b)
            .mul(&b.sub(&c))
            .mul(&a.add(&c).add(&Poly::from_int(3)));
        let d = b.sub(&c);
        let q = x.div_exact(&d).unwrap();
        assert_eq!(q.mul(&d), x);
        assert!(x.div_exact(&a.add(&Poly::from_int(7))).is_none());
    }

    #[test]
    fn gcd_with_repeated_factor() {
        let a = p("a", 0);
        let b = p("b", 1);
        let f = a.sub(&b);
        let x = f.pow(2).mul(&a);
        let y = f.pow(3).mul(&b.add(&Poly::from_int(1)));
        assert_eq!(x.gcd(&y), f.pow(2).monic());
    }
}
