//! Canonical-form expressions over jet atoms.
//!
//! An [`Expr`] is a finite sum of terms `coeff * atom_1^k_1 * ... * atom_n^k_n`
//! where the coefficient is an exact rational function in the declared
//! parameters. The representation is unique: two expressions are equal in
//! the term algebra iff they are structurally equal.

mod coeff;
mod poly;
mod print;
mod raw;
mod rules;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub};

pub use coeff::Coeff;
pub use poly::{PMono, Poly};
pub use print::{latex_name, Printer};
pub use raw::{invert, normalize, ExprError, Raw};
pub use rules::{RewriteRule, RuleError, RuleSet};

use crate::symbol::{Param, Sym};

/// Multiset of independent variables, i.e. a derivative multi-index.
///
/// Stored sorted, so the order in which derivatives are taken is
/// irrelevant: `u_{xt}` and `u_{tx}` are the same atom.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct MultiIndex(Vec<(Sym, u32)>);

impl MultiIndex {
    pub fn empty() -> Self {
        MultiIndex(Vec::new())
    }

    pub fn from_vars<'a>(vars: impl IntoIterator<Item = &'a Sym>) -> Self {
        let mut m = MultiIndex::empty();
        for v in vars {
            m = m.with(v);
        }
        m
    }

    pub fn order(&self) -> u32 {
        self.0.iter().map(|(_, k)| *k).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn count(&self, v: &Sym) -> u32 {
        self.0
            .iter()
            .find(|(w, _)| w == v)
            .map(|(_, k)| *k)
            .unwrap_or(0)
    }

    pub fn entries(&self) -> &[(Sym, u32)] {
        &self.0
    }

    /// The multi-index with one more derivative in `v`.
    pub fn with(&self, v: &Sym) -> Self {
        let mut out = self.0.clone();
        match out.binary_search_by(|(w, _)| w.cmp(v)) {
            Ok(i) => out[i].1 += 1,
            Err(i) => out.insert(i, (v.clone(), 1)),
        }
        MultiIndex(out)
    }

    /// The multi-index with one fewer derivative in `v`, if present.
    pub fn without(&self, v: &Sym) -> Option<Self> {
        let mut out = self.0.clone();
        let i = out.binary_search_by(|(w, _)| w.cmp(v)).ok()?;
        out[i].1 -= 1;
        if out[i].1 == 0 {
            out.remove(i);
        }
        Some(MultiIndex(out))
    }

    pub fn add(&self, other: &MultiIndex) -> Self {
        let mut out = self.clone();
        for (v, k) in &other.0 {
            for _ in 0..*k {
                out = out.with(v);
            }
        }
        out
    }

    /// `self - other`, if `other <= self` componentwise.
    pub fn sub(&self, other: &MultiIndex) -> Option<Self> {
        let mut out = self.clone();
        for (v, k) in &other.0 {
            for _ in 0..*k {
                out = out.without(v)?;
            }
        }
        Some(out)
    }

    pub fn contains(&self, other: &MultiIndex) -> bool {
        other.0.iter().all(|(v, k)| self.count(v) >= *k)
    }

    /// Variables in order, repeated by multiplicity.
    pub fn vars(&self) -> Vec<Sym> {
        self.0
            .iter()
            .flat_map(|(v, k)| std::iter::repeat_n(v.clone(), *k as usize))
            .collect()
    }

    /// All multi-indices `K <= self`.
    pub fn sub_indices(&self) -> Vec<MultiIndex> {
        let mut acc = vec![MultiIndex::empty()];
        for (v, k) in &self.0 {
            let mut next = Vec::new();
            for base in &acc {
                let mut m = base.clone();
                next.push(m.clone());
                for _ in 0..*k {
                    m = m.with(v);
                    next.push(m.clone());
                }
            }
            acc = next;
        }
        acc
    }

    /// Number of distinct orderings of the index multiset.
    pub fn orderings(&self) -> u64 {
        let mut n = factorial(self.order() as u64);
        for (_, k) in &self.0 {
            n /= factorial(*k as u64);
        }
        n
    }

    /// Product of binomial coefficients `C(self_i, other_i)`.
    pub fn binomial(&self, other: &MultiIndex) -> u64 {
        self.0
            .iter()
            .map(|(v, k)| binom(*k as u64, other.count(v) as u64))
            .product()
    }
}

fn factorial(n: u64) -> u64 {
    (1..=n).product()
}

fn binom(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    (0..k).fold(1, |acc, i| acc * (n - i) / (i + 1))
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.order()
            .cmp(&other.order())
            .then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Debug for MultiIndex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("[")?;
        for (i, v) in self.vars().iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", v)?;
        }
        f.write_str("]")
    }
}

/// A dependent-variable jet coordinate `u^σ_J`.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub struct JetVar {
    pub dep: Sym,
    pub index: MultiIndex,
}

impl JetVar {
    pub fn new(dep: Sym, index: MultiIndex) -> Self {
        JetVar { dep, index }
    }

    pub fn base(dep: Sym) -> Self {
        JetVar {
            dep,
            index: MultiIndex::empty(),
        }
    }

    pub fn derive(&self, v: &Sym) -> JetVar {
        JetVar {
            dep: self.dep.clone(),
            index: self.index.with(v),
        }
    }
}

/// Partial derivative of an opaque function at the given arguments.
/// `orders[k]` is the number of derivatives in argument slot `k`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct FuncAtom {
    pub name: Sym,
    pub args: Vec<Expr>,
    pub orders: Vec<u32>,
}

impl FuncAtom {
    pub fn new(name: Sym, args: Vec<Expr>) -> Self {
        let orders = vec![0; args.len()];
        FuncAtom { name, args, orders }
    }

    pub fn order(&self) -> u32 {
        self.orders.iter().sum()
    }

    pub fn derive_slot(&self, k: usize) -> FuncAtom {
        let mut out = self.clone();
        out.orders[k] += 1;
        out
    }
}

impl Ord for FuncAtom {
    fn cmp(&self, other: &Self) -> Ordering {
        self.name
            .cmp(&other.name)
            .then_with(|| self.order().cmp(&other.order()))
            .then_with(|| other.orders.cmp(&self.orders))
            .then_with(|| self.args.cmp(&other.args))
    }
}

impl PartialOrd for FuncAtom {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Indivisible factor of a term. Variant order is the canonical atom order.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug)]
pub enum Atom {
    Indep(Sym),
    /// `e^q` for a constant `q`, kept symbolic to stay exact.
    ExpConst(Coeff),
    Func(FuncAtom),
    Jet(JetVar),
    /// `e^q` where `q` has no constant term and is not zero.
    Exp(Expr),
}

impl Atom {
    pub fn indep(v: &Sym) -> Atom {
        Atom::Indep(v.clone())
    }

    pub fn jet(dep: &Sym, index: MultiIndex) -> Atom {
        Atom::Jet(JetVar::new(dep.clone(), index))
    }

    pub fn as_jet(&self) -> Option<&JetVar> {
        match self {
            Atom::Jet(j) => Some(j),
            _ => None,
        }
    }

    pub fn as_func(&self) -> Option<&FuncAtom> {
        match self {
            Atom::Func(f) => Some(f),
            _ => None,
        }
    }

    fn is_exp_like(&self) -> bool {
        matches!(self, Atom::Exp(_) | Atom::ExpConst(_))
    }

    /// Collects this atom and every atom nested in function arguments or
    /// exponents.
    pub fn collect_deep(&self, out: &mut BTreeSet<Atom>) {
        out.insert(self.clone());
        match self {
            Atom::Func(f) => f.args.iter().for_each(|a| a.collect_atoms_deep(out)),
            Atom::Exp(q) => q.collect_atoms_deep(out),
            _ => {}
        }
    }

    fn mentions(&self, target: &Atom) -> bool {
        if self == target {
            return true;
        }
        match self {
            Atom::Func(f) => f.args.iter().any(|a| a.mentions(target)),
            Atom::Exp(q) => q.mentions(target),
            _ => false,
        }
    }
}

/// Power product of atoms, sorted by atom.
///
/// Invariant: at most one `Exp` and one `ExpConst` factor, each to the
/// first power.
#[derive(Clone, PartialEq, Eq, Hash, Default, Debug)]
pub struct Monomial(Vec<(Atom, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Monomial(Vec::new())
    }

    pub fn factors(&self) -> &[(Atom, u32)] {
        &self.0
    }

    pub fn is_one(&self) -> bool {
        self.0.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().map(|(_, k)| *k).sum()
    }

    pub fn exponent(&self, a: &Atom) -> u32 {
        self.0
            .iter()
            .find(|(b, _)| b == a)
            .map(|(_, k)| *k)
            .unwrap_or(0)
    }

    /// Builds a monomial from arbitrary factors, merging exponentials.
    fn from_factors(factors: impl IntoIterator<Item = (Atom, u32)>) -> Monomial {
        let mut m = Monomial::one();
        for (a, k) in factors {
            m = m.mul(&Monomial::single(a, k));
        }
        m
    }

    fn single(a: Atom, k: u32) -> Monomial {
        if k == 0 {
            return Monomial::one();
        }
        match a {
            Atom::Exp(q) if k > 1 => exp_monomial(&q.scale(&Coeff::from_int(k as i64))),
            Atom::ExpConst(c) if k > 1 => {
                exp_monomial(&Expr::from_coeff(&c * &Coeff::from_int(k as i64)))
            }
            a => Monomial(vec![(a, k)]),
        }
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        if other.is_one() {
            return self.clone();
        }
        if self.is_one() {
            return other.clone();
        }
        let mut out: Vec<(Atom, u32)> = Vec::with_capacity(self.0.len() + other.0.len());
        let mut exps: Option<Expr> = None;
        let (mut i, mut j) = (0, 0);
        let mut push = |a: &Atom, k: u32, out: &mut Vec<(Atom, u32)>| match a {
            Atom::Exp(q) => {
                exps = Some(match exps.take() {
                    Some(e) => e + q.clone(),
                    None => q.clone(),
                })
            }
            Atom::ExpConst(c) => {
                let q = Expr::from_coeff(c.clone());
                exps = Some(match exps.take() {
                    Some(e) => e + q,
                    None => q,
                })
            }
            _ => match out.last_mut() {
                Some((b, e)) if b == a => *e += k,
                _ => out.push((a.clone(), k)),
            },
        };
        while i < self.0.len() || j < other.0.len() {
            let take_left = match (self.0.get(i), other.0.get(j)) {
                (Some((a, _)), Some((b, _))) => a <= b,
                (Some(_), None) => true,
                _ => false,
            };
            if take_left {
                push(&self.0[i].0, self.0[i].1, &mut out);
                i += 1;
            } else {
                push(&other.0[j].0, other.0[j].1, &mut out);
                j += 1;
            }
        }
        match exps {
            // only one exponential-type factor in total: keep as is
            Some(q) => {
                let em = exp_monomial(&q);
                let mut merged = Monomial(out);
                for f in em.0 {
                    let pos = merged.0.partition_point(|(b, _)| b < &f.0);
                    merged.0.insert(pos, f);
                }
                merged
            }
            None => Monomial(out),
        }
    }

    /// The monomial with one power of `a` removed.
    fn remove_one(&self, idx: usize) -> Monomial {
        let mut out = self.0.clone();
        if out[idx].1 == 1 {
            out.remove(idx);
        } else {
            out[idx].1 -= 1;
        }
        Monomial(out)
    }

    /// Graded lexicographic comparison, largest atom first.
    fn grlex(&self, other: &Monomial) -> Ordering {
        let d = self.degree().cmp(&other.degree());
        if d != Ordering::Equal {
            return d;
        }
        let mut a = self.0.iter().rev();
        let mut b = other.0.iter().rev();
        loop {
            match (a.next(), b.next()) {
                (None, None) => return Ordering::Equal,
                (Some(_), None) => return Ordering::Greater,
                (None, Some(_)) => return Ordering::Less,
                (Some((x, i)), Some((y, j))) => match x.cmp(y) {
                    Ordering::Equal => match i.cmp(j) {
                        Ordering::Equal => continue,
                        o => return o,
                    },
                    o => return o,
                },
            }
        }
    }
}

/// Terms of equal degree are kept in descending graded-lex order, degrees
/// ascend. This is also the printing order.
impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree()
            .cmp(&other.degree())
            .then_with(|| other.grlex(self))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Monomial representing `e^q`, splitting off the constant part of `q`.
fn exp_monomial(q: &Expr) -> Monomial {
    let mut rest = q.clone();
    let c = rest.terms.remove(&Monomial::one());
    let mut out = Vec::new();
    if let Some(c) = c {
        out.push((Atom::ExpConst(c), 1));
    }
    if !rest.is_zero() {
        out.push((Atom::Exp(rest), 1));
    }
    Monomial(out)
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Default)]
pub struct Expr {
    terms: BTreeMap<Monomial, Coeff>,
}

impl Expr {
    pub fn zero() -> Self {
        Expr::default()
    }

    pub fn one() -> Self {
        Expr::from_coeff(Coeff::one())
    }

    pub fn from_int(n: i64) -> Self {
        Expr::from_coeff(Coeff::from_int(n))
    }

    pub fn rational(n: i64, d: i64) -> Self {
        Expr::from_coeff(Coeff::rational(n, d))
    }

    pub fn from_coeff(c: impl Into<Coeff>) -> Self {
        Expr::term(Monomial::one(), c.into())
    }

    pub fn param(p: &Param) -> Self {
        Expr::from_coeff(Coeff::param(p.clone()))
    }

    pub fn atom(a: Atom) -> Self {
        Expr::term(Monomial::single(a, 1), Coeff::one())
    }

    pub fn indep(v: &Sym) -> Self {
        Expr::atom(Atom::Indep(v.clone()))
    }

    pub fn jet(dep: &Sym, index: MultiIndex) -> Self {
        Expr::atom(Atom::jet(dep, index))
    }

    /// `u^dep` derived once in each listed variable.
    pub fn deriv(dep: &Sym, vars: &[&Sym]) -> Self {
        Expr::jet(dep, MultiIndex::from_vars(vars.iter().copied()))
    }

    pub fn func(f: FuncAtom) -> Self {
        Expr::atom(Atom::Func(f))
    }

    /// `e^q`, with the constant part of `q` held in an `ExpConst` atom.
    pub fn exp(q: &Expr) -> Self {
        Expr::term(exp_monomial(q), Coeff::one())
    }

    pub fn term(m: Monomial, c: Coeff) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Expr { terms }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Coeff)> {
        self.terms.iter()
    }

    /// The coefficient if this expression contains no atoms.
    pub fn as_coeff(&self) -> Option<Coeff> {
        match self.terms.len() {
            0 => Some(Coeff::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    /// The atom if this expression is exactly one atom to the first power.
    pub fn as_atom(&self) -> Option<&Atom> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        match m.0.as_slice() {
            [(a, 1)] if c.is_one() => Some(a),
            _ => None,
        }
    }

    /// Coefficient of the monomial `m` (zero if absent).
    pub fn coefficient(&self, m: &Monomial) -> Coeff {
        self.terms.get(m).cloned().unwrap_or_default()
    }

    fn add_term(&mut self, m: Monomial, c: Coeff) {
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

    pub fn scale(&self, c: &Coeff) -> Expr {
        if c.is_zero() {
            return Expr::zero();
        }
        if c.is_one() {
            return self.clone();
        }
        Expr {
            terms: self.terms.iter().map(|(m, d)| (m.clone(), d * c)).collect(),
        }
    }

    fn mul_term(&self, m: &Monomial, c: &Coeff, out: &mut Expr) {
        for (n, d) in &self.terms {
            out.add_term(n.mul(m), d * c);
        }
    }

    pub fn pow(&self, k: u32) -> Expr {
        let mut acc = Expr::one();
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    /// Inverse, for single terms whose atoms are all exponentials and whose
    /// coefficient is nonzero.
    pub fn inverse(&self) -> Option<Expr> {
        if self.terms.len() != 1 {
            return None;
        }
        let (m, c) = self.terms.iter().next().unwrap();
        if !m.0.iter().all(|(a, _)| a.is_exp_like()) {
            return None;
        }
        let mut inv = Expr::from_coeff(c.inv()?);
        for (a, _) in &m.0 {
            let q = match a {
                Atom::Exp(q) => -q,
                Atom::ExpConst(c) => Expr::from_coeff(-c),
                _ => unreachable!(),
            };
            inv = &inv * &Expr::exp(&q);
        }
        Some(inv)
    }

    /// All atoms occurring anywhere, including inside function arguments
    /// and exponents.
    pub fn atoms_deep(&self) -> BTreeSet<Atom> {
        let mut out = BTreeSet::new();
        self.collect_atoms_deep(&mut out);
        out
    }

    fn collect_atoms_deep(&self, out: &mut BTreeSet<Atom>) {
        for m in self.terms.keys() {
            for (a, _) in &m.0 {
                a.collect_deep(out);
            }
        }
    }

    /// Top-level atoms only.
    pub fn atoms(&self) -> BTreeSet<Atom> {
        self.terms
            .keys()
            .flat_map(|m| m.0.iter().map(|(a, _)| a.clone()))
            .collect()
    }

    pub fn jet_vars_deep(&self) -> BTreeSet<JetVar> {
        self.atoms_deep()
            .into_iter()
            .filter_map(|a| match a {
                Atom::Jet(j) => Some(j),
                _ => None,
            })
            .collect()
    }

    pub fn params(&self) -> BTreeSet<Param> {
        let mut out = BTreeSet::new();
        for (m, c) in &self.terms {
            out.extend(c.params());
            for (a, _) in &m.0 {
                match a {
                    Atom::ExpConst(c) => out.extend(c.params()),
                    Atom::Exp(q) => out.extend(q.params()),
                    Atom::Func(f) => f.args.iter().for_each(|x| out.extend(x.params())),
                    _ => {}
                }
            }
        }
        out
    }

    /// True if `target` occurs anywhere in the expression.
    pub fn mentions(&self, target: &Atom) -> bool {
        self.terms
            .keys()
            .any(|m| m.0.iter().any(|(a, _)| a.mentions(target)))
    }

    /// Largest exponent of `a` among top-level factors.
    pub fn degree_in(&self, a: &Atom) -> u32 {
        self.terms.keys().map(|m| m.exponent(a)).max().unwrap_or(0)
    }

    /// Applies a derivation given its action on atoms (product rule over
    /// each term). `d` is consulted once per distinct atom.
    pub fn derive_with(&self, d: &mut dyn FnMut(&Atom) -> Expr) -> Expr {
        let mut cache: HashMap<Atom, Expr> = HashMap::new();
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            for (idx, (a, k)) in m.0.iter().enumerate() {
                let da = cache.entry(a.clone()).or_insert_with(|| d(a));
                if da.is_zero() {
                    continue;
                }
                let rest = m.remove_one(idx);
                let cf = c * &Coeff::from_int(*k as i64);
                da.mul_term(&rest, &cf, &mut out);
            }
        }
        out
    }

    /// Formal partial derivative with respect to `a`; every other atom is
    /// independent of `a` except through function arguments and exponents,
    /// which are differentiated by the chain rule.
    pub fn partial(&self, a: &Atom) -> Expr {
        if !self.mentions(a) {
            return Expr::zero();
        }
        self.derive_with(&mut |b| partial_atom(b, a))
    }

    /// Replaces atoms according to `f`, recursing into function arguments
    /// and exponents of atoms that `f` leaves alone. Replacement results are
    /// not revisited.
    pub fn map_atoms(&self, f: &mut dyn FnMut(&Atom) -> Option<Expr>) -> Expr {
        let mut cache: HashMap<Atom, Option<Expr>> = HashMap::new();
        let mut out = Expr::zero();
        for (m, c) in &self.terms {
            let mut changed = false;
            let mut reps: Vec<Option<Expr>> = Vec::with_capacity(m.0.len());
            for (a, _) in &m.0 {
                let r = match cache.get(a) {
                    Some(r) => r.clone(),
                    None => {
                        let r = map_atom(a, f);
                        cache.insert(a.clone(), r.clone());
                        r
                    }
                };
                changed |= r.is_some();
                reps.push(r);
            }
            if !changed {
                out.add_term(m.clone(), c.clone());
                continue;
            }
            let mut fixed = Vec::new();
            let mut acc = Expr::from_coeff(c.clone());
            for ((a, k), r) in m.0.iter().zip(reps) {
                match r {
                    Some(e) => acc = &acc * &e.pow(*k),
                    None => fixed.push((a.clone(), *k)),
                }
            }
            acc.mul_term(&Monomial::from_factors(fixed), &Coeff::one(), &mut out);
        }
        out
    }

    /// Simultaneous substitution of atoms.
    pub fn substitute(&self, bindings: &BTreeMap<Atom, Expr>) -> Expr {
        if bindings.is_empty() {
            return self.clone();
        }
        self.map_atoms(&mut |a| bindings.get(a).cloned())
    }

    /// Splits into coefficients of monomials in the `selected` atoms.
    /// Only top-level factors are split; the empty monomial collects the
    /// remainder.
    pub fn collect(&self, selected: &BTreeSet<Atom>) -> BTreeMap<Monomial, Expr> {
        self.collect_by(&mut |a| selected.contains(a))
    }

    pub fn collect_by(&self, pick: &mut dyn FnMut(&Atom) -> bool) -> BTreeMap<Monomial, Expr> {
        let mut out: BTreeMap<Monomial, Expr> = BTreeMap::new();
        for (m, c) in &self.terms {
            let (sel, rest): (Vec<_>, Vec<_>) = m.0.iter().cloned().partition(|(a, _)| pick(a));
            out.entry(Monomial(sel))
                .or_default()
                .add_term(Monomial(rest), c.clone());
        }
        out.retain(|_, e| !e.is_zero());
        out
    }

    /// Numeric content (positive rational), for display factoring.
    pub fn numeric_content(&self) -> num_rational::BigRational {
        use num_integer::Integer;
        use num_traits::Zero;
        let mut num = num_bigint::BigInt::zero();
        let mut den = num_bigint::BigInt::from(1);
        for c in self.terms.values() {
            let q = c.numeric_content();
            num = num.gcd(q.numer());
            den = den.lcm(q.denom());
        }
        if num.is_zero() {
            return num_rational::BigRational::zero();
        }
        num_rational::BigRational::new(num, den)
    }
}

fn map_atom(a: &Atom, f: &mut dyn FnMut(&Atom) -> Option<Expr>) -> Option<Expr> {
    if let Some(r) = f(a) {
        return Some(r);
    }
    match a {
        Atom::Func(g) => {
            let mut changed = false;
            let args: Vec<Expr> = g
                .args
                .iter()
                .map(|x| {
                    let y = x.map_atoms(f);
                    changed |= &y != x;
                    y
                })
                .collect();
            changed.then(|| {
                Expr::func(FuncAtom {
                    name: g.name.clone(),
                    args,
                    orders: g.orders.clone(),
                })
            })
        }
        Atom::Exp(q) => {
            let r = q.map_atoms(f);
            (&r != q).then(|| Expr::exp(&r))
        }
        _ => None,
    }
}

fn partial_atom(b: &Atom, a: &Atom) -> Expr {
    if b == a {
        return Expr::one();
    }
    match b {
        Atom::Func(f) => {
            let mut out = Expr::zero();
            for (k, arg) in f.args.iter().enumerate() {
                let d = arg.partial(a);
                if !d.is_zero() {
                    out += &d * &Expr::func(f.derive_slot(k));
                }
            }
            out
        }
        Atom::Exp(q) => {
            let d = q.partial(a);
            if d.is_zero() {
                d
            } else {
                &d * &Expr::atom(b.clone())
            }
        }
        _ => Expr::zero(),
    }
}

impl From<i64> for Coeff {
    fn from(n: i64) -> Coeff {
        Coeff::from_int(n)
    }
}

impl<'a> Add<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn add(self, o: &Expr) -> Expr {
        let (big, small) = if self.terms.len() >= o.terms.len() {
            (self, o)
        } else {
            (o, self)
        };
        let mut out = big.clone();
        for (m, c) in &small.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl Add for Expr {
    type Output = Expr;
    fn add(mut self, o: Expr) -> Expr {
        self += o;
        self
    }
}

impl AddAssign<Expr> for Expr {
    fn add_assign(&mut self, o: Expr) {
        if self.terms.len() < o.terms.len() {
            let mut o = o;
            std::mem::swap(self, &mut o);
            for (m, c) in o.terms {
                self.add_term(m, c);
            }
        } else {
            for (m, c) in o.terms {
                self.add_term(m, c);
            }
        }
    }
}

impl AddAssign<&Expr> for Expr {
    fn add_assign(&mut self, o: &Expr) {
        for (m, c) in &o.terms {
            self.add_term(m.clone(), c.clone());
        }
    }
}

impl<'a> Sub<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn sub(self, o: &Expr) -> Expr {
        let mut out = self.clone();
        for (m, c) in &o.terms {
            out.add_term(m.clone(), -c);
        }
        out
    }
}

impl Sub for Expr {
    type Output = Expr;
    fn sub(self, o: Expr) -> Expr {
        &self - &o
    }
}

impl<'a> Mul<&'a Expr> for &'a Expr {
    type Output = Expr;
    fn mul(self, o: &Expr) -> Expr {
        let mut out = Expr::zero();
        let (outer, inner) = if self.terms.len() <= o.terms.len() {
            (self, o)
        } else {
            (o, self)
        };
        for (m, c) in &outer.terms {
            inner.mul_term(m, c, &mut out);
        }
        out
    }
}

impl Mul for Expr {
    type Output = Expr;
    fn mul(self, o: Expr) -> Expr {
        &self * &o
    }
}

impl Neg for &Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        Expr {
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

impl Neg for Expr {
    type Output = Expr;
    fn neg(self) -> Expr {
        -&self
    }
}

impl std::iter::Sum for Expr {
    fn sum<I: Iterator<Item = Expr>>(iter: I) -> Expr {
        let mut acc = Expr::zero();
        for e in iter {
            acc += e;
        }
        acc
    }
}

impl fmt::Debug for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Printer::new().dsl(self))
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", Printer::new().dsl(self))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    struct Ctx {
        x: Sym,
        t: Sym,
        u: Sym,
        alpha: Param,
        beta: Param,
        gamma: Param,
    }

    fn ctx() -> Ctx {
        Ctx {
            x: Sym::new(0, "x"),
            t: Sym::new(1, "t"),
            u: Sym::new(0, "u"),
            alpha: Param::new(0, "alpha", false),
            beta: Param::new(1, "beta", false),
            gamma: Param::new(2, "gamma", true),
        }
    }

    #[test]
    fn binomial_expansion() {
        let c = ctx();
        let ux = Expr::deriv(&c.u, &[&c.x]);
        let ut = Expr::deriv(&c.u, &[&c.t]);
        let lhs = (&ux + &ut).pow(2);
        let rhs = &(&ux * &ux) + &(&(&ux * &ut).scale(&Coeff::from_int(2)) + &(&ut * &ut));
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.len(), 3);
    }

    #[test]
    fn exponential_merging() {
        let c = ctx();
        let u = Expr::jet(&c.u, MultiIndex::empty());
        let t = Expr::indep(&c.t);
        let gu = &Expr::param(&c.gamma) * &u;
        let at2 = (&Expr::param(&c.alpha) * &t).scale(&Coeff::from_int(2));
        let e = &(&Expr::exp(&gu) * &Expr::exp(&at2)) * &Expr::exp(&gu);
        let expected = Expr::exp(&(&gu.scale(&Coeff::from_int(2)) + &at2));
        assert_eq!(e, expected);
        assert_eq!(e.atoms().len(), 1);
    }

    #[test]
    fn cancellation_gives_empty_sum() {
        let c = ctx();
        let gu = &Expr::param(&c.gamma) * &Expr::jet(&c.u, MultiIndex::empty());
        assert!((&gu - &gu).is_zero());
    }

    #[test]
    fn mixed_partials_commute() {
        let c = ctx();
        assert_eq!(
            Expr::deriv(&c.u, &[&c.x, &c.t]),
            Expr::deriv(&c.u, &[&c.t, &c.x])
        );
    }

    #[test]
    fn partial_examples() {
        let c = ctx();
        let u = Expr::jet(&c.u, MultiIndex::empty());
        let ux_atom = Atom::jet(&c.u, MultiIndex::from_vars([&c.x]));
        let ux = Expr::atom(ux_atom.clone());
        let e = &u * &ux.pow(2);
        assert_eq!(e.partial(&ux_atom), (&u * &ux).scale(&Coeff::from_int(2)));

        let x = Expr::indep(&c.x);
        let u_atom = Atom::jet(&c.u, MultiIndex::empty());
        assert!((&x * &ux).partial(&u_atom).is_zero());

        let theta = &(&(&Expr::param(&c.gamma) * &u)
            + &(&Expr::param(&c.alpha) * &Expr::indep(&c.t)))
            + &(&Expr::param(&c.beta) * &x);
        let e2 = Expr::exp(&theta.scale(&Coeff::from_int(2)));
        let d = e2.partial(&u_atom);
        assert_eq!(
            d,
            e2.scale(&(&Coeff::param(c.gamma.clone()) * &Coeff::from_int(2)))
        );
    }

    #[test]
    fn substitution_is_simultaneous() {
        let c = ctx();
        let u = Expr::jet(&c.u, MultiIndex::empty());
        let ux = Expr::deriv(&c.u, &[&c.x]);
        let x = Expr::indep(&c.x);
        let v = Sym::new(1, "v");
        let v_atom = Atom::jet(&v, MultiIndex::empty());
        let e = &Expr::atom(v_atom.clone()) * &ux;
        let b = BTreeMap::from([(v_atom, &u - &(&x * &ux))]);
        let got = e.substitute(&b);
        assert_eq!(got, &(&u * &ux) - &(&x * &ux.pow(2)));
    }

    #[test]
    fn exponent_collapse_to_one() {
        let c = ctx();
        let u_atom = Atom::jet(&c.u, MultiIndex::empty());
        let e = Expr::exp(&(&Expr::param(&c.gamma) * &Expr::atom(u_atom.clone())));
        let b = BTreeMap::from([(u_atom, Expr::zero())]);
        assert_eq!(e.substitute(&b), Expr::one());
        let b = BTreeMap::from([(Atom::jet(&c.u, MultiIndex::empty()), Expr::from_int(2))]);
        let collapsed = e.substitute(&b);
        assert!(matches!(collapsed.as_atom(), Some(Atom::ExpConst(_))));
    }

    #[test]
    fn collect_splits_selected_atoms() {
        let c = ctx();
        let u_atom = Atom::jet(&c.u, MultiIndex::empty());
        let ux_atom = Atom::jet(&c.u, MultiIndex::from_vars([&c.x]));
        let c1 = Param::new(10, "c1", false);
        let c2 = Param::new(11, "c2", false);
        let x = Expr::indep(&c.x);
        let e = &(&(&Expr::param(&c1) * &Expr::atom(ux_atom.clone()))
            + &(&(&Expr::param(&c2) * &x) * &Expr::atom(ux_atom.clone())))
            + &(&Expr::param(&c2) * &Expr::atom(u_atom.clone()));
        let sel = BTreeSet::from([u_atom.clone(), ux_atom.clone()]);
        let got = e.collect(&sel);
        assert_eq!(got.len(), 2);
        assert_eq!(
            got[&Monomial::single(ux_atom, 1)],
            &Expr::param(&c1) + &(&Expr::param(&c2) * &x)
        );
        assert_eq!(got[&Monomial::single(u_atom, 1)], Expr::param(&c2));
        assert!(Expr::zero().collect(&sel).is_empty());
    }

    #[test]
    fn multi_index_combinatorics() {
        let c = ctx();
        let xt = MultiIndex::from_vars([&c.x, &c.t]);
        let xxt = MultiIndex::from_vars([&c.x, &c.x, &c.t]);
        assert_eq!(xt.orderings(), 2);
        assert_eq!(xxt.orderings(), 3);
        assert_eq!(xxt.binomial(&MultiIndex::from_vars([&c.x])), 2);
        assert_eq!(xxt.sub_indices().len(), 6);
        assert_eq!(xxt.sub(&xt), Some(MultiIndex::from_vars([&c.x])));
        assert_eq!(xt.sub(&xxt), None);
    }
}
