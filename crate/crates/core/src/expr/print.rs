//! Text (DSL syntax) and LaTeX rendering of canonical expressions.

use std::collections::HashMap;

use num_rational::BigRational;
use num_traits::{One, Signed};

use super::{Atom, Coeff, Expr, FuncAtom, JetVar, Monomial, PMono, Poly};
use crate::symbol::Sym;

/// Renders expressions. Knows the declared argument lists of opaque
/// functions so that `f(x, t)` can be printed as plain `f`.
#[derive(Clone, Debug, Default)]
pub struct Printer {
    signatures: HashMap<Sym, Vec<Expr>>,
}

impl Printer {
    pub fn new() -> Self {
        Printer::default()
    }

    pub fn with_signatures(signatures: HashMap<Sym, Vec<Expr>>) -> Self {
        Printer { signatures }
    }

    fn declared(&self, f: &FuncAtom) -> bool {
        self.signatures.get(&f.name).is_some_and(|a| *a == f.args)
    }

    pub fn dsl(&self, e: &Expr) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in e.terms().enumerate() {
            let neg = c.is_negative();
            let body = self.dsl_term(m, &if neg { -c } else { c.clone() });
            match (i, neg) {
                (0, false) => out.push_str(&body),
                (0, true) => {
                    out.push('-');
                    out.push_str(&body);
                }
                (_, false) => {
                    out.push_str(" + ");
                    out.push_str(&body);
                }
                (_, true) => {
                    out.push_str(" - ");
                    out.push_str(&body);
                }
            }
        }
        out
    }

    fn dsl_term(&self, m: &Monomial, c: &Coeff) -> String {
        let factors: Vec<String> = m
            .factors()
            .iter()
            .map(|(a, k)| {
                let s = self.dsl_atom(a);
                if *k > 1 {
                    format!("{}^{}", s, k)
                } else {
                    s
                }
            })
            .collect();
        if factors.is_empty() {
            return dsl_coeff(c);
        }
        if c.is_one() {
            return factors.join("*");
        }
        format!("{}*{}", dsl_coeff(c), factors.join("*"))
    }

    pub fn dsl_atom(&self, a: &Atom) -> String {
        match a {
            Atom::Indep(v) => v.name().to_string(),
            Atom::Jet(j) => dsl_jet(j),
            Atom::Func(f) => self.dsl_func(f),
            Atom::Exp(q) => format!("exp({})", self.dsl(q)),
            Atom::ExpConst(c) => format!("exp({})", dsl_coeff(c)),
        }
    }

    fn dsl_func(&self, f: &FuncAtom) -> String {
        let head = if self.declared(f) {
            f.name.name().to_string()
        } else {
            let args: Vec<String> = f.args.iter().map(|a| self.dsl(a)).collect();
            format!("{}({})", f.name.name(), args.join(", "))
        };
        if f.order() == 0 {
            return head;
        }
        let mut parts = vec![head];
        for (k, n) in f.orders.iter().enumerate() {
            let slot = self.slot_label(f, k);
            for _ in 0..*n {
                parts.push(slot.clone());
            }
        }
        format!("D[{}]", parts.join(","))
    }

    /// Argument slots are named by the independent variable when the
    /// argument is one and occurs once, otherwise by position `#k` (1-based).
    fn slot_label(&self, f: &FuncAtom, k: usize) -> String {
        let arg = &f.args[k];
        let unique = f.args.iter().filter(|a| *a == arg).count() == 1;
        if unique && matches!(arg.as_atom(), Some(Atom::Indep(_))) {
            self.dsl(arg)
        } else {
            format!("#{}", k + 1)
        }
    }

    pub fn latex(&self, e: &Expr) -> String {
        if e.is_zero() {
            return "0".to_string();
        }
        let mut out = String::new();
        for (i, (m, c)) in e.terms().enumerate() {
            let neg = c.is_negative();
            let body = self.latex_term(m, &if neg { -c } else { c.clone() });
            if neg {
                out.push('-');
            } else if i > 0 {
                out.push('+');
            }
            out.push_str(&body);
        }
        out
    }

    fn latex_term(&self, m: &Monomial, c: &Coeff) -> String {
        let mut parts = Vec::new();
        if !(c.is_one() && !m.is_one()) {
            parts.push(latex_coeff(c, !m.is_one()));
        }
        for (a, k) in m.factors() {
            let s = self.latex_atom(a);
            if *k > 1 {
                parts.push(format!("{}^{{{}}}", s, k));
            } else {
                parts.push(s);
            }
        }
        join_latex(&parts)
    }

    pub fn latex_atom(&self, a: &Atom) -> String {
        match a {
            Atom::Indep(v) => latex_name(v.name()),
            Atom::Jet(j) => {
                let base = latex_name(j.dep.name());
                if j.index.is_empty() {
                    base
                } else {
                    let sub: String = j
                        .index
                        .vars()
                        .iter()
                        .map(|v| latex_name(v.name()))
                        .collect();
                    format!("{}_{{{}}}", base, sub)
                }
            }
            Atom::Func(f) => {
                let base = latex_name(f.name.name());
                let head = if f.order() == 0 {
                    base
                } else {
                    let mut sub = String::new();
                    for (k, n) in f.orders.iter().enumerate() {
                        for _ in 0..*n {
                            sub.push_str(&self.latex(&f.args[k]));
                        }
                    }
                    format!("{}_{{{}}}", base, sub)
                };
                if self.declared(f) {
                    head
                } else {
                    let args: Vec<String> = f.args.iter().map(|a| self.latex(a)).collect();
                    format!("{}({})", head, args.join(","))
                }
            }
            Atom::Exp(q) => format!("e^{{{}}}", self.latex_exponent(q)),
            Atom::ExpConst(c) => format!("e^{{{}}}", latex_coeff(c, false)),
        }
    }

    /// Pulls a common rational factor out of a sum: `2(\gamma u+\alpha t)`.
    fn latex_exponent(&self, q: &Expr) -> String {
        let content = q.numeric_content();
        if q.len() < 2 || content.is_one() {
            return self.latex(q);
        }
        let inner = q.scale(&Coeff::from_rational(content.recip()));
        format!("{}({})", latex_rational(&content), self.latex(&inner))
    }
}

fn join_latex(parts: &[String]) -> String {
    let mut out = String::new();
    for p in parts {
        if !out.is_empty() && !out.ends_with(|c: char| c.is_ascii_digit()) {
            out.push(' ');
        }
        out.push_str(p);
    }
    out
}

fn dsl_jet(j: &JetVar) -> String {
    if j.index.is_empty() {
        return j.dep.name().to_string();
    }
    let vars: Vec<&str> = j
        .index
        .entries()
        .iter()
        .flat_map(|(v, k)| std::iter::repeat_n(v.name(), *k as usize))
        .collect();
    format!("D[{},{}]", j.dep.name(), vars.join(","))
}

fn dsl_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("{}/{}", q.numer(), q.denom())
    }
}

fn dsl_pmono(m: &PMono) -> String {
    m.factors()
        .iter()
        .map(|(p, e)| {
            if *e > 1 {
                format!("{}^{}", p.name(), e)
            } else {
                p.name().to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("*")
}

fn dsl_poly(p: &Poly) -> String {
    if p.is_zero() {
        return "0".into();
    }
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        let body = if m.is_one() {
            dsl_rational(&a)
        } else if a.is_one() {
            dsl_pmono(m)
        } else {
            format!("{}*{}", dsl_rational(&a), dsl_pmono(m))
        };
        match (i, neg) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&body);
    }
    out
}

/// A coefficient printed so that it parses back as a single factor.
pub(crate) fn dsl_coeff(c: &Coeff) -> String {
    let num = c.numer();
    let den = c.denom();
    if let (false, Some((m, q))) = (den.is_one(), num.as_monomial()) {
        if !q.is_integer() && !q.is_negative() {
            let mut top = vec![q.numer().to_string()];
            if !m.is_one() {
                if q.numer().is_one() {
                    top.clear();
                }
                top.push(dsl_pmono(m));
            }
            let d = if den.len() > 1 {
                format!("({})", dsl_poly(den))
            } else {
                dsl_poly(den)
            };
            return format!("{}/({}*{})", top.join("*"), q.denom(), d);
        }
    }
    let wrap_num = num.len() > 1 || num.leading().is_some_and(|(_, q)| q.is_negative());
    let mut s = if wrap_num {
        format!("({})", dsl_poly(num))
    } else {
        dsl_poly(num)
    };
    if !den.is_one() {
        let wrap = den.len() > 1
            || den
                .as_monomial()
                .is_some_and(|(m, _)| m.factors().len() > 1);
        if wrap {
            s = format!("{}/({})", s, dsl_poly(den));
        } else {
            s = format!("{}/{}", s, dsl_poly(den));
        }
    }
    s
}

fn latex_rational(q: &BigRational) -> String {
    if q.is_integer() {
        q.numer().to_string()
    } else {
        format!("\\frac{{{}}}{{{}}}", q.numer(), q.denom())
    }
}

fn latex_pmono(m: &PMono) -> String {
    let parts: Vec<String> = m
        .factors()
        .iter()
        .map(|(p, e)| {
            let n = latex_name(p.name());
            if *e > 1 {
                format!("{}^{{{}}}", n, e)
            } else {
                n
            }
        })
        .collect();
    join_latex(&parts)
}

fn latex_poly(p: &Poly) -> String {
    let mut out = String::new();
    for (i, (m, c)) in p.terms().rev().enumerate() {
        let neg = c.is_negative();
        let a = c.abs();
        let body = if m.is_one() {
            latex_rational(&a)
        } else if a.is_one() {
            latex_pmono(m)
        } else {
            join_latex(&[latex_rational(&a), latex_pmono(m)])
        };
        if neg {
            out.push('-');
        } else if i > 0 {
            out.push('+');
        }
        out.push_str(&body);
    }
    out
}

fn latex_coeff(c: &Coeff, as_factor: bool) -> String {
    let num = c.numer();
    let den = c.denom();
    if !den.is_one() {
        if let Some((m, q)) = num.as_monomial() {
            if !q.is_integer() && !q.is_negative() {
                let top = if m.is_one() {
                    q.numer().to_string()
                } else if q.numer().is_one() {
                    latex_pmono(m)
                } else {
                    join_latex(&[q.numer().to_string(), latex_pmono(m)])
                };
                let d = if den.len() > 1 {
                    format!("\\left({}\\right)", latex_poly(den))
                } else {
                    latex_poly(den)
                };
                return format!(
                    "\\frac{{{}}}{{{}}}",
                    top,
                    join_latex(&[q.denom().to_string(), d])
                );
            }
        }
        return format!("\\frac{{{}}}{{{}}}", latex_poly(num), latex_poly(den));
    }
    let s = latex_poly(num);
    if as_factor && num.len() > 1 {
        format!("\\left({}\\right)", s)
    } else {
        s
    }
}

/// LaTeX for a symbol name: Greek letters become commands, trailing digits
/// become subscripts.
pub fn latex_name(name: &str) -> String {
    const GREEK: &[&str] = &[
        "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota", "kappa",
        "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon", "phi", "chi", "psi",
        "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi", "Sigma", "Phi", "Psi", "Omega",
    ];
    let stem = name.trim_end_matches(|c: char| c.is_ascii_digit());
    let digits = &name[stem.len()..];
    let base = if GREEK.contains(&stem) {
        format!("\\{}", stem)
    } else if stem.chars().count() <= 1 {
        stem.to_string()
    } else {
        format!("\\mathrm{{{}}}", stem)
    };
    if digits.is_empty() || stem.is_empty() {
        if stem.is_empty() {
            return name.to_string();
        }
        base
    } else {
        format!("{}_{{{}}}", base, digits)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::MultiIndex;
    use crate::symbol::Param;

    #[test]
    fn exponent_rendering_matches_paper_notation() {
        let x = Sym::new(0, "x");
        let t = Sym::new(1, "t");
        let u = Sym::new(0, "u");
        let a = Param::new(0, "alpha", false);
        let b = Param::new(1, "beta", false);
        let g = Param::new(2, "gamma", true);
        let theta = &(&(&Expr::param(&g) * &Expr::jet(&u, MultiIndex::empty()))
            + &(&Expr::param(&a) * &Expr::indep(&t)))
            + &(&Expr::param(&b) * &Expr::indep(&x));
        let e = Expr::exp(&theta.scale(&Coeff::from_int(2)));
        assert_eq!(
            Printer::new().latex(&e),
            "e^{2(\\gamma u+\\alpha t+\\beta x)}"
        );
    }

    #[test]
    fn dsl_rendering() {
        let x = Sym::new(0, "x");
        let t = Sym::new(1, "t");
        let u = Sym::new(0, "u");
        let e = &Expr::deriv(&u, &[&t, &t])
            - &(&Expr::jet(&u, MultiIndex::empty()).pow(2) * &Expr::deriv(&u, &[&x, &x]));
        assert_eq!(Printer::new().dsl(&e), "D[u,t,t] - u^2*D[u,x,x]");
        assert_eq!(Printer::new().latex(&e), "u_{tt}-u^{2} u_{xx}");
    }

    #[test]
    fn names() {
        assert_eq!(latex_name("gamma"), "\\gamma");
        assert_eq!(latex_name("c1"), "c_{1}");
        assert_eq!(latex_name("u"), "u");
        assert_eq!(latex_name("foo"), "\\mathrm{foo}");
    }
}
