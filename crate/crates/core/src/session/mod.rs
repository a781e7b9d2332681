//! Session files: declarations, equations, rules, named characteristics,
//! generators, vectors and commands.

pub mod pretty;
pub mod syntax;

use std::collections::{BTreeMap, HashMap};

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::conslaw::Generator;
use crate::expr::{
    invert, Atom, Coeff, Expr, FuncAtom, JetVar, MultiIndex, Printer, RewriteRule, RuleSet,
};
use crate::jet::{
    adjoint_symbols, solve_leading, total_derivative, PdeSystem, SystemDraft, SystemError,
};
use crate::symbol::{Param, Sym};
pub use syntax::{parse_expr, parse_session, ParseError, SessionFile, Span};
use syntax::{BinOp, DVar, Ident, Kind, Node, Stmt, RESERVED};

#[derive(Clone, Debug)]
enum Binding {
    Indep(Sym),
    Dep(Sym),
    Param(Param),
    Func(Sym, Vec<Expr>),
    Let(Expr),
}

/// Named objects a command can refer to.
#[derive(Clone, Debug, PartialEq)]
pub enum Object {
    Char(Vec<Expr>),
    Gen(Generator),
    Vector(Vec<Expr>),
    Basis(Vec<Vec<Expr>>),
}

impl Object {
    pub fn kind(&self) -> &'static str {
        match self {
            Object::Char(_) => "char",
            Object::Gen(_) => "gen",
            Object::Vector(_) => "vector",
            Object::Basis(_) => "basis",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Command {
    pub words: Vec<String>,
    pub span: Span,
}

/// A checked session.
#[derive(Clone, Debug)]
pub struct Session {
    pub indep: Vec<Sym>,
    pub dep: Vec<Sym>,
    pub params: Vec<Param>,
    pub system: Option<PdeSystem>,
    pub rules: Vec<(String, RewriteRule)>,
    pub objects: BTreeMap<String, Object>,
    pub commands: Vec<Command>,
    pub printer: Printer,
    scope: HashMap<String, Binding>,
}

/// Parses and checks a session file.
pub fn load_session(src: &str) -> Result<Session, ParseError> {
    check(&parse_session(src)?)
}

pub fn check(file: &SessionFile) -> Result<Session, ParseError> {
    let mut s = Session {
        indep: Vec::new(),
        dep: Vec::new(),
        params: Vec::new(),
        system: None,
        rules: Vec::new(),
        objects: BTreeMap::new(),
        commands: Vec::new(),
        printer: Printer::new(),
        scope: HashMap::new(),
    };
    prebind_adjoint(&mut s, file);
    let mut eqs: Vec<(Ident, Expr, Option<JetVar>)> = Vec::new();
    let mut func_rank = 0;
    for st in &file.statements {
        match &st.stmt {
            Stmt::Indep(names) => {
                for n in names {
                    let sym = Sym::new(s.indep.len() as u32, n.name.as_str());
                    s.bind(n, Binding::Indep(sym.clone()))?;
                    s.indep.push(sym);
                }
            }
            Stmt::Dep(names) => {
                for n in names {
                    let sym = Sym::new(s.dep.len() as u32, n.name.as_str());
                    s.bind(n, Binding::Dep(sym.clone()))?;
                    s.dep.push(sym);
                }
            }
            Stmt::Param { names, nonzero } => {
                for n in names {
                    let p = Param::new(s.params.len() as u32, n.name.as_str(), *nonzero);
                    s.bind(n, Binding::Param(p.clone()))?;
                    s.params.push(p);
                }
            }
            Stmt::Function { name, args } => {
                let args = args
                    .iter()
                    .map(|a| s.eval(a))
                    .collect::<Result<Vec<_>, _>>()?;
                let sym = Sym::new(func_rank, name.name.as_str());
                func_rank += 1;
                s.bind(name, Binding::Func(sym, args))?;
            }
            Stmt::Let { name, value } => {
                let v = s.eval(value)?;
                s.bind(name, Binding::Let(v))?;
            }
            Stmt::Eq {
                name,
                lhs,
                rhs,
                leading,
            } => {
                if eqs.iter().any(|(n, _, _)| n.name == name.name) {
                    return Err(ParseError::at(
                        name.span,
                        format!("duplicate declaration '{}'", name.name),
                    ));
                }
                let e = &s.eval(lhs)? - &s.eval(rhs)?;
                let lead = match leading {
                    None => None,
                    Some(l) => match s.eval(l)?.as_atom() {
                        Some(Atom::Jet(j)) if s.eval(l)?.terms().next().unwrap().1.is_one() => {
                            Some(j.clone())
                        }
                        _ => {
                            return Err(ParseError::at(
                                l.span,
                                "leading term must be a derivative of a dependent variable",
                            ))
                        }
                    },
                };
                eqs.push((name.clone(), e, lead));
            }
            Stmt::Rule { name, lhs, rhs } => {
                if s.rules.iter().any(|(n, _)| *n == name.name) {
                    return Err(ParseError::at(
                        name.span,
                        format!("duplicate declaration '{}'", name.name),
                    ));
                }
                let l = s.eval(lhs)?;
                let f = match l.as_atom() {
                    Some(Atom::Func(f)) if l.terms().next().unwrap().1.is_one() => f.clone(),
                    _ => {
                        return Err(ParseError::at(
                            lhs.span,
                            "rule left-hand side must be a function derivative",
                        ))
                    }
                };
                let r = s.eval(rhs)?;
                let rule =
                    RewriteRule::new(f, r).map_err(|e| ParseError::at(st.span, e.to_string()))?;
                s.rules.push((name.name.clone(), rule));
            }
            Stmt::Char { name, value, .. } => {
                let v = s.eval_list(value)?;
                s.define(name, Object::Char(v))?;
            }
            Stmt::Gen { name, xi, eta } => {
                if xi.len() != s.indep.len() || eta.len() != s.dep.len() {
                    return Err(ParseError::at(
                        st.span,
                        format!(
                            "generator needs {} xi and {} eta components",
                            s.indep.len(),
                            s.dep.len()
                        ),
                    ));
                }
                let g = Generator {
                    xi: s.eval_list(xi)?,
                    eta: s.eval_list(eta)?,
                };
                s.define(name, Object::Gen(g))?;
            }
            Stmt::Vector { name, comps } => {
                if comps.len() != s.indep.len() {
                    return Err(ParseError::at(
                        st.span,
                        format!("vector needs {} components", s.indep.len()),
                    ));
                }
                let v = s.eval_list(comps)?;
                s.define(name, Object::Vector(v))?;
            }
            Stmt::Basis { name, elems, .. } => {
                let v = elems
                    .iter()
                    .map(|e| s.eval_list(e))
                    .collect::<Result<Vec<_>, _>>()?;
                s.define(name, Object::Basis(v))?;
            }
            Stmt::Run { words } => s.commands.push(Command {
                words: words.clone(),
                span: st.span,
            }),
        }
    }
    let signatures = s
        .scope
        .values()
        .filter_map(|b| match b {
            Binding::Func(sym, args) => Some((sym.clone(), args.clone())),
            _ => None,
        })
        .collect();
    s.printer = Printer::with_signatures(signatures);
    if !eqs.is_empty() {
        let rules = RuleSet::new(s.rules.iter().map(|(_, r)| r.clone()).collect())
            .map_err(|e| ParseError::at(file.statements[0].span, e.to_string()))?;
        let draft = SystemDraft {
            indep: s.indep.clone(),
            dep: s.dep.clone(),
            equations: eqs
                .iter()
                .map(|(n, e, l)| (n.name.clone(), e.clone(), l.clone()))
                .collect(),
            rules,
        };
        let sys = solve_leading(draft).map_err(|e| {
            let name = match &e {
                SystemError::Nonlinear(n)
                | SystemError::InRemainder(n)
                | SystemError::LeadingCoefficient(n, _)
                | SystemError::NoLeading(n)
                | SystemError::MissingLeading(n) => Some(n.clone()),
                _ => None,
            };
            let span = name
                .and_then(|n| eqs.iter().find(|(i, _, _)| i.name == n))
                .map(|(i, _, _)| i.span)
                .unwrap_or(eqs[0].0.span);
            ParseError::at(span, e.to_string())
        })?;
        s.system = Some(sys);
    }
    Ok(s)
}

/// Makes the adjoint variables of the future system nameable, unless the
/// file uses their names for something else.
fn prebind_adjoint(s: &mut Session, file: &SessionFile) {
    let mut declared = Vec::new();
    let (mut indep, mut dep, mut n_eq) = (Vec::new(), Vec::new(), 0);
    for st in &file.statements {
        match &st.stmt {
            Stmt::Indep(v) => {
                for i in v {
                    indep.push(Sym::new(indep.len() as u32, i.name.as_str()));
                }
            }
            Stmt::Dep(v) => {
                for i in v {
                    dep.push(Sym::new(dep.len() as u32, i.name.as_str()));
                }
            }
            Stmt::Param { names, .. } => declared.extend(names.iter().map(|i| i.name.clone())),
            Stmt::Function { name, .. }
            | Stmt::Let { name, .. }
            | Stmt::Char { name, .. }
            | Stmt::Gen { name, .. }
            | Stmt::Vector { name, .. }
            | Stmt::Basis { name, .. } => declared.push(name.name.clone()),
            Stmt::Eq { .. } => n_eq += 1,
            Stmt::Rule { .. } | Stmt::Run { .. } => {}
        }
    }
    for v in adjoint_symbols(&indep, &dep, n_eq) {
        if !declared.iter().any(|d| d == v.name()) {
            s.scope.insert(v.name().to_string(), Binding::Dep(v));
        }
    }
}

fn expr_err(span: Span, e: impl ToString) -> ParseError {
    ParseError::at(span, e.to_string())
}

impl Session {
    fn bind(&mut self, name: &Ident, b: Binding) -> Result<(), ParseError> {
        if RESERVED.contains(&name.name.as_str()) {
            return Err(ParseError::at(
                name.span,
                format!("'{}' is reserved", name.name),
            ));
        }
        if self.scope.contains_key(&name.name) || self.objects.contains_key(&name.name) {
            return Err(ParseError::at(
                name.span,
                format!("duplicate declaration '{}'", name.name),
            ));
        }
        self.scope.insert(name.name.clone(), b);
        Ok(())
    }

    fn define(&mut self, name: &Ident, o: Object) -> Result<(), ParseError> {
        if self.scope.contains_key(&name.name) || self.objects.contains_key(&name.name) {
            return Err(ParseError::at(
                name.span,
                format!("duplicate declaration '{}'", name.name),
            ));
        }
        self.objects.insert(name.name.clone(), o);
        Ok(())
    }

    /// The system, or an error if the session declares no equations.
    pub fn require_system(&self) -> Result<&PdeSystem, String> {
        self.system
            .as_ref()
            .ok_or_else(|| "session declares no equations".to_string())
    }

    /// Parses and resolves an expression in the session's scope.
    pub fn expr(&self, text: &str) -> Result<Expr, ParseError> {
        self.eval(&parse_expr(text)?)
    }

    pub fn get(&self, name: &str) -> Option<&Object> {
        self.objects.get(name)
    }

    fn eval_list(&self, v: &[Node]) -> Result<Vec<Expr>, ParseError> {
        v.iter().map(|n| self.eval(n)).collect()
    }

    fn indep_sym(&self, i: &Ident) -> Result<Sym, ParseError> {
        match self.scope.get(&i.name) {
            Some(Binding::Indep(s)) => Ok(s.clone()),
            Some(_) => Err(ParseError::at(
                i.span,
                format!("'{}' is not an independent variable", i.name),
            )),
            None => Err(ParseError::at(
                i.span,
                format!("unknown symbol '{}'", i.name),
            )),
        }
    }

    pub fn eval(&self, n: &Node) -> Result<Expr, ParseError> {
        Ok(match &n.kind {
            Kind::Num(k) => Expr::from_coeff(Coeff::from_rational(
                num_rational::BigRational::from_integer(k.clone()),
            )),
            Kind::Name(name) => match self.scope.get(name) {
                Some(Binding::Indep(s)) => Expr::indep(s),
                Some(Binding::Dep(s)) => Expr::jet(s, MultiIndex::empty()),
                Some(Binding::Param(p)) => Expr::param(p),
                Some(Binding::Func(s, args)) => Expr::func(FuncAtom::new(s.clone(), args.clone())),
                Some(Binding::Let(e)) => e.clone(),
                None => return Err(ParseError::at(n.span, format!("unknown symbol '{}'", name))),
            },
            Kind::Call(name, args) => {
                let vals = self.eval_list(args)?;
                match (name.as_str(), self.scope.get(name)) {
                    ("exp", _) => {
                        if vals.len() != 1 {
                            return Err(ParseError::at(n.span, "exp takes one argument"));
                        }
                        Expr::exp(&vals[0])
                    }
                    (_, Some(Binding::Func(s, decl))) => {
                        if decl.len() != vals.len() {
                            return Err(ParseError::at(
                                n.span,
                                format!("'{}' takes {} arguments", name, decl.len()),
                            ));
                        }
                        Expr::func(FuncAtom::new(s.clone(), vals))
                    }
                    (_, Some(_)) => {
                        return Err(ParseError::at(
                            n.span,
                            format!("'{}' is not a function", name),
                        ))
                    }
                    (_, None) => {
                        return Err(ParseError::at(n.span, format!("unknown symbol '{}'", name)))
                    }
                }
            }
            Kind::Deriv(head, vars) => {
                let h = self.eval(head)?;
                let single_func = match h.as_atom() {
                    Some(Atom::Func(f)) if h.terms().next().unwrap().1.is_one() => Some(f.clone()),
                    _ => None,
                };
                match single_func {
                    Some(mut f) => {
                        for v in vars {
                            let slot = match v {
                                DVar::Slot(k) => {
                                    let k = *k as usize;
                                    if k == 0 || k > f.args.len() {
                                        return Err(ParseError::at(
                                            head.span,
                                            format!("slot #{} out of range", k),
                                        ));
                                    }
                                    k - 1
                                }
                                DVar::Var(i) => {
                                    let x = Expr::indep(&self.indep_sym(i)?);
                                    let slots: Vec<usize> =
                                        (0..f.args.len()).filter(|k| f.args[*k] == x).collect();
                                    match slots.as_slice() {
                                        [k] => *k,
                                        _ => {
                                            return Err(ParseError::at(
                                                i.span,
                                                format!(
                                                "'{}' is not a unique argument; use a slot number",
                                                i.name
                                            ),
                                            ))
                                        }
                                    }
                                }
                            };
                            f = f.derive_slot(slot);
                        }
                        Expr::func(f)
                    }
                    None => {
                        let mut e = h;
                        for v in vars {
                            match v {
                                DVar::Var(i) => e = total_derivative(&e, &self.indep_sym(i)?),
                                DVar::Slot(_) => {
                                    return Err(ParseError::at(
                                        head.span,
                                        "slot derivative of a non-function",
                                    ))
                                }
                            }
                        }
                        e
                    }
                }
            }
            Kind::Total(head, vars) => {
                let mut e = self.eval(head)?;
                for i in vars {
                    e = total_derivative(&e, &self.indep_sym(i)?);
                }
                e
            }
            Kind::Neg(x) => -self.eval(x)?,
            Kind::Bin(op, l, r) => {
                let a = self.eval(l)?;
                let b = self.eval(r)?;
                match op {
                    BinOp::Add => &a + &b,
                    BinOp::Sub => &a - &b,
                    BinOp::Mul => &a * &b,
                    BinOp::Div => &a * &invert(&b).map_err(|e| expr_err(r.span, e))?,
                }
            }
            Kind::Pow(b, k) => {
                let base = self.eval(b)?;
                let big = || ParseError::at(n.span, format!("exponent {} too large", k));
                let m = k.to_i64().ok_or_else(big)?;
                if m.unsigned_abs() > 1000 {
                    return Err(big());
                }
                if *k >= BigInt::from(0) {
                    base.pow(m as u32)
                } else {
                    invert(&base)
                        .map_err(|e| expr_err(n.span, e))?
                        .pow(m.unsigned_abs() as u32)
                }
            }
        })
    }

    /// DSL rendering using the session's function signatures.
    pub fn show(&self, e: &Expr) -> String {
        self.printer.dsl(e)
    }

    pub fn latex(&self, e: &Expr) -> String {
        self.printer.latex(e)
    }
}
