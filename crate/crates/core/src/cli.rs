//! Command dispatch over a loaded session.

use thiserror::Error;

use crate::ansatz::{self, AnsatzError, AnsatzProblem, Target};
use crate::conslaw::{ibragimov_vector, verify_divergence, CancelToken, Cancelled, Generator};
use crate::determining::{
    adjoint_invariance_conditions, adjoint_symmetry_residual, differential_substitution_residual,
    multiplier_residual, selfadjoint_lambda, symmetry_residual, DeterminingError,
};
use crate::expr::{Coeff, Expr};
use crate::jet::PdeSystem;
use crate::report::{Identity, Rendered, Report, Status};
use crate::session::{Object, ParseError, Session};
use crate::variational::is_variational;

pub const COMMANDS: &[&str] = &[
    "variational-check",
    "symmetry-check",
    "adjoint-check",
    "substitution-check",
    "selfadjoint-check",
    "multiplier-check",
    "conslaw",
    "verify",
    "ansatz",
];

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Parse(#[from] ParseError),
    #[error("timed out")]
    Timeout,
}

impl From<Cancelled> for CliError {
    fn from(_: Cancelled) -> Self {
        CliError::Timeout
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn determining(e: DeterminingError) -> CliError {
    usage(e.to_string())
}

/// Splits `[a, b]` at top-level commas; a bare expression is one item.
fn split_list(text: &str) -> Vec<&str> {
    let t = text.trim();
    let Some(inner) = t.strip_prefix('[').and_then(|r| r.strip_suffix(']')) else {
        return vec![t];
    };
    let mut parts = Vec::new();
    let (mut depth, mut start) = (0i32, 0);
    for (i, c) in inner.char_indices() {
        match c {
            '[' | '(' => depth += 1,
            ']' | ')' => depth -= 1,
            ',' if depth == 0 => {
                parts.push(inner[start..i].trim());
                start = i + 1;
            }
            _ => {}
        }
    }
    parts.push(inner[start..].trim());
    parts
}

fn inline<'a>(word: &'a str, keys: &[&str]) -> Option<&'a str> {
    let (k, v) = word.split_once('=')?;
    keys.contains(&k.trim()).then_some(v)
}

fn expr_list(s: &Session, text: &str) -> Result<Vec<Expr>, CliError> {
    split_list(text)
        .into_iter()
        .map(|p| Ok(s.expr(p)?))
        .collect()
}

/// A characteristic: a `char` name or an inline `phi=...`.
fn characteristic(s: &Session, word: &str) -> Result<Vec<Expr>, CliError> {
    if let Some(v) = inline(word, &["phi", "lambda", "eta", "chi", "v"]) {
        return expr_list(s, v);
    }
    match s.get(word) {
        Some(Object::Char(c)) => Ok(c.clone()),
        Some(o) => Err(usage(format!(
            "'{}' is a {}, not a characteristic",
            word,
            o.kind()
        ))),
        None => Err(usage(format!("unknown characteristic '{}'", word))),
    }
}

/// A generator: a `gen` name, a `char` name read as `η`, or `eta=...`.
fn generator(s: &Session, sys: &PdeSystem, word: &str) -> Result<Generator, CliError> {
    if let Some(v) = inline(word, &["eta"]) {
        return Ok(Generator::evolutionary(sys, expr_list(s, v)?));
    }
    match s.get(word) {
        Some(Object::Gen(g)) => Ok(g.clone()),
        Some(Object::Char(c)) => Ok(Generator::evolutionary(sys, c.clone())),
        Some(o) => Err(usage(format!(
            "'{}' is a {}, not a generator",
            word,
            o.kind()
        ))),
        None => Err(usage(format!("unknown generator '{}'", word))),
    }
}

fn vector(s: &Session, word: &str) -> Result<Vec<Expr>, CliError> {
    if let Some(v) = inline(word, &["C"]) {
        return expr_list(s, v);
    }
    match s.get(word) {
        Some(Object::Vector(c)) => Ok(c.clone()),
        Some(o) => Err(usage(format!("'{}' is a {}, not a vector", word, o.kind()))),
        None => Err(usage(format!("unknown vector '{}'", word))),
    }
}

fn one_arg<'a>(cmd: &str, args: &'a [String]) -> Result<&'a str, CliError> {
    match args {
        [a] => Ok(a),
        _ => Err(usage(format!("usage: {} <name>", cmd))),
    }
}

fn by_equation(sys: &PdeSystem) -> Vec<String> {
    sys.equations().iter().map(|e| e.name.clone()).collect()
}

fn by_dependent(sys: &PdeSystem) -> Vec<String> {
    sys.dep().iter().map(|u| u.name().to_string()).collect()
}

fn residuals(r: &mut Report, s: &Session, prefix: &str, labels: &[String], es: &[Expr]) {
    for (l, e) in labels.iter().zip(es) {
        r.residual(s, format!("{}[{}]", prefix, l), e);
    }
}

fn index_label(sys: &PdeSystem, b: usize, vars: &[crate::symbol::Sym]) -> String {
    let mut out = sys.equations()[b].name.clone();
    for v in vars {
        out.push(',');
        out.push_str(v.name());
    }
    out
}

/// Runs one command against `sys`, which is the session's system with or
/// without its rewrite rules.
pub fn dispatch(
    s: &Session,
    sys: &PdeSystem,
    words: &[String],
    cancel: &CancelToken,
) -> Result<Report, CliError> {
    let (cmd, args) = words
        .split_first()
        .ok_or_else(|| usage("missing command"))?;
    let mut r = Report::new(words.join(" "));
    match cmd.as_str() {
        "variational-check" => {
            if !args.is_empty() {
                return Err(usage("variational-check takes no arguments"));
            }
            let c = is_variational(sys);
            if let Some(w) = &c.witness {
                let vars: Vec<String> = w
                    .index
                    .vars()
                    .iter()
                    .map(|v| v.name().to_string())
                    .collect();
                let label = format!(
                    "witness[{},{};{}]",
                    sys.equations()[w.row].name,
                    sys.dep()[w.col].name(),
                    vars.join(",")
                );
                r.residual(s, label, &w.difference);
                r.detail("linearized", s.show(&w.linearized));
                r.detail("adjoint", s.show(&w.adjoint));
            }
            r.status = if c.variational {
                Status::Zero
            } else {
                Status::Nonzero
            };
        }
        "symmetry-check" => {
            let eta = characteristic(s, one_arg(cmd, args)?)?;
            let res = symmetry_residual(sys, &eta).map_err(determining)?;
            residuals(&mut r, s, "symmetry", &by_equation(sys), &res);
            r.settle();
        }
        "adjoint-check" => {
            let w = characteristic(s, one_arg(cmd, args)?)?;
            let res = adjoint_symmetry_residual(sys, &w).map_err(determining)?;
            residuals(&mut r, s, "adjoint", &by_dependent(sys), &res);
            r.settle();
        }
        "substitution-check" => {
            let phi = characteristic(s, one_arg(cmd, args)?)?;
            match differential_substitution_residual(sys, &phi) {
                Ok(res) => {
                    residuals(&mut r, s, "substitution", &by_dependent(sys), &res);
                    r.settle();
                }
                Err(DeterminingError::TrivialSubstitution) => {
                    r.status = Status::Nonzero;
                    r.detail("failure", DeterminingError::TrivialSubstitution.to_string());
                }
                Err(e) => return Err(determining(e)),
            }
        }
        "selfadjoint-check" => {
            let phi = characteristic(s, one_arg(cmd, args)?)?;
            match selfadjoint_lambda(sys, &phi) {
                Ok(lam) => {
                    let eqs = by_equation(sys);
                    let comps: Vec<(String, &Expr)> = lam
                        .iter()
                        .enumerate()
                        .flat_map(|(a, row)| {
                            let eqs = &eqs;
                            row.iter()
                                .enumerate()
                                .map(move |(b, e)| (format!("{},{}", eqs[a], eqs[b]), e))
                        })
                        .collect();
                    r.vector(s, "lambda", comps);
                    r.status = Status::Zero;
                }
                Err(e @ DeterminingError::Arity { .. }) => return Err(determining(e)),
                Err(e) => {
                    r.status = Status::Nonzero;
                    r.detail("failure", e.to_string());
                    if let Ok(res) = differential_substitution_residual(sys, &phi) {
                        residuals(&mut r, s, "substitution", &by_dependent(sys), &res);
                    }
                }
            }
        }
        "multiplier-check" => {
            let lam = characteristic(s, one_arg(cmd, args)?)?;
            let res = multiplier_residual(sys, &lam).map_err(determining)?;
            residuals(&mut r, s, "multiplier", &by_dependent(sys), &res);
            r.settle();
            let cond = adjoint_invariance_conditions(sys, &lam).map_err(determining)?;
            let deps = by_dependent(sys);
            if let Some(i) = cond.adjoint_part.iter().position(|e| !e.is_zero()) {
                r.detail(
                    "failing_condition",
                    format!(
                        "adjoint-symmetry part for {} is {}",
                        deps[i],
                        s.show(&cond.adjoint_part[i])
                    ),
                );
            } else if let Some(x) = cond.extra.first() {
                let d = if x.index.is_empty() {
                    sys.equations()[x.equation].name.clone()
                } else {
                    format!("D[{}]", index_label(sys, x.equation, &x.index.vars()))
                };
                r.detail(
                    "failing_condition",
                    format!(
                        "coefficient of {} in the Euler derivative for {} is {}",
                        d,
                        deps[x.component],
                        s.show(&x.expr)
                    ),
                );
            }
            for x in &cond.extra {
                r.residual(
                    s,
                    format!(
                        "extra[{};{}]",
                        deps[x.component],
                        index_label(sys, x.equation, &x.index.vars())
                    ),
                    &x.expr,
                );
            }
        }
        "conslaw" => {
            let [g, phi] = args else {
                return Err(usage("usage: conslaw <generator> <substitution>"));
            };
            let g = generator(s, sys, g)?;
            let phi = characteristic(s, phi)?;
            if g.eta.len() != sys.dep().len() || phi.len() != sys.equations().len() {
                return Err(usage(
                    "generator or substitution has the wrong number of components",
                ));
            }
            let c = ibragimov_vector(sys, &g, &phi);
            cancel.check()?;
            let v = verify_divergence(sys, &c.components, cancel)?;
            r.vector(s, "C", component_labels(sys).into_iter().zip(&c.components));
            r.identity = Some(Identity::new(s, sys, &v.identity));
            r.residual(s, "divergence", &v.reduced_divergence);
            r.detail("nontrivial", v.nontrivial.to_string());
            r.settle();
        }
        "verify" => {
            let c = vector(s, one_arg(cmd, args)?)?;
            if c.len() != sys.indep().len() {
                return Err(usage("vector has the wrong number of components"));
            }
            let v = verify_divergence(sys, &c, cancel)?;
            r.vector(s, "C", component_labels(sys).into_iter().zip(&c));
            r.identity = Some(Identity::new(s, sys, &v.identity));
            r.residual(s, "divergence", &v.reduced_divergence);
            r.detail("nontrivial", v.nontrivial.to_string());
            r.settle();
        }
        "ansatz" => {
            let (target, names) = args
                .split_first()
                .ok_or_else(|| usage("usage: ansatz <target> <basis>..."))?;
            let target = Target::from_name(target)
                .ok_or_else(|| usage(format!("unknown ansatz target '{}'", target)))?;
            if names.is_empty() {
                return Err(usage("ansatz needs at least one basis"));
            }
            let mut basis = Vec::new();
            for n in names {
                match s.get(n) {
                    Some(Object::Basis(b)) => basis.extend(b.iter().cloned()),
                    Some(Object::Char(c)) => basis.push(c.clone()),
                    _ => return Err(usage(format!("unknown basis '{}'", n))),
                }
            }
            let p =
                AnsatzProblem::new(sys.clone(), target, basis).map_err(|e| usage(e.to_string()))?;
            match ansatz::solve(&p) {
                Ok(sol) => {
                    for (k, chi) in sol.solutions.iter().enumerate() {
                        let labels = match target {
                            Target::Symmetry => by_dependent(sys),
                            _ => by_equation(sys),
                        };
                        r.vector(s, format!("solution{}", k + 1), labels.into_iter().zip(chi));
                    }
                    for (k, c) in sol.result.nullspace.iter().enumerate() {
                        r.detail(format!("coefficients{}", k + 1), coeff_list(s, c));
                    }
                    r.side_conditions = sol
                        .result
                        .side_conditions
                        .iter()
                        .map(|c| Rendered::new(s, c))
                        .collect();
                    r.detail("dimension", sol.solutions.len().to_string());
                    r.detail("unknowns", p.basis.len().to_string());
                    r.status = if sol.solutions.is_empty() {
                        Status::Nonzero
                    } else {
                        Status::Zero
                    };
                }
                Err(e @ AnsatzError::Unsound(_)) => {
                    r.status = Status::Nonzero;
                    r.detail("failure", e.to_string());
                }
                Err(e) => return Err(usage(e.to_string())),
            }
        }
        other => return Err(usage(format!("unknown command '{}'", other))),
    }
    Ok(r)
}

fn coeff_list(s: &Session, c: &[Coeff]) -> String {
    let parts: Vec<String> = c
        .iter()
        .map(|k| s.show(&Expr::from_coeff(k.clone())))
        .collect();
    format!("[{}]", parts.join(", "))
}

fn component_labels(sys: &PdeSystem) -> Vec<String> {
    sys.indep().iter().map(|x| x.name().to_string()).collect()
}

/// Runs every `run` command of the session in order. A `--no-rules` word
/// disables the rewrite rules for that command.
pub fn batch(s: &Session, sys: &PdeSystem, cancel: &CancelToken) -> Result<Report, CliError> {
    let mut r = Report::new("batch");
    let bare = sys.with_rules(crate::expr::RuleSet::empty());
    for c in &s.commands {
        let no_rules = c.words.iter().any(|w| w == "--no-rules");
        let words: Vec<String> = c
            .words
            .iter()
            .filter(|w| *w != "--no-rules")
            .cloned()
            .collect();
        let target = if no_rules { &bare } else { sys };
        let sub = match dispatch(s, target, &words, cancel) {
            Ok(mut sub) => {
                sub.command = c.words.join(" ");
                sub
            }
            Err(CliError::Timeout) => return Err(CliError::Timeout),
            Err(e) => Report::error(
                c.words.join(" "),
                format!("{}:{}: {}", c.span.line, c.span.col, e),
            ),
        };
        r.status = r.status.max(sub.status);
        r.reports.push(sub);
    }
    r.detail("commands", s.commands.len().to_string());
    Ok(r)
}
