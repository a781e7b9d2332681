//! Canonical text for session syntax trees.

use super::syntax::{BinOp, DVar, Kind, Node, SessionFile, Stmt};

fn prec(k: &Kind) -> u8 {
    match k {
        Kind::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
        Kind::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
        Kind::Neg(_) => 3,
        Kind::Pow(..) => 4,
        _ => 5,
    }
}

fn at(n: &Node, min: u8) -> String {
    let s = expr(n);
    if prec(&n.kind) < min {
        format!("({})", s)
    } else {
        s
    }
}

pub fn expr(n: &Node) -> String {
    match &n.kind {
        Kind::Num(k) => k.to_string(),
        Kind::Name(s) => s.clone(),
        Kind::Call(f, args) => format!("{}({})", f, list(args)),
        Kind::Deriv(head, vars) => {
            let mut parts = vec![expr(head)];
            parts.extend(vars.iter().map(|v| match v {
                DVar::Var(i) => i.name.clone(),
                DVar::Slot(k) => format!("#{}", k),
            }));
            format!("D[{}]", parts.join(","))
        }
        Kind::Total(head, vars) => {
            let mut parts = vec![expr(head)];
            parts.extend(vars.iter().map(|v| v.name.clone()));
            format!("Total[{}]", parts.join(","))
        }
        Kind::Neg(x) => format!("-{}", at(x, 3)),
        Kind::Bin(op, l, r) => {
            let (sym, lmin, rmin) = match op {
                BinOp::Add => (" + ", 1, 2),
                BinOp::Sub => (" - ", 1, 2),
                BinOp::Mul => ("*", 2, 3),
                BinOp::Div => ("/", 2, 3),
            };
            format!("{}{}{}", at(l, lmin), sym, at(r, rmin))
        }
        Kind::Pow(b, k) => format!("{}^{}", at(b, 5), k),
    }
}

fn list(v: &[Node]) -> String {
    v.iter().map(expr).collect::<Vec<_>>().join(", ")
}

fn names(v: &[super::syntax::Ident]) -> String {
    v.iter()
        .map(|i| i.name.as_str())
        .collect::<Vec<_>>()
        .join(", ")
}

pub fn session(f: &SessionFile) -> String {
    let mut out = String::new();
    for s in &f.statements {
        let line = match &s.stmt {
            Stmt::Indep(v) => format!("indep {};", names(v)),
            Stmt::Dep(v) => format!("dep {};", names(v)),
            Stmt::Param { names: v, nonzero } => {
                format!("param {}{};", names(v), if *nonzero { " != 0" } else { "" })
            }
            Stmt::Function { name, args } => format!("function {}({});", name.name, list(args)),
            Stmt::Let { name, value } => format!("let {} = {};", name.name, expr(value)),
            Stmt::Eq {
                name,
                lhs,
                rhs,
                leading,
            } => {
                let lead = leading
                    .as_ref()
                    .map(|l| format!(" leading {}", expr(l)))
                    .unwrap_or_default();
                format!("eq {}: {} = {}{};", name.name, expr(lhs), expr(rhs), lead)
            }
            Stmt::Rule { name, lhs, rhs } => {
                format!("rule {}: {} -> {};", name.name, expr(lhs), expr(rhs))
            }
            Stmt::Char {
                name,
                value,
                bracketed,
            } => {
                if *bracketed {
                    format!("char {} = [{}];", name.name, list(value))
                } else {
                    format!("char {} = {};", name.name, expr(&value[0]))
                }
            }
            Stmt::Gen { name, xi, eta } => {
                format!(
                    "gen {}: xi = [{}], eta = [{}];",
                    name.name,
                    list(xi),
                    list(eta)
                )
            }
            Stmt::Vector { name, comps } => format!("vector {} = [{}];", name.name, list(comps)),
            Stmt::Basis {
                name,
                elems,
                nested,
            } => {
                let items: Vec<String> = elems
                    .iter()
                    .map(|e| {
                        if *nested {
                            format!("[{}]", list(e))
                        } else {
                            expr(&e[0])
                        }
                    })
                    .collect();
                format!("basis {} = [{}];", name.name, items.join(", "))
            }
            Stmt::Run { words } => format!("run {};", words.join(" ")),
        };
        out.push_str(&line);
        out.push('\n');
    }
    out
}
