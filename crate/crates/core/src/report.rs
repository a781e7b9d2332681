//! Command reports and their text, JSON and LaTeX renderings.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::determining::EDecomposition;
use crate::expr::Expr;
use crate::jet::PdeSystem;
use crate::session::Session;

pub const SCHEMA_VERSION: u32 = 1;

/// JSON schema for [`Report`], shipped with the binary.
pub const SCHEMA: &str = include_str!("../schema/report-v1.schema.json");

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Zero,
    Nonzero,
    Error,
}

impl Status {
    pub fn exit_code(self) -> i32 {
        match self {
            Status::Zero => 0,
            Status::Nonzero => 1,
            Status::Error => 2,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Status::Zero => "zero",
            Status::Nonzero => "nonzero",
            Status::Error => "error",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Rendered {
    pub expr: String,
    pub latex: String,
}

impl Rendered {
    pub fn new(s: &Session, e: &Expr) -> Self {
        Rendered {
            expr: s.show(e),
            latex: s.latex(e),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Residual {
    pub label: String,
    pub expr: String,
    pub latex: String,
    pub zero: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Component {
    pub label: String,
    pub expr: String,
    pub latex: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Vector {
    pub name: String,
    pub components: Vec<Component>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct IdentityTerm {
    pub equation: String,
    pub derivative: Vec<String>,
    pub coefficient: String,
    pub latex: String,
}

/// `D_i C^i = Σ M_β^J D_J E^β + quadratic + remainder`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Identity {
    pub terms: Vec<IdentityTerm>,
    pub remainder: Rendered,
    pub quadratic: Rendered,
}

impl Identity {
    pub fn new(s: &Session, sys: &PdeSystem, d: &EDecomposition) -> Self {
        Identity {
            terms: d
                .terms
                .iter()
                .map(|((b, j), m)| IdentityTerm {
                    equation: sys.equations()[*b].name.clone(),
                    derivative: j.vars().iter().map(|v| v.name().to_string()).collect(),
                    coefficient: s.show(m),
                    latex: s.latex(m),
                })
                .collect(),
            remainder: Rendered::new(s, &d.remainder),
            quadratic: Rendered::new(s, &d.quadratic),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Report {
    pub schema_version: u32,
    pub command: String,
    pub status: Status,
    pub residuals: Vec<Residual>,
    pub vectors: Vec<Vector>,
    pub identity: Option<Identity>,
    pub side_conditions: Vec<Rendered>,
    pub details: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<Report>,
}

impl Report {
    pub fn new(command: impl Into<String>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            command: command.into(),
            status: Status::Zero,
            residuals: Vec::new(),
            vectors: Vec::new(),
            identity: None,
            side_conditions: Vec::new(),
            details: BTreeMap::new(),
            reports: Vec::new(),
        }
    }

    pub fn error(command: impl Into<String>, message: impl Into<String>) -> Self {
        let mut r = Report::new(command);
        r.status = Status::Error;
        r.detail("error", message);
        r
    }

    pub fn detail(&mut self, key: impl Into<String>, value: impl Into<String>) {
        self.details.insert(key.into(), value.into());
    }

    pub fn residual(&mut self, s: &Session, label: impl Into<String>, e: &Expr) {
        self.residuals.push(Residual {
            label: label.into(),
            expr: s.show(e),
            latex: s.latex(e),
            zero: e.is_zero(),
        });
    }

    pub fn vector<'a>(
        &mut self,
        s: &Session,
        name: impl Into<String>,
        comps: impl IntoIterator<Item = (String, &'a Expr)>,
    ) {
        self.vectors.push(Vector {
            name: name.into(),
            components: comps
                .into_iter()
                .map(|(label, e)| Component {
                    label,
                    expr: s.show(e),
                    latex: s.latex(e),
                })
                .collect(),
        });
    }

    /// Status from the residuals: zero iff every residual vanishes.
    pub fn settle(&mut self) {
        self.status = if self.residuals.iter().all(|r| r.zero) {
            Status::Zero
        } else {
            Status::Nonzero
        };
    }

    pub fn exit_code(&self) -> i32 {
        self.status.exit_code()
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn to_text(&self, color: bool) -> String {
        let mut out = String::new();
        self.write_text(&mut out, color);
        out
    }

    fn write_text(&self, out: &mut String, color: bool) {
        let status = if color {
            let code = match self.status {
                Status::Zero => "32",
                Status::Nonzero => "31",
                Status::Error => "33",
            };
            format!("\x1b[{}m{}\x1b[0m", code, self.status.as_str())
        } else {
            self.status.as_str().to_string()
        };
        let _ = writeln!(out, "{}: {}", self.command, status);
        for r in &self.residuals {
            let _ = writeln!(out, "  residual {} = {}", r.label, r.expr);
        }
        for v in &self.vectors {
            let _ = writeln!(out, "  vector {}", v.name);
            for c in &v.components {
                let _ = writeln!(out, "    {} = {}", c.label, c.expr);
            }
        }
        if let Some(id) = &self.identity {
            let _ = writeln!(out, "  identity");
            for t in &id.terms {
                let _ = writeln!(
                    out,
                    "    ({}) * D[{}{}]",
                    t.coefficient,
                    t.equation,
                    t.derivative
                        .iter()
                        .map(|v| format!(",{v}"))
                        .collect::<String>()
                );
            }
            if id.quadratic.expr != "0" {
                let _ = writeln!(out, "    quadratic {}", id.quadratic.expr);
            }
            let _ = writeln!(out, "    remainder {}", id.remainder.expr);
        }
        for c in &self.side_conditions {
            let _ = writeln!(out, "  assuming {} != 0", c.expr);
        }
        for (k, v) in &self.details {
            let _ = writeln!(out, "  {}: {}", k, v);
        }
        for r in &self.reports {
            r.write_text(out, color);
        }
    }

    pub fn to_latex(&self) -> String {
        let mut lines: Vec<String> = Vec::new();
        for r in &self.residuals {
            lines.push(format!("{} &= {}", text_label(&r.label), r.latex));
        }
        for v in &self.vectors {
            for c in &v.components {
                lines.push(format!(
                    "{}^{{{}}} &= {}",
                    text_label(&v.name),
                    c.label,
                    c.latex
                ));
            }
        }
        if let Some(id) = &self.identity {
            let mut rhs: Vec<String> = id
                .terms
                .iter()
                .map(|t| {
                    let d = if t.derivative.is_empty() {
                        String::new()
                    } else {
                        format!("D_{{{}}}", t.derivative.join(""))
                    };
                    format!("\\left({}\\right){}{}", t.latex, d, text_label(&t.equation))
                })
                .collect();
            if id.quadratic.expr != "0" {
                rhs.push(id.quadratic.latex.clone());
            }
            if id.remainder.expr != "0" || rhs.is_empty() {
                rhs.push(id.remainder.latex.clone());
            }
            lines.push(format!("D_i C^i &= {}", rhs.join(" + ")));
        }
        for c in &self.side_conditions {
            lines.push(format!("{} &\\neq 0", c.latex));
        }
        let mut out = format!("% {}: {}\n", self.command, self.status.as_str());
        if !lines.is_empty() {
            out.push_str("\\begin{align*}\n");
            out.push_str(&lines.join(" \\\\\n"));
            out.push_str("\n\\end{align*}\n");
        }
        for r in &self.reports {
            out.push_str(&r.to_latex());
        }
        out
    }
}

fn text_label(s: &str) -> String {
    let escaped: String = s
        .chars()
        .flat_map(|c| match c {
            '_' | '#' | '%' | '&' | '$' | '{' | '}' => vec!['\\', c],
            c => vec![c],
        })
        .collect();
    format!("\\mathrm{{{}}}", escaped)
}
