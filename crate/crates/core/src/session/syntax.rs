//! Lexer, syntax tree and parser for session files.

use std::fmt;

use num_bigint::BigInt;
use thiserror::Error;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash)]
pub struct Span {
    pub start: usize,
    pub end: usize,
    pub line: u32,
    pub col: u32,
}

impl Span {
    fn to(self, other: Span) -> Span {
        Span {
            end: other.end,
            ..self
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub message: String,
    pub line: u32,
    pub col: u32,
}

impl ParseError {
    pub fn at(span: Span, message: impl Into<String>) -> Self {
        ParseError {
            message: message.into(),
            line: span.line,
            col: span.col,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Tok {
    Ident(String),
    Int(BigInt),
    Semi,
    Colon,
    Comma,
    Eq,
    Arrow,
    Neq,
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    LBrack,
    RBrack,
    Hash,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "'{}'", s),
            Tok::Int(n) => return write!(f, "'{}'", n),
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Comma => ",",
            Tok::Eq => "=",
            Tok::Arrow => "->",
            Tok::Neq => "!=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Hash => "#",
            Tok::Eof => return f.write_str("end of input"),
        };
        write!(f, "'{}'", s)
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub span: Span,
}

pub fn lex(src: &str) -> Result<Vec<Token>, ParseError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let (mut i, mut line, mut col) = (0usize, 1u32, 1u32);
    while i < bytes.len() {
        let c = bytes[i] as char;
        let span = |len: usize| Span {
            start: i,
            end: i + len,
            line,
            col,
        };
        if c == '\n' {
            i += 1;
            line += 1;
            col = 1;
            continue;
        }
        if c.is_ascii_whitespace() {
            i += 1;
            col += 1;
            continue;
        }
        if c == '/' && bytes.get(i + 1) == Some(&b'/') {
            while i < bytes.len() && bytes[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let (tok, len) = if c.is_ascii_alphabetic() || c == '_' {
            let len = bytes[i..]
                .iter()
                .take_while(|b| b.is_ascii_alphanumeric() || **b == b'_')
                .count();
            (Tok::Ident(src[i..i + len].to_string()), len)
        } else if c.is_ascii_digit() {
            let len = bytes[i..].iter().take_while(|b| b.is_ascii_digit()).count();
            (Tok::Int(src[i..i + len].parse().unwrap()), len)
        } else {
            let two = &src[i..(i + 2).min(src.len())];
            match two {
                "->" => (Tok::Arrow, 2),
                "!=" => (Tok::Neq, 2),
                _ => {
                    let t = match c {
                        ';' => Tok::Semi,
                        ':' => Tok::Colon,
                        ',' => Tok::Comma,
                        '=' => Tok::Eq,
                        '+' => Tok::Plus,
                        '-' => Tok::Minus,
                        '*' => Tok::Star,
                        '/' => Tok::Slash,
                        '^' => Tok::Caret,
                        '(' => Tok::LParen,
                        ')' => Tok::RParen,
                        '[' => Tok::LBrack,
                        ']' => Tok::RBrack,
                        '#' => Tok::Hash,
                        _ => {
                            let ch = src[i..].chars().next().unwrap();
                            return Err(ParseError::at(
                                span(1),
                                format!("unexpected character '{}'", ch),
                            ));
                        }
                    };
                    (t, 1)
                }
            }
        };
        out.push(Token {
            tok,
            span: span(len),
        });
        i += len;
        col += len as u32;
    }
    out.push(Token {
        tok: Tok::Eof,
        span: Span {
            start: i,
            end: i,
            line,
            col,
        },
    });
    Ok(out)
}

/// Identifier with its position. Equality ignores the position.
#[derive(Clone, Debug)]
pub struct Ident {
    pub name: String,
    pub span: Span,
}

impl PartialEq for Ident {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

#[derive(Clone, Debug, PartialEq)]
pub enum DVar {
    Var(Ident),
    Slot(u32),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Kind {
    Num(BigInt),
    Name(String),
    Call(String, Vec<Node>),
    /// `D[head, v1, v2, ...]`
    Deriv(Box<Node>, Vec<DVar>),
    /// `Total[e, x1, x2, ...]`
    Total(Box<Node>, Vec<Ident>),
    Neg(Box<Node>),
    Bin(BinOp, Box<Node>, Box<Node>),
    Pow(Box<Node>, BigInt),
}

/// Expression node. Equality ignores positions.
#[derive(Clone, Debug)]
pub struct Node {
    pub kind: Kind,
    pub span: Span,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Stmt {
    Indep(Vec<Ident>),
    Dep(Vec<Ident>),
    Param {
        names: Vec<Ident>,
        nonzero: bool,
    },
    Function {
        name: Ident,
        args: Vec<Node>,
    },
    Let {
        name: Ident,
        value: Node,
    },
    Eq {
        name: Ident,
        lhs: Node,
        rhs: Node,
        leading: Option<Node>,
    },
    Rule {
        name: Ident,
        lhs: Node,
        rhs: Node,
    },
    /// `char n = e;` (one component) or `char n = [e1, ...];`
    Char {
        name: Ident,
        value: Vec<Node>,
        bracketed: bool,
    },
    Gen {
        name: Ident,
        xi: Vec<Node>,
        eta: Vec<Node>,
    },
    Vector {
        name: Ident,
        comps: Vec<Node>,
    },
    /// Elements are single expressions unless `nested`.
    Basis {
        name: Ident,
        elems: Vec<Vec<Node>>,
        nested: bool,
    },
    Run {
        words: Vec<String>,
    },
}

#[derive(Clone, Debug)]
pub struct Statement {
    pub stmt: Stmt,
    pub span: Span,
}

impl PartialEq for Statement {
    fn eq(&self, other: &Self) -> bool {
        self.stmt == other.stmt
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct SessionFile {
    pub statements: Vec<Statement>,
}

pub const RESERVED: &[&str] = &["D", "Total", "exp"];

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

pub fn parse_session(src: &str) -> Result<SessionFile, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let mut statements = Vec::new();
    while p.peek() != &Tok::Eof {
        statements.push(p.statement()?);
    }
    Ok(SessionFile { statements })
}

/// Parses a single expression, e.g. a command-line argument.
pub fn parse_expr(src: &str) -> Result<Node, ParseError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    p.expect(Tok::Eof)?;
    Ok(e)
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn span(&self) -> Span {
        self.toks[self.pos].span
    }

    fn prev_span(&self) -> Span {
        self.toks[self.pos.saturating_sub(1)].span
    }

    fn bump(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, what: &str) -> Result<T, ParseError> {
        Err(ParseError::at(
            self.span(),
            format!("expected {}, found {}", what, self.peek()),
        ))
    }

    fn expect(&mut self, t: Tok) -> Result<Span, ParseError> {
        if self.peek() == &t {
            Ok(self.bump().span)
        } else {
            self.error(&t.to_string())
        }
    }

    fn ident(&mut self) -> Result<Ident, ParseError> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let span = self.bump().span;
                Ok(Ident { name, span })
            }
            _ => self.error("identifier"),
        }
    }

    fn keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        match self.peek() {
            Tok::Ident(s) if s == kw => {
                self.bump();
                Ok(())
            }
            _ => self.error(&format!("'{}'", kw)),
        }
    }

    fn ident_list(&mut self) -> Result<Vec<Ident>, ParseError> {
        let mut v = vec![self.ident()?];
        while self.eat(&Tok::Comma) {
            v.push(self.ident()?);
        }
        Ok(v)
    }

    fn expr_list(&mut self, close: Tok) -> Result<Vec<Node>, ParseError> {
        let mut v = Vec::new();
        if self.peek() == &close {
            return Ok(v);
        }
        v.push(self.expr()?);
        while self.eat(&Tok::Comma) {
            v.push(self.expr()?);
        }
        Ok(v)
    }

    fn bracketed(&mut self) -> Result<Vec<Node>, ParseError> {
        self.expect(Tok::LBrack)?;
        let v = self.expr_list(Tok::RBrack)?;
        self.expect(Tok::RBrack)?;
        Ok(v)
    }

    fn statement(&mut self) -> Result<Statement, ParseError> {
        let start = self.span();
        let kw = match self.peek() {
            Tok::Ident(s) => s.clone(),
            _ => return self.error("statement"),
        };
        self.bump();
        let stmt = match kw.as_str() {
            "indep" => Stmt::Indep(self.ident_list()?),
            "dep" => Stmt::Dep(self.ident_list()?),
            "param" => {
                let names = self.ident_list()?;
                let nonzero = if self.eat(&Tok::Neq) {
                    match self.bump().tok {
                        Tok::Int(n) if n == BigInt::from(0) => true,
                        _ => {
                            return Err(ParseError::at(self.prev_span(), "expected '0' after '!='"))
                        }
                    }
                } else {
                    false
                };
                Stmt::Param { names, nonzero }
            }
            "function" => {
                let name = self.ident()?;
                self.expect(Tok::LParen)?;
                let args = self.expr_list(Tok::RParen)?;
                self.expect(Tok::RParen)?;
                Stmt::Function { name, args }
            }
            "let" => {
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                Stmt::Let {
                    name,
                    value: self.expr()?,
                }
            }
            "eq" => {
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let lhs = self.expr()?;
                self.expect(Tok::Eq)?;
                let rhs = self.expr()?;
                let leading = match self.peek() {
                    Tok::Ident(s) if s == "leading" => {
                        self.bump();
                        Some(self.expr()?)
                    }
                    _ => None,
                };
                Stmt::Eq {
                    name,
                    lhs,
                    rhs,
                    leading,
                }
            }
            "rule" => {
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                let lhs = self.expr()?;
                self.expect(Tok::Arrow)?;
                Stmt::Rule {
                    name,
                    lhs,
                    rhs: self.expr()?,
                }
            }
            "char" => {
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                if self.peek() == &Tok::LBrack {
                    Stmt::Char {
                        name,
                        value: self.bracketed()?,
                        bracketed: true,
                    }
                } else {
                    Stmt::Char {
                        name,
                        value: vec![self.expr()?],
                        bracketed: false,
                    }
                }
            }
            "gen" => {
                let name = self.ident()?;
                self.expect(Tok::Colon)?;
                self.keyword("xi")?;
                self.expect(Tok::Eq)?;
                let xi = self.bracketed()?;
                self.expect(Tok::Comma)?;
                self.keyword("eta")?;
                self.expect(Tok::Eq)?;
                let eta = self.bracketed()?;
                Stmt::Gen { name, xi, eta }
            }
            "vector" => {
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                Stmt::Vector {
                    name,
                    comps: self.bracketed()?,
                }
            }
            "basis" => {
                let name = self.ident()?;
                self.expect(Tok::Eq)?;
                self.expect(Tok::LBrack)?;
                let nested = self.peek() == &Tok::LBrack;
                let mut elems = Vec::new();
                if self.peek() != &Tok::RBrack {
                    loop {
                        if nested {
                            elems.push(self.bracketed()?);
                        } else {
                            elems.push(vec![self.expr()?]);
                        }
                        if !self.eat(&Tok::Comma) {
                            break;
                        }
                    }
                }
                self.expect(Tok::RBrack)?;
                Stmt::Basis {
                    name,
                    elems,
                    nested,
                }
            }
            "run" => Stmt::Run {
                words: self.words()?,
            },
            other => {
                return Err(ParseError::at(
                    start,
                    format!("unknown statement '{}'", other),
                ));
            }
        };
        self.expect(Tok::Semi)?;
        Ok(Statement {
            stmt,
            span: start.to(self.prev_span()),
        })
    }

    /// Whitespace-separated words up to `;`; adjacent tokens glue, so
    /// `symmetry-check` and `--no-rules` are single words.
    fn words(&mut self) -> Result<Vec<String>, ParseError> {
        let mut words: Vec<String> = Vec::new();
        let mut last_end = None;
        while !matches!(self.peek(), Tok::Semi | Tok::Eof) {
            let t = self.bump();
            let text = match &t.tok {
                Tok::Ident(s) => s.clone(),
                Tok::Int(n) => n.to_string(),
                Tok::Minus => "-".into(),
                _ => {
                    return Err(ParseError::at(
                        t.span,
                        format!("unexpected {} in command", t.tok),
                    ))
                }
            };
            match (last_end, words.last_mut()) {
                (Some(e), Some(w)) if e == t.span.start => w.push_str(&text),
                _ => words.push(text),
            }
            last_end = Some(t.span.end);
        }
        if words.is_empty() {
            return self.error("command name");
        }
        Ok(words)
    }

    pub fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.term()?;
            let span = lhs.span.to(rhs.span);
            lhs = Node {
                kind: Kind::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            let span = lhs.span.to(rhs.span);
            lhs = Node {
                kind: Kind::Bin(op, Box::new(lhs), Box::new(rhs)),
                span,
            };
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        if self.peek() == &Tok::Minus {
            let start = self.bump().span;
            let inner = self.unary()?;
            let span = start.to(inner.span);
            return Ok(Node {
                kind: Kind::Neg(Box::new(inner)),
                span,
            });
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let base = self.primary()?;
        if !self.eat(&Tok::Caret) {
            return Ok(base);
        }
        let neg = self.eat(&Tok::Minus);
        match self.bump().tok {
            Tok::Int(n) => {
                let span = base.span.to(self.prev_span());
                Ok(Node {
                    kind: Kind::Pow(Box::new(base), if neg { -n } else { n }),
                    span,
                })
            }
            _ => Err(ParseError::at(
                self.prev_span(),
                "expected integer exponent",
            )),
        }
    }

    fn primary(&mut self) -> Result<Node, ParseError> {
        let start = self.span();
        match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                Ok(Node {
                    kind: Kind::Num(n),
                    span: start,
                })
            }
            Tok::LParen => {
                self.bump();
                let mut e = self.expr()?;
                self.expect(Tok::RParen)?;
                e.span = start.to(self.prev_span());
                Ok(e)
            }
            Tok::Ident(name) => {
                self.bump();
                match self.peek() {
                    Tok::LBrack if name == "D" => {
                        self.bump();
                        let head = self.expr()?;
                        let mut vars = Vec::new();
                        while self.eat(&Tok::Comma) {
                            if self.eat(&Tok::Hash) {
                                match self.bump().tok {
                                    Tok::Int(n)
                                        if n >= BigInt::from(1) && n <= BigInt::from(u32::MAX) =>
                                    {
                                        vars.push(DVar::Slot(n.try_into().unwrap()))
                                    }
                                    _ => {
                                        return Err(ParseError::at(
                                            self.prev_span(),
                                            "expected slot number",
                                        ))
                                    }
                                }
                            } else {
                                vars.push(DVar::Var(self.ident()?));
                            }
                        }
                        if vars.is_empty() {
                            return Err(ParseError::at(self.span(), "expected ',' and a variable"));
                        }
                        self.expect(Tok::RBrack)?;
                        Ok(Node {
                            kind: Kind::Deriv(Box::new(head), vars),
                            span: start.to(self.prev_span()),
                        })
                    }
                    Tok::LBrack if name == "Total" => {
                        self.bump();
                        let head = self.expr()?;
                        let mut vars = Vec::new();
                        while self.eat(&Tok::Comma) {
                            vars.push(self.ident()?);
                        }
                        if vars.is_empty() {
                            return Err(ParseError::at(self.span(), "expected ',' and a variable"));
                        }
                        self.expect(Tok::RBrack)?;
                        Ok(Node {
                            kind: Kind::Total(Box::new(head), vars),
                            span: start.to(self.prev_span()),
                        })
                    }
                    Tok::LParen => {
                        self.bump();
                        let args = self.expr_list(Tok::RParen)?;
                        self.expect(Tok::RParen)?;
                        Ok(Node {
                            kind: Kind::Call(name, args),
                            span: start.to(self.prev_span()),
                        })
                    }
                    _ => Ok(Node {
                        kind: Kind::Name(name),
                        span: start,
                    }),
                }
            }
            _ => self.error("expression"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn malformed_derivative_reports_position() {
        let err = parse_session("indep x;\ndep u;\nchar c = D[u,];").unwrap_err();
        assert_eq!((err.line, err.col), (3, 14));
        assert!(err.message.contains("identifier"), "{}", err.message);
    }

    #[test]
    fn run_words_glue() {
        let f = parse_session("run symmetry-check eta1 --no-rules;").unwrap();
        assert_eq!(
            f.statements[0].stmt,
            Stmt::Run {
                words: vec!["symmetry-check".into(), "eta1".into(), "--no-rules".into()]
            }
        );
    }

    #[test]
    fn precedence() {
        let a = parse_expr("-x^2*y + z").unwrap();
        let b = parse_expr("((-(x^2))*y) + z").unwrap();
        assert_eq!(a, b);
        assert!(parse_expr("x^y").is_err());
    }
}
