//! Text format for fixpoint equation systems.
//!
//! ```text
//! lattice bool;
//! # equation order is the spec
//! mu X = Y | Z;
//! nu Y = Z;
//! mu Z = Y & X;
//! ```
//!
//! Statements:
//!
//! - `lattice bool | chain N | powerset K | diamond | product(A, B)
//!   | finite { elements a b c; order a < b < c; }` (first, defaults to `bool`)
//! - `op NAME/ARITY [monotone] = [v, ...];` registers a table operator
//! - `mu X = e;` and `nu X = e;` define an equation and append it to the spec
//! - `eq X = e;` defines an equation outside the spec
//! - `param X = v;` declares a free variable with input value `v`, or sets the
//!   input value of an already defined variable
//! - `spec mu X, nu Y, ...;` replaces the spec built from `mu`/`nu` lines
//!
//! Expressions use `&`, `|`, `!` (Boolean lattice only), parentheses,
//! `top`, `bot`, element literals (`2`, `{d1,d3}`, `'label'`),
//! `op(name, e, ...)`, and `meet(...)`/`join(...)` for the degenerate
//! zero- and one-operand forms.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::sync::Arc;

use thiserror::Error;

use crate::eqs::{
    element_literal, EqsError, EquationSystem, Expr, OpRegistry, Valuation, VarName, NOT,
};
use crate::lattice::{
    Element, FiniteLattice, LatticeDecl, LatticeError, Poset, Sign, DEFAULT_MAX_ELEMENTS,
};
use crate::semantics::{Fes, SemError, Spec};

const RESERVED: &[&str] = &["top", "bot", "true", "false", "op", "meet", "join"];

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SyntaxError {
    #[error("{line}:{col}: {msg}")]
    Parse {
        line: usize,
        col: usize,
        msg: String,
    },
    #[error("{line}:{col}: {source}")]
    Lattice {
        line: usize,
        col: usize,
        source: LatticeError,
    },
    #[error(transparent)]
    Eqs(#[from] EqsError),
    #[error(transparent)]
    Sem(#[from] SemError),
}

/// A parsed file: the system, its spec and the input valuation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub fes: Fes,
    pub eta: Valuation,
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Ident(String),
    Int(String),
    Quoted(String),
    Sym(char),
    Eof,
}

#[derive(Debug, Clone)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Token>, SyntaxError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1, 1);
    let err = |line, col, msg: String| SyntaxError::Parse { line, col, msg };
    while let Some(&c) = chars.peek() {
        let (tl, tc) = (line, col);
        let mut bump = |chars: &mut std::iter::Peekable<std::str::Chars>| {
            let c = chars.next();
            if c == Some('\n') {
                line += 1;
                col = 1;
            } else {
                col += 1;
            }
            c
        };
        if c.is_whitespace() {
            bump(&mut chars);
        } else if c == '#' {
            while let Some(&c) = chars.peek() {
                if c == '\n' {
                    break;
                }
                bump(&mut chars);
            }
        } else if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Ident(s),
                line: tl,
                col: tc,
            });
        } else if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    bump(&mut chars);
                } else {
                    break;
                }
            }
            out.push(Token {
                tok: Tok::Int(s),
                line: tl,
                col: tc,
            });
        } else if c == '\'' {
            bump(&mut chars);
            let mut s = String::new();
            loop {
                match bump(&mut chars) {
                    Some('\'') => break,
                    Some('\n') | None => {
                        return Err(err(tl, tc, "unterminated quoted label".into()))
                    }
                    Some(c) => s.push(c),
                }
            }
            out.push(Token {
                tok: Tok::Quoted(s),
                line: tl,
                col: tc,
            });
        } else if ";=&|!(),{}<>/[]".contains(c) {
            bump(&mut chars);
            out.push(Token {
                tok: Tok::Sym(c),
                line: tl,
                col: tc,
            });
        } else {
            return Err(err(tl, tc, format!("unexpected character `{c}`")));
        }
    }
    out.push(Token {
        tok: Tok::Eof,
        line,
        col,
    });
    Ok(out)
}

struct Parser {
    toks: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Token {
        &self.toks[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T, SyntaxError> {
        let t = self.peek();
        Err(SyntaxError::Parse {
            line: t.line,
            col: t.col,
            msg: msg.into(),
        })
    }

    fn is_sym(&self, c: char) -> bool {
        self.peek().tok == Tok::Sym(c)
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(&self.peek().tok, Tok::Ident(s) if s == kw)
    }

    fn eat_sym(&mut self, c: char) -> bool {
        if self.is_sym(c) {
            self.next();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, c: char) -> Result<(), SyntaxError> {
        if self.eat_sym(c) {
            Ok(())
        } else {
            self.error(format!(
                "expected `{c}`, found {}",
                describe(&self.peek().tok)
            ))
        }
    }

    fn ident(&mut self) -> Result<String, SyntaxError> {
        match &self.peek().tok {
            Tok::Ident(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            other => self.error(format!("expected a name, found {}", describe(other))),
        }
    }

    fn int(&mut self) -> Result<usize, SyntaxError> {
        match &self.peek().tok {
            Tok::Int(s) => match s.parse() {
                Ok(n) => {
                    self.next();
                    Ok(n)
                }
                Err(_) => self.error("integer out of range"),
            },
            other => self.error(format!("expected an integer, found {}", describe(other))),
        }
    }

    fn lattice_decl(&mut self) -> Result<FiniteLattice, SyntaxError> {
        let (line, col) = (self.peek().line, self.peek().col);
        let wrap = |source| SyntaxError::Lattice { line, col, source };
        let kw = self.ident()?;
        match kw.as_str() {
            "bool" => Ok(FiniteLattice::bool()),
            "chain" => FiniteLattice::chain(self.int()?).map_err(wrap),
            "powerset" => FiniteLattice::powerset(self.int()?, DEFAULT_MAX_ELEMENTS).map_err(wrap),
            "diamond" => Ok(FiniteLattice::diamond()),
            "product" => {
                self.expect_sym('(')?;
                let a = self.lattice_decl()?;
                self.expect_sym(',')?;
                let b = self.lattice_decl()?;
                self.expect_sym(')')?;
                FiniteLattice::product(&a, &b, DEFAULT_MAX_ELEMENTS).map_err(wrap)
            }
            "finite" => self.finite_lattice(),
            other => Err(SyntaxError::Parse {
                line,
                col,
                msg: format!("unknown lattice `{other}`"),
            }),
        }
    }

    fn label(&mut self) -> Result<String, SyntaxError> {
        match &self.peek().tok {
            Tok::Ident(s) | Tok::Int(s) | Tok::Quoted(s) => {
                let s = s.clone();
                self.next();
                Ok(s)
            }
            other => self.error(format!(
                "expected an element label, found {}",
                describe(other)
            )),
        }
    }

    fn finite_lattice(&mut self) -> Result<FiniteLattice, SyntaxError> {
        let (line, col) = (self.peek().line, self.peek().col);
        self.expect_sym('{')?;
        let mut labels: Vec<String> = Vec::new();
        let mut covers = Vec::new();
        let mut pending: Vec<(String, String, usize, usize)> = Vec::new();
        while !self.eat_sym('}') {
            let kw = self.ident()?;
            match kw.as_str() {
                "elements" => {
                    while !self.is_sym(';') {
                        let l = self.label()?;
                        if labels.contains(&l) {
                            return self.error(format!("element `{l}` listed twice"));
                        }
                        labels.push(l);
                    }
                }
                "order" => loop {
                    let (l0, c0) = (self.peek().line, self.peek().col);
                    let mut prev = self.label()?;
                    self.expect_sym('<')?;
                    loop {
                        let next = self.label()?;
                        pending.push((prev, next.clone(), l0, c0));
                        prev = next;
                        if !self.eat_sym('<') {
                            break;
                        }
                    }
                    if !self.eat_sym(',') {
                        break;
                    }
                },
                other => {
                    return self.error(format!("expected `elements` or `order`, found `{other}`"))
                }
            }
            self.expect_sym(';')?;
        }
        for (a, b, l, c) in pending {
            let find = |x: &str| labels.iter().position(|y| y == x);
            match (find(&a), find(&b)) {
                (Some(i), Some(j)) => covers.push((i, j)),
                _ => {
                    return Err(SyntaxError::Parse {
                        line: l,
                        col: c,
                        msg: format!("order mentions an undeclared element in `{a} < {b}`"),
                    })
                }
            }
        }
        let poset = Poset::from_covers(labels, &covers);
        FiniteLattice::from_poset("finite", LatticeDecl::Finite, poset)
            .map_err(|source| SyntaxError::Lattice { line, col, source })
    }

    /// An element literal in value position: like in expressions, but bare
    /// names are element labels.
    fn value(&mut self, lattice: &FiniteLattice) -> Result<Element, SyntaxError> {
        if let Tok::Ident(s) = &self.peek().tok {
            if !RESERVED.contains(&s.as_str()) {
                let s = s.clone();
                return match lattice.element(&s) {
                    Some(e) => {
                        self.next();
                        Ok(e)
                    }
                    None => self.error(format!("`{s}` is not an element of the lattice")),
                };
            }
        }
        match self.literal(lattice)? {
            Some(e) => Ok(e),
            None => self.error(format!(
                "expected an element, found {}",
                describe(&self.peek().tok)
            )),
        }
    }

    /// Parses a literal if one starts here.
    fn literal(&mut self, lattice: &FiniteLattice) -> Result<Option<Element>, SyntaxError> {
        let tok = self.peek().tok.clone();
        let lookup = |p: &Parser, label: &str| match lattice.element(label) {
            Some(e) => Ok(Some(e)),
            None => p.error(format!("`{label}` is not an element of the lattice")),
        };
        match tok {
            Tok::Ident(s) if s == "top" => {
                self.next();
                Ok(Some(lattice.top()))
            }
            Tok::Ident(s) if s == "bot" => {
                self.next();
                Ok(Some(lattice.bottom()))
            }
            Tok::Ident(s) if s == "true" || s == "false" => {
                let r = lookup(self, &s)?;
                self.next();
                Ok(r)
            }
            Tok::Int(s) | Tok::Quoted(s) => {
                let r = lookup(self, &s)?;
                self.next();
                Ok(r)
            }
            Tok::Sym('{') => {
                let (line, col) = (self.peek().line, self.peek().col);
                self.next();
                let mut members = Vec::new();
                if !self.is_sym('}') {
                    loop {
                        members.push(self.label()?);
                        if !self.eat_sym(',') {
                            break;
                        }
                    }
                }
                self.expect_sym('}')?;
                match find_set_element(lattice, &members) {
                    Some(e) => Ok(Some(e)),
                    None => Err(SyntaxError::Parse {
                        line,
                        col,
                        msg: format!("{{{}}} is not an element of the lattice", members.join(",")),
                    }),
                }
            }
            _ => Ok(None),
        }
    }

    fn expr(&mut self, lattice: &FiniteLattice) -> Result<Expr, SyntaxError> {
        let mut xs = vec![self.term(lattice)?];
        while self.eat_sym('|') {
            xs.push(self.term(lattice)?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Expr::Join(xs)
        })
    }

    fn term(&mut self, lattice: &FiniteLattice) -> Result<Expr, SyntaxError> {
        let mut xs = vec![self.unary(lattice)?];
        while self.eat_sym('&') {
            xs.push(self.unary(lattice)?);
        }
        Ok(if xs.len() == 1 {
            xs.pop().unwrap()
        } else {
            Expr::Meet(xs)
        })
    }

    fn unary(&mut self, lattice: &FiniteLattice) -> Result<Expr, SyntaxError> {
        if self.is_sym('!') {
            if !lattice.is_bool() {
                return self.error("negation is only available on the Boolean lattice");
            }
            self.next();
            return Ok(Expr::not(self.unary(lattice)?));
        }
        self.atom(lattice)
    }

    fn atom(&mut self, lattice: &FiniteLattice) -> Result<Expr, SyntaxError> {
        if self.eat_sym('(') {
            let e = self.expr(lattice)?;
            self.expect_sym(')')?;
            return Ok(e);
        }
        if let Some(e) = self.literal(lattice)? {
            return Ok(Expr::Const(e));
        }
        let name = self.ident()?;
        match name.as_str() {
            "op" => {
                self.expect_sym('(')?;
                let op = self.ident()?;
                let mut args = Vec::new();
                while self.eat_sym(',') {
                    args.push(self.expr(lattice)?);
                }
                self.expect_sym(')')?;
                Ok(Expr::Apply(op, args))
            }
            "meet" | "join" => {
                self.expect_sym('(')?;
                let mut args = Vec::new();
                if !self.is_sym(')') {
                    loop {
                        args.push(self.expr(lattice)?);
                        if !self.eat_sym(',') {
                            break;
                        }
                    }
                }
                self.expect_sym(')')?;
                Ok(if name == "meet" {
                    Expr::Meet(args)
                } else {
                    Expr::Join(args)
                })
            }
            _ => Ok(Expr::Var(VarName::new(&name))),
        }
    }

    fn var_name(&mut self) -> Result<String, SyntaxError> {
        let name = self.ident()?;
        if RESERVED.contains(&name.as_str()) {
            self.pos -= 1;
            return self.error(format!("`{name}` is reserved and cannot name a variable"));
        }
        Ok(name)
    }
}

fn describe(t: &Tok) -> String {
    match t {
        Tok::Ident(s) => format!("`{s}`"),
        Tok::Int(s) => format!("`{s}`"),
        Tok::Quoted(s) => format!("'{s}'"),
        Tok::Sym(c) => format!("`{c}`"),
        Tok::Eof => "end of input".into(),
    }
}

/// Finds the element labelled as the set `members`, ignoring member order.
fn find_set_element(lattice: &FiniteLattice, members: &[String]) -> Option<Element> {
    let mut want: Vec<&str> = members.iter().map(String::as_str).collect();
    want.sort_unstable();
    lattice.elements().find(|&e| {
        let label = lattice.label(e);
        let Some(inner) = label.strip_prefix('{').and_then(|s| s.strip_suffix('}')) else {
            return false;
        };
        let mut have: Vec<&str> = if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').collect()
        };
        have.sort_unstable();
        have == want
    })
}

struct Pending {
    name: String,
    rhs: Option<Expr>,
    line: usize,
    col: usize,
}

/// Parses a document.
pub fn parse(text: &str) -> Result<Document, SyntaxError> {
    let mut p = Parser {
        toks: lex(text)?,
        pos: 0,
    };
    let lattice = if p.is_kw("lattice") {
        p.next();
        let l = p.lattice_decl()?;
        p.eat_sym(';');
        l
    } else {
        FiniteLattice::bool()
    };
    let lattice = Arc::new(lattice);
    let mut ops = OpRegistry::standard(&lattice);
    let mut defs: Vec<Pending> = Vec::new();
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut signs: Vec<(Sign, String)> = Vec::new();
    let mut spec_override: Option<Vec<(Sign, String, usize, usize)>> = None;
    let mut eta_values: Vec<(String, Element)> = Vec::new();

    while p.peek().tok != Tok::Eof {
        let (line, col) = (p.peek().line, p.peek().col);
        let kw = p.ident()?;
        match kw.as_str() {
            "mu" | "nu" | "eq" => {
                let name = p.var_name()?;
                p.expect_sym('=')?;
                let rhs = p.expr(&lattice)?;
                p.expect_sym(';')?;
                if index.contains_key(&name) {
                    return Err(SyntaxError::Parse {
                        line,
                        col,
                        msg: format!("`{name}` is defined more than once"),
                    });
                }
                index.insert(name.clone(), defs.len());
                defs.push(Pending {
                    name: name.clone(),
                    rhs: Some(rhs),
                    line,
                    col,
                });
                match kw.as_str() {
                    "mu" => signs.push((Sign::Mu, name)),
                    "nu" => signs.push((Sign::Nu, name)),
                    _ => {}
                }
            }
            "param" => {
                let name = p.var_name()?;
                p.expect_sym('=')?;
                let v = p.value(&lattice)?;
                p.expect_sym(';')?;
                if !index.contains_key(&name) {
                    index.insert(name.clone(), defs.len());
                    defs.push(Pending {
                        name: name.clone(),
                        rhs: None,
                        line,
                        col,
                    });
                }
                eta_values.push((name, v));
            }
            "op" => {
                let name = p.ident()?;
                p.expect_sym('/')?;
                let arity = p.int()?;
                let monotone = if p.is_kw("monotone") {
                    p.next();
                    true
                } else {
                    false
                };
                p.expect_sym('=')?;
                p.expect_sym('[')?;
                let mut table = Vec::new();
                if !p.is_sym(']') {
                    loop {
                        table.push(p.value(&lattice)?);
                        if !p.eat_sym(',') {
                            break;
                        }
                    }
                }
                p.expect_sym(']')?;
                p.expect_sym(';')?;
                if name == NOT {
                    return Err(SyntaxError::Parse {
                        line,
                        col,
                        msg: format!("`{NOT}` is a built-in operator"),
                    });
                }
                ops.register(&lattice, &name, arity, table, monotone)
                    .map_err(|e| SyntaxError::Parse {
                        line,
                        col,
                        msg: e.to_string(),
                    })?;
            }
            "spec" => {
                let mut entries = Vec::new();
                if !p.is_sym(';') {
                    loop {
                        let (l, c) = (p.peek().line, p.peek().col);
                        let sign = match p.ident()?.as_str() {
                            "mu" => Sign::Mu,
                            "nu" => Sign::Nu,
                            other => {
                                return Err(SyntaxError::Parse {
                                    line: l,
                                    col: c,
                                    msg: format!("expected `mu` or `nu`, found `{other}`"),
                                })
                            }
                        };
                        entries.push((sign, p.var_name()?, l, c));
                        if !p.eat_sym(',') {
                            break;
                        }
                    }
                }
                p.expect_sym(';')?;
                spec_override = Some(entries);
            }
            "lattice" => {
                return Err(SyntaxError::Parse {
                    line,
                    col,
                    msg: "the lattice must be declared first, and only once".into(),
                })
            }
            other => {
                return Err(SyntaxError::Parse {
                    line,
                    col,
                    msg: format!("expected a statement, found `{other}`"),
                })
            }
        }
    }

    for d in &defs {
        let Some(rhs) = &d.rhs else { continue };
        let err = |msg: String| SyntaxError::Parse {
            line: d.line,
            col: d.col,
            msg,
        };
        if let Some(v) = rhs
            .free_vars()
            .iter()
            .find(|v| !index.contains_key(v.as_str()))
        {
            return Err(err(format!(
                "unknown variable `{v}` in the equation for `{}`",
                d.name
            )));
        }
        check_ops(rhs, &ops).map_err(|e| err(format!("{e} in the equation for `{}`", d.name)))?;
    }

    let equations = defs
        .iter()
        .map(|d| {
            let v = VarName::new(&d.name);
            let rhs = d.rhs.clone().unwrap_or_else(|| Expr::Var(v.clone()));
            (v, rhs)
        })
        .collect();
    let es = EquationSystem::new(lattice, Arc::new(ops), equations)?;

    let spec = match spec_override {
        Some(entries) => {
            let mut out = Vec::new();
            for (s, name, line, col) in entries {
                if !index.contains_key(&name) {
                    return Err(SyntaxError::Parse {
                        line,
                        col,
                        msg: format!("spec mentions undefined variable `{name}`"),
                    });
                }
                out.push((s, VarName::new(&name)));
            }
            Spec::new(out)
        }
        None => Spec::new(
            signs
                .into_iter()
                .map(|(s, n)| (s, VarName::new(&n)))
                .collect(),
        ),
    };
    let mut eta = es.bottom_valuation();
    for (name, v) in eta_values {
        eta.set(index[&name], v);
    }
    Ok(Document {
        fes: Fes::new(es, spec)?,
        eta,
    })
}

fn check_ops(e: &Expr, ops: &OpRegistry) -> Result<(), EqsError> {
    if let Expr::Apply(name, args) = e {
        let op = ops
            .get(name)
            .ok_or_else(|| EqsError::UnknownOp(name.clone()))?;
        if op.arity != args.len() {
            return Err(EqsError::ArityMismatch {
                op: name.clone(),
                expected: op.arity,
                found: args.len(),
            });
        }
    }
    e.children().iter().try_for_each(|c| check_ops(c, ops))
}

/// Parses a document and drops the input valuation.
pub fn parse_fes(text: &str) -> Result<Fes, SyntaxError> {
    Ok(parse(text)?.fes)
}

/// Parses a spec list such as `mu X, nu Y` or `muX,nuY` against `es`.
pub fn parse_spec_list(text: &str, es: &EquationSystem) -> Result<Spec, SyntaxError> {
    let mut out = Vec::new();
    for (k, item) in text.split(',').map(str::trim).enumerate() {
        if item.is_empty() {
            if text.trim().is_empty() {
                break;
            }
            return Err(SyntaxError::Parse {
                line: 1,
                col: k + 1,
                msg: "empty spec entry".into(),
            });
        }
        let (sign, rest) = if let Some(r) = item.strip_prefix("mu") {
            (Sign::Mu, r)
        } else if let Some(r) = item.strip_prefix("nu") {
            (Sign::Nu, r)
        } else {
            return Err(SyntaxError::Parse {
                line: 1,
                col: k + 1,
                msg: format!("spec entry `{item}` must start with mu or nu"),
            });
        };
        let name = VarName::new(rest.trim());
        if es.var_index(&name).is_none() {
            return Err(SemError::UnknownVariable(name.to_string()).into());
        }
        out.push((sign, name));
    }
    Ok(Spec::new(out))
}

fn lattice_line(lattice: &FiniteLattice) -> String {
    fn decl_text(d: &LatticeDecl) -> Option<String> {
        Some(match d {
            LatticeDecl::Bool => "bool".into(),
            LatticeDecl::Chain(n) => format!("chain {n}"),
            LatticeDecl::Powerset(k) => format!("powerset {k}"),
            LatticeDecl::Diamond => "diamond".into(),
            LatticeDecl::Product(a, b) => format!("product({}, {})", decl_text(a)?, decl_text(b)?),
            LatticeDecl::Finite => return None,
        })
    }
    if let Some(t) = decl_text(lattice.decl()) {
        return format!("lattice {t};\n");
    }
    let label = |s: &str| {
        let bare = s
            .chars()
            .next()
            .is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
            && s.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
        let int = !s.is_empty() && s.bytes().all(|b| b.is_ascii_digit());
        if bare || int {
            s.to_string()
        } else {
            format!("'{s}'")
        }
    };
    let elements: Vec<String> = lattice.labels().iter().map(|s| label(s)).collect();
    let mut out = format!("lattice finite {{\n  elements {};\n", elements.join(" "));
    let covers = lattice.cover_labels();
    if !covers.is_empty() {
        let pairs: Vec<String> = covers
            .iter()
            .map(|(a, b)| format!("{} < {}", label(a), label(b)))
            .collect();
        let _ = writeln!(out, "  order {};", pairs.join(", "));
    }
    out.push_str("};\n");
    out
}

/// Canonical text of a document. Parsing the output gives back an equal
/// document.
pub fn print(doc: &Document) -> String {
    let fes = &doc.fes;
    let es = &fes.es;
    let lattice = es.lattice();
    let mut out = lattice_line(lattice);
    for op in es.ops().custom() {
        let vals: Vec<String> = op
            .table
            .iter()
            .map(|&e| element_literal(lattice, e))
            .collect();
        let _ = writeln!(
            out,
            "op {}/{}{} = [{}];",
            op.name,
            op.arity,
            if op.monotone { " monotone" } else { "" },
            vals.join(", ")
        );
    }

    // the spec can be written as mu/nu keywords when it lists distinct
    // variables in definition order
    let positions: Vec<usize> = fes
        .spec
        .entries()
        .iter()
        .map(|(_, v)| es.var_index(v).expect("valid spec"))
        .collect();
    let implicit = positions.windows(2).all(|w| w[0] < w[1]);
    let sign_of: HashMap<usize, Sign> = fes
        .spec
        .entries()
        .iter()
        .zip(&positions)
        .map(|((s, _), &i)| (i, *s))
        .collect();

    for (i, (v, rhs)) in es.equations().enumerate() {
        let value = doc.eta.get(i);
        let as_param = *rhs == Expr::Var(v.clone());
        match sign_of.get(&i) {
            Some(s) if implicit => {
                let _ = writeln!(out, "{} {v} = {};", s.keyword(), es.display(rhs));
            }
            _ if as_param => {
                let _ = writeln!(out, "param {v} = {};", element_literal(lattice, value));
                continue;
            }
            _ => {
                let _ = writeln!(out, "eq {v} = {};", es.display(rhs));
            }
        }
        if value != lattice.bottom() {
            let _ = writeln!(out, "param {v} = {};", element_literal(lattice, value));
        }
    }
    if !implicit {
        let entries: Vec<String> = fes
            .spec
            .entries()
            .iter()
            .map(|(s, v)| format!("{} {v}", s.keyword()))
            .collect();
        let _ = writeln!(out, "spec {};", entries.join(", "));
    }
    out
}

/// Canonical text of an FES with the all-bottom input valuation.
pub fn print_fes(fes: &Fes) -> String {
    print(&Document {
        fes: fes.clone(),
        eta: fes.es.bottom_valuation(),
    })
}

/// One `name = value` line per spec variable, in spec order, first
/// occurrence only.
pub fn print_valuation(fes: &Fes, v: &Valuation) -> String {
    let mut out = String::new();
    let mut seen = std::collections::HashSet::new();
    for (_, name) in fes.spec.entries() {
        if !seen.insert(name.clone()) {
            continue;
        }
        let i = fes.es.var_index(name).expect("valid spec");
        let _ = writeln!(out, "{name} = {}", fes.es.lattice().label(v.get(i)));
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    const GAUSS: &str = "lattice bool;\nmu X = Y | Z;\nnu Y = Z;\nmu Z = Y & X;\n";

    #[test]
    fn gauss_example_parses() {
        let doc = parse(GAUSS).unwrap();
        assert_eq!(doc.fes.es.len(), 3);
        assert!(doc.fes.es.lattice().is_bool());
        assert_eq!(doc.fes.spec.to_string(), "[mu X, nu Y, mu Z]");
        assert_eq!(print(&doc), GAUSS);
    }

    #[test]
    fn empty_equation_list() {
        let doc = parse("lattice chain 3;").unwrap();
        assert!(doc.fes.spec.is_empty());
        assert!(doc.fes.es.is_empty());
        let doc = parse("").unwrap();
        assert!(doc.fes.es.lattice().is_bool());
    }

    #[test]
    fn errors_carry_positions() {
        let e = parse("mu X = Y & ;").unwrap_err();
        assert!(
            matches!(
                e,
                SyntaxError::Parse {
                    line: 1,
                    col: 12,
                    ..
                }
            ),
            "{e}"
        );
        let e = parse("mu X = Q;").unwrap_err();
        assert!(e.to_string().contains("unknown variable `Q`"), "{e}");
        let e = parse("mu X = X;\nnu X = X;").unwrap_err();
        assert!(
            matches!(
                e,
                SyntaxError::Parse {
                    line: 2,
                    col: 1,
                    ..
                }
            ),
            "{e}"
        );
        let e = parse("lattice chain 3;\nmu X = 7;").unwrap_err();
        assert!(e.to_string().contains("not an element"), "{e}");
        let e = parse("lattice diamond;\nmu X = !X;").unwrap_err();
        assert!(e.to_string().contains("negation"), "{e}");
        let e = parse("lattice finite { elements a b; };").unwrap_err();
        assert!(e.to_string().contains("no glb for {a,b}"), "{e}");
    }

    #[test]
    fn lattice_declarations() {
        let l = |t: &str| parse(t).unwrap().fes.es.lattice().clone();
        assert_eq!(l("lattice powerset 2;").len(), 4);
        assert_eq!(l("lattice product(bool, chain 3);").len(), 6);
        let fin = l("lattice finite { elements lo m1 m2 hi; order lo < m1 < hi, lo < m2 < hi; };");
        let labels = ["lo", "m1", "m2", "hi"].map(String::from).to_vec();
        let poset = Poset::from_covers(labels, &[(0, 1), (0, 2), (1, 3), (2, 3)]);
        let want = FiniteLattice::from_poset("x", LatticeDecl::Finite, poset).unwrap();
        assert_eq!(fin, want);
        assert_eq!(print_fes(&parse("lattice finite { elements lo m1 m2 hi; order lo < m1 < hi, lo < m2 < hi; };").unwrap().fes),
            "lattice finite {\n  elements lo m1 m2 hi;\n  order lo < m1, lo < m2, m1 < hi, m2 < hi;\n};\n");
    }

    #[test]
    fn literals_and_params() {
        let doc = parse(
            "lattice powerset 3;\nparam P = {d3,d1};\nmu X = P & {d1,d2} | bot;\nnu Y = meet();\n",
        )
        .unwrap();
        let es = &doc.fes.es;
        let p = es.index_of("P").unwrap();
        assert_eq!(es.lattice().label(doc.eta.get(p)), "{d1,d3}");
        let r = doc.fes.solve(&doc.eta).unwrap();
        assert_eq!(print_valuation(&doc.fes, &r), "X = {d1}\nY = {d1,d2,d3}\n");
        let again = parse(&print(&doc)).unwrap();
        assert_eq!(again, doc);
    }

    #[test]
    fn spec_override_round_trips() {
        let text = "eq X = Y;\neq Y = X | Y;\nspec nu Y, mu X, mu Y;\n";
        let doc = parse(&format!("lattice bool;\n{text}")).unwrap();
        assert!(doc.fes.spec.has_duplicates());
        assert_eq!(print(&doc), format!("lattice bool;\n{text}"));
        let s = parse_spec_list("muX, nu Y", &doc.fes.es).unwrap();
        assert_eq!(s.to_string(), "[mu X, nu Y]");
        assert!(parse_spec_list("muQ", &doc.fes.es).is_err());
    }

    #[test]
    fn ops_round_trip() {
        let text = "lattice powerset 2;\nop swap/1 monotone = [bot, {d2}, {d1}, top];\nmu X = op(swap, X) | {d1};\n";
        let doc = parse(text).unwrap();
        assert_eq!(print(&doc), text);
        let bad = "lattice chain 2;\nop flip/1 monotone = [1, 0];\n";
        assert!(parse(bad)
            .unwrap_err()
            .to_string()
            .contains("declared monotone"));
    }

    #[test]
    fn structure_survives_printing() {
        let text = "lattice bool;\nmu X = (X | Y) | !(Y & X) & join(X);\nnu Y = (Y & X) & top;\n";
        let doc = parse(text).unwrap();
        assert_eq!(print(&doc), text);
    }
}
