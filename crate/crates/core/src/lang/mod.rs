//! The imperative language: syntax, parsing, printing and the relational
//! interpreter. The knowledge-base file format shares the same lexer.

mod interp;
mod lexer;
mod parser;
mod printer;

use std::collections::BTreeSet;
use std::fmt;

use crate::calculus::TwoTierAssertion;
use crate::state::Term;

pub use interp::{eval_expr, interpret, truthy, CallTable, InterpContext, InterpError, Outcome};
pub use parser::{
    parse_assertion, parse_concept, parse_domain_formulas, parse_domain_set, parse_kb, parse_program,
    parse_state_formula, parse_statements,
};
pub use printer::{pretty_kb, pretty_program};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

impl ParseError {
    pub fn at(line: usize, col: usize, message: impl Into<String>) -> Self {
        ParseError { line, col, message: message.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Expr {
    Int(i64),
    Var(String),
}

impl Expr {
    pub fn to_term(&self) -> Term {
        match self {
            Expr::Int(n) => Term::Int(*n),
            Expr::Var(v) => Term::Var(v.clone()),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Int(n) => write!(f, "{n}"),
            Expr::Var(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Statement {
    Assign(String, Expr),
    Seq(Box<Statement>, Box<Statement>),
    If(Expr, Box<Statement>, Box<Statement>),
    While(Expr, Box<Statement>),
    Call(String, Expr),
    Skip,
}

impl Statement {
    pub fn seq(a: Statement, b: Statement) -> Self {
        Statement::Seq(Box::new(a), Box::new(b))
    }

    /// Right-nested sequence; `None` for an empty list.
    pub fn from_list(stmts: Vec<Statement>) -> Option<Statement> {
        let mut it = stmts.into_iter().rev();
        let last = it.next()?;
        Some(it.fold(last, |acc, s| Statement::seq(s, acc)))
    }

    /// Top-level statements with sequencing flattened.
    pub fn flatten(&self) -> Vec<&Statement> {
        match self {
            Statement::Seq(a, b) => {
                let mut v = a.flatten();
                v.extend(b.flatten());
                v
            }
            other => vec![other],
        }
    }

    /// Equality up to associativity of sequencing.
    pub fn seq_eq(&self, other: &Statement) -> bool {
        let (a, b) = (self.flatten(), other.flatten());
        a.len() == b.len()
            && a.iter().zip(b.iter()).all(|(x, y)| match (x, y) {
                (Statement::If(e1, t1, f1), Statement::If(e2, t2, f2)) => e1 == e2 && t1.seq_eq(t2) && f1.seq_eq(f2),
                (Statement::While(e1, b1), Statement::While(e2, b2)) => e1 == e2 && b1.seq_eq(b2),
                (x, y) => x == y,
            })
    }

    pub fn size(&self) -> usize {
        match self {
            Statement::Seq(a, b) => a.size() + b.size(),
            Statement::If(_, a, b) => 1 + a.size() + b.size(),
            Statement::While(_, b) => 1 + b.size(),
            _ => 1,
        }
    }

    /// Whether only assignments and skips occur.
    pub fn is_straight_line(&self) -> bool {
        self.flatten().iter().all(|s| matches!(s, Statement::Assign(..) | Statement::Skip))
    }

    pub fn constants(&self, out: &mut BTreeSet<i64>) {
        let mut e = |x: &Expr| {
            if let Expr::Int(n) = x {
                out.insert(*n);
            }
        };
        self.visit_exprs(&mut e);
    }

    pub fn vars(&self, out: &mut BTreeSet<String>) {
        self.visit(&mut |s| {
            if let Statement::Assign(v, _) = s {
                out.insert(v.clone());
            }
        });
        self.visit_exprs(&mut |x| {
            if let Expr::Var(v) = x {
                out.insert(v.clone());
            }
        });
    }

    fn visit(&self, f: &mut impl FnMut(&Statement)) {
        f(self);
        match self {
            Statement::Seq(a, b) | Statement::If(_, a, b) => {
                a.visit(f);
                b.visit(f);
            }
            Statement::While(_, b) => b.visit(f),
            _ => {}
        }
    }

    fn visit_exprs(&self, f: &mut impl FnMut(&Expr)) {
        match self {
            Statement::Assign(_, e) | Statement::Call(_, e) => f(e),
            Statement::Seq(a, b) => {
                a.visit_exprs(f);
                b.visit_exprs(f);
            }
            Statement::If(e, a, b) => {
                f(e);
                a.visit_exprs(f);
                b.visit_exprs(f);
            }
            Statement::While(e, b) => {
                f(e);
                b.visit_exprs(f);
            }
            Statement::Skip => {}
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Contract {
    pub pre: TwoTierAssertion,
    pub post: TwoTierAssertion,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Procedure {
    pub name: String,
    pub param: String,
    pub contract: Contract,
    pub body: Statement,
}

impl Procedure {
    /// Contract precondition with the parameter replaced by `arg`.
    pub fn pre_for(&self, arg: &Expr) -> TwoTierAssertion {
        self.contract.pre.substitute(&self.param, &arg.to_term())
    }

    pub fn post_for(&self, arg: &Expr) -> TwoTierAssertion {
        self.contract.post.substitute(&self.param, &arg.to_term())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Program {
    pub globals: Vec<(String, i64)>,
    pub procedures: Vec<Procedure>,
}

impl Program {
    pub fn procedure(&self, name: &str) -> Option<&Procedure> {
        self.procedures.iter().find(|p| p.name == name)
    }

    /// State variables visible in `proc`: the globals and its parameter.
    pub fn state_vars(&self, proc: &Procedure) -> Vec<String> {
        let mut vars: BTreeSet<String> = self.globals.iter().map(|(v, _)| v.clone()).collect();
        vars.insert(proc.param.clone());
        vars.into_iter().collect()
    }

    /// Every variable name occurring anywhere: globals, parameters, and the
    /// variables of contracts and bodies.
    pub fn all_vars(&self) -> BTreeSet<String> {
        let mut vars: BTreeSet<String> = self.globals.iter().map(|(v, _)| v.clone()).collect();
        for p in &self.procedures {
            vars.insert(p.param.clone());
            p.body.vars(&mut vars);
            vars.extend(p.contract.pre.state.vars());
            vars.extend(p.contract.post.state.vars());
        }
        vars
    }

    pub fn constants(&self) -> BTreeSet<i64> {
        let mut out: BTreeSet<i64> = self.globals.iter().map(|(_, n)| *n).collect();
        for p in &self.procedures {
            p.body.constants(&mut out);
            out.extend(p.contract.pre.state.constants());
            out.extend(p.contract.post.state.constants());
        }
        out
    }

    /// Scope and symbol checks the parser does not perform.
    pub fn validate(&self) -> Result<(), String> {
        let mut names = BTreeSet::new();
        for p in &self.procedures {
            if !names.insert(p.name.as_str()) {
                return Err(format!("procedure `{}` defined twice", p.name));
            }
        }
        for p in &self.procedures {
            let scope: BTreeSet<String> = self.state_vars(p).into_iter().collect();
            for (which, a) in [("requires", &p.contract.pre), ("ensures", &p.contract.post)] {
                if a.state.has_uninterpreted() {
                    return Err(format!(
                        "{}: {which} clause uses function or predicate symbols, which the verifier does not support",
                        p.name
                    ));
                }
                if let Some(v) = a.state.vars().difference(&scope).next() {
                    return Err(format!("{}: {which} clause mentions undeclared variable `{v}`", p.name));
                }
            }
            let mut used = BTreeSet::new();
            p.body.vars(&mut used);
            if let Some(v) = used.difference(&scope).next() {
                return Err(format!("{}: undeclared variable `{v}`", p.name));
            }
            let mut missing = None;
            p.body.visit(&mut |s| {
                if let Statement::Call(q, _) = s {
                    if self.procedure(q).is_none() && missing.is_none() {
                        missing = Some(q.clone());
                    }
                }
            });
            if let Some(q) = missing {
                return Err(format!("{}: call to undefined procedure `{q}`", p.name));
            }
        }
        Ok(())
    }
}
